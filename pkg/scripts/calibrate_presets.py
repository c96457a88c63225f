"""Regenerate the committed preset files.

T and H fix E (10 and 200); S and L take the integer E whose model-only MACs/s
lands closest to 0.11 and 1.03 G/s.  Run from the repo root:

    python scripts/calibrate_presets.py
"""
import json
from dataclasses import replace
from pathlib import Path

from smru.complexity import bisect_embedding, count_macs
from smru.config import ModelConfig

OUT = Path(__file__).resolve().parents[1] / "src" / "smru" / "presets"
TARGETS = {"S": 0.11e9, "L": 1.03e9}


def main():
    base = ModelConfig()
    embeddings = {"T": 10, "H": 200}
    for name, target in TARGETS.items():
        embeddings[name] = bisect_embedding(target, base)
    for name in ("T", "S", "L", "H"):
        cfg = replace(base, E=embeddings[name], name=name)
        rep = count_macs(cfg)
        (OUT / f"{name}.json").write_text(json.dumps(cfg.to_json(), indent=2) + "\n")
        print(f"{name}: E={cfg.E:4d}  model {rep.model_macs_per_second / 1e9:.4f} G/s  "
              f"postnet {rep.postnet_macs_per_second / 1e6:.1f} M/s  params {rep.params:,}")


if __name__ == "__main__":
    main()
