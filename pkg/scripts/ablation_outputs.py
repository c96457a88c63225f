"""Run the structural ablations on one scene with random weights and report output statistics.

Untrained weights say nothing about quality; this only shows that each
variant builds, runs causally and has the expected cost.

    python scripts/ablation_outputs.py [--preset T] [--seed 0]
"""
import argparse
from dataclasses import replace

import numpy as np

from smru.complexity import count_macs
from smru.config import ModelConfig
from smru.pipeline import enhance_offline
from smru.scenes import SceneSpec, mix_scene
from smru.weights import init_weights

VARIANTS = {
    "full": {},
    "single-scale": {"multiscale": False},
    "no-dense": {"dense_skips": False},
    "no-compression": {"lambda_schedule": (1,) * 12},
}


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--preset", default="T")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    base = ModelConfig.preset(args.preset)
    sc = mix_scene(SceneSpec(seed=args.seed, duration=2.0))
    for postnet in (True, False):
        for name, flags in VARIANTS.items():
            cfg = replace(base, **flags).with_postnet(postnet)
            out = enhance_offline(sc.mic, sc.farend, cfg, init_weights(cfg, args.seed))
            rep = count_macs(cfg)
            print(f"{name:15s} postnet={postnet!s:5s} {rep.total_macs_per_second / 1e6:8.2f} M/s "
                  f"out rms {np.sqrt(np.mean(out ** 2)):.3e}")


if __name__ == "__main__":
    main()
