"""Print MACs/s and parameter counts for every preset plus the E sweep used for the bands.

    python scripts/complexity_table.py
"""
from dataclasses import replace

from smru.complexity import count_macs, unet_macs_per_second
from smru.config import PRESETS, ModelConfig


def main():
    print(f"{'preset':>6} {'E':>4} {'model M/s':>11} {'postnet M/s':>12} {'params':>12}")
    for name in PRESETS:
        rep = count_macs(ModelConfig.preset(name))
        print(f"{name:>6} {rep.E:>4} {rep.model_macs_per_second / 1e6:>11.2f} "
              f"{rep.postnet_macs_per_second / 1e6:>12.2f} {rep.params:>12,}")
    print("\nU-Net share vs E (no postnet):")
    base = ModelConfig.preset("T").with_postnet(False)
    for e in (10, 25, 50, 100, 200):
        cfg = replace(base, E=e)
        total = count_macs(cfg).total_macs_per_second
        print(f"  E={e:<4d} total {total / 1e6:9.2f} M/s  blocks {100 * unet_macs_per_second(cfg) / total:5.1f} %")


if __name__ == "__main__":
    main()
