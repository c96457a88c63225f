"""Per-second ERLE of the linear stage on noise-free far-end-only scenes.

    python scripts/laec_convergence.py [--seconds 10] [--scenes 4]
"""
import argparse
import math

import numpy as np

from smru.laec import laec_process
from smru.losses import segmental_erle
from smru.scenes import SceneSpec, mix_scene, synth_rir


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seconds", type=float, default=10.0)
    ap.add_argument("--scenes", type=int, default=4)
    ap.add_argument("--rir-ms", type=float, default=32.0)
    args = ap.parse_args()
    for seed in range(args.scenes):
        spec = SceneSpec(seed=seed, duration=args.seconds, scenario="ST-FE", ser_db=-math.inf,
                         snr_db=math.inf, rir_ms=args.rir_ms)
        sc = mix_scene(spec)
        e, _ = laec_process(sc.mic, sc.farend)
        seg = segmental_erle(sc.mic, e)
        print(f"seed {seed}: " + " ".join(f"{v:5.1f}" for v in seg) + f"   last {seg[-1]:.1f} dB")
    print("white-noise excitation:")
    rng = np.random.default_rng(0)
    x = 0.1 * rng.standard_normal(int(args.seconds * 16000))
    d = np.convolve(x, synth_rir(args.rir_ms, 0.2, 1))[: len(x)]
    e, _ = laec_process(d, x)
    print("        " + " ".join(f"{v:5.1f}" for v in segmental_erle(d, e)))


if __name__ == "__main__":
    main()
