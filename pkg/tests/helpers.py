from dataclasses import replace

import numpy as np

from smru.config import ModelConfig, PostnetConfig
from smru.frontend import stft
from smru.laec import laec_process


def tiny_config(**kw) -> ModelConfig:
    base = replace(
        ModelConfig.preset("T"), E=4, lambda_schedule=(1, 2, 4, 4, 2, 1),
        postnet=PostnetConfig(hidden=16, groups=4, df_order=3), name="tiny",
    )
    return replace(base, **kw)


def random_spectra(rng, n_frames, scale=0.05):
    n = (n_frames - 1) * 160 + 320
    d = scale * rng.standard_normal(n)
    x = scale * rng.standard_normal(n)
    e, y = laec_process(d, x)
    return [stft(s) for s in (d, x, e, y)]


def randomize_norms(w, rng):
    """Init leaves norm gains at 1 and biases at 0; jitter them so tests exercise them."""
    for k, v in w.items():
        if k.endswith((".gain",)) or (".norm" in k and k.endswith(".bias")):
            w[k] = (v + 0.2 * rng.standard_normal(v.shape)).astype(np.float32)
    return w
