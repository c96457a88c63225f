"""Offline end-to-end enhancement: LAEC -> STFT x4 -> SMRU -> iSTFT."""
from __future__ import annotations

import numpy as np

from .config import ModelConfig
from .errors import ShapeError
from .frontend import StftConfig, istft, stft
from .laec import LaecConfig, laec_process
from .model import smru_forward

STFT = StftConfig()


def pad_to_hops(x: np.ndarray, hop: int, min_len: int) -> np.ndarray:
    n = max(len(x), min_len)
    n = -(-n // hop) * hop
    return np.pad(x, (0, n - len(x)))


def enhance_offline(mic, farend, cfg: ModelConfig, weights, trace: dict | None = None) -> np.ndarray:
    """Enhanced float32 audio of the same length as ``mic``.

    Inputs are zero-padded to whole hops (and at least one window) before
    processing and the result is trimmed back.
    """
    d = np.asarray(getattr(mic, "samples", mic), dtype=np.float32)
    x = np.asarray(getattr(farend, "samples", farend), dtype=np.float32)
    if d.shape != x.shape or d.ndim != 1:
        raise ShapeError(f"mic {d.shape} and far-end {x.shape} must be equal-length 1-D signals")
    n = len(d)
    d = pad_to_hops(d, STFT.hop, STFT.window_len)
    x = pad_to_hops(x, STFT.hop, STFT.window_len)
    e, y = laec_process(d, x, LaecConfig(block=STFT.hop))
    spectra = [stft(s, STFT) for s in (d, x, e, y)]
    S = smru_forward(*spectra, cfg, weights, trace)
    if trace is not None:
        trace.update(laec_e=e, laec_y=y)
    return istft(S, STFT)[:n]
