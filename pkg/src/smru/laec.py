"""Partitioned-block frequency-domain Kalman filter for linear echo cancellation.

Overlap-save with block length equal to the STFT hop (160 samples) and an
FFT of twice that, so one filter step consumes exactly one hop of mic and
far-end audio and produces one hop of error ``e`` and echo estimate ``y``
with no added delay.  The state model is diagonal per bin and partition:

    W <- A (W + constrain(mu X* E)),      mu = P / (sum_k P_k |X_k|^2 + 2 psi_s)
    P <- A^2 (1 - 0.5 mu |X|^2) P + (1 - A^2) |W|^2

where ``psi_s`` is a recursively smoothed estimate of ``|E|^2``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericError, ShapeError


@dataclass(frozen=True)
class LaecConfig:
    block: int = 160
    partitions: int = 10  # 10 x 10 ms = 100 ms tail
    transition: float = 0.999
    noise_smoothing: float = 0.99
    floor: float = 1e-10
    p_init: float = 0.1

    @property
    def n_bins(self) -> int:
        return self.block + 1


@dataclass
class KalmanFilterState:
    W: np.ndarray  # [K, F] complex filter partitions
    P: np.ndarray  # [K, F] state-error variance
    X: np.ndarray  # [K, F] far-end block spectra, newest first
    psi_s: np.ndarray  # [F] observation-noise estimate
    psi_d: np.ndarray  # [K, F] process-noise term of the last update
    x_prev: np.ndarray  # [block] previous far-end block (overlap-save history)
    cfg: LaecConfig = LaecConfig()

    @classmethod
    def create(cls, cfg: LaecConfig = LaecConfig()) -> "KalmanFilterState":
        k, f = cfg.partitions, cfg.n_bins
        return cls(
            W=np.zeros((k, f), np.complex128),
            P=np.full((k, f), cfg.p_init),
            X=np.zeros((k, f), np.complex128),
            psi_s=np.full(f, cfg.floor),
            psi_d=np.zeros((k, f)),
            x_prev=np.zeros(cfg.block),
            cfg=cfg,
        )

    def copy(self) -> "KalmanFilterState":
        return KalmanFilterState(
            self.W.copy(), self.P.copy(), self.X.copy(), self.psi_s.copy(),
            self.psi_d.copy(), self.x_prev.copy(), self.cfg,
        )

    def arrays(self) -> dict:
        return {"W": self.W, "P": self.P, "X": self.X, "psi_s": self.psi_s, "psi_d": self.psi_d, "x_prev": self.x_prev}


def laec_step(state: KalmanFilterState, d_block: np.ndarray, x_block: np.ndarray):
    """Filter one hop in place; returns ``(e_block, y_block)`` as float64."""
    cfg = state.cfg
    m = cfg.block
    d_block = np.asarray(d_block, dtype=np.float64)
    x_block = np.asarray(x_block, dtype=np.float64)
    if d_block.shape != (m,) or x_block.shape != (m,):
        raise ShapeError(f"laec_step expects {m}-sample blocks")
    if not (np.all(np.isfinite(d_block)) and np.all(np.isfinite(x_block))):
        raise NumericError("non-finite input to laec_step")

    xn = np.fft.rfft(np.concatenate([state.x_prev, x_block]))
    state.x_prev = x_block.copy()
    state.X[1:] = state.X[:-1]
    state.X[0] = xn

    Y = np.sum(state.W * state.X, axis=0)
    y = np.fft.irfft(Y)[m:]
    e = d_block - y

    E = np.fft.rfft(np.concatenate([np.zeros(m), e]))
    a = cfg.noise_smoothing
    state.psi_s = np.maximum(a * state.psi_s + (1.0 - a) * np.abs(E) ** 2, cfg.floor)

    x_pow = np.abs(state.X) ** 2
    phi = np.sum(state.P * x_pow, axis=0) + 2.0 * state.psi_s + cfg.floor
    mu = state.P / phi
    grad = np.fft.irfft(mu * np.conj(state.X) * E, axis=-1)
    grad[:, m:] = 0.0
    A = cfg.transition
    state.W = A * (state.W + np.fft.rfft(grad, axis=-1))
    state.psi_d = (1.0 - A * A) * np.abs(state.W) ** 2
    state.P = A * A * (1.0 - 0.5 * mu * x_pow) * state.P + state.psi_d
    return e, y


def laec_process(d, x, cfg: LaecConfig = LaecConfig()):
    """Run the filter over whole signals; returns float32 ``(e, y)`` of input length.

    The tail is zero-padded to a whole number of blocks and trimmed afterwards.
    """
    d = np.asarray(getattr(d, "samples", d), dtype=np.float64)
    x = np.asarray(getattr(x, "samples", x), dtype=np.float64)
    if d.shape != x.shape or d.ndim != 1:
        raise ShapeError(f"mic and far-end lengths differ: {d.shape} vs {x.shape}")
    n = len(d)
    m = cfg.block
    n_blocks = -(-n // m)
    pad = n_blocks * m - n
    dp, xp = np.pad(d, (0, pad)), np.pad(x, (0, pad))
    e = np.empty(n_blocks * m)
    y = np.empty(n_blocks * m)
    state = KalmanFilterState.create(cfg)
    for b in range(n_blocks):
        sl = slice(b * m, (b + 1) * m)
        e[sl], y[sl] = laec_step(state, dp[sl], xp[sl])
    return e[:n].astype(np.float32), y[:n].astype(np.float32)
