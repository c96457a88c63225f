"""Training losses (evaluated as diagnostics) and objective metrics."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ShapeError
from .frontend import StftConfig, frame_signal

SI_SNR_CAP_DB = 80.0


@dataclass(frozen=True)
class LossWeights:
    beta: float = 0.0002
    echo_weight: float = 0.1
    epsilon: float = 0.1

    def __post_init__(self):
        if self.beta < 0:
            raise ValueError("beta must be non-negative")


def _check_same(a, b):
    if a.shape != b.shape:
        raise ShapeError(f"shape mismatch: {a.shape} vs {b.shape}")


def mae_loss(est, ref) -> float:
    """MAE over real parts + MAE over imaginary parts + MAE over magnitudes."""
    est = np.asarray(est, dtype=np.complex128)
    ref = np.asarray(ref, dtype=np.complex128)
    _check_same(est, ref)
    return float(
        np.mean(np.abs(est.real - ref.real))
        + np.mean(np.abs(est.imag - ref.imag))
        + np.mean(np.abs(np.abs(est) - np.abs(ref)))
    )


def vad_loss(est, labels, epsilon: float = 0.1) -> float:
    """Energy of the estimate on frames where the near-end talker is inactive, in dB."""
    est = np.asarray(est, dtype=np.complex128)
    labels = np.asarray(labels, dtype=bool)
    if labels.shape != est.shape[:1]:
        raise ShapeError(f"{labels.shape[0]} VAD labels for {est.shape[0]} frames")
    inactive = est[~labels]
    return float(10.0 * np.log10(np.sum(np.abs(inactive) ** 2) + epsilon))


def echo_loss(est, ref, echo_active) -> float:
    """Stand-in echo-aware loss: :func:`mae_loss` restricted to echo-active frames (0 if none)."""
    est = np.asarray(est)
    ref = np.asarray(ref)
    _check_same(est, ref)
    mask = np.asarray(echo_active, dtype=bool)
    if mask.shape != est.shape[:1]:
        raise ShapeError("echo activity must have one entry per frame")
    if not mask.any():
        return 0.0
    return mae_loss(est[mask], ref[mask])


def total_loss(est, ref, labels, echo_active, w: LossWeights = LossWeights(), echo_fn=echo_loss) -> float:
    return (
        mae_loss(est, ref)
        + w.echo_weight * echo_fn(est, ref, echo_active)
        + w.beta * vad_loss(est, labels, w.epsilon)
    )


def vad_from_signal(near_end, cfg: StftConfig = StftConfig(), threshold_db: float = -40.0) -> np.ndarray:
    """Frame active iff its RMS exceeds the loudest frame's RMS by ``threshold_db`` (STFT framing)."""
    x = np.asarray(getattr(near_end, "samples", near_end), dtype=np.float64)
    rms = np.sqrt(np.mean(frame_signal(x, cfg) ** 2, axis=1))
    peak = rms.max() if len(rms) else 0.0
    return rms > peak * 10 ** (threshold_db / 20)


def si_snr(estimate, target) -> float:
    """Scale-invariant SNR in dB (means removed), capped at 80 dB."""
    est = np.asarray(getattr(estimate, "samples", estimate), dtype=np.float64)
    tgt = np.asarray(getattr(target, "samples", target), dtype=np.float64)
    _check_same(est, tgt)
    est = est - est.mean()
    tgt = tgt - tgt.mean()
    t_energy = np.dot(tgt, tgt)
    if t_energy == 0:
        raise ValueError("SI-SNR is undefined for a zero target")
    s_t = np.dot(est, tgt) / t_energy * tgt
    noise = np.dot(est - s_t, est - s_t)
    signal = np.dot(s_t, s_t)
    if noise == 0:
        return SI_SNR_CAP_DB
    return float(min(10.0 * np.log10(signal / noise), SI_SNR_CAP_DB)) if signal > 0 else -SI_SNR_CAP_DB


def erle(mic, out) -> float:
    mic = np.asarray(getattr(mic, "samples", mic), dtype=np.float64)
    out = np.asarray(getattr(out, "samples", out), dtype=np.float64)
    _check_same(mic, out)
    return float(10.0 * np.log10(np.mean(mic**2) / np.mean(out**2)))


def segmental_erle(mic, out, seg: int = 16000) -> np.ndarray:
    """ERLE per non-overlapping segment (1 s at 16 kHz by default)."""
    mic = np.asarray(mic, dtype=np.float64)
    out = np.asarray(out, dtype=np.float64)
    n = len(mic) // seg
    return np.array([erle(mic[i * seg : (i + 1) * seg], out[i * seg : (i + 1) * seg]) for i in range(n)])
