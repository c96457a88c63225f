"""Audio buffers, WAV I/O and the STFT/iSTFT pair.

Framing is strictly causal: frame ``t`` covers samples
``[t * hop, t * hop + window_len)`` with no centre padding, so the first
frame is available as soon as one window of audio has arrived.
"""
from __future__ import annotations

import wave
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import FormatError, NumericError, ShapeError

SAMPLE_RATE = 16000


def sqrt_hann(n: int) -> np.ndarray:
    """Periodic square-root Hann window; its square is COLA at 50 % overlap."""
    return np.sqrt(0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(n) / n))


@dataclass(frozen=True)
class StftConfig:
    window_len: int = 320
    hop: int = 160
    window: np.ndarray = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.hop * 2 != self.window_len:
            raise ShapeError("hop must be half the window length")
        if self.window is None:
            object.__setattr__(self, "window", sqrt_hann(self.window_len))
        elif len(self.window) != self.window_len:
            raise ShapeError("window length mismatch")

    @property
    def n_bins(self) -> int:
        return self.window_len // 2 + 1

    def n_frames(self, n_samples: int) -> int:
        return 1 + (n_samples - self.window_len) // self.hop


@dataclass
class AudioBuffer:
    samples: np.ndarray
    sample_rate: int = SAMPLE_RATE

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float32)
        if self.samples.ndim != 1:
            raise ShapeError("audio must be mono (1-D)")
        if self.sample_rate != SAMPLE_RATE:
            raise FormatError(f"sample rate must be {SAMPLE_RATE} Hz, got {self.sample_rate}")
        if not np.all(np.isfinite(self.samples)):
            raise NumericError("audio contains non-finite samples")

    def __len__(self):
        return len(self.samples)


def _samples(audio) -> np.ndarray:
    return np.asarray(getattr(audio, "samples", audio), dtype=np.float64)


def frame_signal(x: np.ndarray, cfg: StftConfig) -> np.ndarray:
    """``[T, window_len]`` view of causal frames."""
    t = cfg.n_frames(len(x))
    return np.lib.stride_tricks.sliding_window_view(x, cfg.window_len)[:: cfg.hop][:t]


def stft(audio, cfg: StftConfig = StftConfig()) -> np.ndarray:
    """Complex spectrogram ``[T, F]`` (complex64)."""
    x = _samples(audio)
    if x.ndim != 1:
        raise ShapeError("stft expects 1-D audio")
    if len(x) < cfg.window_len:
        raise ShapeError(f"audio of {len(x)} samples is shorter than one window ({cfg.window_len})")
    frames = frame_signal(x, cfg) * cfg.window
    return np.fft.rfft(frames, axis=-1).astype(np.complex64)


def stft_frame(frame: np.ndarray, cfg: StftConfig = StftConfig()) -> np.ndarray:
    """Spectrum of a single ``window_len`` frame; matches the matching row of :func:`stft`."""
    return np.fft.rfft(np.asarray(frame, dtype=np.float64) * cfg.window).astype(np.complex64)


def synth_frame(spec_row: np.ndarray, cfg: StftConfig = StftConfig()) -> np.ndarray:
    """Windowed time frame (float64) for overlap-add."""
    return np.fft.irfft(spec_row.astype(np.complex128), n=cfg.window_len) * cfg.window


def istft(spec: np.ndarray, cfg: StftConfig = StftConfig()) -> np.ndarray:
    """Overlap-add synthesis; ``T`` frames give ``(T - 1) * hop + window_len`` samples."""
    spec = np.asarray(spec)
    if spec.ndim != 2 or spec.shape[1] != cfg.n_bins:
        raise ShapeError(f"spectrogram shape {spec.shape} incompatible with {cfg.n_bins} bins")
    t, hop = spec.shape[0], cfg.hop
    frames = np.fft.irfft(spec.astype(np.complex128), n=cfg.window_len, axis=-1) * cfg.window
    out = np.zeros((t + 1, hop))
    out[:t] += frames[:, :hop]
    out[1:] += frames[:, hop:]
    return out.reshape(-1).astype(np.float32)


# -- WAV -------------------------------------------------------------------------------------

def quantize_pcm16(x: np.ndarray) -> np.ndarray:
    """Round half away from zero, then clamp to the int16 range."""
    v = np.asarray(x, dtype=np.float64) * 32768.0
    q = np.sign(v) * np.floor(np.abs(v) + 0.5)
    return np.clip(q, -32768, 32767).astype("<i2")


def write_wav(path, audio) -> None:
    x = _samples(audio)
    if not np.all(np.isfinite(x)):
        raise NumericError("refusing to write non-finite samples")
    with wave.open(str(path), "wb") as w:
        w.setnchannels(1)
        w.setsampwidth(2)
        w.setframerate(SAMPLE_RATE)
        w.writeframes(quantize_pcm16(x).tobytes())


def read_wav(path) -> AudioBuffer:
    path = Path(path)
    try:
        with wave.open(str(path), "rb") as w:
            channels, width, rate, n = w.getnchannels(), w.getsampwidth(), w.getframerate(), w.getnframes()
            raw = w.readframes(n)
    except (wave.Error, EOFError) as exc:
        raise FormatError(f"{path}: not a PCM WAV file ({exc})") from exc
    if channels != 1:
        raise FormatError(f"{path}: expected mono, got {channels} channels")
    if width != 2:
        raise FormatError(f"{path}: expected 16-bit PCM, got {8 * width}-bit")
    if rate != SAMPLE_RATE:
        raise FormatError(f"{path}: expected {SAMPLE_RATE} Hz, got {rate} Hz")
    if n == 0:
        raise FormatError(f"{path}: file holds no samples")
    data = np.frombuffer(raw, dtype="<i2").astype(np.float32) / 32768.0
    return AudioBuffer(data)
