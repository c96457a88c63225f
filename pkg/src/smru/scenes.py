"""Synthetic far-end/near-end scenes: speech-like sources, exponential RIRs, SER/SNR mixing."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import ConfigError
from .frontend import SAMPLE_RATE

SCENARIOS = ("ST-NE", "ST-FE", "DT")
ACTIVITY_GATE_DB = -40.0
# active-frame RMS of the near-end talker (or of the echo when there is none)
REFERENCE_LEVEL_DB = -26.0
_FRAME, _HOP = 320, 160


@dataclass(frozen=True)
class SceneSpec:
    seed: int = 0
    duration: float = 4.0
    scenario: str = "DT"
    ser_db: float = 5.0
    snr_db: float = 15.0  # math.inf for a noise-free scene
    rir_ms: float = 64.0
    t60: float = 0.25

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"scenario must be one of {SCENARIOS}")
        if (self.scenario == "ST-NE") != (self.ser_db == math.inf):
            raise ConfigError("ST-NE requires ser_db = +inf and vice versa")
        if (self.scenario == "ST-FE") != (self.ser_db == -math.inf):
            raise ConfigError("ST-FE requires ser_db = -inf and vice versa")
        if math.isnan(self.snr_db) or self.snr_db == -math.inf:
            raise ConfigError("snr_db must be finite or +inf")
        if self.duration <= 0 or self.rir_ms <= 0 or self.t60 < 0:
            raise ConfigError("duration and rir_ms must be positive, t60 non-negative")

    def to_json(self) -> dict:
        d = asdict(self)
        for k in ("ser_db", "snr_db"):
            if math.isinf(d[k]):
                d[k] = "inf" if d[k] > 0 else "-inf"
        return d

    @classmethod
    def from_json(cls, d: dict) -> "SceneSpec":
        d = dict(d)
        for k in ("ser_db", "snr_db"):
            if k in d:
                d[k] = float(d[k])
        return cls(**d)


@dataclass
class Scene:
    spec: SceneSpec
    mic: np.ndarray
    farend: np.ndarray
    nearend: np.ndarray
    echo: np.ndarray
    noise: np.ndarray


def synth_rir(length_ms: float, t60: float, seed: int, sample_rate: int = SAMPLE_RATE) -> np.ndarray:
    """White-noise taps under an ``exp(-t / tau)`` envelope, unit energy.

    ``tau`` makes the energy envelope fall by 60 dB after ``t60`` seconds; with
    ``t60 == 0`` the response collapses to a single tap.
    """
    n = max(1, int(round(length_ms * 1e-3 * sample_rate)))
    rng = np.random.default_rng(seed)
    taps = rng.standard_normal(n)
    if t60 <= 0:
        taps = np.zeros(n)
        taps[0] = 1.0
        return taps
    tau = t60 / (3.0 * math.log(10.0))
    taps *= np.exp(-np.arange(n) / sample_rate / tau)
    return taps / np.sqrt(np.sum(taps**2))


def synth_speech(seed: int, duration: float, sample_rate: int = SAMPLE_RATE) -> np.ndarray:
    """Voiced-speech stand-in: a pitch-modulated harmonic stack under syllable gating.

    The fundamental wanders slowly around a talker-specific base in
    [100, 200) Hz (within +-8 %), harmonics fall off as 1/k with a mild formant
    bump, and an on/off envelope at roughly 3-5 syllables per second leaves
    short silent gaps.  Aspiration noise about 9 dB below the voiced part
    keeps every bin lightly excited, as in real speech.  Output RMS over active segments is about -20 dBFS.
    """
    rng = np.random.default_rng(seed)
    n = int(round(duration * sample_rate))
    t = np.arange(n) / sample_rate
    f_base = rng.uniform(100.0, 200.0)
    vib = 0.08 * np.sin(2 * np.pi * rng.uniform(0.2, 0.6) * t + rng.uniform(0, 2 * np.pi))
    f0 = f_base * (1.0 + vib)
    phase = 2 * np.pi * np.cumsum(f0) / sample_rate
    formant = rng.uniform(500.0, 900.0)
    sig = np.zeros(n)
    for k in range(1, int(3800 // (f_base * 1.08)) + 1):
        weight = (1.0 / k) * (1.0 + 0.8 * np.exp(-(((k * f_base) - formant) / 300.0) ** 2))
        sig += weight * np.sin(k * phase + rng.uniform(0, 2 * np.pi))
    # syllable gating: raised-cosine bursts separated by gaps
    env = np.zeros(n)
    pos = 0
    while pos < n:
        on = int(rng.uniform(0.12, 0.30) * sample_rate)
        off = int(rng.uniform(0.03, 0.15) * sample_rate)
        seg = min(on, n - pos)
        env[pos : pos + seg] = np.sin(np.pi * np.arange(seg) / on) ** 0.5
        pos += on + off
    # aspiration noise rides on the voiced envelope; short fricative bursts sit in some gaps
    breath = np.convolve(rng.standard_normal(n), [1.0, -0.6], mode="same")
    sig += 0.35 * np.sqrt(np.mean(sig**2)) * breath
    sig *= env
    active = env > 0.1
    rms = np.sqrt(np.mean(sig[active] ** 2)) if np.any(active) else 1.0
    return (sig / rms * 0.1).astype(np.float32)


def frame_powers(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if len(x) < _FRAME:
        x = np.pad(x, (0, _FRAME - len(x)))
    frames = np.lib.stride_tricks.sliding_window_view(x, _FRAME)[::_HOP]
    return np.mean(frames**2, axis=1)


def active_power(x: np.ndarray, gate_db: float = ACTIVITY_GATE_DB) -> float:
    """Mean frame power over frames within ``gate_db`` of the loudest frame."""
    p = frame_powers(x)
    peak = p.max()
    if peak <= 0:
        return 0.0
    return float(p[p > peak * 10 ** (gate_db / 10)].mean())


def _scale_to(x: np.ndarray, power: float) -> np.ndarray:
    return x * np.sqrt(power / active_power(x))


def mix_scene(spec: SceneSpec) -> Scene:
    """Build ``mic = nearend + echo + noise`` with SER/SNR calibrated on active frames."""
    n = int(round(spec.duration * SAMPLE_RATE))
    ref_power = 10 ** (REFERENCE_LEVEL_DB / 10)
    zeros = np.zeros(n)
    rng = np.random.default_rng([spec.seed, 7])

    if spec.scenario == "ST-FE":
        near = zeros
    else:
        near = _scale_to(synth_speech(spec.seed, spec.duration).astype(np.float64), ref_power)

    if spec.scenario == "ST-NE":
        far = zeros
        echo = zeros
    else:
        far = synth_speech(spec.seed + 100003, spec.duration).astype(np.float64)
        rir = synth_rir(spec.rir_ms, spec.t60, spec.seed + 7919)
        echo = np.convolve(far, rir)[:n]
        target = ref_power if spec.scenario == "ST-FE" else ref_power / 10 ** (spec.ser_db / 10)
        echo = _scale_to(echo, target)

    if spec.snr_db == math.inf:
        noise = zeros
    else:
        ref = near if spec.scenario != "ST-FE" else echo
        noise = _scale_to(rng.standard_normal(n), active_power(ref) / 10 ** (spec.snr_db / 10))

    near, far, echo, noise = (a.astype(np.float32) for a in (near, far, echo, noise))
    mic = near + echo + noise
    return Scene(spec, mic, far, near, echo, noise)
