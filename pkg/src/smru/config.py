"""Architecture hyperparameters and the sub-band layout they imply."""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field, replace
from importlib import resources

from .errors import ConfigError

N_BINS = 161
IN_CHANNELS = 8
PRESETS = ("T", "S", "L", "H")


@dataclass(frozen=True)
class PostnetConfig:
    enabled: bool = True
    hidden: int = 144
    gru_layers: int = 2
    groups: int = 8
    df_order: int = 5


@dataclass(frozen=True)
class ModelConfig:
    E: int = 10
    region_bins: tuple = (20, 60, 81)
    region_kernels: tuple = ((4, 8, 12), (10, 20, 30), (20, 30, 40))
    region_freq_strides: tuple = (4, 10, 20)
    lambda_schedule: tuple = (1, 2, 4, 8, 16, 32, 32, 16, 8, 4, 2, 1)
    multiscale: bool = True  # ablation: False keeps only the first kernel per region
    dense_skips: bool = True  # ablation: False keeps only sequential + mirror skips
    merge_hidden_mult: int = 4
    merge_hidden_min: int = 96
    postnet: PostnetConfig = field(default_factory=PostnetConfig)
    name: str = "custom"

    def __post_init__(self):
        for key in ("region_bins", "region_freq_strides", "lambda_schedule"):
            object.__setattr__(self, key, tuple(int(v) for v in getattr(self, key)))
        object.__setattr__(self, "region_kernels", tuple(tuple(int(k) for k in ks) for ks in self.region_kernels))
        if isinstance(self.postnet, dict):
            object.__setattr__(self, "postnet", PostnetConfig(**self.postnet))
        self.validate()

    def validate(self):
        if self.E < 1:
            raise ConfigError("E must be positive")
        if sum(self.region_bins) != N_BINS:
            raise ConfigError(f"region bins must sum to {N_BINS}, got {sum(self.region_bins)}")
        p = len(self.region_bins)
        if len(self.region_kernels) != p or len(self.region_freq_strides) != p:
            raise ConfigError("one kernel set and one stride per region required")
        if len({len(k) for k in self.region_kernels}) != 1:
            raise ConfigError("every region needs the same number of scales")
        for ks, s, n in zip(self.region_kernels, self.region_freq_strides, self.region_bins):
            if s < 1 or any(k < 1 for k in ks) or s > n:
                raise ConfigError("kernels/strides must be positive and stride <= region width")
        lam = self.lambda_schedule
        if not lam or any(v < 1 for v in lam):
            raise ConfigError("compression ratios must be >= 1")
        if lam != lam[::-1]:
            raise ConfigError("lambda schedule must be palindromic")
        half = lam[: (len(lam) + 1) // 2]
        if any(b < a for a, b in zip(half, half[1:])):
            raise ConfigError("encoder half of the lambda schedule must be non-decreasing")
        pn = self.postnet
        if pn.df_order < 1 or pn.hidden % pn.groups or pn.gru_layers < 1:
            raise ConfigError("invalid postnet config")

    # -- derived quantities -------------------------------------------------
    @property
    def P(self) -> int:
        return len(self.region_bins)

    @property
    def M(self) -> int:
        return len(self.region_kernels[0]) if self.multiscale else 1

    @property
    def num_blocks(self) -> int:
        return len(self.lambda_schedule)

    def kernels(self, p: int) -> tuple:
        return self.region_kernels[p][: self.M]

    @property
    def merge_hidden(self) -> int:
        return max(self.merge_hidden_mult * self.E, self.merge_hidden_min)

    @property
    def layout(self) -> "BandLayout":
        return BandLayout.from_config(self)

    @property
    def Q(self) -> int:
        return self.layout.Q

    def to_json(self) -> dict:
        return asdict(self)

    def config_hash(self) -> bytes:
        blob = json.dumps(self.to_json(), sort_keys=True, separators=(",", ":")).encode()
        return hashlib.sha256(blob).digest()

    @classmethod
    def from_json(cls, d: dict) -> "ModelConfig":
        return cls(**d)

    @classmethod
    def preset(cls, name: str) -> "ModelConfig":
        if name not in PRESETS:
            raise ConfigError(f"unknown preset {name!r}; choose from {PRESETS}")
        text = resources.files("smru").joinpath("presets", f"{name}.json").read_text()
        return cls.from_json(json.loads(text))

    def with_postnet(self, enabled: bool) -> "ModelConfig":
        return replace(self, postnet=replace(self.postnet, enabled=enabled))


@dataclass(frozen=True)
class BandLayout:
    """Sub-bands produced by the split: ``region`` index, first bin, width."""

    starts: tuple
    widths: tuple
    regions: tuple

    @property
    def Q(self) -> int:
        return len(self.widths)

    @classmethod
    def from_config(cls, cfg: ModelConfig) -> "BandLayout":
        starts, widths, regions = [], [], []
        lo = 0
        for p, (n, s) in enumerate(zip(cfg.region_bins, cfg.region_freq_strides)):
            q = math.ceil(n / s)
            for i in range(q):
                starts.append(lo + i * s)
                widths.append(min(s, n - i * s))
                regions.append(p)
            lo += n
        return cls(tuple(starts), tuple(widths), tuple(regions))

    def region_q(self, p: int) -> int:
        return sum(1 for r in self.regions if r == p)
