"""Analytic multiply-accumulate counts per second of audio.

Convention: one multiply-accumulate is one MAC; normalizations, activations
and element-wise products are not counted.  Convolutions cost
``C_in/groups * C_out * prod(kernel) * output positions``; a GRU step costs
``3 * (in + hidden) * hidden + 3 * hidden``.  Work inside a VR block runs once
per compressed frame, i.e. ``frame_rate / lambda`` times per second.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .config import IN_CHANNELS, N_BINS, ModelConfig
from .weights import count_params, postnet_group_sizes

FRAME_RATE = 100  # frames per second at a 10 ms hop


def gru_macs(inp: int, hidden: int) -> int:
    return 3 * (inp + hidden) * hidden + 3 * hidden


@dataclass
class ComplexityReport:
    config: str
    E: int
    macs_per_frame: dict = field(default_factory=dict)  # module -> MACs per full-rate frame
    params: int = 0
    frame_rate: int = FRAME_RATE

    @property
    def model_macs_per_frame(self) -> float:
        return sum(v for k, v in self.macs_per_frame.items() if not k.startswith("postnet"))

    @property
    def postnet_macs_per_frame(self) -> float:
        return sum(v for k, v in self.macs_per_frame.items() if k.startswith("postnet"))

    @property
    def total_macs_per_frame(self) -> float:
        return sum(self.macs_per_frame.values())

    @property
    def model_macs_per_second(self) -> float:
        return self.model_macs_per_frame * self.frame_rate

    @property
    def postnet_macs_per_second(self) -> float:
        return self.postnet_macs_per_frame * self.frame_rate

    @property
    def total_macs_per_second(self) -> float:
        return self.total_macs_per_frame * self.frame_rate

    def to_json(self) -> dict:
        return {
            "config": self.config,
            "E": self.E,
            "frame_rate": self.frame_rate,
            "params": self.params,
            "macs_per_frame": dict(self.macs_per_frame),
            "model_macs_per_second": self.model_macs_per_second,
            "postnet_macs_per_second": self.postnet_macs_per_second,
            "total_macs_per_second": self.total_macs_per_second,
        }

    def table(self) -> str:
        rows = [f"{'module':<24}{'MACs/frame':>14}{'M MACs/s':>12}"]
        for k, v in self.macs_per_frame.items():
            rows.append(f"{k:<24}{v:>14,.0f}{v * self.frame_rate / 1e6:>12.2f}")
        rows.append(f"{'model (no postnet)':<24}{self.model_macs_per_frame:>14,.0f}{self.model_macs_per_second / 1e6:>12.2f}")
        rows.append(f"{'total':<24}{self.total_macs_per_frame:>14,.0f}{self.total_macs_per_second / 1e6:>12.2f}")
        rows.append(f"parameters: {self.params:,}")
        return "\n".join(rows)


def block_macs(cfg: ModelConfig, lam: int) -> dict:
    """Per compressed frame, split by sub-layer."""
    E, Q = cfg.E, cfg.Q
    return {
        "ds": E * Q * lam,  # depthwise, kernel lam
        "gru": Q * gru_macs(E, E),
        "fc": Q * E * E,
        "inter": Q * (E * 2 * E + E * E) + E * Q * Q,
        "us": Q * E * E,
    }


def count_macs(cfg: ModelConfig) -> ComplexityReport:
    E, Q = cfg.E, cfg.Q
    layout = cfg.layout
    per = {}
    per["stem"] = IN_CHANNELS * E * N_BINS
    split = 0
    for p in range(cfg.P):
        qp = layout.region_q(p)
        split += sum(E * E * k * qp for k in cfg.kernels(p))
    split += cfg.M * E * E * Q
    per["split"] = split
    for j, lam in enumerate(cfg.lambda_schedule, start=1):
        per[f"block{j}(lambda={lam})"] = sum(block_macs(cfg, lam).values()) / lam
    hm = cfg.merge_hidden
    per["merge"] = sum(E * hm + hm * 2 * IN_CHANNELS * w for w in layout.widths)
    if cfg.postnet.enabled:
        pn = cfg.postnet
        g_in, g_outs = postnet_group_sizes(cfg)
        per["postnet.proj"] = N_BINS * pn.hidden
        per["postnet.gru"] = pn.gru_layers * gru_macs(pn.hidden, pn.hidden)
        per["postnet.out"] = sum(g_in * o for o in g_outs)
        per["postnet.deep_filter"] = 4 * pn.df_order * N_BINS  # complex MAC = 4 real
    return ComplexityReport(cfg.name, E, per, count_params(cfg))


def unet_macs_per_second(cfg: ModelConfig) -> float:
    rep = count_macs(cfg)
    return FRAME_RATE * sum(v for k, v in rep.macs_per_frame.items() if k.startswith("block"))


def bisect_embedding(target_macs_per_second: float, base: ModelConfig, lo: int = 1, hi: int = 512) -> int:
    """Integer E whose model-only MACs/s is closest to the target (MACs are increasing in E)."""
    from dataclasses import replace

    def f(e):
        return count_macs(replace(base, E=e)).model_macs_per_second

    while hi - lo > 1:
        mid = (lo + hi) // 2
        if f(mid) < target_macs_per_second:
            lo = mid
        else:
            hi = mid
    return min((lo, hi), key=lambda e: abs(math.log(f(e) / target_macs_per_second)))
