"""Named parameter store, deterministic initialization and the weight-file format.

Naming scheme (``j`` = 1-based VR block, ``q`` = 0-based sub-band,
``p``/``m`` = 0-based region/scale, ``l``/``g`` = postnet GRU layer/group)::

    stem.{weight,bias}
    split.r{p}.m{m}.{weight,bias}      split.reduce.{weight,bias}   split.norm.{gain,bias}
    unet.norm{j}.{gain,bias}
    unet.block{j}.ds.{weight,bias}
    unet.block{j}.intra.norm.{gain,bias}   .intra.gru.{w_ih,w_hh,b_ih,b_hh}   .intra.fc.{weight,bias}
    unet.block{j}.inter.norm.{gain,bias}   .inter.proj_in.{weight,bias}   .inter.gate_norm.{gain,bias}
    unet.block{j}.inter.band.{weight,bias} .inter.proj_out.{weight,bias}
    unet.block{j}.us.{weight,bias,zero_history}
    merge.b{q}.norm.{gain,bias}   merge.b{q}.fc1.{weight,bias}   merge.b{q}.fc2.{weight,bias}
    postnet.proj.{weight,bias}   postnet.gru{l}.{w_ih,w_hh,b_ih,b_hh}   postnet.out.g{g}.{weight,bias}
"""
from __future__ import annotations

import zlib
from collections import OrderedDict
from pathlib import Path

import numpy as np

from . import binfmt
from .config import IN_CHANNELS, N_BINS, ModelConfig
from .errors import FormatError
from .tensor import GruParams, seeded_init

MAGIC = b"SMRUWGT\x00"
VERSION = 1


def postnet_group_sizes(cfg: ModelConfig):
    """(inputs per group, outputs per group); outputs split as evenly as possible."""
    pn = cfg.postnet
    n_out = 2 * pn.df_order * N_BINS
    outs = [len(a) for a in np.array_split(np.arange(n_out), pn.groups)]
    return pn.hidden // pn.groups, outs


def param_specs(cfg: ModelConfig) -> "OrderedDict[str, tuple]":
    """Ordered ``name -> (shape, scheme, fan_in)`` for every parameter of ``cfg``."""
    E, Q = cfg.E, cfg.Q
    specs: OrderedDict = OrderedDict()

    def affine(prefix, out, inp, kernel=(), fan_in=None):
        fan = fan_in if fan_in is not None else inp * int(np.prod(kernel, dtype=np.int64))
        specs[f"{prefix}.weight"] = ((out, inp) + tuple(kernel), "uniform-fan-in", fan)
        specs[f"{prefix}.bias"] = ((out,), "uniform-fan-in", fan)

    def norm(prefix, dim):
        specs[f"{prefix}.gain"] = ((dim,), "ones", None)
        specs[f"{prefix}.bias"] = ((dim,), "zeros", None)

    def gru(prefix, inp, hid):
        specs[f"{prefix}.w_ih"] = ((3 * hid, inp), "uniform-fan-in", hid)
        specs[f"{prefix}.w_hh"] = ((3 * hid, hid), "uniform-fan-in", hid)
        specs[f"{prefix}.b_ih"] = ((3 * hid,), "uniform-fan-in", hid)
        specs[f"{prefix}.b_hh"] = ((3 * hid,), "uniform-fan-in", hid)

    affine("stem", E, IN_CHANNELS)
    for p in range(cfg.P):
        for m, k in enumerate(cfg.kernels(p)):
            affine(f"split.r{p}.m{m}", E, E, kernel=(1, k))
    affine("split.reduce", E, cfg.M * E)
    norm("split.norm", E)

    for j, lam in enumerate(cfg.lambda_schedule, start=1):
        b = f"unet.block{j}"
        norm(f"unet.norm{j}", E)
        affine(f"{b}.ds", E * Q, 1, kernel=(lam,))
        norm(f"{b}.intra.norm", E)
        gru(f"{b}.intra.gru", E, E)
        affine(f"{b}.intra.fc", E, E)
        norm(f"{b}.inter.norm", E)
        affine(f"{b}.inter.proj_in", 2 * E, E)
        norm(f"{b}.inter.gate_norm", E)
        specs[f"{b}.inter.band.weight"] = ((Q, Q), "uniform-fan-in", Q)
        specs[f"{b}.inter.band.bias"] = ((Q,), "ones", None)
        affine(f"{b}.inter.proj_out", E, E)
        affine(f"{b}.us", E, E)
        specs[f"{b}.us.zero_history"] = ((E, Q), "uniform-fan-in", E)

    hm = cfg.merge_hidden
    for q, w in enumerate(cfg.layout.widths):
        norm(f"merge.b{q}.norm", E)
        affine(f"merge.b{q}.fc1", hm, E)
        affine(f"merge.b{q}.fc2", 2 * IN_CHANNELS * w, hm)

    if cfg.postnet.enabled:
        pn = cfg.postnet
        affine("postnet.proj", pn.hidden, N_BINS)
        for layer in range(pn.gru_layers):
            gru(f"postnet.gru{layer}", pn.hidden, pn.hidden)
        g_in, g_outs = postnet_group_sizes(cfg)
        for g, n_out in enumerate(g_outs):
            affine(f"postnet.out.g{g}", n_out, g_in)
    return specs


def param_shapes(cfg: ModelConfig) -> "OrderedDict[str, tuple]":
    return OrderedDict((k, v[0]) for k, v in param_specs(cfg).items())


def count_params(cfg: ModelConfig) -> int:
    return int(sum(np.prod(s, dtype=np.int64) for s in param_shapes(cfg).values()))


class WeightStore(OrderedDict):
    """Ordered ``name -> float32 array`` mapping tagged with the config it was built for."""

    def __init__(self, cfg: ModelConfig, *args, **kw):
        super().__init__(*args, **kw)
        self.cfg = cfg

    def gru(self, prefix: str) -> GruParams:
        return GruParams(self[f"{prefix}.w_ih"], self[f"{prefix}.w_hh"], self[f"{prefix}.b_ih"], self[f"{prefix}.b_hh"])

    def n_params(self) -> int:
        return int(sum(a.size for a in self.values()))


def _param_seed(seed: int, name: str) -> int:
    return (int(seed) << 32) ^ zlib.crc32(name.encode())


def init_weights(cfg: ModelConfig, seed: int = 0) -> WeightStore:
    store = WeightStore(cfg)
    for name, (shape, scheme, fan_in) in param_specs(cfg).items():
        store[name] = seeded_init(shape, _param_seed(seed, name), scheme, fan_in)
    return store


def save_weights(store: WeightStore, path) -> None:
    Path(path).write_bytes(binfmt.dumps(MAGIC, VERSION, store.cfg.config_hash(), store))


def load_weights(path, cfg: ModelConfig) -> WeightStore:
    try:
        blob = Path(path).read_bytes()
    except OSError as exc:
        raise FormatError(f"cannot read weights {path}: {exc}") from exc
    version, header, arrays = binfmt.loads(blob, MAGIC)
    if version != VERSION:
        raise FormatError(f"unsupported weight-file version {version}")
    if header != cfg.config_hash():
        raise FormatError("weight file was built for a different model config (hash mismatch)")
    expected = param_shapes(cfg)
    if list(arrays) != list(expected):
        raise FormatError("weight file tensor names do not match the config")
    for name, shape in expected.items():
        if arrays[name].shape != shape or arrays[name].dtype != np.float32:
            raise FormatError(f"tensor {name}: shape {arrays[name].shape} != {shape}")
    return WeightStore(cfg, arrays)
