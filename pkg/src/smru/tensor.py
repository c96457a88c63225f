"""Dense float32 numeric kernels the network graph is built from.

Tensors are plain ``numpy.ndarray`` objects in C order with dtype float32.
Channel-first layout is used throughout: a 2-D feature map is ``[C, T, F]``
and a sequence for the GRU is ``[features, T, batch]``.  Padding is always
explicit so causality can be audited at every call site.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ShapeError

DTYPE = np.float32

# splitmix64 constants (Steele, Lea & Flood 2014)
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


def splitmix64(seed: int, n: int) -> np.ndarray:
    """First ``n`` outputs of a splitmix64 generator started at ``seed``.

    Output i is ``mix(seed + (i + 1) * 0x9E3779B97F4A7C15)`` with the standard
    finalizer; arithmetic wraps modulo 2**64, so results are identical on every
    platform.
    """
    state = np.uint64(seed & 0xFFFFFFFFFFFFFFFF)
    with np.errstate(over="ignore"):
        z = state + (np.arange(1, n + 1, dtype=np.uint64) * _GOLDEN)
        z = (z ^ (z >> np.uint64(30))) * _MIX1
        z = (z ^ (z >> np.uint64(27))) * _MIX2
        z = z ^ (z >> np.uint64(31))
    return z


def seeded_init(shape, seed: int, scheme: str = "uniform-fan-in", fan_in: int | None = None) -> np.ndarray:
    """Deterministic parameter tensor.

    ``uniform-fan-in`` draws from U(-b, b) with ``b = sqrt(1 / fan_in)``; the
    top 24 bits of each splitmix64 output give a uniform float in [0, 1).
    ``fan_in`` defaults to the product of all but the leading dimension.
    """
    shape = tuple(int(s) for s in shape)
    if scheme == "zeros":
        return np.zeros(shape, dtype=DTYPE)
    if scheme == "ones":
        return np.ones(shape, dtype=DTYPE)
    if scheme != "uniform-fan-in":
        raise ConfigError(f"unknown init scheme {scheme!r}")
    n = int(np.prod(shape, dtype=np.int64))
    if fan_in is None:
        fan_in = int(np.prod(shape[1:], dtype=np.int64)) if len(shape) > 1 else shape[0]
    bound = np.sqrt(1.0 / max(fan_in, 1))
    u = (splitmix64(seed, n) >> np.uint64(40)).astype(np.float64) * 2.0**-24
    return ((2.0 * u - 1.0) * bound).astype(DTYPE).reshape(shape)


def sigmoid(x: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-x))


def gelu(x: np.ndarray) -> np.ndarray:
    # tanh approximation
    c = DTYPE(np.sqrt(2.0 / np.pi))
    return 0.5 * x * (1.0 + np.tanh(c * (x + 0.044715 * x * x * x)))


def linear(x: np.ndarray, weight: np.ndarray, bias: np.ndarray | None = None) -> np.ndarray:
    """Affine map over the leading axis: ``[in, ...] -> [out, ...]``."""
    if weight.ndim != 2 or x.shape[0] != weight.shape[1]:
        raise ShapeError(f"linear: input dim {x.shape[0]} vs weight {weight.shape}")
    rest = x.shape[1:]
    y = weight @ x.reshape(x.shape[0], int(np.prod(rest, dtype=np.int64)))
    if bias is not None:
        y = y + bias[:, None]
    return y.reshape((weight.shape[0],) + rest)


def layer_norm(x: np.ndarray, gain: np.ndarray, bias: np.ndarray, axis: int = -1, eps: float = 1e-5) -> np.ndarray:
    """Normalize to zero mean / unit variance along ``axis``, then apply gain and bias."""
    axis = axis % x.ndim
    if x.shape[axis] != gain.shape[0] or gain.shape != bias.shape:
        raise ShapeError(f"layer_norm: dim {x.shape[axis]} vs gain {gain.shape}, bias {bias.shape}")
    mean = x.mean(axis=axis, keepdims=True)
    centered = x - mean
    var = (centered * centered).mean(axis=axis, keepdims=True)
    y = centered / np.sqrt(var + DTYPE(eps))
    shape = [1] * x.ndim
    shape[axis] = -1
    return y * gain.reshape(shape) + bias.reshape(shape)


def conv2d(x, weight, bias=None, stride=(1, 1), padding=((0, 0), (0, 0))) -> np.ndarray:
    """2-D cross-correlation of ``x[C, T, F]`` with ``weight[O, C, kt, kf]``.

    ``padding`` is ``((time_before, time_after), (freq_before, freq_after))``
    of zeros.  Output length per axis is ``(n + pad - k) // s + 1``.
    """
    if x.ndim != 3 or weight.ndim != 4 or x.shape[0] != weight.shape[1]:
        raise ShapeError(f"conv2d: input {x.shape} vs weight {weight.shape}")
    st, sf = stride
    if st <= 0 or sf <= 0:
        raise ShapeError(f"conv2d: stride must be positive, got {stride}")
    (pt0, pt1), (pf0, pf1) = padding
    if pt0 or pt1 or pf0 or pf1:
        x = np.pad(x, ((0, 0), (pt0, pt1), (pf0, pf1)))
    _, kt, kf = weight.shape[1:]
    t_in, f_in = x.shape[1:]
    if kt > t_in or kf > f_in:
        raise ShapeError(f"conv2d: kernel {(kt, kf)} larger than padded input {(t_in, f_in)}")
    windows = np.lib.stride_tricks.sliding_window_view(x, (kt, kf), axis=(1, 2))[:, ::st, ::sf]
    # windows: [C, T', F', kt, kf]
    y = np.einsum("ctfab,ocab->otf", windows, weight, optimize=True)
    if bias is not None:
        y = y + bias[:, None, None]
    return np.ascontiguousarray(y, dtype=DTYPE)


def causal_conv1d_time(x, weight, bias=None, stride: int = 1, groups: int = 1) -> np.ndarray:
    """Non-overlapping causal convolution along time of ``x[C, T]``.

    ``weight`` is ``[O, C // groups, k]`` with ``k == stride`` so that output
    frame j reads exactly input frames ``j*s .. j*s + k - 1``.  Trailing frames
    that do not complete a window are dropped (``T' = T // s``).
    """
    out_ch, in_per_group, k = weight.shape
    if k != stride:
        raise ConfigError(f"causal_conv1d_time requires kernel == stride, got {k} vs {stride}")
    if stride <= 0:
        raise ShapeError("stride must be positive")
    c, t = x.shape
    if c != in_per_group * groups or out_ch % groups:
        raise ShapeError(f"causal_conv1d_time: input {x.shape}, weight {weight.shape}, groups {groups}")
    t_out = t // stride
    xs = x[:, : t_out * stride].reshape(groups, in_per_group, t_out, k)
    ws = weight.reshape(groups, out_ch // groups, in_per_group, k)
    y = np.einsum("gitk,goik->got", xs, ws, optimize=True).reshape(out_ch, t_out)
    if bias is not None:
        y = y + bias[:, None]
    return np.ascontiguousarray(y, dtype=DTYPE)


@dataclass
class GruParams:
    """Gate order r, z, n (reset, update, candidate), stacked along rows."""

    w_ih: np.ndarray  # [3H, in]
    w_hh: np.ndarray  # [3H, H]
    b_ih: np.ndarray  # [3H]
    b_hh: np.ndarray  # [3H]

    def __post_init__(self):
        h3, _ = self.w_ih.shape
        if h3 % 3 or self.w_hh.shape != (h3, h3 // 3) or self.b_ih.shape != (h3,) or self.b_hh.shape != (h3,):
            raise ShapeError("inconsistent GRU parameter shapes")

    @property
    def input_dim(self) -> int:
        return self.w_ih.shape[1]

    @property
    def hidden_dim(self) -> int:
        return self.w_hh.shape[1]


def _gru_cell(p: GruParams, gi: np.ndarray, h: np.ndarray) -> np.ndarray:
    hd = p.hidden_dim
    gh = p.w_hh @ h + p.b_hh[:, None]
    r = sigmoid(gi[:hd] + gh[:hd])
    z = sigmoid(gi[hd : 2 * hd] + gh[hd : 2 * hd])
    n = np.tanh(gi[2 * hd :] + r * gh[2 * hd :])
    return (1.0 - z) * n + z * h


def gru_step(p: GruParams, x: np.ndarray, h: np.ndarray) -> np.ndarray:
    """One recurrent update; ``x[in, B]``, ``h[H, B]`` (1-D vectors also accepted)."""
    vec = x.ndim == 1
    if vec:
        x, h = x[:, None], h[:, None]
    if x.shape[0] != p.input_dim or h.shape[0] != p.hidden_dim:
        raise ShapeError(f"gru_step: x {x.shape}, h {h.shape} vs dims {p.input_dim}/{p.hidden_dim}")
    gi = p.w_ih @ x + p.b_ih[:, None]
    h = _gru_cell(p, gi, h)
    return h[:, 0] if vec else h


def gru_forward(p: GruParams, x: np.ndarray, h0: np.ndarray | None = None) -> np.ndarray:
    """Run the GRU over ``x[in, T, B]`` (or ``[in, T]``); returns ``[H, T, B]``.

    Input projections for all frames are computed up front; the recurrence
    itself is a plain loop over T.
    """
    vec = x.ndim == 2
    if vec:
        x = x[:, :, None]
    d_in, t, b = x.shape
    if d_in != p.input_dim:
        raise ShapeError(f"gru_forward: input dim {d_in} vs {p.input_dim}")
    if h0 is None:
        h = np.zeros((p.hidden_dim, b), dtype=DTYPE)
    else:
        h = h0[:, None] if h0.ndim == 1 else h0
        if h.shape != (p.hidden_dim, b):
            raise ShapeError(f"gru_forward: h0 {h0.shape} vs hidden {p.hidden_dim}")
    gi = (p.w_ih @ x.reshape(d_in, t * b)).reshape(3 * p.hidden_dim, t, b) + p.b_ih[:, None, None]
    out = np.empty((p.hidden_dim, t, b), dtype=DTYPE)
    for i in range(t):
        h = _gru_cell(p, gi[:, i], h)
        out[:, i] = h
    return out[:, :, 0] if vec else out
