"""Offline (whole-utterance) forward pass of the split-and-merge recurrent UNet.

Feature maps are ``[E, T, Q]`` float32 arrays; the input stack and the mask
are ``[8, T, F]`` with channels ``d_re, d_im, x_re, x_im, e_re, e_im, y_re, y_im``.
Every operation is causal in T: output frame t reads input frames <= t only.
"""
from __future__ import annotations

import math

import numpy as np

from .config import IN_CHANNELS, N_BINS, BandLayout, ModelConfig
from .errors import ConfigError, ShapeError
from .tensor import (
    DTYPE,
    causal_conv1d_time,
    conv2d,
    gelu,
    gru_forward,
    layer_norm,
    linear,
)


def input_stack(d, x, e, y) -> np.ndarray:
    """Real/imag planes of the four spectra ``[T, F]`` -> ``[8, T, F]``."""
    specs = [np.asarray(s) for s in (d, x, e, y)]
    if len({s.shape for s in specs}) != 1 or specs[0].ndim != 2:
        raise ShapeError("the four input spectrograms must share one (T, F) shape")
    planes = []
    for s in specs:
        planes += [s.real, s.imag]
    return np.stack(planes).astype(DTYPE)


def stem_conv(I: np.ndarray, w) -> np.ndarray:
    if I.ndim != 3 or I.shape[0] != IN_CHANNELS:
        raise ShapeError(f"input stack must be [8, T, F], got {I.shape}")
    return linear(I, w["stem.weight"], w["stem.bias"])


def split_padding(n: int, k: int, s: int) -> int:
    """Right (high-frequency) zero padding so a region of n bins yields ceil(n / s) bands."""
    return (math.ceil(n / s) - 1) * s + k - n


def band_split(R: np.ndarray, cfg: ModelConfig, w) -> np.ndarray:
    """``[E, T, F] -> [E, T, Q]``: multi-scale strided convolutions per region, 1x1 reduce, norm."""
    if R.shape[2] != sum(cfg.region_bins):
        raise ConfigError(f"feature map has {R.shape[2]} bins, config expects {sum(cfg.region_bins)}")
    regions = []
    lo = 0
    for p, (n, s) in enumerate(zip(cfg.region_bins, cfg.region_freq_strides)):
        rp = R[:, :, lo : lo + n]
        q = math.ceil(n / s)
        scales = []
        for m, k in enumerate(cfg.kernels(p)):
            pad = split_padding(n, k, s)
            out = conv2d(
                rp, w[f"split.r{p}.m{m}.weight"], w[f"split.r{p}.m{m}.bias"],
                stride=(1, s), padding=((0, 0), (0, max(pad, 0))),
            )
            scales.append(out[:, :, :q])
        regions.append(np.concatenate(scales, axis=0))
        lo += n
    merged = np.concatenate(regions, axis=2)
    reduced = linear(merged, w["split.reduce.weight"], w["split.reduce.bias"])
    return layer_norm(reduced, w["split.norm.gain"], w["split.norm.bias"], axis=0)


# -- VR block pieces -------------------------------------------------------------------------

def time_downsample(z: np.ndarray, lam: int, w, prefix: str) -> np.ndarray:
    """Depthwise causal conv over merged (E*Q) channels with kernel = stride = lam."""
    e, t, q = z.shape
    flat = z.transpose(0, 2, 1).reshape(e * q, t)
    out = causal_conv1d_time(flat, w[f"{prefix}.ds.weight"], w[f"{prefix}.ds.bias"], stride=lam, groups=e * q)
    return out.reshape(e, q, -1).transpose(0, 2, 1)


def upsample_index(t_target: int, lam: int) -> np.ndarray:
    """Compressed frame held at each output frame; -1 before the first one completes."""
    return (np.arange(t_target) + 1) // lam - 1


def time_upsample(z: np.ndarray, lam: int, t_target: int, w, prefix: str) -> np.ndarray:
    """Zero-order-hold prediction of full-rate frames from compressed frames.

    Output frame t takes the pointwise-projected compressed frame
    ``floor((t + 1) / lam) - 1``, i.e. the latest one whose input window has
    fully arrived by frame t; earlier frames take the learned zero-history
    vector.
    """
    e, t_c, q = z.shape
    if t_c != t_target // lam:
        raise ShapeError(f"{t_c} compressed frames inconsistent with T={t_target}, lambda={lam}")
    proj = linear(z, w[f"{prefix}.us.weight"], w[f"{prefix}.us.bias"])
    held = np.concatenate([w[f"{prefix}.us.zero_history"][:, None, :], proj], axis=1)
    return held[:, upsample_index(t_target, lam) + 1, :]


def interband_mlp(z: np.ndarray, w, prefix: str) -> np.ndarray:
    """gMLP-style shuffler applied per frame: channel proj, gated band proj, channel proj."""
    p = f"{prefix}.inter"
    e = z.shape[0]
    h = layer_norm(z, w[f"{p}.norm.gain"], w[f"{p}.norm.bias"], axis=0)
    h = gelu(linear(h, w[f"{p}.proj_in.weight"], w[f"{p}.proj_in.bias"]))
    u, v = h[:e], h[e:]
    v = layer_norm(v, w[f"{p}.gate_norm.gain"], w[f"{p}.gate_norm.bias"], axis=0)
    v = v @ w[f"{p}.band.weight"].T + w[f"{p}.band.bias"]
    return linear(u * v, w[f"{p}.proj_out.weight"], w[f"{p}.proj_out.bias"])


def intraband_gru(z: np.ndarray, w, prefix: str) -> np.ndarray:
    """GRU along compressed time, weights shared over bands, plus FC and residual."""
    p = f"{prefix}.intra"
    h = layer_norm(z, w[f"{p}.norm.gain"], w[f"{p}.norm.bias"], axis=0)
    h = gru_forward(w.gru(f"{p}.gru"), h)
    return linear(h, w[f"{p}.fc.weight"], w[f"{p}.fc.bias"]) + z


def vr_block_forward(z: np.ndarray, lam: int, w, prefix: str) -> np.ndarray:
    t = z.shape[1]
    zd = time_downsample(z, lam, w, prefix)
    z1 = intraband_gru(zd, w, prefix)
    z2 = interband_mlp(z1, w, prefix) + z1
    return time_upsample(z2, lam, t, w, prefix)


def block_input(j: int, H: np.ndarray, outs: list, cfg: ModelConfig, w) -> np.ndarray:
    """Normalized input of 1-based block ``j`` given the outputs of blocks ``1..j-1``."""
    if cfg.dense_skips:
        acc = H
        for o in outs:
            acc = acc + o
    elif j == 1:
        acc = H
    else:
        acc = outs[j - 2]
        mirror = cfg.num_blocks + 1 - j
        if mirror < j - 1:
            acc = acc + outs[mirror - 1]
    return layer_norm(acc, w[f"unet.norm{j}.gain"], w[f"unet.norm{j}.bias"], axis=0)


def unet_forward(H: np.ndarray, cfg: ModelConfig, w, trace: dict | None = None) -> np.ndarray:
    outs = []
    for j, lam in enumerate(cfg.lambda_schedule, start=1):
        inp = block_input(j, H, outs, cfg, w)
        outs.append(vr_block_forward(inp, lam, w, f"unet.block{j}"))
        if trace is not None:
            trace[f"block{j}.in"] = inp
            trace[f"block{j}.out"] = outs[-1]
    return outs[-1]


# -- merge, mask, postnet --------------------------------------------------------------------

def band_merge(U: np.ndarray, layout: BandLayout, w) -> np.ndarray:
    """``[E, T, Q] -> [8, T, F]``: per-band norm + MLP (tanh hidden, GLU output)."""
    if U.shape[2] != layout.Q:
        raise ShapeError(f"feature map has {U.shape[2]} bands, layout has {layout.Q}")
    t = U.shape[1]
    pieces = []
    for q, width in enumerate(layout.widths):
        p = f"merge.b{q}"
        h = layer_norm(U[:, :, q], w[f"{p}.norm.gain"], w[f"{p}.norm.bias"], axis=0)
        h = np.tanh(linear(h, w[f"{p}.fc1.weight"], w[f"{p}.fc1.bias"]))
        h = linear(h, w[f"{p}.fc2.weight"], w[f"{p}.fc2.bias"])
        half = IN_CHANNELS * width
        g = h[:half] * (1.0 / (1.0 + np.exp(-h[half:])))
        pieces.append(g.reshape(IN_CHANNELS, width, t).transpose(0, 2, 1))
    return np.concatenate(pieces, axis=2)


def apply_mask(I: np.ndarray, G: np.ndarray) -> np.ndarray:
    """Complex filter-and-sum: ``sum_c I_c * G_c`` over the four complex planes -> ``[T, F]``."""
    if I.shape != G.shape or I.shape[0] != IN_CHANNELS:
        raise ShapeError(f"input stack {I.shape} and mask {G.shape} must both be [8, T, F]")
    ic = I[0::2] + 1j * I[1::2]
    gc = G[0::2] + 1j * G[1::2]
    out = ic[0] * gc[0]
    for c in range(1, IN_CHANNELS // 2):
        out = out + ic[c] * gc[c]
    return out.astype(np.complex64)


def postnet_head(h: np.ndarray, cfg: ModelConfig, w) -> np.ndarray:
    """Grouped linear layer + tanh: ``[hidden, ...] -> [2 * df_order * F, ...]``."""
    from .weights import postnet_group_sizes

    g_in, g_outs = postnet_group_sizes(cfg)
    outs = [
        linear(h[g * g_in : (g + 1) * g_in], w[f"postnet.out.g{g}.weight"], w[f"postnet.out.g{g}.bias"])
        for g in range(len(g_outs))
    ]
    return np.tanh(np.concatenate(outs, axis=0))


def coeffs_from_raw(raw: np.ndarray, df_order: int) -> np.ndarray:
    """``[2 * L * F, T] -> complex [T, F, L]`` (real block first, then imaginary)."""
    t = raw.shape[-1]
    r = raw.reshape(2, df_order, N_BINS, t)
    return (r[0] + 1j * r[1]).transpose(2, 1, 0).astype(np.complex64)


def postnet_forward(S1: np.ndarray, cfg: ModelConfig, w) -> np.ndarray:
    """Deep-filter taps ``[T, F, L]`` from the log-magnitude of the masked estimate."""
    if not cfg.postnet.enabled:
        raise ConfigError("postnet is disabled in this config")
    feats = np.log1p(np.abs(S1)).T.astype(DTYPE)  # [F, T]
    h = np.maximum(linear(feats, w["postnet.proj.weight"], w["postnet.proj.bias"]), 0.0)
    for layer in range(cfg.postnet.gru_layers):
        h = gru_forward(w.gru(f"postnet.gru{layer}"), h)
    return coeffs_from_raw(postnet_head(h, cfg, w), cfg.postnet.df_order)


def deep_filter(S1: np.ndarray, c: np.ndarray) -> np.ndarray:
    """``S[t, f] = sum_l c[t, f, l] * S1[t - l, f]`` with zero history before frame 0."""
    t, f, order = c.shape
    if S1.shape != (t, f):
        raise ShapeError(f"spectrum {S1.shape} vs coefficients {c.shape}")
    out = c[:, :, 0] * S1
    for lag in range(1, order):
        out[lag:] = out[lag:] + c[lag:, :, lag] * S1[:-lag]
    return out.astype(np.complex64)


def smru_forward(d, x, e, y, cfg: ModelConfig, w, trace: dict | None = None) -> np.ndarray:
    """Four ``[T, 161]`` spectra -> enhanced ``[T, 161]`` spectrum."""
    I = input_stack(d, x, e, y)
    if I.shape[2] != N_BINS:
        raise ShapeError(f"expected {N_BINS} bins, got {I.shape[2]}")
    R = stem_conv(I, w)
    H = band_split(R, cfg, w)
    U = unet_forward(H, cfg, w, trace)
    G = band_merge(U, cfg.layout, w)
    S1 = apply_mask(I, G)
    S = S1
    if cfg.postnet.enabled:
        S = deep_filter(S1, postnet_forward(S1, cfg, w))
    if trace is not None:
        trace.update(I=I, R=R, H=H, U=U, G=G, S1=S1, S=S)
    return S


def infer_shapes(cfg: ModelConfig, t: int) -> dict:
    """Shapes of every traced intermediate for ``t`` frames, from the config alone."""
    E, Q = cfg.E, cfg.Q
    shapes = {"I": (IN_CHANNELS, t, N_BINS), "R": (E, t, N_BINS), "H": (E, t, Q), "U": (E, t, Q),
              "G": (IN_CHANNELS, t, N_BINS), "S1": (t, N_BINS), "S": (t, N_BINS)}
    for j in range(1, cfg.num_blocks + 1):
        shapes[f"block{j}.in"] = (E, t, Q)
        shapes[f"block{j}.out"] = (E, t, Q)
    return shapes
