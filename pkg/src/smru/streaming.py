"""Frame-by-frame execution of the full pipeline with bounded state.

One push consumes one hop (160 samples) of mic and far-end audio and returns
one hop of enhanced audio.  Output lags input by exactly one hop (10 ms, the
STFT overlap): push ``n`` returns samples ``[(n - 1) * 160, n * 160)`` of the
offline result, push 0 returns silence, and :meth:`Stream.flush` drains the
final half-window.  So for an input of N whole hops::

    concat(push outputs) + flush()  ==  [160 zeros] + enhance_offline(...)

VR blocks with ``lambda > 1`` only run their recurrent and MLP layers on the
push that completes a compressed frame, so the cost per push varies.

Checkpoints use the named-array container of :mod:`smru.binfmt` with magic
``SMRUSTAT``, the model config hash as header, and one section per state
array (``laec.*``, ``stft.prev.{d,x,e,y}``, ``ola.tail``, ``block{j}.*``,
``postnet.h{l}``, ``df.hist``, ``meta``).
"""
from __future__ import annotations

import numpy as np

from . import binfmt
from .config import ModelConfig
from .errors import ContractError, FormatError
from .frontend import StftConfig, stft_frame, synth_frame
from .laec import KalmanFilterState, LaecConfig, laec_step
from .model import (
    apply_mask,
    band_merge,
    band_split,
    block_input,
    coeffs_from_raw,
    interband_mlp,
    postnet_head,
    stem_conv,
    time_downsample,
)
from .tensor import DTYPE, gru_step, layer_norm, linear

CHECKPOINT_MAGIC = b"SMRUSTAT"
CHECKPOINT_VERSION = 1


class _BlockState:
    """Per-VR-block buffers: pending input frames, GRU hidden, held US output."""

    def __init__(self, cfg: ModelConfig, lam: int, w, prefix: str):
        E, Q = cfg.E, cfg.Q
        self.lam = lam
        self.prefix = prefix
        self.buf = np.zeros((E, lam, Q), DTYPE)
        self.count = 0
        self.h = np.zeros((E, Q), DTYPE)
        self.held = w[f"{prefix}.us.zero_history"][:, None, :].copy()

    def step(self, z: np.ndarray, w) -> np.ndarray:
        self.buf[:, self.count % self.lam, :] = z[:, 0, :]
        self.count += 1
        if self.count % self.lam == 0:
            p = self.prefix
            zd = time_downsample(self.buf, self.lam, w, p)
            n = layer_norm(zd, w[f"{p}.intra.norm.gain"], w[f"{p}.intra.norm.bias"], axis=0)
            self.h = gru_step(w.gru(f"{p}.intra.gru"), n[:, 0, :], self.h)
            z1 = linear(self.h[:, None, :], w[f"{p}.intra.fc.weight"], w[f"{p}.intra.fc.bias"]) + zd
            z2 = interband_mlp(z1, w, p) + z1
            self.held = linear(z2, w[f"{p}.us.weight"], w[f"{p}.us.bias"])
        return self.held


class Stream:
    """Stateful streaming engine; one instance per audio stream, single caller at a time."""

    def __init__(self, cfg: ModelConfig, weights, stft_cfg: StftConfig = StftConfig()):
        self.cfg = cfg
        self.w = weights
        self.stft = stft_cfg
        self.hop = stft_cfg.hop
        self.laec = KalmanFilterState.create(LaecConfig(block=self.hop))
        self.prev = {k: np.zeros(self.hop) for k in "dxey"}
        self.tail = np.zeros(self.hop)
        self.pushes = 0
        self.blocks = [
            _BlockState(cfg, lam, weights, f"unet.block{j}")
            for j, lam in enumerate(cfg.lambda_schedule, start=1)
        ]
        pn = cfg.postnet
        self.post_h = [np.zeros((pn.hidden, 1), DTYPE) for _ in range(pn.gru_layers)] if pn.enabled else []
        self.df_hist = np.zeros((max(pn.df_order - 1, 0), stft_cfg.n_bins), np.complex64) if pn.enabled else None

    # -- core ---------------------------------------------------------------------------------
    def _model_step(self, spectra) -> np.ndarray:
        cfg, w = self.cfg, self.w
        I = np.stack([p for s in spectra for p in (s.real, s.imag)])[:, None, :].astype(DTYPE)
        H = band_split(stem_conv(I, w), cfg, w)
        outs = []
        for j, blk in enumerate(self.blocks, start=1):
            outs.append(blk.step(block_input(j, H, outs, cfg, w), w))
        S1 = apply_mask(I, band_merge(outs[-1], cfg.layout, w))  # [1, F]
        if not cfg.postnet.enabled:
            return S1[0]
        h = np.log1p(np.abs(S1)).T.astype(DTYPE)
        h = np.maximum(linear(h, w["postnet.proj.weight"], w["postnet.proj.bias"]), 0.0)
        for layer in range(cfg.postnet.gru_layers):
            h = self.post_h[layer] = gru_step(w.gru(f"postnet.gru{layer}"), h, self.post_h[layer])
        c = coeffs_from_raw(postnet_head(h, cfg, w), cfg.postnet.df_order)[0]  # [F, L]
        out = c[:, 0] * S1[0]
        for lag in range(1, cfg.postnet.df_order):
            out = out + c[:, lag] * self.df_hist[lag - 1]
        if len(self.df_hist):
            self.df_hist[1:] = self.df_hist[:-1]
            self.df_hist[0] = S1[0]
        return out.astype(np.complex64)

    def push(self, mic, farend) -> np.ndarray:
        mic = np.asarray(mic, dtype=np.float32)
        farend = np.asarray(farend, dtype=np.float32)
        if mic.shape != (self.hop,) or farend.shape != (self.hop,):
            raise ContractError(f"push expects exactly {self.hop} mic and far-end samples")
        d, x = mic.astype(np.float64), farend.astype(np.float64)
        e, y = laec_step(self.laec, d, x)
        cur = {
            "d": d, "x": x,
            "e": e.astype(np.float32).astype(np.float64),
            "y": y.astype(np.float32).astype(np.float64),
        }
        self.pushes += 1
        if self.pushes == 1:
            self.prev = cur
            return np.zeros(self.hop, np.float32)
        spectra = [stft_frame(np.concatenate([self.prev[k], cur[k]]), self.stft) for k in "dxey"]
        self.prev = cur
        frame = synth_frame(self._model_step(spectra), self.stft)
        out = self.tail + frame[: self.hop]
        self.tail = frame[self.hop :].copy()
        return out.astype(np.float32)

    def flush(self) -> np.ndarray:
        out = self.tail.astype(np.float32)
        self.tail = np.zeros(self.hop)
        return out

    def process(self, mic, farend) -> np.ndarray:
        """Push whole hops of two equal-length signals; returns the concatenated outputs."""
        mic = np.asarray(mic, dtype=np.float32)
        farend = np.asarray(farend, dtype=np.float32)
        n = len(mic) // self.hop
        return np.concatenate(
            [self.push(mic[i * self.hop : (i + 1) * self.hop], farend[i * self.hop : (i + 1) * self.hop]) for i in range(n)]
        ) if n else np.zeros(0, np.float32)

    # -- checkpointing ------------------------------------------------------------------------
    def state_arrays(self) -> dict:
        arrays = {f"laec.{k}": v for k, v in self.laec.arrays().items()}
        arrays.update({f"stft.prev.{k}": v for k, v in self.prev.items()})
        arrays["ola.tail"] = self.tail
        for j, blk in enumerate(self.blocks, start=1):
            arrays[f"block{j}.buf"] = blk.buf
            arrays[f"block{j}.h"] = blk.h
            arrays[f"block{j}.held"] = blk.held
        for layer, h in enumerate(self.post_h):
            arrays[f"postnet.h{layer}"] = h
        if self.df_hist is not None:
            arrays["df.hist"] = self.df_hist
        arrays["meta"] = np.array([self.pushes] + [b.count for b in self.blocks], dtype=np.int64)
        return arrays

    def checkpoint(self) -> bytes:
        return binfmt.dumps(CHECKPOINT_MAGIC, CHECKPOINT_VERSION, self.cfg.config_hash(), self.state_arrays())

    @classmethod
    def restore(cls, blob: bytes, cfg: ModelConfig, weights) -> "Stream":
        version, header, arrays = binfmt.loads(blob, CHECKPOINT_MAGIC)
        if version != CHECKPOINT_VERSION:
            raise FormatError(f"unsupported checkpoint version {version}")
        if header != cfg.config_hash():
            raise FormatError("checkpoint belongs to a different model config")
        s = cls(cfg, weights)
        expected = s.state_arrays()
        if set(arrays) != set(expected):
            raise FormatError("checkpoint sections do not match the model config")
        for k, v in expected.items():
            if arrays[k].shape != v.shape or arrays[k].dtype != v.dtype:
                raise FormatError(f"checkpoint section {k} has shape {arrays[k].shape}, expected {v.shape}")
        for k in s.laec.arrays():
            setattr(s.laec, k, arrays[f"laec.{k}"])
        s.prev = {k: arrays[f"stft.prev.{k}"] for k in "dxey"}
        s.tail = arrays["ola.tail"]
        meta = arrays["meta"]
        s.pushes = int(meta[0])
        for j, blk in enumerate(s.blocks, start=1):
            blk.buf, blk.h, blk.held = arrays[f"block{j}.buf"], arrays[f"block{j}.h"], arrays[f"block{j}.held"]
            blk.count = int(meta[j])
        s.post_h = [arrays[f"postnet.h{layer}"] for layer in range(len(s.post_h))]
        if s.df_hist is not None:
            s.df_hist = arrays["df.hist"]
        return s


def stream_create(cfg: ModelConfig, weights) -> Stream:
    return Stream(cfg, weights)


def stream_push(state: Stream, mic, farend) -> np.ndarray:
    return state.push(mic, farend)


def stream_flush(state: Stream) -> np.ndarray:
    return state.flush()
