"""Acceptance criteria. Each test prints one PASS/FAIL line, repeated in the terminal summary."""
import time

import numpy as np
import pytest

import conftest
import oracles
from helpers import random_spectra, randomize_norms
from smru.complexity import count_macs
from smru.config import ModelConfig
from smru.frontend import istft, stft
from smru.laec import laec_process
from smru.losses import LossWeights, erle, mae_loss, si_snr, total_loss, vad_loss
from smru.model import deep_filter, smru_forward
from smru.pipeline import enhance_offline
from smru.scenes import SceneSpec, mix_scene
from smru.streaming import Stream
from smru.tensor import DTYPE, GruParams, causal_conv1d_time, conv2d, gru_forward, linear
from smru.weights import init_weights


def report(name, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'}  {name}: {detail}"
    print(line)
    conftest.ACCEPTANCE_LINES.append(line)
    assert ok, line


def _seeded_model(preset, seed):
    cfg = ModelConfig.preset(preset)
    return cfg, randomize_norms(init_weights(cfg, seed), np.random.default_rng(seed))


def test_causality_suite():
    rng = np.random.default_rng(2024)
    t0 = time.perf_counter()
    worst = []
    for preset in ("T", "S"):
        cfg, w = _seeded_model(preset, seed=17)
        spectra = random_spectra(rng, 100)
        ref = smru_forward(*spectra, cfg, w)
        for pos in rng.choice(np.arange(1, 100), size=20, replace=False):
            mod = [s.copy() for s in spectra]
            bump = (rng.standard_normal(161) + 1j * rng.standard_normal(161)).astype(np.complex64)
            for s in mod:
                s[pos] += bump
            out = smru_forward(*mod, cfg, w)
            worst.append(bool(np.array_equal(out[:pos], ref[:pos])))
    elapsed = time.perf_counter() - t0
    ok = all(worst) and elapsed < 120
    report("causality", ok, f"{sum(worst)}/{len(worst)} perturbations leave earlier frames bit-identical, {elapsed:.1f} s")


def test_streaming_equivalence():
    t0 = time.perf_counter()
    cfg, w = _seeded_model("T", seed=5)
    rng = np.random.default_rng(77)
    worst = 0.0
    for seed in rng.integers(0, 10_000, 10):
        sc = mix_scene(SceneSpec(seed=int(seed), duration=2.0))
        offline = enhance_offline(sc.mic, sc.farend, cfg, w)
        s = Stream(cfg, w)
        streamed = np.concatenate([s.process(sc.mic, sc.farend), s.flush()])
        worst = max(worst, float(np.abs(streamed[160:] - offline).max()))
    sc = mix_scene(SceneSpec(seed=3, duration=2.0))
    a = Stream(cfg, w)
    a.process(sc.mic[:16000], sc.farend[:16000])
    b = Stream.restore(a.checkpoint(), cfg, w)
    same = np.array_equal(a.process(sc.mic[16000:], sc.farend[16000:]), b.process(sc.mic[16000:], sc.farend[16000:]))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-5 and same and elapsed < 120
    report("streaming equivalence", ok,
           f"max |offline - streamed| = {worst:.2e} over 10 scenes, checkpoint continuation identical={same}, {elapsed:.1f} s")


def test_stft_round_trip():
    rng = np.random.default_rng(11)
    errs = []
    for _ in range(20):
        x = rng.standard_normal(int(rng.integers(3200, 32000)))
        y = istft(stft(x))
        lo, hi = 320, len(y) - 320
        errs.append(10 * np.log10(np.sum((x[lo:hi] - y[lo:hi]) ** 2) / np.sum(x[lo:hi] ** 2)))
    report("stft round trip", max(errs) <= -50, f"worst interior error {max(errs):.1f} dB over 20 signals")


def test_complexity_bands():
    from dataclasses import replace

    base = ModelConfig.preset("T")
    small = count_macs(replace(base, E=10).with_postnet(False)).total_macs_per_second
    large = count_macs(replace(base, E=200).with_postnet(False)).total_macs_per_second
    post = count_macs(base).postnet_macs_per_second
    ok = 40e6 <= small <= 60e6 and 5.5e9 <= large <= 8.0e9 and 20e6 <= post <= 40e6
    report("complexity bands", ok,
           f"E=10 {small / 1e6:.2f} M/s in [40,60], E=200 {large / 1e9:.3f} G/s in [5.5,8.0], "
           f"postnet {post / 1e6:.2f} M/s in [20,40]")


def test_linear_aec():
    t0 = time.perf_counter()
    sc = mix_scene(SceneSpec(seed=5, duration=10.0, scenario="ST-FE", ser_db=-np.inf, snr_db=np.inf, rir_ms=32))
    e, _ = laec_process(sc.mic, sc.farend)
    tail_erle = erle(sc.mic[-16000:], e[-16000:])
    d = (0.1 * np.random.default_rng(4).standard_normal(10 * 16000)).astype(np.float32)
    e0, _ = laec_process(d, np.zeros_like(d))
    rel = float(np.linalg.norm(e0 - d) / np.linalg.norm(d))
    elapsed = time.perf_counter() - t0
    ok = tail_erle >= 20 and rel <= 0.1 and elapsed < 30
    report("linear AEC", ok, f"last-second ERLE {tail_erle:.1f} dB (>= 20), x=0 relative error {rel:.1e} (<= 0.1), {elapsed:.1f} s")


def _oracle_worst(rng):
    f32 = lambda *shape: rng.uniform(-0.5, 0.5, shape).astype(DTYPE)  # noqa: E731
    worst = {k: 0.0 for k in ("conv2d", "conv1d", "gru", "linear", "deep_filter")}
    for _ in range(50):
        c, o, kt, kf = (int(v) for v in rng.integers(1, 4, 4))
        x = f32(c, int(rng.integers(kt, 7)), int(rng.integers(kf, 12)))
        wt, b = f32(o, c, kt, kf), f32(o)
        stride = tuple(int(s) for s in rng.integers(1, 3, 2))
        pad = ((int(rng.integers(0, 2)), 0), (0, int(rng.integers(0, 2))))
        worst["conv2d"] = max(worst["conv2d"], np.abs(conv2d(x, wt, b, stride, pad) - oracles.conv2d(x, wt, b, stride, pad)).max())

        g, ipg, opg, s = (int(v) for v in rng.integers(1, 4, 4))
        x = f32(g * ipg, int(rng.integers(s, 16)))
        wt, b = f32(g * opg, ipg, s), f32(g * opg)
        worst["conv1d"] = max(worst["conv1d"], np.abs(causal_conv1d_time(x, wt, b, s, g) - oracles.conv1d(x, wt, b, s, g)).max())

        d_in, hid, t = (int(v) for v in rng.integers(1, 6, 3))
        p = GruParams(f32(3 * hid, d_in), f32(3 * hid, hid), f32(3 * hid), f32(3 * hid))
        x = f32(d_in, t)
        worst["gru"] = max(worst["gru"], np.abs(gru_forward(p, x) - oracles.gru(p, x)).max())

        d_in, d_out = (int(v) for v in rng.integers(1, 10, 2))
        x, wt, b = f32(d_in, int(rng.integers(1, 5))), f32(d_out, d_in), f32(d_out)
        worst["linear"] = max(worst["linear"], np.abs(linear(x, wt, b) - oracles.linear(x, wt, b)).max())

        t, f, order = (int(v) for v in rng.integers(1, 6, 3))
        S1 = (f32(t, f) + 1j * f32(t, f)).astype(np.complex64)
        cf = (f32(t, f, order) + 1j * f32(t, f, order)).astype(np.complex64)
        worst["deep_filter"] = max(worst["deep_filter"], np.abs(deep_filter(S1, cf) - oracles.deep_filter(S1, cf)).max())
    return worst


def test_oracle_equivalence():
    worst = _oracle_worst(np.random.default_rng(50))
    ok = all(v <= 1e-6 for v in worst.values())
    report("oracle equivalence", ok, ", ".join(f"{k} {v:.1e}" for k, v in worst.items()) + " (<= 1e-6, 50 instances each)")


def test_loss_unit_values():
    rng = np.random.default_rng(3)
    est = (rng.standard_normal((30, 161)) + 1j * rng.standard_normal((30, 161))).astype(np.complex64)
    ref = (rng.standard_normal((30, 161)) + 1j * rng.standard_normal((30, 161))).astype(np.complex64)
    labels, echo = rng.random(30) > 0.5, rng.random(30) > 0.5
    v0 = vad_loss(np.zeros((30, 161), np.complex64), np.zeros(30, bool))
    m0 = mae_loss(ref, ref)
    totals = [total_loss(est, ref, labels, echo, LossWeights(beta=b)) for b in (0.0, 0.5, 1.0, 3.0)]
    slope = totals[2] - totals[0]
    linear_ok = all(abs(tot - (totals[0] + b * slope)) <= 1e-9 * max(1.0, abs(tot)) for b, tot in zip((0.0, 0.5, 1.0, 3.0), totals))
    beta = LossWeights().beta
    ok = v0 == -10.0 and m0 == 0.0 and linear_ok and beta == 0.0002
    report("loss unit values", ok, f"vad_loss(0) = {v0}, mae_loss(S,S) = {m0}, total linear in beta = {linear_ok}, default beta = {beta}")


def test_metric_properties():
    rng = np.random.default_rng(8)
    tgt = rng.standard_normal(16000)
    est = tgt + 0.5 * rng.standard_normal(16000)
    base = si_snr(est, tgt)
    drift = max(abs(si_snr(k * est, tgt) - base) for k in (1e-3, 0.1, 7.0, 1e3))
    mic = rng.standard_normal(16000)
    e20 = erle(mic, mic / 10)
    ok = drift <= 1e-4 and abs(e20 - 20.0) <= 1e-6
    report("metric properties", ok, f"si_snr scale drift {drift:.1e} dB, erle(mic, mic/10) = {e20:.9f} dB")


def test_real_time_factor():
    cfg, w = _seeded_model("T", seed=0)
    rng = np.random.default_rng(1)
    s = Stream(cfg, w)
    mic = rng.uniform(-0.3, 0.3, 16000 * 5).astype(np.float32)
    far = rng.uniform(-0.3, 0.3, 16000 * 5).astype(np.float32)
    s.process(mic[:3200], far[:3200])  # warm-up
    times = []
    for i in range(0, len(mic), 160):
        t0 = time.perf_counter()
        s.push(mic[i : i + 160], far[i : i + 160])
        times.append(time.perf_counter() - t0)
    rtf = sum(times) / 5.0
    report("real-time factor", rtf < 0.5,
           f"preset T streaming RTF {rtf:.3f} (< 0.5); mean push {1e3 * np.mean(times):.2f} ms, "
           f"p95 {1e3 * np.percentile(times, 95):.2f} ms, max {1e3 * max(times):.2f} ms")
