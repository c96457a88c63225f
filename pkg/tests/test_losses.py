import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from smru.errors import ShapeError
from smru.losses import (
    LossWeights, echo_loss, erle, mae_loss, segmental_erle, si_snr, total_loss, vad_from_signal, vad_loss,
)


def spec(rng, t=20, f=161):
    return (rng.standard_normal((t, f)) + 1j * rng.standard_normal((t, f))).astype(np.complex64)


def test_vad_loss_of_silence_is_minus_ten():
    labels = np.zeros(20, bool)
    assert vad_loss(np.zeros((20, 161), np.complex64), labels) == -10.0


def test_vad_loss_ignores_active_frames(rng):
    s = spec(rng)
    labels = np.ones(20, bool)
    assert vad_loss(s, labels) == -10.0


def test_mae_zero_on_identity(rng):
    s = spec(rng)
    assert mae_loss(s, s) == 0.0


def test_mae_components():
    a = np.array([[1 + 0j]])
    b = np.array([[0 + 1j]])
    assert mae_loss(a, b) == pytest.approx(2.0)


def test_total_loss_is_linear_in_beta(rng):
    est, ref = spec(rng), spec(rng)
    labels = rng.random(20) > 0.5
    echo = rng.random(20) > 0.5
    vals = [total_loss(est, ref, labels, echo, LossWeights(beta=b)) for b in (0.0, 1.0, 2.0, 5.0)]
    slope = vals[1] - vals[0]
    assert slope == pytest.approx(vad_loss(est, labels))
    assert vals[2] == pytest.approx(vals[0] + 2 * slope)
    assert vals[3] == pytest.approx(vals[0] + 5 * slope)


def test_default_beta():
    assert LossWeights().beta == 0.0002
    with pytest.raises(ValueError):
        LossWeights(beta=-1)


def test_echo_fn_is_pluggable(rng):
    est, ref = spec(rng), spec(rng)
    labels = np.zeros(20, bool)
    a = total_loss(est, ref, labels, np.ones(20, bool), echo_fn=lambda *args: 0.0)
    b = total_loss(est, ref, labels, np.ones(20, bool))
    assert b - a == pytest.approx(0.1 * echo_loss(est, ref, np.ones(20, bool)))


def test_shape_errors(rng):
    with pytest.raises(ShapeError):
        mae_loss(spec(rng, 3), spec(rng, 4))
    with pytest.raises(ShapeError):
        vad_loss(spec(rng, 3), np.zeros(4, bool))


@settings(max_examples=40, deadline=None)
@given(scale=st.floats(1e-3, 1e3), seed=st.integers(0, 10_000))
def test_si_snr_scale_invariance(scale, seed):
    rng = np.random.default_rng(seed)
    tgt = rng.standard_normal(4000)
    est = tgt + 0.3 * rng.standard_normal(4000)
    assert abs(si_snr(scale * est, tgt) - si_snr(est, tgt)) <= 1e-4


def test_si_snr_edge_cases(rng):
    x = rng.standard_normal(1000)
    assert si_snr(x, x) == 80.0
    with pytest.raises(ValueError):
        si_snr(x, np.zeros(1000))


def test_erle_of_tenfold_attenuation(rng):
    mic = rng.standard_normal(16000)
    assert abs(erle(mic, mic / 10) - 20.0) <= 1e-6


def test_segmental_erle(rng):
    mic = rng.standard_normal(48000)
    seg = segmental_erle(mic, mic / 100)
    assert seg.shape == (3,) and np.allclose(seg, 40.0)


def test_vad_from_signal():
    x = np.zeros(16000)
    x[8000:12000] = np.sin(np.arange(4000) * 0.1)
    labels = vad_from_signal(x)
    assert labels.shape == (99,)
    assert not labels[:40].any() and labels[55:70].all()
