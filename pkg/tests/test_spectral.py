import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.signal import lfilter

from gemkit.errors import DegenerateFrame, InsufficientFormants, RegionTooShort, WrongLength
from gemkit.segmentation import Annotation, reference_frames
from gemkit.spectral import (LpcModel, autocorrelation, dft_magnitude, estimate_f0,
                             estimate_formants, hamming_window, levinson_durbin, lpc_fit,
                             lpc_from_resonances, measure_frames, parseval_energy,
                             pole_candidates, preemphasize)
from gemkit.synth import SynthSpec, synth_token_waveform

FS = 10000


def test_preemphasis_identity():
    x = np.array([0.3, -1.0, 2.0])
    np.testing.assert_array_equal(preemphasize(x, 0.0), x)


def test_preemphasis_constant_and_impulse():
    np.testing.assert_allclose(preemphasize(np.full(4, 2.0)), [2.0, 0.1, 0.1, 0.1])
    np.testing.assert_allclose(preemphasize(np.eye(1, 5)[0]), [1, -0.95, 0, 0, 0])


def test_hamming_weights():
    w = hamming_window(np.ones(256))
    assert w[0] == pytest.approx(0.08)
    np.testing.assert_allclose(w, 0.54 - 0.46 * np.cos(2 * np.pi * np.arange(256) / 255))
    assert hamming_window(np.ones(9), n=9)[4] == pytest.approx(1.0)
    with pytest.raises(WrongLength):
        hamming_window(np.ones(200))


def test_dft_single_bin():
    n = 256
    mag = dft_magnitude(np.cos(2 * np.pi * 10 * np.arange(n) / n))
    assert mag[10] == pytest.approx(n / 2)
    assert np.max(np.delete(mag, 10)) < 1e-9
    assert not np.any(dft_magnitude(np.zeros(n)))


@settings(max_examples=50)
@given(st.lists(st.floats(-1, 1), min_size=32, max_size=32), st.sampled_from([31, 32]))
def test_parseval_against_direct_dft(values, n):
    x = np.array(values[:n])
    k = np.arange(n)
    direct = np.array([np.sum(x * np.exp(-2j * np.pi * kk * k / n)) for kk in range(n // 2 + 1)])
    np.testing.assert_allclose(dft_magnitude(x), np.abs(direct), atol=1e-12)
    energy = float(np.dot(x, x))
    assert parseval_energy(np.abs(direct), n) == pytest.approx(energy, rel=1e-9, abs=1e-300)


@settings(max_examples=50)
@given(st.integers(0, 2**32 - 1), st.integers(1, 16))
def test_levinson_matches_toeplitz_solve(seed, order):
    x = np.random.default_rng(seed).standard_normal(200)
    r = autocorrelation(x, order)
    a, err, k = levinson_durbin(r, order)
    np.testing.assert_allclose(a, scipy.linalg.solve_toeplitz(r[:order], r[1:order + 1]),
                               rtol=1e-8, atol=1e-10)
    assert err == pytest.approx(r[0] - np.dot(a, r[1:order + 1]), rel=1e-9)
    assert np.all(np.abs(k) < 1)


def test_ar2_recovery():
    a_true = np.array([1.3, -0.6])
    e = np.random.default_rng(3).standard_normal(1_000_000)
    x = lfilter([1.0], [1.0, -a_true[0], -a_true[1]], e)
    model = lpc_fit(x, 2)
    np.testing.assert_allclose(model.coefficients, a_true, atol=1e-3)


def test_silent_and_order_zero():
    with pytest.raises(DegenerateFrame):
        lpc_fit(np.zeros(256))
    x = np.arange(1.0, 6.0)
    m = lpc_fit(x, 0)
    assert m.coefficients.size == 0 and m.gain == pytest.approx(np.dot(x, x))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_lpc_stable_and_residual_monotone(seed):
    x = hamming_window(np.random.default_rng(seed).standard_normal(256))
    gains = [lpc_fit(x, p).gain for p in range(0, 15)]
    assert all(b <= a * (1 + 1e-12) for a, b in zip(gains, gains[1:]))
    assert lpc_fit(x, 12).is_stable()


def test_formants_from_known_poles():
    model = lpc_from_resonances([(700, 80), (1200, 90), (2500, 120)], FS)
    np.testing.assert_allclose(estimate_formants(model, FS), (700, 1200, 2500), atol=1.0)


def test_single_sharp_pole():
    model = lpc_from_resonances([(500, 50), (1500, 900), (3000, 1200)], FS)
    with pytest.raises(InsufficientFormants) as info:
        estimate_formants(model, FS)
    assert info.value.found == 1


@settings(max_examples=40)
@given(st.integers(0, 2**32 - 1))
def test_formant_round_trip(seed):
    x = hamming_window(preemphasize(np.random.default_rng(seed).standard_normal(256)))
    model = lpc_fit(x, 12)
    pairs = pole_candidates(model, FS)
    again = pole_candidates(lpc_from_resonances(pairs, FS), FS)
    np.testing.assert_allclose(np.array(again), np.array(pairs), rtol=1e-6, atol=1e-6)


@given(st.floats(0.01, 100.0))
def test_formants_scale_invariant(k):
    spec = SynthSpec(120, ((700, 80), (1200, 100), (2500, 140)), "nasal_murmur",
                     (150, 90, 130), (0.1, 0.05, 0.1), seed=4)
    buf, ann = _cached(spec)
    frame = buf.samples[622:878]
    base = estimate_formants(lpc_fit(hamming_window(preemphasize(frame))), FS)
    scaled = estimate_formants(lpc_fit(hamming_window(preemphasize(k * frame))), FS)
    np.testing.assert_allclose(scaled, base, rtol=1e-9)


_CACHE = {}


def _cached(spec):
    if spec not in _CACHE:
        _CACHE[spec] = synth_token_waveform(spec)
    return _CACHE[spec]


def test_f0_impulse_train_through_resonator():
    n = 3000
    x = np.zeros(n)
    x[::int(FS / 125)] = 1.0  # exact 80-sample period
    y = lfilter([1.0], lpc_from_resonances([(700, 80)], FS).polynomial, x)
    assert estimate_f0(y, FS) == pytest.approx(125.0, abs=1.0)
    spec = SynthSpec(120, ((700, 80), (1200, 100), (2500, 140)), "nasal_murmur",
                     (150, 90, 130), (0.1, 0.05, 0.1), seed=1)
    buf, ann = _cached(spec)
    assert estimate_f0(buf.samples, FS, (0, 1500)) == pytest.approx(120.0, abs=1.0)


def test_white_noise_unvoiced():
    noise = np.random.default_rng(11).standard_normal(2000)
    assert estimate_f0(noise, FS) is None


def test_sine():
    t = np.arange(2000) / FS
    assert estimate_f0(np.sin(2 * np.pi * 200 * t), FS) == pytest.approx(200.0, abs=1.0)


def test_region_too_short():
    with pytest.raises(RegionTooShort):
        estimate_f0(np.ones(300), FS, band=(60, 400))


@settings(max_examples=30, deadline=None)
@given(st.floats(0.001, 1000.0), st.booleans())
def test_f0_scale_and_polarity_invariant(k, flip):
    t = np.arange(1200) / FS
    x = np.sin(2 * np.pi * 150 * t) + 0.5 * np.sin(2 * np.pi * 300 * t + 0.3)
    y = (-k if flip else k) * x
    assert estimate_f0(y, FS) == pytest.approx(estimate_f0(x, FS), rel=1e-9)


def test_schedule_marks_nasal_consonant_formants():
    spec = SynthSpec(120, ((700, 80), (1200, 100), (2500, 140)), "nasal_murmur",
                     (150, 90, 130), (0.1, 0.05, 0.1), seed=1)
    buf, ann = _cached(spec)
    frames = reference_frames(ann, len(buf))
    nas = measure_frames(buf.samples, frames, FS, "nasals")
    assert nas["C_CENTRE"].f1 is None and nas["C_CENTRE"].f0 is not None
    assert nas["V1_CENTRE"].f1 is not None
    liq = measure_frames(buf.samples, frames, FS, "liquids")
    assert liq["C_CENTRE"].f1 is not None


def test_lpc_model_polynomial_convention():
    m = LpcModel(2, np.array([1.3, -0.6]), 1.0)
    np.testing.assert_allclose(m.polynomial, [1.0, -1.3, 0.6])
    assert m.is_stable()
    assert math.isclose(abs(m.roots()[0]), math.sqrt(0.6))
