import math

import numpy as np
import pandas as pd
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import norm

from gemkit.classify import (GEMINATE, SINGLETON, GaussianModel, error_curve, error_rate,
                             fit_gaussian, heuristic_threshold, make_grid, mlc_classify,
                             mlc_predict, pep_threshold, pooled, threshold_errors)
from gemkit.errors import (DegenerateSample, DimensionMismatch, MissingFeature,
                           NoInteriorRoot, SingleClassGroup)


def g1(mean, var, prior=0.5):
    return GaussianModel(np.array([float(mean)]), np.array([[float(var)]]), prior)


def test_fit_mean_and_unbiased_variance():
    m = fit_gaussian([0.39, 0.63])
    assert m.mean[0] == pytest.approx(0.51)
    assert m.variance == pytest.approx(np.var([0.39, 0.63], ddof=1))


def test_degenerate_samples():
    with pytest.raises(DegenerateSample):
        fit_gaussian([1.0, 1.0, 1.0])
    with pytest.raises(DegenerateSample):
        fit_gaussian([[1, 2], [2, 4], [3, 6]])
    with pytest.raises(DegenerateSample):
        fit_gaussian([[1, 2], [2, 3]])


def test_fit_2d_law_of_large_numbers():
    cov = np.array([[4.0, 1.2], [1.2, 1.0]])
    x = np.random.default_rng(8).multivariate_normal([1.0, -2.0], cov, size=10000)
    m = fit_gaussian(x, dimension=2)
    assert np.all(np.abs(m.mean - [1.0, -2.0]) < 3 * np.sqrt(np.diag(cov) / 10000))
    np.testing.assert_allclose(m.cov, cov, rtol=0.06, atol=0.05)


def test_mlc_midpoint_boundary():
    s, g = g1(0, 1), g1(2, 1)
    assert mlc_classify([0.999], s, g)[0] == SINGLETON
    assert mlc_classify([1.001], s, g)[0] == GEMINATE


def test_tie_goes_to_singleton():
    s, g = g1(0, 1), g1(2, 1)
    label, (ls, lg) = mlc_classify([1.0], s, g)
    assert ls == lg and label == SINGLETON


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        mlc_classify([1.0, 2.0], g1(0, 1), g1(1, 1))


@settings(max_examples=30)
@given(st.integers(0, 2**32 - 1))
def test_mlc_against_direct_density(seed):
    rng = np.random.default_rng(seed)
    s = fit_gaussian(rng.normal(0, 1, (30, 2)))
    g = fit_gaussian(rng.normal(1.5, 1.3, (30, 2)))
    pts = rng.normal(0.7, 2, (50, 2))

    def dens(m, x):
        d = x - m.mean
        return math.exp(-0.5 * d @ np.linalg.solve(m.cov, d)) / (2 * math.pi * math.sqrt(np.linalg.det(m.cov)))

    expected = [dens(g, p) > dens(s, p) for p in pts]
    assert list(mlc_predict(pts, s, g)) == expected


@settings(max_examples=30)
@given(st.integers(0, 2**32 - 1), st.floats(0.1, 10), st.floats(-10, 10))
def test_mlc_affine_invariance(seed, a, b):
    rng = np.random.default_rng(seed)
    xs, xg = rng.normal(0, 1, 20), rng.normal(2, 1.5, 20)
    pts = rng.normal(1, 2, 40)
    s, g = fit_gaussian(xs), fit_gaussian(xg)
    base = mlc_predict(pts, s, g)
    moved = mlc_predict(a * pts + b, fit_gaussian(a * xs + b), fit_gaussian(a * xg + b))
    clear = np.abs(s.logpdf(pts) - g.logpdf(pts)) > 1e-9  # not numerically on the boundary
    assert np.array_equal(base[clear], moved[clear])


def test_pep_symmetric():
    assert pep_threshold(g1(0, 1), g1(2, 1)).threshold == pytest.approx(1.0)


def test_pep_unequal_variance_grid_oracle():
    s, g = g1(0, 1), g1(2, 4)
    t = pep_threshold(s, g).threshold
    grid = np.linspace(0, 2, 2_000_001)
    diff = norm.logpdf(grid, 0, 1) - norm.logpdf(grid, 2, 2)
    crossing = grid[np.argmin(np.abs(diff))]
    assert t == pytest.approx(crossing, abs=2e-6)
    assert abs(float(s.logpdf(t)[0] - g.logpdf(t)[0])) < 1e-9


@given(st.floats(-10, 10), st.floats(0.05, 5), st.floats(0.05, 5), st.floats(0.5, 5))
def test_pep_root_property(m, sd1, sd2, gap):
    s, g = g1(m, sd1 ** 2), g1(m + gap * max(sd1, sd2), sd2 ** 2)
    try:
        t = pep_threshold(s, g).threshold
    except NoInteriorRoot:
        return
    assert m <= t <= m + gap * max(sd1, sd2)
    assert abs(float(s.logpdf(t)[0] - g.logpdf(t)[0])) < 1e-9


def test_pep_errors():
    with pytest.raises(ValueError):
        pep_threshold(g1(2, 1), g1(0, 1))
    with pytest.raises(NoInteriorRoot):
        # the narrow class sits inside the wide one and dominates the gap
        pep_threshold(g1(0, 100.0), g1(0.01, 0.0001))


def test_heuristic_separable():
    r = heuristic_threshold([0.3, 0.4, 1.2, 1.5], [SINGLETON, SINGLETON, GEMINATE, GEMINATE])
    assert r.error_percent == 0.0
    assert r.optimal_interval == (0.4, 1.2)
    assert r.threshold == pytest.approx(0.8)


def test_heuristic_single_class():
    with pytest.raises(SingleClassGroup):
        heuristic_threshold([1, 2, 3], [GEMINATE] * 3)


def _brute_force(values, gem):
    """Every cut between sorted distinct values plus the two infinite ones."""
    u = sorted(set(values))
    cuts = [-math.inf] + [(a + b) / 2 for a, b in zip(u, u[1:])] + [math.inf]
    edges = [-math.inf] + u + [math.inf]
    errs = [sum((v > c) != gg for v, gg in zip(values, gem)) for c in cuts]
    best = min(errs)
    plateaus, i = [], 0
    while i < len(cuts):
        if errs[i] == best:
            j = i
            while j + 1 < len(cuts) and errs[j + 1] == best:
                j += 1
            plateaus.append((edges[i], edges[j + 1]))
            i = j + 1
        else:
            i += 1
    lo, hi = max(plateaus, key=lambda p: (p[1] - p[0], -p[0]))
    return 100.0 * best / len(values), (lo, hi)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 200))
def test_heuristic_equals_brute_force(seed, n):
    rng = np.random.default_rng(seed)
    gem = rng.random(n) < 0.5
    gem[0], gem[-1] = False, True
    values = np.round(rng.normal(0, 1, n) + 1.5 * gem, 2)  # rounding creates ties
    r = heuristic_threshold(values, gem)
    err, interval = _brute_force(values.tolist(), gem.tolist())
    assert r.error_percent == pytest.approx(err)
    assert r.optimal_interval == interval


def test_interleaved_classes():
    values = np.arange(12.0)
    gem = np.array([i % 2 == 1 for i in range(12)])
    r = heuristic_threshold(values, gem)
    err, interval = _brute_force(values.tolist(), gem.tolist())
    assert r.error_percent == pytest.approx(err) and r.optimal_interval == interval
    assert r.error_percent < 50.0


@settings(max_examples=30)
@given(st.integers(0, 2**32 - 1))
def test_heuristic_beats_pep(seed):
    rng = np.random.default_rng(seed)
    xs, xg = rng.normal(0.5, 0.12, 40), rng.normal(1.7, 0.5, 40)
    values = np.concatenate([xs, xg])
    gem = np.r_[np.zeros(40, bool), np.ones(40, bool)]
    heur = heuristic_threshold(values, gem)
    pep = pep_threshold(fit_gaussian(xs), fit_gaussian(xg))
    assert heur.error_percent <= threshold_errors(values, gem, [pep.threshold])[0] + 1e-12


def test_error_curve_examples():
    values, labels = [0.3, 0.4, 1.2, 1.5], [SINGLETON, SINGLETON, GEMINATE, GEMINATE]
    curve = dict(error_curve(values, labels, make_grid(0.2, 1.6, 0.1)))
    assert all(e == 0 for t, e in curve.items() if 0.4 <= t < 1.2)
    assert curve[0.2] == 50.0
    assert error_curve(values, labels, [0.35]) == [(0.35, 25.0)]
    with pytest.raises(ValueError):
        error_curve(values, labels, [])


@settings(max_examples=30)
@given(st.integers(0, 2**32 - 1))
def test_mlc_equals_curve_at_boundary(seed):
    rng = np.random.default_rng(seed)
    xs, xg = rng.normal(0, 1, 50), rng.normal(3, 1, 50)
    df = pd.DataFrame({"x": np.r_[xs, xg], "form": [SINGLETON] * 50 + [GEMINATE] * 50})
    s, g = fit_gaussian(xs), fit_gaussian(xg)
    t = pep_threshold(s, g).threshold
    # only meaningful when the boundary's other root lies outside the data
    a = 0.5 / g.variance - 0.5 / s.variance
    b = s.mean[0] / s.variance - g.mean[0] / g.variance
    c = (0.5 * g.mean[0] ** 2 / g.variance - 0.5 * s.mean[0] ** 2 / s.variance
         + 0.5 * math.log(g.variance / s.variance))
    others = [r.real for r in np.roots([a, b, c]) if abs(r.real - t) > 1e-6]
    if any(df.x.min() <= r <= df.x.max() for r in others):
        return
    rep = error_rate(df, ["x"])
    assert rep.error_percent == pytest.approx(threshold_errors(df.x, df.form, [t])[0])


def test_error_rate_protocols_and_confusion():
    rng = np.random.default_rng(1)
    df = pd.DataFrame({"cd": np.r_[rng.normal(90, 14, 108), rng.normal(210, 33, 108)],
                       "v1d": np.r_[rng.normal(183, 27, 108), rng.normal(125, 21, 108)],
                       "form": [SINGLETON] * 108 + [GEMINATE] * 108})
    for protocol in ("resubstitution", "leave_one_out"):
        rep = error_rate(df, ["cd", "v1d"], protocol)
        assert sum(rep.confusion.values()) == rep.n == 216
        assert rep.error_percent == pytest.approx(100 * rep.errors / 216)
    loo = error_rate(df, ["v1d"], "leave_one_out").errors
    assert loo >= error_rate(df, ["v1d"]).errors - 1


def test_perfect_separation_both_protocols():
    df = pd.DataFrame({"x": [1.0, 1.1, 0.9, 1.05, 5.0, 5.2, 4.9, 5.1],
                       "form": [SINGLETON] * 4 + [GEMINATE] * 4})
    assert error_rate(df, ["x"]).error_percent == 0
    assert error_rate(df, ["x"], "leave_one_out").error_percent == 0


def test_error_rate_errors():
    df = pd.DataFrame({"x": [1.0, 2.0, 3.0], "form": [GEMINATE] * 3})
    with pytest.raises(MissingFeature):
        error_rate(df, ["cd"])
    with pytest.raises(SingleClassGroup):
        error_rate(df, ["x"])
    with pytest.raises(MissingFeature):
        error_rate(pd.DataFrame({"x": [1.0, np.nan], "form": [SINGLETON, GEMINATE]}), ["x"])


def test_pooled_covariance():
    a = GaussianModel(np.zeros(2), np.eye(2))
    b = GaussianModel(np.ones(2), 3 * np.eye(2))
    pa, pb = pooled(a, b, 11, 11)
    np.testing.assert_allclose(pa.cov, 2 * np.eye(2))
    assert pa.cov is pb.cov
