"""Singleton vs geminate classification.

Gaussian maximum-likelihood (1-D and 2-D) classifiers, points of equal
probability, an exhaustive threshold sweep and error curves. Labels are the
strings ``"singleton"`` and ``"geminate"``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from .errors import (DegenerateSample, DegenerateVariance, DimensionMismatch,
                     MissingFeature, NoInteriorRoot, SingleClassGroup)

SINGLETON, GEMINATE = "singleton", "geminate"
PROTOCOLS = ("resubstitution", "leave_one_out")


@dataclass(frozen=True)
class GaussianModel:
    mean: np.ndarray
    cov: np.ndarray
    prior: float = 0.5

    @property
    def dimension(self) -> int:
        return self.mean.size

    @property
    def variance(self) -> float:
        return float(self.cov[0, 0])

    @property
    def std(self) -> float:
        return math.sqrt(self.variance)

    def logpdf(self, x) -> np.ndarray:
        """Log density at each row of x (shape (n, d) or (d,) / scalar for d = 1)."""
        x = np.asarray(x, dtype=np.float64)
        if self.dimension == 1:
            x = x.reshape(-1, 1)
        x = np.atleast_2d(x)
        if x.shape[1] != self.dimension:
            raise DimensionMismatch(f"expected {self.dimension}-D points, got {x.shape[1]}-D")
        diff = x - self.mean
        inv = np.linalg.inv(self.cov)
        _, logdet = np.linalg.slogdet(self.cov)
        maha = np.einsum("ij,jk,ik->i", diff, inv, diff)
        return -0.5 * (maha + logdet + self.dimension * math.log(2 * math.pi))


def fit_gaussian(samples, dimension: int | None = None, prior: float = 0.5) -> GaussianModel:
    """Sample mean and unbiased (n - 1) covariance."""
    x = np.asarray(samples, dtype=np.float64)
    if x.ndim == 1:
        x = x.reshape(-1, 1)
    if dimension is not None and x.shape[1] != dimension:
        raise DimensionMismatch(f"samples are {x.shape[1]}-D, expected {dimension}-D")
    n, d = x.shape
    if n < d + 1:
        raise DegenerateSample(f"{n} samples cannot fit a {d}-D Gaussian")
    cov = np.atleast_2d(np.cov(x, rowvar=False, ddof=1))
    if d == 1:
        if not cov[0, 0] > 0:
            raise DegenerateSample("zero variance")
    elif np.linalg.eigvalsh(cov).min() <= 1e-12 * max(np.trace(cov), 1e-300):
        raise DegenerateSample("singular covariance")
    return GaussianModel(x.mean(axis=0), cov, prior)


def pooled(a: GaussianModel, b: GaussianModel, n_a: int, n_b: int):
    """Replace both covariances by their pooled estimate (linear boundary)."""
    cov = ((n_a - 1) * a.cov + (n_b - 1) * b.cov) / (n_a + n_b - 2)
    return GaussianModel(a.mean, cov, a.prior), GaussianModel(b.mean, cov, b.prior)


def _scores(x, singleton: GaussianModel, geminate: GaussianModel):
    if singleton.dimension != geminate.dimension:
        raise DimensionMismatch("models differ in dimension")
    ls = singleton.logpdf(x) + math.log(singleton.prior)
    lg = geminate.logpdf(x) + math.log(geminate.prior)
    return ls, lg


def mlc_classify(x, singleton: GaussianModel, geminate: GaussianModel):
    """Label of the larger prior-weighted density; ties go to singleton."""
    x = np.asarray(x, dtype=np.float64)
    if x.size != singleton.dimension:
        raise DimensionMismatch(f"point has {x.size} components, models are {singleton.dimension}-D")
    ls, lg = _scores(x.reshape(1, -1), singleton, geminate)
    label = GEMINATE if lg[0] > ls[0] else SINGLETON
    return label, (float(ls[0]), float(lg[0]))


def mlc_predict(X, singleton: GaussianModel, geminate: GaussianModel) -> np.ndarray:
    """Vectorized mlc_classify; returns True for geminate."""
    ls, lg = _scores(X, singleton, geminate)
    return lg > ls


@dataclass(frozen=True)
class ThresholdResult:
    threshold: float
    method: str
    error_percent: float | None = None
    optimal_interval: tuple[float, float] | None = None


def pep_threshold(g1: GaussianModel, g2: GaussianModel) -> ThresholdResult:
    """Point of equal prior-weighted density lying between the two means.

    ``g1`` must be the lower-mean class.
    """
    if g1.dimension != 1 or g2.dimension != 1:
        raise DimensionMismatch("PEP needs 1-D models")
    m1, m2 = float(g1.mean[0]), float(g2.mean[0])
    v1, v2 = g1.variance, g2.variance
    if not (v1 > 0 and v2 > 0):
        raise DegenerateVariance("variances must be positive")
    if not m1 < m2:
        raise ValueError("g1 must have the smaller mean")
    # log(p1 N1(x)) - log(p2 N2(x)) = a x^2 + b x + c
    a = 0.5 / v2 - 0.5 / v1
    b = m1 / v1 - m2 / v2
    c = (0.5 * m2 * m2 / v2 - 0.5 * m1 * m1 / v1 + 0.5 * math.log(v2 / v1)
         + math.log(g1.prior / g2.prior))
    if abs(a) <= 1e-15 * (1 / v1 + 1 / v2):
        roots = [-c / b]
    else:
        disc = b * b - 4 * a * c
        if disc < 0:
            raise NoInteriorRoot("densities never cross")
        sq = math.sqrt(disc)
        # numerically stable pair of quadratic roots
        q = -0.5 * (b + math.copysign(sq, b))
        roots = [q / a] + ([c / q] if q != 0 else [])
    inside = [r for r in roots if m1 <= r <= m2]
    if not inside:
        raise NoInteriorRoot(f"no crossing between {m1:.6g} and {m2:.6g}: {roots}")
    return ThresholdResult(min(inside, key=lambda r: abs(r - 0.5 * (m1 + m2))), "pep")


def _as_geminate(labels) -> np.ndarray:
    lab = np.asarray(labels)
    if lab.dtype == bool:
        return lab
    return lab == GEMINATE


def threshold_errors(values, labels, thresholds, geminate_above: bool = True) -> np.ndarray:
    """Error percent of the rule ``value > t -> geminate`` (or ``<`` when flipped)."""
    v = np.asarray(values, dtype=np.float64)
    g = _as_geminate(labels)
    order = np.argsort(v, kind="stable")
    vs, gs = v[order], g[order]
    cum_gem = np.concatenate(([0], np.cumsum(gs)))
    cum_sing = np.concatenate(([0], np.cumsum(~gs)))
    idx = np.searchsorted(vs, np.asarray(thresholds, dtype=np.float64), side="right")
    # idx points with value <= t fall on the singleton side
    if geminate_above:
        wrong = cum_gem[idx] + (cum_sing[-1] - cum_sing[idx])
    else:
        wrong = cum_sing[idx] + (cum_gem[-1] - cum_gem[idx])
    return 100.0 * wrong / v.size


def heuristic_threshold(values, labels, geminate_above: bool = True) -> ThresholdResult:
    """Exhaustive sweep over every cut between consecutive distinct values.

    Adjacent minimum-error cuts are merged into plateaus; the widest plateau
    wins (lowest on ties) and its midpoint is reported. A plateau that is
    unbounded on one side reports the infinite cut itself.
    """
    v = np.asarray(values, dtype=np.float64)
    g = _as_geminate(labels)
    if g.all() or not g.any():
        raise SingleClassGroup("both classes are required")
    u = np.unique(v)
    cuts = np.concatenate(([-np.inf], 0.5 * (u[:-1] + u[1:]), [np.inf]))
    errs = threshold_errors(v, g, cuts, geminate_above)
    # the region of cut i is (edges[i], edges[i+1])
    edges = np.concatenate(([-np.inf], u, [np.inf]))
    best = errs.min()
    is_min = np.isclose(errs, best, rtol=0, atol=1e-9)
    plateaus, i = [], 0
    while i < cuts.size:
        if is_min[i]:
            j = i
            while j + 1 < cuts.size and is_min[j + 1]:
                j += 1
            plateaus.append((edges[i], edges[j + 1]))
            i = j + 1
        else:
            i += 1
    lo, hi = max(plateaus, key=lambda p: (p[1] - p[0], -p[0]))
    if math.isinf(lo) and math.isinf(hi):
        t = 0.0
    elif math.isinf(lo):
        t = -math.inf
    elif math.isinf(hi):
        t = math.inf
    else:
        t = 0.5 * (lo + hi)
    return ThresholdResult(float(t), "heuristic", float(best), (float(lo), float(hi)))


def error_curve(values, labels, grid, geminate_above: bool = True) -> list[tuple[float, float]]:
    grid = np.asarray(grid, dtype=np.float64).ravel()
    if grid.size == 0:
        raise ValueError("empty threshold grid")
    errs = threshold_errors(values, labels, grid, geminate_above)
    return [(float(t), float(e)) for t, e in zip(grid, errs)]


def make_grid(lo: float, hi: float, step: float) -> np.ndarray:
    n = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return np.round(lo + step * np.arange(n), 12)


@dataclass
class ClassificationReport:
    features: tuple[str, ...]
    protocol: str
    n: int
    singleton_as_geminate: int
    geminate_as_singleton: int
    confusion: dict = field(default_factory=dict)

    @property
    def errors(self) -> int:
        return self.singleton_as_geminate + self.geminate_as_singleton

    @property
    def error_percent(self) -> float:
        return 100.0 * self.errors / self.n


def _fit_pair(X, g, pooled_cov):
    s = fit_gaussian(X[~g])
    m = fit_gaussian(X[g])
    if pooled_cov:
        s, m = pooled(s, m, int((~g).sum()), int(g.sum()))
    return s, m


def error_rate(dataset: pd.DataFrame, features, protocol: str = "resubstitution",
               label_column: str = "form", pooled_cov: bool = False) -> ClassificationReport:
    """MLC error on ``features`` (1 or 2 columns) under the given protocol."""
    features = tuple(features)
    if protocol not in PROTOCOLS:
        raise ValueError(f"protocol must be one of {PROTOCOLS}")
    missing = [f for f in features if f not in dataset.columns]
    if missing:
        raise MissingFeature(f"feature(s) not in dataset: {missing}")
    sub = dataset[list(features) + [label_column]]
    if sub[list(features)].isna().any().any():
        raise MissingFeature(f"feature(s) {list(features)} missing on some records")
    X = sub[list(features)].to_numpy(dtype=np.float64)
    g = _as_geminate(sub[label_column].to_numpy())
    if g.all() or not g.any():
        raise SingleClassGroup("both classes are required")
    if protocol == "resubstitution":
        s, m = _fit_pair(X, g, pooled_cov)
        pred = mlc_predict(X, s, m)
    else:
        pred = np.empty(g.size, dtype=bool)
        keep = np.ones(g.size, dtype=bool)
        for i in range(g.size):
            keep[i] = False
            s, m = _fit_pair(X[keep], g[keep], pooled_cov)
            pred[i] = mlc_predict(X[i:i + 1], s, m)[0]
            keep[i] = True
    s2g = int(np.sum(pred & ~g))
    g2s = int(np.sum(~pred & g))
    confusion = {
        (SINGLETON, SINGLETON): int(np.sum(~pred & ~g)),
        (SINGLETON, GEMINATE): s2g,
        (GEMINATE, SINGLETON): g2s,
        (GEMINATE, GEMINATE): int(np.sum(pred & g)),
    }
    return ClassificationReport(features, protocol, int(g.size), s2g, g2s, confusion)
