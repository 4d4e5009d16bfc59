"""Correlations, fixed-effects ANOVA and split-plot repeated-measures ANOVA."""
from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass

import numpy as np
import pandas as pd
from scipy import special
from scipy import stats as sps

from .errors import (ConstantInput, EmptyCell, IncompleteGrid, TooFewSubjects,
                     UnbalancedDesign)

ALPHA = 0.05


def f_p_value(F: float, df_num: int, df_den: int) -> float:
    """Upper tail of the F distribution through the regularized incomplete beta."""
    if df_num < 1 or df_den < 1:
        raise ValueError("degrees of freedom must be >= 1")
    if math.isnan(F):
        return math.nan
    if F <= 0:
        return 1.0
    if math.isinf(F):
        return 0.0
    x = df_den / (df_den + df_num * F)
    if x > 0.5:
        # x rounds toward 1 for small F; the complementary form keeps the digits
        y = df_num * F / (df_den + df_num * F)
        return float(special.betaincc(df_num / 2.0, df_den / 2.0, y))
    return float(special.betainc(df_den / 2.0, df_num / 2.0, x))


def t_p_value(t: float, df: int) -> float:
    """Two-sided Student-t p value."""
    if math.isinf(t):
        return 0.0
    return float(2.0 * sps.t.sf(abs(t), df))


@dataclass(frozen=True)
class CorrelationResult:
    coefficient: float
    p_value: float
    n: int
    kind: str

    @property
    def significant(self) -> bool:
        return self.p_value < ALPHA


def _pair(x, y):
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be 1-D and of equal length")
    if x.size < 3:
        raise ValueError("need at least 3 pairs")
    return x, y


def _corr(x, y) -> float:
    dx = x - x.mean()
    dy = y - y.mean()
    sxx, syy = np.dot(dx, dx), np.dot(dy, dy)
    if sxx == 0 or syy == 0:
        raise ConstantInput("zero variance input")
    r = np.dot(dx, dy) / math.sqrt(sxx * syy)
    return float(min(1.0, max(-1.0, r)))


def _t_approx(r: float, n: int) -> float:
    if abs(r) >= 1.0:
        return 0.0
    return t_p_value(r * math.sqrt((n - 2) / (1 - r * r)), n - 2)


def pearson(x, y) -> CorrelationResult:
    x, y = _pair(x, y)
    r = _corr(x, y)
    return CorrelationResult(r, _t_approx(r, x.size), x.size, "pearson")


def spearman(x, y) -> CorrelationResult:
    """Rank correlation with average ranks for ties; p from the t approximation."""
    x, y = _pair(x, y)
    r = _corr(sps.rankdata(x), sps.rankdata(y))
    return CorrelationResult(r, _t_approx(r, x.size), x.size, "spearman")


def spearman_permutation_p(x, y, chunk: int = 200_000) -> float:
    """Exact two-sided permutation p value of Spearman's rho (n <= 10)."""
    x, y = _pair(x, y)
    n = x.size
    if n > 10:
        raise ValueError("exact enumeration is limited to n <= 10")
    rx = sps.rankdata(x)
    ry = sps.rankdata(y)
    rx = (rx - rx.mean()) / np.linalg.norm(rx - rx.mean())
    ry = ry - ry.mean()
    ry = ry / np.linalg.norm(ry)
    observed = abs(float(np.dot(rx, ry))) - 1e-12
    hits = total = 0
    perms = itertools.permutations(range(n))
    while True:
        block = np.array(list(itertools.islice(perms, chunk)), dtype=np.intp)
        if block.size == 0:
            break
        rho = ry[block] @ rx
        hits += int(np.count_nonzero(np.abs(rho) >= observed))
        total += block.shape[0]
    return hits / total


@dataclass(frozen=True)
class AnovaRow:
    effect: str
    F: float
    df_num: int
    df_den: int
    p: float
    ss: float = math.nan

    @property
    def significant(self) -> bool:
        return self.p < ALPHA


@dataclass
class AnovaResult:
    rows: list[AnovaRow]

    def __getitem__(self, effect: str) -> AnovaRow:
        for row in self.rows:
            if row.effect == effect:
                return row
        raise KeyError(effect)

    def __iter__(self):
        return iter(self.rows)

    @property
    def effects(self) -> list[str]:
        return [r.effect for r in self.rows]

    def to_records(self) -> list[dict]:
        return [dict(asdict(r), significant=r.significant) for r in self.rows]


def _row(effect, ss_eff, df_eff, ss_err, df_err, scale) -> AnovaRow:
    # sums of squares below round-off relative to the data scale count as zero
    tol = 1e-10 * max(scale, 1e-300)
    if ss_eff <= tol:
        F = 0.0
    elif ss_err <= tol:
        F = math.inf
    else:
        F = (ss_eff / df_eff) / (ss_err / df_err)
    return AnovaRow(effect, F, int(df_eff), int(df_err), f_p_value(F, df_eff, df_err), float(ss_eff))


def anova_oneway(*groups, effect: str = "Form") -> AnovaResult:
    data = [np.asarray(g, dtype=np.float64) for g in groups]
    if len(data) < 2:
        raise ValueError("need at least two groups")
    if any(g.size < 2 for g in data):
        raise ValueError("each group needs at least two observations")
    allv = np.concatenate(data)
    grand = allv.mean()
    ss_between = sum(g.size * (g.mean() - grand) ** 2 for g in data)
    ss_within = sum(float(np.sum((g - g.mean()) ** 2)) for g in data)
    k, n = len(data), allv.size
    scale = float(np.sum((allv - grand) ** 2)) + float(np.sum(allv ** 2)) * 1e-6
    return AnovaResult([_row(effect, ss_between, k - 1, ss_within, n - k, scale)])


def anova_factorial(data: pd.DataFrame, response: str, factors) -> AnovaResult:
    """Main-effects fixed-factor ANOVA on a balanced design (no interactions)."""
    factors = list(factors)
    df = data[factors + [response]].dropna(subset=[response])
    if df.empty:
        raise EmptyCell("no observations")
    counts = df.groupby(factors, observed=True).size()
    n_cells = int(np.prod([df[f].nunique() for f in factors]))
    if len(counts) < n_cells:
        raise EmptyCell(f"{n_cells - len(counts)} empty factor cell(s)")
    if counts.nunique() != 1:
        raise UnbalancedDesign(f"cell counts range {counts.min()}..{counts.max()}")
    y = df[response].to_numpy(dtype=np.float64)
    grand = y.mean()
    ss_total = float(np.sum((y - grand) ** 2))
    scale = ss_total + float(np.sum(y ** 2)) * 1e-6
    mains = []
    for f in factors:
        g = df.groupby(f, observed=True)[response].agg(["mean", "size"])
        ss = float(np.sum(g["size"] * (g["mean"] - grand) ** 2))
        mains.append((f, ss, len(g) - 1))
    df_err = y.size - 1 - sum(d for _, _, d in mains)
    if df_err < 1:
        raise UnbalancedDesign("no residual degrees of freedom")
    ss_err = max(ss_total - sum(ss for _, ss, _ in mains), 0.0)
    return AnovaResult([_row(f, ss, d, ss_err, df_err, scale) for f, ss, d in mains])


def anova_repeated(data: pd.DataFrame, response: str, subject: str, between: str,
                   within) -> AnovaResult:
    """Split-plot ANOVA: one between-subjects factor, any number of within factors.

    The between effect is tested against subjects-within-groups; every within
    effect S and its interaction with the between factor are tested against
    S x subjects-within-groups. Sphericity is assumed. Duplicate rows for a
    subject/cell are averaged first.
    """
    within = list(within)
    df = (data.groupby([subject, between] + within, observed=True)[response]
          .mean().reset_index())
    per_subject = df.groupby(subject)[between].nunique()
    if (per_subject > 1).any():
        raise ValueError("each subject must belong to exactly one between-subjects level")
    levels = [sorted(df[w].unique()) for w in within]
    subjects = sorted(df[subject].unique())
    shape = (len(subjects),) + tuple(len(lv) for lv in levels)
    grid = df.set_index([subject] + within)[response]
    full = pd.MultiIndex.from_product([subjects] + levels, names=[subject] + within)
    grid = grid.reindex(full)
    if grid.isna().any():
        raise IncompleteGrid(f"{int(grid.isna().sum())} missing subject x within cell(s)")
    Y = grid.to_numpy(dtype=np.float64).reshape(shape)
    group_of = df.groupby(subject)[between].first().loc[subjects].to_numpy()
    groups = sorted(set(group_of))
    sizes = {g: int(np.sum(group_of == g)) for g in groups}
    if len(groups) < 2 or min(sizes.values()) < 2:
        raise TooFewSubjects(f"need >= 2 subjects in each of >= 2 groups, got {sizes}")

    n_s, n_b = len(subjects), len(groups)
    axes = tuple(range(1, Y.ndim))
    n_w = int(np.prod(shape[1:]))
    scale = float(np.sum((Y - Y.mean()) ** 2)) + float(np.sum(Y ** 2)) * 1e-6

    subj_mean = Y.mean(axis=axes)
    grand = subj_mean.mean()
    grp_mean = {g: subj_mean[group_of == g].mean() for g in groups}
    ss_b = n_w * sum(sizes[g] * (grp_mean[g] - grand) ** 2 for g in groups)
    ss_subj = n_w * sum((subj_mean[i] - grp_mean[group_of[i]]) ** 2 for i in range(n_s))
    rows = [_row(between, ss_b, n_b - 1, ss_subj, n_s - n_b, scale)]

    for size in range(1, len(within) + 1):
        for S in itertools.combinations(range(len(within)), size):
            s_axes = tuple(i + 1 for i in S)
            # subject-specific S effect by inclusion-exclusion over marginal means
            D = 0.0
            for k in range(len(S) + 1):
                for U in itertools.combinations(s_axes, k):
                    drop = tuple(a for a in axes if a not in U)
                    D = D + (-1) ** (len(S) - k) * Y.mean(axis=drop, keepdims=True)
            D = np.broadcast_to(D, (n_s,) + tuple(shape[a] if a in s_axes else 1 for a in axes))
            rep = n_w / np.prod([shape[a] for a in s_axes])
            E = D.mean(axis=0)
            G = {g: D[group_of == g].mean(axis=0) for g in groups}
            ss_s = rep * n_s * float(np.sum(E ** 2))
            ss_sb = rep * sum(sizes[g] * float(np.sum((G[g] - E) ** 2)) for g in groups)
            ss_err = rep * sum(float(np.sum((D[i] - G[group_of[i]]) ** 2)) for i in range(n_s))
            df_s = int(np.prod([shape[a] - 1 for a in s_axes]))
            df_err = (n_s - n_b) * df_s
            name = "*".join(within[i] for i in S)
            rows.append(_row(name, ss_s, df_s, ss_err, df_err, scale))
            rows.append(_row(f"{name}*{between}", ss_sb, (n_b - 1) * df_s, ss_err, df_err, scale))
    return AnovaResult(rows)
