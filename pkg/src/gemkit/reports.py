"""Report tables built from a ParameterRecord frame.

Every builder consumes the DataFrame returned by ``records.read_records`` and
returns a long-format DataFrame; nothing here touches audio. Rows come out in
a fixed order so repeated runs serialize identically.
"""
from __future__ import annotations

import logging

import numpy as np
import pandas as pd

from .classify import (GEMINATE, SINGLETON, error_curve, error_rate, fit_gaussian,
                       heuristic_threshold, pep_threshold, threshold_errors)
from .errors import DataError, InsufficientData
from .records import ENERGY_COLUMNS, SPECTRAL_COLUMNS
from .stats import anova_factorial, anova_oneway, anova_repeated, pearson, spearman

log = logging.getLogger(__name__)

DURATIONS = ["v1d", "cd", "v2d", "utd"]
SUMMARY_PARAMS = DURATIONS + ["cd_over_v1d"]
FORM_ORDER = (SINGLETON, GEMINATE)
GROUPS = ("combined", "male", "female")
ANOVA_COLUMNS = ["effect", "F", "df_num", "df_den", "p", "significant"]


def family_subset(df: pd.DataFrame, family: str) -> pd.DataFrame:
    sub = df[df["family"] == family]
    if sub.empty:
        raise InsufficientData(f"no records for family {family!r}")
    return sub


def group_subset(df: pd.DataFrame, group: str) -> pd.DataFrame:
    if group == "combined":
        return df
    if group not in ("male", "female"):
        raise ValueError(f"unknown group {group!r}")
    return df[df["gender"] == group]


def summary_table(df: pd.DataFrame) -> pd.DataFrame:
    """Mean and StD of the time parameters per form, one row per statistic."""
    rows = []
    for form in FORM_ORDER:
        sub = df[df["form"] == form]
        if len(sub) < 2:
            raise InsufficientData(f"summary needs >= 2 {form} records, got {len(sub)}")
        rows.append({"form": form, "statistic": "mean", **sub[SUMMARY_PARAMS].mean().to_dict()})
        rows.append({"form": form, "statistic": "std", **sub[SUMMARY_PARAMS].std(ddof=1).to_dict()})
    return pd.DataFrame(rows, columns=["form", "statistic"] + SUMMARY_PARAMS)


def summary_long(summary: pd.DataFrame) -> pd.DataFrame:
    """Reshape ``summary_table`` output to (parameter, form, mean, std) for plotting."""
    out = []
    for form in FORM_ORDER:
        s = summary[summary["form"] == form].set_index("statistic")
        for p in DURATIONS:
            out.append({"parameter": p, "form": form, "mean": s.loc["mean", p], "std": s.loc["std", p]})
    return pd.DataFrame(out)


def word_summary(df: pd.DataFrame) -> pd.DataFrame:
    """Per-word mean and StD of the four durations."""
    g = df.groupby("word", sort=True)[DURATIONS]
    mean, std = g.mean(), g.std(ddof=1)
    out = pd.DataFrame(index=mean.index)
    for p in DURATIONS:
        out[f"{p}_mean"] = mean[p]
        out[f"{p}_std"] = std[p]
    out.insert(0, "n", g.size())
    return out.reset_index()


def correlation_table(df: pd.DataFrame, kind: str = "spearman") -> pd.DataFrame:
    """Pairwise correlations of the durations within singleton, geminate and combined sets."""
    fn = {"spearman": spearman, "pearson": pearson}[kind]
    rows = []
    for subset in FORM_ORDER + ("combined",):
        sub = df if subset == "combined" else df[df["form"] == subset]
        for i, a in enumerate(DURATIONS):
            for b in DURATIONS[i + 1:]:
                try:
                    r = fn(sub[a].to_numpy(), sub[b].to_numpy())
                except (DataError, ValueError) as exc:
                    log.warning("%s %s %s-%s skipped: %s", kind, subset, a, b, exc)
                    continue
                rows.append({"subset": subset, "x": a, "y": b, "coefficient": r.coefficient,
                             "p": r.p_value, "n": r.n, "significant": r.significant})
    return pd.DataFrame(rows, columns=["subset", "x", "y", "coefficient", "p", "n", "significant"])


def oneway_table(df: pd.DataFrame) -> pd.DataFrame:
    """Form as the single fixed factor, per consonant x vowel cell and duration."""
    rows = []
    for (cons, vowel), cell in df.groupby(["consonant", "vowel"], sort=True):
        for p in DURATIONS:
            groups = [cell.loc[cell["form"] == f, p].dropna().to_numpy() for f in FORM_ORDER]
            try:
                row = anova_oneway(*groups).rows[0]
            except (DataError, ValueError) as exc:
                log.warning("one-way %s%s %s skipped: %s", cons, vowel, p, exc)
                continue
            rows.append({"consonant": cons, "vowel": vowel, "parameter": p, "F": row.F,
                         "df_num": row.df_num, "df_den": row.df_den, "p": row.p,
                         "significant": row.significant})
    return pd.DataFrame(rows, columns=["consonant", "vowel", "parameter"] + ANOVA_COLUMNS[1:])


def _factorial_rows(df, responses, factors, extra):
    rows = []
    for resp in responses:
        sub = df.copy()
        sub[resp] = sub[resp].where(np.isfinite(sub[resp].astype(float)))
        if sub[resp].isna().all():
            continue  # not measured for this family (e.g. nasal consonant formants)
        try:
            res = anova_factorial(sub, resp, factors)
        except DataError as exc:
            log.warning("factorial %s skipped: %s", resp, exc)
            continue
        for r in res:
            rows.append({**extra, "parameter": resp, "effect": r.effect, "F": r.F,
                         "df_num": r.df_num, "df_den": r.df_den, "p": r.p,
                         "significant": r.significant})
    return rows


def factorial_frequency_table(df: pd.DataFrame) -> pd.DataFrame:
    """Form, Vowel and Consonant main effects on every frequency column, per gender."""
    data = df.rename(columns={"form": "Form", "vowel": "Vowel", "consonant": "Consonant"})
    rows = []
    for gender in ("female", "male"):
        sub = data[data["gender"] == gender]
        if sub.empty:
            continue
        rows += _factorial_rows(sub, SPECTRAL_COLUMNS, ["Form", "Vowel", "Consonant"],
                                {"gender": gender})
    return pd.DataFrame(rows, columns=["gender", "parameter"] + ANOVA_COLUMNS)


def factorial_energy_table(df: pd.DataFrame) -> pd.DataFrame:
    """Form, Vowel, Consonant and Gender main effects on the energy columns."""
    data = df.rename(columns={"form": "Form", "vowel": "Vowel", "consonant": "Consonant",
                              "gender": "Gender"})
    rows = _factorial_rows(data, ENERGY_COLUMNS, ["Form", "Vowel", "Consonant", "Gender"], {})
    return pd.DataFrame(rows, columns=["parameter"] + ANOVA_COLUMNS)


def repeated_table(df: pd.DataFrame) -> pd.DataFrame:
    """Split-plot ANOVA per gender on repetition-averaged durations.

    The subject unit is speaker x form, so Form varies between subjects while
    Vowel and Consonant vary within.
    """
    data = df.rename(columns={"form": "Form", "vowel": "Vowel", "consonant": "Consonant"})
    data = data.assign(subject=data["speaker"] + ":" + data["Form"])
    rows = []
    for gender in ("female", "male"):
        sub = data[data["gender"] == gender]
        if sub.empty:
            continue
        for p in DURATIONS:
            try:
                res = anova_repeated(sub, p, "subject", "Form", ["Vowel", "Consonant"])
            except DataError as exc:
                log.warning("repeated %s %s skipped: %s", gender, p, exc)
                continue
            for r in res:
                rows.append({"gender": gender, "parameter": p, "effect": r.effect, "F": r.F,
                             "df_num": r.df_num, "df_den": r.df_den, "p": r.p,
                             "significant": r.significant})
    return pd.DataFrame(rows, columns=["gender", "parameter"] + ANOVA_COLUMNS)


def parse_features(spec: str) -> list[tuple[str, ...]]:
    """``"v1d,cd,cd+v1d"`` -> [("v1d",), ("cd",), ("cd", "v1d")]."""
    out = []
    for item in spec.split(","):
        item = item.strip()
        if item:
            out.append(tuple(p.strip() for p in item.split("+")))
    if not out:
        raise ValueError("no features given")
    return out


def classification_table(df: pd.DataFrame, feature_sets, protocols, groups) -> pd.DataFrame:
    rows = []
    for group in groups:
        sub = group_subset(df, group)
        for feats in feature_sets:
            for protocol in protocols:
                rep = error_rate(sub, feats, protocol)
                rows.append({"group": group, "features": "+".join(feats), "protocol": protocol,
                             "n": rep.n, "singleton_as_geminate": rep.singleton_as_geminate,
                             "geminate_as_singleton": rep.geminate_as_singleton,
                             "error_percent": rep.error_percent})
    return pd.DataFrame(rows)


def threshold_table(df: pd.DataFrame, groups, feature: str = "cd_over_v1d") -> pd.DataFrame:
    """PEP and heuristic thresholds on one feature, with the error each achieves."""
    rows = []
    for group in groups:
        sub = group_subset(df, group)
        values = sub[feature].to_numpy(dtype=float)
        labels = sub["form"].to_numpy()
        g = labels == GEMINATE
        pep = pep_threshold(fit_gaussian(values[~g]), fit_gaussian(values[g]))
        pep_err = float(threshold_errors(values, g, [pep.threshold])[0])
        heur = heuristic_threshold(values, g)
        rows.append({"group": group, "feature": feature, "method": "pep",
                     "threshold": pep.threshold, "error_percent": pep_err,
                     "interval_lo": np.nan, "interval_hi": np.nan})
        rows.append({"group": group, "feature": feature, "method": "heuristic",
                     "threshold": heur.threshold, "error_percent": heur.error_percent,
                     "interval_lo": heur.optimal_interval[0], "interval_hi": heur.optimal_interval[1]})
    return pd.DataFrame(rows)


def curve_table(df: pd.DataFrame, grid, feature: str = "cd_over_v1d") -> pd.DataFrame:
    curve = error_curve(df[feature].to_numpy(dtype=float), df["form"].to_numpy(), grid)
    return pd.DataFrame(curve, columns=["threshold", "error_percent"])


def near_min_plateau(curve: pd.DataFrame, tolerance: float = 1.0) -> pd.Series:
    """Mask of grid thresholds whose error is within ``tolerance`` points of the minimum."""
    err = curve["error_percent"]
    return err <= err.min() + tolerance + 1e-9
