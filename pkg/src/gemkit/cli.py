"""``gemkit`` command line: scan, extract, stats, classify, synth.

Exit status is 0 on success (skipped tokens included), 1 on usage or
configuration errors and 2 on data errors.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import pandas as pd

from . import plotting, reports
from .classify import PROTOCOLS, make_grid
from .corpus_io import FAMILIES, scan_corpus
from .errors import BadConfig, DataError, GemkitError
from .records import extract_token, read_records, write_records
from .segmentation import load_annotations
from .synth import write_synthetic_corpus

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2
DEFAULT_FEATURES = "v1d,cd,v2d,cd_over_v1d,cd+v1d"
DEFAULT_GRID = "0.2:2.0:0.005"
ANALYSES = ("summary", "corr", "oneway", "factorial", "repeated")

log = logging.getLogger("gemkit")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _families(arg: str) -> list[str]:
    return sorted(FAMILIES) if arg == "all" else [arg]


def _json_default(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    if hasattr(v, "item"):
        return v.item()
    raise TypeError(type(v))


def write_table(df: pd.DataFrame, path: Path, fmt: str) -> Path:
    """Write ``df`` as ``path`` with the suffix of ``fmt``; NaN becomes NA / null."""
    path = Path(path).with_suffix("." + fmt)
    path.parent.mkdir(parents=True, exist_ok=True)
    if fmt == "csv":
        df.to_csv(path, index=False, na_rep="NA", lineterminator="\n")
    else:
        recs = [{k: (None if isinstance(v, float) and math.isnan(v) else v) for k, v in r.items()}
                for r in df.to_dict(orient="records")]
        path.write_text(json.dumps(recs, indent=1, default=_json_default, allow_nan=False) + "\n",
                        encoding="utf-8")
    return path


# ---- scan ----

def cmd_scan(args) -> int:
    # scan_corpus logs its own warnings
    result = scan_corpus(args.corpus, _families(args.family))
    rows = [{"file": m.filename, "word": m.word, "family": m.family, "speaker": m.speaker,
             "repetition": m.repetition, "path": str(p)} for m, p in result.tokens]
    df = pd.DataFrame(rows)
    if args.out:
        write_table(df, Path(args.out), args.format)
    elif args.format == "json":
        print(json.dumps(rows, indent=1))
    else:
        sys.stdout.write(df.to_csv(index=False, lineterminator="\n"))
    print(f"{len(result)} tokens, {len(result.warnings)} warnings", file=sys.stderr)
    return EXIT_OK


# ---- extract ----

def _extract_one(job):
    meta, path, ann = job
    try:
        return extract_token(meta, path, ann), None
    except DataError as exc:
        return None, f"skipped {path.name}: {type(exc).__name__}: {exc}"


def cmd_extract(args) -> int:
    # scan_corpus logs its own warnings
    result = scan_corpus(args.corpus, _families(args.family))
    annotations = load_annotations(args.annotations)
    jobs, skipped = [], 0
    for meta, path in result.tokens:
        ann = annotations.get(path.name)
        if ann is None:
            print(f"skipped {path.name}: no annotation", file=sys.stderr)
            skipped += 1
            continue
        jobs.append((meta, path, ann))
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            outcomes = list(pool.map(_extract_one, jobs, chunksize=8))
    else:
        outcomes = [_extract_one(j) for j in jobs]
    records = []
    for rec, msg in outcomes:
        if rec is None:
            print(msg, file=sys.stderr)
            skipped += 1
        else:
            records.append(rec)
    if not records:
        raise DataError("no extractable tokens")
    n = write_records(records, args.out)
    print(f"extracted {n} tokens, skipped {skipped}", file=sys.stderr)
    return EXIT_OK


# ---- stats ----

def cmd_stats(args) -> int:
    df = read_records(args.records)
    analyses = ANALYSES if args.analysis == "all" else (args.analysis,)
    out = Path(args.out)
    for family in _families(args.family):
        if args.family == "all" and not (df["family"] == family).any():
            continue
        sub = reports.family_subset(df, family)
        fam_out = out / family
        if "summary" in analyses:
            summary = reports.summary_table(sub)
            write_table(summary, fam_out / "summary", args.format)
            write_table(reports.word_summary(sub), fam_out / "word_summary", args.format)
            plotting.plot_summary(reports.summary_long(summary),
                                  fam_out / ("summary.svg" if args.svg else "summary.png"),
                                  title=family)
        if "corr" in analyses:
            write_table(reports.correlation_table(sub, "spearman"), fam_out / "spearman", args.format)
            write_table(reports.correlation_table(sub, "pearson"), fam_out / "pearson", args.format)
        if "oneway" in analyses:
            write_table(reports.oneway_table(sub), fam_out / "oneway", args.format)
        if "factorial" in analyses:
            write_table(reports.factorial_frequency_table(sub), fam_out / "factorial_frequency", args.format)
            write_table(reports.factorial_energy_table(sub), fam_out / "factorial_energy", args.format)
        if "repeated" in analyses:
            write_table(reports.repeated_table(sub), fam_out / "repeated", args.format)
    return EXIT_OK


# ---- classify ----

def parse_grid(text: str):
    try:
        lo, hi, step = (float(x) for x in text.split(":"))
    except ValueError:
        raise UsageError(f"--grid expects lo:hi:step, got {text!r}") from None
    if not (step > 0 and hi >= lo):
        raise UsageError(f"--grid needs step > 0 and hi >= lo, got {text!r}")
    return make_grid(lo, hi, step)


def cmd_classify(args) -> int:
    try:
        feature_sets = reports.parse_features(args.features)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if any(len(f) > 2 for f in feature_sets):
        raise UsageError("feature sets have at most two components")
    grid = parse_grid(args.grid)
    protocols = PROTOCOLS if args.protocol == "both" else (args.protocol,)
    groups = reports.GROUPS if args.group == "all" else (args.group,)
    df = read_records(args.records)
    out = Path(args.out)
    for family in _families(args.family):
        if args.family == "all" and not (df["family"] == family).any():
            continue
        sub = reports.family_subset(df, family)
        fam_out = out / family
        write_table(reports.classification_table(sub, feature_sets, protocols, groups),
                    fam_out / "classification", args.format)
        thresholds = reports.threshold_table(sub, groups)
        write_table(thresholds, fam_out / "thresholds", args.format)
        for group in groups:
            curve = reports.curve_table(reports.group_subset(sub, group), grid)
            write_table(curve, fam_out / f"error_curve_{group}", args.format)
            th = thresholds[thresholds["group"] == group].set_index("method")["threshold"]
            plotting.plot_error_curve(
                list(curve.itertuples(index=False, name=None)),
                fam_out / f"error_curve_{group}.{'svg' if args.svg else 'png'}",
                title=f"{family}, {group}",
                markers={"PEP": float(th["pep"]), "heuristic": float(th["heuristic"])})
    return EXIT_OK


# ---- synth ----

def cmd_synth(args) -> int:
    n = write_synthetic_corpus(args.out, _families(args.family), args.n, args.seed,
                               waveforms=args.waveforms)
    print(f"wrote {n} synthetic tokens to {args.out}", file=sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="gemkit", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    fam = ("nasals", "liquids", "all")

    s = sub.add_parser("scan", help="list corpus tokens")
    s.add_argument("--corpus", required=True)
    s.add_argument("--family", choices=fam, default="all")
    s.add_argument("--out")
    s.add_argument("--format", choices=("csv", "json"), default="csv")
    s.set_defaults(func=cmd_scan)

    s = sub.add_parser("extract", help="measure every annotated token")
    s.add_argument("--corpus", required=True)
    s.add_argument("--annotations", required=True)
    s.add_argument("--family", choices=fam, default="all")
    s.add_argument("--out", required=True, help="ParameterRecord CSV")
    s.add_argument("--jobs", type=int, default=1)
    s.set_defaults(func=cmd_extract)

    s = sub.add_parser("stats", help="correlation, ANOVA and summary tables")
    s.add_argument("--records", required=True)
    s.add_argument("--family", choices=fam, default="all")
    s.add_argument("--analysis", choices=ANALYSES + ("all",), default="all")
    s.add_argument("--out", required=True)
    s.add_argument("--format", choices=("csv", "json"), default="csv")
    s.add_argument("--svg", action="store_true", help="figures as SVG instead of PNG")
    s.set_defaults(func=cmd_stats)

    s = sub.add_parser("classify", help="MLC errors, thresholds and error curves")
    s.add_argument("--records", required=True)
    s.add_argument("--family", choices=fam, default="all")
    s.add_argument("--features", default=DEFAULT_FEATURES,
                   help="comma-separated; join two features with '+' for a 2-D test")
    s.add_argument("--protocol", choices=PROTOCOLS + ("both",), default="resubstitution")
    s.add_argument("--group", choices=reports.GROUPS + ("all",), default="all")
    s.add_argument("--grid", default=DEFAULT_GRID, help="Cd/V1d threshold grid lo:hi:step")
    s.add_argument("--out", required=True)
    s.add_argument("--format", choices=("csv", "json"), default="csv")
    s.add_argument("--svg", action="store_true")
    s.set_defaults(func=cmd_classify)

    s = sub.add_parser("synth", help="seeded synthetic corpus")
    s.add_argument("--family", choices=fam, default="nasals")
    s.add_argument("--n", type=int, default=18, help="tokens per word")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.add_argument("--waveforms", action="store_true")
    s.set_defaults(func=cmd_synth)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, BadConfig) as exc:
        print(f"gemkit: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"gemkit: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (GemkitError, OSError) as exc:
        print(f"gemkit: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
