"""ParameterRecord: one row per token, and the per-token extraction pipeline."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path

import pandas as pd

from .corpus_io import TokenMeta, load_wav
from .energy import EnergyParams, energy_params
from .errors import DataError, FrameOutOfBounds
from .segmentation import (FRAME_NAMES, Annotation, TimeParams,
                           reference_frames, time_params)
from .spectral import LPC_ORDER, FrameSpectrum, measure_frames

SCHEMA_LINE = "# gemkit_schema=1"
NA = "NA"
META_COLUMNS = ["file", "word", "consonant", "vowel", "form", "speaker", "gender",
                "repetition", "family", "source"]
TIME_COLUMNS = ["v1d", "cd", "v2d", "utd", "cd_over_v1d"]
SPECTRAL_COLUMNS = [f"{p}_{frame.lower()}" for frame in FRAME_NAMES for p in ("f0", "f1", "f2", "f3")]
ENERGY_COLUMNS = ["e_tot_v1", "p_v1", "e_tot_c", "p_c", "e_i_v1cent", "e_i_v1_c", "e_i_ccent", "e_i_coff"]
COLUMNS = META_COLUMNS + TIME_COLUMNS + SPECTRAL_COLUMNS + ENERGY_COLUMNS + ["flags"]


@dataclass
class ParameterRecord:
    meta: TokenMeta
    time: TimeParams
    spectral: dict[str, FrameSpectrum] | None = None
    energy: EnergyParams | None = None
    source: str = "measured"
    file: str = ""
    flags: list[str] = field(default_factory=list)

    def to_row(self) -> dict[str, object]:
        m = self.meta
        row = {"file": self.file or m.filename, "word": m.word, "consonant": m.consonant,
               "vowel": m.vowel, "form": m.form, "speaker": m.speaker, "gender": m.gender,
               "repetition": m.repetition, "family": m.family, "source": self.source}
        row.update(self.time.as_dict())
        for frame in FRAME_NAMES:
            spec = (self.spectral or {}).get(frame, FrameSpectrum())
            for p in ("f0", "f1", "f2", "f3"):
                row[f"{p}_{frame.lower()}"] = getattr(spec, p)
        energy = self.energy.as_dict() if self.energy is not None else {}
        for col in ENERGY_COLUMNS:
            row[col] = energy.get(col)
        row["flags"] = ";".join(self.flags)
        return row


def format_value(v) -> str:
    if v is None:
        return NA
    if isinstance(v, float):
        if math.isnan(v):
            return NA
        return repr(v)
    return str(v)


def write_records(records, path) -> int:
    buf = io.StringIO()
    buf.write(SCHEMA_LINE + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    n = 0
    for rec in records:
        row = rec.to_row()
        w.writerow([format_value(row[c]) for c in COLUMNS])
        n += 1
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(buf.getvalue(), encoding="utf-8")
    return n


def read_records(path) -> pd.DataFrame:
    """Load a ParameterRecord CSV; NA cells become NaN, silent energies -inf."""
    with open(path, encoding="utf-8") as fh:
        first = fh.readline().rstrip("\n")
    if first != SCHEMA_LINE:
        raise DataError(f"{path}: expected schema line {SCHEMA_LINE!r}, got {first!r}")
    df = pd.read_csv(path, skiprows=1, na_values=[NA], keep_default_na=False,
                     float_precision="round_trip",
                     dtype={c: str for c in META_COLUMNS + ["flags"]})
    missing = [c for c in COLUMNS if c not in df.columns]
    if missing:
        raise DataError(f"{path}: missing columns {missing}")
    df["repetition"] = df["repetition"].astype(int)
    return df


def extract_token(meta: TokenMeta, path, ann: Annotation, order: int = LPC_ORDER,
                  expected_rate: int | None = 10000) -> ParameterRecord:
    """Measure one token. Frame-based values are left unmeasured when a
    segment is shorter than a reference frame."""
    buf = load_wav(path, expected_rate=expected_rate)
    ann.validate(len(buf))
    tp = time_params(ann, buf.sample_rate)
    flags = [f"short_segment:{s}" for s in ann.short_segments()]
    frames = None
    if not flags:
        try:
            frames = reference_frames(ann, len(buf))
        except FrameOutOfBounds as exc:
            flags.append(f"frame_out_of_bounds:{exc.frame}")
    spectral = None
    if frames is not None:
        spectral = measure_frames(buf.samples, frames, buf.sample_rate, meta.family, order=order)
    energy = energy_params(buf.samples, ann, frames)
    return ParameterRecord(meta, tp, spectral, energy, "measured", Path(path).name, flags)
