"""Reference times, the eight 256-sample reference frames, and durations."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

from .errors import (DuplicateEntry, FrameOutOfBounds, InvariantViolation,
                     MalformedRow)

FRAME_LENGTH = 256
FRAME_NAMES = (
    "V1_CENTRE",
    "V1_OFFSET",
    "V1_TO_C_TRANSITION",
    "C_ONSET",
    "C_CENTRE",
    "C_OFFSET",
    "V2_ONSET",
    "V2_CENTRE",
)
VOWEL_FRAMES = ("V1_CENTRE", "V1_OFFSET", "V1_TO_C_TRANSITION", "V2_ONSET", "V2_CENTRE")
CONSONANT_FRAMES = ("C_ONSET", "C_CENTRE", "C_OFFSET")
ANNOTATION_HEADER = ["file", "v1_onset", "v1_offset", "v2_onset", "v2_offset"]


@dataclass(frozen=True)
class Annotation:
    """Reference times in samples. C onset/offset coincide with V1 offset/V2 onset."""

    v1_onset: int
    v1_offset: int
    v2_onset: int
    v2_offset: int

    @property
    def c_onset(self) -> int:
        return self.v1_offset

    @property
    def c_offset(self) -> int:
        return self.v2_onset

    def segments(self) -> dict[str, tuple[int, int]]:
        return {"V1": (self.v1_onset, self.v1_offset),
                "C": (self.v1_offset, self.v2_onset),
                "V2": (self.v2_onset, self.v2_offset)}

    def validate(self, signal_len: int | None = None) -> None:
        t = (self.v1_onset, self.v1_offset, self.v2_onset, self.v2_offset)
        if not (0 <= t[0] < t[1] < t[2] < t[3]):
            raise InvariantViolation(f"reference times not strictly increasing from 0: {t}")
        if signal_len is not None and t[3] > signal_len:
            raise InvariantViolation(f"v2_offset {t[3]} beyond signal length {signal_len}")

    def short_segments(self, min_len: int = FRAME_LENGTH) -> list[str]:
        """Names of segments shorter than one reference frame."""
        return [name for name, (a, b) in self.segments().items() if b - a < min_len]

    def shifted(self, k: int) -> "Annotation":
        return Annotation(self.v1_onset + k, self.v1_offset + k, self.v2_onset + k, self.v2_offset + k)


class Frame(NamedTuple):
    start: int
    length: int = FRAME_LENGTH

    @property
    def stop(self) -> int:
        return self.start + self.length

    @property
    def slice(self) -> slice:
        return slice(self.start, self.stop)


FrameSet = dict  # frame name -> Frame, ordered as FRAME_NAMES


def reference_frames(ann: Annotation, signal_len: int, length: int = FRAME_LENGTH) -> FrameSet:
    """Position the eight reference frames.

    Centred frames start at ``floor(centre) - length // 2``.
    """
    half = length // 2

    def centred(c2):  # c2 is twice the centre, keeps the floor exact for odd sums
        return Frame(c2 // 2 - half, length)

    frames = {
        "V1_CENTRE": centred(ann.v1_onset + ann.v1_offset),
        "V1_OFFSET": Frame(ann.v1_offset - length, length),
        "V1_TO_C_TRANSITION": Frame(ann.v1_offset - half, length),
        "C_ONSET": Frame(ann.v1_offset, length),
        "C_CENTRE": centred(ann.v1_offset + ann.v2_onset),
        "C_OFFSET": Frame(ann.v2_onset - length, length),
        "V2_ONSET": Frame(ann.v2_onset, length),
        "V2_CENTRE": centred(ann.v2_onset + ann.v2_offset),
    }
    # frames anchored on a reference time are checked before centred ones, so a
    # too-short segment is reported by its edge frame
    for name in sorted(FRAME_NAMES, key=lambda n: n.endswith("CENTRE")):
        f = frames[name]
        if f.start < 0 or f.stop > signal_len:
            raise FrameOutOfBounds(name, f.start, f.stop, signal_len)
    return frames


@dataclass(frozen=True)
class TimeParams:
    v1d: float
    cd: float
    v2d: float
    utd: float

    @property
    def cd_over_v1d(self) -> float:
        return self.cd / self.v1d

    @classmethod
    def from_durations(cls, v1d, cd, v2d):
        return cls(float(v1d), float(cd), float(v2d), float(v1d) + float(cd) + float(v2d))

    def as_dict(self) -> dict[str, float]:
        return {"v1d": self.v1d, "cd": self.cd, "v2d": self.v2d, "utd": self.utd,
                "cd_over_v1d": self.cd_over_v1d}


def time_params(ann: Annotation, sample_rate: float) -> TimeParams:
    """Durations in ms; utd is taken from the integer span so it equals the sum exactly."""
    ann.validate()

    def ms(n):
        return n * 1000.0 / sample_rate

    return TimeParams(
        v1d=ms(ann.v1_offset - ann.v1_onset),
        cd=ms(ann.v2_onset - ann.v1_offset),
        v2d=ms(ann.v2_offset - ann.v2_onset),
        utd=ms(ann.v2_offset - ann.v1_onset),
    )


def load_annotations(path) -> dict[str, Annotation]:
    out: dict[str, Annotation] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ANNOTATION_HEADER:
            raise MalformedRow(1, f"expected header {','.join(ANNOTATION_HEADER)}")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 5:
                raise MalformedRow(lineno, f"expected 5 fields, got {len(row)}")
            name = row[0].strip()
            try:
                times = [int(c) for c in row[1:]]
            except ValueError:
                raise MalformedRow(lineno, "reference times must be integers") from None
            if not name:
                raise MalformedRow(lineno, "empty file name")
            if name in out:
                raise DuplicateEntry(f"line {lineno}: duplicate entry for {name}")
            ann = Annotation(*times)
            try:
                ann.validate()
            except InvariantViolation as exc:
                raise InvariantViolation(f"{name}: {exc}") from None
            out[name] = ann
    return out


def save_annotations(annotations: dict[str, Annotation], path) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(ANNOTATION_HEADER)
        for name in sorted(annotations):
            a = annotations[name]
            w.writerow([name, a.v1_onset, a.v1_offset, a.v2_onset, a.v2_offset])
