"""Log-energy parameters over segments and reference frames.

All values are ``10 * log10`` of sums of squared normalized samples. A
silent segment is reported as ``-inf`` (SILENT); a frame that could not be
placed is reported as None.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, fields

import numpy as np

from .errors import EmptyInterval, SilentSegment
from .segmentation import Annotation, Frame

SILENT = float("-inf")
INT16_OFFSET_DB = 20 * math.log10(32768.0)  # int16-scale level minus normalized level


def _sum_squares(x) -> float:
    x = np.asarray(x, dtype=np.float64)
    return float(np.dot(x, x))


def segment_energy(signal, start: int, stop: int) -> tuple[float, float]:
    """(10 log10 E, 10 log10 E/N) for the half-open interval [start, stop)."""
    x = np.asarray(signal, dtype=np.float64)
    if not 0 <= start < stop <= x.size:
        raise EmptyInterval(f"interval [{start}, {stop}) empty or outside signal of {x.size}")
    e = _sum_squares(x[start:stop])
    if e == 0.0:
        raise SilentSegment(f"[{start}, {stop}) is silent")
    return 10 * math.log10(e), 10 * math.log10(e / (stop - start))


def frame_energy(signal, frame: Frame) -> float:
    """10 log10 of the raw (un-windowed) frame energy."""
    x = np.asarray(signal, dtype=np.float64)
    if frame.start < 0 or frame.stop > x.size:
        raise EmptyInterval(f"frame {frame} outside signal of {x.size}")
    e = _sum_squares(x[frame.slice])
    if e == 0.0:
        raise SilentSegment(f"frame at {frame.start} is silent")
    return 10 * math.log10(e)


@dataclass(frozen=True)
class EnergyParams:
    e_tot_v1: float
    p_v1: float
    e_tot_c: float
    p_c: float
    e_i_v1cent: float | None
    e_i_v1_c: float | None
    e_i_ccent: float | None
    e_i_coff: float | None

    def as_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def shifted(self, db: float) -> "EnergyParams":
        return EnergyParams(**{k: (None if v is None else v + db) for k, v in self.as_dict().items()})


def energy_params(signal, ann: Annotation, frames=None) -> EnergyParams:
    """Segment energies always; frame energies only when ``frames`` is given."""

    def seg(a, b):
        try:
            return segment_energy(signal, a, b)
        except SilentSegment:
            return SILENT, SILENT

    def inst(name):
        if frames is None:
            return None
        try:
            return frame_energy(signal, frames[name])
        except SilentSegment:
            return SILENT

    e_v1, p_v1 = seg(ann.v1_onset, ann.v1_offset)
    e_c, p_c = seg(ann.v1_offset, ann.v2_onset)
    return EnergyParams(
        e_tot_v1=e_v1, p_v1=p_v1, e_tot_c=e_c, p_c=p_c,
        e_i_v1cent=inst("V1_CENTRE"),
        e_i_v1_c=inst("V1_TO_C_TRANSITION"),
        e_i_ccent=inst("C_CENTRE"),
        e_i_coff=inst("C_OFFSET"),
    )
