"""Seeded synthetic data with known ground truth.

Two generators: parameter corpora drawn from the per-word duration moments
shipped in ``data/moments.csv``, and source-filter waveforms (harmonic
impulse train through two-pole resonators) with exact segment boundaries.
"""
from __future__ import annotations

import csv
import math
import zlib
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np
from scipy.signal import lfilter

from .corpus_io import (FAMILIES, FAMILY_DIRS, INVENTORY, SPEAKERS, SignalBuffer,
                        TokenMeta, make_word, save_wav)
from .energy import INT16_OFFSET_DB, EnergyParams
from .errors import BadConfig, BadMoments, SpecOutOfRange
from .records import ParameterRecord, write_records
from .segmentation import (CONSONANT_FRAMES, FRAME_LENGTH, FRAME_NAMES, Annotation,
                           TimeParams, save_annotations, time_params)
from .spectral import FrameSpectrum, lpc_from_resonances

TRUNCATION = 0.2  # durations below this fraction of the mean are redrawn
PARAMS = ("v1d", "cd", "v2d")

# speaker F0 (Hz); gender means sit near the measured V1 centre averages
SPEAKER_F0 = {"FS1": 185.0, "FS2": 195.0, "FS3": 205.0,
              "MS1": 112.0, "MS2": 120.0, "MS3": 128.0}
# V1 CENTRE formants of singleton words containing nasals, by gender and vowel
VOWEL_FORMANTS = {
    "female": {"a": (1000.0, 1488.0, 3064.0), "i": (390.0, 2786.0, 3565.0), "u": (405.0, 705.0, 2913.0)},
    "male": {"a": (835.0, 1329.0, 2571.0), "i": (277.0, 2295.0, 3220.0), "u": (310.0, 594.0, 2415.0)},
}
FORMANT_BANDWIDTHS = (80.0, 100.0, 140.0)
NASAL_MURMUR = ((250.0, 100.0),)
LIQUID_RESONANCES = ((380.0, 120.0), (1250.0, 150.0), (2700.0, 200.0))


@dataclass(frozen=True)
class CellMoments:
    word: str
    v1d: tuple[float, float]
    cd: tuple[float, float]
    v2d: tuple[float, float]
    p_v1: float | None = None  # mean power of V1 on the int16 log scale
    p_c: float | None = None
    flag: str = ""

    def __post_init__(self):
        for name in PARAMS:
            mean, std = getattr(self, name)
            if not (mean > 0 and std >= 0 and math.isfinite(mean) and math.isfinite(std)):
                raise BadMoments(f"{self.word}: {name} moments {mean}, {std}")

    @property
    def utd_mean(self) -> float:
        return self.v1d[0] + self.cd[0] + self.v2d[0]


def _repair_misaligned(row: dict) -> dict:
    # The printed V1d mean of these rows is consistent with Utd = V1d + Cd + V2d
    # only for iri; irri's mean is printed in iri's StD slot and iri's StD in
    # irri's mean slot.
    fixes = {"iri": (191.79, 25.28), "irri": (151.89, 28.17)}
    mean, std = fixes[row["word"]]
    row = dict(row, v1d_mean=mean, v1d_std=std)
    return row


def load_moments(family: str | None = None, repair: bool = True) -> dict[str, CellMoments]:
    """Per-word moments; flagged rows are repaired unless ``repair=False``,
    in which case they are dropped."""
    text = resources.files("gemkit").joinpath("data/moments.csv").read_text(encoding="utf-8")
    out = {}
    for row in csv.DictReader(text.splitlines()):
        if family is not None and row["family"] != family:
            continue
        if row["flag"]:
            if not repair:
                continue
            row = _repair_misaligned(row)
        out[row["word"]] = CellMoments(
            word=row["word"],
            v1d=(float(row["v1d_mean"]), float(row["v1d_std"])),
            cd=(float(row["cd_mean"]), float(row["cd_std"])),
            v2d=(float(row["v2d_mean"]), float(row["v2d_std"])),
            p_v1=float(row["p_v1"]), p_c=float(row["p_c"]), flag=row["flag"],
        )
    return out


def token_rng(seed: int, word: str, index: int) -> np.random.Generator:
    """Generator for one token; independent of generation order."""
    return np.random.default_rng([seed, zlib.crc32(word.encode()), index])


def token_seed(seed: int, word: str, index: int) -> int:
    """Integer seed for a token's waveform noise, distinct from its duration stream."""
    ss = np.random.SeedSequence([seed, zlib.crc32(word.encode()), index, 1])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _truncated_normal(rng, mean, std, floor):
    lo = max(TRUNCATION * mean, floor)
    while True:
        x = rng.normal(mean, std)
        if x >= lo:
            return float(x)


def sample_time_params(cell: CellMoments, rng, min_ms: float = 0.0) -> TimeParams:
    """Independent truncated-Gaussian draws of V1d, Cd, V2d; utd derived.

    ``min_ms`` raises the truncation point, e.g. so every segment can hold a
    reference frame when waveforms are rendered.
    """
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    v1d, cd, v2d = (_truncated_normal(rng, *getattr(cell, p), min_ms) for p in PARAMS)
    return TimeParams.from_durations(v1d, cd, v2d)


def token_meta(word: str, index: int) -> TokenMeta:
    """Round-robin speaker/repetition assignment for the index-th token of a word."""
    return TokenMeta(word, SPEAKERS[index % len(SPEAKERS)], (index // len(SPEAKERS)) % 3 + 1)


def family_words(family: str) -> list[str]:
    return [make_word(c, v, f) for c in FAMILIES[family] for v in "aiu"
            for f in ("singleton", "geminate")]


def generate_param_corpus(moments: dict[str, CellMoments], n: int, seed: int,
                          min_ms: float = 0.0):
    """Balanced corpus: ``n`` (TokenMeta, TimeParams) pairs per word."""
    if n < 1:
        raise ValueError("n must be >= 1")
    out = []
    for word in sorted(moments, key=lambda w: (INVENTORY[w][3], INVENTORY[w][0], INVENTORY[w][1], w)):
        cell = moments[word]
        for i in range(n):
            out.append((token_meta(word, i), sample_time_params(cell, token_rng(seed, word, i), min_ms)))
    return out


@dataclass(frozen=True)
class SynthSpec:
    f0: float
    formants: tuple  # three (frequency, bandwidth) pairs for the vowels
    consonant_model: str  # "nasal_murmur" or "liquid"
    durations_ms: tuple[float, float, float]  # V1, C, V2
    rms: tuple[float, float, float]  # per-segment RMS on the normalized scale
    sample_rate: int = 10000
    seed: int = 0
    consonant_resonances: tuple | None = None
    noise_db: float = -45.0  # aspiration noise relative to the voiced source

    def validate(self):
        if not 60.0 <= self.f0 <= 400.0:
            raise SpecOutOfRange(f"f0 {self.f0} outside 60-400 Hz")
        if self.consonant_model not in ("nasal_murmur", "liquid"):
            raise SpecOutOfRange(f"unknown consonant model {self.consonant_model!r}")
        min_ms = 1000.0 * FRAME_LENGTH / self.sample_rate
        if any(d <= min_ms for d in self.durations_ms):
            raise SpecOutOfRange(f"segment durations must exceed {min_ms} ms")
        if len(self.formants) != 3:
            raise SpecOutOfRange("need three formants")
        nyq = self.sample_rate / 2
        if any(not (0 < f < nyq and bw > 0) for f, bw in self.formants):
            raise SpecOutOfRange(f"formants outside (0, {nyq}) Hz")
        if any(r <= 0 for r in self.rms):
            raise SpecOutOfRange("RMS targets must be positive")


def _glottal_source(n, f0, fs, rng, noise_db):
    t = np.arange(n) / fs
    harmonics = np.arange(1, int((0.95 * fs / 2) // f0) + 1)
    # band-limited impulse train: exact period 1/f0 at any sample rate
    src = np.cos(2 * np.pi * f0 * np.outer(t, harmonics)).sum(axis=1)
    src += rng.standard_normal(n) * np.sqrt(harmonics.size / 2) * 10 ** (noise_db / 20)
    # glottal roll-off (two real poles) and lip radiation (differentiator)
    src = lfilter([1.0], [1.0, -0.9], src)
    src = lfilter([1.0], [1.0, -0.9], src)
    return lfilter([1.0, -1.0], [1.0], src)


def _resonate(src, resonances, fs):
    model = lpc_from_resonances(resonances, fs)
    return lfilter([1.0], model.polynomial, src)


def synth_token_waveform(spec: SynthSpec) -> tuple[SignalBuffer, Annotation]:
    """Render V1-C-V2 with the exact annotation of the segment joins."""
    spec.validate()
    fs = spec.sample_rate
    lengths = [int(round(d * fs / 1000.0)) for d in spec.durations_ms]
    ann = Annotation(0, lengths[0], lengths[0] + lengths[1], sum(lengths))
    rng = np.random.default_rng(spec.seed)
    n = ann.v2_offset
    src = _glottal_source(n, spec.f0, fs, rng, spec.noise_db)
    vowel = _resonate(src, spec.formants, fs)
    if spec.consonant_resonances is not None:
        cons_res = spec.consonant_resonances
    else:
        cons_res = NASAL_MURMUR if spec.consonant_model == "nasal_murmur" else LIQUID_RESONANCES
    consonant = _resonate(src, cons_res, fs)
    out = np.empty(n)
    for (a, b), sig, target in zip(
            [(ann.v1_onset, ann.v1_offset), (ann.v1_offset, ann.v2_onset), (ann.v2_onset, ann.v2_offset)],
            [vowel, consonant, vowel], spec.rms):
        seg = sig[a:b]
        out[a:b] = seg * (target / np.sqrt(np.mean(seg ** 2)))
    if np.max(np.abs(out)) >= 1.0:
        raise SpecOutOfRange("rendered signal clips; lower the RMS plan")
    return SignalBuffer(out, fs), ann


def default_spec(meta: TokenMeta, times: TimeParams, cell: CellMoments | None = None,
                 seed: int = 0) -> SynthSpec:
    """Waveform spec for a token: speaker F0, gender/vowel formants, power plan.

    Power targets come from the cell's mean V1 and C powers shifted from the
    int16 scale to the normalized scale; V2 reuses the V1 level.
    """
    formants = tuple(zip(VOWEL_FORMANTS[meta.gender][meta.vowel], FORMANT_BANDWIDTHS))
    if cell is not None and cell.p_v1 is not None:
        rms_v = 10 ** ((cell.p_v1 - INT16_OFFSET_DB) / 20)
        rms_c = 10 ** ((cell.p_c - INT16_OFFSET_DB) / 20)
    else:
        rms_v, rms_c = 0.1, 0.03
    model = "nasal_murmur" if meta.family == "nasals" else "liquid"
    return SynthSpec(
        f0=SPEAKER_F0[meta.speaker], formants=formants, consonant_model=model,
        durations_ms=(times.v1d, times.cd, times.v2d), rms=(rms_v, rms_c, rms_v),
        seed=seed,
    )


# smallest duration (ms) drawn in waveform mode, so each segment holds a frame
WAVEFORM_MIN_MS = 25.7
MAX_WAVEFORM_N = len(SPEAKERS) * 3  # distinct file names per word


def _truth_spectral(spec: SynthSpec, family: str) -> dict[str, FrameSpectrum]:
    vowel = tuple(f for f, _ in spec.formants)
    if family == "liquids":
        res = spec.consonant_resonances or LIQUID_RESONANCES
        cons = tuple(f for f, _ in res)
    else:
        cons = (None, None, None)
    return {name: FrameSpectrum(spec.f0, *(cons if name in CONSONANT_FRAMES else vowel))
            for name in FRAME_NAMES}


def _truth_energy(spec: SynthSpec, ann: Annotation) -> EnergyParams:
    # per-segment RMS is set exactly, so mean power and total energy are known
    p_v, p_c = (20 * math.log10(r) for r in spec.rms[:2])
    n_v1 = ann.v1_offset - ann.v1_onset
    n_c = ann.v2_onset - ann.v1_offset
    return EnergyParams(p_v + 10 * math.log10(n_v1), p_v, p_c + 10 * math.log10(n_c), p_c,
                        None, None, None, None)


def write_synthetic_corpus(out, families=("nasals",), n: int = 18, seed: int = 0,
                           waveforms: bool = False) -> int:
    """Write a synthetic corpus under ``out``; returns the token count.

    Always writes ``records.csv`` (ground truth, source=synthetic). With
    ``waveforms`` it also renders ``<Family>/<SPK>/<WORD><R><SPK>.wav`` files and
    ``annotations.csv``; ground-truth durations are then the sample-quantized
    segment lengths, so extraction must reproduce them exactly.
    """
    if n < 1:
        raise BadConfig(f"n must be >= 1, got {n}")
    if waveforms and n > MAX_WAVEFORM_N:
        raise BadConfig(f"at most {MAX_WAVEFORM_N} tokens per word have distinct file names")
    unknown = [f for f in families if f not in FAMILIES]
    if unknown:
        raise BadConfig(f"unknown family {unknown}")
    out = Path(out)
    records, annotations = [], {}
    for family in sorted(families):
        moments = load_moments(family)
        min_ms = WAVEFORM_MIN_MS if waveforms else 0.0
        for meta, times in generate_param_corpus(moments, n, seed, min_ms):
            if not waveforms:
                records.append(ParameterRecord(meta, times, source="synthetic"))
                continue
            # waveform mode has n <= 18, where (speaker, repetition) fixes the index
            index = (meta.repetition - 1) * len(SPEAKERS) + SPEAKERS.index(meta.speaker)
            spec = default_spec(meta, times, moments[meta.word], seed=token_seed(seed, meta.word, index))
            buf, ann = synth_token_waveform(spec)
            path = out / FAMILY_DIRS[family] / meta.speaker / meta.filename
            path.parent.mkdir(parents=True, exist_ok=True)
            save_wav(buf, path)
            annotations[meta.filename] = ann
            records.append(ParameterRecord(meta, time_params(ann, spec.sample_rate),
                                           _truth_spectral(spec, family), _truth_energy(spec, ann),
                                           source="synthetic"))
    out.mkdir(parents=True, exist_ok=True)
    if waveforms:
        save_annotations(annotations, out / "annotations.csv")
    return write_records(records, out / "records.csv")
