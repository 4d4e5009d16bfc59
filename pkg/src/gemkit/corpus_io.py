"""Corpus discovery, token-name parsing and 16-bit PCM WAV I/O.

Files follow ``<root>/<Family>/<Speaker>/<WORD><R><SPK>.wav``, e.g.
``Nasals/MS3/ANNA2MS3.wav``.
"""
from __future__ import annotations

import logging
import re
import struct
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (EmptyCorpus, MalformedName, MissingRoot, NotWav,
                     TruncatedFile, UnknownWord, UnsupportedEncoding)

log = logging.getLogger(__name__)

SPEAKERS = ("FS1", "FS2", "FS3", "MS1", "MS2", "MS3")
VOWELS = ("a", "i", "u")
FORMS = ("singleton", "geminate")
FAMILIES = {"nasals": ("m", "n"), "liquids": ("l", "r")}
FAMILY_DIRS = {"nasals": "Nasals", "liquids": "Liquids"}
EXPECTED_RATE = 10000
FULL_SCALE = 32768.0


def make_word(consonant: str, vowel: str, form: str) -> str:
    c = consonant * 2 if form == "geminate" else consonant
    return f"{vowel}{c}{vowel}"


# word -> (consonant, vowel, form, family)
INVENTORY = {
    make_word(c, v, f): (c, v, f, fam)
    for fam, cons in FAMILIES.items()
    for c in cons
    for v in VOWELS
    for f in FORMS
}


@dataclass(frozen=True, order=True)
class TokenMeta:
    word: str
    speaker: str
    repetition: int
    consonant: str = field(init=False, compare=False)
    vowel: str = field(init=False, compare=False)
    form: str = field(init=False, compare=False)
    gender: str = field(init=False, compare=False)
    family: str = field(init=False, compare=False)

    def __post_init__(self):
        if self.word not in INVENTORY:
            raise UnknownWord(self.word, self.repetition, self.speaker)
        if self.speaker not in SPEAKERS:
            raise MalformedName(f"unknown speaker {self.speaker!r}")
        if not 1 <= self.repetition <= 3:
            raise MalformedName(f"repetition {self.repetition} outside 1..3")
        consonant, vowel, form, family = INVENTORY[self.word]
        object.__setattr__(self, "consonant", consonant)
        object.__setattr__(self, "vowel", vowel)
        object.__setattr__(self, "form", form)
        object.__setattr__(self, "family", family)
        object.__setattr__(self, "gender", "female" if self.speaker.startswith("F") else "male")

    @property
    def filename(self) -> str:
        return format_token_name(self)


_NAME_RE = re.compile(r"^([a-z]+?)([0-9]*)((?:fs|ms)[0-9])\.wav$", re.IGNORECASE)


def format_token_name(meta: TokenMeta) -> str:
    return f"{meta.word.upper()}{meta.repetition}{meta.speaker}.wav"


def _split_roman(prefix: str) -> tuple[str, int]:
    # "IFFII" is ambiguous: prefer an inventory word, then a symmetric V...V word.
    splits = [(prefix[:-k], k) for k in (1, 2, 3)
              if len(prefix) > k and prefix.endswith("i" * k)]
    for test in (lambda w: w in INVENTORY, lambda w: w[0] == w[-1]):
        for word, rep in splits:
            if test(word):
                return word, rep
    raise MalformedName(f"cannot split repetition from {prefix.upper()!r}")


def parse_token_name(filename: str) -> TokenMeta:
    """Parse ``<WORD><R><SPK>.wav`` (case-insensitive) into a TokenMeta.

    The repetition may be a digit (``ANNA2MS3.wav``) or a Roman numeral
    (``IFFIIFS1.wav`` is word "iffi", repetition 1).
    """
    name = Path(filename).name
    m = _NAME_RE.match(name)
    if m is None:
        raise MalformedName(f"{name!r} does not match <WORD><R><SPK>.wav")
    prefix, digits, speaker = m.group(1).lower(), m.group(2), m.group(3).upper()
    if speaker not in SPEAKERS:
        raise MalformedName(f"{name!r}: unknown speaker code {speaker}")
    if digits:
        word, rep = prefix, int(digits)
    else:
        word, rep = _split_roman(prefix)
    if not 1 <= rep <= 3:
        raise MalformedName(f"{name!r}: repetition {rep} outside 1..3")
    if word not in INVENTORY:
        raise UnknownWord(word, rep, speaker)
    return TokenMeta(word, speaker, rep)


@dataclass
class ScanResult:
    tokens: list[tuple[TokenMeta, Path]]
    warnings: list[str]

    def __iter__(self):
        return iter(self.tokens)

    def __len__(self):
        return len(self.tokens)


def scan_corpus(root, families=("nasals", "liquids")) -> ScanResult:
    """List tokens under ``<root>/<Family>/<Speaker>/`` in sorted order.

    Missing speaker folders and unparseable or out-of-scope file names are
    recorded in ``warnings`` instead of aborting the scan.
    """
    root = Path(root)
    if not root.is_dir():
        raise MissingRoot(f"corpus root {root} does not exist")
    tokens, notes = [], []
    for family in sorted(families):
        if family not in FAMILY_DIRS:
            raise ValueError(f"unknown family {family!r}")
        fam_dir = root / FAMILY_DIRS[family]
        for speaker in SPEAKERS:
            spk_dir = fam_dir / speaker
            if not spk_dir.is_dir():
                notes.append(f"missing speaker folder: {spk_dir}")
                continue
            for path in sorted(spk_dir.iterdir()):
                if path.suffix.lower() != ".wav":
                    continue
                try:
                    meta = parse_token_name(path.name)
                except MalformedName as exc:
                    notes.append(f"skipped {path}: {exc}")
                    continue
                if meta.family != family or meta.speaker != speaker:
                    notes.append(f"skipped {path}: token belongs to {meta.family}/{meta.speaker}")
                    continue
                tokens.append((meta, path))
    for note in notes:
        log.warning(note)
    if not tokens:
        raise EmptyCorpus(f"no tokens found under {root}")
    return ScanResult(tokens, notes)


class SampleRateWarning(UserWarning):
    pass


@dataclass
class SignalBuffer:
    """Mono signal normalized to [-1, 1) (int16 / 32768)."""

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")
        if self.samples.ndim != 1 or self.samples.size == 0:
            raise ValueError("signal must be a non-empty 1-D array")

    def __len__(self):
        return self.samples.size

    @classmethod
    def from_int16(cls, data, sample_rate):
        return cls(np.asarray(data, dtype=np.int16) / FULL_SCALE, sample_rate)

    def to_int16(self) -> np.ndarray:
        q = np.round(self.samples * FULL_SCALE)
        return np.clip(q, -32768, 32767).astype(np.int16)


def load_wav(path, expected_rate: int | None = EXPECTED_RATE) -> SignalBuffer:
    """Read a RIFF/WAVE 16-bit mono PCM file.

    Chunks other than ``fmt `` and ``data`` are skipped. A sample rate that
    differs from ``expected_rate`` only triggers a SampleRateWarning.
    """
    raw = Path(path).read_bytes()
    if len(raw) < 12 or raw[:4] != b"RIFF" or raw[8:12] != b"WAVE":
        raise NotWav(f"{path}: missing RIFF/WAVE header")
    pos, fmt, data = 12, None, None
    while pos + 8 <= len(raw):
        cid, size = struct.unpack_from("<4sI", raw, pos)
        body = pos + 8
        if cid == b"fmt ":
            if size < 16 or body + 16 > len(raw):
                raise TruncatedFile(f"{path}: fmt chunk truncated")
            fmt = struct.unpack_from("<HHIIHH", raw, body)
        elif cid == b"data":
            if body + size > len(raw):
                raise TruncatedFile(f"{path}: data chunk declares {size} bytes, "
                                    f"{len(raw) - body} present")
            data = raw[body:body + size]
            break
        pos = body + size + (size & 1)
    if fmt is None:
        raise NotWav(f"{path}: no fmt chunk")
    if data is None:
        if pos < len(raw):
            raise TruncatedFile(f"{path}: chunk header truncated")
        raise NotWav(f"{path}: no data chunk")
    audio_format, channels, rate, _, _, bits = fmt
    if audio_format != 1:
        raise UnsupportedEncoding(f"{path}: format tag {audio_format} is not PCM")
    if channels != 1:
        raise UnsupportedEncoding(f"{path}: {channels} channels, expected mono")
    if bits != 16:
        raise UnsupportedEncoding(f"{path}: {bits}-bit samples, expected 16")
    if len(data) % 2:
        raise TruncatedFile(f"{path}: odd number of data bytes")
    if not data:
        raise TruncatedFile(f"{path}: empty data chunk")
    if expected_rate is not None and rate != expected_rate:
        warnings.warn(f"{path}: sample rate {rate} Hz, expected {expected_rate} Hz",
                      SampleRateWarning, stacklevel=2)
    return SignalBuffer.from_int16(np.frombuffer(data, dtype="<i2"), rate)


def save_wav(buf: SignalBuffer, path) -> None:
    pcm = buf.to_int16().astype("<i2").tobytes()
    rate = int(buf.sample_rate)
    header = b"RIFF" + struct.pack("<I", 36 + len(pcm)) + b"WAVE"
    header += b"fmt " + struct.pack("<IHHIIHH", 16, 1, 1, rate, rate * 2, 2, 16)
    header += b"data" + struct.pack("<I", len(pcm))
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_bytes(header + pcm)
