"""Exception hierarchy shared by every gemkit module."""


class GemkitError(Exception):
    """Base class for all gemkit errors."""


class DataError(GemkitError):
    """Bad or insufficient input data (CLI exit code 2)."""


# corpus_io
class MalformedName(DataError):
    pass


class UnknownWord(MalformedName):
    def __init__(self, word, repetition, speaker):
        self.word = word
        self.repetition = repetition
        self.speaker = speaker
        super().__init__(f"word {word!r} (repetition {repetition}, speaker {speaker}) "
                         "is not a nasal/liquid inventory word")


class MissingRoot(DataError):
    pass


class EmptyCorpus(DataError):
    pass


class WavError(DataError):
    pass


class NotWav(WavError):
    pass


class UnsupportedEncoding(WavError):
    pass


class TruncatedFile(WavError):
    pass


# segmentation
class FrameOutOfBounds(DataError):
    def __init__(self, frame, start, stop, signal_len):
        self.frame = frame
        super().__init__(f"frame {frame} [{start}, {stop}) outside signal of {signal_len} samples")


class MalformedRow(DataError):
    def __init__(self, line, reason=""):
        self.line = line
        super().__init__(f"line {line}: {reason}" if reason else f"line {line}")


class DuplicateEntry(DataError):
    pass


class InvariantViolation(DataError):
    pass


# spectral
class WrongLength(GemkitError):
    pass


class DegenerateFrame(DataError):
    pass


class InsufficientFormants(DataError):
    def __init__(self, found, formants=()):
        self.found = found
        self.formants = tuple(formants)
        super().__init__(f"only {found} formant candidate(s) found")


class RegionTooShort(DataError):
    pass


# energy
class EmptyInterval(DataError):
    pass


class SilentSegment(DataError):
    pass


# stats
class ConstantInput(DataError):
    pass


class UnbalancedDesign(DataError):
    pass


class EmptyCell(DataError):
    pass


class IncompleteGrid(DataError):
    pass


class TooFewSubjects(DataError):
    pass


class InsufficientData(DataError):
    pass


# classify
class DegenerateSample(DataError):
    pass


class DimensionMismatch(GemkitError):
    pass


class NoInteriorRoot(DataError):
    pass


class DegenerateVariance(DataError):
    pass


class MissingFeature(DataError):
    pass


class SingleClassGroup(DataError):
    pass


# synth / cli
class BadMoments(GemkitError):
    pass


class SpecOutOfRange(GemkitError):
    pass


class BadConfig(GemkitError):
    pass
