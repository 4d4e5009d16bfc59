import numpy as np
import pytest

from gemkit.corpus_io import SignalBuffer, TokenMeta, save_wav


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def write_tone(path, n=1000, rate=10000, freq=200.0, amp=0.3):
    t = np.arange(n) / rate
    save_wav(SignalBuffer(amp * np.sin(2 * np.pi * freq * t), rate), path)
    return path


@pytest.fixture
def one_speaker_tree(tmp_path):
    """Nasals and Liquids with only FS1 present, 36 tokens per family."""
    from gemkit.corpus_io import FAMILIES, FAMILY_DIRS, VOWELS, make_word
    for fam, cons in FAMILIES.items():
        for c in cons:
            for v in VOWELS:
                for form in ("singleton", "geminate"):
                    for rep in (1, 2, 3):
                        meta = TokenMeta(make_word(c, v, form), "FS1", rep)
                        write_tone(tmp_path / FAMILY_DIRS[fam] / "FS1" / meta.filename, n=64)
    return tmp_path
