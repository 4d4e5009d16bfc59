import struct
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gemkit.corpus_io import (INVENTORY, SPEAKERS, SampleRateWarning, SignalBuffer,
                              TokenMeta, format_token_name, load_wav, parse_token_name,
                              save_wav, scan_corpus)
from gemkit.errors import (EmptyCorpus, MalformedName, MissingRoot, NotWav, TruncatedFile,
                           UnknownWord, UnsupportedEncoding)

from conftest import write_tone


def test_parse_geminate_nasal():
    m = parse_token_name("ANNA2MS3.wav")
    assert (m.word, m.consonant, m.vowel, m.form) == ("anna", "n", "a", "geminate")
    assert (m.speaker, m.gender, m.repetition, m.family) == ("MS3", "male", 2, "nasals")


def test_parse_singleton_liquid():
    m = parse_token_name("ALA1FS2.wav")
    assert (m.word, m.consonant, m.form, m.speaker, m.repetition, m.family) == \
        ("ala", "l", "singleton", "FS2", 1, "liquids")
    assert m.gender == "female"


def test_fricative_word_is_out_of_scope():
    with pytest.raises(UnknownWord) as info:
        parse_token_name("IFFIIFS1.wav")
    assert (info.value.word, info.value.repetition, info.value.speaker) == ("iffi", 1, "FS1")


def test_parse_is_case_insensitive():
    assert parse_token_name("anna2ms3.WAV") == parse_token_name("ANNA2MS3.wav")


def test_roman_repetition():
    assert parse_token_name("IMIIIMS1.wav").repetition == 2
    assert parse_token_name("IMIIIMS1.wav").word == "imi"


@pytest.mark.parametrize("name", ["ANNA.wav", "ANNA4MS3.wav", "ANNA0MS3.wav", "ANNA1XS3.wav",
                                  "ANNA1FS7.wav", "ANNA1FS1.txt"])
def test_malformed_names(name):
    with pytest.raises(MalformedName):
        parse_token_name(name)


metas = st.builds(TokenMeta, st.sampled_from(sorted(INVENTORY)), st.sampled_from(SPEAKERS),
                  st.integers(1, 3))


@given(metas)
def test_name_round_trip(meta):
    back = parse_token_name(format_token_name(meta))
    assert back == meta
    assert (back.consonant, back.vowel, back.form, back.gender, back.family) == \
        (meta.consonant, meta.vowel, meta.form, meta.gender, meta.family)


def test_scan_one_speaker_per_family(one_speaker_tree):
    nasals = scan_corpus(one_speaker_tree, ["nasals"])
    assert len(nasals) == 36
    assert len(nasals.warnings) == 5
    both = scan_corpus(one_speaker_tree)
    assert len(both) == 72
    assert len(both.warnings) == 10


def test_scan_is_sorted_and_stable(one_speaker_tree):
    a = [p for _, p in scan_corpus(one_speaker_tree)]
    b = [p for _, p in scan_corpus(one_speaker_tree)]
    assert a == b
    liquids = [p for m, p in scan_corpus(one_speaker_tree) if m.family == "liquids"]
    assert liquids == sorted(liquids)


def test_scan_skips_unknown_words(one_speaker_tree):
    write_tone(one_speaker_tree / "Nasals" / "FS1" / "IFFI1FS1.wav", n=16)
    res = scan_corpus(one_speaker_tree, ["nasals"])
    assert len(res) == 36
    assert any("IFFI1FS1" in w for w in res.warnings)


def test_scan_errors(tmp_path):
    with pytest.raises(MissingRoot):
        scan_corpus(tmp_path / "nope")
    with pytest.raises(EmptyCorpus):
        scan_corpus(tmp_path)


def test_load_one_second(tmp_path):
    buf = load_wav(write_tone(tmp_path / "a.wav", n=10000))
    assert len(buf) == 10000 and buf.sample_rate == 10000


def test_save_load_bit_exact(tmp_path, rng):
    pcm = rng.integers(-32768, 32768, size=777).astype(np.int16)
    save_wav(SignalBuffer.from_int16(pcm, 10000), tmp_path / "x.wav")
    back = load_wav(tmp_path / "x.wav")
    np.testing.assert_array_equal(back.to_int16(), pcm)
    assert back.samples.min() >= -1.0 and back.samples.max() < 1.0


def _wav_bytes(channels=1, bits=16, fmt_tag=1, rate=10000, data=b"\x00\x00" * 8, extra=b""):
    fmt = struct.pack("<HHIIHH", fmt_tag, channels, rate, rate * channels * bits // 8,
                      channels * bits // 8, bits)
    body = b"WAVE" + b"fmt " + struct.pack("<I", 16) + fmt + extra
    body += b"data" + struct.pack("<I", len(data)) + data
    return b"RIFF" + struct.pack("<I", len(body)) + body


def test_stereo_rejected(tmp_path):
    (tmp_path / "s.wav").write_bytes(_wav_bytes(channels=2))
    with pytest.raises(UnsupportedEncoding):
        load_wav(tmp_path / "s.wav")


@pytest.mark.parametrize("kw", [{"bits": 8}, {"fmt_tag": 3}])
def test_other_encodings_rejected(tmp_path, kw):
    (tmp_path / "e.wav").write_bytes(_wav_bytes(**kw))
    with pytest.raises(UnsupportedEncoding):
        load_wav(tmp_path / "e.wav")


def test_truncated_data_chunk(tmp_path):
    raw = write_tone(tmp_path / "t.wav", n=500).read_bytes()
    (tmp_path / "t.wav").write_bytes(raw[:-100])
    with pytest.raises(TruncatedFile):
        load_wav(tmp_path / "t.wav")


def test_not_wav(tmp_path):
    (tmp_path / "n.wav").write_bytes(b"hello world, not audio")
    with pytest.raises(NotWav):
        load_wav(tmp_path / "n.wav")


def test_extra_chunks_are_skipped(tmp_path):
    junk = b"LIST" + struct.pack("<I", 3) + b"abc\x00"
    (tmp_path / "j.wav").write_bytes(_wav_bytes(extra=junk))
    assert len(load_wav(tmp_path / "j.wav")) == 8


def test_rate_mismatch_warns(tmp_path):
    (tmp_path / "r.wav").write_bytes(_wav_bytes(rate=16000))
    with pytest.warns(SampleRateWarning):
        buf = load_wav(tmp_path / "r.wav")
    assert buf.sample_rate == 16000
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        load_wav(tmp_path / "r.wav", expected_rate=None)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(-32768, 32767), min_size=1, max_size=300))
def test_wav_round_trip_property(tmp_path_factory, values):
    path = tmp_path_factory.mktemp("w") / "p.wav"
    pcm = np.array(values, dtype=np.int16)
    save_wav(SignalBuffer.from_int16(pcm, 10000), path)
    np.testing.assert_array_equal(load_wav(path).to_int16(), pcm)
