import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hbpe import (
    FirstStageVocab,
    HbpeError,
    length_quantile,
    load_gpt2,
    load_internal,
    max_token_length,
    save_gpt2,
    save_internal,
    token_length_histogram,
    train_bpe,
)

import oracles


class TestTrain:
    def test_abababab_single_merge(self):
        vocab = train_bpe(b"abababab", 258)
        # brute force confirms (a, b) is the unique most frequent pair
        _, ref_merges = oracles.naive_train_bpe(b"abababab", 258)
        assert ref_merges[0][:2] == (ord("a"), ord("b"))
        assert vocab.merges == ref_merges
        assert vocab.token_bytes[256] == b"ab"
        assert vocab.vocab_size == 258

    def test_single_byte_corpus_no_merges(self):
        vocab = train_bpe(b"z", 257)
        assert vocab.merges == []
        assert vocab.vocab_size == 256

    def test_whitespace_pretokenize_never_crosses_boundary(self):
        vocab = train_bpe(b"aa bb", 259, pretokenize="whitespace")
        pairs = {(l, r) for l, r, _ in vocab.merges}
        assert (ord("a"), ord("a")) in pairs
        assert (ord("b"), ord("b")) in pairs
        assert (ord("a"), ord(" ")) not in pairs
        assert (ord(" "), ord("b")) not in pairs
        # cross-boundary pairs have count zero by construction: enumerate
        segs = oracles.naive_segments(b"aa bb", "whitespace")
        seen = set()
        for seg in segs:
            seen.update(zip(seg, seg[1:]))
        assert (ord("a"), ord(" ")) not in seen
        assert (ord(" "), ord("b")) not in seen

    def test_empty_corpus_rejected(self):
        with pytest.raises(HbpeError) as err:
            train_bpe(b"", 300)
        assert err.value.code == "stage1.empty_corpus"

    def test_small_target_rejected(self):
        with pytest.raises(HbpeError) as err:
            train_bpe(b"abc", 256)
        assert err.value.code == "stage1.vocab_size_too_small"

    @pytest.mark.parametrize("pretokenize", ["none", "whitespace"])
    @pytest.mark.parametrize("seed", range(6))
    def test_matches_naive_trainer(self, seed, pretokenize):
        rng = random.Random(seed)
        alphabet = b"abcd \n"
        corpus = bytes(rng.choice(alphabet) for _ in range(rng.randint(1, 200)))
        target = rng.randint(257, 300)
        vocab = train_bpe(corpus, target, pretokenize)
        ref_bytes, ref_merges = oracles.naive_train_bpe(corpus, target, pretokenize)
        assert vocab.merges == ref_merges
        assert vocab.token_bytes == ref_bytes


class TestEncodeDecode:
    def test_empty_input(self):
        vocab = train_bpe(b"abababab", 258)
        assert vocab.encode(b"") == []
        assert vocab.decode([]) == b""

    def test_single_byte_untrained(self):
        vocab = train_bpe(b"q", 257)
        for b in (0, 65, 255):
            assert vocab.encode(bytes([b])) == [b]

    def test_abab_two_tokens(self):
        # one merge: (a, b) -> 256
        vocab = train_bpe(b"abababab", 257)
        assert vocab.merges == [(ord("a"), ord("b"), 256)]
        ids = vocab.encode(b"abab")
        assert ids == [256, 256]
        assert ids == oracles.naive_encode(b"abab", vocab.merges)

    def test_decode_out_of_range(self):
        vocab = train_bpe(b"z", 257)  # no pairs, so no merges
        with pytest.raises(HbpeError) as err:
            vocab.decode([256])
        assert err.value.code == "stage1.bad_token_id"

    @pytest.mark.parametrize("seed", range(8))
    def test_encode_matches_exhaustive_replay(self, seed):
        rng = random.Random(1000 + seed)
        corpus = bytes(rng.choice(b"aabbc d") for _ in range(200))
        vocab = train_bpe(corpus, rng.randint(258, 300))
        data = bytes(rng.choice(b"aabbc de") for _ in range(rng.randint(0, 200)))
        assert vocab.encode(data) == oracles.naive_encode(data, vocab.merges)

    @given(data=st.binary(max_size=2000))
    @settings(max_examples=150, deadline=None)
    def test_roundtrip_random_bytes(self, data):
        vocab = _shared_trained_vocab()
        assert vocab.decode(vocab.encode(data)) == data

    @given(text=st.text(max_size=500))
    @settings(max_examples=100, deadline=None)
    def test_roundtrip_utf8(self, text):
        vocab = _shared_trained_vocab()
        data = text.encode("utf-8")
        assert vocab.decode(vocab.encode(data)) == data

    def test_roundtrip_adversarial_bytes(self):
        vocab = _shared_trained_vocab()
        for data in (b"\x00\xff" * 100, b"\x00", b"\xff", bytes(range(256)) * 3):
            assert vocab.decode(vocab.encode(data)) == data

    def test_roundtrip_mixed_chinese_english(self):
        vocab = _shared_trained_vocab()
        data = "测试 text 混合 tokens 完全无损。".encode("utf-8") * 20
        assert vocab.decode(vocab.encode(data)) == data

    def test_encode_deterministic(self):
        vocab = _shared_trained_vocab()
        data = b"the quick brown fox " * 30
        assert vocab.encode(data) == vocab.encode(data)


_VOCAB_CACHE: dict[str, FirstStageVocab] = {}


def _shared_trained_vocab() -> FirstStageVocab:
    if "v" not in _VOCAB_CACHE:
        corpus = (b"the quick brown fox jumps over the lazy dog \xc3\xa9\xc3\xa9 "
                  b"hello world \x00\xff binary bits ") * 40
        _VOCAB_CACHE["v"] = train_bpe(corpus, 320, pretokenize="whitespace")
    return _VOCAB_CACHE["v"]


class TestHistogram:
    def test_untrained_vocab_all_length_one(self):
        vocab = train_bpe(b"q", 257)
        assert token_length_histogram(vocab) == {1: 256}

    def test_trained_example(self):
        vocab = train_bpe(b"abababab", 257)
        assert token_length_histogram(vocab) == {1: 256, 2: 1}

    def test_counts_sum_to_vocab_size(self):
        vocab = _shared_trained_vocab()
        hist = token_length_histogram(vocab)
        assert sum(hist.values()) == vocab.vocab_size
        assert max(hist) == max_token_length(vocab)

    def test_quantiles(self):
        hist = {1: 256, 2: 1}
        assert length_quantile(hist, 0.5) == 1
        assert length_quantile(hist, 1.0) == 2
        with pytest.raises(HbpeError):
            length_quantile(hist, 0.0)


class TestPersistence:
    def test_internal_roundtrip(self, tmp_path):
        vocab = _shared_trained_vocab()
        path = tmp_path / "v.stage1"
        save_internal(vocab, path)
        loaded = load_internal(path)
        assert loaded.merges == vocab.merges
        assert loaded.token_bytes == vocab.token_bytes

    def test_internal_header_checked(self, tmp_path):
        path = tmp_path / "bad.stage1"
        path.write_text("NOPE\n1 2\n")
        with pytest.raises(HbpeError) as err:
            load_internal(path)
        assert err.value.code == "stage1.bad_header"

    def test_internal_bad_line_number_reported(self, tmp_path):
        path = tmp_path / "bad.stage1"
        path.write_text("HBPE-V1 stage1\n97 98\nnot numbers\n")
        with pytest.raises(HbpeError) as err:
            load_internal(path)
        assert err.value.code == "stage1.bad_merge_line"
        assert ":3:" in str(err.value)

    def test_gpt2_roundtrip(self, tmp_path):
        vocab = _shared_trained_vocab()
        vpath, mpath = tmp_path / "vocab.json", tmp_path / "merges.txt"
        save_gpt2(vocab, vpath, mpath)
        loaded = load_gpt2(vpath, mpath)
        assert loaded.token_bytes == vocab.token_bytes
        assert loaded.merges == vocab.merges
