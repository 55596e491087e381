import json

import pytest

from hbpe import HbpeError, load_gpt2, max_token_length, token_length_histogram


def write_pair(tmp_path, vocab: dict, merge_lines: list[str]):
    vpath = tmp_path / "vocab.json"
    mpath = tmp_path / "merges.txt"
    vpath.write_text(json.dumps(vocab, ensure_ascii=False), encoding="utf-8")
    mpath.write_text("\n".join(merge_lines) + "\n", encoding="utf-8")
    return vpath, mpath


def full_byte_vocab() -> dict:
    # remapped single-byte tokens for ids 0..255, built independently of the
    # implementation: printable ASCII and upper latin stay themselves,
    # everything else shifts into the U+0100.. range in discovery order
    printable = (
        list(range(ord("!"), ord("~") + 1))
        + list(range(0xA1, 0xAC + 1))
        + list(range(0xAE, 0xFF + 1))
    )
    out = {}
    shift = 0
    for b in range(256):
        if b in printable:
            out[chr(b)] = b
        else:
            out[chr(256 + shift)] = b
            shift += 1
    return out


class TestByteRemap:
    def test_g_dot_a_inverts_to_space_a(self, tmp_path):
        vocab = full_byte_vocab()
        vocab["Ġa"] = 256  # "Ġa"
        vpath, mpath = write_pair(tmp_path, vocab, ["#version: 0.2", "Ġ a"])
        loaded = load_gpt2(vpath, mpath)
        assert loaded.token_bytes[256] == b" a"
        assert loaded.token_bytes[256] == bytes([0x20, 0x61])
        assert loaded.merges == [(vocab["Ġ"], ord("a"), 256)]

    def test_unknown_character_rejected(self, tmp_path):
        vocab = full_byte_vocab()
        vocab["あ"] = 256  # outside the remapping
        vpath, mpath = write_pair(tmp_path, vocab, ["#version: 0.2"])
        with pytest.raises(HbpeError) as err:
            load_gpt2(vpath, mpath)
        assert err.value.code == "stage1.bad_vocab_entry"

    def test_malformed_merge_line_names_line(self, tmp_path):
        vocab = full_byte_vocab()
        vpath, mpath = write_pair(
            tmp_path, vocab, ["#version: 0.2", "a b c"]
        )
        with pytest.raises(HbpeError) as err:
            load_gpt2(vpath, mpath)
        assert err.value.code == "stage1.bad_merge_line"
        assert ":2:" in str(err.value)

    def test_unknown_merge_symbol_rejected(self, tmp_path):
        vocab = full_byte_vocab()
        vpath, mpath = write_pair(tmp_path, vocab, ["#version: 0.2", "a b"])
        with pytest.raises(HbpeError) as err:
            load_gpt2(vpath, mpath)
        # "ab" is not in the vocabulary
        assert err.value.code == "stage1.unknown_merge_symbol"
        assert ":2:" in str(err.value)

    def test_duplicate_id_rejected(self, tmp_path):
        vocab = full_byte_vocab()
        vocab["aa"] = 0
        vpath, mpath = write_pair(tmp_path, vocab, ["#version: 0.2"])
        with pytest.raises(HbpeError) as err:
            load_gpt2(vpath, mpath)
        assert err.value.code == "stage1.duplicate_id"


class TestRealGpt2Files:
    def test_vocab_size_and_known_encoding(self, gpt2_paths):
        vocab = load_gpt2(*gpt2_paths)
        assert vocab.vocab_size == 50257
        assert len(vocab.merges) == 50000
        # canonical encoding pins fixture integrity
        assert vocab.encode(b"Hello world") == [15496, 995]
        assert vocab.decode([15496, 995]) == b"Hello world"
        assert vocab.encode(b"This is a test!") == [1212, 318, 257, 1332, 0]

    def test_token_lengths_ground_truth(self, gpt2_paths):
        # The published files' actual maximum token byte length is 128
        # (id 35496). Documented here so any fixture drift is caught.
        vocab = load_gpt2(*gpt2_paths)
        assert max_token_length(vocab) == 128
        assert len(vocab.token_bytes[35496]) == 128
        hist = token_length_histogram(vocab)
        assert sum(hist.values()) == 50257
        short = sum(c for length, c in hist.items() if length < 15)
        assert short / 50257 > 0.5

    def test_roundtrip_with_gpt2_vocab(self, gpt2_paths):
        vocab = load_gpt2(*gpt2_paths)
        data = "Mixed 中文 and English text, plus bytes \x00\xff.".encode(
            "utf-8", errors="surrogateescape"
        )
        assert vocab.decode(vocab.encode(data)) == data
