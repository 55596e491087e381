import random

import pytest

from hbpe import (
    HbpeError,
    MARKER,
    MergeTable,
    PatchTable,
    decode_patch,
    encode_patches,
    load_stage2,
    most_freq_pair,
    pad_patch,
    save_stage2,
    train_hier_bpe,
)

import oracles


def random_token_map(rng: random.Random, n_tokens: int, alphabet: bytes,
                     max_len: int = 12) -> dict[int, bytes]:
    return {
        tid: bytes(rng.choice(alphabet) for _ in range(rng.randint(1, max_len)))
        for tid in range(n_tokens)
    }


class TestWorkedExample:
    def test_this_is_patch(self, toy_vocab):
        table, patches = train_hier_bpe(toy_vocab, 6)
        this_is = next(
            tid for tid, b in toy_vocab.token_bytes.items() if b == b"This is"
        )
        assert patches.patches[this_is] == (84, 104, 257, 32, 257, 256)
        assert table.merges[0] == (ord("i"), ord("s"), 257)

    def test_encode_patches_four_patches(self, toy_vocab):
        table, patches = train_hier_bpe(toy_vocab, 6)
        out = encode_patches(b"This is a test!", toy_vocab, patches)
        assert len(out) == 4
        assert out[0] == (84, 104, 257, 32, 257, 256)
        joined = b"".join(decode_patch(p, table) for p in out)
        assert joined == b"This is a test!"

    def test_decode_worked_patch(self):
        table = MergeTable([(105, 115, 257)])
        assert decode_patch([84, 104, 257, 32, 257, 256], table) == b"This is"


class TestTrain:
    def test_single_short_token_no_merges(self):
        for s in (2, 3, 10):
            table, patches = train_hier_bpe({0: b"a"}, s)
            assert table.merges == []
            assert patches.patches[0] == (97, 256)

    def test_aaaa_aabb_example(self):
        tokens = {0: b"aaaa", 1: b"aabb"}
        table, patches = train_hier_bpe(tokens, 4)
        # oracle: (97,97) occurs 3 + 1 = 4 times (overlapping), merges once
        ref_merges, ref_frozen = oracles.naive_train_hier(tokens, 4)
        assert ref_merges == [(97, 97, 257)]
        assert table.merges == ref_merges
        assert patches.patches[0] == (257, 257, 256) == ref_frozen[0]
        assert patches.patches[1] == (257, 98, 98, 256) == ref_frozen[1]

    def test_s_below_two_rejected(self):
        with pytest.raises(HbpeError) as err:
            train_hier_bpe({0: b"ab"}, 1)
        assert err.value.code == "stage2.bad_patch_size"

    def test_empty_vocab_rejected(self):
        with pytest.raises(HbpeError) as err:
            train_hier_bpe({}, 4)
        assert err.value.code == "stage2.empty_vocab"

    def test_bound_holds_and_terminates(self):
        rng = random.Random(7)
        for s in range(3, 17):
            tokens = random_token_map(rng, 200, b"abcdefgh", max_len=20)
            _, patches = train_hier_bpe(tokens, s)
            assert set(patches.patches) == set(tokens)
            assert all(len(p) <= s for p in patches.patches.values())

    def test_terminates_on_5k_token_vocabulary(self):
        rng = random.Random(31)
        tokens = random_token_map(rng, 5000, b"abcdefgh", max_len=20)
        table, patches = train_hier_bpe(tokens, 4)
        assert len(patches.patches) == 5000
        assert max(len(p) for p in patches.patches.values()) <= 4
        assert table.v_prime == 257 + len(table.merges)

    @pytest.mark.parametrize("seed", range(25))
    def test_matches_naive_reference(self, seed):
        rng = random.Random(seed)
        tokens = random_token_map(
            rng, rng.randint(1, 50), b"abcde", max_len=rng.randint(1, 14)
        )
        s = rng.randint(2, 6)
        table, patches = train_hier_bpe(tokens, s)
        ref_merges, ref_frozen = oracles.naive_train_hier(tokens, s)
        assert table.merges == ref_merges
        assert patches.patches == ref_frozen

    def test_weighted_counting_changes_selection(self):
        # unweighted: both entries count once, (a,a) from the longer token
        # family wins; weighting the bb-token heavily flips the first merge
        tokens = {0: b"aaaaaa", 1: b"bbbbbb"}
        t_plain, _ = train_hier_bpe(tokens, 4)
        assert t_plain.merges[0][:2] == (97, 97)
        t_weighted, _ = train_hier_bpe(tokens, 4, token_weights={0: 1, 1: 10})
        assert t_weighted.merges[0][:2] == (98, 98)

    def test_weighted_zero_weight_tokens_still_compressed(self):
        tokens = {0: b"aaaaaa", 1: b"bbbbbb"}
        _, patches = train_hier_bpe(tokens, 4, token_weights={0: 5})
        assert len(patches.patches[1]) <= 4

    def test_freeze_consistency(self):
        # once frozen, later merges leave a patch untouched and it still
        # decodes to the original bytes
        rng = random.Random(11)
        tokens = random_token_map(rng, 80, b"abcd", max_len=16)
        table, patches = train_hier_bpe(tokens, 5)
        for tid, data in tokens.items():
            patch = patches.patches[tid]
            assert decode_patch(patch, table) == data
            assert oracles.naive_expand_patch(patch, table.merges) == data

    def test_smaller_s_can_produce_a_longer_patch(self):
        # Bounded-patch training is not pointwise monotone in S: with these
        # three tokens the S=6 run compresses "ababab" to 4 symbols while
        # the S=5 run freezes it at 5. Both agree with the naive reference.
        tokens = {0: b"ababab", 1: b"babaq", 2: b"babaw"}
        _, at6 = train_hier_bpe(tokens, 6)
        _, at5 = train_hier_bpe(tokens, 5)
        assert len(at6.patches[0]) == 4
        assert len(at5.patches[0]) == 5
        for s, got in ((6, at6), (5, at5)):
            _, ref = oracles.naive_train_hier(tokens, s)
            assert got.patches == ref


class TestMostFreqPair:
    def test_overlapping_count(self):
        assert most_freq_pair([[97, 97, 97, 97, 256]]) == (97, 97)

    def test_lexicographic_tie_break(self):
        assert most_freq_pair([[97, 98, 256], [98, 97, 256]]) == (97, 98)

    def test_no_candidate_is_error(self):
        with pytest.raises(HbpeError) as err:
            most_freq_pair([[97, 256]])
        assert err.value.code == "stage2.no_candidate_pair"

    def test_marker_pairs_excluded(self):
        # (98, 256) and (256,...) pairs never become candidates
        assert most_freq_pair([[97, 97, 98, 256], [98, 256]]) == (97, 97)


class TestDecodePatch:
    def test_single_byte(self):
        assert decode_patch([97, 256], MergeTable([])) == b"a"

    def test_nested_expansion(self):
        table = MergeTable([(97, 97, 257)])
        assert decode_patch([257, 98, 98, 256], table) == b"aabb"

    def test_symbol_out_of_range(self):
        with pytest.raises(HbpeError) as err:
            decode_patch([300, 256], MergeTable([]))
        assert err.value.code == "stage2.bad_symbol"

    def test_marker_not_final(self):
        with pytest.raises(HbpeError) as err:
            decode_patch([97, 256, 98], MergeTable([]))
        assert err.value.code == "stage2.marker_not_final"

    def test_marker_inside(self):
        with pytest.raises(HbpeError) as err:
            decode_patch([97, 256, 98, 256], MergeTable([]))
        assert err.value.code == "stage2.marker_inside"


class TestPadPatch:
    def test_fill(self):
        table = PatchTable({0: (97, 256)}, 6, 258)
        assert pad_patch((97, 256), table) == [97, 256, 258, 258, 258, 258]

    def test_full_length_unchanged(self):
        patch = (84, 104, 257, 32, 257, 256)
        table = PatchTable({0: patch}, 6, 258)
        assert pad_patch(patch, table) == list(patch)

    def test_too_long_rejected(self):
        table = PatchTable({0: (97, 256)}, 2, 257)
        with pytest.raises(HbpeError) as err:
            pad_patch((97, 98, 256), table)
        assert err.value.code == "stage2.patch_too_long"

    def test_pad_only_after_marker(self):
        rng = random.Random(3)
        tokens = random_token_map(rng, 60, b"abcdef", max_len=10)
        table, patches = train_hier_bpe(tokens, 5)
        for patch in patches.patches.values():
            row = pad_patch(patch, patches)
            assert len(row) == 5
            m = row.index(MARKER)
            assert all(x == patches.pad_id for x in row[m + 1:])
            assert MARKER not in row[:m]


class TestRoundTrip:
    def test_lossless_over_text(self, toy_vocab):
        _, patches = train_hier_bpe(toy_vocab, 6)
        table = MergeTable([(105, 115, 257)])
        data = b"This is a test!" * 11
        out = encode_patches(data, toy_vocab, patches)
        assert b"".join(decode_patch(p, table) for p in out) == data

    def test_empty_input(self, toy_vocab):
        _, patches = train_hier_bpe(toy_vocab, 6)
        assert encode_patches(b"", toy_vocab, patches) == []

    def test_unknown_token_detected(self, toy_vocab):
        _, patches = train_hier_bpe(toy_vocab, 6)
        patches.patches.pop(260)  # drop "This is" from the table
        with pytest.raises(HbpeError) as err:
            encode_patches(b"This is a test!", toy_vocab, patches)
        assert err.value.code == "stage2.unknown_token"


class TestPersistence:
    def test_roundtrip(self, tmp_path, toy_vocab):
        table, patches = train_hier_bpe(toy_vocab, 6)
        path = tmp_path / "stage2.txt"
        save_stage2(table, patches, path)
        loaded_table, loaded_patches = load_stage2(path)
        assert loaded_table.merges == table.merges
        assert loaded_patches.patches == patches.patches
        assert loaded_patches.max_patch_len == 6
        assert loaded_patches.v_prime == table.v_prime
        assert loaded_patches.pad_id == table.v_prime

    def test_header_fields(self, tmp_path, toy_vocab):
        table, patches = train_hier_bpe(toy_vocab, 6)
        path = tmp_path / "stage2.txt"
        save_stage2(table, patches, path)
        header = path.read_text().splitlines()[0]
        assert header == (
            f"HBPE-V1 stage2 S=6 vprime={table.v_prime} pad={table.v_prime}"
        )

    def test_bad_header(self, tmp_path):
        path = tmp_path / "x.txt"
        path.write_text("HBPE-V1 stage1\n")
        with pytest.raises(HbpeError) as err:
            load_stage2(path)
        assert err.value.code == "stage2.bad_header"

    def test_inconsistent_header_counts(self, tmp_path):
        path = tmp_path / "x.txt"
        path.write_text("HBPE-V1 stage2 S=4 vprime=999 pad=999\n0: 97 256\n")
        with pytest.raises(HbpeError) as err:
            load_stage2(path)
        assert err.value.code == "stage2.bad_header"
