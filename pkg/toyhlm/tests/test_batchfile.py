import numpy as np
import pytest

import hbpe
from toyhlm import (
    ToyError,
    content_byte_count,
    read_batchfile,
    read_stage2,
    validate_rows,
)


class TestReadBatchfile:
    def test_matches_producer(self, artifacts):
        header, rows = read_batchfile(artifacts["batch"])
        ref_header, ref_rows = hbpe.read_batches(artifacts["batch"])
        assert header.max_patch_len == ref_header.max_patch_len == 6
        assert header.v_prime == ref_header.v_prime
        assert header.pad_id == header.v_prime
        assert rows.shape == ref_rows.shape
        assert np.array_equal(rows, ref_rows.astype(np.int64))

    def test_bad_magic(self, tmp_path):
        p = tmp_path / "x.hbpb"
        p.write_bytes(b"WHAT" + bytes(32))
        with pytest.raises(ToyError) as err:
            read_batchfile(p)
        assert err.value.code == "batchfile.bad_magic"

    def test_truncated(self, tmp_path, artifacts):
        blob = artifacts["batch"].read_bytes()
        p = tmp_path / "x.hbpb"
        p.write_bytes(blob[:-4])
        with pytest.raises(ToyError) as err:
            read_batchfile(p)
        assert err.value.code == "batchfile.truncated"

    def test_bad_version(self, tmp_path, artifacts):
        blob = bytearray(artifacts["batch"].read_bytes())
        blob[4] = 7
        p = tmp_path / "x.hbpb"
        p.write_bytes(bytes(blob))
        with pytest.raises(ToyError) as err:
            read_batchfile(p)
        assert err.value.code == "batchfile.bad_version"

    def test_row_invariants_enforced(self, artifacts):
        header, rows = read_batchfile(artifacts["batch"])
        broken = rows.copy()
        broken[0, -1] = 5  # content symbol in the pad region
        with pytest.raises(ToyError) as err:
            validate_rows(broken, header)
        assert err.value.code == "batchfile.bad_row"


class TestStage2Artifact:
    def test_byte_accounting_matches_corpus(self, artifacts):
        header, rows = read_batchfile(artifacts["batch"])
        info = read_stage2(artifacts["stage2"])
        marker_col = validate_rows(rows, header)
        assert info.v_prime == header.v_prime
        n = content_byte_count(rows, marker_col, info)
        assert n == len(artifacts["corpus"])

    def test_single_byte_symbols_have_length_one(self, artifacts):
        info = read_stage2(artifacts["stage2"])
        assert all(info.symbol_byte_len[b] == 1 for b in range(256))
        assert info.symbol_byte_len[256] == 0
        assert all(info.symbol_byte_len[s] >= 2 for s in range(257, info.v_prime))

    def test_bad_header(self, tmp_path):
        p = tmp_path / "s.txt"
        p.write_text("not a header\n")
        with pytest.raises(ToyError) as err:
            read_stage2(p)
        assert err.value.code == "stage2.bad_header"
