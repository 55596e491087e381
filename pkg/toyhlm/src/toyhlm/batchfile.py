"""Reader for the padded patch batch format.

Layout (little-endian, platform independent): magic "HBPB", u32 version=1,
u32 S, u32 v_prime, u32 pad_id, u64 row_count, then row_count * S u32
symbol ids. Each row is one patch: content symbols, exactly one marker
(256), padding only after the marker.
"""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass

import numpy as np

from .errors import ToyError

MAGIC = b"HBPB"
VERSION = 1
MARKER = 256
_HEADER = struct.Struct("<4sIIIIQ")


@dataclass(frozen=True)
class BatchHeader:
    version: int
    max_patch_len: int
    v_prime: int
    pad_id: int
    row_count: int


def read_batchfile(path: str | os.PathLike) -> tuple[BatchHeader, np.ndarray]:
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:4] != MAGIC:
        raise ToyError("batchfile.bad_magic", f"{path}: not a patch batch file")
    if len(blob) < _HEADER.size:
        raise ToyError("batchfile.truncated", f"{path}: header cut short")
    _, version, s, v_prime, pad_id, row_count = _HEADER.unpack_from(blob)
    if version != VERSION:
        raise ToyError(
            "batchfile.bad_version", f"{path}: version {version}, expected {VERSION}"
        )
    body = blob[_HEADER.size:]
    if len(body) != row_count * s * 4:
        raise ToyError(
            "batchfile.truncated",
            f"{path}: expected {row_count * s * 4} row bytes, found {len(body)}",
        )
    rows = np.frombuffer(body, dtype="<u4").reshape(row_count, s).astype(np.int64)
    header = BatchHeader(version, s, v_prime, pad_id, row_count)
    validate_rows(rows, header)
    return header, rows


def validate_rows(rows: np.ndarray, header: BatchHeader) -> np.ndarray:
    """Check the row invariants; returns each row's marker column index."""
    if rows.shape[0] == 0:
        return np.zeros(0, dtype=np.int64)
    is_marker = rows == MARKER
    per_row = is_marker.sum(axis=1)
    if not np.all(per_row == 1):
        bad = int(np.nonzero(per_row != 1)[0][0])
        raise ToyError(
            "batchfile.bad_row",
            f"row {bad}: expected exactly one marker, found {int(per_row[bad])}",
        )
    marker_col = np.argmax(is_marker, axis=1).astype(np.int64)
    cols = np.arange(rows.shape[1])
    after = cols[None, :] > marker_col[:, None]
    if not np.all(np.where(after, rows == header.pad_id, True)):
        raise ToyError("batchfile.bad_row", "non-pad symbol after a marker")
    before = cols[None, :] < marker_col[:, None]
    if not np.all(np.where(before, rows < header.v_prime, True)):
        raise ToyError("batchfile.bad_row", "content symbol outside the alphabet")
    return marker_col
