"""Corpus ingestion and the fixed-width patch batch file.

Batch files hold one padded patch per row for the downstream model. The
layout is pinned, little-endian regardless of platform: magic "HBPB",
u32 version=1, u32 S, u32 v_prime, u32 pad_id, u64 row_count, then
row_count * S u32 symbol ids.
"""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass

import numpy as np

from ._util import atomic_write_bytes, count_words
from .bpe import FirstStageVocab
from .errors import HbpeError
from .hier import MARKER, MergeTable, PatchTable, encode_patches

BATCH_MAGIC = b"HBPB"
BATCH_VERSION = 1
_HEADER = struct.Struct("<4sIIIIQ")


@dataclass(frozen=True)
class CorpusStats:
    byte_count: int
    word_count: int
    line_count: int


def corpus_stats(data: bytes) -> CorpusStats:
    """Counts over raw bytes: words are maximal non-space runs; a final
    unterminated line still counts."""
    lines = data.count(b"\n")
    if data and not data.endswith(b"\n"):
        lines += 1
    return CorpusStats(len(data), count_words(data), lines)


def read_corpus(paths: list[str | os.PathLike]) -> tuple[bytes, CorpusStats]:
    """Concatenate files in order as raw bytes (no decoding) with stats."""
    chunks = []
    for path in paths:
        try:
            with open(path, "rb") as fh:
                chunks.append(fh.read())
        except OSError as exc:
            raise HbpeError(
                "corpus.unreadable_file", f"cannot read {os.fspath(path)}: {exc}",
                kind="io",
            ) from None
    data = b"".join(chunks)
    return data, corpus_stats(data)


@dataclass(frozen=True)
class BatchHeader:
    version: int
    max_patch_len: int
    v_prime: int
    pad_id: int
    row_count: int


@dataclass(frozen=True)
class BatchSummary:
    path: str
    row_count: int
    avg_content_symbols: float | None


def _check_row(row: np.ndarray, header: BatchHeader, what: str) -> None:
    marker_pos = np.nonzero(row == MARKER)[0]
    if marker_pos.size != 1:
        raise HbpeError(
            "batch.bad_row", f"{what}: expected exactly one marker, found {marker_pos.size}"
        )
    m = int(marker_pos[0])
    if not np.all(row[m + 1:] == header.pad_id):
        raise HbpeError("batch.bad_row", f"{what}: non-pad symbol after the marker")
    content = row[:m]
    if content.size and (np.any(content >= header.v_prime)):
        raise HbpeError("batch.bad_row", f"{what}: content symbol outside alphabet")


def check_rows(rows: np.ndarray, header: BatchHeader) -> np.ndarray:
    """Validate all row invariants at once; returns each row's marker column."""
    if rows.ndim != 2 or rows.shape[1] != header.max_patch_len:
        raise HbpeError(
            "batch.bad_row",
            f"rows must be (n, {header.max_patch_len}), got {rows.shape}",
        )
    if rows.shape[0] == 0:
        return np.zeros(0, dtype=np.int64)
    is_marker = rows == MARKER
    per_row = is_marker.sum(axis=1)
    if not np.all(per_row == 1):
        bad = int(np.nonzero(per_row != 1)[0][0])
        raise HbpeError(
            "batch.bad_row",
            f"row {bad}: expected exactly one marker, found {int(per_row[bad])}",
        )
    marker_col = np.argmax(is_marker, axis=1).astype(np.int64)
    cols = np.arange(rows.shape[1])
    after = cols[None, :] > marker_col[:, None]
    if not np.all(np.where(after, rows == header.pad_id, True)):
        bad = int(np.nonzero(~np.all(np.where(after, rows == header.pad_id, True), axis=1))[0][0])
        raise HbpeError("batch.bad_row", f"row {bad}: non-pad symbol after the marker")
    before = cols[None, :] < marker_col[:, None]
    if not np.all(np.where(before, rows < header.v_prime, True)):
        bad = int(np.nonzero(~np.all(np.where(before, rows < header.v_prime, True), axis=1))[0][0])
        raise HbpeError("batch.bad_row", f"row {bad}: content symbol outside alphabet")
    return marker_col


def emit_batches(
    data: bytes,
    vocab: FirstStageVocab,
    table: PatchTable,
    out: str | os.PathLike,
) -> BatchSummary:
    """Write one padded row per first-stage token of the input, in order."""
    patches = encode_patches(data, vocab, table)
    s = table.max_patch_len
    lens = np.fromiter((len(p) for p in patches), dtype=np.int64, count=len(patches))
    if lens.size and int(lens.max()) > s:
        raise HbpeError(
            "batch.invariant_violation",
            f"patch of {int(lens.max())} symbols exceeds S={s}; tokenizer bug",
        )
    flat: list[int] = []
    for p in patches:
        flat.extend(p)
    rows = np.full((len(patches), s), table.pad_id, dtype="<u4")
    mask = np.arange(s)[None, :] < lens[:, None]
    rows[mask] = np.asarray(flat, dtype="<u4")
    header = BatchHeader(BATCH_VERSION, s, table.v_prime, table.pad_id, len(patches))
    check_rows(rows, header)
    payload = _HEADER.pack(
        BATCH_MAGIC, BATCH_VERSION, s, table.v_prime, table.pad_id, len(patches)
    ) + rows.tobytes()
    atomic_write_bytes(out, payload)
    content_symbols = int(lens.sum()) - len(patches)
    avg = content_symbols / len(patches) if patches else None
    return BatchSummary(os.fspath(out), len(patches), avg)


def read_batches(path: str | os.PathLike) -> tuple[BatchHeader, np.ndarray]:
    """Parse a batch file; the exact inverse of emit_batches.

    Returns the header and a (row_count, S) uint32 array. Bad magic, an
    unsupported version, and truncation each raise a distinct error.
    """
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:4] != BATCH_MAGIC:
        if len(blob) < 4 and blob == BATCH_MAGIC[: len(blob)]:
            raise HbpeError("batch.truncated", f"{path}: header cut short")
        raise HbpeError("batch.bad_magic", f"{path}: not a batch file")
    if len(blob) < _HEADER.size:
        raise HbpeError("batch.truncated", f"{path}: header cut short")
    _, version, s, v_prime, pad_id, row_count = _HEADER.unpack_from(blob)
    if version != BATCH_VERSION:
        raise HbpeError(
            "batch.bad_version", f"{path}: version {version}, expected {BATCH_VERSION}"
        )
    body = blob[_HEADER.size:]
    expected = row_count * s * 4
    if len(body) < expected:
        raise HbpeError(
            "batch.truncated",
            f"{path}: expected {expected} row bytes, found {len(body)}",
        )
    if len(body) > expected:
        raise HbpeError(
            "batch.trailing_data", f"{path}: {len(body) - expected} bytes after rows"
        )
    rows = np.frombuffer(body, dtype="<u4").reshape(row_count, s)
    return BatchHeader(version, s, v_prime, pad_id, row_count), rows


def row_to_patch(row: np.ndarray, header: BatchHeader) -> tuple[int, ...]:
    """Strip padding from one row, validating the row invariants."""
    _check_row(np.asarray(row), header, "row")
    m = int(np.nonzero(np.asarray(row) == MARKER)[0][0])
    return tuple(int(x) for x in row[: m + 1])


def decode_batches(header: BatchHeader, rows: np.ndarray, table: MergeTable) -> bytes:
    """Decode every row of a batch back to bytes, in row order.

    The inverse of the full emit pipeline: validates row invariants, drops
    padding and markers, expands second-stage symbols.
    """
    rows = np.asarray(rows)
    if table.v_prime != header.v_prime:
        raise HbpeError(
            "batch.table_mismatch",
            f"merge table has v_prime {table.v_prime}, file says {header.v_prime}",
        )
    marker_col = check_rows(rows, header)
    mask = np.arange(rows.shape[1])[None, :] < marker_col[:, None]
    content = rows[mask].tolist()
    lut = [b""] * header.v_prime
    for sym in range(header.v_prime):
        if sym != MARKER:
            lut[sym] = table.symbol_bytes(sym)
    return b"".join(lut[s] for s in content)
