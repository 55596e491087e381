"""Reader for the versioned stage-2 tokenizer artifact.

The text format: header "HBPE-V1 stage2 S=<S> vprime=<v> pad=<p>", one
"left right new" line per merge, then "token_id: s0 s1 ... 256" patch
lines. The model only needs the per-symbol expanded byte lengths (to
normalize NLL by raw bytes), derived from the merge list.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .errors import ToyError

HEADER_PREFIX = "HBPE-V1 stage2"
MARKER = 256


@dataclass(frozen=True)
class Stage2Info:
    max_patch_len: int
    v_prime: int
    pad_id: int
    symbol_byte_len: np.ndarray  # index = symbol id; marker entry is 0


def read_stage2(path: str | os.PathLike) -> Stage2Info:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        fields = header.split(" ")
        if fields[:2] != HEADER_PREFIX.split(" ") or len(fields) != 5:
            raise ToyError("stage2.bad_header", f"{path}: unrecognized header {header!r}")
        try:
            meta = dict(f.split("=", 1) for f in fields[2:])
            s = int(meta["S"])
            v_prime = int(meta["vprime"])
            pad_id = int(meta["pad"])
        except (KeyError, ValueError):
            raise ToyError(
                "stage2.bad_header", f"{path}: malformed header {header!r}"
            ) from None
        lengths = np.zeros(v_prime, dtype=np.int64)
        lengths[:256] = 1
        lengths[MARKER] = 0
        next_new = 257
        for lineno, line in enumerate(fh, 2):
            line = line.strip()
            if not line or ":" in line:
                continue  # patch-table lines are not needed here
            try:
                left, right, new = (int(x) for x in line.split())
            except ValueError:
                raise ToyError(
                    "stage2.bad_line", f"{path}:{lineno}: cannot parse {line!r}"
                ) from None
            if new != next_new or new >= v_prime or max(left, right) >= new:
                raise ToyError(
                    "stage2.bad_line", f"{path}:{lineno}: inconsistent merge {line!r}"
                )
            lengths[new] = lengths[left] + lengths[right]
            next_new += 1
    if next_new != v_prime or pad_id != v_prime:
        raise ToyError(
            "stage2.bad_header",
            f"{path}: header says vprime={v_prime} pad={pad_id}, "
            f"found {next_new - 257} merges",
        )
    return Stage2Info(s, v_prime, pad_id, lengths)


def content_byte_count(rows: np.ndarray, marker_col: np.ndarray, info: Stage2Info) -> int:
    """Raw bytes represented by the content symbols of the given rows."""
    cols = np.arange(rows.shape[1])
    content = cols[None, :] < marker_col[:, None]
    symbols = rows[content]
    return int(info.symbol_byte_len[symbols].sum())
