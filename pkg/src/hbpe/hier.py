"""Second-stage BPE: compress each token's byte sequence to a bounded patch.

Every first-stage token becomes a patch: its bytes, terminated by the
reserved end-of-patch marker 256, compressed by second-stage merges until
the whole patch (marker included) fits in S symbols. Merged symbols get ids
257, 258, ... in creation order; the pad symbol used by fixed-width batch
rows is one past the last merged symbol and never occurs inside a patch.

Training keeps an active set holding exactly the tokens still longer than
S. Each round picks the most frequent adjacent pair across the active
sequences (marker pairs excluded, ties to the smallest pair), applies it as
one greedy left-to-right pass, and freezes every token that now fits. A
frozen token's patch never changes again, so encoding text is a pure table
lookup per first-stage token.
"""

from __future__ import annotations

import os
from collections import Counter
from collections.abc import Mapping
from dataclasses import dataclass, field

from ._util import atomic_write_text
from .bpe import FirstStageVocab, merge_pass
from .errors import HbpeError

MARKER = 256
FIRST_MERGED = 257

STAGE2_HEADER_PREFIX = "HBPE-V1 stage2"


@dataclass
class MergeTable:
    """Ordered second-stage merges; the n-th merge creates symbol 257 + n - 1."""

    merges: list[tuple[int, int, int]]
    _expansion: dict[int, bytes] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        expansion = {b: bytes([b]) for b in range(256)}
        for n, (left, right, new) in enumerate(self.merges):
            if new != FIRST_MERGED + n:
                raise HbpeError(
                    "stage2.bad_merge_id",
                    f"merge {n} creates {new}, expected {FIRST_MERGED + n}",
                )
            if MARKER in (left, right):
                raise HbpeError(
                    "stage2.marker_in_merge", "the end-of-patch marker cannot merge"
                )
            if left >= new or right >= new:
                raise HbpeError(
                    "stage2.bad_merge_parent",
                    f"merge parents ({left},{right}) must precede {new}",
                )
            if left not in expansion or right not in expansion:
                raise HbpeError(
                    "stage2.bad_merge_parent",
                    f"merge ({left},{right})->{new} references an unknown symbol",
                )
            expansion[new] = expansion[left] + expansion[right]
        self._expansion = expansion

    @property
    def v_prime(self) -> int:
        """Second-stage symbol count: 256 bytes + marker + merged symbols."""
        return FIRST_MERGED + len(self.merges)

    def symbol_bytes(self, symbol: int) -> bytes:
        """Fully expanded bytes of one non-marker symbol."""
        try:
            return self._expansion[symbol]
        except KeyError:
            raise HbpeError(
                "stage2.bad_symbol", f"symbol {symbol} is not in the alphabet"
            ) from None


@dataclass
class PatchTable:
    """Frozen token-id -> patch lookup produced by training at bound S."""

    patches: dict[int, tuple[int, ...]]
    max_patch_len: int
    v_prime: int

    @property
    def pad_id(self) -> int:
        return self.v_prime

    def __post_init__(self) -> None:
        for tid, patch in self.patches.items():
            if len(patch) > self.max_patch_len:
                raise HbpeError(
                    "stage2.patch_too_long",
                    f"token {tid} patch has {len(patch)} symbols, bound is "
                    f"{self.max_patch_len}",
                )
            _check_patch_shape(patch, self.v_prime, f"token {tid}")


def _check_patch_shape(patch: tuple[int, ...], v_prime: int, what: str) -> None:
    if not patch or patch[-1] != MARKER:
        raise HbpeError("stage2.marker_not_final", f"{what}: patch must end with 256")
    for sym in patch[:-1]:
        if sym == MARKER:
            raise HbpeError(
                "stage2.marker_inside", f"{what}: marker 256 before the final position"
            )
        if not 0 <= sym < v_prime:
            raise HbpeError(
                "stage2.bad_symbol", f"{what}: symbol {sym} outside alphabet of {v_prime}"
            )


def most_freq_pair(active: list[list[int]]) -> tuple[int, int]:
    """Most frequent adjacent pair over the active sequences.

    Counts every overlapping occurrence, one count per sequence occurrence;
    pairs containing the marker are not candidates. Ties break to the
    lexicographically smallest (left, right).
    """
    counts: Counter = Counter()
    for seq in active:
        for pair in zip(seq, seq[1:]):
            if MARKER not in pair:
                counts[pair] += 1
    if not counts:
        raise HbpeError(
            "stage2.no_candidate_pair", "no mergeable pair in the active set"
        )
    return max(counts.items(), key=lambda kv: (kv[1], -kv[0][0], -kv[0][1]))[0]


def _token_map(vocab: FirstStageVocab | Mapping[int, bytes]) -> Mapping[int, bytes]:
    if isinstance(vocab, FirstStageVocab):
        return vocab.token_bytes
    return vocab


def train_hier_bpe(
    vocab: FirstStageVocab | Mapping[int, bytes],
    max_patch_len: int,
    token_weights: Mapping[int, int] | None = None,
) -> tuple[MergeTable, PatchTable]:
    """Compress every token to a marker-terminated patch of at most S symbols.

    By default each vocabulary entry contributes its pair occurrences once;
    pass token_weights (token id -> corpus count) to weight entries by how
    often they occur in a corpus instead.
    """
    s = max_patch_len
    if s < 2:
        raise HbpeError(
            "stage2.bad_patch_size", f"max_patch_len must be >= 2, got {s}"
        )
    tokens = _token_map(vocab)
    if not tokens:
        raise HbpeError("stage2.empty_vocab", "first-stage vocabulary is empty")

    frozen: dict[int, tuple[int, ...]] = {}
    active: dict[int, list[int]] = {}
    for tid, data in tokens.items():
        seq = list(data) + [MARKER]
        if len(seq) <= s:
            frozen[tid] = tuple(seq)
        else:
            active[tid] = seq

    if token_weights is None:
        eff_weight = {tid: 1 for tid in active}
    else:
        eff_weight = {tid: int(token_weights.get(tid, 0)) for tid in active}

    def seq_pairs(seq: list[int]) -> Counter:
        c: Counter = Counter()
        for pair in zip(seq, seq[1:]):
            if MARKER not in pair:
                c[pair] += 1
        return c

    counts: Counter = Counter()
    where: dict[tuple[int, int], set[int]] = {}

    def index_all() -> None:
        counts.clear()
        where.clear()
        for tid, seq in active.items():
            w = eff_weight[tid]
            for pair, c in seq_pairs(seq).items():
                if w > 0:
                    counts[pair] += c * w
                where.setdefault(pair, set()).add(tid)

    index_all()
    merges: list[tuple[int, int, int]] = []
    while active:
        if not counts:
            # Only reachable under corpus weighting when every remaining
            # active token has corpus count 0; fall back to entry counting
            # so those tokens still get compressed below the bound.
            eff_weight = {tid: 1 for tid in active}
            index_all()
        left, right = max(
            counts.items(), key=lambda kv: (kv[1], -kv[0][0], -kv[0][1])
        )[0]
        new_id = FIRST_MERGED + len(merges)
        merges.append((left, right, new_id))
        for tid in sorted(where[(left, right)]):
            seq = active[tid]
            w = eff_weight[tid]
            old = seq_pairs(seq)
            new_seq = merge_pass(seq, left, right, new_id)
            for pair, c in old.items():
                if w > 0:
                    counts[pair] -= c * w
                    if counts[pair] <= 0:
                        del counts[pair]
                where[pair].discard(tid)
            if len(new_seq) <= s:
                del active[tid]
                frozen[tid] = tuple(new_seq)
            else:
                active[tid] = new_seq
                for pair, c in seq_pairs(new_seq).items():
                    if w > 0:
                        counts[pair] += c * w
                    where.setdefault(pair, set()).add(tid)

    table = MergeTable(merges)
    return table, PatchTable(frozen, s, table.v_prime)


def encode_patches(
    data: bytes, vocab: FirstStageVocab, table: PatchTable
) -> list[tuple[int, ...]]:
    """First-stage encode, then a pure patch-table lookup per token."""
    out = []
    for tid in vocab.encode(data):
        patch = table.patches.get(tid)
        if patch is None:
            raise HbpeError(
                "stage2.unknown_token",
                f"token {tid} missing from the patch table; was the table "
                "trained from this vocabulary?",
            )
        out.append(patch)
    return out


def decode_patch(patch: tuple[int, ...] | list[int], table: MergeTable) -> bytes:
    """Expand merged symbols, drop the trailing marker, return raw bytes."""
    patch = tuple(patch)
    _check_patch_shape(patch, table.v_prime, "patch")
    return b"".join(table.symbol_bytes(sym) for sym in patch[:-1])


def pad_patch(patch: tuple[int, ...] | list[int], table: PatchTable) -> list[int]:
    """Extend a patch with pad_id to exactly S symbols."""
    if len(patch) > table.max_patch_len:
        raise HbpeError(
            "stage2.patch_too_long",
            f"patch of {len(patch)} symbols exceeds bound {table.max_patch_len}",
        )
    return list(patch) + [table.pad_id] * (table.max_patch_len - len(patch))


# --- persistence ---------------------------------------------------------


def save_stage2(
    merge_table: MergeTable, patch_table: PatchTable, path: str | os.PathLike
) -> None:
    """Write the versioned stage-2 artifact: header, merges, patch table."""
    lines = [
        f"{STAGE2_HEADER_PREFIX} S={patch_table.max_patch_len} "
        f"vprime={patch_table.v_prime} pad={patch_table.pad_id}"
    ]
    lines.extend(f"{l} {r} {n}" for l, r, n in merge_table.merges)
    for tid in sorted(patch_table.patches):
        syms = " ".join(str(s) for s in patch_table.patches[tid])
        lines.append(f"{tid}: {syms}")
    atomic_write_text(path, "\n".join(lines) + "\n")


def load_stage2(path: str | os.PathLike) -> tuple[MergeTable, PatchTable]:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        fields = header.split(" ")
        if fields[:2] != STAGE2_HEADER_PREFIX.split(" ") or len(fields) != 5:
            raise HbpeError(
                "stage2.bad_header", f"{path}: unrecognized header {header!r}"
            )
        try:
            meta = dict(f.split("=", 1) for f in fields[2:])
            s = int(meta["S"])
            v_prime = int(meta["vprime"])
            pad_id = int(meta["pad"])
        except (KeyError, ValueError):
            raise HbpeError(
                "stage2.bad_header", f"{path}: malformed header fields {header!r}"
            ) from None
        merges: list[tuple[int, int, int]] = []
        patches: dict[int, tuple[int, ...]] = {}
        for lineno, line in enumerate(fh, 2):
            line = line.strip()
            if not line:
                continue
            try:
                if ":" in line:
                    tid_part, syms_part = line.split(":", 1)
                    patches[int(tid_part)] = tuple(
                        int(x) for x in syms_part.split()
                    )
                else:
                    left, right, new = (int(x) for x in line.split())
                    merges.append((left, right, new))
            except ValueError:
                raise HbpeError(
                    "stage2.bad_line", f"{path}:{lineno}: cannot parse {line!r}"
                ) from None
    table = MergeTable(merges)
    if table.v_prime != v_prime or pad_id != v_prime:
        raise HbpeError(
            "stage2.bad_header",
            f"{path}: header vprime={v_prime} pad={pad_id} does not match "
            f"{len(merges)} merges",
        )
    return table, PatchTable(patches, s, v_prime)
