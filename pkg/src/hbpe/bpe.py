"""Byte-level first-stage BPE: training, GPT-2 file compatibility, encode/decode.

Token ids 0..255 are the raw bytes; every merge appends one token. Encoding
replays the recorded merges on the raw byte sequence, so any byte string can
be encoded and decode(encode(x)) == x always holds.
"""

from __future__ import annotations

import json
import os
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from ._util import atomic_write_text, split_space_runs
from .errors import HbpeError

_KEY_SHIFT = 32  # pair key = (left << 32) | right; ids stay far below 2**31

STAGE1_HEADER = "HBPE-V1 stage1"
GPT2_MERGES_HEADER = "#version: 0.2"

PRETOKENIZE_RULES = ("none", "whitespace")


def merge_pass(seq: list[int], left: int, right: int, new_id: int) -> list[int]:
    """One greedy left-to-right replacement of (left, right) by new_id."""
    out: list[int] = []
    i = 0
    n = len(seq)
    while i < n:
        if i + 1 < n and seq[i] == left and seq[i + 1] == right:
            out.append(new_id)
            i += 2
        else:
            out.append(seq[i])
            i += 1
    return out


def pair_counts(seq: list[int]) -> Counter:
    """Overlapping adjacent-pair counts of one symbol sequence."""
    return Counter(zip(seq, seq[1:]))


def best_pair(counts: dict[tuple[int, int], int]) -> tuple[int, int]:
    """Highest count; ties go to the lexicographically smallest (left, right)."""
    return max(counts.items(), key=lambda kv: (kv[1], -kv[0][0], -kv[0][1]))[0]


@dataclass
class FirstStageVocab:
    """A trained or loaded byte-level BPE vocabulary.

    token_bytes maps every token id to its byte sequence; merges are
    (left, right, new) triples in creation order, which is also the replay
    order used by encode. pretokenize records the boundary rule used during
    training (None when unknown, e.g. for vocabularies loaded from GPT-2
    files; encoding replays merges and never needs it).
    """

    token_bytes: dict[int, bytes]
    merges: list[tuple[int, int, int]]
    pretokenize: str | None = None
    _byte_lut: np.ndarray = field(init=False, repr=False)
    _merge_keys: np.ndarray = field(init=False, repr=False)
    _merge_order: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self._validate()
        lut = np.empty(256, dtype=np.int64)
        by_bytes = {b: tid for tid, b in self.token_bytes.items() if len(b) == 1}
        for value in range(256):
            lut[value] = by_bytes[bytes([value])]
        self._byte_lut = lut
        keys = np.array(
            [(l << _KEY_SHIFT) | r for l, r, _ in self.merges], dtype=np.int64
        )
        order = np.argsort(keys, kind="stable")
        self._merge_keys = keys[order]
        self._merge_order = order.astype(np.int64)

    def _validate(self) -> None:
        for tid, b in self.token_bytes.items():
            if len(b) == 0:
                raise HbpeError("stage1.empty_token", f"token {tid} has empty bytes")
        single = {b[0] for b in self.token_bytes.values() if len(b) == 1}
        if len(single) != 256:
            missing = sorted(set(range(256)) - single)[:4]
            raise HbpeError(
                "stage1.missing_byte_token",
                f"vocabulary lacks base tokens for bytes {missing} ...",
            )
        for l, r, new in self.merges:
            for ref in (l, r, new):
                if ref not in self.token_bytes:
                    raise HbpeError(
                        "stage1.unknown_merge_symbol",
                        f"merge ({l},{r})->{new} references unknown token {ref}",
                    )
            if self.token_bytes[new] != self.token_bytes[l] + self.token_bytes[r]:
                raise HbpeError(
                    "stage1.inconsistent_merge",
                    f"token {new} is not the concatenation of {l} and {r}",
                )

    @property
    def vocab_size(self) -> int:
        return len(self.token_bytes)

    def encode(self, data: bytes) -> list[int]:
        """Tokenize raw bytes by replaying merges in creation order.

        Equivalent to applying each merge as one greedy left-to-right pass,
        oldest merge first; implemented as a lowest-rank-first loop so only
        merges actually present in the input cost anything.
        """
        if len(data) == 0:
            return []
        ids = self._byte_lut[np.frombuffer(data, dtype=np.uint8)]
        if ids.size < 2 or not self.merges:
            return ids.tolist()
        keys_sorted = self._merge_keys
        rank_of = self._merge_order
        while ids.size >= 2:
            keys = (ids[:-1] << _KEY_SHIFT) | ids[1:]
            pos = np.minimum(
                np.searchsorted(keys_sorted, keys), keys_sorted.size - 1
            )
            hit = keys_sorted[pos] == keys
            if not hit.any():
                break
            rank = int(rank_of[pos[hit]].min())
            left, right, new_id = self.merges[rank]
            occ = np.nonzero(keys == ((left << _KEY_SHIFT) | right))[0]
            keep: list[int] = []
            last = -2
            for p in occ.tolist():
                if p > last + 1:  # greedy: skip overlap with a taken match
                    keep.append(p)
                    last = p
            kept = np.asarray(keep, dtype=np.int64)
            ids[kept] = new_id
            ids = np.delete(ids, kept + 1)
        return ids.tolist()

    def decode(self, ids: list[int]) -> bytes:
        try:
            return b"".join(self.token_bytes[i] for i in ids)
        except KeyError as exc:
            raise HbpeError(
                "stage1.bad_token_id", f"id {exc.args[0]} is not in the vocabulary"
            ) from None


def _segments(corpus: bytes, pretokenize: str) -> list[bytes]:
    if pretokenize == "none":
        return [corpus]
    # Boundaries at every space/non-space transition, so no merge can ever
    # join space-like and non-space bytes (or span two words).
    return split_space_runs(corpus)


def train_bpe(
    corpus: bytes, target_vocab_size: int, pretokenize: str = "none"
) -> FirstStageVocab:
    """Learn merges by repeatedly joining the most frequent adjacent pair.

    Pair occurrences are counted overlapping, replacement is one greedy
    left-to-right pass, and frequency ties break to the smallest (left,
    right) id pair, so the merge list is a deterministic function of the
    corpus. Stops early if no adjacent pair remains.
    """
    if len(corpus) == 0:
        raise HbpeError("stage1.empty_corpus", "cannot train on an empty corpus")
    if target_vocab_size < 257:
        raise HbpeError(
            "stage1.vocab_size_too_small",
            f"target_vocab_size must be >= 257, got {target_vocab_size}",
        )
    if pretokenize not in PRETOKENIZE_RULES:
        raise HbpeError(
            "stage1.bad_pretokenize",
            f"pretokenize must be one of {PRETOKENIZE_RULES}, got {pretokenize!r}",
        )

    seg_weights = Counter(_segments(corpus, pretokenize))
    segments: list[list[int]] = [list(seg) for seg in seg_weights]
    weights: list[int] = list(seg_weights.values())

    counts: Counter = Counter()
    where: dict[tuple[int, int], set[int]] = {}
    for si, seg in enumerate(segments):
        w = weights[si]
        for pair, c in pair_counts(seg).items():
            counts[pair] += c * w
            where.setdefault(pair, set()).add(si)

    token_bytes = {i: bytes([i]) for i in range(256)}
    merges: list[tuple[int, int, int]] = []
    while len(token_bytes) < target_vocab_size and counts:
        left, right = best_pair(counts)
        new_id = 256 + len(merges)
        merges.append((left, right, new_id))
        token_bytes[new_id] = token_bytes[left] + token_bytes[right]
        for si in sorted(where[(left, right)]):
            seg = segments[si]
            w = weights[si]
            old = pair_counts(seg)
            new_seg = merge_pass(seg, left, right, new_id)
            new = pair_counts(new_seg)
            segments[si] = new_seg
            for pair, c in old.items():
                counts[pair] -= c * w
                if counts[pair] <= 0:
                    del counts[pair]
                if pair not in new:
                    where[pair].discard(si)
            for pair, c in new.items():
                counts[pair] += c * w
                where.setdefault(pair, set()).add(si)
    return FirstStageVocab(token_bytes, merges, pretokenize)


# --- token length statistics -------------------------------------------------


def token_length_histogram(vocab: FirstStageVocab) -> dict[int, int]:
    """Map byte-length -> number of tokens of that length; counts sum to V."""
    hist: Counter = Counter(len(b) for b in vocab.token_bytes.values())
    return dict(sorted(hist.items()))


def max_token_length(vocab: FirstStageVocab) -> int:
    return max(len(b) for b in vocab.token_bytes.values())


def length_quantile(hist: dict[int, int], q: float) -> int:
    """Smallest length whose cumulative share of tokens reaches q (0 < q <= 1)."""
    if not 0.0 < q <= 1.0:
        raise HbpeError("stage1.bad_quantile", f"q must be in (0, 1], got {q}")
    total = sum(hist.values())
    acc = 0
    for length in sorted(hist):
        acc += hist[length]
        if acc >= q * total:
            return length
    return max(hist)


# --- GPT-2 two-file convention ------------------------------------------------


def _gpt2_byte_to_unicode() -> dict[int, str]:
    # The published reversible remapping of bytes onto printable unicode
    # characters used by the GPT-2 vocab files.
    bs = (
        list(range(ord("!"), ord("~") + 1))
        + list(range(ord("\xa1"), ord("\xac") + 1))
        + list(range(ord("\xae"), ord("\xff") + 1))
    )
    cs = bs[:]
    n = 0
    for b in range(256):
        if b not in bs:
            bs.append(b)
            cs.append(256 + n)
            n += 1
    return {b: chr(c) for b, c in zip(bs, cs)}


_B2U = _gpt2_byte_to_unicode()
_U2B = {u: b for b, u in _B2U.items()}


def _token_str_to_bytes(token: str, context: str) -> bytes:
    try:
        return bytes(_U2B[ch] for ch in token)
    except KeyError as exc:
        raise HbpeError(
            "stage1.bad_vocab_entry",
            f"{context}: character {exc.args[0]!r} is outside the byte remapping",
        ) from None


def _bytes_to_token_str(data: bytes) -> str:
    return "".join(_B2U[b] for b in data)


def load_gpt2(vocab_file: str | os.PathLike, merges_file: str | os.PathLike) -> FirstStageVocab:
    """Load a tokenizer stored in the GPT-2 two-file convention.

    vocab_file maps unicode-remapped token strings to ids; merges_file lists
    one "left right" pair per line, in merge order. token_bytes holds the
    true underlying bytes after inverting the remapping.
    """
    with open(vocab_file, encoding="utf-8") as fh:
        try:
            raw_vocab = json.load(fh)
        except json.JSONDecodeError as exc:
            raise HbpeError(
                "stage1.bad_vocab_file", f"{vocab_file}: {exc}"
            ) from None
    token_bytes: dict[int, bytes] = {}
    str_to_id: dict[str, int] = {}
    for token, tid in raw_vocab.items():
        if not isinstance(tid, int) or tid < 0:
            raise HbpeError(
                "stage1.bad_vocab_entry", f"token {token!r} has invalid id {tid!r}"
            )
        if tid in token_bytes:
            raise HbpeError("stage1.duplicate_id", f"id {tid} assigned twice")
        token_bytes[tid] = _token_str_to_bytes(token, f"token id {tid}")
        str_to_id[token] = tid

    merges: list[tuple[int, int, int]] = []
    with open(merges_file, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if lineno == 1 and line.startswith("#"):
                continue
            if not line:
                continue
            parts = line.split(" ")
            if len(parts) != 2:
                raise HbpeError(
                    "stage1.bad_merge_line",
                    f"{merges_file}:{lineno}: expected 'left right', got {line!r}",
                )
            try:
                left, right = (str_to_id[p] for p in parts)
                new = str_to_id[parts[0] + parts[1]]
            except KeyError as exc:
                raise HbpeError(
                    "stage1.unknown_merge_symbol",
                    f"{merges_file}:{lineno}: symbol {exc.args[0]!r} not in vocabulary",
                ) from None
            merges.append((left, right, new))
    return FirstStageVocab(token_bytes, merges, pretokenize=None)


# Alias: this is the loader for externally published tokenizer files.
load_external = load_gpt2


def save_gpt2(
    vocab: FirstStageVocab,
    vocab_file: str | os.PathLike,
    merges_file: str | os.PathLike,
) -> None:
    """Persist in the GPT-2 two-file convention (loadable by load_gpt2)."""
    mapping = {
        _bytes_to_token_str(vocab.token_bytes[tid]): tid
        for tid in sorted(vocab.token_bytes)
    }
    atomic_write_text(vocab_file, json.dumps(mapping, ensure_ascii=False))
    lines = [GPT2_MERGES_HEADER]
    for l, r, _ in vocab.merges:
        lines.append(
            f"{_bytes_to_token_str(vocab.token_bytes[l])} "
            f"{_bytes_to_token_str(vocab.token_bytes[r])}"
        )
    atomic_write_text(merges_file, "\n".join(lines) + "\n")


# --- internal single-file form --------------------------------------------


def save_internal(vocab: FirstStageVocab, path: str | os.PathLike) -> None:
    """Persist a byte-base vocabulary as a versioned merge list."""
    for i, (_, _, new) in enumerate(vocab.merges):
        if new != 256 + i:
            raise HbpeError(
                "stage1.not_byte_base",
                "internal format requires merge ids 256, 257, ... in order",
            )
    lines = [STAGE1_HEADER]
    lines.extend(f"{l} {r}" for l, r, _ in vocab.merges)
    atomic_write_text(path, "\n".join(lines) + "\n")


def load_internal(path: str | os.PathLike) -> FirstStageVocab:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        if header != STAGE1_HEADER:
            raise HbpeError(
                "stage1.bad_header",
                f"{path}: expected {STAGE1_HEADER!r}, got {header!r}",
            )
        token_bytes = {i: bytes([i]) for i in range(256)}
        merges: list[tuple[int, int, int]] = []
        for lineno, line in enumerate(fh, 2):
            line = line.strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise HbpeError(
                    "stage1.bad_merge_line",
                    f"{path}:{lineno}: expected 'left right', got {line!r}",
                )
            try:
                left, right = int(parts[0]), int(parts[1])
            except ValueError:
                raise HbpeError(
                    "stage1.bad_merge_line",
                    f"{path}:{lineno}: non-integer merge ids in {line!r}",
                ) from None
            new_id = 256 + len(merges)
            if left not in token_bytes or right not in token_bytes:
                raise HbpeError(
                    "stage1.unknown_merge_symbol",
                    f"{path}:{lineno}: merge references unknown id",
                )
            merges.append((left, right, new_id))
            token_bytes[new_id] = token_bytes[left] + token_bytes[right]
    return FirstStageVocab(token_bytes, merges, pretokenize=None)
