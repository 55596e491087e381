"""Dynamic grouping baselines and patch statistics.

Three boundary strategies partition a byte sequence into patches: after
whitespace (with a size cap), where the next byte is surprising under an
n-gram model, or every k bytes. All of them return Boundaries, so their
statistics are directly comparable with the two-stage BPE patches.
"""

from __future__ import annotations

import math
import os
from collections import Counter
from dataclasses import dataclass, field

from ._util import SPACE_LIKE, atomic_write_text, count_words
from .errors import HbpeError

ENTROPY_HEADER_PREFIX = "HBPE-V1 entropy"


@dataclass(frozen=True)
class Boundaries:
    """Patch end offsets (exclusive), strictly increasing, covering the input.

    cuts[-1] equals the input length; an empty input has no cuts. Patch i
    spans [cuts[i-1], cuts[i]) with an implicit start at 0.
    """

    cuts: tuple[int, ...]

    def __post_init__(self) -> None:
        prev = 0
        for cut in self.cuts:
            if cut <= prev:
                raise HbpeError(
                    "patching.bad_boundaries",
                    f"cut offsets must be strictly increasing from 0, got {self.cuts}",
                )
            prev = cut

    @property
    def patch_count(self) -> int:
        return len(self.cuts)

    @property
    def byte_count(self) -> int:
        return self.cuts[-1] if self.cuts else 0

    def lengths(self) -> list[int]:
        out = []
        prev = 0
        for cut in self.cuts:
            out.append(cut - prev)
            prev = cut
        return out

    def patches(self, data: bytes) -> list[bytes]:
        if len(data) != self.byte_count:
            raise HbpeError(
                "patching.length_mismatch",
                f"boundaries cover {self.byte_count} bytes, input has {len(data)}",
            )
        prev = 0
        out = []
        for cut in self.cuts:
            out.append(data[prev:cut])
            prev = cut
        return out


def space_patch(data: bytes, max_size: int) -> Boundaries:
    """Cut after every space-like byte and whenever a patch reaches max_size.

    Spaces attach to the patch they terminate.
    """
    if max_size < 1:
        raise HbpeError("patching.bad_max_size", f"max_size must be >= 1, got {max_size}")
    cuts = []
    run = 0
    for i, b in enumerate(data):
        run += 1
        if b in SPACE_LIKE or run == max_size:
            cuts.append(i + 1)
            run = 0
    if run:
        cuts.append(len(data))
    return Boundaries(tuple(cuts))


def fixed_patch(data: bytes, k: int) -> Boundaries:
    """Consecutive patches of exactly k bytes; the final one may be shorter."""
    if k < 1:
        raise HbpeError("patching.bad_max_size", f"k must be >= 1, got {k}")
    cuts = list(range(k, len(data), k))
    if len(data):
        cuts.append(len(data))
    return Boundaries(tuple(cuts))


def entropy_patch(
    data: bytes,
    scorer: "NgramEntropyScorer",
    threshold: float,
    max_size: int | None = None,
) -> Boundaries:
    """Start a new patch where the observed byte surprises the scorer.

    A boundary is placed before byte i when -log2 p(data[i] | preceding
    context) exceeds threshold, and additionally when the current patch
    reaches max_size (omit max_size for the unbounded variant). Contexts are
    taken from the raw stream; they do not reset at boundaries.
    """
    if threshold < 0:
        raise HbpeError(
            "patching.bad_threshold", f"threshold must be >= 0, got {threshold}"
        )
    if max_size is not None and max_size < 1:
        raise HbpeError(
            "patching.bad_max_size", f"max_size must be >= 1, got {max_size}"
        )
    cuts = []
    run = 0
    n = len(data)
    for i in range(n):
        if run and scorer.surprisal(data[max(0, i - scorer.order):i], data[i]) > threshold:
            cuts.append(i)
            run = 0
        run += 1
        if max_size is not None and run == max_size:
            cuts.append(i + 1)
            run = 0
    if run:
        cuts.append(n)
    return Boundaries(tuple(cuts))


class NgramEntropyScorer:
    """Additively smoothed next-byte model with order-0 fallback.

    For a context of `order` bytes seen in training, the next-byte
    distribution is (count + smoothing) / (total + 256 * smoothing); unseen
    or too-short contexts fall back to the order-0 table. With smoothing 0
    the distribution is restricted to the bytes actually seen, so entropy
    stays finite while the surprisal of an unseen byte is infinite (and any
    finite threshold places a boundary there).
    """

    def __init__(
        self,
        order: int,
        smoothing: float,
        context_counts: dict[bytes, Counter],
        order0: Counter,
    ):
        self.order = order
        self.smoothing = smoothing
        self.context_counts = context_counts
        self.order0 = order0
        self._totals = {ctx: sum(c.values()) for ctx, c in context_counts.items()}
        self._total0 = sum(order0.values())

    def _table(self, context: bytes) -> tuple[Counter, int]:
        if self.order > 0 and len(context) >= self.order:
            key = context[-self.order:]
            counts = self.context_counts.get(key)
            if counts is not None:
                return counts, self._totals[key]
        return self.order0, self._total0

    def prob(self, context: bytes, byte: int) -> float:
        counts, total = self._table(context)
        a = self.smoothing
        if a > 0:
            return (counts.get(byte, 0) + a) / (total + 256 * a)
        return counts.get(byte, 0) / total

    def entropy(self, context: bytes) -> float:
        """Shannon entropy in bits of the smoothed next-byte distribution."""
        counts, total = self._table(context)
        a = self.smoothing
        h = 0.0
        if a > 0:
            denom = total + 256 * a
            seen = 0
            for c in counts.values():
                p = (c + a) / denom
                h -= p * math.log2(p)
                seen += 1
            p_unseen = a / denom
            if p_unseen > 0:
                h -= (256 - seen) * p_unseen * math.log2(p_unseen)
        else:
            for c in counts.values():
                p = c / total
                h -= p * math.log2(p)
        return max(h, 0.0)

    def surprisal(self, context: bytes, byte: int) -> float:
        """-log2 p(byte | context) in bits; may be inf when smoothing is 0."""
        p = self.prob(context, byte)
        if p == 0.0:
            return math.inf
        return -math.log2(p)


def train_entropy_scorer(
    corpus: bytes, order: int, smoothing: float
) -> NgramEntropyScorer:
    if len(corpus) == 0:
        raise HbpeError("patching.empty_corpus", "cannot train a scorer on no bytes")
    if not 0 <= order <= 4:
        raise HbpeError("patching.bad_order", f"order must be in [0, 4], got {order}")
    if smoothing < 0:
        raise HbpeError(
            "patching.bad_smoothing", f"smoothing must be >= 0, got {smoothing}"
        )
    order0 = Counter(corpus)
    context_counts: dict[bytes, Counter] = {}
    for i in range(order, len(corpus)):
        ctx = corpus[i - order:i]
        context_counts.setdefault(ctx, Counter())[corpus[i]] += 1
    if order == 0:
        context_counts = {b"": order0}
    return NgramEntropyScorer(order, smoothing, context_counts, order0)


def save_scorer(scorer: NgramEntropyScorer, path: str | os.PathLike) -> None:
    lines = [
        f"{ENTROPY_HEADER_PREFIX} order={scorer.order} smoothing={scorer.smoothing!r}"
    ]
    for b in sorted(scorer.order0):
        lines.append(f"- {b} {scorer.order0[b]}")
    if scorer.order > 0:
        for ctx in sorted(scorer.context_counts):
            for b in sorted(scorer.context_counts[ctx]):
                lines.append(f"{ctx.hex()} {b} {scorer.context_counts[ctx][b]}")
    atomic_write_text(path, "\n".join(lines) + "\n")


def load_scorer(path: str | os.PathLike) -> NgramEntropyScorer:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        fields = header.split(" ")
        if fields[:2] != ENTROPY_HEADER_PREFIX.split(" ") or len(fields) != 4:
            raise HbpeError(
                "patching.bad_header", f"{path}: unrecognized header {header!r}"
            )
        try:
            meta = dict(f.split("=", 1) for f in fields[2:])
            order = int(meta["order"])
            smoothing = float(meta["smoothing"])
        except (KeyError, ValueError):
            raise HbpeError(
                "patching.bad_header", f"{path}: malformed header {header!r}"
            ) from None
        order0: Counter = Counter()
        context_counts: dict[bytes, Counter] = {}
        for lineno, line in enumerate(fh, 2):
            line = line.strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 3:
                raise HbpeError(
                    "patching.bad_line", f"{path}:{lineno}: cannot parse {line!r}"
                )
            ctx_hex, byte_s, count_s = parts
            try:
                byte, count = int(byte_s), int(count_s)
                if ctx_hex == "-":
                    order0[byte] += count
                else:
                    ctx = bytes.fromhex(ctx_hex)
                    context_counts.setdefault(ctx, Counter())[byte] += count
            except ValueError:
                raise HbpeError(
                    "patching.bad_line", f"{path}:{lineno}: cannot parse {line!r}"
                ) from None
    if order == 0:
        context_counts = {b"": order0}
    return NgramEntropyScorer(order, smoothing, context_counts, order0)


# --- statistics ------------------------------------------------------------


@dataclass(frozen=True)
class PatchStats:
    """Byte accounting for one patching of one input.

    avg_patch_len and fertility are None when undefined (no patches, or no
    words to divide by).
    """

    patch_count: int
    byte_count: int
    avg_patch_len: float | None
    histogram: dict[int, int]
    fertility: float | None

    @property
    def defined(self) -> bool:
        return self.avg_patch_len is not None


def stats(b: Boundaries, word_count: int) -> PatchStats:
    lengths = b.lengths()
    hist = dict(sorted(Counter(lengths).items()))
    if b.patch_count == 0:
        return PatchStats(0, 0, None, {}, None)
    avg = b.byte_count / b.patch_count
    fert = b.patch_count / word_count if word_count > 0 else None
    return PatchStats(b.patch_count, b.byte_count, avg, hist, fert)


@dataclass(frozen=True)
class HierPatchStats:
    """Two labeled accountings for two-stage BPE patches.

    Content bytes per patch compares against plain byte-per-token averages;
    symbols per patch (after second-stage compression, marker included) is
    what the local models actually see.
    """

    patch_count: int
    content_byte_count: int
    symbol_count: int
    word_count: int

    @property
    def avg_content_bytes(self) -> float | None:
        return self.content_byte_count / self.patch_count if self.patch_count else None

    @property
    def avg_bytes_with_marker(self) -> float | None:
        if not self.patch_count:
            return None
        return (self.content_byte_count + self.patch_count) / self.patch_count

    @property
    def avg_symbols(self) -> float | None:
        return self.symbol_count / self.patch_count if self.patch_count else None

    @property
    def fertility(self) -> float | None:
        return self.patch_count / self.word_count if self.word_count else None


def hier_patch_stats(data: bytes, vocab, patch_table) -> HierPatchStats:
    """Patch statistics for the two-stage tokenizer on one input."""
    token_ids = vocab.encode(data)
    symbols = 0
    for tid in token_ids:
        patch = patch_table.patches.get(tid)
        if patch is None:
            raise HbpeError(
                "stage2.unknown_token", f"token {tid} missing from the patch table"
            )
        symbols += len(patch)
    return HierPatchStats(
        patch_count=len(token_ids),
        content_byte_count=len(data),
        symbol_count=symbols,
        word_count=count_words(data),
    )
