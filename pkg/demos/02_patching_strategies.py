"""Compare the dynamic grouping strategies on one corpus.

Space patching cuts after whitespace (capped), entropy patching cuts where
the next byte surprises an n-gram model, fixed patching cuts every k bytes,
and the two-stage BPE groups bytes by token. All produce comparable
average-patch-length and fertility numbers.
"""

from hbpe import (
    entropy_patch,
    fixed_patch,
    hier_patch_stats,
    space_patch,
    stats,
    train_bpe,
    train_entropy_scorer,
    train_hier_bpe,
)
from hbpe._util import count_words

corpus = (
    b"a sentence with small and large words appears here. "
    b"entropy spikes at rare transitions; spaces are cheap cues. "
) * 60

words = count_words(corpus)
print(f"corpus: {len(corpus)} bytes, {words} words\n")
print(f"{'strategy':<22} {'patches':>8} {'avg len':>9} {'fertility':>10}")

b = space_patch(corpus, max_size=6)
s = stats(b, words)
print(f"{'space (cap 6)':<22} {s.patch_count:>8} {s.avg_patch_len:>9.3f} {s.fertility:>10.3f}")

scorer = train_entropy_scorer(corpus, order=2, smoothing=0.01)
for cap, label in ((6, "entropy (cap 6)"), (None, "entropy (unbounded)")):
    b = entropy_patch(corpus, scorer, threshold=1.5, max_size=cap)
    s = stats(b, words)
    print(f"{label:<22} {s.patch_count:>8} {s.avg_patch_len:>9.3f} {s.fertility:>10.3f}")

b = fixed_patch(corpus, k=4)
s = stats(b, words)
print(f"{'fixed (k=4)':<22} {s.patch_count:>8} {s.avg_patch_len:>9.3f} {s.fertility:>10.3f}")

vocab = train_bpe(corpus, 400, pretokenize="whitespace")
_, patches = train_hier_bpe(vocab, 6)
h = hier_patch_stats(corpus, vocab, patches)
print(f"{'bpe patches (S=6)':<22} {h.patch_count:>8} {h.avg_content_bytes:>9.3f} {h.fertility:>10.3f}")

print("\nthe bpe row has two more accountings:")
print(f"  bytes + marker per patch : {h.avg_bytes_with_marker:.3f}")
print(f"  symbols per patch (S=6)  : {h.avg_symbols:.3f}  "
      "(what the local models actually see)")
