"""End-to-end batch emission: corpus -> padded rows on disk -> bytes back.

The batch file is the hand-off point to any model consumer: fixed-width
little-endian u32 rows, one marker-terminated patch per row, padding only
after the marker.
"""

import tempfile
from pathlib import Path

from hbpe import (
    corpus_stats,
    decode_batches,
    emit_batches,
    read_batches,
    train_bpe,
    train_hier_bpe,
)

corpus = (b"pack my box with five dozen liquor jugs. " * 50)
print("corpus stats:", corpus_stats(corpus))

vocab = train_bpe(corpus, 330, pretokenize="whitespace")
table, patches = train_hier_bpe(vocab, 6)

with tempfile.TemporaryDirectory() as td:
    out = Path(td) / "demo.hbpb"
    summary = emit_batches(corpus, vocab, patches, out)
    print(f"\nwrote {summary.row_count} rows, "
          f"avg {summary.avg_content_symbols:.3f} content symbols per row")
    print(f"file size: {out.stat().st_size} bytes")

    header, rows = read_batches(out)
    print(f"\nheader: {header}")
    print("first five rows (pad id", header.pad_id, "):")
    for row in rows[:5]:
        print(" ", row.tolist())

    restored = decode_batches(header, rows, table)
    assert restored == corpus
    print("\ndecoded rows reproduce the corpus byte for byte.")
