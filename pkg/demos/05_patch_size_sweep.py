"""Sweep the patch bound S and watch the compression trade-off.

Smaller S forces more second-stage merges (a larger symbol alphabet) to
squeeze every token under the bound; larger S needs fewer merges but hands
longer rows to the local models. The average bytes per patch never moves:
that is fixed by the first-stage tokenizer alone.
"""

from hbpe import hier_patch_stats, train_bpe, train_hier_bpe

corpus = (
    b"sphinx of black quartz, judge my vow. "
    b"the five boxing wizards jump quickly. "
) * 80

vocab = train_bpe(corpus, 500, pretokenize="whitespace")
print(f"stage-1 vocab {vocab.vocab_size}, corpus {len(corpus)} bytes\n")
print(f"{'S':>3} {'merges':>7} {'v_prime':>8} {'avg symbols':>12} "
      f"{'avg bytes':>10} {'max len':>8}")

for s in range(3, 13):
    table, patches = train_hier_bpe(vocab, s)
    h = hier_patch_stats(corpus, vocab, patches)
    longest = max(len(p) for p in patches.patches.values())
    print(f"{s:>3} {len(table.merges):>7} {table.v_prime:>8} "
          f"{h.avg_symbols:>12.4f} {h.avg_content_bytes:>10.4f} {longest:>8}")

print("\nsame sweep via the CLI: "
      "hbpe sweep-s --stage1 tok.stage1 --corpus corpus.txt --from 3 --to 12")
