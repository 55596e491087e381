"""Walk through the two tokenization stages on a small corpus.

Stage 1 learns ordinary byte-level BPE merges. Stage 2 takes each token's
byte sequence, appends the end-of-patch marker 256, and keeps merging the
most frequent pair across all still-too-long tokens until every patch fits
in S symbols. Encoding afterwards is a table lookup per token.
"""

from hbpe import (
    decode_patch,
    encode_patches,
    token_length_histogram,
    train_bpe,
    train_hier_bpe,
)

corpus = (
    b"this is a test! this is only a test. "
    b"testing tokenizers is thirsty work. "
) * 40

print("=== stage 1: byte-level BPE ===")
vocab = train_bpe(corpus, target_vocab_size=300, pretokenize="whitespace")
print(f"vocabulary size {vocab.vocab_size}, merges {len(vocab.merges)}")
print("first merges:", [(l, r, n) for l, r, n in vocab.merges[:5]])
print("longest learned tokens:",
      sorted((b for b in vocab.token_bytes.values() if len(b) > 1), key=len)[-5:])
hist = token_length_histogram(vocab)
print("token length histogram:", hist)

sample = b"this is a test!"
ids = vocab.encode(sample)
print(f"\nencode {sample!r} -> {ids}")
print("tokens:", [vocab.token_bytes[i] for i in ids])
assert vocab.decode(ids) == sample

print("\n=== stage 2: compress tokens into bounded patches ===")
S = 6
table, patches = train_hier_bpe(vocab, S)
print(f"S={S}: {len(table.merges)} second-stage merges, "
      f"alphabet v'={table.v_prime}, pad id {patches.pad_id}")

out = encode_patches(sample, vocab, patches)
print(f"\npatches for {sample!r}:")
for patch in out:
    print(f"  {list(patch)}  ->  {decode_patch(patch, table)!r}")
assert b"".join(decode_patch(p, table) for p in out) == sample

longest = max(len(p) for p in patches.patches.values())
print(f"\nevery patch ends with the marker 256 and fits in S={S} "
      f"(longest is {longest})")
