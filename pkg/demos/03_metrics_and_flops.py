"""Unit-safe BPB arithmetic and the three-part FLOPs estimate.

Bits per byte is segmentation-invariant: the same total information
content divided by raw bytes, whatever the tokenizer did. The FLOPs model
splits a forward pass into per-patch encoder/decoder work plus the large
causal model over patch positions, making the patch-length and
vocabulary-size trade-offs visible.
"""

import math

from hbpe import (
    FlopsConfig,
    ModelDims,
    NllRecord,
    bits_per_token,
    bpb,
    fertility,
    hierarchical_flops_terms,
    transformer_flops,
)

print("=== bits per byte ===")
r = NllRecord(total_nll=5400.0, unit="nats", byte_count=4096, token_count=1000)
print(f"{r.total_nll} nats over {r.byte_count} bytes -> bpb {bpb(r):.4f}")
print(f"bits/token {bits_per_token(r):.4f}")
lhs = bits_per_token(r) * r.token_count
rhs = bpb(r) * r.byte_count
print(f"identity bits/token*tokens == bpb*bytes: {lhs:.6f} == {rhs:.6f}")
print(f"fertility at 800 words: {fertility(r.token_count, 800):.3f}")

print("\n=== single-transformer FLOPs ===")
print("hand-checkable case n_ctx=4 d=2 ffn=4 layers=1 V=3:",
      transformer_flops(4, 2, 4, 1, 3))

print("\n=== hierarchical forward pass ===")


def config(avg_patch_len: float, v_prime: int) -> FlopsConfig:
    return FlopsConfig(
        enc=ModelDims(layers=3, hidden=512, ffn=512, heads=8),
        dec=ModelDims(layers=3, hidden=512, ffn=512, heads=8),
        latent=ModelDims(layers=12, hidden=768, ffn=2048, heads=12),
        v_prime=v_prime,
        avg_patch_len=avg_patch_len,
        total_bytes=1 << 22,
    )


print(f"{'p':>5} {'v_prime':>8} {'encoder':>12} {'decoder':>12} {'latent':>12} {'total':>13}")
for p in (2.0, 4.13, 8.0):
    t = hierarchical_flops_terms(config(p, 300))
    print(f"{p:>5} {300:>8} {t['encoder']:>12.3e} {t['decoder']:>12.3e} "
          f"{t['latent']:>12.3e} {t['total']:>13.3e}")

# longer patches shrink the latent term (fewer positions for the big model)
print("\nvocabulary scaling: only the decoder logit term moves")
for v in (300, 3000, 30000):
    t = hierarchical_flops_terms(config(4.0, v))
    print(f"  v'={v:<6} decoder {t['decoder']:.3e}  latent {t['latent']:.3e}")

base = [hierarchical_flops_terms(config(4.0, v))["total"] for v in (1000, 2000, 3000)]
assert math.isclose(base[2] - base[1], base[1] - base[0])
print("total grows exactly linearly in v'.")
