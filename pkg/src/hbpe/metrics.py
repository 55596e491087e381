"""Unit-safe evaluation metrics and forward-pass FLOPs estimates.

Negative log-likelihoods carry an explicit unit tag (bits or nats) so the
bits-per-byte conversion can never silently mix bases. The FLOPs model uses
one fixed closed form per transformer (d_attn = d_model, embeddings free),
applied to the local encoder, local decoder, and the large causal model
over patch positions.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass

from ._util import atomic_write_text
from .errors import HbpeError

LN2 = math.log(2.0)


@dataclass(frozen=True)
class NllRecord:
    """Total NLL of one evaluation, with the counts needed to normalize it."""

    total_nll: float
    unit: str  # "bits" or "nats"
    byte_count: int
    token_count: int
    word_count: int = 0

    def __post_init__(self) -> None:
        if self.unit not in ("bits", "nats"):
            raise HbpeError(
                "metrics.bad_unit", f"unit must be 'bits' or 'nats', got {self.unit!r}"
            )
        if self.total_nll < 0:
            raise HbpeError("metrics.negative_nll", "total_nll must be >= 0")

    @property
    def total_bits(self) -> float:
        return self.total_nll if self.unit == "bits" else self.total_nll / LN2


def bpb(r: NllRecord) -> float:
    """Bits per byte: total information content over raw byte count."""
    if r.byte_count <= 0:
        raise HbpeError("metrics.zero_bytes", "byte_count must be positive")
    return r.total_bits / r.byte_count


def bits_per_token(r: NllRecord) -> float:
    if r.token_count <= 0:
        raise HbpeError("metrics.zero_tokens", "token_count must be positive")
    return r.total_bits / r.token_count


def fertility(token_count: int, word_count: int) -> float:
    """Tokens per word; the compression seen by the model over patches."""
    if word_count <= 0:
        raise HbpeError("metrics.zero_words", "word_count must be positive")
    return token_count / word_count


def transformer_flops(n_ctx, d_model, d_ffn, n_layer, vocab) -> float:
    """Forward-pass FLOPs of one decoder-only transformer.

    Per layer: 8*d^2 for QKV and output projections, 4*d*d_ffn for the two
    feed-forward matmuls, 2*n_ctx*d for the attention score/value products;
    plus 2*d*vocab for the output logits. Embedding lookups count as zero.
    This decomposition is the fixed contract; n_ctx may be fractional when
    it stands for an average patch length.
    """
    for name, v in (
        ("n_ctx", n_ctx),
        ("d_model", d_model),
        ("d_ffn", d_ffn),
        ("n_layer", n_layer),
        ("vocab", vocab),
    ):
        if v < 0:
            raise HbpeError("metrics.negative_dim", f"{name} must be >= 0, got {v}")
    per_layer = 8 * d_model * d_model + 4 * d_model * d_ffn + 2 * n_ctx * d_model
    return n_ctx * (n_layer * per_layer + 2 * d_model * vocab)


@dataclass(frozen=True)
class ModelDims:
    layers: int
    hidden: int
    ffn: int
    heads: int = 1


@dataclass(frozen=True)
class FlopsConfig:
    """Dimensions of the three submodels plus the patching statistics."""

    enc: ModelDims
    dec: ModelDims
    latent: ModelDims
    v_prime: int
    avg_patch_len: float
    total_bytes: int

    def __post_init__(self) -> None:
        if self.avg_patch_len <= 0:
            raise HbpeError(
                "metrics.bad_patch_len",
                f"avg_patch_len must be positive, got {self.avg_patch_len}",
            )
        if self.total_bytes <= 0:
            raise HbpeError(
                "metrics.bad_byte_count",
                f"total_bytes must be positive, got {self.total_bytes}",
            )


def hierarchical_flops_terms(c: FlopsConfig) -> dict[str, float]:
    """Encoder, decoder and latent FLOPs terms, plus their total.

    The patch count T is ceil(total_bytes / avg_patch_len). The encoder and
    decoder run once per patch over avg_patch_len positions; only the
    decoder pays for logits over the v_prime symbol alphabet. The latent
    model runs once over all T patch positions with no logit term.
    """
    p = c.avg_patch_len
    t = math.ceil(c.total_bytes / p)
    enc = t * transformer_flops(p, c.enc.hidden, c.enc.ffn, c.enc.layers, 0)
    dec = t * transformer_flops(p, c.dec.hidden, c.dec.ffn, c.dec.layers, c.v_prime)
    latent = transformer_flops(t, c.latent.hidden, c.latent.ffn, c.latent.layers, 0)
    return {
        "patch_positions": t,
        "encoder": enc,
        "decoder": dec,
        "latent": latent,
        "total": enc + dec + latent,
    }


def hierarchical_flops(c: FlopsConfig) -> float:
    return hierarchical_flops_terms(c)["total"]


def flops_config_from_dict(raw: dict) -> FlopsConfig:
    """Build a FlopsConfig from parsed JSON (the CLI's config file schema)."""
    try:
        def dims(d: dict) -> ModelDims:
            return ModelDims(
                layers=int(d["layers"]),
                hidden=int(d["hidden"]),
                ffn=int(d["ffn"]),
                heads=int(d.get("heads", 1)),
            )

        return FlopsConfig(
            enc=dims(raw["enc"]),
            dec=dims(raw["dec"]),
            latent=dims(raw["latent"]),
            v_prime=int(raw["v_prime"]),
            avg_patch_len=float(raw["avg_patch_len"]),
            total_bytes=int(raw["total_bytes"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise HbpeError(
            "metrics.bad_flops_config", f"flops config missing or malformed: {exc}"
        ) from None


# --- report emission --------------------------------------------------------

REPORT_FIELDS = ("strategy", "S", "avg_patch_len", "fertility", "bpb", "flops")


def format_report(fields: dict) -> str:
    """Line-oriented key=value report; None renders as 'na'."""
    lines = []
    for key, value in fields.items():
        if value is None:
            value = "na"
        elif isinstance(value, float):
            value = f"{value:.6f}"
        lines.append(f"{key}={value}")
    return "\n".join(lines) + "\n"


def write_report(
    fields: dict,
    text_path: str | os.PathLike | None = None,
    json_path: str | os.PathLike | None = None,
) -> str:
    """Emit the report as key=value text and/or a JSON document."""
    text = format_report(fields)
    if text_path is not None:
        atomic_write_text(text_path, text)
    if json_path is not None:
        atomic_write_text(json_path, json.dumps(fields, indent=2, sort_keys=True) + "\n")
    return text
