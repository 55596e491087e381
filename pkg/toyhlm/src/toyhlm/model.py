"""Hierarchical language model over padded patch rows.

Three parts, mirroring the tokenizer's structure: a small per-patch encoder
pools each row into one vector (taken at the end-of-patch marker, which
under causal attention has seen the whole patch); a causal latent
transformer turns the patch-vector sequence into states that only see
strictly earlier patches (the first state comes from a learned start
vector); a small decoder predicts each patch's symbols left to right,
teacher-forced, with the previous latent state added to every position.

All attention is causal, so the probes in the tests can demand exact
(bitwise) invariance at non-descendant positions rather than tolerances.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch
import torch.nn.functional as F
from torch import nn

from .batchfile import MARKER
from .errors import ToyError


@dataclass
class ToyConfig:
    """Desk-scale defaults; larger table-style shapes load via the fields."""

    d_local: int = 64
    d_latent: int = 64
    heads: int = 2
    enc_layers: int = 2
    dec_layers: int = 2
    latent_layers: int = 2
    ffn_mult: int = 2
    context_patches: int = 16
    batch_windows: int = 8
    max_patches: int = 512
    lr: float = 3e-3
    dtype: str = "float32"

    def torch_dtype(self) -> torch.dtype:
        return {"float32": torch.float32, "float64": torch.float64}[self.dtype]


class Block(nn.Module):
    """Pre-norm causal self-attention block."""

    def __init__(self, d: int, heads: int, ffn: int):
        super().__init__()
        if d % heads != 0:
            raise ToyError("model.bad_heads", f"hidden {d} not divisible by {heads} heads")
        self.heads = heads
        self.ln1 = nn.LayerNorm(d)
        self.ln2 = nn.LayerNorm(d)
        self.qkv = nn.Linear(d, 3 * d)
        self.proj = nn.Linear(d, d)
        self.up = nn.Linear(d, ffn)
        self.down = nn.Linear(ffn, d)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        b, t, d = x.shape
        h = self.heads
        q, k, v = self.qkv(self.ln1(x)).split(d, dim=2)
        q = q.view(b, t, h, d // h).transpose(1, 2)
        k = k.view(b, t, h, d // h).transpose(1, 2)
        v = v.view(b, t, h, d // h).transpose(1, 2)
        scores = q @ k.transpose(-2, -1) / (d // h) ** 0.5
        causal = torch.ones(t, t, dtype=torch.bool, device=x.device).tril()
        scores = scores.masked_fill(~causal, float("-inf"))
        att = torch.softmax(scores, dim=-1)
        out = (att @ v).transpose(1, 2).reshape(b, t, d)
        x = x + self.proj(out)
        x = x + self.down(F.gelu(self.up(self.ln2(x))))
        return x


class HierModel(nn.Module):
    def __init__(self, v_prime: int, max_patch_len: int, cfg: ToyConfig):
        super().__init__()
        self.v_prime = v_prime
        self.s = max_patch_len
        self.cfg = cfg
        d, dl = cfg.d_local, cfg.d_latent
        ffn = cfg.ffn_mult * d
        ffn_lat = cfg.ffn_mult * dl
        # encoder: pad id (= v_prime) must be embeddable, hence +1
        self.emb_enc = nn.Embedding(v_prime + 1, d)
        self.pos_enc = nn.Parameter(torch.zeros(max_patch_len, d))
        self.enc_blocks = nn.ModuleList(
            Block(d, cfg.heads, ffn) for _ in range(cfg.enc_layers)
        )
        self.enc_ln = nn.LayerNorm(d)
        self.enc_out = nn.Linear(d, dl)
        # latent transformer with a learned start state
        self.start = nn.Parameter(torch.zeros(dl))
        self.pos_lat = nn.Parameter(torch.zeros(cfg.max_patches, dl))
        self.lat_blocks = nn.ModuleList(
            Block(dl, cfg.heads, ffn_lat) for _ in range(cfg.latent_layers)
        )
        self.lat_ln = nn.LayerNorm(dl)
        # decoder: previous latent state is added at every position
        self.cond = nn.Linear(dl, d)
        self.emb_dec = nn.Embedding(v_prime + 1, d)
        self.bos = nn.Parameter(torch.zeros(d))
        self.pos_dec = nn.Parameter(torch.zeros(max_patch_len, d))
        self.dec_blocks = nn.ModuleList(
            Block(d, cfg.heads, ffn) for _ in range(cfg.dec_layers)
        )
        self.dec_ln = nn.LayerNorm(d)
        self.head = nn.Linear(d, v_prime)
        self._init_weights()
        self.to(cfg.torch_dtype())

    def _init_weights(self) -> None:
        for p in (self.pos_enc, self.pos_lat, self.pos_dec, self.start, self.bos):
            nn.init.normal_(p, std=0.02)

    def encode_rows(self, rows: torch.Tensor) -> torch.Tensor:
        """Rows (B, T, S) -> one embedding per patch (B, T, d_latent).

        Patches are encoded independently; pooling reads the hidden state at
        the marker position, which causal attention restricts to the patch's
        own symbols (padding sits after the marker and cannot leak in).
        """
        if int(rows.max()) > self.v_prime:
            raise ToyError(
                "model.bad_symbol", f"symbol {int(rows.max())} outside alphabet"
            )
        b, t, s = rows.shape
        flat = rows.reshape(b * t, s)
        x = self.emb_enc(flat) + self.pos_enc[:s]
        for block in self.enc_blocks:
            x = block(x)
        x = self.enc_ln(x)
        marker_idx = (flat == MARKER).int().argmax(dim=1)
        pooled = x[torch.arange(b * t, device=x.device), marker_idx]
        return self.enc_out(pooled).reshape(b, t, -1)

    def latent_forward(self, e: torch.Tensor) -> torch.Tensor:
        """Patch embeddings (B, T, d) -> states (B, T, d); state t sees only
        embeddings of patches strictly before t."""
        b, t, dl = e.shape
        if t > self.cfg.max_patches:
            raise ToyError(
                "model.context_too_long",
                f"{t} patches exceed max_patches={self.cfg.max_patches}",
            )
        start = self.start.expand(b, 1, dl)
        z = torch.cat([start, e[:, :-1]], dim=1) + self.pos_lat[:t]
        for block in self.lat_blocks:
            z = block(z)
        return self.lat_ln(z)

    def decode_rows(self, rows: torch.Tensor, h: torch.Tensor) -> torch.Tensor:
        """Teacher-forced next-symbol logits (B, T, S, v_prime).

        Position s is predicted from the patch's symbols before s (shifted
        inputs, learned start-of-patch vector at s=0) plus the previous
        latent state, projected and added everywhere.
        """
        b, t, s = rows.shape
        shifted = self.emb_dec(rows[:, :, :-1])
        bos = self.bos.expand(b, t, 1, -1)
        x = torch.cat([bos, shifted], dim=2) + self.pos_dec[:s]
        x = x + self.cond(h).unsqueeze(2)
        x = x.reshape(b * t, s, -1)
        for block in self.dec_blocks:
            x = block(x)
        logits = self.head(self.dec_ln(x))
        return logits.reshape(b, t, s, self.v_prime)

    def forward(self, rows: torch.Tensor) -> torch.Tensor:
        e = self.encode_rows(rows)
        h = self.latent_forward(e)
        return self.decode_rows(rows, h)

    def loss_sum(self, rows: torch.Tensor) -> tuple[torch.Tensor, int]:
        """Summed NLL in nats over content and marker positions (pads are
        excluded from the loss), plus the number of predicted symbols."""
        logits = self(rows)
        mask = prediction_mask(rows)
        picked = logits[mask]
        targets = rows[mask]
        nll = F.cross_entropy(picked, targets, reduction="sum")
        return nll, int(mask.sum())


def prediction_mask(rows: torch.Tensor) -> torch.Tensor:
    """True at every predicted position: content symbols and the marker."""
    marker_idx = (rows == MARKER).int().argmax(dim=-1, keepdim=True)
    positions = torch.arange(rows.shape[-1], device=rows.device)
    return positions <= marker_idx
