"""Training and evaluation over a batch file, with bits-per-byte reporting.

The evaluation normalizer is the raw byte count represented by the rows
(content symbols expanded through the stage-2 merge artifact); markers and
padding never count as bytes. The bits-per-byte expression matches the
tokenizer toolkit's metrics definition operation for operation, so both
report identical values for identical inputs.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field

import numpy as np
import torch

from .batchfile import BatchHeader, read_batchfile, validate_rows
from .errors import ToyError
from .model import HierModel, ToyConfig
from .stage2 import Stage2Info, content_byte_count, read_stage2


def bpb_from_nats(total_nll_nats: float, byte_count: int) -> float:
    """Bits per byte; the same two-step expression the metrics module uses."""
    if byte_count <= 0:
        raise ToyError("train.zero_bytes", "byte_count must be positive")
    bits = total_nll_nats / math.log(2)
    return bits / byte_count


def uniform_bpb(predicted_symbols: int, v_prime: int, byte_count: int) -> float:
    """Closed-form baseline: uniform logits spend log2(v') bits per predicted
    symbol (content plus marker), normalized by raw bytes."""
    return predicted_symbols * math.log2(v_prime) / byte_count


@dataclass
class ToyReport:
    steps: int
    seed: int
    max_patch_len: int
    v_prime: int
    row_count: int
    predicted_symbols: int
    byte_count: int
    avg_patch_len: float
    total_nll_nats: float
    bpb: float
    uniform_baseline_bpb: float
    loss_curve: list[float] = field(repr=False)

    def report_fields(self) -> dict:
        return {
            "strategy": "toy-hier-model",
            "S": self.max_patch_len,
            "avg_patch_len": self.avg_patch_len,
            "fertility": None,
            "bpb": self.bpb,
            "flops": None,
            "uniform_baseline_bpb": self.uniform_baseline_bpb,
            "total_nll_nats": self.total_nll_nats,
            "byte_count": self.byte_count,
            "predicted_symbols": self.predicted_symbols,
            "steps": self.steps,
            "seed": self.seed,
            "v_prime": self.v_prime,
        }


def _check_consistency(header: BatchHeader, info: Stage2Info) -> None:
    if (
        header.max_patch_len != info.max_patch_len
        or header.v_prime != info.v_prime
        or header.pad_id != info.pad_id
    ):
        raise ToyError(
            "train.artifact_mismatch",
            f"batch header (S={header.max_patch_len}, v'={header.v_prime}) does "
            f"not match stage-2 artifact (S={info.max_patch_len}, v'={info.v_prime})",
        )


def evaluate_nll(model: HierModel, rows: torch.Tensor, ctx: int) -> tuple[float, int]:
    """Summed NLL in nats over all rows, in sequential windows of ctx."""
    total = torch.zeros((), dtype=torch.float64)
    symbols = 0
    model.eval()
    with torch.no_grad():
        for begin in range(0, rows.shape[0], ctx):
            window = rows[begin:begin + ctx].unsqueeze(0)
            nll, count = model.loss_sum(window)
            total += nll.double()
            symbols += count
    return float(total), symbols


def train_and_eval(
    batch_path: str | os.PathLike,
    stage2_path: str | os.PathLike,
    steps: int,
    seed: int,
    cfg: ToyConfig | None = None,
    report_path: str | os.PathLike | None = None,
    json_path: str | os.PathLike | None = None,
    curve_path: str | os.PathLike | None = None,
) -> ToyReport:
    cfg = cfg or ToyConfig()
    header, rows_np = read_batchfile(batch_path)
    info = read_stage2(stage2_path)
    _check_consistency(header, info)
    if header.row_count == 0:
        raise ToyError("train.empty_batch", f"{batch_path} holds no rows")

    marker_col = validate_rows(rows_np, header)
    byte_count = content_byte_count(rows_np, marker_col, info)
    avg_patch_len = byte_count / header.row_count

    torch.manual_seed(seed)
    model = HierModel(header.v_prime, header.max_patch_len, cfg)
    rows = torch.from_numpy(np.ascontiguousarray(rows_np))
    ctx = min(cfg.context_patches, rows.shape[0])
    optimizer = torch.optim.Adam(model.parameters(), lr=cfg.lr)
    sampler = torch.Generator().manual_seed(seed)

    curve: list[float] = []
    model.train()
    for step in range(steps):
        starts = torch.randint(
            0, rows.shape[0] - ctx + 1, (cfg.batch_windows,), generator=sampler
        )
        batch = torch.stack([rows[s:s + ctx] for s in starts])
        nll, count = model.loss_sum(batch)
        loss = nll / count
        if not torch.isfinite(loss):
            raise ToyError("train.diverged", f"non-finite loss at step {step}")
        optimizer.zero_grad()
        loss.backward()
        optimizer.step()
        curve.append(float(loss.detach()))

    total_nll, predicted = evaluate_nll(model, rows, ctx)
    report = ToyReport(
        steps=steps,
        seed=seed,
        max_patch_len=header.max_patch_len,
        v_prime=header.v_prime,
        row_count=header.row_count,
        predicted_symbols=predicted,
        byte_count=byte_count,
        avg_patch_len=avg_patch_len,
        total_nll_nats=total_nll,
        bpb=bpb_from_nats(total_nll, byte_count),
        uniform_baseline_bpb=uniform_bpb(predicted, header.v_prime, byte_count),
        loss_curve=curve,
    )
    if report_path is not None:
        _write_text(report_path, format_report(report.report_fields()))
    if json_path is not None:
        _write_text(json_path, json.dumps(report.report_fields(), indent=2, sort_keys=True) + "\n")
    if curve_path is not None:
        lines = [f"{i} {v:.8f}" for i, v in enumerate(report.loss_curve)]
        _write_text(curve_path, "\n".join(lines) + "\n")
    return report


def format_report(fields: dict) -> str:
    lines = []
    for key, value in fields.items():
        if value is None:
            value = "na"
        elif isinstance(value, float):
            value = f"{value:.6f}"
        lines.append(f"{key}={value}")
    return "\n".join(lines) + "\n"


def _write_text(path: str | os.PathLike, text: str) -> None:
    tmp = f"{os.fspath(path)}.tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, path)
