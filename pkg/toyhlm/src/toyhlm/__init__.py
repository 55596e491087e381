"""Desk-scale hierarchical language model over bounded patch batches.

Consumes the tokenizer toolkit's batch files (binary "HBPB" layout) and
stage-2 artifacts (versioned text), trains a three-part model (per-patch
encoder, causal latent transformer, per-patch decoder), and reports
bits per byte against a closed-form uniform baseline.
"""

from .batchfile import BatchHeader, MARKER, read_batchfile, validate_rows
from .errors import ToyError
from .model import Block, HierModel, ToyConfig, prediction_mask
from .stage2 import Stage2Info, content_byte_count, read_stage2
from .train import (
    ToyReport,
    bpb_from_nats,
    evaluate_nll,
    format_report,
    train_and_eval,
    uniform_bpb,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "ToyError",
    "MARKER",
    "BatchHeader",
    "read_batchfile",
    "validate_rows",
    "Stage2Info",
    "read_stage2",
    "content_byte_count",
    "ToyConfig",
    "HierModel",
    "Block",
    "prediction_mask",
    "ToyReport",
    "train_and_eval",
    "evaluate_nll",
    "bpb_from_nats",
    "uniform_bpb",
    "format_report",
]
