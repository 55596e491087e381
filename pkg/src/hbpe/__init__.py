"""Two-stage hierarchical byte-pair encoding toolkit.

Stage 1 is a byte-level BPE tokenizer (trainable, GPT-2 file compatible).
Stage 2 recompresses each token's bytes plus an end-of-patch marker into a
patch of bounded length, so downstream models consume fixed-width rows with
a compact symbol alphabet. Alongside the tokenizer live the competing
patching baselines (space, entropy, fixed), bits-per-byte and fertility
metrics, a forward-pass FLOPs estimator, and a padded batch emitter.
"""

from .bpe import (
    FirstStageVocab,
    length_quantile,
    load_external,
    load_gpt2,
    load_internal,
    max_token_length,
    save_gpt2,
    save_internal,
    token_length_histogram,
    train_bpe,
)
from .corpus import (
    BatchHeader,
    BatchSummary,
    CorpusStats,
    check_rows,
    corpus_stats,
    decode_batches,
    emit_batches,
    read_batches,
    read_corpus,
    row_to_patch,
)
from .errors import HbpeError
from .hier import (
    MARKER,
    MergeTable,
    PatchTable,
    decode_patch,
    encode_patches,
    load_stage2,
    most_freq_pair,
    pad_patch,
    save_stage2,
    train_hier_bpe,
)
from .metrics import (
    FlopsConfig,
    ModelDims,
    NllRecord,
    bits_per_token,
    bpb,
    fertility,
    flops_config_from_dict,
    format_report,
    hierarchical_flops,
    hierarchical_flops_terms,
    transformer_flops,
    write_report,
)
from .patching import (
    Boundaries,
    HierPatchStats,
    NgramEntropyScorer,
    PatchStats,
    entropy_patch,
    fixed_patch,
    hier_patch_stats,
    load_scorer,
    save_scorer,
    space_patch,
    stats,
    train_entropy_scorer,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "HbpeError",
    "MARKER",
    # stage 1
    "FirstStageVocab",
    "train_bpe",
    "load_gpt2",
    "load_external",
    "save_gpt2",
    "load_internal",
    "save_internal",
    "token_length_histogram",
    "max_token_length",
    "length_quantile",
    # stage 2
    "MergeTable",
    "PatchTable",
    "train_hier_bpe",
    "most_freq_pair",
    "encode_patches",
    "decode_patch",
    "pad_patch",
    "save_stage2",
    "load_stage2",
    # patching strategies
    "Boundaries",
    "space_patch",
    "entropy_patch",
    "fixed_patch",
    "NgramEntropyScorer",
    "train_entropy_scorer",
    "save_scorer",
    "load_scorer",
    "stats",
    "PatchStats",
    "HierPatchStats",
    "hier_patch_stats",
    # metrics
    "NllRecord",
    "bpb",
    "bits_per_token",
    "fertility",
    "transformer_flops",
    "ModelDims",
    "FlopsConfig",
    "flops_config_from_dict",
    "hierarchical_flops",
    "hierarchical_flops_terms",
    "format_report",
    "write_report",
    # corpus and batches
    "CorpusStats",
    "corpus_stats",
    "read_corpus",
    "BatchHeader",
    "BatchSummary",
    "emit_batches",
    "read_batches",
    "decode_batches",
    "check_rows",
    "row_to_patch",
]
