"""Command-line front end over the full pipeline.

Exit codes: 0 success, 2 usage error, 3 data error, 4 I/O error. Every run
prints a reproducibility line naming the tool version, the versioned
headers of all loaded artifacts, and the effective S. Artifact writes are
atomic (temp file + rename), so a failed run leaves no truncated outputs.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import __version__
from . import bpe, corpus, hier, metrics, patching
from .errors import HbpeError

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_IO = 4


def _repro_line(cmd: str, artifacts: list[str], s: int | None = None) -> None:
    parts = [f"tool=hbpe/{__version__}", f"cmd={cmd}"]
    if artifacts:
        parts.append("artifacts=" + ",".join(artifacts))
    if s is not None:
        parts.append(f"S={s}")
    parts.append("seed=none")
    print("# repro " + " ".join(parts))


def _add_stage1_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--stage1", help="internal stage-1 artifact file")
    p.add_argument("--vocab-json", help="GPT-2 convention vocab file")
    p.add_argument("--merges-txt", help="GPT-2 convention merges file")


def _load_stage1(args) -> tuple[bpe.FirstStageVocab, str]:
    if args.stage1:
        return bpe.load_internal(args.stage1), f"{bpe.STAGE1_HEADER}:{args.stage1}"
    if args.vocab_json and args.merges_txt:
        vocab = bpe.load_gpt2(args.vocab_json, args.merges_txt)
        return vocab, f"gpt2:{args.vocab_json}"
    raise HbpeError(
        "cli.missing_stage1",
        "provide --stage1 or both --vocab-json and --merges-txt",
        kind="usage",
    )


def cmd_train_bpe(args) -> int:
    data, cstats = corpus.read_corpus(args.corpus)
    vocab = bpe.train_bpe(data, args.vocab_size, args.pretokenize)
    if args.format == "gpt2":
        bpe.save_gpt2(vocab, f"{args.out_prefix}-vocab.json", f"{args.out_prefix}-merges.txt")
        written = [f"{args.out_prefix}-vocab.json", f"{args.out_prefix}-merges.txt"]
    else:
        bpe.save_internal(vocab, f"{args.out_prefix}.stage1")
        written = [f"{args.out_prefix}.stage1"]
    _repro_line("train-bpe", [])
    print(
        f"trained vocab_size={vocab.vocab_size} merges={len(vocab.merges)} "
        f"corpus_bytes={cstats.byte_count} pretokenize={args.pretokenize}"
    )
    for path in written:
        print(f"wrote {path}")
    return EXIT_OK


def cmd_train_hbpe(args) -> int:
    vocab, artifact = _load_stage1(args)
    weights = None
    if args.weight_corpus:
        data, _ = corpus.read_corpus([args.weight_corpus])
        counts: dict[int, int] = {}
        for tid in vocab.encode(data):
            counts[tid] = counts.get(tid, 0) + 1
        weights = counts
    table, patches = hier.train_hier_bpe(vocab, args.max_patch_len, weights)
    hier.save_stage2(table, patches, args.out)
    _repro_line("train-hbpe", [artifact], s=args.max_patch_len)
    print(
        f"trained S={args.max_patch_len} merges={len(table.merges)} "
        f"vprime={table.v_prime} pad={patches.pad_id} tokens={len(patches.patches)}"
    )
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_encode(args) -> int:
    vocab, artifact = _load_stage1(args)
    table, patches = hier.load_stage2(args.stage2)
    data, _ = corpus.read_corpus([args.input])
    out_lines = [
        " ".join(str(s) for s in patch)
        for patch in hier.encode_patches(data, vocab, patches)
    ]
    from ._util import atomic_write_text

    atomic_write_text(args.out, "\n".join(out_lines) + ("\n" if out_lines else ""))
    _repro_line("encode", [artifact, f"stage2:{args.stage2}"], s=patches.max_patch_len)
    print(f"encoded {len(data)} bytes into {len(out_lines)} patches")
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_decode(args) -> int:
    table, patches = hier.load_stage2(args.stage2)
    with open(args.input, encoding="utf-8") as fh:
        chunks = []
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                patch = [int(x) for x in line.split()]
            except ValueError:
                raise HbpeError(
                    "cli.bad_patch_line", f"{args.input}:{lineno}: cannot parse {line!r}"
                ) from None
            chunks.append(hier.decode_patch(patch, table))
    from ._util import atomic_write_bytes

    atomic_write_bytes(args.out, b"".join(chunks))
    _repro_line("decode", [f"stage2:{args.stage2}"], s=patches.max_patch_len)
    print(f"decoded {len(chunks)} patches")
    print(f"wrote {args.out}")
    return EXIT_OK


def _strategy_report(args) -> dict:
    data, cstats = corpus.read_corpus(args.corpus)
    fields: dict = {
        "strategy": args.strategy,
        "S": None,
        "byte_count": cstats.byte_count,
        "word_count": cstats.word_count,
    }
    if args.strategy == "bpe":
        if not args.stage2:
            raise HbpeError(
                "cli.missing_stage2", "--strategy bpe needs --stage2", kind="usage"
            )
        vocab, artifact = _load_stage1(args)
        _, patches = hier.load_stage2(args.stage2)
        hstats = patching.hier_patch_stats(data, vocab, patches)
        fields.update(
            S=patches.max_patch_len,
            patch_count=hstats.patch_count,
            avg_patch_len=hstats.avg_content_bytes,
            avg_patch_len_with_marker=hstats.avg_bytes_with_marker,
            avg_symbols_per_patch=hstats.avg_symbols,
            fertility=hstats.fertility,
        )
        return fields

    if args.strategy == "space":
        bounds = patching.space_patch(data, args.max_size)
    elif args.strategy == "fixed":
        bounds = patching.fixed_patch(data, args.k)
    elif args.strategy == "entropy":
        if args.scorer:
            scorer = patching.load_scorer(args.scorer)
        else:
            scorer = patching.train_entropy_scorer(data, args.order, args.smoothing)
        bounds = patching.entropy_patch(
            data, scorer, args.threshold, args.max_size if args.cap else None
        )
    else:
        raise HbpeError("cli.bad_strategy", f"unknown strategy {args.strategy}")
    pstats = patching.stats(bounds, cstats.word_count)
    fields.update(
        patch_count=pstats.patch_count,
        avg_patch_len=pstats.avg_patch_len,
        fertility=pstats.fertility,
    )
    return fields


def cmd_stats(args) -> int:
    fields = _strategy_report(args)
    artifacts = []
    if args.strategy == "bpe":
        artifacts = [f"stage2:{args.stage2}"]
    _repro_line("stats", artifacts, s=fields.get("S"))
    text = metrics.write_report(fields, args.report, args.json)
    sys.stdout.write(text)
    return EXIT_OK


def cmd_flops(args) -> int:
    with open(args.config, encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise HbpeError("cli.bad_config", f"{args.config}: {exc}") from None
    cfg = metrics.flops_config_from_dict(raw)
    terms = metrics.hierarchical_flops_terms(cfg)
    fields = {
        "strategy": "bpe",
        "S": None,
        "avg_patch_len": cfg.avg_patch_len,
        "v_prime": cfg.v_prime,
        "total_bytes": cfg.total_bytes,
        "patch_positions": terms["patch_positions"],
        "flops_encoder": terms["encoder"],
        "flops_decoder": terms["decoder"],
        "flops_latent": terms["latent"],
        "flops": terms["total"],
    }
    _repro_line("flops", [f"config:{args.config}"])
    text = metrics.write_report(fields, args.report, args.json)
    sys.stdout.write(text)
    return EXIT_OK


def cmd_emit_batches(args) -> int:
    vocab, artifact = _load_stage1(args)
    table, patches = hier.load_stage2(args.stage2)
    data, _ = corpus.read_corpus(args.corpus)
    summary = corpus.emit_batches(data, vocab, patches, args.out)
    _repro_line(
        "emit-batches", [artifact, f"stage2:{args.stage2}"], s=patches.max_patch_len
    )
    avg = "na" if summary.avg_content_symbols is None else f"{summary.avg_content_symbols:.6f}"
    print(f"rows={summary.row_count} avg_content_symbols={avg}")
    print(f"wrote {summary.path}")
    return EXIT_OK


def cmd_sweep_s(args) -> int:
    vocab, artifact = _load_stage1(args)
    data, cstats = corpus.read_corpus(args.corpus)
    if args.s_from < 2 or args.s_to < args.s_from:
        raise HbpeError(
            "cli.bad_sweep_range",
            f"need 2 <= from <= to, got {args.s_from}..{args.s_to}",
            kind="usage",
        )
    _repro_line("sweep-s", [artifact])
    rows = []
    print("S merges vprime avg_symbols_per_patch avg_content_bytes max_patch_len")
    for s in range(args.s_from, args.s_to + 1):
        table, patches = hier.train_hier_bpe(vocab, s)
        hstats = patching.hier_patch_stats(data, vocab, patches)
        longest = max(len(p) for p in patches.patches.values())
        row = {
            "S": s,
            "merges": len(table.merges),
            "v_prime": table.v_prime,
            "avg_symbols_per_patch": hstats.avg_symbols,
            "avg_content_bytes": hstats.avg_content_bytes,
            "max_patch_len": longest,
        }
        rows.append(row)
        print(
            f"{s} {len(table.merges)} {table.v_prime} "
            f"{hstats.avg_symbols:.6f} {hstats.avg_content_bytes:.6f} {longest}"
        )
    if args.json:
        from ._util import atomic_write_text

        atomic_write_text(args.json, json.dumps(rows, indent=2) + "\n")
        print(f"wrote {args.json}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hbpe", description="two-stage hierarchical BPE toolkit"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train-bpe", help="train the first-stage byte BPE")
    p.add_argument("--corpus", nargs="+", required=True)
    p.add_argument("--vocab-size", type=int, required=True)
    p.add_argument("--pretokenize", choices=bpe.PRETOKENIZE_RULES, default="none")
    p.add_argument("--out-prefix", required=True)
    p.add_argument("--format", choices=("gpt2", "internal"), default="gpt2")
    p.set_defaults(func=cmd_train_bpe)

    p = sub.add_parser("train-hbpe", help="compress tokens into bounded patches")
    _add_stage1_args(p)
    p.add_argument("--max-patch-len", "-S", type=int, required=True)
    p.add_argument("--weight-corpus", help="weight pair counts by token frequency in this corpus")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train_hbpe)

    p = sub.add_parser("encode", help="text file to one patch per line")
    _add_stage1_args(p)
    p.add_argument("--stage2", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", help="patch lines back to bytes")
    p.add_argument("--stage2", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("stats", help="patch statistics for one strategy")
    p.add_argument("--corpus", nargs="+", required=True)
    p.add_argument(
        "--strategy", choices=("bpe", "space", "entropy", "fixed"), required=True
    )
    p.add_argument("--max-size", type=int, default=6)
    p.add_argument("--cap", action="store_true", help="apply --max-size to entropy patching")
    p.add_argument("--k", type=int, default=4, help="fixed patch length")
    p.add_argument("--threshold", type=float, default=2.0, help="surprisal bound in bits")
    p.add_argument("--order", type=int, default=2)
    p.add_argument("--smoothing", type=float, default=0.01)
    p.add_argument("--scorer", help="load a persisted entropy scorer instead of training")
    _add_stage1_args(p)
    p.add_argument("--stage2")
    p.add_argument("--report", help="write key=value report here")
    p.add_argument("--json", help="write JSON report here")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("flops", help="hierarchical forward-pass FLOPs from a config")
    p.add_argument("--config", required=True, help="JSON FlopsConfig file")
    p.add_argument("--report")
    p.add_argument("--json")
    p.set_defaults(func=cmd_flops)

    p = sub.add_parser("emit-batches", help="write padded patch rows for the model")
    _add_stage1_args(p)
    p.add_argument("--stage2", required=True)
    p.add_argument("--corpus", nargs="+", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_emit_batches)

    p = sub.add_parser("sweep-s", help="train and measure across a range of S")
    _add_stage1_args(p)
    p.add_argument("--corpus", nargs="+", required=True)
    p.add_argument("--from", dest="s_from", type=int, required=True)
    p.add_argument("--to", dest="s_to", type=int, required=True)
    p.add_argument("--json", help="write the sweep table here")
    p.set_defaults(func=cmd_sweep_s)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except HbpeError as exc:
        print(f"hbpe error {exc}", file=sys.stderr)
        if exc.kind == "usage":
            return EXIT_USAGE
        if exc.kind == "io":
            return EXIT_IO
        return EXIT_DATA
    except OSError as exc:
        print(f"hbpe io error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
