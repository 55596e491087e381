"""Run: python -m toyhlm --batch corpus.hbpb --stage2 tok.stage2 [options]."""

import argparse
import sys

from .errors import ToyError
from .model import ToyConfig
from .train import format_report, train_and_eval


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="toyhlm")
    parser.add_argument("--batch", required=True, help="padded patch batch file")
    parser.add_argument("--stage2", required=True, help="stage-2 tokenizer artifact")
    parser.add_argument("--steps", type=int, default=500)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--hidden", type=int, default=64)
    parser.add_argument("--latent-hidden", type=int, default=64)
    parser.add_argument("--layers", type=int, default=2, help="encoder/decoder layers")
    parser.add_argument("--latent-layers", type=int, default=2)
    parser.add_argument("--context", type=int, default=16, help="patches per window")
    parser.add_argument("--lr", type=float, default=3e-3)
    parser.add_argument("--report")
    parser.add_argument("--json")
    parser.add_argument("--curve")
    args = parser.parse_args(argv)
    cfg = ToyConfig(
        d_local=args.hidden,
        d_latent=args.latent_hidden,
        enc_layers=args.layers,
        dec_layers=args.layers,
        latent_layers=args.latent_layers,
        context_patches=args.context,
        lr=args.lr,
    )
    try:
        report = train_and_eval(
            args.batch, args.stage2, args.steps, args.seed, cfg,
            report_path=args.report, json_path=args.json, curve_path=args.curve,
        )
    except ToyError as exc:
        print(f"toyhlm error {exc}", file=sys.stderr)
        return 3
    sys.stdout.write(format_report(report.report_fields()))
    return 0


if __name__ == "__main__":
    sys.exit(main())
