"""Standalone generator CLI: `ctxgen train ...` and `ctxgen generate ...`."""

from __future__ import annotations

import argparse
import sys

from ctxgen.data import CONTEXT_TYPES, SchemaError
from ctxgen.generate import generate
from ctxgen.rougelink import RougeError
from ctxgen.train import AdapterConfig, save_checkpoint, train


def cmd_train(args) -> int:
    cfg = AdapterConfig(
        model=args.model,
        target_type=args.type,
        train_path=args.train,
        val_path=args.val or "",
        max_src_len=args.max_src_len,
        max_tgt_len=args.max_tgt_len,
        emb=args.emb,
        hidden=args.hidden,
        epochs=args.epochs,
        lr=args.lr,
        eval_every=args.eval_every,
        seed=args.seed,
    )
    payload = train(cfg, log=lambda msg: print(msg, file=sys.stderr))
    save_checkpoint(payload, args.out)
    print(f"checkpoint (epoch {payload['best_epoch']}, "
          f"val rouge1_f1 {payload['best_val_rouge1_f1']:.4f}) -> {args.out}",
          file=sys.stderr)
    return 0


def cmd_generate(args) -> int:
    n = generate(args.checkpoint, args.questions, args.out, max_len=args.max_len)
    print(f"wrote {n} context records -> {args.out}", file=sys.stderr)
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="ctxgen", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="fine-tune a generator for one target type")
    p.add_argument("--type", required=True, choices=list(CONTEXT_TYPES))
    p.add_argument("--train", required=True, help="TargetRecord JSONL")
    p.add_argument("--val", help="validation TargetRecord JSONL (default: train file)")
    p.add_argument("--out", required=True, help="checkpoint path (.pt)")
    p.add_argument("--model", default="tiny-gru", choices=["tiny-gru"])
    p.add_argument("--epochs", type=int, default=40)
    p.add_argument("--lr", type=float, default=5e-3)
    p.add_argument("--emb", type=int, default=32)
    p.add_argument("--hidden", type=int, default=64)
    p.add_argument("--max-src-len", type=int, default=40)
    p.add_argument("--max-tgt-len", type=int, default=40)
    p.add_argument("--eval-every", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("generate", help="emit ContextRecord JSONL for questions")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--questions", required=True, help="JSONL with id and text")
    p.add_argument("--out", required=True)
    p.add_argument("--max-len", type=int)
    p.set_defaults(func=cmd_generate)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (SchemaError, RougeError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
