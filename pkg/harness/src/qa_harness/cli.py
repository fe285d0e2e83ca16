"""CLI: finetune and predict subcommands."""

from __future__ import annotations

import argparse
import logging
import sys

from .corpus import CorpusError
from .finetune import Hyperparams, finetune
from .predict import PredictOptions, predict


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qa-harness",
        description="Fine-tune and run span-QA models over SQuAD2.0-format corpora.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    tune = commands.add_parser("finetune", help="fine-tune a base model on a corpus")
    tune.add_argument("--train-corpus", required=True)
    tune.add_argument("--base-model", required=True, help="hub id or checkpoint directory")
    tune.add_argument("--out", required=True, help="output checkpoint directory")
    tune.add_argument("--epochs", type=int, default=Hyperparams.epochs)
    tune.add_argument("--learning-rate", type=float, default=Hyperparams.learning_rate)
    tune.add_argument("--batch-size", type=int, default=Hyperparams.batch_size)
    tune.add_argument("--max-seq-length", type=int, default=Hyperparams.max_seq_length)
    tune.add_argument("--doc-stride", type=int, default=Hyperparams.doc_stride)
    tune.add_argument("--seed", type=int, default=Hyperparams.seed)
    tune.add_argument("--device", default=Hyperparams.device)

    infer = commands.add_parser("predict", help="write a prediction file for a corpus")
    infer.add_argument("--checkpoint", required=True)
    infer.add_argument("--corpus", required=True)
    infer.add_argument("--out", required=True)
    infer.add_argument("--batch-size", type=int, default=PredictOptions.batch_size)
    infer.add_argument("--max-seq-length", type=int, default=PredictOptions.max_seq_length)
    infer.add_argument("--doc-stride", type=int, default=PredictOptions.doc_stride)
    infer.add_argument("--max-answer-length", type=int, default=PredictOptions.max_answer_length)
    infer.add_argument("--device", default=PredictOptions.device)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        if args.command == "finetune":
            finetune(
                args.train_corpus,
                args.base_model,
                args.out,
                Hyperparams(
                    epochs=args.epochs,
                    learning_rate=args.learning_rate,
                    batch_size=args.batch_size,
                    max_seq_length=args.max_seq_length,
                    doc_stride=args.doc_stride,
                    seed=args.seed,
                    device=args.device,
                ),
            )
            print(f"checkpoint={args.out}")
        else:
            predict(
                args.checkpoint,
                args.corpus,
                args.out,
                PredictOptions(
                    batch_size=args.batch_size,
                    max_seq_length=args.max_seq_length,
                    doc_stride=args.doc_stride,
                    max_answer_length=args.max_answer_length,
                    device=args.device,
                ),
            )
            print(f"predictions={args.out}")
        return 0
    except CorpusError as exc:
        print(f"error={exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
