"""Command-line entry point: convert, sample, merge, score, inspect.

All configuration comes from flags and files (never environment
variables) so a command line plus its inputs fully reproduces an output.
Output files are written atomically; stdout ends with a single summary
line in key=value form for scripting.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import shlex
import sys
import tempfile
from pathlib import Path

from . import convert, ingest, questions, sample, score
from .errors import PipelineError
from .schema import EvalReport, parse_item_id

PROG = "nlu2qa"


def _write_atomic(path: Path, text: str) -> None:
    # temp + rename so a crashed run never leaves a partial corpus behind
    path.parent.mkdir(parents=True, exist_ok=True)
    descriptor, temp_name = tempfile.mkstemp(
        dir=path.parent, prefix=path.name + ".", suffix=".tmp"
    )
    try:
        with os.fdopen(descriptor, "w", encoding="utf-8") as handle:
            handle.write(text)
        os.replace(temp_name, path)
    except BaseException:
        try:
            os.unlink(temp_name)
        except OSError:
            pass
        raise


def _read_text(path: str) -> str:
    target = Path(path)
    if not target.is_file():
        raise PipelineError(f"input file not found: {path}")
    return target.read_text(encoding="utf-8")


def _summary(**fields) -> None:
    parts = []
    for key, value in fields.items():
        text = f"{value:.6f}" if isinstance(value, float) else str(value)
        parts.append(f"{key}={shlex.quote(text)}")
    print(" ".join(parts))


def _load_records(path: str, input_format: str, args) -> tuple[list, list]:
    """Returns (records, bio_sentences); sentences empty for span input."""
    text = _read_text(path)
    if input_format == "bio":
        sentences = ingest.parse_bio(text)
        return [ingest.bio_to_spans(sentence) for sentence in sentences], sentences
    records = ingest.parse_span_docs(text)
    opts = ingest.FrameOptions(
        include_prev_turn=not getattr(args, "no_prev_turn", False),
        frame_template=getattr(args, "frame_template", None) or ingest.DEFAULT_FRAME_TEMPLATE,
    )
    return [
        ingest.assemble_context(record, record.requested_slots, opts) for record in records
    ], []


def cmd_convert(args) -> int:
    records, _ = _load_records(args.input, args.input_format, args)
    catalog = questions.load_catalog(_read_text(args.catalog))
    catalog = questions.expand_templates(catalog, questions.slot_schema_of(records))

    inventory = None
    if args.intent_inventory:
        inventory = [
            line.strip()
            for line in _read_text(args.intent_inventory).splitlines()
            if line.strip()
        ]
    corpus = convert.build_corpus(
        records,
        catalog,
        intent_inventory=inventory,
        include_intents=args.intents or inventory is not None,
        title=args.title or Path(args.input).stem,
    )
    _write_atomic(Path(args.out), convert.dumps_squad(corpus))
    total, answerable, impossible = convert.count_items(corpus)
    extra = {}
    if args.input_format == "span":
        extra["frame_template"] = (
            "" if args.no_prev_turn else (args.frame_template or ingest.DEFAULT_FRAME_TEMPLATE)
        )
    _summary(
        status="ok",
        records=len(records),
        items=total,
        answerable=answerable,
        impossible=impossible,
        out=args.out,
        **extra,
    )
    return 0


def cmd_sample(args) -> int:
    records, sentences = _load_records(args.input, args.input_format, args)
    if args.strategy == "uniform":
        sampled = sample.sample_uniform(records, args.n, args.seed)
    elif args.strategy == "per-slot":
        sampled = sample.sample_per_slot(
            records, args.n, args.seed, best_effort=args.best_effort
        )
    else:
        sampled = sample.sample_per_intent(
            records, args.n, args.seed, best_effort=args.best_effort
        )

    cohort = {record.record_id for record in sampled}
    if args.input_format == "bio":
        kept = [sentence for sentence in sentences if sentence.record_id in cohort]
        _write_atomic(Path(args.out), ingest.render_bio(kept))
    else:
        _write_atomic(Path(args.out), ingest.render_span_docs(sampled))

    manifest = sample.build_manifest(args.strategy, args.seed, args.n, sampled)
    manifest_path = args.manifest or args.out + ".manifest.json"
    _write_atomic(Path(manifest_path), sample.dumps_manifest(manifest))
    _summary(
        status="ok",
        strategy=args.strategy,
        n=args.n,
        seed=args.seed,
        total=len(sampled),
        out=args.out,
        manifest=manifest_path,
    )
    return 0


def cmd_merge(args) -> int:
    base = convert.parse_squad(_read_text(args.base), strict=not args.lenient)
    extra = convert.parse_squad(_read_text(args.add), strict=not args.lenient)
    merged = convert.merge_corpora(base, extra)
    _write_atomic(Path(args.out), convert.dumps_squad(merged))
    _summary(
        status="ok",
        base_items=base.item_count(),
        added_items=extra.item_count(),
        total_items=merged.item_count(),
        out=args.out,
    )
    return 0


def cmd_score(args) -> int:
    if args.aggregate:
        reports = [
            score.report_from_dict(json.loads(_read_text(path))) for path in args.aggregate
        ]
        summary = score.aggregate_runs(reports)
        for task in ("slot", "intent"):
            if task in summary:
                for metric, stats in summary[task].items():
                    print(
                        f"{task}_{metric}: mean={stats['mean']:.6f} std={stats['std']:.6f}"
                    )
        if args.out:
            _write_atomic(
                Path(args.out), json.dumps(summary, ensure_ascii=False, indent=2) + "\n"
            )
        _summary(status="ok", runs=summary["runs"])
        return 0

    for required in ("gold", "corpus", "predictions"):
        if getattr(args, required) is None:
            raise PipelineError(f"--{required} is required unless --aggregate is used")
    gold, _ = _load_records(args.gold, args.gold_format, args)
    corpus = convert.parse_squad(_read_text(args.corpus))
    predictions = score.load_predictions(_read_text(args.predictions))

    kinds = set()
    for _, item in corpus.iter_items():
        try:
            kinds.add(parse_item_id(item.item_id).kind)
        except ValueError:
            pass
    for task in ("slot", "intent"):
        if args.task in (task, "both") and task not in kinds:
            raise PipelineError(
                f"corpus has no {task} items; use --task or convert accordingly"
            )

    report = EvalReport(run_seed=args.seed)
    summary_fields: dict = {}
    if args.task in ("slot", "both"):
        decoded = score.decode_slots(predictions, corpus)
        slot_report = score.slot_f1(gold, decoded, normalize=not args.exact_strings)
        report = dataclasses.replace(report, slot=slot_report.slot)
        summary_fields["slot_f1"] = slot_report.slot.f1
    if args.task in ("intent", "both"):
        decoded = score.decode_intents(predictions, corpus)
        intent_report = score.intent_f1(gold, decoded)
        report = dataclasses.replace(report, intent=intent_report.intent)
        summary_fields["intent_f1"] = intent_report.intent.f1

    config = {
        "catalog_sha256": (
            questions.catalog_fingerprint(questions.load_catalog(_read_text(args.catalog)))
            if args.catalog
            else None
        ),
        "sampler_strategy": args.strategy,
        "run_seed": args.seed,
    }
    if args.out:
        _write_atomic(Path(args.out), score.dumps_report(report, config))
        summary_fields["out"] = args.out
    _summary(status="ok", **summary_fields)
    return 0


def cmd_inspect(args) -> int:
    corpus = convert.parse_squad(_read_text(args.corpus), strict=not args.lenient)
    shown = 0
    for paragraph in corpus.iter_paragraphs():
        wanted = args.record_id is None
        if args.record_id is not None:
            for item in paragraph.qas:
                try:
                    if parse_item_id(item.item_id).record_id == args.record_id:
                        wanted = True
                        break
                except ValueError:
                    continue
        if not wanted:
            continue
        if args.limit is not None and shown >= args.limit:
            break
        shown += 1
        print(f"context: {paragraph.context!r}")
        for item in paragraph.qas:
            if item.is_impossible:
                print(f"  [{item.item_id}] {item.question} -> (impossible)")
            else:
                spans = ", ".join(
                    f"{answer.text!r}@{answer.answer_start}" for answer in item.answers
                )
                print(f"  [{item.item_id}] {item.question} -> {spans}")
    _summary(status="ok", paragraphs=shown)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=PROG,
        description="Map slot/intent NLU data to SQuAD2.0 QA corpora and back.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    convert_parser = commands.add_parser(
        "convert", help="convert an NLU dataset to a SQuAD2.0 QA corpus"
    )
    convert_parser.add_argument("--input", required=True)
    convert_parser.add_argument("--input-format", choices=("bio", "span"), required=True)
    convert_parser.add_argument("--catalog", required=True)
    convert_parser.add_argument("--out", required=True)
    convert_parser.add_argument("--intents", action="store_true", help="emit intent items too")
    convert_parser.add_argument(
        "--intent-inventory", help="text file with one intent label per line"
    )
    convert_parser.add_argument("--frame-template", help="context frame, one {} placeholder")
    convert_parser.add_argument(
        "--no-prev-turn",
        action="store_true",
        help="do not synthesize the previous system turn for span input",
    )
    convert_parser.add_argument("--title", help="group title (default: input file stem)")
    convert_parser.set_defaults(func=cmd_convert)

    sample_parser = commands.add_parser("sample", help="draw a few-shot training subset")
    sample_parser.add_argument(
        "--strategy", choices=("uniform", "per-slot", "per-intent"), required=True
    )
    sample_parser.add_argument("--n", type=int, required=True)
    sample_parser.add_argument("--seed", type=int, required=True)
    sample_parser.add_argument("--input", required=True)
    sample_parser.add_argument("--input-format", choices=("bio", "span"), required=True)
    sample_parser.add_argument("--out", required=True)
    sample_parser.add_argument("--manifest", help="default: <out>.manifest.json")
    sample_parser.add_argument(
        "--best-effort",
        action="store_true",
        help="warn instead of failing when a label cannot meet its quota",
    )
    sample_parser.set_defaults(func=cmd_sample)

    merge_parser = commands.add_parser("merge", help="merge two SQuAD2.0 corpora")
    merge_parser.add_argument("--base", required=True)
    merge_parser.add_argument("--add", required=True)
    merge_parser.add_argument("--out", required=True)
    merge_parser.add_argument(
        "--lenient",
        action="store_true",
        help="downgrade third-party answer-offset mismatches to warnings",
    )
    merge_parser.set_defaults(func=cmd_merge)

    score_parser = commands.add_parser(
        "score", help="score predictions as slot/intent F1, or aggregate reports"
    )
    score_parser.add_argument("--gold")
    score_parser.add_argument("--gold-format", choices=("bio", "span"), default="bio")
    score_parser.add_argument("--corpus")
    score_parser.add_argument("--predictions")
    score_parser.add_argument("--task", choices=("slot", "intent", "both"), default="both")
    score_parser.add_argument("--out")
    score_parser.add_argument("--seed", type=int, help="run seed echoed into the report")
    score_parser.add_argument("--catalog", help="catalog file to fingerprint into the report")
    score_parser.add_argument("--strategy", help="sampler strategy echoed into the report")
    score_parser.add_argument(
        "--exact-strings",
        action="store_true",
        help="compare slot values without normalization",
    )
    score_parser.add_argument(
        "--aggregate", nargs="+", metavar="REPORT", help="aggregate existing report files"
    )
    score_parser.set_defaults(func=cmd_score)

    inspect_parser = commands.add_parser("inspect", help="pretty-print a corpus")
    inspect_parser.add_argument("--corpus", required=True)
    inspect_parser.add_argument("--record-id")
    inspect_parser.add_argument("--limit", type=int)
    inspect_parser.add_argument("--lenient", action="store_true")
    inspect_parser.set_defaults(func=cmd_inspect)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except PipelineError as exc:
        print(f"error={shlex.quote(str(exc))}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
