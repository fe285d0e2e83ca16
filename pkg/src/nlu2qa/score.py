"""Decode span-QA predictions back into NLU form and score them.

Slot decoding keeps, per (record, slot), the answer of the highest-scoring
question among those that beat their no-answer score; the abstention rule
is span_score > no_answer_score with no tunable offset, matching standard
SQuAD2.0 null handling. Intent decoding reads the yes/no answer per label.

Metrics are micro-averaged F1 over pooled (record, slot, value) triples
and (record, intent) pairs. Values are compared after normalization:
lowercase, collapsed whitespace, leading/trailing punctuation stripped —
the minimal rule that does not conflate distinct values.
"""

from __future__ import annotations

import json
import logging
import re
import statistics
import string
from dataclasses import dataclass, field
from typing import IO, Mapping, Sequence

from .errors import ScoreError
from .schema import (
    INTENT_KIND,
    SLOT_KIND,
    EvalReport,
    NluRecord,
    Prediction,
    PredictionSet,
    QaCorpus,
    TaskScores,
    parse_item_id,
)

logger = logging.getLogger(__name__)

_SPACES = re.compile(r"\s+")
_EDGE_CHARS = string.punctuation + string.whitespace


@dataclass(frozen=True)
class DecodedRecord:
    """Slot values and intent labels recovered from QA predictions."""

    record_id: str
    predicted_slots: dict[str, tuple[str, ...]] = field(default_factory=dict)
    predicted_intents: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        object.__setattr__(
            self,
            "predicted_slots",
            {slot: tuple(values) for slot, values in self.predicted_slots.items()},
        )
        object.__setattr__(self, "predicted_intents", frozenset(self.predicted_intents))


def collapse_whitespace(text: str) -> str:
    return _SPACES.sub(" ", text).strip()


def normalize_value(text: str) -> str:
    """Matching normalization: lowercase, collapse whitespace, strip
    leading/trailing punctuation. Internal punctuation survives."""
    return collapse_whitespace(text).lower().strip(_EDGE_CHARS)


def normalize_yes_no(text: str) -> str:
    return text.lower().strip(" .,\t")


def _require_predictions(preds: Mapping[str, Prediction], corpus: QaCorpus) -> None:
    corpus_ids = set(corpus.item_ids())
    stray = sorted(set(preds) - corpus_ids)
    if stray:
        raise ScoreError(
            f"{len(stray)} prediction ids not present in the corpus: "
            + ", ".join(repr(item_id) for item_id in stray[:5])
        )


def _keyed_items(corpus: QaCorpus, kind: str):
    for _, item in corpus.iter_items():
        try:
            key = parse_item_id(item.item_id)
        except ValueError as exc:
            raise ScoreError(str(exc)) from exc
        if key.kind == kind:
            yield key, item


def decode_slots(preds: PredictionSet, corpus: QaCorpus) -> list[DecodedRecord]:
    """Recover per-record slot values from the corpus's slot items."""
    _require_predictions(preds, corpus)

    record_order: list[str] = []
    # (record, slot) -> (span_score, -question_index, text) of best non-null answer
    best: dict[tuple[str, str], tuple[float, int, str]] = {}
    slots_seen: dict[str, list[str]] = {}

    for key, item in _keyed_items(corpus, SLOT_KIND):
        if key.record_id not in slots_seen:
            slots_seen[key.record_id] = []
            record_order.append(key.record_id)
        if key.name not in slots_seen[key.record_id]:
            slots_seen[key.record_id].append(key.name)
        prediction = preds.get(item.item_id)
        if prediction is None:
            raise ScoreError(f"missing prediction for item {item.item_id!r}")
        if not prediction.text or prediction.span_score <= prediction.no_answer_score:
            continue
        slot_key = (key.record_id, key.name)
        # ties between questions break toward the lower question index
        candidate = (prediction.span_score, -key.question_index, prediction.text)
        if slot_key not in best or candidate[:2] > best[slot_key][:2]:
            best[slot_key] = candidate

    decoded: list[DecodedRecord] = []
    for record_id in record_order:
        predicted: dict[str, tuple[str, ...]] = {}
        for slot in slots_seen[record_id]:
            found = best.get((record_id, slot))
            if found is not None:
                predicted[slot] = (collapse_whitespace(found[2]),)
        decoded.append(DecodedRecord(record_id=record_id, predicted_slots=predicted))
    return decoded


def decode_intents(preds: PredictionSet, corpus: QaCorpus) -> list[DecodedRecord]:
    """Recover per-record intent sets from the corpus's intent items.

    An intent is predicted iff its answer normalizes to "yes"; anything
    other than yes/no counts as "no" with a warning.
    """
    _require_predictions(preds, corpus)

    record_order: list[str] = []
    intents: dict[str, set[str]] = {}
    for key, item in _keyed_items(corpus, INTENT_KIND):
        if key.record_id not in intents:
            intents[key.record_id] = set()
            record_order.append(key.record_id)
        prediction = preds.get(item.item_id)
        if prediction is None:
            raise ScoreError(f"missing prediction for item {item.item_id!r}")
        answer = normalize_yes_no(prediction.text)
        if answer == "yes":
            intents[key.record_id].add(key.name)
        elif answer != "no":
            logger.warning(
                "item %s: answer %r is neither yes nor no; counting as no",
                item.item_id,
                prediction.text,
            )
    return [
        DecodedRecord(record_id=record_id, predicted_intents=frozenset(intents[record_id]))
        for record_id in record_order
    ]


def _check_same_records(
    gold: Sequence[NluRecord], decoded: Sequence[DecodedRecord]
) -> None:
    gold_ids = {record.record_id for record in gold}
    decoded_ids = {record.record_id for record in decoded}
    if gold_ids != decoded_ids:
        missing = sorted(gold_ids - decoded_ids)[:5]
        extra = sorted(decoded_ids - gold_ids)[:5]
        raise ScoreError(
            f"gold and decoded record ids differ (missing {missing}, extra {extra})"
        )


def _prf(tp: int, fp: int, fn: int) -> TaskScores:
    if tp == 0 and fp == 0 and fn == 0:
        # vacuous perfection: empty gold matched by empty predictions
        return TaskScores(1.0, 1.0, 1.0, 0, 0, 0)
    precision = tp / (tp + fp) if tp + fp > 0 else 0.0
    recall = tp / (tp + fn) if tp + fn > 0 else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return TaskScores(precision, recall, f1, tp, fp, fn)


def slot_f1(
    gold: Sequence[NluRecord],
    decoded: Sequence[DecodedRecord],
    normalize: bool = True,
) -> EvalReport:
    """Micro-averaged F1 over (record, slot, value) triples.

    Each gold span contributes one triple; duplicates deduplicate, so
    repeated identical values stay well-defined. normalize=False compares
    raw strings instead.
    """
    _check_same_records(gold, decoded)
    norm = normalize_value if normalize else (lambda value: value)

    gold_triples = {
        (record.record_id, span.slot_name, norm(span.value))
        for record in gold
        for span in record.slots
    }
    predicted_triples = {
        (record.record_id, slot, norm(value))
        for record in decoded
        for slot, values in record.predicted_slots.items()
        for value in values
    }
    tp = len(gold_triples & predicted_triples)
    fp = len(predicted_triples - gold_triples)
    fn = len(gold_triples - predicted_triples)
    return EvalReport(slot=_prf(tp, fp, fn))


def intent_f1(
    gold: Sequence[NluRecord], decoded: Sequence[DecodedRecord]
) -> EvalReport:
    """Micro-averaged F1 over (record, intent) pairs; records may carry
    several intents, which is why this is F1 rather than accuracy."""
    _check_same_records(gold, decoded)
    gold_pairs = {
        (record.record_id, intent) for record in gold for intent in record.intents
    }
    predicted_pairs = {
        (record.record_id, intent)
        for record in decoded
        for intent in record.predicted_intents
    }
    tp = len(gold_pairs & predicted_pairs)
    fp = len(predicted_pairs - gold_pairs)
    fn = len(gold_pairs - predicted_pairs)
    return EvalReport(intent=_prf(tp, fp, fn))


def aggregate_runs(reports: Sequence[EvalReport]) -> dict:
    """Mean and sample standard deviation per metric across runs.

    All reports must score the same task(s). A single report aggregates to
    its own values with std 0 by convention.
    """
    if not reports:
        raise ScoreError("no reports to aggregate")

    summary: dict = {"runs": len(reports)}
    seeds = [report.run_seed for report in reports if report.run_seed is not None]
    if seeds:
        summary["seeds"] = seeds

    for task in ("slot", "intent"):
        scores = [getattr(report, task) for report in reports]
        present = [score for score in scores if score is not None]
        if not present:
            continue
        if len(present) != len(reports):
            raise ScoreError(f"not every report carries {task} scores")
        summary[task] = {
            metric: {
                "mean": statistics.fmean(values),
                "std": statistics.stdev(values) if len(values) > 1 else 0.0,
            }
            for metric, values in (
                ("precision", [s.precision for s in present]),
                ("recall", [s.recall for s in present]),
                ("f1", [s.f1 for s in present]),
            )
        }
    if "slot" not in summary and "intent" not in summary:
        raise ScoreError("reports carry no scores to aggregate")
    return summary


def load_predictions(source: str | IO[str]) -> PredictionSet:
    """Read a prediction file: {item_id: {text, span_score, no_answer_score}}."""
    text = source if isinstance(source, str) else source.read()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScoreError(f"prediction file is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ScoreError("prediction file must be a JSON object keyed by item id")

    predictions: PredictionSet = {}
    for item_id, entry in raw.items():
        if not isinstance(entry, dict):
            raise ScoreError(f"prediction for {item_id!r} is not an object")
        answer_text = entry.get("text")
        span_score = entry.get("span_score")
        no_answer_score = entry.get("no_answer_score")
        if not isinstance(answer_text, str):
            raise ScoreError(f"prediction for {item_id!r} has no string 'text'")
        if not isinstance(span_score, (int, float)) or isinstance(span_score, bool):
            raise ScoreError(f"prediction for {item_id!r} has no numeric 'span_score'")
        if not isinstance(no_answer_score, (int, float)) or isinstance(no_answer_score, bool):
            raise ScoreError(f"prediction for {item_id!r} has no numeric 'no_answer_score'")
        unknown = set(entry) - {"text", "span_score", "no_answer_score"}
        if unknown:
            logger.warning("prediction for %r: ignoring keys %s", item_id, sorted(unknown))
        predictions[item_id] = Prediction(answer_text, float(span_score), float(no_answer_score))
    return predictions


def dumps_predictions(predictions: Mapping[str, Prediction]) -> str:
    payload = {
        item_id: {
            "text": prediction.text,
            "span_score": prediction.span_score,
            "no_answer_score": prediction.no_answer_score,
        }
        for item_id, prediction in predictions.items()
    }
    return json.dumps(payload, ensure_ascii=False, indent=2, sort_keys=True) + "\n"


def report_to_dict(report: EvalReport, config: dict | None = None) -> dict:
    def task_dict(scores: TaskScores | None) -> dict | None:
        if scores is None:
            return None
        return {
            "precision": scores.precision,
            "recall": scores.recall,
            "f1": scores.f1,
            "tp": scores.tp,
            "fp": scores.fp,
            "fn": scores.fn,
        }

    return {
        "slot": task_dict(report.slot),
        "intent": task_dict(report.intent),
        "run_seed": report.run_seed,
        "config": config or {},
    }


def report_from_dict(raw: dict) -> EvalReport:
    def task_scores(entry) -> TaskScores | None:
        if entry is None:
            return None
        try:
            return TaskScores(
                precision=float(entry["precision"]),
                recall=float(entry["recall"]),
                f1=float(entry["f1"]),
                tp=int(entry["tp"]),
                fp=int(entry["fp"]),
                fn=int(entry["fn"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ScoreError(f"malformed task scores in report: {exc}") from exc

    if not isinstance(raw, dict):
        raise ScoreError("report must be a JSON object")
    seed = raw.get("run_seed")
    if seed is not None and not isinstance(seed, int):
        raise ScoreError("report 'run_seed' must be an integer")
    return EvalReport(
        slot=task_scores(raw.get("slot")),
        intent=task_scores(raw.get("intent")),
        run_seed=seed,
    )


def dumps_report(report: EvalReport, config: dict | None = None) -> str:
    return json.dumps(report_to_dict(report, config), ensure_ascii=False, indent=2) + "\n"
