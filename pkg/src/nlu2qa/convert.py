"""Build, merge and serialize SQuAD2.0-format QA corpora from NLU records.

For each record, every question of every slot in the schema is asked
against the record's context, whether or not the slot occurs in it, so a
large share of the resulting items is deliberately unanswerable. Intent
items ask one yes/no question per label of the intent inventory against
the context prefixed with "yes. no. ".

File layout (UTF-8 JSON)::

    {"version": "v2.0",
     "data": [{"title": str,
               "paragraphs": [{"context": str,
                               "qas": [{"id": str,
                                        "question": str,
                                        "answers": [{"text": str,
                                                     "answer_start": int}],
                                        "is_impossible": bool}]}]}]}

Impossible items carry "answers": [] and "is_impossible": true.
"""

from __future__ import annotations

import json
import logging
from typing import IO, Iterable, Sequence

from .errors import ConvertError, MergeError, ParseError
from .questions import intent_question
from .schema import (
    INTENT_KIND,
    SLOT_KIND,
    SQUAD_VERSION,
    NluRecord,
    QaAnswer,
    QaCorpus,
    QaGroup,
    QaItem,
    QaParagraph,
    QuestionCatalog,
    make_item_id,
    validate_corpus,
    validate_record,
)

logger = logging.getLogger(__name__)

# Fixed 9-character prefix; it pins the yes/no answer offsets used below.
INTENT_CONTEXT_PREFIX = "yes. no. "
YES_ANSWER = QaAnswer("yes", 0)
NO_ANSWER = QaAnswer("no", 5)


def build_slot_qas(record: NluRecord, catalog: QuestionCatalog) -> list[QaItem]:
    """One QA item per (schema slot, question) pair for this record.

    Slots absent from the record yield impossible items. Slots with
    several spans keep all of them, sorted by start offset; trainers that
    need a single answer take the first.
    """
    # a slot entry with an empty question list is as uncovered as a missing one
    missing = sorted(
        slot for slot in record.slot_names() if not catalog.questions_for(slot)
    )
    if missing:
        raise ConvertError(
            f"record {record.record_id!r} has slots not covered by the catalog: "
            + ", ".join(repr(slot) for slot in missing)
        )

    items: list[QaItem] = []
    for slot_name, slot_questions in catalog.slot_questions.items():
        spans = record.spans_for(slot_name)
        answers = tuple(QaAnswer(span.value, span.start) for span in spans)
        for index, question in enumerate(slot_questions):
            try:
                item_id = make_item_id(record.record_id, SLOT_KIND, slot_name, index)
            except ValueError as exc:
                raise ConvertError(str(exc)) from exc
            items.append(
                QaItem(
                    item_id=item_id,
                    question=question,
                    answers=answers,
                    is_impossible=not answers,
                )
            )
    return items


def build_intent_qas(
    record: NluRecord,
    intent_labels: Sequence[str],
    catalog: QuestionCatalog,
) -> tuple[str, list[QaItem]]:
    """One yes/no QA item per label of the full intent inventory.

    Returns the prefixed context the items are answered against. Intent
    items are never impossible: the answer is always present in the
    prefix, "yes" at 0 or "no" at 5.
    """
    if not intent_labels:
        raise ConvertError("intent inventory is empty")
    prefixed_context = INTENT_CONTEXT_PREFIX + (record.context or "")
    items: list[QaItem] = []
    for label in intent_labels:
        try:
            item_id = make_item_id(record.record_id, INTENT_KIND, label, 0)
        except ValueError as exc:
            raise ConvertError(str(exc)) from exc
        answer = YES_ANSWER if label in record.intents else NO_ANSWER
        items.append(
            QaItem(
                item_id=item_id,
                question=intent_question(label, catalog.intent_question_template),
                answers=(answer,),
                is_impossible=False,
            )
        )
    return prefixed_context, items


def build_corpus(
    records: Sequence[NluRecord],
    catalog: QuestionCatalog,
    intent_inventory: Sequence[str] | None = None,
    include_intents: bool = False,
    title: str = "nlu",
) -> QaCorpus:
    """Convert records into one corpus: per record, a paragraph of slot
    items and (optionally) a second paragraph of intent items.

    Per-record item count is sum(|questions per slot|) plus the inventory
    size when intents are included. Deterministic: same inputs give a
    byte-identical emission.
    """
    for record in records:
        problems = validate_record(record)
        if problems:
            raise ConvertError(
                f"record {record.record_id!r} is invalid: " + "; ".join(problems)
            )

    inventory: Sequence[str] = intent_inventory or ()
    if include_intents and not inventory:
        inventory = sorted({label for record in records for label in record.intents})

    paragraphs: list[QaParagraph] = []
    for record in records:
        paragraphs.append(
            QaParagraph(context=record.context or "", qas=tuple(build_slot_qas(record, catalog)))
        )
        if include_intents:
            prefixed, intent_items = build_intent_qas(record, inventory, catalog)
            paragraphs.append(QaParagraph(context=prefixed, qas=tuple(intent_items)))

    corpus = QaCorpus(version=SQUAD_VERSION, groups=(QaGroup(title, tuple(paragraphs)),))
    problems = validate_corpus(corpus)
    if problems:
        raise ConvertError("built corpus violates invariants: " + "; ".join(problems[:5]))
    return corpus


def count_items(corpus: QaCorpus) -> tuple[int, int, int]:
    """(total, answerable, impossible) item counts."""
    total = answerable = impossible = 0
    for _, item in corpus.iter_items():
        total += 1
        if item.is_impossible:
            impossible += 1
        else:
            answerable += 1
    return total, answerable, impossible


def merge_corpora(a: QaCorpus, b: QaCorpus) -> QaCorpus:
    """Concatenate two corpora; item ids must be disjoint.

    Keeps the version tag of the first corpus. This is how NLU-derived
    items are folded into an existing QA training set for augmentation.
    """
    ids_a = set(a.item_ids())
    ids_b = set(b.item_ids())
    collisions = sorted(ids_a & ids_b)
    if collisions:
        raise MergeError(
            f"{len(collisions)} colliding item ids: "
            + ", ".join(repr(item_id) for item_id in collisions[:10])
            + ("..." if len(collisions) > 10 else "")
        )
    return QaCorpus(version=a.version, groups=a.groups + b.groups)


def dumps_squad(corpus: QaCorpus) -> str:
    """Serialize to the exact file layout; stable byte-for-byte."""
    payload = {
        "version": corpus.version,
        "data": [
            {
                "title": group.title,
                "paragraphs": [
                    {
                        "context": paragraph.context,
                        "qas": [
                            {
                                "id": item.item_id,
                                "question": item.question,
                                "answers": [
                                    {"text": answer.text, "answer_start": answer.answer_start}
                                    for answer in item.answers
                                ],
                                "is_impossible": item.is_impossible,
                            }
                            for item in paragraph.qas
                        ],
                    }
                    for paragraph in group.paragraphs
                ],
            }
            for group in corpus.groups
        ],
    }
    return json.dumps(payload, ensure_ascii=False, indent=2) + "\n"


def emit_squad(corpus: QaCorpus, stream: IO[str]) -> None:
    stream.write(dumps_squad(corpus))


def parse_squad(source: str | IO[str], strict: bool = True) -> QaCorpus:
    """Parse a SQuAD2.0-layout file.

    Exact inverse of emit_squad on files this package writes. Third-party
    files are accepted too; with strict=False, answer-substring mismatches
    and impossibility inconsistencies downgrade to warnings so public QA
    training sets can be ingested as-is.
    """
    text = source if isinstance(source, str) else source.read()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"corpus is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict) or not isinstance(raw.get("data"), list):
        raise ParseError("corpus must be an object with a 'data' list")

    def complain(message: str) -> None:
        if strict:
            raise ParseError(message)
        logger.warning("%s", message)

    version = raw.get("version")
    if not isinstance(version, str):
        complain("corpus has no string 'version' tag")
        version = SQUAD_VERSION

    seen_ids: set[str] = set()
    groups: list[QaGroup] = []
    for group_index, raw_group in enumerate(raw["data"]):
        if not isinstance(raw_group, dict):
            raise ParseError(f"data[{group_index}] is not an object")
        title = raw_group.get("title", "")
        if not isinstance(title, str):
            raise ParseError(f"data[{group_index}] title is not a string")
        raw_paragraphs = raw_group.get("paragraphs", [])
        if not isinstance(raw_paragraphs, list):
            raise ParseError(f"data[{group_index}] 'paragraphs' is not a list")

        paragraphs: list[QaParagraph] = []
        for raw_paragraph in raw_paragraphs:
            if not isinstance(raw_paragraph, dict) or not isinstance(
                raw_paragraph.get("context"), str
            ):
                raise ParseError(f"paragraph in {title!r} lacks a string 'context'")
            context = raw_paragraph["context"]
            raw_qas = raw_paragraph.get("qas", [])
            if not isinstance(raw_qas, list):
                raise ParseError(f"paragraph in {title!r}: 'qas' is not a list")

            items: list[QaItem] = []
            for raw_item in raw_qas:
                items.append(_parse_item(raw_item, context, seen_ids, complain))
            paragraphs.append(QaParagraph(context=context, qas=tuple(items)))
        groups.append(QaGroup(title=title, paragraphs=tuple(paragraphs)))

    return QaCorpus(version=version, groups=tuple(groups))


def _parse_item(raw_item, context: str, seen_ids: set[str], complain) -> QaItem:
    if not isinstance(raw_item, dict):
        raise ParseError("qa entry is not an object")
    item_id = raw_item.get("id")
    question = raw_item.get("question")
    if not isinstance(item_id, str) or not item_id:
        raise ParseError("qa entry has no string 'id'")
    if not isinstance(question, str):
        raise ParseError(f"item {item_id!r} has no string 'question'")
    if item_id in seen_ids:
        complain(f"duplicate item id {item_id!r}")
    seen_ids.add(item_id)

    raw_answers = raw_item.get("answers", [])
    if not isinstance(raw_answers, list):
        raise ParseError(f"item {item_id!r}: 'answers' is not a list")
    answers: list[QaAnswer] = []
    for raw_answer in raw_answers:
        if (
            not isinstance(raw_answer, dict)
            or not isinstance(raw_answer.get("text"), str)
            or not isinstance(raw_answer.get("answer_start"), int)
        ):
            raise ParseError(f"item {item_id!r}: malformed answer entry")
        text = raw_answer["text"]
        start = raw_answer["answer_start"]
        if context[start : start + len(text)] != text:
            complain(
                f"item {item_id!r}: answer {text!r} does not match context at {start}"
            )
        answers.append(QaAnswer(text, start))

    is_impossible = raw_item.get("is_impossible", not answers)
    if not isinstance(is_impossible, bool):
        raise ParseError(f"item {item_id!r}: 'is_impossible' is not a boolean")
    if is_impossible and answers:
        complain(f"item {item_id!r}: impossible but has answers")
    if not is_impossible and not answers:
        complain(f"item {item_id!r}: answerable but has no answers")

    return QaItem(
        item_id=item_id,
        question=question,
        answers=tuple(answers),
        is_impossible=is_impossible,
    )
