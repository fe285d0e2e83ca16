"""Shared domain types for the NLU-to-QA pipeline.

Character offsets throughout the package are Unicode scalar values
(Python string indices), end-exclusive. All types here are immutable
after construction and safe to share across concurrent workers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator

SLOT_KIND = "slot"
INTENT_KIND = "intent"

SQUAD_VERSION = "v2.0"

DEFAULT_SLOT_QUESTION_TEMPLATE = "what {} was mentioned?"
DEFAULT_INTENT_QUESTION_TEMPLATE = "is the intent asking about {}?"


@dataclass(frozen=True)
class SlotSpan:
    """One slot annotation, a character span into the owning record's context.

    `value` must equal the context substring at [start, end).
    """

    slot_name: str
    start: int
    end: int
    value: str


@dataclass(frozen=True)
class NluRecord:
    """One annotated utterance.

    `context` is the text QA items are built against: the utterance itself,
    or the utterance prefixed by an assembled dialogue frame. When a prefix
    was added, `context_offset` records its length and all spans are
    expressed in context coordinates. `requested_slots` carries the slots
    the system asked about in the previous turn, kept for frame assembly.
    """

    record_id: str
    utterance: str
    slots: tuple[SlotSpan, ...] = ()
    intents: frozenset[str] = frozenset()
    context: str | None = None  # filled with the utterance when absent
    context_offset: int = 0
    requested_slots: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "slots", tuple(self.slots))
        object.__setattr__(self, "intents", frozenset(self.intents))
        object.__setattr__(self, "requested_slots", tuple(self.requested_slots))
        if self.context is None:
            object.__setattr__(self, "context", self.utterance)

    def slot_names(self) -> set[str]:
        return {span.slot_name for span in self.slots}

    def spans_for(self, slot_name: str) -> list[SlotSpan]:
        """All spans of one slot, sorted by start offset."""
        return sorted(
            (span for span in self.slots if span.slot_name == slot_name),
            key=lambda span: (span.start, span.end),
        )


@dataclass(frozen=True)
class QuestionCatalog:
    """Per-slot question lists plus templates for generating more.

    `slot_questions` preserves insertion (file) order; that order fixes the
    question_index embedded in item ids, so it must stay stable. Treat all
    fields as read-only.
    """

    slot_questions: dict[str, tuple[str, ...]] = field(default_factory=dict)
    slot_descriptions: dict[str, str] = field(default_factory=dict)
    slot_question_templates: tuple[str, ...] = ()
    intent_question_template: str = DEFAULT_INTENT_QUESTION_TEMPLATE

    def __post_init__(self) -> None:
        object.__setattr__(
            self,
            "slot_questions",
            {slot: tuple(questions) for slot, questions in self.slot_questions.items()},
        )
        object.__setattr__(self, "slot_descriptions", dict(self.slot_descriptions))
        object.__setattr__(
            self, "slot_question_templates", tuple(self.slot_question_templates)
        )

    def questions_for(self, slot_name: str) -> tuple[str, ...]:
        return self.slot_questions.get(slot_name, ())


@dataclass(frozen=True)
class QaAnswer:
    text: str
    answer_start: int


@dataclass(frozen=True)
class QaItem:
    """One extractive QA example. `is_impossible` iff `answers` is empty."""

    item_id: str
    question: str
    answers: tuple[QaAnswer, ...] = ()
    is_impossible: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "answers", tuple(self.answers))


@dataclass(frozen=True)
class QaParagraph:
    context: str
    qas: tuple[QaItem, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "qas", tuple(self.qas))


@dataclass(frozen=True)
class QaGroup:
    title: str
    paragraphs: tuple[QaParagraph, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "paragraphs", tuple(self.paragraphs))


@dataclass(frozen=True)
class QaCorpus:
    """A SQuAD2.0-shaped collection of QA items."""

    version: str = SQUAD_VERSION
    groups: tuple[QaGroup, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "groups", tuple(self.groups))

    def iter_paragraphs(self) -> Iterator[QaParagraph]:
        for group in self.groups:
            yield from group.paragraphs

    def iter_items(self) -> Iterator[tuple[QaParagraph, QaItem]]:
        for paragraph in self.iter_paragraphs():
            for item in paragraph.qas:
                yield paragraph, item

    def item_ids(self) -> list[str]:
        return [item.item_id for _, item in self.iter_items()]

    def item_count(self) -> int:
        return sum(len(paragraph.qas) for paragraph in self.iter_paragraphs())


@dataclass(frozen=True)
class Prediction:
    """Model output for one QA item."""

    text: str
    span_score: float
    no_answer_score: float


# item_id -> Prediction, keyed exactly by the ids of the corpus being scored
PredictionSet = dict[str, Prediction]


@dataclass(frozen=True)
class TaskScores:
    precision: float
    recall: float
    f1: float
    tp: int
    fp: int
    fn: int


@dataclass(frozen=True)
class EvalReport:
    """Slot and/or intent scores for one evaluation run."""

    slot: TaskScores | None = None
    intent: TaskScores | None = None
    run_seed: int | None = None


@dataclass(frozen=True)
class ItemKey:
    """Decoded form of an item id."""

    record_id: str
    kind: str
    name: str
    question_index: int


def make_item_id(record_id: str, kind: str, name: str, question_index: int) -> str:
    """Build the deterministic item id "{record_id}|{kind}|{name}|{index}".

    The scorer decodes these without side tables, so `kind` and `name`
    must not contain the separator. `record_id` may (parsing is from the
    right).
    """
    if kind not in (SLOT_KIND, INTENT_KIND):
        raise ValueError(f"unknown item kind {kind!r}")
    if "|" in name:
        raise ValueError(f"label {name!r} must not contain '|'")
    if question_index < 0:
        raise ValueError("question_index must be >= 0")
    return f"{record_id}|{kind}|{name}|{question_index}"


def parse_item_id(item_id: str) -> ItemKey:
    parts = item_id.rsplit("|", 3)
    if len(parts) != 4:
        raise ValueError(f"item id {item_id!r} does not follow record|kind|name|index")
    record_id, kind, name, index_text = parts
    if kind not in (SLOT_KIND, INTENT_KIND):
        raise ValueError(f"item id {item_id!r} has unknown kind {kind!r}")
    if not index_text.isdigit():
        raise ValueError(f"item id {item_id!r} has non-numeric question index")
    return ItemKey(record_id, kind, name, int(index_text))


def validate_record(
    record: NluRecord, slot_schema: Iterable[str] | None = None
) -> list[str]:
    """Check every NluRecord invariant; one message per violation.

    Violations are data, not failures: an empty list means valid. When
    `slot_schema` is given, slot names must be members of it.
    """
    problems: list[str] = []
    if not record.record_id:
        problems.append("NluRecord: empty record_id")
    context = record.context or ""
    offset = record.context_offset
    if not (0 <= offset <= len(context)) or context[offset:] != record.utterance:
        problems.append(
            f"NluRecord {record.record_id!r}: context[{offset}:] does not equal the utterance"
        )
    schema = set(slot_schema) if slot_schema is not None else None
    for span in record.slots:
        label = f"SlotSpan {span.slot_name!r}"
        if not span.slot_name:
            problems.append("SlotSpan: empty slot name")
        elif schema is not None and span.slot_name not in schema:
            problems.append(f"{label}: slot not in the dataset schema")
        if span.start == span.end:
            problems.append(f"{label}: empty span at {span.start}")
            continue
        if span.start > span.end:
            problems.append(f"{label}: inverted span [{span.start}, {span.end})")
            continue
        if span.start < 0 or span.end > len(context):
            problems.append(
                f"{label}: span [{span.start}, {span.end}) out of bounds "
                f"(context length {len(context)})"
            )
            continue
        actual = context[span.start : span.end]
        if actual != span.value:
            problems.append(
                f"{label}: value {span.value!r} does not match context substring {actual!r}"
            )
    for intent in record.intents:
        if not intent:
            problems.append(f"NluRecord {record.record_id!r}: empty intent label")
    return problems


def validate_corpus(corpus: QaCorpus) -> list[str]:
    """Corpus-wide invariants: unique ids, answer-substring property,
    is_impossible consistent with an empty answers list."""
    problems: list[str] = []
    seen: set[str] = set()
    for paragraph, item in corpus.iter_items():
        if item.item_id in seen:
            problems.append(f"duplicate item id {item.item_id!r}")
        seen.add(item.item_id)
        if item.is_impossible and item.answers:
            problems.append(f"item {item.item_id!r}: impossible but has answers")
        if not item.is_impossible and not item.answers:
            problems.append(f"item {item.item_id!r}: answerable but has no answers")
        for answer in item.answers:
            end = answer.answer_start + len(answer.text)
            if answer.answer_start < 0 or end > len(paragraph.context):
                problems.append(
                    f"item {item.item_id!r}: answer at {answer.answer_start} out of bounds"
                )
                continue
            actual = paragraph.context[answer.answer_start : end]
            if actual != answer.text:
                problems.append(
                    f"item {item.item_id!r}: answer text {answer.text!r} does not match "
                    f"context substring {actual!r}"
                )
    return problems
