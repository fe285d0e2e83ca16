"""Parsers and writers for the source NLU dataset formats.

Two on-disk formats are supported:

* Canonical BIO file (ATIS-style token tagging). UTF-8 text, records
  separated by blank lines::

      #id <record_id>
      #intent <label>[,<label>...]     (bare "#intent" means no intents)
      token<TAB>tag                    (one line per token)

  Tags are ``O``, ``B-<slot>`` or ``I-<slot>``. Public ATIS copies vary in
  layout; this one format plus a small conversion script beats one parser
  per variant.

* Span-annotated file (Restaurants-8k-style). A UTF-8 JSON document: a
  top-level list of records ``{"id", "text", "requested_slots", "labels"}``
  where each label is ``{"slot", "start", "end"}`` with end-exclusive
  offsets in Unicode scalar values. A label may carry an optional
  ``"value"``; when present it must equal ``text[start:end]``.

Parsers are pure functions over their input and keep input order, so
whole files can be processed in parallel by the caller.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass
from typing import IO, Iterable

from .errors import ParseError
from .questions import tokenize_label
from .schema import NluRecord, SlotSpan

logger = logging.getLogger(__name__)

_TAG_RE = re.compile(r"^(O|[BI]-.+)$")

DEFAULT_FRAME_TEMPLATE = "the system asked about {}."
DEFAULT_FRAME_SEPARATOR = " "


@dataclass(frozen=True)
class BioSentence:
    """One blank-line-delimited block of a canonical BIO file."""

    record_id: str
    tokens: tuple[str, ...]
    tags: tuple[str, ...]
    intents: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "tokens", tuple(self.tokens))
        object.__setattr__(self, "tags", tuple(self.tags))
        object.__setattr__(self, "intents", tuple(self.intents))


@dataclass(frozen=True)
class FrameOptions:
    """How to turn a requested-slot list into a context prefix.

    The template text is configurable because the exact frame wording is
    not load-bearing; reports should record the template that was used.
    """

    include_prev_turn: bool = True
    frame_template: str = DEFAULT_FRAME_TEMPLATE
    separator: str = DEFAULT_FRAME_SEPARATOR

    def __post_init__(self) -> None:
        if self.frame_template.count("{}") != 1:
            raise ParseError(
                f"frame template {self.frame_template!r} must contain exactly one {{}} placeholder"
            )


def _read(source: str | IO[str]) -> str:
    return source if isinstance(source, str) else source.read()


def parse_bio(source: str | IO[str]) -> list[BioSentence]:
    """Parse a canonical BIO file into one BioSentence per block.

    Orphan I-x tags (no preceding B-x/I-x of the same slot) are repaired by
    treating them as B-x, with a warning: dropping data in few-shot regimes
    is costlier than repair.
    """
    lines = _read(source).splitlines()
    sentences: list[BioSentence] = []
    seen_ids: set[str] = set()

    block: list[tuple[int, str]] = []
    for number, line in enumerate(lines, start=1):
        if line.strip():
            block.append((number, line))
        elif block:
            sentences.append(_parse_bio_block(block, seen_ids))
            block = []
    if block:
        sentences.append(_parse_bio_block(block, seen_ids))
    return sentences


def _parse_bio_block(
    block: list[tuple[int, str]], seen_ids: set[str]
) -> BioSentence:
    number, line = block[0]
    if not line.startswith("#id ") or not line[4:].strip():
        raise ParseError(f"line {number}: expected '#id <record_id>', got {line!r}")
    record_id = line[4:].strip()
    if record_id in seen_ids:
        raise ParseError(f"line {number}: duplicate record id {record_id!r}")
    seen_ids.add(record_id)

    if len(block) < 2:
        raise ParseError(f"line {number}: record {record_id!r} is missing its '#intent' line")
    number, line = block[1]
    if line != "#intent" and not line.startswith("#intent "):
        raise ParseError(f"line {number}: expected '#intent <labels>', got {line!r}")
    rest = line[len("#intent") :].strip()
    intents = tuple(part.strip() for part in rest.split(",") if part.strip())

    tokens: list[str] = []
    tags: list[str] = []
    for number, line in block[2:]:
        columns = line.split("\t")
        if len(columns) != 2:
            raise ParseError(
                f"line {number}: expected token<TAB>tag ({len(columns)} columns found)"
            )
        token, tag = columns
        if not token.strip():
            raise ParseError(f"line {number}: empty token")
        if not _TAG_RE.match(tag):
            raise ParseError(f"line {number}: tag {tag!r} is not O, B-<slot> or I-<slot>")
        tokens.append(token)
        tags.append(tag)

    return BioSentence(record_id, tuple(tokens), tuple(_repair_tags(tags, record_id)), intents)


def _repair_tags(tags: list[str], record_id: str) -> list[str]:
    repaired: list[str] = []
    previous_slot: str | None = None
    for tag in tags:
        if tag.startswith("I-"):
            slot = tag[2:]
            if previous_slot != slot:
                logger.warning(
                    "record %s: orphan tag %s repaired to B-%s", record_id, tag, slot
                )
                tag = "B-" + slot
            previous_slot = slot
        elif tag.startswith("B-"):
            previous_slot = tag[2:]
        else:
            previous_slot = None
        repaired.append(tag)
    return repaired


def render_bio(sentences: Iterable[BioSentence]) -> str:
    """Inverse of parse_bio; emits the canonical format."""
    blocks = []
    for sentence in sentences:
        lines = [f"#id {sentence.record_id}", "#intent " + ",".join(sentence.intents)]
        if not sentence.intents:
            lines[1] = "#intent"
        lines.extend(f"{token}\t{tag}" for token, tag in zip(sentence.tokens, sentence.tags))
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + ("\n" if blocks else "")


def bio_to_spans(sentence: BioSentence) -> NluRecord:
    """Reconstruct character spans from BIO tags.

    The context is the tokens joined by single spaces: deterministic and
    reversible for offset math. Each maximal B/I run of one slot becomes a
    single span.
    """
    context = " ".join(sentence.tokens)
    starts: list[int] = []
    position = 0
    for token in sentence.tokens:
        starts.append(position)
        position += len(token) + 1

    spans: list[SlotSpan] = []
    run_slot: str | None = None
    run_start_token = 0
    for index, tag in enumerate(list(sentence.tags) + ["O"]):
        slot = tag[2:] if tag != "O" else None
        continues = tag.startswith("I-") and slot == run_slot
        if run_slot is not None and not continues:
            start = starts[run_start_token]
            end = starts[index - 1] + len(sentence.tokens[index - 1])
            spans.append(SlotSpan(run_slot, start, end, context[start:end]))
            run_slot = None
        if tag.startswith("B-"):
            run_slot = slot
            run_start_token = index

    return NluRecord(
        record_id=sentence.record_id,
        utterance=context,
        slots=tuple(spans),
        intents=frozenset(sentence.intents),
    )


def parse_span_docs(source: str | IO[str]) -> list[NluRecord]:
    """Parse a span-annotated JSON document into NluRecords.

    The requested-slot list of each turn is retained on the record for
    later frame assembly.
    """
    try:
        document = json.loads(_read(source))
    except json.JSONDecodeError as exc:
        raise ParseError(f"span document is not valid JSON: {exc}") from exc
    if not isinstance(document, list):
        raise ParseError("span document must be a top-level list of records")

    records: list[NluRecord] = []
    seen_ids: set[str] = set()
    for index, raw in enumerate(document):
        where = f"record {index}"
        if not isinstance(raw, dict):
            raise ParseError(f"{where}: not an object")
        record_id = raw.get("id")
        text = raw.get("text")
        if not isinstance(record_id, str) or not record_id:
            raise ParseError(f"{where}: missing or empty 'id'")
        if not isinstance(text, str):
            raise ParseError(f"record {record_id!r}: missing 'text'")
        if record_id in seen_ids:
            raise ParseError(f"record {record_id!r}: duplicate record id")
        seen_ids.add(record_id)

        requested = raw.get("requested_slots", [])
        if not isinstance(requested, list) or not all(isinstance(s, str) for s in requested):
            raise ParseError(f"record {record_id!r}: 'requested_slots' must be a list of strings")

        spans: list[SlotSpan] = []
        for label in raw.get("labels", []):
            if not isinstance(label, dict):
                raise ParseError(f"record {record_id!r}: label entries must be objects")
            slot = label.get("slot")
            start = label.get("start")
            end = label.get("end")
            if not isinstance(slot, str) or not slot:
                raise ParseError(f"record {record_id!r}: label missing 'slot'")
            if not isinstance(start, int) or not isinstance(end, int):
                raise ParseError(f"record {record_id!r}: label offsets must be integers")
            if not (0 <= start < end <= len(text)):
                raise ParseError(
                    f"record {record_id!r}: span [{start}, {end}) out of bounds for slot {slot!r}"
                )
            value = text[start:end]
            declared = label.get("value")
            if declared is not None and declared != value:
                raise ParseError(
                    f"record {record_id!r}: declared value {declared!r} does not match "
                    f"text substring {value!r} for slot {slot!r}"
                )
            spans.append(SlotSpan(slot, start, end, value))

        records.append(
            NluRecord(
                record_id=record_id,
                utterance=text,
                slots=tuple(spans),
                requested_slots=tuple(requested),
            )
        )
    return records


def render_span_docs(records: Iterable[NluRecord]) -> str:
    """Emit records in the span-annotated JSON layout (raw utterances)."""
    payload = [
        {
            "id": record.record_id,
            "text": record.utterance,
            "requested_slots": list(record.requested_slots),
            "labels": [
                {
                    "slot": span.slot_name,
                    "start": span.start - record.context_offset,
                    "end": span.end - record.context_offset,
                }
                for span in record.slots
            ],
        }
        for record in records
    ]
    return json.dumps(payload, ensure_ascii=False, indent=2) + "\n"


def assemble_context(
    record: NluRecord, requested_slots: Iterable[str], opts: FrameOptions
) -> NluRecord:
    """Prefix the utterance with a simple frame naming the requested slots.

    The prefix stands in for the missing system side of the conversation.
    All span offsets shift by the prefix length; `context_offset` records
    the shift so the raw utterance stays recoverable.
    """
    requested = [slot for slot in requested_slots if slot]
    if not opts.include_prev_turn or not requested:
        return record

    slot_list = " and ".join(tokenize_label(slot) for slot in requested)
    prefix = opts.frame_template.replace("{}", slot_list) + opts.separator
    shift = len(prefix)
    return NluRecord(
        record_id=record.record_id,
        utterance=record.utterance,
        slots=tuple(
            SlotSpan(span.slot_name, span.start + shift, span.end + shift, span.value)
            for span in record.slots
        ),
        intents=record.intents,
        context=prefix + record.utterance,
        context_offset=shift,
        requested_slots=record.requested_slots,
    )
