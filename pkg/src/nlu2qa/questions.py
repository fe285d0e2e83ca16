"""Question catalogs: loading, template expansion, intent questions.

Catalog file layout (UTF-8 JSON)::

    {
      "slot_questions": {"<slot>": ["<question>", ...], ...},
      "slot_descriptions": {"<slot>": "<short phrase>", ...},
      "slot_question_templates": ["what {} was mentioned?", ...],
      "intent_question_template": "is the intent asking about {}?"
    }

All keys are optional. An absent "slot_question_templates" means no
template expansion; an absent "intent_question_template" falls back to
the default. Templates contain exactly one "{}" placeholder.
"""

from __future__ import annotations

import hashlib
import json
import re
from typing import IO, Iterable, Sequence

from .errors import CatalogError
from .schema import (
    DEFAULT_INTENT_QUESTION_TEMPLATE,
    DEFAULT_SLOT_QUESTION_TEMPLATE,
    QuestionCatalog,
)

__all__ = [
    "DEFAULT_SLOT_QUESTION_TEMPLATE",
    "DEFAULT_INTENT_QUESTION_TEMPLATE",
    "tokenize_label",
    "load_catalog",
    "expand_templates",
    "intent_question",
    "catalog_fingerprint",
]

_SEPARATORS = re.compile(r"[_\-.]+")
_SPACES = re.compile(r"\s+")


def tokenize_label(label: str) -> str:
    """Turn a schema label into plain words: "price_range" -> "price range"."""
    return _SPACES.sub(" ", _SEPARATORS.sub(" ", label)).strip().lower()


def _check_template(template: str, what: str) -> None:
    if not isinstance(template, str) or template.count("{}") != 1:
        raise CatalogError(f"{what} {template!r} must contain exactly one {{}} placeholder")


def _reject_duplicate_keys(pairs: list[tuple[str, object]]) -> dict:
    seen: set[str] = set()
    for key, _ in pairs:
        if key in seen:
            raise CatalogError(f"duplicate entry {key!r} in catalog")
        seen.add(key)
    return dict(pairs)


def load_catalog(source: str | IO[str]) -> QuestionCatalog:
    """Load a catalog file, preserving per-slot question order."""
    text = source if isinstance(source, str) else source.read()
    try:
        raw = json.loads(text, object_pairs_hook=_reject_duplicate_keys)
    except json.JSONDecodeError as exc:
        raise CatalogError(f"catalog is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise CatalogError("catalog must be a JSON object")

    slot_questions = raw.get("slot_questions", {})
    if not isinstance(slot_questions, dict):
        raise CatalogError("'slot_questions' must map slot names to question lists")
    for slot, questions in slot_questions.items():
        if not isinstance(questions, list) or not all(
            isinstance(q, str) and q for q in questions
        ):
            raise CatalogError(f"questions for slot {slot!r} must be non-empty strings")

    descriptions = raw.get("slot_descriptions", {})
    if not isinstance(descriptions, dict) or not all(
        isinstance(d, str) for d in descriptions.values()
    ):
        raise CatalogError("'slot_descriptions' must map slot names to strings")

    templates = raw.get("slot_question_templates", [])
    if not isinstance(templates, list):
        raise CatalogError("'slot_question_templates' must be a list")
    for template in templates:
        _check_template(template, "slot question template")

    intent_template = raw.get("intent_question_template", DEFAULT_INTENT_QUESTION_TEMPLATE)
    _check_template(intent_template, "intent question template")

    return QuestionCatalog(
        slot_questions={slot: tuple(qs) for slot, qs in slot_questions.items()},
        slot_descriptions=dict(descriptions),
        slot_question_templates=tuple(templates),
        intent_question_template=intent_template,
    )


def expand_templates(
    catalog: QuestionCatalog,
    slot_schema: Sequence[str] | Sequence[tuple[str, str | None]],
) -> QuestionCatalog:
    """Instantiate every template for every slot in the schema.

    The placeholder is filled with the slot's short description when one is
    available (from the schema entry, else the catalog), otherwise with the
    tokenized slot name. Handcrafted questions keep their positions and
    come first; generated duplicates of existing questions are dropped, so
    expansion is idempotent.

    Raises CatalogError if any schema slot ends up with zero questions.
    """
    normalized: list[tuple[str, str | None]] = []
    for entry in slot_schema:
        if isinstance(entry, str):
            normalized.append((entry, None))
        else:
            slot, description = entry
            normalized.append((slot, description))

    expanded: dict[str, tuple[str, ...]] = {
        slot: questions for slot, questions in catalog.slot_questions.items()
    }
    for slot, description in normalized:
        filler = description or catalog.slot_descriptions.get(slot) or tokenize_label(slot)
        questions = list(expanded.get(slot, ()))
        for template in catalog.slot_question_templates:
            _check_template(template, "slot question template")
            question = template.replace("{}", filler)
            if question not in questions:
                questions.append(question)
        if not questions:
            raise CatalogError(
                f"slot {slot!r} has no questions (no handcrafted entry and no templates)"
            )
        expanded[slot] = tuple(questions)

    return QuestionCatalog(
        slot_questions=expanded,
        slot_descriptions=catalog.slot_descriptions,
        slot_question_templates=catalog.slot_question_templates,
        intent_question_template=catalog.intent_question_template,
    )


def intent_question(intent_label: str, template: str = DEFAULT_INTENT_QUESTION_TEMPLATE) -> str:
    """Instantiate the intent question for one label."""
    _check_template(template, "intent question template")
    return template.replace("{}", tokenize_label(intent_label))


def catalog_fingerprint(catalog: QuestionCatalog) -> str:
    """Stable sha256 over the catalog content, for report provenance."""
    payload = {
        "slot_questions": {s: list(q) for s, q in sorted(catalog.slot_questions.items())},
        "slot_descriptions": dict(sorted(catalog.slot_descriptions.items())),
        "slot_question_templates": list(catalog.slot_question_templates),
        "intent_question_template": catalog.intent_question_template,
    }
    blob = json.dumps(payload, ensure_ascii=False, sort_keys=True).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()


def slot_schema_of(records: Iterable) -> list[str]:
    """Sorted slot inventory observed across records."""
    names: set[str] = set()
    for record in records:
        names.update(span.slot_name for span in record.slots)
    return sorted(names)
