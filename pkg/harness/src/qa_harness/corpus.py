"""Flat view of a SQuAD2.0-format corpus file.

The harness only needs (id, question, context, answers, is_impossible)
per item; grouping and provenance stay in the file.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path


class CorpusError(Exception):
    """The corpus file does not follow the SQuAD2.0 layout."""


@dataclass(frozen=True)
class QaExample:
    item_id: str
    question: str
    context: str
    answers: tuple[tuple[str, int], ...]  # (text, answer_start)
    is_impossible: bool


def load_squad(path: str | Path) -> list[QaExample]:
    source = Path(path)
    if not source.is_file():
        raise CorpusError(f"corpus file not found: {source}")
    try:
        raw = json.loads(source.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise CorpusError(f"{source}: not valid JSON: {exc}") from exc
    if not isinstance(raw, dict) or not isinstance(raw.get("data"), list):
        raise CorpusError(f"{source}: expected an object with a 'data' list")

    examples: list[QaExample] = []
    seen: set[str] = set()
    for group in raw["data"]:
        for paragraph in group.get("paragraphs", []):
            context = paragraph.get("context")
            if not isinstance(context, str):
                raise CorpusError(f"{source}: paragraph without string 'context'")
            for item in paragraph.get("qas", []):
                item_id = item.get("id")
                question = item.get("question")
                if not isinstance(item_id, str) or not isinstance(question, str):
                    raise CorpusError(f"{source}: qa entry without string 'id'/'question'")
                if item_id in seen:
                    raise CorpusError(f"{source}: duplicate item id {item_id!r}")
                seen.add(item_id)
                answers = []
                for answer in item.get("answers", []):
                    text = answer.get("text")
                    start = answer.get("answer_start")
                    if not isinstance(text, str) or not isinstance(start, int):
                        raise CorpusError(f"{source}: malformed answer for {item_id!r}")
                    answers.append((text, start))
                examples.append(
                    QaExample(
                        item_id=item_id,
                        question=question,
                        context=context,
                        answers=tuple(answers),
                        is_impossible=bool(item.get("is_impossible", not answers)),
                    )
                )
    return examples
