import json

import pytest

from helpers import TOY_BIO, TOY_CATALOG_JSON, TOY_SPAN_DOCS, TOY_UTTERANCE
from nlu2qa.schema import NluRecord, QuestionCatalog, SlotSpan


@pytest.fixture
def toy_record():
    # offsets from the substring-index oracle
    text = TOY_UTTERANCE
    return NluRecord(
        record_id="r1",
        utterance=text,
        slots=(
            SlotSpan("price range", text.index("cheap"), text.index("cheap") + len("cheap"), "cheap"),
            SlotSpan(
                "cuisine", text.index("Italian"), text.index("Italian") + len("Italian"), "Italian"
            ),
        ),
        intents=frozenset({"inform"}),
    )


@pytest.fixture
def toy_catalog():
    return QuestionCatalog(
        slot_questions={
            slot: tuple(questions)
            for slot, questions in TOY_CATALOG_JSON["slot_questions"].items()
        },
    )


@pytest.fixture
def toy_catalog_file(tmp_path):
    path = tmp_path / "catalog.json"
    path.write_text(json.dumps(TOY_CATALOG_JSON, ensure_ascii=False, indent=2), encoding="utf-8")
    return path


@pytest.fixture
def toy_bio_file(tmp_path):
    path = tmp_path / "toy.bio"
    path.write_text(TOY_BIO, encoding="utf-8")
    return path


@pytest.fixture
def toy_span_file(tmp_path):
    path = tmp_path / "toy.span.json"
    path.write_text(json.dumps(TOY_SPAN_DOCS, ensure_ascii=False, indent=2), encoding="utf-8")
    return path
