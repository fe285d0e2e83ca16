"""Shared test utilities: random dataset builders and independent oracles.

The scoring oracle here deliberately re-derives everything from explicit
triple enumeration so it stays independent of the implementation path it
checks.
"""

from __future__ import annotations

import random
import string

from nlu2qa.schema import (
    NluRecord,
    Prediction,
    QaAnswer,
    QaCorpus,
    QaGroup,
    QaItem,
    QaParagraph,
    QuestionCatalog,
    SlotSpan,
)

WORDS = [
    "show", "cheap", "italian", "restaurants", "book", "a", "table", "for",
    "four", "people", "at", "noon", "café", "zürich", "flights", "to",
    "boston", "denver", "tomorrow", "morning", "première", "vegan",
]

TOY_UTTERANCE = "Show cheap Italian restaurants"

TOY_BIO = """\
#id r1
#intent inform
Show\tO
cheap\tB-price range
Italian\tB-cuisine
restaurants\tO
"""

TOY_SPAN_DOCS = [
    {
        "id": "s1",
        "text": "for four people",
        "requested_slots": ["people"],
        "labels": [{"slot": "people", "start": 4, "end": 8}],
    },
    {
        "id": "s2",
        "text": "any time after noon works",
        "requested_slots": [],
        "labels": [{"slot": "time", "start": 9, "end": 19}],
    },
]

TOY_CATALOG_JSON = {
    "slot_questions": {
        "cuisine": ["what cuisine was mentioned?", "what type of food was specified?"],
        "price range": ["what price range?"],
        "area": ["what part of town was mentioned?", "what area?"],
    },
    "slot_question_templates": [],
}

SLOT_POOL = ["cuisine", "price range", "area", "people", "date", "time", "first_name"]
INTENT_POOL = ["inform", "request", "book_table", "atis_flight", "atis_airfare"]


def random_record(
    rng: random.Random,
    record_id: str,
    slot_names: list[str],
    intent_names: list[str],
    max_tokens: int = 12,
    one_span_per_slot: bool = False,
) -> NluRecord:
    n_tokens = rng.randint(1, max_tokens)
    tokens = [rng.choice(WORDS) for _ in range(n_tokens)]
    context = " ".join(tokens)
    starts = []
    position = 0
    for token in tokens:
        starts.append(position)
        position += len(token) + 1

    spans: list[SlotSpan] = []
    used_slots: set[str] = set()
    index = 0
    while index < n_tokens:
        if slot_names and rng.random() < 0.4:
            slot = rng.choice(slot_names)
            if one_span_per_slot and slot in used_slots:
                index += 1
                continue
            run = rng.randint(1, min(2, n_tokens - index))
            start = starts[index]
            end = starts[index + run - 1] + len(tokens[index + run - 1])
            spans.append(SlotSpan(slot, start, end, context[start:end]))
            used_slots.add(slot)
            index += run
        else:
            index += 1

    intents = frozenset(
        rng.sample(intent_names, rng.randint(0, len(intent_names))) if intent_names else []
    )
    return NluRecord(
        record_id=record_id,
        utterance=context,
        slots=tuple(spans),
        intents=intents,
    )


def random_dataset(
    rng: random.Random,
    n_records: int,
    slot_names: list[str] | None = None,
    intent_names: list[str] | None = None,
    **kwargs,
) -> list[NluRecord]:
    slot_names = SLOT_POOL[: rng.randint(2, len(SLOT_POOL))] if slot_names is None else slot_names
    intent_names = (
        INTENT_POOL[: rng.randint(1, len(INTENT_POOL))] if intent_names is None else intent_names
    )
    return [
        random_record(rng, f"r{index:04d}", slot_names, intent_names, **kwargs)
        for index in range(n_records)
    ]


def catalog_for(slot_names: list[str], rng: random.Random | None = None) -> QuestionCatalog:
    slot_questions = {}
    for slot in slot_names:
        count = rng.randint(1, 3) if rng else 1
        slot_questions[slot] = tuple(
            f"question {index} about {slot}?" for index in range(count)
        )
    return QuestionCatalog(slot_questions=slot_questions)


def random_corpus(rng: random.Random) -> QaCorpus:
    """Arbitrary valid corpus (ids need not follow the pipeline scheme)."""
    groups = []
    for group_index in range(rng.randint(1, 3)):
        paragraphs = []
        for paragraph_index in range(rng.randint(1, 4)):
            context = " ".join(rng.choice(WORDS) for _ in range(rng.randint(1, 15)))
            items = []
            for item_index in range(rng.randint(0, 5)):
                item_id = f"id-{group_index}-{paragraph_index}-{item_index}"
                question = f"question {item_index}?"
                if rng.random() < 0.3:
                    items.append(QaItem(item_id, question, (), True))
                else:
                    answers = []
                    for _ in range(rng.randint(1, 2)):
                        start = rng.randrange(len(context))
                        end = rng.randrange(start + 1, len(context) + 1)
                        answers.append(QaAnswer(context[start:end], start))
                    items.append(QaItem(item_id, question, tuple(answers), False))
            paragraphs.append(QaParagraph(context, tuple(items)))
        groups.append(QaGroup(f"group-{group_index}", tuple(paragraphs)))
    return QaCorpus(version="v2.0", groups=tuple(groups))


def oracle_predictions(corpus: QaCorpus) -> dict[str, Prediction]:
    """Gold predictions: first answer with full confidence, else abstain."""
    predictions = {}
    for _, item in corpus.iter_items():
        if item.is_impossible:
            predictions[item.item_id] = Prediction("", 0.0, 1.0)
        else:
            predictions[item.item_id] = Prediction(item.answers[0].text, 1.0, 0.0)
    return predictions


# --- independent brute-force scorer -----------------------------------------

def bf_normalize(value: str) -> str:
    collapsed = " ".join(value.split())
    return collapsed.lower().strip(string.punctuation + " \t")


def bf_counts(gold: set, predicted: set) -> tuple[int, int, int]:
    tp = fp = fn = 0
    for entry in gold:
        if entry in predicted:
            tp += 1
        else:
            fn += 1
    for entry in predicted:
        if entry not in gold:
            fp += 1
    return tp, fp, fn


def bf_prf(tp: int, fp: int, fn: int) -> tuple[float, float, float]:
    if tp == 0 and fp == 0 and fn == 0:
        return 1.0, 1.0, 1.0
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


def bf_slot_triples(records) -> set:
    triples = set()
    for record in records:
        for span in record.slots:
            triples.add((record.record_id, span.slot_name, bf_normalize(span.value)))
    return triples


def bf_decoded_triples(decoded) -> set:
    triples = set()
    for record in decoded:
        for slot, values in record.predicted_slots.items():
            for value in values:
                triples.add((record.record_id, slot, bf_normalize(value)))
    return triples


def bf_intent_pairs(records) -> set:
    return {(record.record_id, intent) for record in records for intent in record.intents}


def bf_decoded_pairs(decoded) -> set:
    return {
        (record.record_id, intent)
        for record in decoded
        for intent in record.predicted_intents
    }
