"""Turn QA examples into model inputs.

Long contexts are split into overlapping windows (doc stride). Training
labels point at the answer's token span when the window contains it and
at [CLS] otherwise, which is also how unanswerable items supervise the
null answer.
"""

from __future__ import annotations

import inspect
from dataclasses import dataclass

from .corpus import QaExample


def accepts_token_type_ids(model) -> bool:
    # BERT-style models take segment ids; DistilBERT/RoBERTa-style do not
    return "token_type_ids" in inspect.signature(model.forward).parameters


@dataclass
class Window:
    example_index: int
    input_ids: list[int]
    attention_mask: list[int]
    token_type_ids: list[int]
    # char offsets per token; None outside the context segment
    offsets: list[tuple[int, int] | None]
    cls_index: int
    start_position: int | None = None
    end_position: int | None = None


def encode_examples(
    tokenizer,
    examples: list[QaExample],
    max_seq_length: int,
    doc_stride: int,
    with_labels: bool,
) -> list[Window]:
    windows: list[Window] = []
    for example_index, example in enumerate(examples):
        encoded = tokenizer(
            example.question,
            example.context,
            truncation="only_second",
            max_length=max_seq_length,
            stride=doc_stride,
            return_overflowing_tokens=True,
            return_offsets_mapping=True,
            return_token_type_ids=True,
            padding="max_length",
        )
        for index in range(len(encoded["input_ids"])):
            sequence_ids = encoded.sequence_ids(index)
            input_ids = encoded["input_ids"][index]
            raw_offsets = encoded["offset_mapping"][index]
            offsets = [
                tuple(offset) if sequence_ids[position] == 1 else None
                for position, offset in enumerate(raw_offsets)
            ]
            cls_index = input_ids.index(tokenizer.cls_token_id)
            window = Window(
                example_index=example_index,
                input_ids=input_ids,
                attention_mask=encoded["attention_mask"][index],
                token_type_ids=encoded["token_type_ids"][index],
                offsets=offsets,
                cls_index=cls_index,
            )
            if with_labels:
                window.start_position, window.end_position = _label_positions(
                    example, window
                )
            windows.append(window)
    return windows


def _label_positions(example: QaExample, window: Window) -> tuple[int, int]:
    if example.is_impossible or not example.answers:
        return window.cls_index, window.cls_index
    text, char_start = example.answers[0]
    char_end = char_start + len(text)

    context_positions = [
        position for position, offset in enumerate(window.offsets) if offset is not None
    ]
    if not context_positions:
        return window.cls_index, window.cls_index
    first, last = context_positions[0], context_positions[-1]
    if window.offsets[first][0] > char_start or window.offsets[last][1] < char_end:
        # answer not fully inside this window
        return window.cls_index, window.cls_index
    start = first
    while start <= last and window.offsets[start][1] <= char_start:
        start += 1
    end = last
    while end >= first and window.offsets[end][0] >= char_end:
        end -= 1
    if start > end:
        return window.cls_index, window.cls_index
    return start, end
