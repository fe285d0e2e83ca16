import pytest
from transformers import AutoTokenizer

from fixture_paths import TOY_CORPUS
from qa_harness.corpus import QaExample, load_squad
from qa_harness.features import encode_examples


@pytest.fixture(scope="module")
def tokenizer(base_model_dir):
    return AutoTokenizer.from_pretrained(base_model_dir)


def test_labels_recover_answer_span(tokenizer):
    examples = load_squad(TOY_CORPUS)
    windows = encode_examples(tokenizer, examples, max_seq_length=64, doc_stride=16, with_labels=True)
    assert len(windows) == len(examples)
    for window in windows:
        example = examples[window.example_index]
        if example.is_impossible:
            assert window.start_position == window.end_position == window.cls_index
        else:
            text, start = example.answers[0]
            char_start = window.offsets[window.start_position][0]
            char_end = window.offsets[window.end_position][1]
            assert example.context[char_start:char_end] == text
            assert char_start == start


def test_long_context_splits_into_windows(tokenizer):
    context = " ".join(["show cheap italian restaurants"] * 12) + " show cheap vegan restaurants"
    answer = "vegan"
    example = QaExample(
        item_id="long|slot|cuisine|0",
        question="what cuisine was mentioned?",
        context=context,
        answers=((answer, context.index(answer)),),
        is_impossible=False,
    )
    windows = encode_examples(tokenizer, [example], max_seq_length=32, doc_stride=8, with_labels=True)
    assert len(windows) > 1
    labeled = [w for w in windows if w.start_position != w.cls_index]
    assert labeled, "some window must contain the answer"
    for window in labeled:
        char_start = window.offsets[window.start_position][0]
        char_end = window.offsets[window.end_position][1]
        assert context[char_start:char_end] == answer
    unlabeled = [w for w in windows if w.start_position == w.cls_index]
    assert unlabeled, "windows without the answer label the null position"


def test_offsets_cover_only_context_tokens(tokenizer):
    examples = load_squad(TOY_CORPUS)[:1]
    windows = encode_examples(tokenizer, examples, max_seq_length=64, doc_stride=16, with_labels=False)
    window = windows[0]
    sep_id = tokenizer.sep_token_id
    first_sep = window.input_ids.index(sep_id)
    for position, offset in enumerate(window.offsets):
        if offset is not None:
            assert position > first_sep
            start, end = offset
            assert examples[0].context[start:end]
