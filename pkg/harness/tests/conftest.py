import json
from pathlib import Path

import pytest
import torch
from tokenizers import Tokenizer, models, normalizers, pre_tokenizers, processors
from transformers import BertConfig, BertForQuestionAnswering, BertTokenizerFast

from fixture_paths import BOOKING_CORPUS, TOY_CORPUS


def corpus_strings(path: Path) -> list[str]:
    payload = json.loads(path.read_text(encoding="utf-8"))
    strings = []
    for group in payload["data"]:
        for paragraph in group["paragraphs"]:
            strings.append(paragraph["context"])
            strings.extend(item["question"] for item in paragraph["qas"])
    return strings


@pytest.fixture(scope="session")
def base_model_dir(tmp_path_factory) -> Path:
    """Tiny randomly-initialized BERT-style QA checkpoint.

    Stands in for a pre-trained base model: the sandbox has no model-hub
    access, so the "pre-training" is only a corpus-derived vocabulary.
    Weights are random; the fine-tuning tests must do the actual learning.
    """
    target = tmp_path_factory.mktemp("base-qa-model")

    normalizer = normalizers.BertNormalizer(lowercase=True)
    pre_tokenizer = pre_tokenizers.BertPreTokenizer()
    vocab = {"[PAD]": 0, "[UNK]": 1, "[CLS]": 2, "[SEP]": 3, "[MASK]": 4}
    for path in (TOY_CORPUS, BOOKING_CORPUS):
        for text in corpus_strings(path):
            for piece, _ in pre_tokenizer.pre_tokenize_str(normalizer.normalize_str(text)):
                vocab.setdefault(piece, len(vocab))

    backend = Tokenizer(models.WordPiece(vocab=vocab, unk_token="[UNK]"))
    backend.normalizer = normalizer
    backend.pre_tokenizer = pre_tokenizer
    backend.post_processor = processors.TemplateProcessing(
        single="[CLS] $A [SEP]",
        pair="[CLS] $A [SEP] $B:1 [SEP]:1",
        special_tokens=[("[CLS]", vocab["[CLS]"]), ("[SEP]", vocab["[SEP]"])],
    )
    tokenizer = BertTokenizerFast(
        tokenizer_object=backend,
        unk_token="[UNK]",
        pad_token="[PAD]",
        cls_token="[CLS]",
        sep_token="[SEP]",
        mask_token="[MASK]",
        model_max_length=64,
    )
    tokenizer.save_pretrained(target)

    config = BertConfig(
        vocab_size=len(vocab),
        hidden_size=64,
        num_hidden_layers=2,
        num_attention_heads=2,
        intermediate_size=128,
        max_position_embeddings=64,
    )
    torch.manual_seed(1234)
    BertForQuestionAnswering(config).save_pretrained(target)
    return target
