"""Run a checkpoint over an evaluation corpus and write prediction files.

Decoding follows standard SQuAD2.0 null handling: the no-answer score is
the [CLS] start+end logit sum (minimum across an example's windows), the
answer is the best-scoring valid span across windows, and the scorer
downstream treats span_score > no_answer_score as answering. Output
layout: {item_id: {"text", "span_score", "no_answer_score"}}.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path

import torch
from transformers import AutoModelForQuestionAnswering, AutoTokenizer

from .corpus import load_squad
from .features import accepts_token_type_ids, encode_examples

logger = logging.getLogger(__name__)

# fallback span score when a window holds no valid span at all
_NO_SPAN = -1e30


@dataclass
class PredictOptions:
    batch_size: int = 16
    max_seq_length: int = 384
    doc_stride: int = 128
    max_answer_length: int = 30
    top_k: int = 20
    device: str = "cpu"


def predict(
    checkpoint: str | Path,
    eval_corpus_file: str | Path,
    out_predictions: str | Path,
    options: PredictOptions | None = None,
) -> Path:
    opts = options or PredictOptions()
    device = torch.device(opts.device)

    tokenizer = AutoTokenizer.from_pretrained(checkpoint)
    model = AutoModelForQuestionAnswering.from_pretrained(checkpoint).to(device)
    model.eval()

    examples = load_squad(eval_corpus_file)
    windows = encode_examples(
        tokenizer, examples, opts.max_seq_length, opts.doc_stride, with_labels=False
    )

    best_span: dict[int, tuple[float, str]] = {}
    null_score: dict[int, float] = {}

    use_token_types = accepts_token_type_ids(model)
    for batch_start in range(0, len(windows), opts.batch_size):
        batch = windows[batch_start : batch_start + opts.batch_size]
        kwargs = {
            "input_ids": torch.tensor([w.input_ids for w in batch]).to(device),
            "attention_mask": torch.tensor([w.attention_mask for w in batch]).to(device),
        }
        if use_token_types:
            kwargs["token_type_ids"] = torch.tensor([w.token_type_ids for w in batch]).to(device)
        with torch.no_grad():
            outputs = model(**kwargs)
        start_logits = outputs.start_logits.cpu()
        end_logits = outputs.end_logits.cpu()
        for row, window in enumerate(batch):
            example = examples[window.example_index]
            score, text = _best_window_span(
                example.context,
                window.offsets,
                start_logits[row],
                end_logits[row],
                opts,
            )
            window_null = (
                start_logits[row][window.cls_index] + end_logits[row][window.cls_index]
            ).item()
            key = window.example_index
            null_score[key] = min(null_score.get(key, window_null), window_null)
            if key not in best_span or score > best_span[key][0]:
                best_span[key] = (score, text)

    payload = {}
    for index, example in enumerate(examples):
        score, text = best_span.get(index, (_NO_SPAN, ""))
        payload[example.item_id] = {
            "text": text,
            "span_score": score,
            "no_answer_score": null_score.get(index, 0.0),
        }

    target = Path(out_predictions)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(
        json.dumps(payload, ensure_ascii=False, indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    logger.info("wrote %d predictions to %s", len(payload), target)
    return target


def _best_window_span(
    context: str,
    offsets: list[tuple[int, int] | None],
    start_logits: torch.Tensor,
    end_logits: torch.Tensor,
    opts: PredictOptions,
) -> tuple[float, str]:
    context_positions = [
        position for position, offset in enumerate(offsets) if offset is not None
    ]
    if not context_positions:
        return _NO_SPAN, ""
    candidates = torch.tensor(context_positions)
    k = min(opts.top_k, len(context_positions))
    top_starts = candidates[start_logits[candidates].topk(k).indices]
    top_ends = candidates[end_logits[candidates].topk(k).indices]

    best_score, best_text = _NO_SPAN, ""
    for start in top_starts.tolist():
        for end in top_ends.tolist():
            if end < start:
                continue
            if end - start + 1 > opts.max_answer_length:
                continue
            score = (start_logits[start] + end_logits[end]).item()
            if score > best_score:
                char_start = offsets[start][0]
                char_end = offsets[end][1]
                best_score, best_text = score, context[char_start:char_end]
    return best_score, best_text
