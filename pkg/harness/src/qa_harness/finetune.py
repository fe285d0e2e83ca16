"""Fine-tune a pre-trained extractive QA model on a SQuAD2.0-format file.

The base model may be a hub reference or a local checkpoint directory,
so sequential transfer (fine-tune on corpus A, then continue from that
checkpoint on corpus B) is just two invocations. Training determinism is
best effort: the seed is set and logged, not promised across hardware.
"""

from __future__ import annotations

import json
import logging
import time
from dataclasses import asdict, dataclass
from pathlib import Path

import torch
from torch.utils.data import DataLoader, TensorDataset
from transformers import AutoModelForQuestionAnswering, AutoTokenizer

from .corpus import load_squad
from .features import accepts_token_type_ids, encode_examples

logger = logging.getLogger(__name__)

TRAINING_LOG = "training_log.json"


@dataclass
class Hyperparams:
    epochs: int = 3
    learning_rate: float = 3e-5
    batch_size: int = 8
    max_seq_length: int = 384
    doc_stride: int = 128
    seed: int = 0
    device: str = "cpu"


def finetune(
    train_corpus_file: str | Path,
    base_model_ref: str,
    output_dir: str | Path,
    hyperparams: Hyperparams | None = None,
) -> Path:
    hp = hyperparams or Hyperparams()
    output = Path(output_dir)
    output.mkdir(parents=True, exist_ok=True)

    torch.manual_seed(hp.seed)
    device = torch.device(hp.device)

    tokenizer = AutoTokenizer.from_pretrained(base_model_ref)
    model = AutoModelForQuestionAnswering.from_pretrained(base_model_ref).to(device)

    examples = load_squad(train_corpus_file)
    windows = encode_examples(
        tokenizer, examples, hp.max_seq_length, hp.doc_stride, with_labels=True
    )
    logger.info(
        "fine-tuning %s on %d examples (%d windows)", base_model_ref, len(examples), len(windows)
    )

    epoch_losses: list[float] = []
    steps = 0
    started = time.monotonic()
    if windows:
        dataset = TensorDataset(
            torch.tensor([w.input_ids for w in windows]),
            torch.tensor([w.attention_mask for w in windows]),
            torch.tensor([w.token_type_ids for w in windows]),
            torch.tensor([w.start_position for w in windows]),
            torch.tensor([w.end_position for w in windows]),
        )
        generator = torch.Generator().manual_seed(hp.seed)
        loader = DataLoader(
            dataset, batch_size=hp.batch_size, shuffle=True, generator=generator
        )
        optimizer = torch.optim.AdamW(model.parameters(), lr=hp.learning_rate)

        use_token_types = accepts_token_type_ids(model)
        model.train()
        for epoch in range(hp.epochs):
            total = 0.0
            for input_ids, attention_mask, token_type_ids, starts, ends in loader:
                optimizer.zero_grad()
                kwargs = {
                    "input_ids": input_ids.to(device),
                    "attention_mask": attention_mask.to(device),
                    "start_positions": starts.to(device),
                    "end_positions": ends.to(device),
                }
                if use_token_types:
                    kwargs["token_type_ids"] = token_type_ids.to(device)
                outputs = model(**kwargs)
                outputs.loss.backward()
                optimizer.step()
                total += outputs.loss.item()
                steps += 1
            epoch_losses.append(total / len(loader))
        logger.info("final epoch loss %.4f", epoch_losses[-1])
    else:
        logger.warning("training corpus is empty; saving the base model unchanged")

    model.save_pretrained(output)
    tokenizer.save_pretrained(output)
    log = {
        "base_model": str(base_model_ref),
        "train_corpus": str(train_corpus_file),
        "examples": len(examples),
        "windows": len(windows),
        "steps": steps,
        "epoch_losses": epoch_losses,
        "wall_seconds": round(time.monotonic() - started, 3),
        "hyperparams": asdict(hp),
    }
    (output / TRAINING_LOG).write_text(
        json.dumps(log, indent=2) + "\n", encoding="utf-8"
    )
    return output
