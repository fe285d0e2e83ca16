"""Few-shot training subsets: uniform and per-label stratified sampling.

All sampling is driven by SplitMix64, a 64-bit generator with published
reference outputs, so a (records, n, seed) triple reproduces the same
sample on any implementation. Selection never depends on input container
order: candidates are canonicalized by record_id, and output keeps the
original dataset order.
"""

from __future__ import annotations

import json
import logging
from collections import Counter
from typing import Callable, Iterable, Sequence

from .errors import SampleError
from .schema import NluRecord

logger = logging.getLogger(__name__)

_MASK64 = (1 << 64) - 1


class SplitMix64:
    """SplitMix64 sequence generator (the java.util.SplittableRandom mixer)."""

    def __init__(self, seed: int) -> None:
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def below(self, n: int) -> int:
        """Uniform integer in [0, n), bias-free by rejection."""
        if n <= 0:
            raise ValueError("n must be positive")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            value = self.next_u64()
            if value < limit:
                return value % n

    def choose_indices(self, population: int, k: int) -> list[int]:
        """k distinct indices from range(population), partial Fisher-Yates."""
        indices = list(range(population))
        for i in range(k):
            j = i + self.below(population - i)
            indices[i], indices[j] = indices[j], indices[i]
        return indices[:k]


def _check_unique_ids(records: Sequence[NluRecord]) -> None:
    counts = Counter(record.record_id for record in records)
    duplicates = sorted(rid for rid, count in counts.items() if count > 1)
    if duplicates:
        raise SampleError(f"duplicate record ids: {', '.join(duplicates[:5])}")


def sample_uniform(records: Sequence[NluRecord], n: int, seed: int) -> list[NluRecord]:
    """n distinct records drawn uniformly without replacement.

    Output keeps original dataset order; identical (records, n, seed)
    give identical output.
    """
    _check_unique_ids(records)
    if not 0 <= n <= len(records):
        raise SampleError(f"cannot draw {n} records from {len(records)}")
    ordered_ids = sorted(record.record_id for record in records)
    rng = SplitMix64(seed)
    chosen = {ordered_ids[i] for i in rng.choose_indices(len(ordered_ids), n)}
    return [record for record in records if record.record_id in chosen]


def sample_per_slot(
    records: Sequence[NluRecord],
    n: int,
    seed: int,
    slot_schema: Iterable[str] | None = None,
    best_effort: bool = False,
) -> list[NluRecord]:
    """Smallest-effort subset in which every slot occurs in >= n records.

    A slot supported by fewer than n records raises SampleError naming it,
    unless best_effort downgrades that to a warning and covers what it can.
    """
    return _covering_sample(
        records,
        n,
        seed,
        label_kind="slot",
        labels_of=lambda record: record.slot_names(),
        schema=slot_schema,
        best_effort=best_effort,
    )


def sample_per_intent(
    records: Sequence[NluRecord],
    n: int,
    seed: int,
    intent_schema: Iterable[str] | None = None,
    best_effort: bool = False,
) -> list[NluRecord]:
    """As sample_per_slot, with intent labels in place of slots."""
    return _covering_sample(
        records,
        n,
        seed,
        label_kind="intent",
        labels_of=lambda record: set(record.intents),
        schema=intent_schema,
        best_effort=best_effort,
    )


def _covering_sample(
    records: Sequence[NluRecord],
    n: int,
    seed: int,
    label_kind: str,
    labels_of: Callable[[NluRecord], set[str]],
    schema: Iterable[str] | None,
    best_effort: bool,
) -> list[NluRecord]:
    # Greedy, rarest label first. For each label short of quota we draw
    # seeded-uniformly among the remaining supporters that help the most
    # still-deficient labels, which keeps samples small without promising
    # minimal cardinality (set cover is NP-hard; greedy suffices).
    _check_unique_ids(records)
    if n < 0:
        raise SampleError("n must be >= 0")

    support: dict[str, list[NluRecord]] = {}
    for record in sorted(records, key=lambda r: r.record_id):
        for label in labels_of(record):
            support.setdefault(label, []).append(record)

    labels = sorted(set(schema)) if schema is not None else sorted(support)
    for label in labels:
        available = len(support.get(label, []))
        if available < n:
            message = (
                f"{label_kind} {label!r} occurs in {available} records, "
                f"but {n} are required"
            )
            if not best_effort:
                raise SampleError(message)
            logger.warning("%s; continuing best-effort", message)

    quota = {label: min(n, len(support.get(label, []))) if best_effort else n for label in labels}
    achieved: Counter[str] = Counter()
    chosen: set[str] = set()
    rng = SplitMix64(seed)

    def deficient_gain(record: NluRecord) -> int:
        return sum(
            1
            for label in labels_of(record)
            if label in quota and achieved[label] < quota[label]
        )

    for label in sorted(labels, key=lambda lb: (len(support.get(lb, [])), lb)):
        pool = support.get(label, [])
        while achieved[label] < quota[label]:
            remaining = [record for record in pool if record.record_id not in chosen]
            if not remaining:
                break  # only reachable in best-effort mode
            gains = [deficient_gain(record) for record in remaining]
            best = max(gains)
            candidates = [r for r, g in zip(remaining, gains) if g == best]
            pick = candidates[rng.below(len(candidates))]
            chosen.add(pick.record_id)
            for covered in labels_of(pick):
                achieved[covered] += 1

    return [record for record in records if record.record_id in chosen]


def label_counts(sampled: Sequence[NluRecord]) -> dict[str, dict[str, int]]:
    """Records-bearing-label counts for slots and intents of a sample."""
    slot_counts: Counter[str] = Counter()
    intent_counts: Counter[str] = Counter()
    for record in sampled:
        for slot in record.slot_names():
            slot_counts[slot] += 1
        for intent in record.intents:
            intent_counts[intent] += 1
    return {
        "slots": dict(sorted(slot_counts.items())),
        "intents": dict(sorted(intent_counts.items())),
    }


def build_manifest(
    strategy: str, seed: int, n: int, sampled: Sequence[NluRecord]
) -> dict:
    """Reproducibility manifest for one sampling run."""
    return {
        "strategy": strategy,
        "seed": seed,
        "n": n,
        "total": len(sampled),
        "record_ids": [record.record_id for record in sampled],
        "label_counts": label_counts(sampled),
    }


def dumps_manifest(manifest: dict) -> str:
    return json.dumps(manifest, ensure_ascii=False, indent=2, sort_keys=True) + "\n"
