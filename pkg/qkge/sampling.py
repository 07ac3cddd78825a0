"""Negative examples by uniform tail corruption."""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .data import KnowledgeGraph, Triple
from .errors import ConfigurationError
from .model import LabeledExample


class NegativeStrategy(str, Enum):
    UNIFORM_TAIL = "uniform-tail"


class NegativeMode(str, Enum):
    """How k sampled tails become training examples."""

    SUPERPOSED = "superposed"  # one example scored by the k-tail mean
    SEPARATE = "separate"  # k single-tail examples


@dataclass(frozen=True)
class NegativeSpec:
    k: int = 1
    strategy: NegativeStrategy = NegativeStrategy.UNIFORM_TAIL
    seed: int = 42
    mode: NegativeMode = NegativeMode.SUPERPOSED
    filter_known: bool = False

    def __post_init__(self):
        if self.k < 1:
            raise ConfigurationError(f"Negatives per positive must be >= 1, got {self.k}")
        if self.seed < 0:
            raise ConfigurationError(f"Seed must be non-negative, got {self.seed}")


def sample_negative_tails(
    kg: KnowledgeGraph, positive: Triple, spec: NegativeSpec, draw_index: int
) -> list[int]:
    """k distinct entity ids, never the positive's tail.

    The draw depends only on (spec.seed, draw_index). With `filter_known`
    every training tail of (head, relation) is excluded as well.
    """
    entity_count = kg.entity_count
    if entity_count < spec.k + 1:
        raise ConfigurationError(
            f"{spec.k} negative tails need at least {spec.k + 1} entities, have {entity_count}"
        )
    excluded = {positive.tail}
    if spec.filter_known:
        excluded |= kg.known_train_tails(positive.head, positive.relation)
    pool = np.setdiff1d(np.arange(entity_count), np.fromiter(excluded, dtype=np.int64))
    if len(pool) < spec.k:
        raise ConfigurationError(
            f"Only {len(pool)} candidate tails left for {positive} after filtering, need {spec.k}"
        )
    rng = np.random.default_rng((spec.seed, draw_index))
    picks = rng.choice(len(pool), size=spec.k, replace=False)
    return [int(pool[i]) for i in picks]


def negative_examples(
    kg: KnowledgeGraph, positive: Triple, spec: NegativeSpec, draw_index: int
) -> list[LabeledExample]:
    tails = sample_negative_tails(kg, positive, spec, draw_index)
    if spec.mode is NegativeMode.SUPERPOSED:
        return [LabeledExample(positive.head, positive.relation, tuple(tails), 0.0)]
    return [LabeledExample(positive.head, positive.relation, (t,), 0.0) for t in tails]


def build_training_examples(
    kg: KnowledgeGraph, train_ids: Sequence[int], spec: NegativeSpec, epoch: int
) -> list[LabeledExample]:
    """Positives (label 1) from `kg.train[i]` followed by their negatives.

    Draw index of training triple i in epoch e is e * len(train) + i, so
    the negative stream does not depend on batching or shuffling.
    """
    examples = []
    for i in train_ids:
        positive = kg.train[i]
        examples.append(LabeledExample(positive.head, positive.relation, (positive.tail,), 1.0))
        examples.extend(negative_examples(kg, positive, spec, epoch * len(kg.train) + i))
    return examples
