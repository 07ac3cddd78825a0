"""
Minimizes the mean squared error between fidelity scores and labels with Adam.

Positives aim for delta -> 1, their sampled negatives for delta -> 0; both
share one batch, so a batch of P positives holds 2P examples in superposed
mode and P(k + 1) in separate mode.
"""
from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from tqdm import tqdm

from .config import TrainingConfig
from .data import KnowledgeGraph
from .errors import ConfigurationError, NumericalError, UsageError
from .evaluation import EvalMode, evaluate
from .gradient import GradientVector, loss_and_gradient
from .model import EmbeddingStore, Table
from .sampling import build_training_examples

logger = logging.getLogger(__name__)

SHUFFLE_STREAM = 1


def mse_loss(scores: Sequence[float], labels: Sequence[float]) -> float:
    """(1/D) sum (delta - y)^2."""
    if len(scores) != len(labels):
        raise UsageError(f"{len(scores)} scores but {len(labels)} labels")
    if not scores:
        raise UsageError("MSE of an empty batch")
    return math.fsum((s - y) ** 2 for s, y in zip(scores, labels)) / len(scores)


@dataclass
class AdamState:
    """First and second moments shaped like the store tables, plus the step count."""

    entity_m: np.ndarray
    entity_v: np.ndarray
    relation_m: np.ndarray
    relation_v: np.ndarray
    step: int = 0

    @classmethod
    def for_store(cls, store: EmbeddingStore) -> "AdamState":
        return cls(
            np.zeros_like(store.entity_values),
            np.zeros_like(store.entity_values),
            np.zeros_like(store.relation_values),
            np.zeros_like(store.relation_values),
        )

    def moments(self, table: Table) -> tuple[np.ndarray, np.ndarray]:
        if table is Table.ENTITY:
            return self.entity_m, self.entity_v
        return self.relation_m, self.relation_v

    def is_finite(self) -> bool:
        return all(
            np.all(np.isfinite(a))
            for a in (self.entity_m, self.entity_v, self.relation_m, self.relation_v)
        )


def _first_non_finite(grad: GradientVector) -> str:
    for coordinate, value in zip(grad.coordinates(), grad.flatten()):
        if not np.isfinite(value):
            table, id_, layer, qubit, angle = coordinate
            return f"{table.value}[{id_}][{layer}][{qubit}][{angle}] = {value}"
    return "unknown coordinate"


def adam_step(
    store: EmbeddingStore, grad: GradientVector, state: AdamState, config: TrainingConfig
) -> tuple[EmbeddingStore, AdamState]:
    """Bias-corrected Adam update of the tensors present in `grad`, in place."""
    if not grad.is_finite():
        raise NumericalError(f"Non-finite gradient at step {state.step + 1}: {_first_non_finite(grad)}")

    state.step += 1
    beta1, beta2 = config.adam_beta1, config.adam_beta2
    bc1 = 1.0 - beta1**state.step
    bc2 = 1.0 - beta2**state.step

    for table, id_ in grad.keys():
        g = grad.blocks[(table, id_)]
        m, v = state.moments(table)
        m[id_] = beta1 * m[id_] + (1.0 - beta1) * g
        v[id_] = beta2 * v[id_] + (1.0 - beta2) * (g * g)
        update = config.learning_rate * (m[id_] / bc1) / (np.sqrt(v[id_] / bc2) + config.adam_epsilon)
        store.table(table)[id_] -= update

    if not state.is_finite():
        raise NumericalError(f"Non-finite Adam moments after step {state.step}")
    if not (np.all(np.isfinite(store.entity_values)) and np.all(np.isfinite(store.relation_values))):
        raise NumericalError(f"Non-finite parameters after step {state.step}")
    return store, state


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    loss: float
    val_mrr: float | None = None


@dataclass
class TrainingResult:
    store: EmbeddingStore
    history: list[EpochRecord] = field(default_factory=list)


def train(
    kg: KnowledgeGraph,
    config: TrainingConfig,
    on_epoch: Callable[[EpochRecord], None] | None = None,
    progress: bool = False,
) -> TrainingResult:
    """Initialize uniformly in [0, 2*pi) and run `config.epochs` epochs of Adam."""
    n_train = len(kg.train)
    if n_train == 0:
        raise ConfigurationError("Training split is empty")
    if config.batch_size > n_train:
        raise ConfigurationError(
            f"Batch size {config.batch_size} exceeds the {n_train} training triples"
        )
    spec = config.negative_spec

    store = EmbeddingStore.initialize(
        kg.entity_count, kg.relation_count, config.entity_shape, config.relation_shape, config.seed
    )
    state = AdamState.for_store(store)
    shuffle_rng = np.random.default_rng((config.seed, SHUFFLE_STREAM))
    result = TrainingResult(store)

    logger.info(
        f"Training {kg.entity_count} entities / {kg.relation_count} relations on {n_train} triples: "
        f"{config.n_qubits} qubits, layers {config.entity_layers}/{config.relation_layers}, "
        f"k={spec.k} ({spec.mode.value}), lr={config.learning_rate}, D={config.batch_size}"
    )

    for epoch in range(config.epochs):
        order = shuffle_rng.permutation(n_train)
        batches = [order[i : i + config.batch_size] for i in range(0, n_train, config.batch_size)]
        squared_error = 0.0
        example_count = 0

        for ids in tqdm(batches, desc=f"epoch {epoch + 1}/{config.epochs}", disable=not progress, leave=False):
            examples = build_training_examples(kg, ids.tolist(), spec, epoch)
            loss, _, grad = loss_and_gradient(store, examples, threads=config.threads)
            if not math.isfinite(loss):
                raise NumericalError(f"Non-finite loss in epoch {epoch + 1}")
            adam_step(store, grad, state, config)
            squared_error += loss * len(examples)
            example_count += len(examples)
            logger.debug(f"epoch {epoch + 1} step {state.step}: loss {loss:.6f}")

        val_mrr = None
        if config.validate_epochs and kg.valid:
            val_mrr = evaluate(store, kg, "valid", EvalMode.TAIL, threads=config.threads).mrr

        record = EpochRecord(epoch + 1, squared_error / example_count, val_mrr)
        result.history.append(record)
        logger.info(
            f"Epoch {record.epoch}: loss {record.loss:.6f}"
            + (f", valid MRR {val_mrr:.4f}" if val_mrr is not None else "")
        )
        if on_epoch is not None:
            on_epoch(record)

    return result


def write_loss_log(path: Path, history: Sequence[EpochRecord]) -> Path:
    """CSV with header epoch,loss,val_mrr."""
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["epoch", "loss", "val_mrr"])
        for record in history:
            writer.writerow(
                [record.epoch, repr(record.loss), "" if record.val_mrr is None else repr(record.val_mrr)]
            )
    return path
