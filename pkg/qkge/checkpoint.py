"""
Versioned JSON checkpoints.

Angles and losses are written as decimal strings with 17 significant digits,
which round-trips every float64 exactly, so a reloaded store scores
bit-for-bit like the one that was saved.
"""
from __future__ import annotations

import logging
from pathlib import Path
from typing import Any, Sequence

import numpy as np
from pydantic import BaseModel, ValidationError

from .ansatz import AnsatzShape
from .config import TrainingConfig
from .data import KnowledgeGraph, Vocabulary
from .errors import ConfigurationError, IntegrityError, QKGEError
from .model import EmbeddingStore
from .training import EpochRecord

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1


def encode_float(value: float) -> str:
    return format(float(value), ".17g")


def decode_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError as e:
        raise IntegrityError(f"Checkpoint holds a non-numeric value: {text!r}") from e
    if not np.isfinite(value):
        raise IntegrityError(f"Checkpoint holds a non-finite value: {text!r}")
    return value


class ShapeRecord(BaseModel):
    n_qubits: int
    n_layers: int


class VocabularyRecord(BaseModel):
    entities: list[str]
    relations: list[str]


class EpochEntry(BaseModel):
    epoch: int
    loss: str
    val_mrr: str | None = None


class Checkpoint(BaseModel):
    """Everything needed to rebuild a trained store and describe how it was made."""

    format_version: int
    entity_shape: ShapeRecord
    relation_shape: ShapeRecord
    vocabulary: VocabularyRecord
    entity_params: list[list[str]]
    relation_params: list[list[str]]
    config: dict[str, Any]
    seed: int
    history: list[EpochEntry] = []

    def shapes(self) -> tuple[AnsatzShape, AnsatzShape]:
        try:
            return (
                AnsatzShape(self.entity_shape.n_qubits, self.entity_shape.n_layers),
                AnsatzShape(self.relation_shape.n_qubits, self.relation_shape.n_layers),
            )
        except ConfigurationError as e:
            raise IntegrityError(f"Checkpoint has an invalid circuit shape: {e}") from e

    def vocabularies(self) -> tuple[Vocabulary, Vocabulary]:
        try:
            return (
                Vocabulary("entity", tuple(self.vocabulary.entities)),
                Vocabulary("relation", tuple(self.vocabulary.relations)),
            )
        except QKGEError as e:
            raise IntegrityError(f"Checkpoint vocabulary is invalid: {e}") from e

    def to_store(self) -> EmbeddingStore:
        entity_shape, relation_shape = self.shapes()

        def table(rows: list[list[str]], shape: AnsatzShape, count: int, kind: str) -> np.ndarray:
            if len(rows) != count:
                raise IntegrityError(f"Checkpoint has {len(rows)} {kind} tensors for {count} names")
            for i, row in enumerate(rows):
                if len(row) != shape.parameter_count:
                    raise IntegrityError(
                        f"{kind} tensor {i} has {len(row)} angles, expected {shape.parameter_count}"
                    )
            values = np.array([[decode_float(x) for x in row] for row in rows], dtype=np.float64)
            return values.reshape((count,) + shape.tensor_shape)

        try:
            return EmbeddingStore(
                entity_shape,
                relation_shape,
                table(self.entity_params, entity_shape, len(self.vocabulary.entities), "entity"),
                table(self.relation_params, relation_shape, len(self.vocabulary.relations), "relation"),
            )
        except IntegrityError:
            raise
        except QKGEError as e:
            raise IntegrityError(f"Checkpoint tables are inconsistent: {e}") from e

    def training_config(self) -> TrainingConfig:
        try:
            return TrainingConfig(**self.config)
        except ValidationError as e:
            raise IntegrityError(f"Checkpoint config is invalid: {e}") from e

    def epoch_records(self) -> list[EpochRecord]:
        return [
            EpochRecord(
                entry.epoch,
                decode_float(entry.loss),
                None if entry.val_mrr is None else decode_float(entry.val_mrr),
            )
            for entry in self.history
        ]

    def verify_against(self, kg: KnowledgeGraph) -> None:
        """The data directory must produce exactly the vocabulary the store was trained on."""
        entities, relations = self.vocabularies()
        if entities.names != kg.entities.names:
            raise IntegrityError(
                f"Checkpoint has {len(entities)} entities, data directory has {kg.entity_count} "
                "(or the names differ)"
            )
        if relations.names != kg.relations.names:
            raise IntegrityError(
                f"Checkpoint has {len(relations)} relations, data directory has {kg.relation_count} "
                "(or the names differ)"
            )


def build_checkpoint(
    store: EmbeddingStore,
    kg: KnowledgeGraph,
    config: TrainingConfig,
    history: Sequence[EpochRecord] = (),
) -> Checkpoint:
    return Checkpoint(
        format_version=FORMAT_VERSION,
        entity_shape=ShapeRecord(n_qubits=store.n_qubits, n_layers=store.entity_shape.n_layers),
        relation_shape=ShapeRecord(n_qubits=store.n_qubits, n_layers=store.relation_shape.n_layers),
        vocabulary=VocabularyRecord(
            entities=list(kg.entities.names), relations=list(kg.relations.names)
        ),
        entity_params=[
            [encode_float(x) for x in row]
            for row in store.entity_values.reshape(store.entity_count, -1)
        ],
        relation_params=[
            [encode_float(x) for x in row]
            for row in store.relation_values.reshape(store.relation_count, -1)
        ],
        config=config.model_dump(mode="json"),
        seed=config.seed,
        history=[
            EpochEntry(
                epoch=r.epoch,
                loss=encode_float(r.loss),
                val_mrr=None if r.val_mrr is None else encode_float(r.val_mrr),
            )
            for r in history
        ],
    )


def save_checkpoint(path: Path, checkpoint: Checkpoint) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(checkpoint.model_dump_json(indent=1), encoding="utf-8")
    logger.info(f"Saved checkpoint: {path}")
    return path


def load_checkpoint(path: Path) -> Checkpoint:
    """Parse and validate; any structural problem is an IntegrityError."""
    path = Path(path)
    if not path.is_file():
        raise IntegrityError(f"Checkpoint not found: {path}")
    try:
        checkpoint = Checkpoint.model_validate_json(path.read_bytes())
    except ValidationError as e:
        raise IntegrityError(f"Corrupted checkpoint {path}: {e.error_count()} validation error(s)") from e
    if checkpoint.format_version != FORMAT_VERSION:
        raise IntegrityError(
            f"Unsupported checkpoint format {checkpoint.format_version} (expected {FORMAT_VERSION})"
        )
    # fail now rather than at first use
    checkpoint.to_store()
    return checkpoint
