"""
Embedding tables and fidelity scoring.

Entities share one table: the tail state of entity i is its head state.
A triple scores delta = |<t| U(beta_r) |h>|^2; a negative with k tails scores
the mean of its k single-tail fidelities.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .ansatz import (
    AnsatzShape,
    ParameterTensor,
    apply_ansatz,
    apply_ansatz_inverse,
    embed_entity,
    init_parameters,
    uniform_state,
)
from .errors import UsageError
from .simulator import StateVector, fidelity


class Table(str, Enum):
    """Which parameter table a tensor lives in."""

    ENTITY = "entity"
    RELATION = "relation"


@dataclass(eq=False)
class EmbeddingStore:
    """All entity and relation angles.

    `entity_values` has shape (E, entity_layers, n_qubits, 3) and
    `relation_values` (R, relation_layers, n_qubits, 3).
    """

    entity_shape: AnsatzShape
    relation_shape: AnsatzShape
    entity_values: np.ndarray
    relation_values: np.ndarray

    def __post_init__(self):
        if self.entity_shape.n_qubits != self.relation_shape.n_qubits:
            raise UsageError("Entity and relation circuits must act on the same qubits")
        self.entity_values = np.asarray(self.entity_values, dtype=np.float64)
        self.relation_values = np.asarray(self.relation_values, dtype=np.float64)
        for name, values, shape in (
            ("entity", self.entity_values, self.entity_shape),
            ("relation", self.relation_values, self.relation_shape),
        ):
            if values.ndim != 4 or values.shape[1:] != shape.tensor_shape:
                raise UsageError(
                    f"{name} table has shape {values.shape}, expected (N,) + {shape.tensor_shape}"
                )

    @classmethod
    def initialize(
        cls,
        entity_count: int,
        relation_count: int,
        entity_shape: AnsatzShape,
        relation_shape: AnsatzShape,
        seed: int,
    ) -> "EmbeddingStore":
        """Angles uniform in [0, 2*pi), entities drawn before relations."""
        rng = np.random.default_rng(seed)
        return cls(
            entity_shape,
            relation_shape,
            init_parameters(entity_shape, rng, entity_count),
            init_parameters(relation_shape, rng, relation_count),
        )

    @property
    def n_qubits(self) -> int:
        return self.entity_shape.n_qubits

    @property
    def entity_count(self) -> int:
        return self.entity_values.shape[0]

    @property
    def relation_count(self) -> int:
        return self.relation_values.shape[0]

    def table(self, table: Table) -> np.ndarray:
        return self.entity_values if table is Table.ENTITY else self.relation_values

    def shape_of(self, table: Table) -> AnsatzShape:
        return self.entity_shape if table is Table.ENTITY else self.relation_shape

    def check_entity(self, entity: int) -> None:
        if not 0 <= entity < self.entity_count:
            raise UsageError(f"Entity id {entity} out of range [0, {self.entity_count})")

    def check_relation(self, relation: int) -> None:
        if not 0 <= relation < self.relation_count:
            raise UsageError(
                f"Relation id {relation} out of range [0, {self.relation_count})"
            )

    def entity(self, entity: int) -> ParameterTensor:
        self.check_entity(entity)
        return ParameterTensor(self.entity_shape, self.entity_values[entity])

    def relation(self, relation: int) -> ParameterTensor:
        self.check_relation(relation)
        return ParameterTensor(self.relation_shape, self.relation_values[relation])

    def entities(self, ids: Sequence[int]) -> ParameterTensor:
        """Batched tensor for several entities."""
        for entity in ids:
            self.check_entity(entity)
        return ParameterTensor(self.entity_shape, self.entity_values[list(ids)])

    def copy(self) -> "EmbeddingStore":
        return EmbeddingStore(
            self.entity_shape,
            self.relation_shape,
            self.entity_values.copy(),
            self.relation_values.copy(),
        )


def evolve_head(store: EmbeddingStore, head: int, relation: int) -> StateVector:
    """U(beta_r) |h>."""
    return apply_ansatz(embed_entity(store.entity(head)), store.relation(relation))


def score_triple(store: EmbeddingStore, head: int, relation: int, tail: int) -> float:
    """delta_hrt = |<t| U(beta_r) |h>|^2."""
    evolved = evolve_head(store, head, relation)
    return float(fidelity(embed_entity(store.entity(tail)), evolved))


def score_triple_by_inversion(
    store: EmbeddingStore, head: int, relation: int, tail: int
) -> float:
    """Same score, computed as |<+|U(alpha_t)^dagger U(beta_r)|h>|^2."""
    evolved = evolve_head(store, head, relation)
    unwound = apply_ansatz_inverse(evolved, store.entity(tail))
    return float(fidelity(uniform_state(store.n_qubits), unwound))


def mean_score(fidelities) -> float:
    """Order-independent mean (exactly rounded sum)."""
    fidelities = np.asarray(fidelities, dtype=np.float64).ravel()
    return math.fsum(fidelities) / len(fidelities)


def score_multi_tail(
    store: EmbeddingStore, head: int, relation: int, tails: Sequence[int]
) -> float:
    """Mean fidelity of the evolved head against k tails, evolving the head once."""
    if len(tails) == 0:
        raise UsageError("score_multi_tail needs at least one tail")
    evolved = evolve_head(store, head, relation)
    tail_states = embed_entity(store.entities(tails))
    return mean_score(fidelity(tail_states, evolved))


@dataclass(frozen=True)
class LabeledExample:
    """(head, relation, tails) with label 1.0 (positive) or 0.0 (negative).

    Positives carry one tail; a superposed negative carries k.
    """

    head: int
    relation: int
    tails: tuple[int, ...]
    label: float

    def __post_init__(self):
        if not self.tails:
            raise UsageError("LabeledExample needs at least one tail")


def score_example(store: EmbeddingStore, example: LabeledExample) -> float:
    return score_multi_tail(store, example.head, example.relation, example.tails)


def entity_states(store: EmbeddingStore) -> StateVector:
    """Embedded states of every entity, batch axis = entity id."""
    return embed_entity(ParameterTensor(store.entity_shape, store.entity_values))


def score_all_tails(
    store: EmbeddingStore, head: int, relation: int, states: StateVector | None = None
) -> np.ndarray:
    """Scores of (head, relation, t) for every entity t."""
    if states is None:
        states = entity_states(store)
    evolved = evolve_head(store, head, relation)
    return fidelity(states, evolved)


def score_all_heads(
    store: EmbeddingStore, relation: int, tail: int, states: StateVector | None = None
) -> np.ndarray:
    """Scores of (h, relation, tail) for every entity h."""
    store.check_entity(tail)
    if states is None:
        states = entity_states(store)
    evolved = apply_ansatz(states, store.relation(relation))
    return fidelity(states[tail], evolved)


def relation_score_matrix(
    store: EmbeddingStore, relation: int, states: StateVector | None = None
) -> np.ndarray:
    """S[h, t] = |<t|U(beta_r)|h>|^2 for all entity pairs."""
    if states is None:
        states = entity_states(store)
    evolved = apply_ansatz(states, store.relation(relation))
    return np.abs(evolved.amps @ np.conj(states.amps).T) ** 2
