"""
Parameter-shift gradients of the fidelity scores and the MSE loss.

Every angle drives one Pauli rotation exp(-i theta P / 2), so
d delta / d theta = [delta(theta + pi/2) - delta(theta - pi/2)] / 2 exactly.
All shifted circuits of one tensor are simulated as a single batch.
When an entity fills several roles in one example (h equal to a tail),
each occurrence is shifted on its own and the contributions are summed.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .ansatz import ParameterTensor, apply_ansatz, embed_entity
from .errors import UsageError
from .model import EmbeddingStore, LabeledExample, Table, mean_score, score_example
from .simulator import StateVector, fidelity

SHIFT = np.pi / 2
FD_STEP = 1e-4

Key = tuple[Table, int]


@dataclass
class GradientVector:
    """Partial derivatives per touched tensor, one (layers, qubits, 3) block each."""

    blocks: dict[Key, np.ndarray] = field(default_factory=dict)

    def accumulate(self, table: Table, id_: int, values: np.ndarray) -> None:
        key = (table, int(id_))
        if key in self.blocks:
            self.blocks[key] = self.blocks[key] + values
        else:
            self.blocks[key] = np.array(values, dtype=np.float64)

    def add(self, other: "GradientVector") -> "GradientVector":
        for (table, id_), values in other.blocks.items():
            self.accumulate(table, id_, values)
        return self

    def scaled(self, factor: float) -> "GradientVector":
        return GradientVector({key: values * factor for key, values in self.blocks.items()})

    def block(self, table: Table, id_: int, shape: tuple[int, ...] | None = None) -> np.ndarray:
        """Block of one tensor; untouched tensors have zero gradient."""
        key = (table, int(id_))
        if key in self.blocks:
            return self.blocks[key]
        if shape is None:
            raise KeyError(key)
        return np.zeros(shape)

    def keys(self) -> list[Key]:
        return sorted(self.blocks, key=lambda key: (key[0].value, key[1]))

    def coordinates(self) -> Iterator[tuple[Table, int, int, int, int]]:
        """Flattened (table, id, layer, qubit, angle) coordinates, aligned with flatten()."""
        for table, id_ in self.keys():
            for layer, qubit, angle in np.ndindex(self.blocks[(table, id_)].shape):
                yield table, id_, layer, qubit, angle

    def flatten(self) -> np.ndarray:
        if not self.blocks:
            return np.zeros(0)
        return np.concatenate([self.blocks[key].ravel() for key in self.keys()])

    def __len__(self) -> int:
        return sum(values.size for values in self.blocks.values())

    def is_finite(self) -> bool:
        return all(np.all(np.isfinite(values)) for values in self.blocks.values())

    def max_abs(self) -> float:
        return max((float(np.max(np.abs(v))) for v in self.blocks.values() if v.size), default=0.0)


def _shifted_batch(p: ParameterTensor) -> ParameterTensor:
    """2P copies of `p`: rows [0, P) shift angle j by +pi/2, rows [P, 2P) by -pi/2."""
    count = p.shape.parameter_count
    rows = ParameterTensor.from_flat(p.shape, np.broadcast_to(p.flat, (2 * count, count)))
    return rows.shifted(np.tile(np.arange(count), 2), np.repeat([SHIFT, -SHIFT], count))


def _shift_difference(values: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    half = len(values) // 2
    return ((values[:half] - values[half:]) / 2).reshape(shape)


def _mean_fidelity(evolved: StateVector, tails: StateVector) -> np.ndarray:
    """Mean over tails of |<t_i|evolved_b>|^2, one value per evolved batch row."""
    overlaps = evolved.amps @ np.conj(tails.amps).T
    return np.mean(np.abs(overlaps) ** 2, axis=-1)


def score_and_gradient(
    store: EmbeddingStore, example: LabeledExample
) -> tuple[float, GradientVector]:
    """Score of `example` and its parameter-shift gradient."""
    head_params = store.entity(example.head)
    relation_params = store.relation(example.relation)
    tail_params = store.entities(example.tails)
    k = len(example.tails)

    head_state = embed_entity(head_params)
    evolved = apply_ansatz(head_state, relation_params)
    tail_states = embed_entity(tail_params)
    score = mean_score(fidelity(tail_states, evolved))

    grad = GradientVector()
    entity_block = store.entity_shape.tensor_shape
    relation_block = store.relation_shape.tensor_shape

    if store.entity_shape.parameter_count:
        shifted = embed_entity(_shifted_batch(head_params))
        values = _mean_fidelity(apply_ansatz(shifted, relation_params), tail_states)
        grad.accumulate(Table.ENTITY, example.head, _shift_difference(values, entity_block))

        for i, tail in enumerate(example.tails):
            shifted_tail = embed_entity(_shifted_batch(store.entity(tail)))
            # only term i of the mean moves
            values = np.abs(np.conj(shifted_tail.amps) @ evolved.amps) ** 2 / k
            grad.accumulate(Table.ENTITY, tail, _shift_difference(values, entity_block))
    else:
        grad.accumulate(Table.ENTITY, example.head, np.zeros(entity_block))
        for tail in example.tails:
            grad.accumulate(Table.ENTITY, tail, np.zeros(entity_block))

    if store.relation_shape.parameter_count:
        evolved_shifted = apply_ansatz(head_state, _shifted_batch(relation_params))
        values = _mean_fidelity(evolved_shifted, tail_states)
        grad.accumulate(Table.RELATION, example.relation, _shift_difference(values, relation_block))
    else:
        grad.accumulate(Table.RELATION, example.relation, np.zeros(relation_block))

    return score, grad


def score_gradient(store: EmbeddingStore, example: LabeledExample) -> GradientVector:
    """d delta / d theta for every angle of the head, relation and tails."""
    return score_and_gradient(store, example)[1]


def _example_loss_term(
    store: EmbeddingStore, example: LabeledExample, batch_size: int
) -> tuple[float, GradientVector]:
    score, grad = score_and_gradient(store, example)
    residual = score - example.label
    return score, grad.scaled(2.0 * residual / batch_size)


def loss_and_gradient(
    store: EmbeddingStore, batch: Sequence[LabeledExample], threads: int = 1
) -> tuple[float, list[float], GradientVector]:
    """MSE loss, the batch scores and (2/D) sum (delta - y) d delta.

    Per-example terms may be computed on a thread pool; they are always
    reduced in batch order, so the result does not depend on `threads`.
    """
    if not batch:
        raise UsageError("Loss gradient of an empty batch")
    size = len(batch)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            terms = list(pool.map(lambda ex: _example_loss_term(store, ex, size), batch))
    else:
        terms = [_example_loss_term(store, ex, size) for ex in batch]

    total = GradientVector()
    scores = []
    for score, grad in terms:
        scores.append(score)
        total.add(grad)
    loss = math.fsum((s - ex.label) ** 2 for s, ex in zip(scores, batch)) / size
    return loss, scores, total


def loss_gradient(
    store: EmbeddingStore, batch: Sequence[LabeledExample], threads: int = 1
) -> GradientVector:
    return loss_and_gradient(store, batch, threads)[2]


def _perturbed(store: EmbeddingStore, table: Table, id_: int, index: int, delta: float) -> EmbeddingStore:
    copy = store.copy()
    block = copy.table(table)[id_]
    block.reshape(-1)[index] += delta
    return copy


def finite_difference_gradient(
    store: EmbeddingStore,
    examples: LabeledExample | Sequence[LabeledExample],
    step: float = FD_STEP,
    loss: bool = False,
) -> GradientVector:
    """Central differences of the score of one example, or of the MSE loss of a batch.

    Shared entities are perturbed in every role at once (total derivative).
    """
    batch = [examples] if isinstance(examples, LabeledExample) else list(examples)

    def objective(s: EmbeddingStore) -> float:
        if loss:
            return math.fsum((score_example(s, ex) - ex.label) ** 2 for ex in batch) / len(batch)
        return score_example(s, batch[0])

    keys: list[Key] = []
    for ex in batch:
        for key in [(Table.ENTITY, ex.head), (Table.RELATION, ex.relation)] + [
            (Table.ENTITY, t) for t in ex.tails
        ]:
            if key not in keys:
                keys.append(key)

    grad = GradientVector()
    for table, id_ in keys:
        shape = store.shape_of(table).tensor_shape
        values = np.zeros(int(np.prod(shape)))
        for index in range(values.size):
            plus = objective(_perturbed(store, table, id_, index, step))
            minus = objective(_perturbed(store, table, id_, index, -step))
            values[index] = (plus - minus) / (2 * step)
        grad.accumulate(table, id_, values.reshape(shape))
    return grad
