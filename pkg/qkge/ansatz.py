"""
Strongly entangling layered circuits used for entity and relation embeddings.

Each layer applies Rot(phi, theta, omega) to every qubit in ascending order,
then (for two or more qubits) a ring of CNOTs with control q and target
(q + r) mod n, where the range r = (layer mod (n - 1)) + 1.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConfigurationError, UsageError
from .simulator import (
    MAX_QUBITS,
    StateVector,
    apply_cnot,
    apply_hadamard_all,
    apply_rot,
    apply_rz,
    apply_ry,
    zero_state,
)

ANGLES_PER_ROTATION = 3


@dataclass(frozen=True)
class AnsatzShape:
    """Circuit width and depth. Zero layers is the identity circuit."""

    n_qubits: int
    n_layers: int

    def __post_init__(self):
        if not 1 <= self.n_qubits <= MAX_QUBITS:
            raise ConfigurationError(
                f"n_qubits must be in [1, {MAX_QUBITS}], got {self.n_qubits}"
            )
        if self.n_layers < 0:
            raise ConfigurationError(f"n_layers must be >= 0, got {self.n_layers}")

    @property
    def parameter_count(self) -> int:
        return ANGLES_PER_ROTATION * self.n_layers * self.n_qubits

    @property
    def tensor_shape(self) -> tuple[int, int, int]:
        return (self.n_layers, self.n_qubits, ANGLES_PER_ROTATION)


@dataclass(frozen=True, eq=False)
class ParameterTensor:
    """Rotation angles indexed [layer][qubit][phi, theta, omega].

    `values` may carry leading batch axes: shape (..., layers, qubits, 3).
    Angles are stored unwrapped.
    """

    shape: AnsatzShape
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        expected = self.shape.tensor_shape
        if values.size == 0 and self.shape.parameter_count == 0 and values.shape[-3:] != expected:
            values = np.zeros(expected)
        if values.shape[-3:] != expected:
            raise UsageError(f"Parameter array {values.shape} does not match {expected}")
        if not np.all(np.isfinite(values)):
            raise UsageError("Parameter tensor contains non-finite angles")
        object.__setattr__(self, "values", values)

    @classmethod
    def zeros(cls, shape: AnsatzShape) -> "ParameterTensor":
        return cls(shape, np.zeros(shape.tensor_shape))

    @classmethod
    def from_flat(cls, shape: AnsatzShape, flat) -> "ParameterTensor":
        flat = np.asarray(flat, dtype=np.float64)
        if flat.shape[-1:] != (shape.parameter_count,):
            raise UsageError(
                f"Expected {shape.parameter_count} angles, got {flat.shape[-1:]}"
            )
        return cls(shape, flat.reshape(flat.shape[:-1] + shape.tensor_shape))

    @property
    def flat(self) -> np.ndarray:
        return self.values.reshape(self.values.shape[:-3] + (self.shape.parameter_count,))

    def shifted(self, index, delta) -> "ParameterTensor":
        """Copy with the flat angle `index` moved by `delta`.

        With an array `index` the tensor must have one batch axis of the same
        length; row b then moves angle index[b] by delta[b] (or a scalar delta).
        """
        flat = self.flat.copy()
        index = np.asarray(index)
        if index.ndim == 0:
            flat[..., index] += delta
        else:
            if flat.ndim != 2 or len(flat) != len(index):
                raise UsageError(f"{len(index)} per-row shifts for a batch of shape {flat.shape[:-1]}")
            flat[np.arange(len(index)), index] += delta
        return ParameterTensor.from_flat(self.shape, flat)


def entangler_pairs(n_qubits: int, layer: int) -> list[tuple[int, int]]:
    """(control, target) CNOT pairs of one layer, in application order."""
    if n_qubits < 2:
        return []
    rng = layer % (n_qubits - 1) + 1
    return [(q, (q + rng) % n_qubits) for q in range(n_qubits)]


def _check(s: StateVector, p: ParameterTensor) -> None:
    if s.n_qubits != p.shape.n_qubits:
        raise UsageError(
            f"State has {s.n_qubits} qubits but ansatz expects {p.shape.n_qubits}"
        )


def apply_ansatz(s: StateVector, p: ParameterTensor) -> StateVector:
    """U(p)|s>."""
    _check(s, p)
    v = p.values
    for layer in range(p.shape.n_layers):
        for q in range(p.shape.n_qubits):
            s = apply_rot(s, q, v[..., layer, q, 0], v[..., layer, q, 1], v[..., layer, q, 2])
        for control, target in entangler_pairs(p.shape.n_qubits, layer):
            s = apply_cnot(s, control, target)
    return s


def apply_ansatz_inverse(s: StateVector, p: ParameterTensor) -> StateVector:
    """U(p)^dagger |s>: reversed gate order, negated angles."""
    _check(s, p)
    v = p.values
    for layer in reversed(range(p.shape.n_layers)):
        for control, target in reversed(entangler_pairs(p.shape.n_qubits, layer)):
            s = apply_cnot(s, control, target)
        for q in reversed(range(p.shape.n_qubits)):
            s = apply_rz(s, q, -v[..., layer, q, 2])
            s = apply_ry(s, q, -v[..., layer, q, 1])
            s = apply_rz(s, q, -v[..., layer, q, 0])
    return s


@lru_cache(maxsize=None)
def uniform_state(n_qubits: int) -> StateVector:
    """H^n |0...0>."""
    return apply_hadamard_all(zero_state(n_qubits))


def embed_entity(p: ParameterTensor) -> StateVector:
    """|e> = U(alpha_e) H^n |0...0>; the same state serves as head and tail."""
    return apply_ansatz(uniform_state(p.shape.n_qubits), p)


def unitary(p: ParameterTensor) -> np.ndarray:
    """Explicit 2^n x 2^n matrix of U(p) (unbatched parameters only)."""
    dim = 2**p.shape.n_qubits
    columns = apply_ansatz(StateVector(p.shape.n_qubits, np.eye(dim)), p)
    # row j of the batch is U|j>, i.e. column j of U
    return columns.amps.T.copy()


def init_parameters(shape: AnsatzShape, rng: np.random.Generator, count: int) -> np.ndarray:
    """`count` tensors of angles drawn uniformly from [0, 2*pi)."""
    return rng.uniform(0.0, 2 * np.pi, size=(count,) + shape.tensor_shape)
