"""
Dense statevector simulator with the gate set the layered ansatz needs.

Bit ordering: qubit 0 is the most significant bit of the amplitude index,
so basis state |q0 q1 ... q(n-1)> lives at index sum(q_i * 2^(n-1-i)).

All kernels accept a leading batch axis on the amplitudes and on the gate
angles; shapes broadcast numpy-style. Gates never mutate their input.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import sqrt

import numpy as np

from .errors import ConfigurationError, UsageError

MAX_QUBITS = 24

_SQRT2_INV = 1 / sqrt(2)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=np.complex128) * _SQRT2_INV


@dataclass(frozen=True, eq=False)
class StateVector:
    """Amplitudes of an n-qubit pure state, optionally batched: shape (..., 2**n)."""

    n_qubits: int
    amps: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amps, dtype=np.complex128)
        if amps.ndim == 0 or amps.shape[-1] != 2**self.n_qubits:
            raise UsageError(
                f"Amplitude length {amps.shape[-1:]} does not match 2^{self.n_qubits}"
            )
        object.__setattr__(self, "amps", amps)

    @property
    def batch_shape(self) -> tuple[int, ...]:
        return self.amps.shape[:-1]

    @property
    def dim(self) -> int:
        return 2**self.n_qubits

    def __getitem__(self, index) -> "StateVector":
        """Select from the batch axes."""
        return StateVector(self.n_qubits, self.amps[index])


def zero_state(n_qubits: int) -> StateVector:
    """|0...0> on n_qubits qubits."""
    if not isinstance(n_qubits, (int, np.integer)) or not 1 <= n_qubits <= MAX_QUBITS:
        raise ConfigurationError(
            f"n_qubits must be an integer in [1, {MAX_QUBITS}], got {n_qubits!r}"
        )
    return basis_state(int(n_qubits), 0)


def basis_state(n_qubits: int, index: int) -> StateVector:
    """Computational basis state |index>."""
    if not 0 <= index < 2**n_qubits:
        raise UsageError(f"Basis index {index} out of range for {n_qubits} qubits")
    amps = np.zeros(2**n_qubits, dtype=np.complex128)
    amps[index] = 1.0
    return StateVector(n_qubits, amps)


def _check_qubit(qubit: int, n_qubits: int) -> None:
    if not 0 <= qubit < n_qubits:
        raise UsageError(f"Qubit index {qubit} out of range for {n_qubits} qubits")


def rz_matrix(angle) -> np.ndarray:
    """RZ(a) = diag(e^{-ia/2}, e^{ia/2}); shape (*angle.shape, 2, 2)."""
    angle = np.asarray(angle, dtype=np.float64)
    matrix = np.zeros(angle.shape + (2, 2), dtype=np.complex128)
    matrix[..., 0, 0] = np.exp(-0.5j * angle)
    matrix[..., 1, 1] = np.exp(0.5j * angle)
    return matrix


def ry_matrix(angle) -> np.ndarray:
    """RY(b) = [[cos b/2, -sin b/2], [sin b/2, cos b/2]]."""
    angle = np.asarray(angle, dtype=np.float64)
    c, s = np.cos(angle / 2), np.sin(angle / 2)
    matrix = np.empty(angle.shape + (2, 2), dtype=np.complex128)
    matrix[..., 0, 0] = c
    matrix[..., 0, 1] = -s
    matrix[..., 1, 0] = s
    matrix[..., 1, 1] = c
    return matrix


def rot_matrix(phi, theta, omega) -> np.ndarray:
    """Matrix of Rot(phi, theta, omega) = RZ(omega) RY(theta) RZ(phi)."""
    return rz_matrix(omega) @ ry_matrix(theta) @ rz_matrix(phi)


def apply_single_qubit(s: StateVector, matrix: np.ndarray, qubit: int) -> StateVector:
    """Apply a (batched) 2x2 matrix to one qubit."""
    n = s.n_qubits
    _check_qubit(qubit, n)
    matrix = np.asarray(matrix, dtype=np.complex128)
    batch = np.broadcast_shapes(s.batch_shape, matrix.shape[:-2])
    amps = np.broadcast_to(s.amps, batch + (2**n,))
    amps = amps.reshape(batch + (2**qubit, 2, 2 ** (n - qubit - 1)))
    matrix = np.broadcast_to(matrix, batch + (2, 2))
    out = np.einsum("...ab,...ibj->...iaj", matrix, amps)
    return StateVector(n, out.reshape(batch + (2**n,)))


def apply_hadamard(s: StateVector, qubit: int) -> StateVector:
    return apply_single_qubit(s, HADAMARD, qubit)


def apply_hadamard_all(s: StateVector) -> StateVector:
    """H on every qubit."""
    for qubit in range(s.n_qubits):
        s = apply_hadamard(s, qubit)
    return s


def apply_rz(s: StateVector, qubit: int, angle) -> StateVector:
    return apply_single_qubit(s, rz_matrix(angle), qubit)


def apply_ry(s: StateVector, qubit: int, angle) -> StateVector:
    return apply_single_qubit(s, ry_matrix(angle), qubit)


def apply_rot(s: StateVector, qubit: int, phi, theta, omega) -> StateVector:
    """General rotation: RZ(phi), then RY(theta), then RZ(omega) in time order."""
    _check_qubit(qubit, s.n_qubits)
    s = apply_rz(s, qubit, phi)
    s = apply_ry(s, qubit, theta)
    return apply_rz(s, qubit, omega)


@lru_cache(maxsize=None)
def _cnot_permutation(n_qubits: int, control: int, target: int) -> np.ndarray:
    index = np.arange(2**n_qubits)
    control_bit = 1 << (n_qubits - 1 - control)
    target_bit = 1 << (n_qubits - 1 - target)
    perm = np.where(index & control_bit, index ^ target_bit, index)
    perm.setflags(write=False)
    return perm


def apply_cnot(s: StateVector, control: int, target: int) -> StateVector:
    """Flip `target` on basis states where `control` is 1."""
    _check_qubit(control, s.n_qubits)
    _check_qubit(target, s.n_qubits)
    if control == target:
        raise UsageError(f"CNOT control and target must differ (both {control})")
    # the permutation is an involution, so gathering equals scattering
    perm = _cnot_permutation(s.n_qubits, control, target)
    return StateVector(s.n_qubits, s.amps[..., perm])


def inner_product(a: StateVector, b: StateVector):
    """<a|b> = sum(conj(a_i) * b_i), broadcast over batch axes."""
    if a.n_qubits != b.n_qubits:
        raise UsageError(
            f"Inner product of {a.n_qubits}-qubit and {b.n_qubits}-qubit states"
        )
    return np.sum(np.conj(a.amps) * b.amps, axis=-1)


def fidelity(a: StateVector, b: StateVector):
    """|<a|b>|^2."""
    return np.abs(inner_product(a, b)) ** 2


def norm(s: StateVector):
    return np.sqrt(np.sum(np.abs(s.amps) ** 2, axis=-1))
