"""Dense statevector simulation for 1-4 qubits.

Basis ordering: index ``i`` is the bitstring of ``i`` with qubit 0 as the
most significant bit, so ``|01>`` means q0=0, q1=1 (index 1) and ``|10>``
is index 2. Both conventions are common; this one matches kets written
left to right as ``|q0 q1 ...>``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

MAX_QUBITS = 4
NORM_TOL = 1e-9
UNITARY_TOL = 1e-9


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalized amplitude vector of ``n_qubits`` qubits."""

    n_qubits: int
    amps: np.ndarray

    def __post_init__(self):
        if not 1 <= self.n_qubits <= MAX_QUBITS:
            raise ValueError(f"n_qubits must be in 1..{MAX_QUBITS}, got {self.n_qubits}")
        amps = _frozen(self.amps).reshape(-1)
        if amps.size != 2**self.n_qubits:
            raise ValueError(f"expected {2**self.n_qubits} amplitudes, got {amps.size}")
        if not np.all(np.isfinite(amps)):
            raise ValueError("amplitudes must be finite")
        norm = float(np.sum(np.abs(amps) ** 2))
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state is not normalized (norm^2 = {norm!r})")
        object.__setattr__(self, "amps", amps)

    def __len__(self):
        return self.amps.size

    def __iter__(self):
        return iter(self.amps)

    def __getitem__(self, i):
        return self.amps[i]

    def allclose(self, other: StateVector | Sequence[complex], atol: float = 1e-12) -> bool:
        other_amps = other.amps if isinstance(other, StateVector) else np.asarray(other, dtype=complex)
        return other_amps.shape == self.amps.shape and bool(np.allclose(self.amps, other_amps, rtol=0, atol=atol))


@dataclass(frozen=True, eq=False)
class GateMatrix:
    """Unitary acting on one (dim 2) or two (dim 4) qubits."""

    matrix: np.ndarray
    name: str = ""

    def __post_init__(self):
        m = _frozen(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] not in (2, 4):
            raise ValueError(f"gate matrix must be 2x2 or 4x4, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ValueError("gate entries must be finite")
        if not np.allclose(m.conj().T @ m, np.eye(m.shape[0]), rtol=0, atol=UNITARY_TOL):
            raise ValueError(f"gate {self.name or '?'} is not unitary")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_qubits(self) -> int:
        return 1 if self.dim == 2 else 2


@dataclass(frozen=True)
class BlochVector:
    x: float
    y: float
    z: float

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.z)


def basis_state(n_qubits: int, index: int) -> StateVector:
    if not 1 <= n_qubits <= MAX_QUBITS:
        raise ValueError(f"n_qubits must be in 1..{MAX_QUBITS}, got {n_qubits}")
    if not 0 <= index < 2**n_qubits:
        raise ValueError(f"index {index} out of range for {n_qubits} qubit(s)")
    amps = np.zeros(2**n_qubits, dtype=complex)
    amps[index] = 1.0
    return StateVector(n_qubits, amps)


_SQRT1_2 = 1 / np.sqrt(2)
_FIXED = {
    "I": np.eye(2),
    "H": _SQRT1_2 * np.array([[1, 1], [1, -1]]),
    "X": np.array([[0, 1], [1, 0]]),
    "CNOT": np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]]),
}


def gate(kind: str, phi: float | None = None) -> GateMatrix:
    """Return the matrix for ``kind`` in {"H", "X", "RZ", "CNOT", "I"}.

    ``RZ`` uses the symmetric convention diag(e^{-i phi/2}, e^{+i phi/2}) and
    is the only kind that takes ``phi``.
    """
    kind = kind.upper()
    if kind == "RZ":
        if phi is None:
            raise ValueError("RZ requires phi")
        half = 0.5 * float(phi)
        return GateMatrix(np.diag([np.exp(-1j * half), np.exp(1j * half)]), name=f"RZ({float(phi):.6g})")
    if phi is not None:
        raise ValueError(f"gate {kind} takes no phi")
    try:
        return GateMatrix(_FIXED[kind], name=kind)
    except KeyError:
        raise ValueError(f"unknown gate kind {kind!r}") from None


def tensor(a: GateMatrix, b: GateMatrix) -> GateMatrix:
    """Kronecker product ``a (x) b`` with ``a`` acting on the more significant qubit."""
    if a.dim != 2 or b.dim != 2:
        raise ValueError("tensor() takes two single-qubit gates")
    return GateMatrix(np.kron(a.matrix, b.matrix), name=f"{a.name}(x){b.name}")


def apply(state: StateVector, g: GateMatrix, targets: Sequence[int]) -> StateVector:
    targets = list(targets)
    n = state.n_qubits
    if g.dim != 2 ** len(targets):
        raise ValueError(f"gate of dim {g.dim} cannot act on {len(targets)} target(s)")
    if len(set(targets)) != len(targets) or any(not 0 <= t < n for t in targets):
        raise ValueError(f"invalid targets {targets} for {n} qubit(s)")
    k = len(targets)
    psi = state.amps.reshape((2,) * n)
    u = g.matrix.reshape((2,) * (2 * k))
    # contract gate input legs with target axes; output legs land in front
    out = np.tensordot(u, psi, axes=(list(range(k, 2 * k)), targets))
    rest = [ax for ax in range(n) if ax not in targets]
    order = targets + rest
    out = np.moveaxis(out, list(range(n)), order)
    return StateVector(n, out.reshape(-1))


def run_circuit(state: StateVector, ops: Sequence[tuple[GateMatrix, Sequence[int]]]) -> StateVector:
    for g, targets in ops:
        state = apply(state, g, targets)
    return state


def probabilities(state: StateVector) -> np.ndarray:
    p = np.abs(state.amps) ** 2
    return p / p.sum()


def bloch_vector(state: StateVector) -> BlochVector:
    if state.n_qubits != 1:
        raise ValueError("bloch_vector requires a single-qubit state")
    c0, c1 = state.amps
    cross = np.conj(c0) * c1
    return BlochVector(float(2 * cross.real), float(2 * cross.imag), float(abs(c0) ** 2 - abs(c1) ** 2))
