"""The one- and two-qubit interferometer circuits and their experiments."""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .sampling import (
    RandomStream,
    ReadoutNoise,
    apply_cnot_depolarizing,
    apply_readout_noise,
    parity,
    polarization,
    sample_counts,
)
from .statevector import GateMatrix, StateVector, apply, basis_state, gate, probabilities, tensor


class CircuitKind(enum.Enum):
    SINGLE = "single"
    ENTANGLED_PAIR = "pair"

    @property
    def n_qubits(self) -> int:
        return 1 if self is CircuitKind.SINGLE else 2

    @property
    def frequency(self) -> int:
        """Fringe frequency k in -cos(k phi)."""
        return self.n_qubits

    @property
    def qubits_per_shot(self) -> int:
        return self.n_qubits

    @classmethod
    def parse(cls, value: "CircuitKind | str") -> "CircuitKind":
        if isinstance(value, cls):
            return value
        v = str(value).strip().lower()
        aliases = {"single": cls.SINGLE, "pair": cls.ENTANGLED_PAIR, "entangledpair": cls.ENTANGLED_PAIR,
                   "entangled_pair": cls.ENTANGLED_PAIR, "entangled": cls.ENTANGLED_PAIR}
        try:
            return aliases[v]
        except KeyError:
            raise ValueError(f"unknown circuit kind {value!r} (expected 'single' or 'pair')") from None


Op = tuple[GateMatrix, list[int]]


def build_circuit(kind: CircuitKind | str, phi: float) -> list[Op]:
    """Gate list acting on the all-zeros state.

    single: H, RZ(phi), H.
    pair:   H(x)X, CNOT(control q0), H(x)H, RZ(phi)(x)RZ(phi), H(x)H.
    """
    kind = CircuitKind.parse(kind)
    h, rz = gate("H"), gate("RZ", phi)
    if kind is CircuitKind.SINGLE:
        return [(h, [0]), (rz, [0]), (h, [0])]
    hh = tensor(h, h)
    return [
        (tensor(h, gate("X")), [0, 1]),
        (gate("CNOT"), [0, 1]),
        (hh, [0, 1]),
        (tensor(rz, rz), [0, 1]),
        (hh, [0, 1]),
    ]


def intermediate_states(kind: CircuitKind | str, phi: float) -> list[StateVector]:
    """The initial state followed by the state after every gate."""
    kind = CircuitKind.parse(kind)
    state = basis_state(kind.n_qubits, 0)
    states = [state]
    for g, targets in build_circuit(kind, phi):
        state = apply(state, g, targets)
        states.append(state)
    return states


def final_state(kind: CircuitKind | str, phi: float) -> StateVector:
    return intermediate_states(kind, phi)[-1]


def analytic_state(kind: CircuitKind | str, phi: float) -> np.ndarray:
    """Closed-form output amplitudes, used as the simulator's oracle."""
    kind = CircuitKind.parse(kind)
    c, s = math.cos, math.sin
    if kind is CircuitKind.SINGLE:
        return np.array([c(phi / 2), -1j * s(phi / 2)])
    a = c(phi) / math.sqrt(2)
    b = -1j * s(phi) / math.sqrt(2)
    return np.array([b, a, a, b])


def analytic_observable(kind: CircuitKind | str, phi: float) -> float:
    """Ideal polarization (-cos phi) or parity (-cos 2 phi)."""
    kind = CircuitKind.parse(kind)
    return -math.cos(kind.frequency * phi)


def outcome_distribution(kind: CircuitKind | str, phi: float, noise: Optional[ReadoutNoise] = None) -> np.ndarray:
    """Measured-outcome probabilities, after noise when ``noise`` is given."""
    kind = CircuitKind.parse(kind)
    p = probabilities(final_state(kind, phi))
    if noise is None:
        return p
    if kind is CircuitKind.ENTANGLED_PAIR and noise.depol_cnot:
        p = apply_cnot_depolarizing(p, noise.depol_cnot)
    return apply_readout_noise(p, noise, kind.n_qubits)


def estimator_value(kind: CircuitKind, counts) -> float:
    return polarization(counts) if kind is CircuitKind.SINGLE else parity(counts)


@dataclass(frozen=True)
class ExperimentSpec:
    """One interferometer setting, repeated ``trials`` times.

    Trial ``t`` draws from stream ``stream_base + t`` of ``seed``; callers
    running several settings under one seed give each a disjoint range.
    """

    kind: CircuitKind
    phi: float
    shots_per_trial: int
    trials: int
    noise: Optional[ReadoutNoise] = None
    seed: int = 0
    stream_base: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kind", CircuitKind.parse(self.kind))
        if self.shots_per_trial < 1:
            raise ValueError("shots_per_trial must be >= 1")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")

    @property
    def qubits_per_trial(self) -> int:
        return self.shots_per_trial * self.kind.qubits_per_shot


@dataclass(frozen=True)
class TrialSeries:
    spec: ExperimentSpec
    values: np.ndarray
    qubits_per_trial: int

    @property
    def mean(self) -> float:
        return float(np.mean(self.values))


def run_experiment(spec: ExperimentSpec, workers: int = 1) -> TrialSeries:
    """Sample ``spec.trials`` independent estimator values.

    Output is independent of ``workers``: each trial owns its random stream.
    """
    probs = outcome_distribution(spec.kind, spec.phi, spec.noise)
    root = RandomStream(spec.seed)

    def one(t: int) -> float:
        counts = sample_counts(probs, spec.shots_per_trial, root.child(spec.stream_base + t))
        return estimator_value(spec.kind, counts)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(one, range(spec.trials)))
    else:
        values = [one(t) for t in range(spec.trials)]
    return TrialSeries(spec, np.array(values, dtype=float), spec.qubits_per_trial)


def sweep_angles(n_angles: int = 13) -> np.ndarray:
    """Equally spaced phases over [0, 2 pi], endpoints included."""
    if n_angles < 2:
        raise ValueError("need at least two angles")
    return np.linspace(0.0, 2 * math.pi, n_angles)


def run_sweep(kind: CircuitKind | str, phis, shots: int, trials: int, noise: Optional[ReadoutNoise] = None,
              seed: int = 0, stream_base: int = 0, workers: int = 1) -> list[TrialSeries]:
    """Run one experiment per phase; angle ``i`` gets streams ``stream_base + i*trials + t``."""
    kind = CircuitKind.parse(kind)
    return [
        run_experiment(ExperimentSpec(kind, float(phi), shots, trials, noise, seed, stream_base + i * trials),
                       workers=workers)
        for i, phi in enumerate(phis)
    ]


def phase_to_path_length(phi: float, wavelength: float) -> float:
    """Arm length difference (metres) that produces phase ``phi``."""
    if not wavelength > 0:
        raise ValueError("wavelength must be positive")
    return phi * wavelength / (2 * math.pi)


def unentangled_pair_states(phi: float) -> list[StateVector]:
    """|00> driven by H(x)H, RZ(phi)(x)RZ(phi), H(x)H: the single-qubit sequence on both qubits."""
    h, rz = gate("H"), gate("RZ", phi)
    state = basis_state(2, 0)
    states = [state]
    for g in (tensor(h, h), tensor(rz, rz), tensor(h, h)):
        state = apply(state, g, [0, 1])
        states.append(state)
    return states
