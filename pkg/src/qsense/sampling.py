"""Finite-shot sampling, readout noise and the polarization/parity estimators.

Noise acts on outcome distributions, not on amplitudes. Per-qubit readout
flips are applied independently to each bit; the CNOT depolarizing event
mixes the two-qubit distribution with the uniform one. Because every gate
after the CNOT is unitary and maps I/4 to I/4, applying the depolarizing
mix to the final distribution is exact.

Random numbers come from numpy's Philox4x64 counter-based generator keyed
by ``(seed, stream_id)``, so a trial's counts depend only on its own key.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from os import PathLike
from typing import Mapping, Sequence

import numpy as np

PROB_TOL = 1e-9


@dataclass(frozen=True)
class ReadoutNoise:
    """Readout misread rates shared by every qubit, plus CNOT depolarizing.

    eps01 is P(read 1 | true 0), eps10 is P(read 0 | true 1).
    """

    eps01: float = 0.0
    eps10: float = 0.0
    depol_cnot: float = 0.0
    name: str = "custom"

    def __post_init__(self):
        for key in ("eps01", "eps10", "depol_cnot"):
            v = getattr(self, key)
            if not 0.0 <= v < 0.5:
                raise ValueError(f"{key} must lie in [0, 0.5), got {v!r}")

    @property
    def amplitude_factor(self) -> float:
        """Scale of the single-qubit polarization fringe under readout noise."""
        return 1.0 - self.eps01 - self.eps10

    @property
    def offset(self) -> float:
        """Additive polarization offset, eps01 - eps10."""
        return self.eps01 - self.eps10

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_mapping(cls, data: Mapping) -> ReadoutNoise:
        return cls(
            eps01=float(data["eps01"]),
            eps10=float(data["eps10"]),
            depol_cnot=float(data.get("depol_cnot", 0.0)),
            name=str(data.get("name", "custom")),
        )

    @classmethod
    def from_json(cls, text: str) -> ReadoutNoise:
        return cls.from_mapping(json.loads(text))

    @classmethod
    def load(cls, path: str | PathLike) -> ReadoutNoise:
        with open(path, encoding="utf-8") as fh:
            return cls.from_mapping(json.load(fh))


# amplitude 1 - 0.013 - 0.055 = 0.932, offset 0.013 - 0.055 = -0.042 for one qubit.
# Two-qubit parity amplitude is (0.932)^2 * (1 - depol) = 0.852 -> depol = 0.0191.
PRESETS: dict[str, ReadoutNoise] = {
    "ideal": ReadoutNoise(0.0, 0.0, 0.0, name="ideal"),
    "manila-2021": ReadoutNoise(0.013, 0.055, 0.0191, name="manila-2021"),
}


def get_preset(name: str) -> ReadoutNoise:
    try:
        return PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown noise preset {name!r}; available: {', '.join(sorted(PRESETS))}") from None


@dataclass(frozen=True)
class RandomStream:
    """Key of an independent, reproducible random stream."""

    seed: int
    stream_id: int = 0

    def __post_init__(self):
        for key in ("seed", "stream_id"):
            v = getattr(self, key)
            if not 0 <= v < 2**64:
                raise ValueError(f"{key} must fit in an unsigned 64-bit integer, got {v!r}")

    def generator(self) -> np.random.Generator:
        key = np.array([self.seed, self.stream_id], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))

    def child(self, stream_id: int) -> RandomStream:
        return RandomStream(self.seed, stream_id)


@dataclass(frozen=True)
class ShotCounts:
    n_qubits: int
    counts: dict[str, int] = field(hash=False)
    shots: int

    def __post_init__(self):
        if any(len(k) != self.n_qubits or set(k) - {"0", "1"} for k in self.counts):
            raise ValueError(f"every outcome key must be a {self.n_qubits}-bit string")
        if any(v < 0 for v in self.counts.values()):
            raise ValueError("counts must be non-negative")
        if sum(self.counts.values()) != self.shots:
            raise ValueError("counts do not sum to shots")

    def get(self, outcome: str) -> int:
        return self.counts.get(outcome, 0)

    def to_array(self) -> np.ndarray:
        out = np.zeros(2**self.n_qubits, dtype=np.int64)
        for k, v in self.counts.items():
            out[int(k, 2)] = v
        return out

    @classmethod
    def from_array(cls, n_qubits: int, arr: Sequence[int]) -> ShotCounts:
        counts = {format(i, f"0{n_qubits}b"): int(c) for i, c in enumerate(arr) if c}
        return cls(n_qubits, counts, int(np.sum(arr)))


def _check_distribution(probs, n_qubits: int | None = None) -> np.ndarray:
    p = np.asarray(probs, dtype=float)
    if p.ndim != 1 or p.size < 2 or p.size & (p.size - 1):
        raise ValueError("probabilities must be a 1-d vector of length 2^n")
    if n_qubits is not None and p.size != 2**n_qubits:
        raise ValueError(f"expected {2**n_qubits} probabilities, got {p.size}")
    if np.any(p < -PROB_TOL) or abs(p.sum() - 1.0) > PROB_TOL:
        raise ValueError("probabilities must be non-negative and sum to 1")
    return np.clip(p, 0.0, None)


def _n_qubits_of(p: np.ndarray) -> int:
    return int(p.size).bit_length() - 1


def apply_readout_noise(probs, noise: ReadoutNoise, n_qubits: int | None = None) -> np.ndarray:
    p = _check_distribution(probs, n_qubits)
    n = _n_qubits_of(p)
    # column j of the confusion matrix is the read distribution for true bit j
    confusion = np.array([[1 - noise.eps01, noise.eps10], [noise.eps01, 1 - noise.eps10]])
    t = p.reshape((2,) * n)
    for q in range(n):
        t = np.moveaxis(np.tensordot(confusion, t, axes=([1], [q])), 0, q)
    return t.reshape(-1)


def apply_cnot_depolarizing(probs, depol: float) -> np.ndarray:
    p = _check_distribution(probs, 2)
    if not 0.0 <= depol < 0.5:
        raise ValueError(f"depol must lie in [0, 0.5), got {depol!r}")
    return (1.0 - depol) * p + depol / p.size


def sample_counts(probs, shots: int, rng: RandomStream | np.random.Generator) -> ShotCounts:
    if shots < 1:
        raise ValueError("shots must be >= 1")
    p = _check_distribution(probs)
    gen = rng.generator() if isinstance(rng, RandomStream) else rng
    draw = gen.multinomial(int(shots), p / p.sum())
    return ShotCounts.from_array(_n_qubits_of(p), draw)


def flip_readout(counts: ShotCounts, noise: ReadoutNoise, rng: RandomStream | np.random.Generator) -> ShotCounts:
    """Per-shot readout flips applied to already sampled counts.

    Slow reference path for :func:`apply_readout_noise`; the two are equal
    in distribution.
    """
    gen = rng.generator() if isinstance(rng, RandomStream) else rng
    n = counts.n_qubits
    out = np.zeros(2**n, dtype=np.int64)
    for key in sorted(counts.counts):
        c = counts.counts[key]
        bits = np.tile(np.array([int(b) for b in key]), (c, 1))
        u = gen.random(bits.shape)
        flip = np.where(bits == 0, u < noise.eps01, u < noise.eps10)
        bits ^= flip.astype(bits.dtype)
        idx = bits @ (1 << np.arange(n - 1, -1, -1))
        out += np.bincount(idx, minlength=2**n)
    return ShotCounts.from_array(n, out)


def polarization(counts: ShotCounts) -> float:
    """(count_1 - count_0) / shots; +1 when every shot reads 1."""
    if counts.n_qubits != 1:
        raise ValueError("polarization needs single-qubit counts")
    return (counts.get("1") - counts.get("0")) / counts.shots


def parity(counts: ShotCounts) -> float:
    """(count_00 + count_11 - count_01 - count_10) / shots."""
    if counts.n_qubits != 2:
        raise ValueError("parity needs two-qubit counts")
    same = counts.get("00") + counts.get("11")
    return (same - counts.get("01") - counts.get("10")) / counts.shots
