"""Spin Wigner functions on the sphere for spin-1/2 and spin-1 states.

A state of spin j is expanded in irreducible tensor operators

    <j m | T_kq | j m'> = sqrt((2k+1)/(2j+1)) <j m'; k q | j m>,

with multipoles rho_kq = Tr(rho T_kq^dagger), k = 0..2j, and the field is

    W(theta, phi) = sum_kq rho_kq Y_kq(theta, phi) / sqrt(4 pi / (2j+1)),

using Condon-Shortley harmonics, normalized so that the sphere integral of
W is 1. Matrices are indexed by m ascending (m = -j first). Qubit |0> is
spin up, so a single qubit |0> is m = +1/2 and the two-qubit symmetric
states map as |11> -> m=-1, (|01>+|10>)/sqrt2 -> m=0, |00> -> m=+1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy.interpolate import RegularGridInterpolator
from scipy.linalg import expm
from scipy.special import sph_harm_y

from .clebsch import clebsch_gordan
from .statevector import StateVector

MATRIX_TOL = 1e-9
FWHM_PER_SIGMA = 2.0 * math.sqrt(2.0 * math.log(2.0))


class SymmetricSubspaceError(ValueError):
    """Two-qubit state has weight outside the triplet subspace."""


class DegenerateFieldError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.shape not in ((2, 2), (3, 3)):
            raise ValueError("only spin-1/2 (2x2) and spin-1 (3x3) density matrices are supported")
        if not np.allclose(m, m.conj().T, rtol=0, atol=MATRIX_TOL):
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(m) - 1) > MATRIX_TOL:
            raise ValueError("density matrix does not have unit trace")
        if np.linalg.eigvalsh(m).min() < -MATRIX_TOL:
            raise ValueError("density matrix is not positive semidefinite")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def j(self) -> float:
        return (self.dim - 1) / 2

    def expect(self, op: np.ndarray) -> complex:
        return complex(np.trace(self.matrix @ op))


def _spin_ket(state: StateVector) -> np.ndarray:
    a = state.amps
    if state.n_qubits == 1:
        return np.array([a[1], a[0]])
    if state.n_qubits == 2:
        anti = abs(a[1] - a[2]) ** 2 / 2
        if anti > MATRIX_TOL:
            raise SymmetricSubspaceError(f"state is outside the symmetric subspace (weight {anti:.3g})")
        return np.array([a[3], (a[1] + a[2]) / math.sqrt(2), a[0]])
    raise ValueError("only 1- and 2-qubit states have a spin Wigner function here")


def density_from_state(state: StateVector) -> DensityMatrix:
    """Projector onto ``state`` in the spin-j basis (j = n_qubits / 2)."""
    ket = _spin_ket(state)
    ket = ket / np.linalg.norm(ket)
    return DensityMatrix(np.outer(ket, ket.conj()))


def _dim(j: float) -> int:
    d = int(round(2 * j)) + 1
    if d not in (2, 3):
        raise ValueError("j must be 1/2 or 1")
    return d


@lru_cache(maxsize=None)
def spin_operators(j: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(Jx, Jy, Jz) in the m-ascending basis."""
    d = _dim(j)
    ms = -j + np.arange(d)
    jp = np.zeros((d, d), dtype=complex)
    for i in range(d - 1):
        m = ms[i]
        jp[i + 1, i] = math.sqrt(j * (j + 1) - m * (m + 1))
    jx = (jp + jp.conj().T) / 2
    jy = (jp - jp.conj().T) / 2j
    jz = np.diag(ms).astype(complex)
    for a in (jx, jy, jz):
        a.setflags(write=False)
    return jx, jy, jz


@lru_cache(maxsize=None)
def tensor_operator(j: float, k: int, q: int) -> np.ndarray:
    d = _dim(j)
    if not 0 <= k <= 2 * j or abs(q) > k:
        raise ValueError(f"no tensor operator T_{k}{q} for j={j}")
    ms = -j + np.arange(d)
    t = np.zeros((d, d))
    scale = math.sqrt((2 * k + 1) / (2 * j + 1))
    for a, m in enumerate(ms):
        for b, mp in enumerate(ms):
            t[a, b] = scale * clebsch_gordan(j, mp, k, q, j, m)
    t.setflags(write=False)
    return t


def component_keys(j: float) -> list[tuple[int, int]]:
    return [(k, q) for k in range(int(round(2 * j)) + 1) for q in range(-k, k + 1)]


def multipole_components(rho: DensityMatrix) -> dict[tuple[int, int], complex]:
    """rho_kq = Tr(rho T_kq^dagger) for k = 0..2j, q = -k..k."""
    j = rho.j
    return {(k, q): complex(np.trace(rho.matrix @ tensor_operator(j, k, q).T)) for k, q in component_keys(j)}


def jz_component_scale(j: float) -> float:
    """Constant c with rho_10 = c <J_z>."""
    return math.sqrt(3.0 / ((2 * j + 1) * j * (j + 1)))


@dataclass(frozen=True)
class SphereGrid:
    """Polar angle theta over [0, pi] inclusive; azimuth over [0, 2 pi) exclusive."""

    n_theta: int = 91
    n_phi: int = 180

    def __post_init__(self):
        if self.n_theta < 2 or self.n_phi < 3:
            raise ValueError("grid needs n_theta >= 2 and n_phi >= 3")

    @property
    def theta(self) -> np.ndarray:
        return np.linspace(0.0, math.pi, self.n_theta)

    @property
    def phi(self) -> np.ndarray:
        return np.arange(self.n_phi) * (2 * math.pi / self.n_phi)

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.theta, self.phi, indexing="ij")

    def integrate(self, values: np.ndarray) -> float:
        """Trapezoid rule in theta (sin theta weight), rectangle rule in azimuth."""
        ring = values.sum(axis=1) * (2 * math.pi / self.n_phi)
        return float(np.trapezoid(ring * np.sin(self.theta), self.theta))


def _synthesize(components: dict, j: float, theta, phi) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    total = np.zeros(np.broadcast(theta, phi).shape, dtype=complex)
    for (k, q), c in components.items():
        if c != 0:
            total += c * sph_harm_y(k, q, theta, phi)
    return total / math.sqrt(4 * math.pi / (2 * j + 1))


def evaluate(components: dict, j: float, theta, phi) -> np.ndarray:
    """Real field at arbitrary (theta, phi); raises if the imaginary residue exceeds 1e-9."""
    w = _synthesize(components, j, theta, phi)
    residue = float(np.max(np.abs(w.imag))) if w.size else 0.0
    if residue > MATRIX_TOL:
        raise ValueError(f"Wigner synthesis is not real (max |Im W| = {residue:.3g})")
    return w.real


@dataclass(frozen=True, eq=False)
class WignerField:
    grid: SphereGrid
    values: np.ndarray
    components: dict
    j: float
    max_imag: float = 0.0

    def integral(self) -> float:
        return self.grid.integrate(self.values)

    def at(self, theta, phi) -> np.ndarray:
        return evaluate(self.components, self.j, theta, phi)

    def rows(self):
        """(theta, phi_az, W) triples in grid order."""
        th, ph = self.grid.mesh()
        return zip(th.ravel(), ph.ravel(), self.values.ravel())


def wigner_field(rho: DensityMatrix, grid: SphereGrid | None = None) -> WignerField:
    grid = grid or SphereGrid()
    comps = multipole_components(rho)
    th, ph = grid.mesh()
    w = _synthesize(comps, rho.j, th, ph)
    residue = float(np.max(np.abs(w.imag)))
    if residue > MATRIX_TOL:
        raise ValueError(f"Wigner synthesis is not real (max |Im W| = {residue:.3g})")
    values = w.real
    values.setflags(write=False)
    return WignerField(grid, values, comps, rho.j, residue)


def rotation_operator(j: float, axis: Sequence[float], angle: float) -> np.ndarray:
    """exp(-i angle n.J) for unit axis n."""
    n = np.asarray(axis, dtype=float)
    n = n / np.linalg.norm(n)
    jx, jy, jz = spin_operators(j)
    return expm(-1j * angle * (n[0] * jx + n[1] * jy + n[2] * jz))


def rotate(rho: DensityMatrix, axis: Sequence[float], angle: float) -> DensityMatrix:
    r = rotation_operator(rho.j, axis, angle)
    m = r @ rho.matrix @ r.conj().T
    return DensityMatrix((m + m.conj().T) / 2)


def collective_rotation_check(rho: DensityMatrix, alpha: float) -> dict[tuple[int, int], complex]:
    """Multipoles after R_Z(alpha) on every qubit.

    Computed from the rotated density matrix and checked against the phase
    rule rho_kq -> exp(-i q alpha) rho_kq.
    """
    rotated = multipole_components(rotate(rho, (0, 0, 1), alpha))
    for (k, q), c in multipole_components(rho).items():
        expected = np.exp(-1j * q * alpha) * c
        if abs(rotated[(k, q)] - expected) > MATRIX_TOL:
            raise ArithmeticError(f"rotation phase rule violated at (k={k}, q={q})")
    return rotated


def _unit(theta, phi) -> np.ndarray:
    return np.array([math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta)])


def great_circle(theta0: float, phi0: float, heading: float, dist: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Points at arc distance ``dist`` from (theta0, phi0) leaving along ``heading``.

    heading 0 points toward increasing theta, pi/2 toward increasing azimuth.
    """
    u = _unit(theta0, phi0)
    e_th = np.array([math.cos(theta0) * math.cos(phi0), math.cos(theta0) * math.sin(phi0), -math.sin(theta0)])
    e_ph = np.array([-math.sin(phi0), math.cos(phi0), 0.0])
    t = math.cos(heading) * e_th + math.sin(heading) * e_ph
    dist = np.asarray(dist, dtype=float)[:, None]
    p = np.cos(dist) * u + np.sin(dist) * t
    theta = np.arccos(np.clip(p[:, 2], -1.0, 1.0))
    phi = np.mod(np.arctan2(p[:, 1], p[:, 0]), 2 * math.pi)
    return theta, phi


def _grid_interpolator(field: WignerField):
    g = field.grid
    phi_ext = np.append(g.phi, 2 * math.pi)
    vals = np.concatenate([field.values, field.values[:, :1]], axis=1)
    interp = RegularGridInterpolator((g.theta, phi_ext), vals, method="linear")

    def f(theta, phi):
        return interp(np.column_stack([np.clip(theta, 0, math.pi), np.mod(phi, 2 * math.pi)]))

    return f


def _half_distance(samples: np.ndarray, dist: np.ndarray, level: float) -> float:
    below = np.nonzero(samples < level)[0]
    if below.size == 0:
        return math.inf
    i = below[0]
    if i == 0:
        return 0.0
    a, b = samples[i - 1], samples[i]
    return float(dist[i - 1] + (a - level) / (a - b) * (dist[i] - dist[i - 1]))


def angular_width(field: WignerField, n_headings: int = 72) -> float:
    """Full width at half maximum through the field maximum, in radians.

    Profiles along great circles through the grid maximum are read off the
    grid by linear interpolation; the narrowest full width (the direction of
    steepest falloff) is returned. Directions with no half-maximum crossing
    (along a ring) are ignored.
    """
    vals = field.values
    i, j = np.unravel_index(int(np.argmax(vals)), vals.shape)
    peak = float(vals[i, j])
    if not peak > 0:
        raise DegenerateFieldError("field has no positive maximum")
    theta0, phi0 = field.grid.theta[i], field.grid.phi[j]
    step = min(math.pi / (field.grid.n_theta - 1), 2 * math.pi / field.grid.n_phi) / 4
    dist = np.arange(0.0, math.pi + step, step)
    f = _grid_interpolator(field)
    level = peak / 2
    widths = []
    for heading in np.arange(n_headings // 2) * (2 * math.pi / n_headings):
        sides = [_half_distance(f(*great_circle(theta0, phi0, h, dist)), dist, level)
                 for h in (heading, heading + math.pi)]
        if all(math.isfinite(s) for s in sides):
            widths.append(sides[0] + sides[1])
    if not widths:
        raise DegenerateFieldError("field never falls to half maximum")
    return min(widths)


def gaussian_sigma_width(field: WignerField) -> float:
    """Angular FWHM expressed as the standard deviation of an equal-FWHM Gaussian."""
    return angular_width(field) / FWHM_PER_SIGMA


def coherent_pair_density() -> DensityMatrix:
    """Unentangled |00> as a spin-1 coherent state along +z."""
    from .statevector import basis_state

    return density_from_state(basis_state(2, 0))
