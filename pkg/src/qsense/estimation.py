"""Fringe fitting, phase inference and sensitivity scaling."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .interferometer import CircuitKind, ExperimentSpec, run_experiment, run_sweep, sweep_angles
from .sampling import ReadoutNoise

SLOPE_FLOOR = 1e-3

# Disjoint random-stream blocks under one seed. Scaling cell for N uses N << 32.
CAL_STREAM_BASE = 0
SENSE_STREAM_BASE = 1 << 56


class FitError(ValueError):
    pass


class OperatingPointError(ValueError):
    """Phase inversion requested at a fringe extremum."""


@dataclass(frozen=True)
class CosineFit:
    """y(phi) = -A cos(k phi) + B with k fixed."""

    A: float
    B: float
    k: int
    se_A: float
    se_B: float

    def __call__(self, phi):
        return -self.A * np.cos(self.k * np.asarray(phi, dtype=float)) + self.B

    def to_dict(self) -> dict:
        return asdict(self)


def fit_cosine(points: Iterable[tuple[float, float]], k: int) -> CosineFit:
    """Linear least squares for A and B at fixed frequency ``k``.

    Standard errors come from the residual variance with n - 2 degrees of
    freedom; they are zero for exact data.
    """
    if k not in (1, 2):
        raise ValueError("k must be 1 or 2")
    pts = np.asarray(list(points), dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 3 or pts.shape[1] != 2:
        raise ValueError("fit_cosine needs at least three (phi, y) points")
    phi, y = pts[:, 0], pts[:, 1]
    X = np.column_stack([-np.cos(k * phi), np.ones_like(phi)])
    xtx = X.T @ X
    if np.linalg.cond(xtx) > 1e12:
        raise FitError("design matrix is degenerate; vary phi across the fringe")
    cov_unit = np.linalg.inv(xtx)
    coef = cov_unit @ (X.T @ y)
    resid = y - X @ coef
    dof = len(y) - 2
    s2 = float(resid @ resid) / dof if dof > 0 else 0.0
    se = np.sqrt(np.clip(np.diag(cov_unit) * s2, 0.0, None))
    return CosineFit(float(coef[0]), float(coef[1]), k, float(se[0]), float(se[1]))


def local_slope(fit: CosineFit, phi0: float) -> float:
    """d y / d phi of the fitted fringe at ``phi0``."""
    return fit.A * fit.k * math.sin(fit.k * phi0)


@dataclass(frozen=True)
class PhaseEstimate:
    phi0: float
    phi_tilde: float
    m: float


def _checked_slope(fit: CosineFit, phi0: float) -> float:
    m = local_slope(fit, phi0)
    if abs(m) < SLOPE_FLOOR:
        raise OperatingPointError(
            f"uninvertible operating point phi0={phi0:.6g}: fringe slope {m:.3g} is below {SLOPE_FLOOR:g}"
        )
    return m


def infer_phase(measured: float, fit: CosineFit, phi0: float) -> PhaseEstimate:
    """Invert the fringe linearized at ``phi0``."""
    m = _checked_slope(fit, phi0)
    return PhaseEstimate(phi0, phi0 + (measured - float(fit(phi0))) / m, m)


def infer_phases(measured: Sequence[float], fit: CosineFit, phi0: float) -> np.ndarray:
    m = _checked_slope(fit, phi0)
    return phi0 + (np.asarray(measured, dtype=float) - float(fit(phi0))) / m


def sample_std(values: Sequence[float]) -> tuple[float, float]:
    """Unbiased-variance standard deviation and its normal-theory standard error."""
    v = np.asarray(values, dtype=float)
    n = v.size
    if n < 2:
        raise ValueError("sample_std needs at least two values")
    sigma = float(np.std(v, ddof=1))
    return sigma, sigma / math.sqrt(2 * (n - 1))


def sql(N: int) -> float:
    """Standard quantum limit 1/sqrt(N)."""
    if N < 1:
        raise ValueError("N must be >= 1")
    return 1.0 / math.sqrt(N)


def entangled_limit(N: int) -> float:
    """Pair-entangled limit 1/sqrt(2N); N counts qubits and must be even."""
    if N < 1 or N % 2:
        raise ValueError("entangled_limit needs an even N >= 2")
    return 1.0 / math.sqrt(2 * N)


@dataclass(frozen=True)
class SensitivityPoint:
    N: int
    sigma_phi: float
    se_sigma: float
    mean_phi: float = float("nan")

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("N must be >= 1")


@dataclass(frozen=True)
class PowerLawFit:
    """sigma = prefactor * N ** exponent."""

    exponent: float
    prefactor: float
    se_exponent: float
    se_prefactor: float

    def __call__(self, N):
        return self.prefactor * np.asarray(N, dtype=float) ** self.exponent

    def to_dict(self) -> dict:
        return asdict(self)


def fit_power_law(points: Sequence[SensitivityPoint]) -> PowerLawFit:
    if len(points) < 3:
        raise ValueError("fit_power_law needs at least three points")
    N = np.array([p.N for p in points], dtype=float)
    s = np.array([p.sigma_phi for p in points], dtype=float)
    if np.any(s <= 0):
        raise ValueError("sigma_phi must be positive for a log-log fit")
    x, y = np.log(N), np.log(s)
    xm = x.mean()
    sxx = float(((x - xm) ** 2).sum())
    if sxx == 0:
        raise FitError("all points share one N")
    slope = float(((x - xm) * (y - y.mean())).sum() / sxx)
    intercept = float(y.mean() - slope * xm)
    resid = y - (intercept + slope * x)
    s2 = float(resid @ resid) / (len(x) - 2) if len(x) > 2 else 0.0
    se_slope = math.sqrt(s2 / sxx)
    se_intercept = math.sqrt(s2 * (1.0 / len(x) + xm**2 / sxx))
    prefactor = math.exp(intercept)
    return PowerLawFit(slope, prefactor, se_slope, prefactor * se_intercept)


def default_phi0(kind: CircuitKind | str) -> float:
    """Steepest fringe point: pi/2 for the single qubit, pi/4 for the pair."""
    return math.pi / (2 * CircuitKind.parse(kind).frequency)


def calibrate(kind: CircuitKind | str, noise: Optional[ReadoutNoise] = None, seed: int = 0, n_angles: int = 13,
              shots: int = 1024, trials: int = 5, workers: int = 1):
    """Fringe sweep plus its cosine fit; returns ``(phis, series, fit)``."""
    kind = CircuitKind.parse(kind)
    phis = sweep_angles(n_angles)
    series = run_sweep(kind, phis, shots, trials, noise, seed, CAL_STREAM_BASE, workers)
    pts = [(phi, v) for phi, s in zip(phis, series) for v in s.values]
    return phis, series, fit_cosine(pts, kind.frequency)


def _shots_for(kind: CircuitKind, N: int) -> int:
    if N < 1 or N % kind.qubits_per_shot:
        raise ValueError(f"N={N} is not a whole number of {kind.value} shots")
    return N // kind.qubits_per_shot


def scaling_experiment(kind: CircuitKind | str, N_values: Sequence[int], phi0: Optional[float] = None,
                       trials: int = 600, noise: Optional[ReadoutNoise] = None, seed: int = 0,
                       fit: Optional[CosineFit] = None, dphi: float = 0.0,
                       workers: int = 1) -> list[SensitivityPoint]:
    """Phase sensitivity versus number of measured qubits N.

    Each estimate uses N qubits (N shots for the single qubit, N/2 shots for
    the pair) taken at ``phi0 + dphi`` and inverted through ``fit``. Without
    a fit, one is calibrated from a default sweep under the same noise.
    """
    kind = CircuitKind.parse(kind)
    if phi0 is None:
        phi0 = default_phi0(kind)
    if fit is None:
        fit = calibrate(kind, noise, seed, workers=workers)[2]
    _checked_slope(fit, phi0)
    out = []
    for N in N_values:
        shots = _shots_for(kind, int(N))
        if N >= 1 << 23:
            raise ValueError("N too large for the stream layout")
        spec = ExperimentSpec(kind, phi0 + dphi, shots, trials, noise, seed, stream_base=int(N) << 32)
        phis = infer_phases(run_experiment(spec, workers).values, fit, phi0)
        sigma, se = sample_std(phis)
        out.append(SensitivityPoint(int(N), sigma, se, float(np.mean(phis))))
    return out


def mean_excess_over_sql(points: Sequence[SensitivityPoint]) -> float:
    """Average of sigma * sqrt(N) - 1 over the points."""
    return float(np.mean([p.sigma_phi * math.sqrt(p.N) - 1.0 for p in points]))


@dataclass(frozen=True)
class SenseResult:
    fit: CosineFit
    phi0: float
    phi_true: float
    measured: np.ndarray
    phi_tilde: np.ndarray

    def summary(self) -> dict:
        sig_m, se_m = sample_std(self.measured)
        sig_p, se_p = sample_std(self.phi_tilde)
        n = len(self.phi_tilde)
        return {
            "phi0": self.phi0,
            "phi_true": self.phi_true,
            "trials": n,
            "slope": local_slope(self.fit, self.phi0),
            "measured": {"mean": float(np.mean(self.measured)), "sigma": sig_m, "se_sigma": se_m},
            "phi_tilde": {"mean": float(np.mean(self.phi_tilde)), "se_mean": sig_p / math.sqrt(n),
                          "sigma": sig_p, "se_sigma": se_p},
        }


def sense_experiment(kind: CircuitKind | str, phi0: Optional[float] = None, dphi: float = 0.2, shots: int = 100,
                     trials: int = 75, noise: Optional[ReadoutNoise] = None, seed: int = 0,
                     fit: Optional[CosineFit] = None, workers: int = 1) -> SenseResult:
    """Repeated estimates of a phase shifted by ``dphi`` from the operating point."""
    kind = CircuitKind.parse(kind)
    if phi0 is None:
        phi0 = default_phi0(kind)
    if fit is None:
        fit = calibrate(kind, noise, seed, workers=workers)[2]
    _checked_slope(fit, phi0)
    spec = ExperimentSpec(kind, phi0 + dphi, shots, trials, noise, seed, stream_base=SENSE_STREAM_BASE)
    measured = run_experiment(spec, workers).values
    return SenseResult(fit, phi0, phi0 + dphi, measured, infer_phases(measured, fit, phi0))
