import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import optimize, stats

from qsense.estimation import (
    CosineFit,
    FitError,
    OperatingPointError,
    SensitivityPoint,
    calibrate,
    entangled_limit,
    fit_cosine,
    fit_power_law,
    infer_phase,
    infer_phases,
    local_slope,
    mean_excess_over_sql,
    sample_std,
    scaling_experiment,
    sense_experiment,
    sql,
)
from qsense.interferometer import CircuitKind, ExperimentSpec, run_experiment, sweep_angles
from qsense.sampling import PRESETS

MANILA = PRESETS["manila-2021"]
PHIS = sweep_angles(13)


def test_fit_exact_points():
    fit = fit_cosine([(p, -math.cos(p)) for p in PHIS], 1)
    assert fit.A == pytest.approx(1, abs=1e-12) and fit.B == pytest.approx(0, abs=1e-12)
    assert fit.se_A < 1e-12 and fit.se_B < 1e-12
    fit2 = fit_cosine([(p, -0.8 * math.cos(2 * p) + 0.1) for p in PHIS], 2)
    assert (fit2.A, fit2.B) == pytest.approx((0.8, 0.1), abs=1e-12)


@pytest.mark.parametrize("k", [1, 2])
def test_fit_matches_nonlinear_least_squares(k):
    rng = np.random.default_rng(k)
    phi = np.repeat(PHIS, 5)
    y = -0.9 * np.cos(k * phi) + 0.05 + rng.normal(0, 0.03, phi.size)
    fit = fit_cosine(zip(phi, y), k)
    popt, pcov = optimize.curve_fit(lambda x, a, b: -a * np.cos(k * x) + b, phi, y, p0=[0.5, 0.0])
    assert (fit.A, fit.B) == pytest.approx(tuple(popt), abs=1e-9)
    assert (fit.se_A, fit.se_B) == pytest.approx(tuple(np.sqrt(np.diag(pcov))), rel=1e-6)


def test_fit_errors():
    with pytest.raises(ValueError):
        fit_cosine([(0, 1), (1, 2)], 1)
    with pytest.raises(ValueError):
        fit_cosine([(p, 0) for p in PHIS], 3)
    with pytest.raises(FitError):
        fit_cosine([(math.pi / 2, 0.1), (3 * math.pi / 2, 0.2), (math.pi / 2, 0.0)], 1)


def test_fit_json_shape():
    fit = CosineFit(0.9, -0.04, 1, 0.01, 0.005)
    assert set(json.loads(json.dumps(fit.to_dict()))) == {"A", "B", "k", "se_A", "se_B"}


@pytest.mark.parametrize("k", [1, 2])
def test_fit_unbiasedness(k):
    rng = np.random.default_rng(1000 + k)
    phi = np.linspace(0, 2 * math.pi, 400, endpoint=False)
    A0, B0 = 0.85, -0.03
    hits = 0
    for _ in range(1000):
        y = -A0 * np.cos(k * phi) + B0 + rng.normal(0, 0.05, phi.size)
        f = fit_cosine(zip(phi, y), k)
        hits += abs(f.A - A0) <= 3 * f.se_A and abs(f.B - B0) <= 3 * f.se_B
    assert hits >= 990


def test_ideal_simulator_fit_single():
    fit = calibrate("single", None, seed=2021)[2]
    assert abs(fit.A - 1) <= 3 * fit.se_A
    assert abs(fit.B) <= 3 * fit.se_B


def test_manila_pair_fit_matches_noise_model():
    fit = calibrate("pair", MANILA, seed=2021)[2]
    assert abs(fit.A - 0.852) <= 3 * fit.se_A
    # the model predicts a parity offset of (eps01 - eps10)^2
    assert abs(fit.B - MANILA.offset**2) <= 3 * fit.se_B


@pytest.mark.parametrize(
    "A,k,phi0,expected",
    [(1, 1, math.pi / 2, 1), (0.932, 1, math.pi / 2, 0.932), (1, 2, math.pi / 4, 2)],
)
def test_local_slope(A, k, phi0, expected):
    assert local_slope(CosineFit(A, 0, k, 0, 0), phi0) == pytest.approx(expected, abs=1e-15)


def test_inverse_slope_factor():
    assert 1 / local_slope(CosineFit(0.932, 0, 1, 0, 0), math.pi / 2) == pytest.approx(1.073, abs=5e-4)


def test_local_slope_matches_finite_difference():
    fit = CosineFit(0.87, 0.02, 2, 0, 0)
    h = 1e-6
    for phi0 in np.linspace(0.1, 3.0, 7):
        fd = (fit(phi0 + h) - fit(phi0 - h)) / (2 * h)
        assert local_slope(fit, phi0) == pytest.approx(fd, abs=1e-8)


def test_infer_phase():
    fit = CosineFit(0.93, -0.04, 1, 0, 0)
    est = infer_phase(float(fit(1.2)), fit, 1.2)
    assert est.phi_tilde == pytest.approx(1.2, abs=1e-15)
    assert est.m == pytest.approx(local_slope(fit, 1.2))
    with pytest.raises(OperatingPointError):
        infer_phase(0.0, fit, 0.0)
    with pytest.raises(OperatingPointError):
        infer_phases([0.0], CosineFit(1, 0, 2, 0, 0), math.pi / 2)


def test_sample_std():
    assert sample_std([0.3] * 10) == pytest.approx((0.0, 0.0), abs=1e-15)
    sigma, se = sample_std([-1, 1])
    assert sigma == pytest.approx(math.sqrt(2))
    assert se == pytest.approx(math.sqrt(2) / math.sqrt(2))
    with pytest.raises(ValueError):
        sample_std([1.0])


def test_limits():
    assert sql(100) == pytest.approx(0.1)
    assert entangled_limit(2) == pytest.approx(0.5)
    for n in range(2, 2050, 2):
        assert entangled_limit(n) / sql(n) == pytest.approx(1 / math.sqrt(2))
    with pytest.raises(ValueError):
        entangled_limit(3)
    with pytest.raises(ValueError):
        sql(0)


def test_power_law_exact():
    pts = [SensitivityPoint(n, 1 / math.sqrt(n), 0) for n in (1, 4, 16, 64)]
    law = fit_power_law(pts)
    assert law.exponent == pytest.approx(-0.5, abs=1e-12)
    assert law.prefactor == pytest.approx(1, abs=1e-12)


def test_power_law_matches_linregress():
    rng = np.random.default_rng(8)
    N = np.array([2, 4, 8, 16, 64, 256, 1024])
    sig = 0.83 * N**-0.495 * np.exp(rng.normal(0, 0.03, N.size))
    law = fit_power_law([SensitivityPoint(int(n), float(s), 0) for n, s in zip(N, sig)])
    ref = stats.linregress(np.log(N), np.log(sig))
    assert law.exponent == pytest.approx(ref.slope, rel=1e-12)
    assert law.se_exponent == pytest.approx(ref.stderr, rel=1e-9)
    assert law.prefactor == pytest.approx(math.exp(ref.intercept), rel=1e-12)
    assert law.se_prefactor == pytest.approx(math.exp(ref.intercept) * ref.intercept_stderr, rel=1e-9)
    assert set(law.to_dict()) == {"exponent", "prefactor", "se_exponent", "se_prefactor"}


def test_power_law_errors():
    with pytest.raises(ValueError):
        fit_power_law([SensitivityPoint(1, 1, 0), SensitivityPoint(2, 0.7, 0)])
    with pytest.raises(ValueError):
        fit_power_law([SensitivityPoint(n, s, 0) for n, s in ((1, 1.0), (2, 0.0), (4, 0.5))])
    with pytest.raises(ValueError):
        SensitivityPoint(0, 1.0, 0.0)


def test_error_propagation_identity():
    fit = calibrate("single", MANILA, seed=5)[2]
    res = sense_experiment("single", math.pi / 2, 0.2, 100, 75, MANILA, seed=5, fit=fit)
    m = local_slope(fit, math.pi / 2)
    assert sample_std(res.phi_tilde)[0] == pytest.approx(sample_std(res.measured)[0] / abs(m), rel=1e-12)


@settings(max_examples=12, deadline=None, derandomize=True)
@given(st.floats(-0.3, 0.3), st.integers(0, 10**6))
def test_estimator_unbiased_single(dphi, seed):
    phi0 = math.pi / 2
    fit = CosineFit(1.0, 0.0, 1, 0, 0)
    spec = ExperimentSpec("single", phi0 + dphi, 100, 400, seed=seed)
    est = infer_phases(run_experiment(spec).values, fit, phi0)
    se = est.std(ddof=1) / math.sqrt(est.size)
    assert abs(est.mean() - (phi0 + dphi)) <= 3 * se


@settings(max_examples=12, deadline=None, derandomize=True)
@given(st.floats(-0.15, 0.15), st.integers(0, 10**6))
def test_estimator_unbiased_pair(dphi, seed):
    phi0 = math.pi / 4
    fit = CosineFit(1.0, 0.0, 2, 0, 0)
    spec = ExperimentSpec("pair", phi0 + dphi, 50, 400, seed=seed)
    est = infer_phases(run_experiment(spec).values, fit, phi0)
    se = est.std(ddof=1) / math.sqrt(est.size)
    assert abs(est.mean() - (phi0 + dphi)) <= 3 * se


def test_scaling_noiseless_examples():
    (single,) = scaling_experiment("single", [100], trials=600, seed=31)
    assert abs(single.sigma_phi - 0.1) <= 3 * single.se_sigma
    (pair,) = scaling_experiment("pair", [100], trials=600, seed=31)
    assert abs(pair.sigma_phi - 1 / math.sqrt(200)) <= 3 * pair.se_sigma


def test_scaling_rejects_odd_pair_counts():
    with pytest.raises(ValueError):
        scaling_experiment("pair", [3], trials=10, seed=1)


def test_noiseless_scaling_exponent_band():
    Ns = [4, 16, 64, 256, 1024]
    for kind in ("single", "pair"):
        law = fit_power_law(scaling_experiment(kind, Ns, trials=600, seed=41))
        assert -0.52 <= law.exponent <= -0.48


def test_entanglement_advantage_ordering():
    Ns = [4, 16, 64, 256, 1024]
    single = scaling_experiment("single", Ns, trials=600, seed=43)
    pair = scaling_experiment("pair", Ns, trials=600, seed=44)
    for s, p in zip(single, pair):
        assert s.sigma_phi - p.sigma_phi > 3 * math.hypot(s.se_sigma, p.se_sigma)


def test_scaling_points_independent_of_n_list():
    a = scaling_experiment("single", [16, 64], trials=50, seed=3)
    b = scaling_experiment("single", [64], trials=50, seed=3)
    assert a[1] == b[0]


def test_mean_excess():
    pts = [SensitivityPoint(4, 0.55, 0), SensitivityPoint(16, 0.2875, 0)]
    assert mean_excess_over_sql(pts) == pytest.approx((0.1 + 0.15) / 2)


def test_pair_manila_ratio_to_sql():
    pts = scaling_experiment("pair", [2**i for i in range(1, 11)], trials=600, noise=MANILA, seed=2021)
    ratio = np.mean([p.sigma_phi * math.sqrt(p.N) for p in pts])
    # model: sqrt(1 - offset^4) / (sqrt(2) * parity amplitude) = 0.830
    assert ratio == pytest.approx(0.83, abs=0.03)


def test_kind_parse():
    assert CircuitKind.parse("pair") is CircuitKind.ENTANGLED_PAIR
    assert CircuitKind.parse(CircuitKind.SINGLE) is CircuitKind.SINGLE
