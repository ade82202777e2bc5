import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qsense.interferometer import build_circuit
from qsense.statevector import (
    GateMatrix,
    StateVector,
    apply,
    basis_state,
    bloch_vector,
    gate,
    probabilities,
    run_circuit,
    tensor,
)

S2 = 1 / math.sqrt(2)
angles = st.floats(0, 2 * math.pi, allow_nan=False)


def random_state(n, seed):
    rng = np.random.default_rng(seed)
    v = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return StateVector(n, v / np.linalg.norm(v))


@pytest.mark.parametrize(
    "n,index,expected",
    [(1, 0, [1, 0]), (1, 1, [0, 1]), (2, 2, [0, 0, 1, 0])],
)
def test_basis_state(n, index, expected):
    assert basis_state(n, index).allclose(expected)


@pytest.mark.parametrize("n,index", [(0, 0), (5, 0), (1, 2), (2, -1)])
def test_basis_state_rejects(n, index):
    with pytest.raises(ValueError):
        basis_state(n, index)


def test_state_rejects_unnormalized_and_wrong_length():
    with pytest.raises(ValueError):
        StateVector(1, [1, 1])
    with pytest.raises(ValueError):
        StateVector(2, [1, 0])
    with pytest.raises(ValueError):
        StateVector(1, [np.nan, 0])


def test_state_is_immutable():
    s = basis_state(1, 0)
    with pytest.raises(ValueError):
        s.amps[0] = 0


def test_gate_matrices():
    np.testing.assert_allclose(gate("H").matrix, S2 * np.array([[1, 1], [1, -1]]), atol=0)
    np.testing.assert_allclose(gate("RZ", math.pi).matrix, np.diag([-1j, 1j]), atol=1e-15)
    np.testing.assert_array_equal(gate("X").matrix, [[0, 1], [1, 0]])
    cnot = gate("CNOT").matrix
    # swaps |10> and |11>, leaves |00>, |01>
    np.testing.assert_array_equal(cnot @ np.eye(4), np.eye(4)[[0, 1, 3, 2]])


def test_gate_argument_errors():
    with pytest.raises(ValueError):
        gate("RZ")
    with pytest.raises(ValueError):
        gate("H", 0.3)
    with pytest.raises(ValueError):
        gate("Y")
    with pytest.raises(ValueError):
        GateMatrix(np.array([[1, 1], [0, 1]]))


def test_tensor_products():
    hh = tensor(gate("H"), gate("H")).matrix
    expected = 0.5 * np.array([[1, 1, 1, 1], [1, -1, 1, -1], [1, 1, -1, -1], [1, -1, -1, 1]])
    np.testing.assert_allclose(hh, expected, atol=1e-15)
    phi = 0.7
    rr = tensor(gate("RZ", phi), gate("RZ", phi)).matrix
    np.testing.assert_allclose(rr, np.diag([np.exp(-1j * phi), 1, 1, np.exp(1j * phi)]), atol=1e-15)
    np.testing.assert_array_equal(tensor(gate("I"), gate("I")).matrix, np.eye(4))
    with pytest.raises(ValueError):
        tensor(gate("CNOT"), gate("H"))


def test_apply_examples():
    assert apply(basis_state(1, 0), gate("H"), [0]).allclose([S2, S2])
    s = run_circuit(basis_state(1, 0), [(gate("H"), [0]), (gate("RZ", math.pi / 3), [0]), (gate("H"), [0])])
    assert s.allclose([math.sqrt(3) / 2, -0.5j])
    pre = StateVector(2, [0, S2, 0, S2])
    assert apply(pre, gate("CNOT"), [0, 1]).allclose([0, S2, S2, 0])


def test_apply_on_second_qubit_and_reversed_targets():
    # X on qubit 1 of |00> -> |01>
    assert apply(basis_state(2, 0), gate("X"), [1]).allclose([0, 1, 0, 0])
    # CNOT with control q1, target q0 maps |01> -> |11>
    assert apply(basis_state(2, 1), gate("CNOT"), [1, 0]).allclose([0, 0, 0, 1])
    # 3 qubits: X on middle qubit of |000> -> |010> (index 2)
    assert apply(basis_state(3, 0), gate("X"), [1]).allclose(basis_state(3, 2))


def test_apply_matches_full_kronecker_embedding():
    s = random_state(3, 7)
    u = gate("RZ", 0.4).matrix @ gate("H").matrix
    full = np.kron(np.kron(np.eye(2), u), np.eye(2))
    out = apply(s, GateMatrix(u), [1])
    np.testing.assert_allclose(out.amps, full @ s.amps, atol=1e-14)


def test_apply_errors():
    s = basis_state(2, 0)
    with pytest.raises(ValueError):
        apply(s, gate("H"), [0, 1])
    with pytest.raises(ValueError):
        apply(s, gate("CNOT"), [0, 0])
    with pytest.raises(ValueError):
        apply(s, gate("H"), [2])


def test_probabilities_examples():
    phi = 1.1
    p = probabilities(run_circuit(basis_state(1, 0), build_circuit("single", phi)))
    np.testing.assert_allclose(p, [math.cos(phi / 2) ** 2, math.sin(phi / 2) ** 2], atol=1e-15)
    p = probabilities(run_circuit(basis_state(1, 0), build_circuit("single", math.pi)))
    assert p[1] == pytest.approx(1, abs=1e-15)
    p = probabilities(run_circuit(basis_state(2, 0), build_circuit("pair", math.pi / 4)))
    np.testing.assert_allclose(p, [0.25] * 4, atol=1e-15)


def test_bloch_examples():
    assert bloch_vector(basis_state(1, 0)).as_tuple() == pytest.approx((0, 0, 1))
    plus = apply(basis_state(1, 0), gate("H"), [0])
    assert bloch_vector(plus).as_tuple() == pytest.approx((1, 0, 0), abs=1e-15)
    rotated = apply(plus, gate("RZ", math.pi / 3), [0])
    assert bloch_vector(rotated).as_tuple() == pytest.approx((0.5, math.sqrt(3) / 2, 0), abs=1e-15)
    with pytest.raises(ValueError):
        bloch_vector(basis_state(2, 0))


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 4), st.integers(0, 2**32 - 1), st.lists(st.tuples(st.sampled_from("HXR"), angles), max_size=10))
def test_norm_preserved_over_ten_gates(n, seed, ops):
    s = random_state(n, seed)
    rng = np.random.default_rng(seed)
    for kind, phi in ops:
        g = gate("RZ", phi) if kind == "R" else gate(kind)
        s = apply(s, g, [int(rng.integers(n))])
    assert abs(np.sum(np.abs(s.amps) ** 2) - 1) < 1e-12


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_hadamard_involution(n, seed):
    s = random_state(n, seed)
    q = seed % n
    assert apply(apply(s, gate("H"), [q]), gate("H"), [q]).allclose(s, atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(angles, angles, st.integers(0, 2**32 - 1))
def test_rz_composition_up_to_global_phase(a, b, seed):
    s = random_state(1, seed)
    two = apply(apply(s, gate("RZ", a), [0]), gate("RZ", b), [0])
    one = apply(s, gate("RZ", a + b), [0])
    np.testing.assert_allclose(np.abs(two.amps), np.abs(one.amps), atol=1e-12)
    rel = lambda v: v.amps[1] * np.conj(v.amps[0])  # noqa: E731
    assert abs(rel(two) - rel(one)) < 1e-12


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_bloch_vector_is_unit_for_pure_states(seed):
    b = bloch_vector(random_state(1, seed))
    assert b.x**2 + b.y**2 + b.z**2 == pytest.approx(1, abs=1e-9)
