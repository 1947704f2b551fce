import numpy as np
import pytest
import reference
from scipy.linalg import expm

import falqon
from falqon.statevector import StateVector
from falqon.util import DimensionMismatchError, SizeLimitError


def diagonal(n, edges):
    return falqon.graph.build_cost_diagonal(falqon.graph.Graph(n, edges))


def test_uniform_state():
    psi = falqon.statevector.uniform_state(1)
    np.testing.assert_allclose(psi.amplitudes, [2**-0.5, 2**-0.5])
    psi = falqon.statevector.uniform_state(2)
    np.testing.assert_allclose(psi.amplitudes, 0.5)
    assert np.all(psi.amplitudes.imag == 0)


def test_uniform_state_size_limit():
    with pytest.raises(SizeLimitError):
        falqon.statevector.uniform_state(27)


def test_apply_cost_phase_matches_dense():
    d = diagonal(3, reference.TRIANGLE_EDGES)
    psi = falqon.statevector.uniform_state(3)
    expected = expm(-1j * 0.37 * reference.cost_hamiltonian(3, reference.TRIANGLE_EDGES))
    expected = expected @ psi.amplitudes
    falqon.statevector.apply_cost_phase(psi, d, 0.37)
    np.testing.assert_allclose(psi.amplitudes, expected, atol=1e-12)


def test_apply_mixer_matches_dense():
    rng = np.random.default_rng(1)
    amplitudes = reference.random_state(3, rng)
    psi = StateVector(3, amplitudes.copy())
    expected = expm(-1j * 0.3 * reference.mixer_hamiltonian(3)) @ amplitudes
    falqon.statevector.apply_mixer(psi, 0.3)
    np.testing.assert_allclose(psi.amplitudes, expected, atol=1e-12)


def test_apply_mixer_with_workspace():
    rng = np.random.default_rng(2)
    amplitudes = reference.random_state(5, rng)
    psi1 = StateVector(5, amplitudes.copy())
    psi2 = StateVector(5, amplitudes.copy())
    falqon.statevector.apply_mixer(psi1, 0.7)
    falqon.statevector.apply_mixer(psi2, 0.7, falqon.statevector.Workspace(5))
    np.testing.assert_array_equal(psi1.amplitudes, psi2.amplitudes)


def test_expect_cost_triangle():
    d = diagonal(3, reference.TRIANGLE_EDGES)
    psi = falqon.statevector.uniform_state(3)
    assert falqon.statevector.expect_cost(psi, d) == pytest.approx(-1.5)
    # x = 010, vertex 1 set
    psi = falqon.statevector.basis_state(3, 2)
    assert falqon.statevector.expect_cost(psi, d) == -2


def test_norm_preserved():
    g = falqon.graph.generate_regular(8, 3, seed=1)
    d = falqon.graph.build_cost_diagonal(g)
    psi = falqon.statevector.uniform_state(8)
    ws = falqon.statevector.Workspace(8)
    rng = np.random.default_rng(0)
    for _ in range(16):
        falqon.statevector.apply_cost_phase(psi, d, 0.3, ws)
        falqon.statevector.apply_mixer(psi, rng.uniform(-3, 3), ws)
    assert abs(psi.norm() - 1.0) < 1e-10


def test_dimension_mismatch():
    d = diagonal(3, reference.TRIANGLE_EDGES)
    psi = falqon.statevector.uniform_state(4)
    with pytest.raises(DimensionMismatchError):
        falqon.statevector.expect_cost(psi, d)
    with pytest.raises(DimensionMismatchError):
        falqon.statevector.feedback_expectations(psi, d)


def test_feedback_expectations_uniform_state():
    d = diagonal(4, reference.K4_EDGES)
    e = falqon.statevector.feedback_expectations(falqon.statevector.uniform_state(4), d)
    assert e.a_val == pytest.approx(0.0, abs=1e-12)
    assert e.b_val == pytest.approx(0.0, abs=1e-12)
    assert e.cost == pytest.approx(-3.0)


def test_feedback_expectations_basis_state():
    d = diagonal(3, reference.TRIANGLE_EDGES)
    for index in range(8):
        psi = falqon.statevector.basis_state(3, index)
        e = falqon.statevector.feedback_expectations(psi, d)
        assert e.a_val == pytest.approx(0.0, abs=1e-12)
        assert e.c_val == pytest.approx(0.0, abs=1e-12)
    e = falqon.statevector.feedback_expectations(falqon.statevector.basis_state(3, 0), d)
    assert e.b_val == pytest.approx(-6.0)


@pytest.mark.parametrize(
    "n, edges",
    [
        (4, reference.K4_EDGES),
        (6, falqon.graph.generate_regular(6, 3, seed=11).edges),
    ],
)
def test_feedback_expectations_match_dense(n, edges):
    d = diagonal(n, edges)
    h_c = reference.cost_hamiltonian(n, edges)
    h_m = reference.mixer_hamiltonian(n)
    a_op, b_op, c_op = reference.feedback_operators(h_c, h_m)
    ws = falqon.statevector.Workspace(n)
    rng = np.random.default_rng(n)
    for _ in range(50):
        amplitudes = reference.random_state(n, rng)
        e = falqon.statevector.feedback_expectations(StateVector(n, amplitudes), d, ws)
        assert abs(e.a_val - reference.expectation(a_op, amplitudes)) < 1e-10
        assert abs(e.b_val - reference.expectation(b_op, amplitudes)) < 1e-10
        assert abs(e.c_val - reference.expectation(c_op, amplitudes)) < 1e-10
        assert abs(e.cost - reference.expectation(h_c, amplitudes)) < 1e-10


def test_state_dump():
    rng = np.random.default_rng(3)
    psi = StateVector(3, reference.random_state(3, rng))
    text = falqon.statevector.dump_state(psi)
    assert len(text.splitlines()) == 8
    parsed = falqon.statevector.parse_state_dump(text)
    np.testing.assert_array_equal(parsed.amplitudes, psi.amplitudes)


def test_parse_state_dump_wrong_length():
    with pytest.raises(DimensionMismatchError):
        falqon.statevector.parse_state_dump("0 1.0 0.0\n1 0.0 0.0\n2 0.0 0.0\n")


def test_workspace_cost_phase_follows_new_diagonals():
    workspace = falqon.statevector.Workspace(4)
    rng = np.random.default_rng(3)
    for _ in range(20):
        # the previous diagonal is freed on every iteration
        d = falqon.graph.CostDiagonal(4, rng.integers(-4, 1, size=16))
        expected = np.exp(-1j * 0.25 * d.as_float())
        np.testing.assert_allclose(workspace.cost_phase(d, 0.25), expected, atol=1e-14)


def test_workspace_cost_phase_recomputed_for_new_dt():
    d = diagonal(3, reference.TRIANGLE_EDGES)
    workspace = falqon.statevector.Workspace(3)
    workspace.cost_phase(d, 0.1)
    phase = workspace.cost_phase(d, 0.2)
    np.testing.assert_allclose(phase, np.exp(-0.2j * d.as_float()), atol=1e-14)
