"""Dense-matrix FALQON reference built from Kronecker products, for small n only."""

from functools import reduce

import numpy as np
from scipy.linalg import expm

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)


def single_qubit_operator(op, qubit, n):
    # qubit 0 is the least-significant bit, so it is the last factor
    factors = [op if q == qubit else I2 for q in reversed(range(n))]
    return reduce(np.kron, factors)


def cost_hamiltonian(n, edges):
    dim = 2**n
    h = np.zeros((dim, dim), dtype=complex)
    for i, j in edges:
        zz = single_qubit_operator(Z, i, n) @ single_qubit_operator(Z, j, n)
        h += -0.5 * (np.eye(dim) - zz)
    return h


def mixer_hamiltonian(n):
    return sum(single_qubit_operator(X, q, n) for q in range(n))


def commutator(a, b):
    return a @ b - b @ a


def feedback_operators(h_c, h_m):
    comm = commutator(h_m, h_c)
    a_op = 1j * comm
    b_op = 0.5 * commutator(comm, h_m)
    c_op = commutator(comm, h_c)
    return a_op, b_op, c_op


def expectation(op, psi):
    return np.vdot(psi, op @ psi).real


def simulate(
    n, edges, dt, layers, order=2, betas=None, eps_b=1e-9, beta_max=10.0, max_angle=None
):
    """
    Run FALQON with dense matrices; returns (betas, energies).

    When betas is given, the schedule is replayed instead of computed.
    """
    h_c = cost_hamiltonian(n, edges)
    h_m = mixer_hamiltonian(n)
    a_op, b_op, c_op = feedback_operators(h_c, h_m)
    u_c = expm(-1j * dt * h_c)
    psi = np.full(2**n, 2.0 ** (-n / 2), dtype=complex)
    energies = [expectation(h_c, psi)]
    used = []
    for k in range(layers):
        if betas is None:
            a, b, c = (expectation(op, psi) for op in (a_op, b_op, c_op))
            if order == 1 or abs(b) < eps_b:
                beta = -a
            else:
                beta = -(a + dt * c) / (2 * dt * b)
                if max_angle is not None and abs(dt * beta) > max_angle:
                    beta = -a
            beta = float(np.clip(beta, -beta_max, beta_max))
        else:
            beta = betas[k]
        used.append(beta)
        psi = expm(-1j * dt * beta * h_m) @ (u_c @ psi)
        energies.append(expectation(h_c, psi))
    return used, energies


def random_state(n, rng):
    psi = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return psi / np.linalg.norm(psi)


K4_EDGES = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
K33_EDGES = [(i, j) for i in range(3) for j in range(3, 6)]
TRIANGLE_EDGES = [(0, 1), (1, 2), (0, 2)]
