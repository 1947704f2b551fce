import logging
from dataclasses import dataclass

import numpy as np

from .util import (
    DimensionMismatchError,
    InvalidParametersError,
    NonFiniteError,
    _format_repr,
    check_qubit_limit,
)

logger = logging.getLogger(__name__)

# largest accepted imaginary part of a Hermitian form, relative to its magnitude
HERMITICITY_TOLERANCE = 1e-9


class StateVector:
    """
    A dense state of n qubits.

    Bit i of a basis-state index corresponds to qubit (and graph vertex) i, with the
    least-significant bit being qubit 0. The kernels in this module update the
    amplitudes in place.

    Parameters
    ----------
    n : int
        The number of qubits.
    amplitudes : array_like
        The 2**n complex amplitudes.
    """

    def __init__(self, n, amplitudes):
        amplitudes = np.ascontiguousarray(amplitudes, dtype=np.complex128)
        if amplitudes.shape != (2**n,):
            raise DimensionMismatchError(
                f"Expected {2**n} amplitudes for {n} qubits, got {amplitudes.size}"
            )
        self.n = int(n)
        self.amplitudes = amplitudes

    def __repr__(self):
        return _format_repr(self, {"n": self.n, "norm": self.norm()})

    def norm(self):
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self):
        return np.abs(self.amplitudes) ** 2

    def copy(self):
        return StateVector(self.n, self.amplitudes.copy())


@dataclass(frozen=True)
class FeedbackExpectations:
    """Expectation values of A = i[H_M, H_C], B, C and H_C on one state."""

    a_val: float
    b_val: float
    c_val: float
    cost: float = 0.0


class Workspace:
    """
    Reusable buffers of 2**n complex numbers for the kernels of one run.

    Together with the state itself, a run needs at most five vectors: the state, the
    cost phases and three scratch vectors.
    """

    def __init__(self, n):
        self.n = int(n)
        self._buffers = {}
        self._phase_source = None
        self._phase_dt = None

    def buffer(self, name):
        if name not in self._buffers:
            self._buffers[name] = np.empty(2**self.n, dtype=np.complex128)
        return self._buffers[name]

    def cost_phase(self, d, dt):
        """Return exp(-i dt E) for the diagonal d, computed once per (d, dt)."""
        out = self.buffer("phase")
        if self._phase_source is not d or self._phase_dt != float(dt):
            _cost_phase(d, dt, out)
            self._phase_source = d
            self._phase_dt = float(dt)
        return out


def _cost_phase(d, dt, out=None):
    out = np.multiply(d.as_float(), -1j * dt, out=out)
    return np.exp(out, out=out)


def _check_dims(psi, d):
    if psi.n != d.n:
        raise DimensionMismatchError(f"State has {psi.n} qubits, diagonal has {d.n}")


def _check_workspace(workspace, n):
    if workspace is None:
        return Workspace(n)
    if workspace.n != n:
        raise DimensionMismatchError(f"Workspace has {workspace.n} qubits, state has {n}")
    return workspace


def uniform_state(n, max_qubits=None):
    """
    Prepare the uniform superposition |+>^n.

    Parameters
    ----------
    n : int
        The number of qubits.
    max_qubits : int, optional
        The qubit limit. The default is None, which uses util.MAX_QUBITS.

    Returns
    -------
    StateVector
        A state with every amplitude equal to 2**(-n/2).
    """
    if n < 1:
        raise InvalidParametersError(f"n must be at least 1, not {n}")
    check_qubit_limit(n, max_qubits)
    return StateVector(n, np.full(2**n, 2.0 ** (-n / 2), dtype=np.complex128))


def basis_state(n, index):
    """Prepare the computational basis state |index>."""
    amplitudes = np.zeros(2**n, dtype=np.complex128)
    amplitudes[index] = 1.0
    return StateVector(n, amplitudes)


def apply_cost_phase(psi, d, dt, workspace=None):
    """
    Apply exp(-i dt H_C) to a state, in place.

    Parameters
    ----------
    psi : StateVector
        The state, which is modified.
    d : CostDiagonal
        The diagonal of H_C.
    dt : float
        The time step.
    workspace : Workspace, optional
        Buffers to reuse; the phases are cached in it. The default is None.

    Returns
    -------
    StateVector
        psi itself.
    """
    _check_dims(psi, d)
    if not np.isfinite(dt):
        raise InvalidParametersError(f"dt must be finite, not {dt}")
    if workspace is None:
        phase = _cost_phase(d, dt)
    else:
        phase = _check_workspace(workspace, psi.n).cost_phase(d, dt)
    psi.amplitudes *= phase
    return psi


def apply_mixer(psi, angle, workspace=None):
    """
    Apply exp(-i angle H_M), with H_M the sum of Pauli-X on every qubit, in place.

    The X terms commute, so the operator is the product over qubits of
    [[cos a, -i sin a], [-i sin a, cos a]].

    Parameters
    ----------
    psi : StateVector
        The state, which is modified.
    angle : float
        The rotation angle a, which equals dt * beta_k in a FALQON layer.
    workspace : Workspace, optional
        Buffers to reuse. The default is None.

    Returns
    -------
    StateVector
        psi itself.
    """
    if not np.isfinite(angle):
        raise NonFiniteError(f"Mixer angle must be finite, not {angle}")
    if workspace is None:
        scratch = np.empty(2**psi.n, dtype=np.complex128)
    else:
        scratch = _check_workspace(workspace, psi.n).buffer("scratch")
    cos, msin = np.cos(angle), -1j * np.sin(angle)
    half = 2 ** (psi.n - 1)
    for q in range(psi.n):
        view = psi.amplitudes.reshape(-1, 2, 2**q)
        low, high = view[:, 0, :], view[:, 1, :]
        from_high = scratch[:half].reshape(low.shape)
        from_low = scratch[half:].reshape(low.shape)
        np.multiply(high, msin, out=from_high)
        np.multiply(low, msin, out=from_low)
        low *= cos
        low += from_high
        high *= cos
        high += from_low
    return psi


def _apply_mixer_hamiltonian(vector, n, out):
    # out = H_M vector, i.e. out[y] = sum_i vector[y with bit i flipped]
    out[:] = 0.0
    for q in range(n):
        src = vector.reshape(-1, 2, 2**q)
        dst = out.reshape(-1, 2, 2**q)
        dst[:, 0, :] += src[:, 1, :]
        dst[:, 1, :] += src[:, 0, :]
    return out


def expect_cost(psi, d):
    """Return the expectation value of H_C, sum over x of |psi_x|^2 E(x)."""
    _check_dims(psi, d)
    return float(np.dot(psi.probabilities(), d.as_float()))


def _real_part(value, name):
    scale = max(1.0, abs(value))
    if abs(value.imag) > HERMITICITY_TOLERANCE * scale:
        raise NonFiniteError(f"Imaginary residue {value.imag} in {name}")
    return float(value.real)


def feedback_expectations(psi, d, workspace=None):
    """
    Evaluate the expectation values that drive the FALQON feedback law.

    With phi_C = H_C psi, phi_M = H_M psi and phi_MM = H_M phi_M, the expectations of
    A = i[H_M, H_C], B = 1/2 [[H_M, H_C], H_M] and C = [[H_M, H_C], H_C] are

    - <A> = -2 Im <phi_M, phi_C>
    - <B> = <phi_M, H_C phi_M> - Re <phi_MM, phi_C>
    - <C> = 2 Re <phi_M, H_C phi_C> - 2 <phi_C, H_M phi_C>

    and <H_C> = <psi, phi_C>. No operator matrix is formed.

    Parameters
    ----------
    psi : StateVector
        The state. It is not modified.
    d : CostDiagonal
        The diagonal of H_C.
    workspace : Workspace, optional
        Buffers to reuse. The default is None.

    Returns
    -------
    FeedbackExpectations
        The real expectation values.
    """
    _check_dims(psi, d)
    ws = _check_workspace(workspace, psi.n)
    energies = d.as_float()
    amplitudes = psi.amplitudes

    phi_c = np.multiply(amplitudes, energies, out=ws.buffer("phi_c"))
    phi_m = _apply_mixer_hamiltonian(amplitudes, psi.n, ws.buffer("phi_m"))
    scratch = ws.buffer("scratch")

    cost = _real_part(np.vdot(amplitudes, phi_c), "<H_C>")
    a_val = -2.0 * np.vdot(phi_m, phi_c).imag

    np.multiply(phi_m, energies, out=scratch)
    m_c_m = _real_part(np.vdot(phi_m, scratch), "<phi_M, H_C phi_M>")
    np.multiply(phi_c, energies, out=scratch)
    m_cc = np.vdot(phi_m, scratch).real
    _apply_mixer_hamiltonian(phi_c, psi.n, scratch)
    c_m_c = _real_part(np.vdot(phi_c, scratch), "<phi_C, H_M phi_C>")
    phi_mm = _apply_mixer_hamiltonian(phi_m, psi.n, scratch)
    mm_c = np.vdot(phi_mm, phi_c).real

    result = FeedbackExpectations(
        a_val=float(a_val),
        b_val=float(m_c_m - mm_c),
        c_val=float(2.0 * m_cc - 2.0 * c_m_c),
        cost=cost,
    )
    if not np.all(np.isfinite([result.a_val, result.b_val, result.c_val, cost])):
        raise NonFiniteError(f"Non-finite feedback expectations: {result}")
    return result


def dump_state(psi):
    """
    Format a state in the debug dump format.

    Every line contains the basis-state index and the real and imaginary part of its
    amplitude, with full (round-trip) precision.
    """
    lines = [
        f"{i} {float(a.real)!r} {float(a.imag)!r}" for i, a in enumerate(psi.amplitudes)
    ]
    return "\n".join(lines) + "\n"


def parse_state_dump(text):
    """Read a state from the debug dump format."""
    rows = [line.split() for line in text.splitlines() if line.strip()]
    n = int(np.log2(len(rows))) if rows else 0
    if len(rows) != 2**n or n < 1:
        raise DimensionMismatchError(f"A state dump needs 2**n lines, not {len(rows)}")
    amplitudes = np.empty(len(rows), dtype=np.complex128)
    for index, real, imag in rows:
        amplitudes[int(index)] = complex(float(real), float(imag))
    return StateVector(n, amplitudes)
