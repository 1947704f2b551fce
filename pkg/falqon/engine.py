import json
import logging
from dataclasses import dataclass

import numpy as np
import pandas as pd

from .statevector import (
    Workspace,
    apply_cost_phase,
    apply_mixer,
    expect_cost,
    feedback_expectations,
    uniform_state,
)
from .util import (
    FILE_VERSION,
    DivergedStateError,
    InvalidParametersError,
    MalformedInputError,
    NonFiniteError,
    _as_int,
    _format_repr,
    loads_json,
)

logger = logging.getLogger(__name__)

_ORDERS = {1: 1, 2: 2, "1": 1, "2": 2, "first": 1, "second": 2}


def parse_order(order):
    """Return 1 or 2 for a FALQON order given as 1, 2, "first" or "second"."""
    if isinstance(order, bool) or order not in _ORDERS:
        raise InvalidParametersError(f"Unknown FALQON order: {order!r}")
    return _ORDERS[order]


@dataclass(frozen=True)
class SafeguardParams:
    """
    Safeguards of the feedback law.

    Attributes
    ----------
    eps_b : float
        When |<B>| is below eps_b, the second-order law falls back to the first-order
        value -<A>. The default is 1e-9.
    beta_max : float
        Feedback parameters are clamped to [-beta_max, beta_max]. The default is 10.
    max_angle : float, optional
        When a second-order parameter would rotate the mixer by more than max_angle
        radians (|dt * beta| > max_angle), the law falls back to -<A> as well. The
        default is None, which applies the second-order law as is.
    """

    eps_b: float = 1e-9
    beta_max: float = 10.0
    max_angle: float = None

    def validate(self):
        if not self.eps_b >= 0:
            raise InvalidParametersError(f"eps_b must be non-negative, not {self.eps_b}")
        if not self.beta_max > 0:
            raise InvalidParametersError(f"beta_max must be positive, not {self.beta_max}")
        if self.max_angle is not None and not self.max_angle > 0:
            raise InvalidParametersError(
                f"max_angle must be positive, not {self.max_angle}"
            )


def _check_dt(dt):
    dt = float(dt)
    if not (np.isfinite(dt) and dt > 0):
        raise InvalidParametersError(f"dt must be positive and finite, not {dt}")
    return dt


def compute_beta(e, dt, order="second", safeguards=None, return_events=False):
    """
    Compute the feedback parameter of the next layer.

    The first-order law is beta = -<A>. The second-order law is
    beta = -(<A> + dt <C>) / (2 dt <B>), which falls back to -<A> when |<B>| is
    smaller than safeguards.eps_b, or when safeguards.max_angle is set and the
    mixer angle dt * beta exceeds it. The result of either law is clamped to
    [-beta_max, beta_max].

    Parameters
    ----------
    e : FeedbackExpectations
        The expectation values on the current state.
    dt : float
        The time step.
    order : int or str, optional
        1 or "first", 2 or "second". The default is "second".
    safeguards : SafeguardParams, optional
        The fallback and clamp settings. The default is None, which uses
        SafeguardParams().
    return_events : bool, optional
        Also return the number of safeguard activations (0, 1 or 2). The default is
        False.

    Returns
    -------
    float or (float, int)
        The feedback parameter, and the number of safeguard activations when
        return_events is True.
    """
    order = parse_order(order)
    dt = _check_dt(dt)
    if safeguards is None:
        safeguards = SafeguardParams()
    a, b, c = e.a_val, e.b_val, e.c_val
    if not np.all(np.isfinite([a, b, c])):
        raise NonFiniteError(f"Non-finite expectations: {e}")

    events = 0
    if order == 1:
        beta = -a
    elif abs(b) < safeguards.eps_b:
        beta = -a
        events += 1
    else:
        beta = -(a + dt * c) / (2.0 * dt * b)
        if safeguards.max_angle is not None and abs(dt * beta) > safeguards.max_angle:
            beta = -a
            events += 1
    if abs(beta) > safeguards.beta_max:
        beta = float(np.clip(beta, -safeguards.beta_max, safeguards.beta_max))
        events += 1
    beta = float(beta)
    if return_events:
        return beta, events
    return beta


class Schedule:
    """
    The transferable result of a FALQON run: a time step and feedback parameters.

    Parameters
    ----------
    dt : float
        The time step.
    betas : sequence of float
        The feedback parameters beta_1..beta_l.
    order : int or str
        The order of the feedback law that produced the betas.
    train_graph_id : str, optional
        The id of the graph the schedule was trained on. The default is None.
    n_train : int, optional
        The size of the training graph. The default is None.
    safeguard_events : int, optional
        The number of fallback and clamp activations during training. The default is 0.
    """

    def __init__(
        self, dt, betas, order, train_graph_id=None, n_train=None, safeguard_events=0
    ):
        self.dt = _check_dt(dt)
        self.betas = tuple(float(b) for b in betas)
        if not np.all(np.isfinite(self.betas)):
            raise NonFiniteError("Schedule contains non-finite feedback parameters")
        self.order = parse_order(order)
        self.train_graph_id = train_graph_id
        self.n_train = None if n_train is None else int(n_train)
        self.safeguard_events = int(safeguard_events)

    def __repr__(self):
        props = {
            "dt": self.dt,
            "layers": self.layers,
            "order": self.order,
            "train_graph_id": self.train_graph_id,
        }
        return _format_repr(self, props)

    def __eq__(self, other):
        if not isinstance(other, Schedule):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    @property
    def layers(self):
        return len(self.betas)

    def to_dict(self):
        return {
            "version": FILE_VERSION,
            "dt": self.dt,
            "order": self.order,
            "layers": self.layers,
            "betas": list(self.betas),
            "train_graph_id": self.train_graph_id,
            "n_train": self.n_train,
            "safeguard_events": self.safeguard_events,
        }


def serialize_schedule(s):
    return json.dumps(s.to_dict(), indent=2) + "\n"


def parse_schedule(text, source="<text>"):
    """Parse a Schedule from the JSON schedule-file format."""
    data = loads_json(text, source)
    if not isinstance(data, dict):
        raise MalformedInputError(f"Schedule file {source} must contain a JSON object")
    keys = ["version", "dt", "order", "layers", "betas", "train_graph_id", "n_train"]
    for key in keys + ["safeguard_events"]:
        if key not in data:
            raise MalformedInputError(f"Missing key '{key}' in {source}", position=key)
    if data["version"] != FILE_VERSION:
        raise MalformedInputError(f"Unsupported version {data['version']} in {source}")
    n_train = _as_int(data["n_train"], "n_train", source)
    train_graph_id = data["train_graph_id"]
    if train_graph_id is not None and not isinstance(train_graph_id, str):
        raise MalformedInputError(
            f"train_graph_id must be a string in {source}", position="train_graph_id"
        )
    betas = data["betas"]
    if not isinstance(betas, list) or len(betas) != data["layers"]:
        raise MalformedInputError(f"betas does not have 'layers' entries in {source}")
    try:
        return Schedule(
            data["dt"],
            betas,
            data["order"],
            train_graph_id=train_graph_id,
            n_train=n_train,
            safeguard_events=data["safeguard_events"],
        )
    except (TypeError, ValueError, FloatingPointError) as e:
        raise MalformedInputError(f"Invalid schedule in {source}: {e}")


class Trajectory:
    """
    The expectation value of H_C before the first layer and after every layer.

    Parameters
    ----------
    energies : sequence of float
        The l + 1 energies.
    final_ratio : float, optional
        The final approximation ratio, when a baseline was supplied. The default is
        None.
    """

    def __init__(self, energies, final_ratio=None):
        self.energies = np.asarray(energies, dtype=np.float64)
        if not np.all(np.isfinite(self.energies)):
            raise NonFiniteError("Trajectory contains non-finite energies")
        self.final_ratio = final_ratio

    def __repr__(self):
        props = {"layers": self.layers, "final_energy": self.final_energy}
        return _format_repr(self, props)

    @property
    def layers(self):
        return len(self.energies) - 1

    @property
    def final_energy(self):
        return float(self.energies[-1])

    def max_rise(self):
        """The largest energy increase between two consecutive layers, or 0."""
        return float(np.max(np.diff(self.energies), initial=0.0))

    def with_baseline(self, baseline):
        """Fill final_ratio using the ground energy of a BaselineRecord."""
        self.final_ratio = approximation_ratio(self.final_energy, baseline.ground_energy)
        return self

    def to_dataframe(self, betas=None, ground_energy=None):
        """
        Tabulate the trajectory, one row per layer (layer 0 is the initial state).

        Parameters
        ----------
        betas : sequence of float, optional
            The feedback parameter that produced each layer. The default is None.
        ground_energy : float, optional
            When given, a column with the approximation ratio is added. The default is
            None.

        Returns
        -------
        pd.DataFrame
            Columns layer, beta, energy and, optionally, ratio.
        """
        df = pd.DataFrame({"layer": np.arange(len(self.energies))})
        df["beta"] = np.nan if betas is None else np.concatenate([[np.nan], betas])
        df["energy"] = self.energies
        if ground_energy is not None:
            df["ratio"] = [approximation_ratio(x, ground_energy) for x in self.energies]
        return df


def _check_norm(psi, layer, tolerance):
    drift = abs(psi.norm() - 1.0)
    if not drift <= tolerance:
        raise DivergedStateError(
            f"State norm drifted by {drift:.3g} after layer {layer}"
        )


def _apply_layer(psi, d, dt, beta, workspace):
    apply_cost_phase(psi, d, dt, workspace=workspace)
    apply_mixer(psi, dt * beta, workspace=workspace)


def run_feedback(
    d,
    dt,
    layers,
    order="second",
    safeguards=None,
    workspace=None,
    norm_tolerance=1e-6,
):
    """
    Run FALQON from the uniform state and record the feedback parameters.

    In every layer k the expectations are evaluated on the current state psi_k, beta_k
    follows from the feedback law and psi_k+1 = exp(-i dt beta_k H_M) exp(-i dt H_C)
    psi_k.

    Parameters
    ----------
    d : CostDiagonal
        The diagonal of the cost Hamiltonian.
    dt : float
        The time step.
    layers : int
        The number of layers l.
    order : int or str, optional
        The order of the feedback law. The default is "second".
    safeguards : SafeguardParams, optional
        The fallback and clamp settings. The default is None.
    workspace : Workspace, optional
        Buffers to reuse. The default is None.
    norm_tolerance : float, optional
        The run is aborted when the norm of the state drifts further from 1. The
        default is 1e-6.

    Returns
    -------
    schedule : Schedule
        The time step and the l feedback parameters.
    trajectory : Trajectory
        The l + 1 energies.
    """
    dt = _check_dt(dt)
    order = parse_order(order)
    if layers < 0:
        raise InvalidParametersError(f"layers must be non-negative, not {layers}")
    if safeguards is None:
        safeguards = SafeguardParams()
    safeguards.validate()
    if workspace is None:
        workspace = Workspace(d.n)

    psi = uniform_state(d.n, max_qubits=d.n)
    energies = [expect_cost(psi, d)]
    betas = []
    events = 0
    for k in range(layers):
        e = feedback_expectations(psi, d, workspace=workspace)
        beta, fired = compute_beta(e, dt, order, safeguards, return_events=True)
        if fired:
            logger.debug(f"Safeguard fired in layer {k + 1} (a={e.a_val}, b={e.b_val})")
        events += fired
        betas.append(beta)
        _apply_layer(psi, d, dt, beta, workspace)
        _check_norm(psi, k + 1, norm_tolerance)
        energies.append(expect_cost(psi, d))
        logger.debug(f"Layer {k + 1}: beta={beta}, energy={energies[-1]}")

    schedule = Schedule(
        dt,
        betas,
        order,
        train_graph_id=d.graph_id,
        n_train=d.n,
        safeguard_events=events,
    )
    return schedule, Trajectory(energies)


def replay_schedule(
    d_target, s, workspace=None, norm_tolerance=1e-6, return_state=False
):
    """
    Apply a stored schedule to the cost Hamiltonian of (another) graph.

    The unitary sequence equals that of run_feedback, with the feedback parameters taken
    from the schedule instead of computed from expectations. Replaying a schedule on
    its own training diagonal reproduces the native trajectory exactly.

    Parameters
    ----------
    d_target : CostDiagonal
        The diagonal of the target cost Hamiltonian. Its size may differ from the
        training size.
    s : Schedule
        The schedule to replay.
    workspace : Workspace, optional
        Buffers to reuse. The default is None.
    norm_tolerance : float, optional
        The replay is aborted when the norm drifts further from 1. The default is 1e-6.
    return_state : bool, optional
        Also return the final state. The default is False.

    Returns
    -------
    Trajectory
        The l + 1 energies of the target.
    StateVector
        The final state, only when return_state is True.
    """
    if workspace is None:
        workspace = Workspace(d_target.n)
    psi = uniform_state(d_target.n, max_qubits=d_target.n)
    energies = [expect_cost(psi, d_target)]
    for k, beta in enumerate(s.betas):
        _apply_layer(psi, d_target, s.dt, beta, workspace)
        _check_norm(psi, k + 1, norm_tolerance)
        energies.append(expect_cost(psi, d_target))
    if return_state:
        return Trajectory(energies), psi
    return Trajectory(energies)


def approximation_ratio(energy, ground_energy):
    """
    Divide an energy by the (negative) ground energy.

    Raises
    ------
    InvalidParametersError
        If ground_energy is zero or positive.
    """
    if not ground_energy < 0:
        raise InvalidParametersError(
            f"ground_energy must be negative, not {ground_energy}"
        )
    return float(energy) / float(ground_energy)
