import json
import logging
from dataclasses import asdict, dataclass, field
from functools import partial

import numpy as np
import pandas as pd
from tqdm import tqdm

from .engine import (
    SafeguardParams,
    Schedule,
    approximation_ratio,
    parse_order,
    replay_schedule,
    run_feedback,
)
from .graph import build_cost_diagonal, generate_regular
from .statevector import Workspace
from .util import (
    BaselineMismatchError,
    DegenerateInputError,
    FILE_VERSION,
    DivergedStateError,
    InvalidParametersError,
    MalformedInputError,
    NonFiniteError,
    _format_repr,
    loads_json,
    parallel_map,
)

logger = logging.getLogger(__name__)

# tags that separate the random streams derived from one master seed
PURPOSES = {"graph": 1, "anneal": 2}

# largest mixer angle of a second-order step in the scan protocol, in radians
TRUST_ANGLE = 0.2

STOP_REASONS = ("grid-exhausted", "diverged", "plateau")


def derive_seed(master_seed, size, index, purpose="graph"):
    """
    Derive a 64-bit seed from (master_seed, size, index, purpose).

    The tuple is hashed by numpy's SeedSequence, so ensembles are reproducible without
    storing the seed of every instance.
    """
    if purpose not in PURPOSES:
        raise InvalidParametersError(f"Unknown seed purpose: {purpose}")
    entropy = [int(master_seed), int(size), int(index), PURPOSES[purpose]]
    return int(np.random.SeedSequence(entropy).generate_state(1, dtype=np.uint64)[0])


@dataclass(frozen=True)
class EarlyStopParams:
    """
    Early stopping of an ascending dt scan.

    A grid point fails when its run diverged, meaning the energy rose by more than
    rise_tolerance times the absolute ground energy between two layers, or when its
    final ratio is below max(floor, best_so_far - drop). The ratio test only applies
    once best_so_far has reached floor. The scan stops after `patience` consecutive
    failing points.
    """

    patience: int = 5
    drop: float = 0.2
    floor: float = 0.5
    rise_tolerance: float = 1e-6
    enabled: bool = True


@dataclass(frozen=True)
class ExperimentConfig:
    """
    Settings of the dt-scan and transfer experiment.

    The defaults are a desk-scale version of the protocol; ``full_scale`` returns the
    full protocol (n up to 24, 20 instances, a dt resolution of 0.001).
    """

    sizes: tuple = (6, 8, 10, 12, 14, 16)
    train_sizes: tuple = (6, 8, 10, 12)
    instances_per_size: int = 10
    layers: int = 16
    dt_min: float = 0.1
    dt_max: float = 1.0
    dt_step: float = 0.005
    order: int = 2
    master_seed: int = 2025
    degree: int = 3
    early_stop: EarlyStopParams = field(default_factory=EarlyStopParams)
    safeguards: SafeguardParams = field(
        default_factory=lambda: SafeguardParams(max_angle=TRUST_ANGLE)
    )

    @classmethod
    def full_scale(cls, **kwargs):
        settings = dict(
            sizes=tuple(range(6, 25, 2)),
            train_sizes=tuple(range(6, 19, 2)),
            instances_per_size=20,
            dt_step=0.001,
        )
        settings.update(kwargs)
        return cls(**settings)

    def validate(self):
        if not self.sizes:
            raise InvalidParametersError("sizes must not be empty")
        for n in self.sizes:
            if n < 2 or (n * self.degree) % 2:
                raise InvalidParametersError(f"Invalid graph size {n} for degree {self.degree}")
        if not set(self.train_sizes) <= set(self.sizes):
            raise InvalidParametersError("train_sizes must be a subset of sizes")
        if not self.dt_min > 0:
            raise InvalidParametersError(f"dt_min must be positive, not {self.dt_min}")
        if not self.dt_min <= self.dt_max:
            raise InvalidParametersError("dt_min must not exceed dt_max")
        if not self.dt_step > 0:
            raise InvalidParametersError(f"dt_step must be positive, not {self.dt_step}")
        if self.layers < 1:
            raise InvalidParametersError(f"layers must be at least 1, not {self.layers}")
        if self.instances_per_size < 1:
            raise InvalidParametersError("instances_per_size must be at least 1")
        if self.early_stop.patience < 1:
            raise InvalidParametersError("early_stop.patience must be at least 1")
        if not self.early_stop.rise_tolerance >= 0:
            raise InvalidParametersError("early_stop.rise_tolerance must be non-negative")
        parse_order(self.order)
        self.safeguards.validate()

    def dt_grid(self):
        """The ascending dt values dt_min, dt_min + dt_step, ..., up to dt_max."""
        count = int(np.floor((self.dt_max - self.dt_min) / self.dt_step + 1e-9)) + 1
        if count < 1:
            return np.array([])
        return np.round(self.dt_min + self.dt_step * np.arange(count), 10)

    def to_dict(self):
        d = asdict(self)
        d["sizes"] = list(self.sizes)
        d["train_sizes"] = list(self.train_sizes)
        return d

    def scan_fingerprint(self):
        """The settings that determine the outcome of a dt scan of one graph."""
        return {
            "layers": self.layers,
            "dt_min": self.dt_min,
            "dt_max": self.dt_max,
            "dt_step": self.dt_step,
            "order": parse_order(self.order),
            "early_stop": asdict(self.early_stop),
            "safeguards": asdict(self.safeguards),
        }


def generate_ensemble(sizes, instances, degree=3, master_seed=0, connected=True):
    """
    Generate `instances` random regular graphs for every size.

    Returns
    -------
    dict
        A dictionary mapping (n, index) to a Graph.
    """
    graphs = {}
    for n in sizes:
        for index in range(instances):
            seed = derive_seed(master_seed, n, index, "graph")
            graphs[(n, index)] = generate_regular(n, degree, seed, connected=connected)
    return graphs


@dataclass
class Evaluation:
    """The outcome of one native run inside a dt scan."""

    ratio: float
    final_energy: float = np.nan
    schedule: Schedule = None
    descending: bool = True


class FeedbackEvaluator:
    """
    Evaluate the final approximation ratio of a native FALQON run at a given dt.

    Calling the evaluator with (diagonal, dt) returns an Evaluation. The run counts as
    descending when its energy never rises by more than rise_tolerance times the
    absolute ground energy between two layers. The workspace is reused between calls.
    """

    def __init__(
        self, baseline, layers=16, order=2, safeguards=None, rise_tolerance=1e-6
    ):
        self.baseline = baseline
        self.layers = layers
        self.order = order
        self.safeguards = safeguards
        self.rise_tolerance = rise_tolerance
        self._workspace = None

    def __call__(self, d, dt):
        if self._workspace is None or self._workspace.n != d.n:
            self._workspace = Workspace(d.n)
        schedule, trajectory = run_feedback(
            d,
            dt,
            self.layers,
            order=self.order,
            safeguards=self.safeguards,
            workspace=self._workspace,
        )
        trajectory.with_baseline(self.baseline)
        tolerance = self.rise_tolerance * abs(self.baseline.ground_energy)
        return Evaluation(
            trajectory.final_ratio,
            trajectory.final_energy,
            schedule,
            trajectory.max_rise() <= tolerance,
        )


class ScanResult:
    """
    The result of a dt scan of one graph.

    Attributes
    ----------
    graph_id : str
        The id of the scanned graph.
    n : int
        The size of the graph.
    best_dt : float
        The smallest dt attaining the best final ratio.
    best_ratio : float
        The best final ratio.
    best_schedule : Schedule
        The schedule produced at best_dt.
    curve : list of (float, float)
        The (dt, final_ratio) pairs that were evaluated, ascending in dt.
    energies : list of float
        The final energy at every evaluated dt.
    stop_reason : str
        "grid-exhausted", "diverged" or "plateau".
    descending : list of bool
        Whether the run at every evaluated dt descended monotonically.
    """

    def __init__(
        self,
        graph_id,
        n,
        best_dt,
        best_ratio,
        best_schedule,
        curve,
        energies,
        stop_reason,
        descending=None,
    ):
        self.graph_id = graph_id
        self.n = n
        self.best_dt = best_dt
        self.best_ratio = best_ratio
        self.best_schedule = best_schedule
        self.curve = curve
        self.energies = energies
        self.stop_reason = stop_reason
        if descending is None:
            descending = [True] * len(curve)
        self.descending = [bool(x) for x in descending]

    def __repr__(self):
        props = {
            "graph_id": self.graph_id,
            "best_dt": self.best_dt,
            "best_ratio": self.best_ratio,
            "stop_reason": self.stop_reason,
        }
        return _format_repr(self, props)

    def to_dataframe(self):
        """The evaluated curve, with columns graph_id, dt, final_ratio, final_energy."""
        return pd.DataFrame(
            {
                "graph_id": self.graph_id,
                "dt": [dt for dt, _ in self.curve],
                "final_ratio": [ratio for _, ratio in self.curve],
                "final_energy": self.energies,
            },
            columns=["graph_id", "dt", "final_ratio", "final_energy"],
        )

    def to_dict(self):
        events = None
        if self.best_schedule is not None:
            events = self.best_schedule.safeguard_events
        return {
            "graph_id": self.graph_id,
            "n": self.n,
            "best_dt": self.best_dt,
            "best_ratio": self.best_ratio,
            "stop_reason": self.stop_reason,
            "points": len(self.curve),
            "safeguard_events": events,
        }


def serialize_scan(result, cfg):
    """
    Serialize the provenance of a scan: the graph id, the scan settings, the stop
    reason and the descent flag of every evaluated point.
    """
    data = {
        "version": FILE_VERSION,
        "graph_id": result.graph_id,
        "n": result.n,
        "config": cfg.scan_fingerprint(),
        "stop_reason": result.stop_reason,
        "descending": list(result.descending),
    }
    return json.dumps(data, indent=2) + "\n"


def parse_scan(text, source="<text>"):
    """Parse the scan provenance written by serialize_scan into a dictionary."""
    data = loads_json(text, source)
    if not isinstance(data, dict):
        raise MalformedInputError(f"Scan file {source} must contain a JSON object")
    for key in ["version", "graph_id", "n", "config", "stop_reason", "descending"]:
        if key not in data:
            raise MalformedInputError(f"Missing key '{key}' in {source}", position=key)
    if data["version"] != FILE_VERSION:
        raise MalformedInputError(f"Unsupported version {data['version']} in {source}")
    if data["stop_reason"] not in STOP_REASONS:
        raise MalformedInputError(
            f"Unknown stop reason {data['stop_reason']!r} in {source}",
            position="stop_reason",
        )
    descending = data["descending"]
    if not isinstance(descending, list) or not all(isinstance(x, bool) for x in descending):
        raise MalformedInputError(
            f"descending must be a list of booleans in {source}", position="descending"
        )
    return data


class _StopRule:
    def __init__(self, early_stop):
        self.early_stop = early_stop
        self.best = -np.inf
        self.failed = 0
        self.reason = None

    def update(self, ratio, descending=True):
        self.best = max(self.best, ratio)
        if not self.early_stop.enabled:
            return False
        es = self.early_stop
        too_low = self.best >= es.floor and ratio < max(es.floor, self.best - es.drop)
        if not descending or too_low:
            self.failed += 1
            self.reason = "plateau" if descending else "diverged"
        else:
            self.failed = 0
        return self.failed >= es.patience


def scan_result_from_curve(graph_id, n, curve, energies, schedule, cfg, descending=None):
    """
    Rebuild a ScanResult from a stored curve and best schedule.

    The stop reason follows from replaying the early-stop rule over the curve and the
    descent flags: the reason of the rule when it fires at the last point,
    "grid-exhausted" when the curve covers the whole grid, and "diverged" otherwise.
    """
    if len(curve) == 0:
        raise DegenerateInputError(f"Empty scan curve for graph {graph_id}")
    if descending is None:
        descending = [True] * len(curve)
    if len(descending) != len(curve):
        raise MalformedInputError(
            f"Scan of {graph_id} has {len(descending)} descent flags for "
            f"{len(curve)} points"
        )
    stop_rule = _StopRule(cfg.early_stop)
    stop_reason = None
    for k, ((_, ratio), flag) in enumerate(zip(curve, descending)):
        if stop_rule.update(ratio, flag):
            if k != len(curve) - 1:
                raise MalformedInputError(f"Scan curve of {graph_id} continues after a stop")
            stop_reason = stop_rule.reason
    if stop_reason is None:
        stop_reason = "grid-exhausted" if len(curve) == len(cfg.dt_grid()) else "diverged"
    ratios = np.array([ratio for _, ratio in curve])
    k = int(np.argmax(ratios))
    best_dt, best_ratio = float(curve[k][0]), float(ratios[k])
    if schedule is not None and schedule.dt != best_dt:
        raise MalformedInputError(
            f"Schedule of {graph_id} has dt={schedule.dt}, the curve peaks at {best_dt}"
        )
    return ScanResult(
        graph_id,
        n,
        best_dt,
        best_ratio,
        schedule,
        list(curve),
        list(energies),
        stop_reason,
        descending,
    )


def _unpack_evaluation(result):
    if isinstance(result, Evaluation):
        return result
    if isinstance(result, tuple):
        return Evaluation(*result)
    return Evaluation(result)


def scan_dt(d, baseline, cfg, evaluator=None):
    """
    Scan dt over an ascending grid and keep the best final approximation ratio.

    The scan stops early when cfg.early_stop fires (stop reason "diverged" when the
    last failing run lost its monotonic descent, "plateau" otherwise), or when an
    evaluation raises a divergence error after at least one successful point (stop
    reason "diverged"). Among equal best ratios the smallest dt wins.

    Parameters
    ----------
    d : CostDiagonal
        The diagonal of the graph to scan.
    baseline : BaselineRecord
        The baseline of the same graph.
    cfg : ExperimentConfig
        Supplies the grid, layers, order, safeguards and early stopping.
    evaluator : callable, optional
        A function (diagonal, dt) returning a ratio, a tuple (ratio, final_energy,
        schedule[, descending]) or an Evaluation. The default is None, which runs
        FALQON with a FeedbackEvaluator.

    Returns
    -------
    ScanResult
        The best dt, ratio and schedule, and the evaluated curve.
    """
    if d.graph_id is not None and baseline.graph_id != d.graph_id:
        raise BaselineMismatchError(
            f"Baseline of graph {baseline.graph_id} used with graph {d.graph_id}"
        )
    grid = cfg.dt_grid()
    if len(grid) == 0:
        raise InvalidParametersError("The dt grid is empty")
    if evaluator is None:
        evaluator = FeedbackEvaluator(
            baseline,
            cfg.layers,
            cfg.order,
            cfg.safeguards,
            rise_tolerance=cfg.early_stop.rise_tolerance,
        )
    stop_rule = _StopRule(cfg.early_stop)

    curve, energies, descending = [], [], []
    best_dt, best_ratio, best_schedule = None, -np.inf, None
    stop_reason = "grid-exhausted"
    for dt in grid:
        dt = float(dt)
        try:
            e = _unpack_evaluation(evaluator(d, dt))
            ratio = float(e.ratio)
            if not np.isfinite(ratio):
                raise NonFiniteError(f"Non-finite ratio at dt={dt}")
        except (DivergedStateError, NonFiniteError) as err:
            if not curve:
                raise
            logger.info(f"Scan of graph {d.graph_id} diverged at dt={dt}: {err}")
            stop_reason = "diverged"
            break
        curve.append((dt, ratio))
        energies.append(float(e.final_energy))
        descending.append(bool(e.descending))
        if ratio > best_ratio:
            best_dt, best_ratio, best_schedule = dt, ratio, e.schedule
        if stop_rule.update(ratio, e.descending):
            stop_reason = stop_rule.reason
            break
    logger.debug(
        f"Scan of graph {d.graph_id}: best dt={best_dt}, ratio={best_ratio}, "
        f"{len(curve)} points, {stop_reason}"
    )
    return ScanResult(
        d.graph_id,
        d.n,
        best_dt,
        best_ratio,
        best_schedule,
        curve,
        energies,
        stop_reason,
        descending,
    )


def _scan_graph(item, cfg, max_qubits=None):
    g, baseline = item
    d = build_cost_diagonal(g, max_qubits=max_qubits)
    return scan_dt(d, baseline, cfg)


def scan_ensemble(items, cfg, jobs=1, silent=False, max_qubits=None):
    """
    Scan dt for a list of (Graph, BaselineRecord) pairs, graphs in parallel.

    Returns
    -------
    list of ScanResult
        In the order of items.
    """
    func = partial(_scan_graph, cfg=cfg, max_qubits=max_qubits)
    return parallel_map(func, items, jobs=jobs, silent=silent, desc="Scanning dt")


def cross_evaluate(schedules, targets, silent=True):
    """
    Replay every schedule on every target and compute the final approximation ratio.

    Parameters
    ----------
    schedules : list of Schedule
        The schedules to transfer.
    targets : list of (CostDiagonal, BaselineRecord)
        The target Hamiltonians and their baselines. Every target must be at least as
        large as the training graph of every schedule.
    silent : bool, optional
        Do not show a progress bar. The default is True.

    Returns
    -------
    list of dict
        One record per (schedule, target) pair, schedule-major, with keys n_train,
        n_target, train_graph_id, target_graph_id, ratio and final_energy.
    """
    for d, baseline in targets:
        if d.graph_id is not None and baseline.graph_id != d.graph_id:
            raise BaselineMismatchError(
                f"Baseline of graph {baseline.graph_id} used with graph {d.graph_id}"
            )
        for s in schedules:
            if s.n_train is not None and s.n_train > d.n:
                raise InvalidParametersError(
                    f"Schedule trained on n={s.n_train} cannot target n={d.n}"
                )

    records = [[None] * len(targets) for _ in schedules]
    for t, (d, baseline) in enumerate(tqdm(targets, disable=silent, desc="Transferring")):
        workspace = Workspace(d.n)
        for k, s in enumerate(schedules):
            trajectory = replay_schedule(d, s, workspace=workspace)
            records[k][t] = {
                "n_train": s.n_train,
                "n_target": d.n,
                "train_graph_id": s.train_graph_id,
                "target_graph_id": d.graph_id,
                "ratio": approximation_ratio(
                    trajectory.final_energy, baseline.ground_energy
                ),
                "final_energy": trajectory.final_energy,
            }
    return [record for row in records for record in row]


def _transfer_to_target(item, schedules, max_qubits=None):
    g, baseline = item
    d = build_cost_diagonal(g, max_qubits=max_qubits)
    return cross_evaluate(schedules, [(d, baseline)])


def transfer_ensemble(schedules, targets, jobs=1, silent=False, max_qubits=None):
    """
    Cross-evaluate schedules on (Graph, BaselineRecord) targets, targets in parallel.

    Returns
    -------
    list of dict
        The records of cross_evaluate, schedule-major.
    """
    func = partial(_transfer_to_target, schedules=schedules, max_qubits=max_qubits)
    per_target = parallel_map(func, targets, jobs=jobs, silent=silent, desc="Transferring")
    return [per_target[t][k] for k in range(len(schedules)) for t in range(len(targets))]


@dataclass(frozen=True)
class TransferCell:
    """The mean and population standard deviation of the ratios of one size pair."""

    n_train: int
    n_target: int
    mean_ratio: float
    std_ratio: float
    pair_count: int

    def to_dict(self):
        return asdict(self)


def aggregate_matrix(records):
    """
    Aggregate transfer records per (n_train, n_target) pair.

    Parameters
    ----------
    records : list of dict
        Records as returned by cross_evaluate.

    Returns
    -------
    list of TransferCell
        One cell per size pair, sorted by (n_train, n_target), with the arithmetic mean
        and the population (ddof=0) standard deviation of the ratios.
    """
    if len(records) == 0:
        raise DegenerateInputError("No transfer records to aggregate")
    df = pd.DataFrame(records)
    grouped = df.groupby(["n_train", "n_target"], sort=True)["ratio"]
    stats = pd.DataFrame(
        {
            "mean_ratio": grouped.mean(),
            "std_ratio": grouped.std(ddof=0),
            "pair_count": grouped.count(),
        }
    )
    return [
        TransferCell(
            int(n_train),
            int(n_target),
            float(row.mean_ratio),
            float(row.std_ratio),
            int(row.pair_count),
        )
        for (n_train, n_target), row in stats.iterrows()
    ]


def cells_to_dataframe(cells):
    columns = ["n_train", "n_target", "mean_ratio", "std_ratio", "pair_count"]
    return pd.DataFrame([cell.to_dict() for cell in cells], columns=columns)


@dataclass(frozen=True)
class PowerLawFit:
    """A fit of dt = coefficient * n ** exponent."""

    coefficient: float
    exponent: float
    r_squared: float

    def predict(self, n):
        return self.coefficient * np.asarray(n, dtype=float) ** self.exponent

    def to_dict(self):
        return asdict(self)


def fit_power_law(points):
    """
    Fit a power law to (n, dt) points with least squares on (ln n, ln dt).

    Parameters
    ----------
    points : list of (int, float)
        The graph sizes and (mean) optimal time steps.

    Returns
    -------
    PowerLawFit
        coefficient = exp(intercept), exponent = slope and the coefficient of
        determination of the log-log fit.

    Raises
    ------
    DegenerateInputError
        If there are fewer than 2 distinct sizes, or a dt or n that is not positive.
    """
    points = list(points)
    if len(points) < 2:
        raise DegenerateInputError(f"At least 2 points are needed, not {len(points)}")
    n = np.array([p[0] for p in points], dtype=float)
    dt = np.array([p[1] for p in points], dtype=float)
    if not (np.all(np.isfinite(dt)) and np.all(dt > 0) and np.all(n > 0)):
        raise DegenerateInputError("All n and dt must be positive and finite")
    if len(np.unique(n)) < 2:
        raise DegenerateInputError("At least 2 distinct sizes are needed")
    x, y = np.log(n), np.log(dt)
    slope, intercept = np.polyfit(x, y, 1)
    ss_res = np.sum((y - (intercept + slope * x)) ** 2)
    ss_tot = np.sum((y - y.mean()) ** 2)
    r_squared = 1.0 if ss_tot == 0 else float(np.clip(1.0 - ss_res / ss_tot, 0.0, 1.0))
    return PowerLawFit(float(np.exp(intercept)), float(slope), r_squared)


def serialize_fit(fit):
    return json.dumps(fit.to_dict(), indent=2) + "\n"


def parse_fit(text, source="<text>"):
    data = loads_json(text, source)
    try:
        return PowerLawFit(
            float(data["coefficient"]), float(data["exponent"]), float(data["r_squared"])
        )
    except (KeyError, TypeError, ValueError) as e:
        raise MalformedInputError(f"Invalid fit in {source}: {e}")


def summarize_scans(results):
    """
    Summarize scan results per graph size.

    Returns
    -------
    pd.DataFrame
        One row per n with the instance count, mean and population standard deviation
        of best_dt and best_ratio, and the total number of safeguard events.
    """
    if len(results) == 0:
        raise DegenerateInputError("No scan results to summarize")
    df = pd.DataFrame([result.to_dict() for result in results])
    grouped = df.groupby("n", sort=True)
    summary = pd.DataFrame(
        {
            "instances": grouped["graph_id"].count(),
            "mean_dt": grouped["best_dt"].mean(),
            "std_dt": grouped["best_dt"].std(ddof=0),
            "mean_ratio": grouped["best_ratio"].mean(),
            "std_ratio": grouped["best_ratio"].std(ddof=0),
            "safeguard_events": grouped["safeguard_events"].sum(),
        }
    )
    return summary.reset_index()


def fit_summary(summary):
    """Fit a power law to the mean best dt per size of a scan summary."""
    return fit_power_law(zip(summary["n"], summary["mean_dt"]))


def dt_scaling_table(summary, fit):
    """The mean best dt and the fitted dt per size."""
    df = summary[["n", "mean_dt"]].copy()
    df["fitted_dt"] = fit.predict(df["n"])
    return df.reset_index(drop=True)


def native_vs_transfer(cells, summary):
    """
    Compare transferred ratios with the native best ratio of the target size.

    Returns
    -------
    pd.DataFrame
        Columns n_train, n_target, transfer_mean_ratio, native_mean_ratio and
        advantage (transferred minus native).
    """
    df = cells_to_dataframe(cells).rename(columns={"mean_ratio": "transfer_mean_ratio"})
    native = summary[["n", "mean_ratio"]].rename(
        columns={"n": "n_target", "mean_ratio": "native_mean_ratio"}
    )
    df = df[["n_train", "n_target", "transfer_mean_ratio"]].merge(
        native, on="n_target", how="left"
    )
    df["advantage"] = df["transfer_mean_ratio"] - df["native_mean_ratio"]
    return df


def compare_orders(d, baseline, dts, layers=16, safeguards=None):
    """
    Evaluate first- and second-order FALQON on the same graph over a list of dt.

    No early stopping is applied, so the table shows where each order becomes
    unstable.

    Returns
    -------
    pd.DataFrame
        Columns order, graph_id, dt, final_ratio, final_energy and safeguard_events.
    """
    rows = []
    workspace = Workspace(d.n)
    for order in (1, 2):
        for dt in dts:
            schedule, trajectory = run_feedback(
                d, dt, layers, order=order, safeguards=safeguards, workspace=workspace
            )
            rows.append(
                {
                    "order": order,
                    "graph_id": d.graph_id,
                    "dt": float(dt),
                    "final_ratio": approximation_ratio(
                        trajectory.final_energy, baseline.ground_energy
                    ),
                    "final_energy": trajectory.final_energy,
                    "safeguard_events": schedule.safeguard_events,
                }
            )
    return pd.DataFrame(rows)


def schedules_from_results(results, train_sizes=None):
    """The best schedules of scan results, optionally limited to some sizes."""
    schedules = []
    for result in results:
        if train_sizes is not None and result.n not in train_sizes:
            continue
        if not isinstance(result.best_schedule, Schedule):
            raise DegenerateInputError(f"Scan of {result.graph_id} has no schedule")
        schedules.append(result.best_schedule)
    return schedules
