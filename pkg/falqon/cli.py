"""
Command-line pipeline for FALQON dt scans and schedule transfer.

Usage
-----

falqon generate --sizes 6 8 10 --instances 10 --seed 7 --out run1
falqon baseline --out run1
falqon scan --out run1 --jobs 8
falqon transfer --out run1 --train-sizes 6 8
falqon fit --out run1
falqon report --out run1

or all stages at once with ``falqon run``. Every stage reads the files written by
the previous one from the output directory.
"""

import argparse
import glob
import json
import logging
import os
import sys
import time
from functools import partial

import numpy as np
import pandas as pd

from . import experiment
from .engine import (
    SafeguardParams,
    parse_schedule,
    replay_schedule,
    run_feedback,
    serialize_schedule,
)
from .graph import (
    AnnealParams,
    anneal_max_cut,
    brute_force_max_cut,
    build_cost_diagonal,
    parse_baseline,
    parse_graph,
    serialize_baseline,
    serialize_graph,
)
from .statevector import dump_state
from .util import (
    BaselineMismatchError,
    MalformedInputError,
    parallel_map,
    read_artifacts,
    read_json,
    write_csv,
    write_json,
    write_text,
)
from .version import __version__

logger = logging.getLogger(__name__)

# column headers of the CSV artifacts
CSV_COLUMNS = {
    "curve": ["graph_id", "dt", "final_ratio", "final_energy"],
    "scan_results": [
        "graph_id",
        "n",
        "best_dt",
        "best_ratio",
        "stop_reason",
        "points",
        "safeguard_events",
    ],
    "transfer_pairs": ["n_train", "n_target", "train_graph_id", "target_graph_id", "ratio"],
    "transfer_matrix": ["n_train", "n_target", "mean_ratio", "std_ratio", "pair_count"],
    "native_vs_transfer": [
        "n_train",
        "n_target",
        "transfer_mean_ratio",
        "native_mean_ratio",
        "advantage",
    ],
    "dt_scaling": ["n", "mean_dt", "fitted_dt"],
    "trajectory": ["layer", "beta", "energy", "ratio"],
    "order_comparison": [
        "order",
        "graph_id",
        "dt",
        "final_ratio",
        "final_energy",
        "safeguard_events",
    ],
}

# the largest qubit count accepted with --force
FORCED_MAX_QUBITS = 40


def _path(out_dir, *parts):
    return os.path.join(out_dir, *parts)


def _stem(fname):
    base = os.path.basename(fname)
    for suffix in [".baseline.json", ".schedule.json", ".scan.json", ".json", ".csv"]:
        if base.endswith(suffix):
            return base[: -len(suffix)]
    return os.path.splitext(base)[0]


def _read_text(fname):
    try:
        with open(fname) as f:
            return f.read()
    except OSError as e:
        raise OSError(f"Cannot read {fname}: {e.strerror}") from e


def _native(value):
    if isinstance(value, np.generic):
        return value.item()
    return value


def _records(df):
    return [{k: _native(v) for k, v in row.items()} for row in df.to_dict("records")]


def _files(paths, default_dir, pattern):
    # expand directories and fall back to the default directory of the stage
    if not paths:
        paths = [default_dir]
    files = []
    for path in paths:
        if os.path.isdir(path):
            files.extend(sorted(glob.glob(os.path.join(path, pattern))))
        else:
            files.append(path)
    if pattern == "*.json":
        files = [f for f in files if _stem(f) == os.path.splitext(os.path.basename(f))[0]]
    if not files:
        raise OSError(f"No files matching {pattern} found in {', '.join(paths)}")
    return files


def read_graph(fname):
    return parse_graph(_read_text(fname), source=fname)


def read_baseline(fname, g=None):
    record = parse_baseline(_read_text(fname), source=fname)
    if g is not None:
        record.check(g)
    return record


def read_schedule(fname):
    return parse_schedule(_read_text(fname), source=fname)


def _graphs_with_baselines(graph_files, baselines_dir):
    items = []
    for fname in graph_files:
        g = read_graph(fname)
        baseline_file = os.path.join(baselines_dir, f"{_stem(fname)}.baseline.json")
        if not os.path.isfile(baseline_file):
            raise OSError(f"Missing baseline {baseline_file} for graph {fname}")
        items.append((g, read_baseline(baseline_file, g)))
    return items


def update_manifest(out_dir, stage, config, paths, seconds):
    """
    Merge the entry of one stage into manifest.json of the output directory.

    Parameters
    ----------
    out_dir : str
        The output directory.
    stage : str
        The name of the stage.
    config : dict
        The settings of the stage.
    paths : list of str
        The files the stage produced.
    seconds : float
        The duration of the stage.
    """
    fname = _path(out_dir, "manifest.json")
    manifest = {"tool_version": __version__, "stages": {}}
    if os.path.isfile(fname):
        manifest = read_json(fname)
    manifest["tool_version"] = __version__
    manifest["stages"][stage] = {
        "config": config,
        "artifacts": sorted(os.path.relpath(p, out_dir) for p in paths),
        "seconds": round(seconds, 3),
    }
    write_json(fname, manifest)


def validate_artifacts(out_dir):
    """
    Re-parse every artifact listed in the manifest and check the CSV headers.

    Raises
    ------
    MalformedInputError
        If a file cannot be parsed or a CSV has unexpected columns.
    OSError
        If a listed file does not exist.
    """
    manifest = read_json(_path(out_dir, "manifest.json"))
    fnames = []
    for entry in manifest["stages"].values():
        fnames.extend(os.path.join(out_dir, p) for p in entry["artifacts"])
    for fname in fnames:
        if not os.path.isfile(fname):
            raise OSError(f"Artifact {fname} listed in the manifest does not exist")
    data = read_artifacts(fnames)
    for fname, df in data.get("csv", {}).items():
        stem = _stem(fname)
        kind = stem
        if stem.startswith("fig1_"):
            kind = "dt_scaling"
        elif stem.startswith("fig2_"):
            kind = "transfer_matrix"
        elif stem.startswith("fig3_"):
            kind = "native_vs_transfer"
        elif stem.endswith("_trajectory"):
            kind = "trajectory"
        elif stem.startswith("g_n"):
            kind = "curve"
        expected = CSV_COLUMNS.get(kind)
        if expected is not None and list(df.columns) != expected:
            raise MalformedInputError(
                f"{fname} has columns {list(df.columns)}, expected {expected}"
            )
    curves = data.get("csv", {})
    for fname, provenance in data.get("scan", {}).items():
        curve_file = os.path.join(os.path.dirname(fname), f"{_stem(fname)}.csv")
        if curve_file in curves and len(curves[curve_file]) != len(provenance["descending"]):
            raise MalformedInputError(f"{fname} does not match the points of {curve_file}")
    logger.info(f"Validated {len(fnames)} artifacts in {out_dir}")
    return len(fnames)


def cmd_generate(sizes, instances, degree=3, seed=0, out_dir=".", connected=True):
    """Generate `instances` random regular graphs per size as g_n{n}_i{index}.json."""
    graphs = experiment.generate_ensemble(
        sizes, instances, degree=degree, master_seed=seed, connected=connected
    )
    paths = []
    for (n, index), g in graphs.items():
        fname = _path(out_dir, "graphs", f"g_n{n}_i{index}.json")
        write_text(fname, serialize_graph(g))
        paths.append(fname)
    logger.info(f"Generated {len(paths)} graphs in {_path(out_dir, 'graphs')}")
    return paths


def _solve_baseline(item, method, seed, max_qubits):
    fname, g = item
    if method == "exhaustive":
        return brute_force_max_cut(g, max_qubits=max_qubits)
    anneal_seed = experiment.derive_seed(seed, g.node_count, g.seed or 0, "anneal")
    return anneal_max_cut(g, AnnealParams(), seed=anneal_seed)


def cmd_baseline(
    graph_files,
    method="exhaustive",
    seed=0,
    out_dir=".",
    jobs=1,
    max_qubits=None,
    rerun=False,
    silent=False,
):
    """Solve the Max-Cut baseline of every graph file."""
    todo, paths = [], []
    for fname in graph_files:
        target = _path(out_dir, "baselines", f"{_stem(fname)}.baseline.json")
        paths.append(target)
        g = read_graph(fname)
        if not rerun and os.path.isfile(target):
            try:
                existing = read_baseline(target, g)
            except BaselineMismatchError as e:
                logger.info(f"Recomputing {target}: {e}")
            else:
                if existing.method == method:
                    continue
        todo.append((fname, g))
    func = partial(_solve_baseline, method=method, seed=seed, max_qubits=max_qubits)
    records = parallel_map(func, todo, jobs=jobs, silent=silent, desc="Baselines")
    for (fname, _), record in zip(todo, records):
        target = _path(out_dir, "baselines", f"{_stem(fname)}.baseline.json")
        write_text(target, serialize_baseline(record))
    logger.info(f"Solved {len(todo)} baselines ({method}), {len(paths) - len(todo)} reused")
    return paths


def _write_summary(results, cfg, out_dir):
    summary = experiment.summarize_scans(results)
    fname = _path(out_dir, "scans", "scan_summary.json")
    write_json(
        fname,
        {
            "std": "population",
            "config": cfg.to_dict(),
            "sizes": _records(summary),
        },
    )
    table = pd.DataFrame([r.to_dict() for r in results], columns=CSV_COLUMNS["scan_results"])
    results_file = _path(out_dir, "scans", "scan_results.csv")
    write_csv(results_file, table)
    return [fname, results_file]


def read_summary(fname):
    data = read_json(fname)
    if "sizes" not in data:
        raise MalformedInputError(f"Missing key 'sizes' in {fname}")
    return pd.DataFrame(data["sizes"])


def read_scan(fname):
    return experiment.parse_scan(_read_text(fname), source=fname)


def _stored_scan(g, stem, cfg, out_dir):
    # a stored scan is reused only when it was made for this graph with these settings
    curve_file = _path(out_dir, "scans", f"{stem}.csv")
    scan_file = _path(out_dir, "scans", f"{stem}.scan.json")
    schedule_file = _path(out_dir, "schedules", f"{stem}.schedule.json")
    for fname in [curve_file, scan_file, schedule_file]:
        if not os.path.isfile(fname):
            return None
    provenance = read_scan(scan_file)
    fingerprint = json.loads(json.dumps(cfg.scan_fingerprint()))
    if provenance["graph_id"] != g.id:
        logger.info(f"Rescanning {stem}: stored scan is of graph {provenance['graph_id']}")
        return None
    if provenance["config"] != fingerprint:
        logger.info(f"Rescanning {stem}: stored scan used other settings")
        return None
    schedule = read_schedule(schedule_file)
    if schedule.train_graph_id != g.id or schedule.order != fingerprint["order"]:
        logger.info(f"Rescanning {stem}: stored schedule does not match the scan")
        return None
    df = pd.read_csv(curve_file, float_precision="round_trip")
    if list(df.columns) != CSV_COLUMNS["curve"] or (df["graph_id"] != g.id).any():
        logger.info(f"Rescanning {stem}: stored curve does not match the scan")
        return None
    return experiment.scan_result_from_curve(
        g.id,
        g.node_count,
        list(zip(df["dt"], df["final_ratio"])),
        list(df["final_energy"]),
        schedule,
        cfg,
        descending=provenance["descending"],
    )


def cmd_scan(
    graph_files,
    cfg,
    out_dir=".",
    baselines_dir=None,
    jobs=1,
    max_qubits=None,
    rerun=False,
    silent=False,
):
    """
    Scan dt for every graph, writing a curve CSV, its provenance and the best schedule
    per graph.

    A stored scan is reused unless rerun is True, or it belongs to another graph, or it
    was made with other scan settings.
    """
    cfg.validate()
    if baselines_dir is None:
        baselines_dir = _path(out_dir, "baselines")
    items = _graphs_with_baselines(graph_files, baselines_dir)
    stems = [_stem(f) for f in graph_files]

    results = [None] * len(items)
    todo = []
    for k, ((g, _), stem) in enumerate(zip(items, stems)):
        if not rerun:
            results[k] = _stored_scan(g, stem, cfg, out_dir)
        if results[k] is None:
            todo.append(k)
    logger.info(f"Scanning {len(todo)} graphs, {len(items) - len(todo)} already scanned")

    scanned = experiment.scan_ensemble(
        [items[k] for k in todo], cfg, jobs=jobs, silent=silent, max_qubits=max_qubits
    )
    paths = []
    for k, result in zip(todo, scanned):
        results[k] = result
        write_csv(_path(out_dir, "scans", f"{stems[k]}.csv"), result.to_dataframe())
        write_text(
            _path(out_dir, "scans", f"{stems[k]}.scan.json"),
            experiment.serialize_scan(result, cfg),
        )
        write_text(
            _path(out_dir, "schedules", f"{stems[k]}.schedule.json"),
            serialize_schedule(result.best_schedule),
        )
    for stem in stems:
        paths.append(_path(out_dir, "scans", f"{stem}.csv"))
        paths.append(_path(out_dir, "scans", f"{stem}.scan.json"))
        paths.append(_path(out_dir, "schedules", f"{stem}.schedule.json"))
    paths.extend(_write_summary(results, cfg, out_dir))
    return results, paths


def cmd_transfer(
    schedule_files,
    target_files,
    out_dir=".",
    baselines_dir=None,
    summary_file=None,
    train_sizes=None,
    jobs=1,
    max_qubits=None,
    silent=False,
):
    """
    Replay schedules on target graphs with n_train <= n_target.

    Writes the raw pairs, the aggregated transfer matrix and, when a scan summary is
    available, the comparison with the native best ratios.
    """
    if baselines_dir is None:
        baselines_dir = _path(out_dir, "baselines")
    if summary_file is None:
        summary_file = _path(out_dir, "scans", "scan_summary.json")
    schedules = [read_schedule(f) for f in schedule_files]
    if train_sizes is not None:
        schedules = [s for s in schedules if s.n_train in train_sizes]
    if not schedules:
        raise MalformedInputError("No schedules to transfer")
    targets = _graphs_with_baselines(target_files, baselines_dir)

    schedule_position = {id(s): k for k, s in enumerate(schedules)}
    target_position = {g.id: k for k, (g, _) in enumerate(targets)}
    records, skipped = [], 0
    for n in sorted({g.node_count for g, _ in targets}):
        eligible = [s for s in schedules if s.n_train <= n]
        group = [(g, b) for g, b in targets if g.node_count == n]
        skipped += (len(schedules) - len(eligible)) * len(group)
        if not eligible:
            continue
        logger.info(f"Transferring {len(eligible)} schedules to {len(group)} graphs of n={n}")
        group_records = experiment.transfer_ensemble(
            eligible, group, jobs=jobs, silent=silent, max_qubits=max_qubits
        )
        for i, record in enumerate(group_records):
            s = eligible[i // len(group)]
            record["_order"] = (
                schedule_position[id(s)],
                target_position[record["target_graph_id"]],
            )
        records.extend(group_records)
    if skipped:
        logger.warning(f"Skipped {skipped} pairs with n_train > n_target")
    records.sort(key=lambda r: r["_order"])

    pairs = pd.DataFrame(records, columns=CSV_COLUMNS["transfer_pairs"])
    cells = experiment.aggregate_matrix(records)
    paths = [
        _path(out_dir, "transfer", "transfer_pairs.csv"),
        _path(out_dir, "transfer", "transfer_matrix.csv"),
    ]
    write_csv(paths[0], pairs)
    write_csv(paths[1], experiment.cells_to_dataframe(cells))
    if os.path.isfile(summary_file):
        comparison = experiment.native_vs_transfer(cells, read_summary(summary_file))
        paths.append(_path(out_dir, "transfer", "native_vs_transfer.csv"))
        write_csv(paths[-1], comparison)
    else:
        logger.warning(f"No scan summary at {summary_file}, skipping native comparison")
    return paths


def cmd_fit(summary_file, out_dir="."):
    """Fit dt = c * n**alpha to the mean best dt per size of a scan summary."""
    summary = read_summary(summary_file)
    fit = experiment.fit_summary(summary)
    logger.info(
        f"Fitted dt = {fit.coefficient:.4f} * n^{fit.exponent:.4f} (r2={fit.r_squared:.4f})"
    )
    paths = [_path(out_dir, "fit", "fit.json"), _path(out_dir, "fit", "dt_scaling.csv")]
    write_text(paths[0], experiment.serialize_fit(fit))
    write_csv(paths[1], experiment.dt_scaling_table(summary, fit))
    return fit, paths


def cmd_report(out_dir="."):
    """Bundle the datasets of the three figures into the report directory."""
    sources = {
        "fig1_dt_scaling.csv": _path(out_dir, "fit", "dt_scaling.csv"),
        "fig2_transfer_matrix.csv": _path(out_dir, "transfer", "transfer_matrix.csv"),
        "fig3_native_vs_transfer.csv": _path(out_dir, "transfer", "native_vs_transfer.csv"),
    }
    paths = []
    for name, source in sources.items():
        if not os.path.isfile(source):
            raise OSError(f"Missing {source}; run the preceding stage first")
        target = _path(out_dir, "report", name)
        write_text(target, _read_text(source))
        paths.append(target)
    return paths


def cmd_compare(graph_files, cfg, out_dir=".", baselines_dir=None, max_qubits=None):
    """Tabulate first- versus second-order final ratios over the dt grid."""
    if baselines_dir is None:
        baselines_dir = _path(out_dir, "baselines")
    frames = []
    for g, baseline in _graphs_with_baselines(graph_files, baselines_dir):
        d = build_cost_diagonal(g, max_qubits=max_qubits)
        frames.append(
            experiment.compare_orders(
                d, baseline, cfg.dt_grid(), layers=cfg.layers, safeguards=cfg.safeguards
            )
        )
    fname = _path(out_dir, "compare", "order_comparison.csv")
    write_csv(fname, pd.concat(frames, ignore_index=True))
    return [fname]


def cmd_simulate(
    graph_file,
    dt,
    layers=16,
    order=2,
    out_dir=".",
    baseline_file=None,
    dump_state_file=None,
    max_qubits=None,
):
    """Run one FALQON feedback loop and write its schedule and trajectory."""
    g = read_graph(graph_file)
    d = build_cost_diagonal(g, max_qubits=max_qubits)
    schedule, trajectory = run_feedback(d, dt, layers, order=order)
    ground_energy = None
    if baseline_file is not None:
        ground_energy = read_baseline(baseline_file, g).ground_energy
    name = f"{_stem(graph_file)}_dt{dt}_o{schedule.order}"
    paths = [
        _path(out_dir, "simulate", f"{name}.schedule.json"),
        _path(out_dir, "simulate", f"{name}_trajectory.csv"),
    ]
    write_text(paths[0], serialize_schedule(schedule))
    df = trajectory.to_dataframe(schedule.betas, ground_energy)
    write_csv(paths[1], df.reindex(columns=CSV_COLUMNS["trajectory"]))
    if dump_state_file is not None:
        _, psi = replay_schedule(d, schedule, return_state=True)
        write_text(dump_state_file, dump_state(psi))
        paths.append(dump_state_file)
    return paths


class _Parser(argparse.ArgumentParser):
    # bad flags are user errors, which exit with code 1
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_common(p):
    p.add_argument("--out", default="falqon_out", help="The output directory")
    p.add_argument("--jobs", type=int, default=1, help="The number of worker processes")
    p.add_argument(
        "--force", action="store_true", help="Allow graphs with more than 26 nodes"
    )
    p.add_argument(
        "--validate", action="store_true", help="Re-parse all artifacts afterwards"
    )
    p.add_argument(
        "--rerun", action="store_true", help="Recompute outputs that already exist"
    )
    p.add_argument("-v", "--verbose", action="store_true", help="Log debug messages")
    p.add_argument("-q", "--quiet", action="store_true", help="Only log warnings")


def _add_ensemble(p):
    p.add_argument("--sizes", type=int, nargs="+", help="The graph sizes")
    p.add_argument("--instances", type=int, help="The number of graphs per size")
    p.add_argument("--degree", type=int, default=3, help="The degree of the graphs")
    p.add_argument("--seed", type=int, help="The master seed")
    p.add_argument(
        "--allow-disconnected",
        action="store_true",
        help="Do not regenerate disconnected graphs",
    )


def _add_scan(p):
    p.add_argument("--layers", type=int, help="The number of FALQON layers")
    p.add_argument("--dt-min", type=float, help="The smallest dt of the scan")
    p.add_argument("--dt-max", type=float, help="The largest dt of the scan")
    p.add_argument("--dt-step", type=float, help="The dt resolution of the scan")
    p.add_argument("--order", type=int, choices=[1, 2], help="The FALQON order")
    p.add_argument(
        "--full-scale",
        "--paper-scale",
        dest="full_scale",
        action="store_true",
        help="Use the full protocol: n up to 24, 20 instances, dt step 0.001",
    )
    p.add_argument(
        "--max-angle",
        type=float,
        help="The largest mixer angle of a second-order step, 0 for the plain law",
    )
    p.add_argument(
        "--no-early-stop", action="store_true", help="Evaluate the whole dt grid"
    )


def get_parser():
    p = _Parser(
        prog="falqon",
        description="FALQON dt scans and schedule transfer for Max-Cut",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("generate", help="Generate random regular graphs")
    _add_common(s)
    _add_ensemble(s)
    s.add_argument(
        "--full-scale",
        "--paper-scale",
        dest="full_scale",
        action="store_true",
        help="Use n = 6..24, 20 each",
    )

    s = sub.add_parser("baseline", help="Solve the Max-Cut baselines")
    _add_common(s)
    s.add_argument("graphs", nargs="*", help="Graph files or directories")
    s.add_argument(
        "--method", choices=["exhaustive", "annealing"], default="exhaustive"
    )
    s.add_argument("--seed", type=int, default=0, help="The seed for annealing")

    s = sub.add_parser("scan", help="Scan dt for every graph")
    _add_common(s)
    _add_scan(s)
    s.add_argument("graphs", nargs="*", help="Graph files or directories")
    s.add_argument("--baselines", help="The directory with baseline files")

    s = sub.add_parser("transfer", help="Replay schedules on larger graphs")
    _add_common(s)
    s.add_argument("--schedules", nargs="*", help="Schedule files or directories")
    s.add_argument("--targets", nargs="*", help="Target graph files or directories")
    s.add_argument("--baselines", help="The directory with baseline files")
    s.add_argument("--summary", help="The scan summary JSON")
    s.add_argument("--train-sizes", type=int, nargs="+", help="Only use these n_train")

    s = sub.add_parser("fit", help="Fit a power law to the optimal dt")
    _add_common(s)
    s.add_argument("--summary", help="The scan summary JSON")

    s = sub.add_parser("report", help="Bundle the figure datasets")
    _add_common(s)

    s = sub.add_parser("compare", help="Compare first- and second-order FALQON")
    _add_common(s)
    _add_scan(s)
    s.add_argument("graphs", nargs="*", help="Graph files or directories")
    s.add_argument("--baselines", help="The directory with baseline files")

    s = sub.add_parser("simulate", help="Run FALQON on a single graph")
    _add_common(s)
    s.add_argument("graph", help="The graph file")
    s.add_argument("--dt", type=float, required=True, help="The time step")
    s.add_argument("--layers", type=int, default=16, help="The number of layers")
    s.add_argument("--order", type=int, choices=[1, 2], default=2)
    s.add_argument("--baseline", help="A baseline file, to report ratios")
    s.add_argument("--dump-state", help="Write the final state to this file")

    s = sub.add_parser("run", help="Run all stages")
    _add_common(s)
    _add_ensemble(s)
    _add_scan(s)
    s.add_argument("--train-sizes", type=int, nargs="+", help="The training sizes")
    s.add_argument(
        "--method", choices=["exhaustive", "annealing"], default="exhaustive"
    )
    return p


def config_from_args(args):
    """Build an ExperimentConfig from parsed arguments, leaving unset flags default."""
    overrides = {}
    for key, attr in [
        ("sizes", "sizes"),
        ("instances_per_size", "instances"),
        ("layers", "layers"),
        ("dt_min", "dt_min"),
        ("dt_max", "dt_max"),
        ("dt_step", "dt_step"),
        ("order", "order"),
        ("master_seed", "seed"),
        ("degree", "degree"),
        ("train_sizes", "train_sizes"),
    ]:
        value = getattr(args, attr, None)
        if value is not None:
            overrides[key] = tuple(value) if isinstance(value, list) else value
    if getattr(args, "no_early_stop", False):
        overrides["early_stop"] = experiment.EarlyStopParams(enabled=False)
    max_angle = getattr(args, "max_angle", None)
    if max_angle is not None:
        overrides["safeguards"] = SafeguardParams(max_angle=max_angle or None)
    if "sizes" in overrides and "train_sizes" not in overrides:
        overrides["train_sizes"] = tuple(
            n for n in experiment.ExperimentConfig().train_sizes if n in overrides["sizes"]
        ) or overrides["sizes"][:1]
    if getattr(args, "full_scale", False):
        return experiment.ExperimentConfig.full_scale(**overrides)
    return experiment.ExperimentConfig(**overrides)


def _run_stage(out_dir, stage, config, func):
    start = time.perf_counter()
    paths = func()
    update_manifest(out_dir, stage, config, paths, time.perf_counter() - start)
    return paths


def _dispatch(args):
    out = args.out
    max_qubits = experiment_max_qubits(args)
    silent = args.quiet
    jobs = args.jobs
    cmd = args.command

    if cmd in ("generate", "run"):
        cfg = config_from_args(args)
        _run_stage(
            out,
            "generate",
            {"sizes": list(cfg.sizes), "instances": cfg.instances_per_size,
             "degree": cfg.degree, "seed": cfg.master_seed},
            lambda: cmd_generate(
                cfg.sizes,
                cfg.instances_per_size,
                degree=cfg.degree,
                seed=cfg.master_seed,
                out_dir=out,
                connected=not args.allow_disconnected,
            ),
        )
    if cmd in ("baseline", "run"):
        graphs = _files(getattr(args, "graphs", None), _path(out, "graphs"), "*.json")
        seed = args.seed if args.seed is not None else 0
        _run_stage(
            out,
            "baseline",
            {"method": args.method, "seed": seed},
            lambda: cmd_baseline(
                graphs, args.method, seed, out, jobs, max_qubits, args.rerun, silent
            ),
        )
    if cmd in ("scan", "run"):
        cfg = config_from_args(args)
        graphs = _files(getattr(args, "graphs", None), _path(out, "graphs"), "*.json")
        _run_stage(
            out,
            "scan",
            cfg.to_dict(),
            lambda: cmd_scan(
                graphs,
                cfg,
                out,
                getattr(args, "baselines", None),
                jobs,
                max_qubits,
                args.rerun,
                silent,
            )[1],
        )
    if cmd in ("transfer", "run"):
        train_sizes = args.train_sizes
        if cmd == "run":
            train_sizes = list(config_from_args(args).train_sizes)
        schedules = _files(
            getattr(args, "schedules", None), _path(out, "schedules"), "*.schedule.json"
        )
        targets = _files(getattr(args, "targets", None), _path(out, "graphs"), "*.json")
        _run_stage(
            out,
            "transfer",
            {"train_sizes": train_sizes},
            lambda: cmd_transfer(
                schedules,
                targets,
                out,
                getattr(args, "baselines", None),
                getattr(args, "summary", None),
                train_sizes,
                jobs,
                max_qubits,
                silent,
            ),
        )
    if cmd in ("fit", "run"):
        summary = getattr(args, "summary", None) or _path(out, "scans", "scan_summary.json")
        _run_stage(out, "fit", {"summary": summary}, lambda: cmd_fit(summary, out)[1])
    if cmd in ("report", "run"):
        _run_stage(out, "report", {}, lambda: cmd_report(out))
    if cmd == "compare":
        cfg = config_from_args(args)
        graphs = _files(args.graphs, _path(out, "graphs"), "*.json")
        _run_stage(
            out,
            "compare",
            cfg.to_dict(),
            lambda: cmd_compare(graphs, cfg, out, args.baselines, max_qubits),
        )
    if cmd == "simulate":
        _run_stage(
            out,
            "simulate",
            {"graph": args.graph, "dt": args.dt, "layers": args.layers, "order": args.order},
            lambda: cmd_simulate(
                args.graph,
                args.dt,
                args.layers,
                args.order,
                out,
                args.baseline,
                args.dump_state,
                max_qubits,
            ),
        )
    if args.validate:
        validate_artifacts(out)


def experiment_max_qubits(args):
    return FORCED_MAX_QUBITS if args.force else None


def main(args=None):
    parser = get_parser()
    options = parser.parse_args(args)

    level = logging.INFO
    if options.verbose:
        level = logging.DEBUG
    elif options.quiet:
        level = logging.WARNING
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")

    try:
        _dispatch(options)
    except (ValueError, OSError) as e:
        logger.error(str(e))
        return 1
    except (FloatingPointError, RuntimeError, AssertionError) as e:
        logger.error(f"Internal error: {e}")
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
