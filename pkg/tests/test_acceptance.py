"""End-to-end runs at desk scale; deselected by default, run with ``pytest -m slow``."""

import filecmp
import os
import tempfile

import numpy as np
import pandas as pd
import pytest

import falqon
from falqon.cli import main

DESK_RUN = [
    "--sizes", "6", "8", "10", "12", "14",
    "--instances", "10",
    "--train-sizes", "6",
    "--dt-step", "0.005",
    "--layers", "16",
    "--order", "2",
    "--seed", "2025",
    "--jobs", str(os.cpu_count() or 1),
    "-q",
]  # fmt: skip


@pytest.fixture(scope="module")
def desk_run():
    with tempfile.TemporaryDirectory() as tmpdir:
        out = os.path.join(tmpdir, "out")
        assert main(["run", *DESK_RUN, "--out", out]) == 0
        yield tmpdir, out


@pytest.mark.slow
def test_dt_scaling(desk_run):
    _, out = desk_run
    table = pd.read_csv(os.path.join(out, "fit", "dt_scaling.csv"))
    assert np.all(np.diff(table["mean_dt"]) < 0)
    n6 = table.loc[table["n"] == 6, "mean_dt"].iloc[0]
    assert 0.17 <= n6 <= 0.23
    with open(os.path.join(out, "fit", "fit.json")) as f:
        fit = falqon.experiment.parse_fit(f.read())
    assert -0.65 <= fit.exponent <= -0.38


@pytest.mark.slow
def test_transfer_advantage_and_stability(desk_run):
    _, out = desk_run
    df = pd.read_csv(os.path.join(out, "transfer", "native_vs_transfer.csv"))
    df = df[df["n_train"] == 6].set_index("n_target")
    assert df.at[14, "transfer_mean_ratio"] > df.at[14, "native_mean_ratio"]
    matrix = pd.read_csv(os.path.join(out, "transfer", "transfer_matrix.csv"))
    assert matrix.set_index(["n_train", "n_target"]).at[(6, 14), "pair_count"] == 100
    stable = df.loc[[8, 10, 12, 14], "transfer_mean_ratio"]
    assert stable.max() - stable.min() < 0.10


@pytest.mark.slow
def test_annealing_matches_exhaustive(desk_run):
    _, out = desk_run
    graph_dir = os.path.join(out, "graphs")
    for name in sorted(os.listdir(graph_dir)):
        g = falqon.cli.read_graph(os.path.join(graph_dir, name))
        exact = falqon.cli.read_baseline(
            os.path.join(out, "baselines", name.replace(".json", ".baseline.json")), g
        )
        seed = falqon.experiment.derive_seed(2025, g.node_count, g.seed, "anneal")
        annealed = falqon.graph.anneal_max_cut(g, seed=seed)
        assert annealed.max_cut == exact.max_cut, name


@pytest.mark.slow
def test_pipeline_is_reproducible(desk_run):
    tmpdir, out = desk_run
    again = os.path.join(tmpdir, "again")
    assert main(["run", *DESK_RUN, "--out", again]) == 0
    for sub in ["graphs", "baselines", "scans", "schedules", "transfer", "fit", "report"]:
        names = sorted(os.listdir(os.path.join(out, sub)))
        _, mismatch, errors = filecmp.cmpfiles(
            os.path.join(out, sub), os.path.join(again, sub), names, shallow=False
        )
        assert mismatch == [] and errors == [], sub
