import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import pandas as pd  # noqa: E402

import falqon  # noqa: E402


def test_dt_scaling():
    summary = pd.DataFrame(
        {"n": [6, 8, 10], "mean_dt": [0.2, 0.17, 0.15], "std_dt": [0.01, 0.02, 0.01]}
    )
    fit = falqon.experiment.fit_summary(summary)
    f, ax = plt.subplots()
    falqon.plot.dt_scaling(summary, fit=fit, ax=ax)
    assert len(ax.lines) >= 1
    plt.close(f)


def test_transfer_matrix():
    records = [
        {"n_train": 6, "n_target": 6, "ratio": 0.9},
        {"n_train": 6, "n_target": 8, "ratio": 0.85},
        {"n_train": 8, "n_target": 8, "ratio": 0.8},
    ]
    cells = falqon.experiment.aggregate_matrix(records)
    f, ax = plt.subplots()
    falqon.plot.transfer_matrix(cells, ax=ax)
    # the (8, 6) cell is empty and not annotated
    assert len(ax.texts) == 3
    plt.close(f)


def test_native_vs_transfer_and_trajectory():
    comparison = pd.DataFrame(
        {
            "n_train": [6, 6],
            "n_target": [8, 10],
            "transfer_mean_ratio": [0.9, 0.88],
            "native_mean_ratio": [0.85, 0.8],
            "advantage": [0.05, 0.08],
        }
    )
    f, axes = plt.subplots(1, 2)
    falqon.plot.native_vs_transfer(comparison, ax=axes[0])
    d = falqon.graph.build_cost_diagonal(falqon.graph.generate_regular(6, 3, seed=0))
    schedule, trajectory = falqon.engine.run_feedback(d, 0.2, 5)
    falqon.plot.trajectory(trajectory.to_dataframe(schedule.betas, -7), ax=axes[1])
    assert axes[1].get_ylabel() == "ratio"
    plt.close(f)
