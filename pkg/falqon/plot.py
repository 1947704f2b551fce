import logging

import matplotlib.pyplot as plt
import numpy as np
import pandas as pd

logger = logging.getLogger(__name__)


def dt_scaling(table, fit=None, ax=None, color="C0", **kwargs):
    """
    Plot the mean optimal time step against the graph size on log-log axes.

    Parameters
    ----------
    table : pd.DataFrame
        A table with columns n and mean_dt, and optionally std_dt and fitted_dt, as
        written by the fit and scan stages.
    fit : PowerLawFit, optional
        A power-law fit that is drawn as a line over the range of n. When None and
        `table` has a column fitted_dt, that column is drawn. The default is None.
    ax : matplotlib.axes.Axes, optional
        The axes to plot on. If None, uses the current axes.
    color : str, optional
        The color of the markers. The default is "C0".
    **kwargs :
        Additional keyword arguments passed to `ax.errorbar`.

    Returns
    -------
    ax : matplotlib.axes.Axes
    """
    ax = plt.gca() if ax is None else ax
    yerr = table["std_dt"] if "std_dt" in table else None
    ax.errorbar(
        table["n"],
        table["mean_dt"],
        yerr=yerr,
        marker="o",
        linestyle="",
        color=color,
        capsize=3,
        label="mean optimal dt",
        **kwargs,
    )
    if fit is not None:
        n = np.linspace(table["n"].min(), table["n"].max(), 100)
        label = f"{fit.coefficient:.3f} n^{fit.exponent:.3f}"
        ax.plot(n, fit.predict(n), color="k", linestyle="--", label=label)
    elif "fitted_dt" in table:
        ax.plot(table["n"], table["fitted_dt"], color="k", linestyle="--", label="fit")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("n")
    ax.set_ylabel("dt")
    ax.legend()
    return ax


def transfer_matrix(cells, ax=None, cmap="viridis", annotate=True, colorbar=True):
    """
    Draw the mean transferred approximation ratio per (n_train, n_target) pair.

    Parameters
    ----------
    cells : pd.DataFrame or list of TransferCell
        The aggregated transfer matrix.
    ax : matplotlib.axes.Axes, optional
        The axes to plot on. If None, uses the current axes.
    cmap : str, optional
        The colormap. The default is "viridis".
    annotate : bool, optional
        Write the mean ratio in every cell. The default is True.
    colorbar : bool, optional
        Add a colorbar. The default is True.

    Returns
    -------
    ax : matplotlib.axes.Axes
    """
    ax = plt.gca() if ax is None else ax
    if not isinstance(cells, pd.DataFrame):
        cells = pd.DataFrame([cell.to_dict() for cell in cells])
    matrix = cells.pivot(index="n_train", columns="n_target", values="mean_ratio")
    # masked cells (n_train > n_target) stay blank
    data = np.ma.masked_invalid(matrix.to_numpy(dtype=float))
    im = ax.imshow(data, cmap=cmap, origin="lower", aspect="auto")
    ax.set_xticks(range(matrix.shape[1]), matrix.columns)
    ax.set_yticks(range(matrix.shape[0]), matrix.index)
    ax.set_xlabel("n_target")
    ax.set_ylabel("n_train")
    if annotate:
        mask = np.ma.getmaskarray(data)
        for i, j in zip(*np.nonzero(~mask)):
            ax.text(j, i, f"{data[i, j]:.3f}", ha="center", va="center", color="w")
    if colorbar:
        ax.figure.colorbar(im, ax=ax, label="mean ratio")
    return ax


def native_vs_transfer(comparison, ax=None, n_train=None):
    """
    Plot transferred and native mean ratios against the target size.

    Parameters
    ----------
    comparison : pd.DataFrame
        A table with columns n_train, n_target, transfer_mean_ratio and
        native_mean_ratio.
    ax : matplotlib.axes.Axes, optional
        The axes to plot on. If None, uses the current axes.
    n_train : list of int, optional
        Only draw these training sizes. The default is None, which draws all.

    Returns
    -------
    ax : matplotlib.axes.Axes
    """
    ax = plt.gca() if ax is None else ax
    native = comparison.drop_duplicates("n_target").sort_values("n_target")
    ax.plot(
        native["n_target"],
        native["native_mean_ratio"],
        color="k",
        marker="s",
        label="native",
    )
    for n, df in comparison.groupby("n_train"):
        if n_train is not None and n not in n_train:
            continue
        df = df.sort_values("n_target")
        ax.plot(
            df["n_target"],
            df["transfer_mean_ratio"],
            marker="o",
            linestyle="--",
            label=f"transfer from n={n}",
        )
    ax.set_xlabel("n_target")
    ax.set_ylabel("approximation ratio")
    ax.legend()
    return ax


def trajectory(df, ax=None, column=None, **kwargs):
    """
    Plot the energy (or approximation ratio) of a FALQON run per layer.

    `df` is a table as returned by Trajectory.to_dataframe. When `column` is None, the
    ratio is plotted if available, and the energy otherwise.
    """
    ax = plt.gca() if ax is None else ax
    if column is None:
        column = "ratio" if "ratio" in df and df["ratio"].notna().any() else "energy"
    ax.plot(df["layer"], df[column], marker=".", **kwargs)
    ax.set_xlabel("layer")
    ax.set_ylabel(column)
    return ax
