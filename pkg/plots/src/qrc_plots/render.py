"""Render paper-style figures from qrc-lab experiment CSVs.

Raw per-seed points are drawn as gray dots in the background; summary curves
are smoothed with a Savitzky-Golay filter when enabled and the data is long
enough for the window.
"""

from __future__ import annotations

import csv
from collections import defaultdict
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np
from scipy.signal import savgol_filter

from .figspec import FigureSpec, SpecError

RAW_STYLE = dict(color="0.6", s=12, alpha=0.7, zorder=1, linewidths=0)


class SchemaError(RuntimeError):
    """CSV columns do not match the figure kind."""


def read_csv(path):
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"input CSV not found: {path}")
    with open(path) as fh:
        rows = [r for r in csv.reader(l for l in fh if not l.startswith("#"))]
    if not rows:
        raise SchemaError(f"{path}: empty file")
    header, body = rows[0], rows[1:]
    cols = {name: i for i, name in enumerate(header)}
    if "error" in cols:
        body = [r for r in body if not r[cols["error"]]]
    return cols, body


def column(cols, body, name, path=""):
    if name not in cols:
        raise SchemaError(f"{path}: missing column {name!r} "
                          f"(have {sorted(cols)})")
    return np.array([float(r[cols[name]]) for r in body])


def smooth(y, spec: FigureSpec):
    if not spec.smoothing or len(y) < spec.smoothing_window:
        return np.asarray(y, dtype=float)
    return savgol_filter(y, spec.smoothing_window, spec.smoothing_order)


def grouped_means(x, y, group):
    """Mean y per (group, x) pair, returned sorted by x within each group."""
    acc = defaultdict(lambda: defaultdict(list))
    for xi, yi, gi in zip(x, y, group):
        acc[gi][xi].append(yi)
    out = {}
    for g, per_x in acc.items():
        xs = np.array(sorted(per_x))
        out[g] = (xs, np.array([np.mean(per_x[xi]) for xi in xs]))
    return out


def _mse_versus(ax, spec, xcol, path):
    cols, body = read_csv(path)
    x = column(cols, body, xcol, path)
    y = column(cols, body, "mse", path)
    group = column(cols, body, "V", path)
    ax.scatter(x, y, **RAW_STYLE)
    for g, (xs, ys) in sorted(grouped_means(x, y, group).items()):
        ax.plot(xs, smooth(ys, spec), marker="o", ms=3, label=f"V = {int(g)}")
    ax.set_xlabel(xcol)
    ax.set_ylabel("MSE")
    ax.set_yscale("log")
    ax.legend(frameon=False)


def render_figure(spec: FigureSpec):
    """Build and return the matplotlib Figure for a spec (does not save)."""
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    kind = spec.figure_kind
    path = spec.input_csv[0]
    if kind == "narma_sweep":
        cols, body = read_csv(path)
        x = column(cols, body, "order", path)
        y = column(cols, body, "mse", path)
        group = column(cols, body, "V", path)
        ax.scatter(x, y, **RAW_STYLE)
        for g, (xs, ys) in sorted(grouped_means(x, y, group).items()):
            ax.plot(xs, smooth(ys, spec), marker="o", ms=3, label=f"V = {int(g)}")
        ax.set_xlabel("NARMA order")
        ax.set_ylabel("MSE")
        ax.set_yscale("log")
        ax.legend(frameon=False)
    elif kind == "mg_sweep":
        _mse_versus(ax, spec, "e_p", path)
    elif kind == "solvable_performance":
        cols, body = read_csv(path)
        x = column(cols, body, "e_p", path)
        y = column(cols, body, "mse", path)
        ax.scatter(x, y, **RAW_STYLE)
        xs = np.array(sorted(set(x)))
        means = np.array([np.mean(y[x == xi]) for xi in xs])
        ax.plot(xs, smooth(means, spec), marker="o", ms=3, color="C0")
        ax.set_xlabel("entangling power")
        ax.set_ylabel("MSE")
        ax.set_yscale("log")
    elif kind == "krylov_saturation":
        cols, body = read_csv(path)
        x = column(cols, body, "e_p", path)
        y = column(cols, body, "k_sat", path)
        ax.scatter(x, y, **RAW_STYLE)
        xs = np.array(sorted(set(x)))
        means = np.array([np.mean(y[x == xi]) for xi in xs])
        ax.plot(xs, smooth(means, spec), marker="o", ms=3, color="C0")
        ax.set_xlabel("entangling power")
        ax.set_ylabel(r"saturation $\bar{K}_C^{sat}$")
    elif kind == "coeff_deviation":
        cols, body = read_csv(path)
        x = column(cols, body, "e_p", path)
        y = column(cols, body, "onset", path)
        ax.scatter(x, y, **RAW_STYLE)
        xs = np.array(sorted(set(x)))
        means = np.array([np.mean(y[x == xi]) for xi in xs])
        ax.plot(xs, smooth(means, spec), marker="o", ms=3, color="C0")
        ax.set_xlabel("entangling power")
        ax.set_ylabel("deviation onset step")
    elif kind == "overlap_saturation":
        cols, body = read_csv(path)
        x = column(cols, body, "v", path)
        y = column(cols, body, "mean_overlap", path)
        guide = column(cols, body, "haar_value", path)[0]
        ax.scatter(x, y, **RAW_STYLE)
        xs = np.array(sorted(set(x)))
        means = np.array([np.mean(y[x == xi]) for xi in xs])
        ax.plot(xs, means, marker="o", ms=3, color="C0")
        ax.axhline(guide, linestyle="--", color="C3", label=r"$1/2^N$")
        ax.set_xlabel("multiplexing step v")
        ax.set_ylabel(r"mean pairwise $\mathrm{tr}(\rho_i\rho_j)$")
        ax.legend(frameon=False)
    elif kind == "mixing_validation":
        cols, body = read_csv(path)
        x = column(cols, body, "e_p", path)
        y = column(cols, body, "mu1_sampled", path)
        f = column(cols, body, "mu1_formula", path)
        ax.scatter(x, y, **RAW_STYLE)
        xs = np.array(sorted(set(x)))
        ax.plot(xs, [np.mean(y[x == xi]) for xi in xs], marker="o", ms=3,
                color="C0", label="sampled max")
        ax.plot(xs, [f[x == xi][0] for xi in xs], color="C3",
                label="formula")
        ax.set_xlabel("entangling power")
        ax.set_ylabel(r"mixing rate $\mu_1$")
        ax.legend(frameon=False)
    elif kind == "design_gap":
        cols, body = read_csv(path)
        x = column(cols, body, "e_p", path)
        y = column(cols, body, "lambda3", path)
        g = column(cols, body, "g_t", path)
        haar_mask = (np.abs(x - 0.6) < 1e-12) & (np.abs(g - 0.5) < 1e-12)
        ax.scatter(x[~haar_mask], y[~haar_mask], **RAW_STYLE)
        order = np.argsort(x[~haar_mask])
        ax.plot(x[~haar_mask][order], y[~haar_mask][order], marker="o", ms=3,
                color="C0")
        if haar_mask.any():
            ax.axhline(y[haar_mask][0], linestyle="--", color="C3",
                       label="Haar baseline")
            ax.legend(frameon=False)
        ax.set_xlabel("entangling power")
        ax.set_ylabel(r"$|\lambda_3|$")
    else:
        raise SpecError(f"unhandled figure kind {kind!r}")
    if spec.title:
        ax.set_title(spec.title)
    fig.tight_layout()
    return fig


def render(spec: FigureSpec) -> Path:
    """Render and write the figure image; returns the output path."""
    fig = render_figure(spec)
    out = Path(spec.output_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, dpi=150)
    plt.close(fig)
    return out
