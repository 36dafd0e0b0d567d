"""SVG charts from a results CSV.

Each chart draws one semi-transparent line per replicate (SVG group id
``replicate-<i>``), a median overlay (``median``) and dashed vertical
markers at break times (``break-<t>``). Break times are read from
``meta.json`` next to the CSV when present.
"""

import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .csvio import read_csv  # noqa: E402

CHARTS = {
    "normalized_regret.svg": ("t", "norm_regret", "normalized regret  R(n)/sqrt(n)"),
    "normalized_error.svg": ("t", "norm_est_error", "normalized error  n^(1/4) ||theta_hat - theta0||"),
    "spectral_radius_actual.svg": ("episode", "rho_actual", "spectral radius, true closed loop"),
    "spectral_radius_surrogate.svg": ("episode", "rho_surrogate", "spectral radius, surrogate closed loop"),
}
MAX_POINTS = 400


def _thin(x, y):
    if len(x) <= MAX_POINTS:
        return x, y
    idx = np.unique(np.geomspace(1, len(x), MAX_POINTS).astype(int) - 1)
    return x[idx], y[idx]


def _median_curve(xs, ys):
    x_all = np.concatenate(xs)
    y_all = np.concatenate(ys)
    grid, inv = np.unique(x_all, return_inverse=True)
    med = np.array([np.median(y_all[inv == k]) for k in range(len(grid))])
    return grid, med


def _break_times(csv_path, breaks):
    if breaks is not None:
        return list(breaks)
    meta = Path(csv_path).with_name("meta.json")
    if meta.exists():
        return [int(t) for t in json.loads(meta.read_text()).get("break_times", [])]
    return []


def render_plots(csv_path, out_dir, breaks=None):
    """Write the charts in :data:`CHARTS` to ``out_dir``; returns their paths."""
    data = read_csv(csv_path)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    break_times = _break_times(csv_path, breaks)
    reps = np.unique(data["replicate"])
    plt.rcParams["svg.hashsalt"] = "lqboot"
    paths = []
    for fname, (xcol, ycol, title) in CHARTS.items():
        fig, ax = plt.subplots(figsize=(7, 4))
        xs, ys = [], []
        for rep in reps:
            sel = (data["replicate"] == rep) & ~np.isnan(data[ycol])
            x = data[xcol][sel].astype(float)
            y = data[ycol][sel]
            if xcol == "t":
                x, y = _thin(x, y)
            xs.append(x)
            ys.append(y)
            ax.plot(x, y, color="tab:blue", alpha=0.3, lw=0.8, gid=f"replicate-{rep}")
        if xs and sum(len(x) for x in xs):
            grid, med = _median_curve(xs, ys)
            ax.plot(grid, med, color="black", lw=1.6, gid="median", label="median")
            ax.legend(loc="upper right")
        marks = break_times
        if xcol == "episode" and marks:
            t, e = data["t"], data["episode"]
            marks = [int(e[t >= b].min()) if np.any(t >= b) else None for b in break_times]
        for b, m in zip(break_times, marks):
            if m is not None:
                ax.axvline(m, color="tab:red", ls="--", lw=1.0, gid=f"break-{b}")
        if xcol == "t":
            ax.set_xscale("log")
        ax.set_xlabel("n" if xcol == "t" else "episode m")
        ax.set_title(title)
        fig.tight_layout()
        path = out_dir / fname
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
        paths.append(path)
    return paths
