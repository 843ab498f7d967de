"""Static figure rendering from the analysis file contracts.

Inputs are the CSVs emitted by the simulation package's analyze commands:

* loss curves      ``delta,n_a,lambda``
* landscapes       ``n0,n1,n2,count,p,neglogp``
* allocation maps  ``i,j,use``

This package never recomputes any science; it draws exactly what the files
say. All output is static (PNG/SVG via matplotlib's Agg backend).
"""

from __future__ import annotations

import csv
import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from matplotlib.colors import ListedColormap

USE_COLORS = ["#4d9f4d", "#8a6d3b", "#3b6f8a"]  # agriculture, construction, conservation
USE_NAMES = ["agriculture", "construction", "conservation"]


class SchemaError(ValueError):
    """An input file does not match its column contract."""


def _read_csv(path: str | Path, required: list[str]) -> dict[str, np.ndarray]:
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise SchemaError(f"{path}: empty file, expected columns {','.join(required)}")
        missing = [c for c in required if c not in reader.fieldnames]
        if missing:
            raise SchemaError(f"{path}: missing column(s) {','.join(missing)}")
        rows = list(reader)
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    out = {}
    for c in required:
        try:
            out[c] = np.array([float(r[c]) for r in rows])
        except (TypeError, ValueError) as exc:
            raise SchemaError(f"{path}: non-numeric value in column {c}") from exc
    return out


def _label_from_name(path: Path) -> str:
    stem = path.stem
    for prefix in ("loss_curve_", "landscape_", "events_"):
        if stem.startswith(prefix):
            return stem[len(prefix):]
    return stem


def plot_loss(csv_paths: list[str | Path], out_path: str | Path) -> Path:
    """One panel per input loss CSV, each with the linear reference diagonal."""
    paths = [Path(p) for p in csv_paths]
    curves = [(_label_from_name(p), _read_csv(p, ["delta", "n_a", "lambda"])) for p in paths]
    n = len(curves)
    ncols = min(n, 3)
    nrows = math.ceil(n / ncols)
    fig, axes = plt.subplots(nrows, ncols, figsize=(4.2 * ncols, 3.8 * nrows),
                             squeeze=False, sharex=True, sharey=True)
    for ax in axes.ravel()[n:]:
        ax.set_visible(False)
    for ax, (label, data) in zip(axes.ravel(), curves):
        ax.plot([0, 1], [0, 1], color="0.6", lw=1.0, zorder=1)
        ax.step(data["delta"], data["lambda"], where="post", color="#b03030",
                lw=1.6, zorder=2)
        ax.set_xlim(0, 1)
        ax.set_ylim(0, 1.02)
        ax.set_xlabel("degradation")
        ax.set_ylabel("relative loss")
        ax.set_title(f"suitability pressure {label}")
    fig.tight_layout()
    out_path = Path(out_path)
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path


def plot_landscape(csv_path: str | Path, out_path: str | Path,
                   events_path: str | Path | None = None) -> Path:
    """Composition landscape heatmap with the deepest bin marked.

    x is the agricultural fraction, y the construction fraction; color is
    the sampled depth (-log p), shallower = deeper optimum.
    """
    data = _read_csv(csv_path, ["n0", "n1", "n2", "count", "p", "neglogp"])
    total = data["n0"] + data["n1"] + data["n2"]
    x = data["n0"] / total
    y = data["n1"] / total
    depth = data["neglogp"]
    fig, ax = plt.subplots(figsize=(5.4, 4.6))
    sc = ax.scatter(x, y, c=depth, cmap="viridis_r", s=36, marker="s",
                    edgecolors="none")
    go = int(np.argmin(depth))
    ax.scatter([x[go]], [y[go]], marker="*", s=220, facecolor="#ffd54d",
               edgecolor="black", linewidth=0.8, zorder=3, label="global optimum")
    ax.plot([0, 1], [1, 0], color="0.8", lw=0.8, zorder=1)
    ax.set_xlim(-0.02, 1.02)
    ax.set_ylim(-0.02, 1.02)
    ax.set_xlabel(f"{USE_NAMES[0]} fraction")
    ax.set_ylabel(f"{USE_NAMES[1]} fraction")
    ax.set_title(Path(csv_path).stem)
    ax.legend(loc="upper right", fontsize=8)
    fig.colorbar(sc, ax=ax, label="-log p")
    fig.tight_layout()
    out_path = Path(out_path)
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path


def plot_maps(csv_paths: list[str | Path], out_path: str | Path) -> Path:
    """Categorical rasters of allocation maps (long-form i,j,use CSVs)."""
    paths = [Path(p) for p in csv_paths]
    grids = []
    for p in paths:
        data = _read_csv(p, ["i", "j", "use"])
        rows = int(data["i"].max()) + 1
        cols = int(data["j"].max()) + 1
        grid = np.full((rows, cols), -1, dtype=int)
        for i, j, u in zip(data["i"].astype(int), data["j"].astype(int),
                           data["use"].astype(int)):
            if not 0 <= u <= 2:
                raise SchemaError(f"{p}: use code {u} outside 0..2")
            grid[i, j] = u
        if (grid < 0).any():
            raise SchemaError(f"{p}: incomplete map (missing cells)")
        grids.append((p, grid))
    n = len(grids)
    ncols = min(n, 4)
    nrows = math.ceil(n / ncols)
    fig, axes = plt.subplots(nrows, ncols, figsize=(3.2 * ncols, 3.2 * nrows),
                             squeeze=False)
    for ax in axes.ravel()[n:]:
        ax.set_visible(False)
    cmap = ListedColormap(USE_COLORS)
    for ax, (p, grid) in zip(axes.ravel(), grids):
        ax.imshow(grid, cmap=cmap, vmin=0, vmax=2, interpolation="nearest")
        ax.set_xticks([])
        ax.set_yticks([])
        ax.set_title(p.stem, fontsize=9)
    handles = [plt.Rectangle((0, 0), 1, 1, color=c) for c in USE_COLORS]
    fig.legend(handles, USE_NAMES, loc="lower center", ncol=3, fontsize=8,
               frameon=False)
    fig.tight_layout(rect=(0, 0.05, 1, 1))
    out_path = Path(out_path)
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path
