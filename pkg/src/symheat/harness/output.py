"""CSV layer files and SVG line plots."""
from __future__ import annotations

import csv
from pathlib import Path
from typing import Sequence

import numpy as np

from ..errors import ParseError
from ..grid import MeshLayer

LAYER_COLUMNS = ("step", "t", "x", "u")


def fmt(v: float) -> str:
    # 17 significant digits round-trip every double
    return format(float(v), ".17g")


def write_layers(path, history: Sequence[MeshLayer]) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(LAYER_COLUMNS)
        for step, layer in enumerate(history):
            for x, u in zip(layer.xs, layer.us):
                w.writerow((step, fmt(layer.t), fmt(x), fmt(u)))
    return path


def read_layers(path) -> list[MeshLayer]:
    rows: dict[int, list] = {}
    times: dict[int, float] = {}
    try:
        with Path(path).open(newline="") as fh:
            reader = csv.DictReader(fh)
            if tuple(reader.fieldnames or ()) != LAYER_COLUMNS:
                raise ParseError(f"{path}: expected columns {LAYER_COLUMNS}")
            for row in reader:
                step = int(row["step"])
                times[step] = float(row["t"])
                rows.setdefault(step, []).append((float(row["x"]), float(row["u"])))
    except (KeyError, ValueError) as exc:
        raise ParseError(f"{path}: {exc}") from exc
    out = []
    for step in sorted(rows):
        xs, us = zip(*rows[step])
        out.append(MeshLayer(times[step], xs, us))
    return out


def write_table(path, header: Sequence[str], rows) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return path


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "symheat"
    return plt


def _save(fig, path) -> Path:
    fig.savefig(path, format="svg", metadata={"Date": None})
    _pyplot().close(fig)
    return Path(path)


def plot_profiles(path, history: Sequence[MeshLayer], layers: Sequence[int], oracle=None,
                  ylabel: str = "u") -> Path:
    """u(x) on selected layers; dashed lines show the oracle when given."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for k in layers:
        layer = history[k]
        ax.plot(layer.xs, layer.us, lw=1.2, label=f"t = {layer.t:.4g}")
        if oracle is not None:
            ax.plot(layer.xs, oracle.u(layer.xs, layer.t), "k--", lw=0.6)
    ax.set_xlabel("x")
    ax.set_ylabel(ylabel)
    ax.legend(fontsize=8)
    ax.grid(True, lw=0.3)
    return _save(fig, path)


def plot_mesh(path, history: Sequence[MeshLayer]) -> Path:
    """Node trajectories in the (x, t) plane."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(7, 4.5))
    t = np.array([layer.t for layer in history])
    X = np.array([layer.xs for layer in history])
    ax.plot(X, t, "k-", lw=0.5)
    ax.set_xlabel("x")
    ax.set_ylabel("t")
    ax.set_title("node trajectories")
    return _save(fig, path)


def plot_errors(path, series: dict, title: str = "max relative error") -> Path:
    """Error curves against t on a log axis; ``series`` maps label -> (t, err)."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for label, (t, err) in series.items():
        err = np.asarray(err, dtype=float)
        ax.semilogy(t, np.maximum(err, 1e-17), lw=1.2, label=label)
    ax.set_xlabel("t")
    ax.set_ylabel("error")
    ax.set_title(title)
    ax.legend(fontsize=8)
    ax.grid(True, which="both", lw=0.3)
    return _save(fig, path)
