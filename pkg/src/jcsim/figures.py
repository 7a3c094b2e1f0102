"""Figure rendering for the CLI report path.

Renders each delimited table produced by run_scenario into a PNG next
to it. Kept separate from the harness on purpose: computation never
imports matplotlib, and everything here re-reads the serialized tables,
so a figure can always be regenerated from files alone.
"""

import os

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .observables import parse_grid


def _save(fig, path):
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return path


def _render_scan(path, png):
    data = np.loadtxt(path, ndmin=2)
    if data.size == 0:
        return None
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(data[:, 0], data[:, 1], lw=1.2)
    ax.set_xlabel("control ratio")
    ax.set_ylabel("steady-state photon number")
    return _save(fig, png)


def _render_grid(path, png):
    with open(path) as fh:
        grid = parse_grid(fh.read())
    fig, ax = plt.subplots(figsize=(5.4, 4.5))
    mesh = ax.pcolormesh(grid.x_axis, grid.y_axis, grid.values,
                         shading="auto", cmap="viridis")
    fig.colorbar(mesh, ax=ax, label=grid.kind)
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_aspect("equal")
    return _save(fig, png)


def _render_record(path, png):
    data = np.loadtxt(path, ndmin=2)
    fig, axes = plt.subplots(2, 1, figsize=(7, 5), sharex=True)
    axes[0].plot(data[:, 0], data[:, 3], lw=0.8)
    axes[0].set_ylabel("photon number")
    axes[1].plot(data[:, 0], data[:, 2], lw=0.8)
    axes[1].set_ylabel("Im field amplitude")
    axes[1].set_xlabel("time")
    return _save(fig, png)


def _render_ensemble(path, png):
    data = np.loadtxt(path, ndmin=2)
    fig, ax = plt.subplots(figsize=(7, 4))
    t, n, err = data[:, 0], data[:, 1], data[:, 2]
    ax.plot(t, n, lw=1.2)
    ax.fill_between(t, n - err, n + err, alpha=0.3, lw=0)
    ax.set_xlabel("time")
    ax.set_ylabel("ensemble photon number")
    return _save(fig, png)


def _render_branches(path, png):
    fig, ax = plt.subplots(figsize=(6, 4))
    style = {"stable": dict(marker=".", color="C0"),
             "unstable": dict(marker="x", color="C3")}
    with open(path) as fh:
        for line in fh:
            if line.startswith("#") or not line.strip():
                continue
            cells = line.split()
            v = float(cells[0])
            count = int(cells[1])
            roots = [float(c) for c in cells[2:2 + count]]
            labels = cells[2 + count:2 + 2 * count]
            for r, lab in zip(roots, labels):
                ax.plot([v], [r], ls="none", ms=3, **style[lab])
    ax.set_xlabel("control ratio")
    ax.set_ylabel("mean-field photon number")
    return _save(fig, png)


def _render_spectrum(path, png):
    fig, ax = plt.subplots(figsize=(6, 4))
    seen = set()
    with open(path) as fh:
        for line in fh:
            if line.startswith("#") or not line.strip():
                continue
            n, _sign, value, picture, units = line.split()
            tag = f"{picture}/{units}"
            ax.plot([int(n)], [float(value)], "o", ms=3,
                    color=f"C{hash(tag) % 8}",
                    label=None if tag in seen else tag)
            seen.add(tag)
    ax.set_xlabel("excitation index")
    ax.set_ylabel("line value (tagged units)")
    ax.legend(fontsize=7)
    return _save(fig, png)


def _render_boundary(path, png):
    data = np.loadtxt(path, ndmin=2)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(data[:, 0], data[:, 1], "o", label="dim peak")
    ax.plot(data[:, 0], data[:, 2], "s", label="bright peak")
    ax.set_xlabel("coupling to loss ratio")
    ax.set_ylabel("Q peak height")
    ax.legend()
    return _save(fig, png)


def render_outputs(result) -> list[str]:
    """Render every table in a RunResult; returns the PNG paths."""
    rendered = []
    for path in result.tables:
        name = os.path.basename(path)
        png = path[:-4] + ".png" if path.endswith(".txt") else path + ".png"
        if name.startswith("steady_scan"):
            out = _render_scan(path, png)
        elif name.startswith(("qgrid", "wgrid")):
            out = _render_grid(path, png)
        elif name.startswith("traj_seed"):
            out = _render_record(path, png)
        elif name.startswith("ensemble"):
            out = _render_ensemble(path, png)
        elif name.startswith("semiclassical_curve"):
            out = _render_branches(path, png)
        elif name.startswith("spectrum_table"):
            out = _render_spectrum(path, png)
        elif name.startswith("boundary_search"):
            out = _render_boundary(path, png)
        else:
            out = None
        if out:
            rendered.append(out)
    return rendered
