"""Static figures for command-line reports (matplotlib, Agg backend)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from mpl_toolkits.mplot3d.art3d import Poly3DCollection  # noqa: E402

from .surface import TriSurface  # noqa: E402

STYLE = {
    "figure.figsize": (6.0, 5.0),
    "figure.dpi": 110,
    "font.size": 9,
    "axes.titlesize": 10,
    "savefig.bbox": "tight",
}


def _axes3d(s: TriSurface, title):
    fig = plt.figure()
    ax = fig.add_subplot(projection="3d")
    lo, hi = s.vertices.min(axis=0), s.vertices.max(axis=0)
    mid, half = (lo + hi) / 2, (hi - lo).max() / 2
    for setter, c in zip((ax.set_xlim, ax.set_ylim, ax.set_zlim), mid):
        setter(c - half, c + half)
    ax.set_box_aspect((1, 1, 1))
    ax.set_title(title)
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_zlabel("z")
    return fig, ax


def _mesh(ax, s: TriSurface, alpha=0.12):
    tris = s.vertices[s.faces]
    ax.add_collection3d(Poly3DCollection(tris, facecolor="0.8", edgecolor="0.45",
                                         linewidth=0.3, alpha=alpha))


def _save(fig, out):
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out)
    plt.close(fig)
    return out


def plot_paths(s: TriSurface, paths, out, title="", markers=()):
    """Mesh with geodesic polylines (3D arrays) and labelled marker points."""
    with plt.rc_context(STYLE):
        fig, ax = _axes3d(s, title)
        _mesh(ax, s)
        for k, pts in enumerate(paths):
            pts = np.asarray(pts, dtype=float)
            ax.plot(pts[:, 0], pts[:, 1], pts[:, 2], lw=1.6, color=f"C{k}")
        for label, p in markers:
            ax.scatter(*np.asarray(p, dtype=float), s=18, color="k", depthshade=False)
            ax.text(*np.asarray(p, dtype=float), f" {label}")
        return _save(fig, out)


def plot_field(s: TriSurface, xyz, values, out, title="distance field", source=None):
    """Scatter of field samples coloured by distance."""
    xyz = np.asarray(xyz, dtype=float)
    with plt.rc_context(STYLE):
        fig, ax = _axes3d(s, title)
        _mesh(ax, s, alpha=0.05)
        sc = ax.scatter(xyz[:, 0], xyz[:, 1], xyz[:, 2], c=values, s=4, cmap="viridis",
                        depthshade=False)
        if source is not None:
            ax.scatter(*np.asarray(source, dtype=float), s=30, color="r", marker="*")
        fig.colorbar(sc, ax=ax, shrink=0.7, label="geodesic distance")
        return _save(fig, out)


def plot_histogram(values, out, title="", xlabel="value", mark=None):
    """Histogram of sampled objective values, with an optional marked value."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(5.0, 3.2))
        ax.hist(np.asarray(values, dtype=float), bins=40, color="0.6")
        if mark is not None:
            ax.axvline(mark, color="C3", lw=1.2, label=f"refined {mark:.6f}")
            ax.legend(frameon=False)
        ax.set_xlabel(xlabel)
        ax.set_ylabel("samples")
        ax.set_title(title)
        return _save(fig, out)
