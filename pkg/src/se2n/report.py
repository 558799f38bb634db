"""Figures for CLI runs, rendered off-screen with the Agg backend."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return path


def inpaint_figure(path, corrupted, restored, bad=None):
    panels = [("input", corrupted), ("restored", restored)]
    if bad is not None:
        panels.insert(1, ("mask", bad.astype(float)))
    fig, axes = plt.subplots(1, len(panels), figsize=(3.2 * len(panels), 3.2))
    for ax, (title, img) in zip(axes, panels):
        ax.imshow(img, cmap="gray", vmin=0, vmax=1, interpolation="nearest")
        ax.set_title(title)
        ax.set_axis_off()
    return _save(fig, path)


def bad_set_figure(path, bad_sizes):
    fig, ax = plt.subplots(figsize=(4, 3))
    ax.plot(np.arange(len(bad_sizes)), bad_sizes, marker="o")
    ax.set_xlabel("round")
    ax.set_ylabel("corrupted pixels")
    return _save(fig, path)


def norms_figure(path, table):
    """Grouped bars of the norm table on a log scale."""
    cols = ["coefficients", "evaluation", "rotated", "translated"]
    rows = [r for r in ("interpolation", "approximation") if r in table]
    x = np.arange(len(cols))
    fig, ax = plt.subplots(figsize=(5.5, 3.2))
    for i, r in enumerate(rows):
        ax.bar(x + (i - 0.5) * 0.38, table[r], width=0.38, label=r)
    ax.axhline(table["image"], color="k", lw=0.8, ls="--", label="samples")
    ax.set_yscale("log")
    ax.set_xticks(x, cols)
    ax.set_ylabel("L2 norm")
    ax.legend(fontsize=8)
    return _save(fig, path)


def features_figure(path, names, matrix):
    matrix = np.atleast_2d(matrix)
    fig, ax = plt.subplots(figsize=(6, 0.4 * len(names) + 1.5))
    ax.imshow(np.log10(np.abs(matrix) + 1e-12), aspect="auto", interpolation="nearest")
    ax.set_yticks(np.arange(len(names)), names, fontsize=7)
    ax.set_xlabel("feature index")
    ax.set_title("log10 |feature|")
    return _save(fig, path)


def freqset_figure(path, F, cert=None):
    pts = F.full_points(include_zero=True)
    fig, ax = plt.subplots(figsize=(4, 4))
    ax.scatter(pts[:, 0], pts[:, 1], s=8, c="0.5", label="F")
    if cert is not None and cert.F1.size:
        ax.scatter(cert.F1[:, 0], cert.F1[:, 1], s=14, c="C3", label="F1")
    ax.set_aspect("equal")
    ax.legend(fontsize=8)
    return _save(fig, path)
