"""Synthetic inputs and small reproducible experiments used by the CLI and tests."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import map_coordinates

from .apfun import (
    FrequencySet,
    SpatialSampleSet,
    ap_approximate,
    ap_evaluate,
    ap_interpolate,
    ap_rotate,
    ap_translate,
    build_fb_operator,
    spiral_set,
    weights_profile,
)


def stripe_with_gap(M=128, height=2, gap=1, lo=0.2, hi=0.8):
    """Horizontal bright stripe through the middle row, cut by a vertical gap.

    Returns ``(image, bad)``: the clean image and the mask of gap pixels.
    """
    img = np.full((M, M), float(lo))
    r0 = M // 2 - height // 2
    img[r0 : r0 + height, :] = hi
    bad = np.zeros((M, M), dtype=bool)
    c0 = M // 2 - gap // 2
    bad[r0 : r0 + height, c0 : c0 + gap] = True
    return img, bad


def blob_image(M=64, n_blobs=6, seed=1):
    """Sum of isotropic Gaussian blobs around the grid centre."""
    rng = np.random.default_rng(seed)
    x = np.arange(M) - M // 2
    X1, X2 = np.meshgrid(x, x, indexing="ij")
    f = np.zeros((M, M))
    for _ in range(n_blobs):
        c = rng.uniform(-M / 3, M / 3, 2)
        s = rng.uniform(M / 16, M / 6.4)
        f += rng.uniform(0.3, 1.0) * np.exp(-((X1 - c[0]) ** 2 + (X2 - c[1]) ** 2) / (2 * s * s))
    return f


def sample_image(img, points, scale):
    """Bilinear samples at ``points`` (units), pixel = ``point / scale`` from the centre."""
    img = np.asarray(img, dtype=float)
    M1, M2 = img.shape
    pix = np.asarray(points, dtype=float) / scale
    return map_coordinates(img, [pix[..., 0] + M1 // 2, pix[..., 1] + M2 // 2], order=1, mode="grid-wrap")


@dataclass(frozen=True)
class NormsRegime:
    N: int = 8
    Q: int = 32
    rmax: float = 4.0
    radius_px: float = 30.0
    xi: tuple = (1.0, 1.8)
    gamma: int = 3
    alpha: float = 100.0


def default_sets(regime=NormsRegime()):
    rho, alpha = spiral_set(regime.N, regime.Q, regime.rmax)
    return SpatialSampleSet(rho, alpha, regime.N), FrequencySet(rho, alpha, regime.N)


def norms_table(img, E=None, F=None, regime=NormsRegime(), paper_sign=False):
    """L2 norms of coefficients, evaluation, rotated and translated evaluation.

    Returns ``{"interpolation": row, "approximation": row, "image": norm}``
    where each row is ``(|c|, |ev c|, |ev R c|, |ev tau c|)`` together with
    the coefficient arrays under ``"coeffs"``.
    """
    if E is None or F is None:
        E, F = default_sets(regime)
    scale = regime.rmax / regime.radius_px
    samples = sample_image(img, E.full(), scale).astype(complex)
    blocks = build_fb_operator(E, F)
    coeffs = {
        "interpolation": ap_interpolate(samples, E, F, blocks),
        "approximation": ap_approximate(samples, E, F, weights_profile(F, regime.alpha), blocks, paper_sign),
    }
    out = {"image": float(np.linalg.norm(samples)), "coeffs": coeffs}
    for name, c in coeffs.items():
        ev = ap_evaluate(c, E, F, blocks)
        rt = ap_evaluate(ap_rotate(c, regime.gamma, F), E, F, blocks)
        tr = ap_evaluate(ap_translate(c, np.asarray(regime.xi), F), E, F, blocks)
        out[name] = tuple(float(np.linalg.norm(v)) for v in (c, ev, rt, tr))
    return out
