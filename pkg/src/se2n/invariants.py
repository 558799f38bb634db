"""Power spectrum and bispectrum invariants on SE(2,N), full and reduced.

Matrix forms act on a ``SpectralField``; reduced forms act on orbit vectors
``fhat_lam(k) = fhat(R_k lam)``.  Complex scalars are stored as (re, im)
pairs unless ``moduli`` is set.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import block_diag

from .errors import DimensionError, InvalidFrequencyError
from .lift import center_geometric
from .ncft import orbit_vector
from .repr import InductionReductionMap, rot
from .zn_core import b_map, is_cyclic, is_r_cyclic

log = logging.getLogger(__name__)

KINDS = ("PS", "BS", "RPS", "RBS", "RPS+BS")

# feature lengths of a reference hex enumeration; ours differ (enumeration dependent)
REFERENCE_DIMS = {"PS": 136, "BS": 717, "RPS": 816, "RBS": 4417, "RPS+BS": 1533}


@dataclass(frozen=True)
class InvariantConfig:
    N: int = 6
    grid_half: int = 8
    kind: str = "RBS"
    centering: str = "geometric"
    moduli: bool = False

    def __post_init__(self):
        if self.N < 2:
            raise ValueError("N must be at least 2")
        if self.grid_half < 1:
            raise ValueError("grid_half must be at least 1")
        kind = self.kind.upper().replace("RPSBS", "RPS+BS")
        if kind not in KINDS:
            raise ValueError(f"unknown invariant kind {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        if self.centering not in ("geometric", "none"):
            raise ValueError("centering must be 'geometric' or 'none'")


@dataclass
class FeatureVector:
    values: np.ndarray
    kind: str
    index: list = field(default_factory=list)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if not np.all(np.isfinite(self.values)):
            raise ValueError("feature vector has non-finite entries")

    def __len__(self):
        return self.values.shape[0]


# --- full matrix invariants --------------------------------------------------


def _nonzero(lam):
    lam = np.asarray(lam, dtype=float)
    if not np.any(lam):
        raise InvalidFrequencyError("the zero frequency carries no irreducible block")
    return lam


def ps_matrix(F, lam):
    """``F(lam) F(lam)^*``."""
    A = F.matrix(_nonzero(lam))
    return A @ A.conj().T


def tensor_transform(F, lam1, lam2):
    """Transform at ``T^lam1 (x) T^lam2``, assembled from the blocks ``F(lam1 + R_h lam2)``."""
    N = F.N
    lam1 = np.asarray(lam1, dtype=float)
    lam2 = np.asarray(lam2, dtype=float)
    A = InductionReductionMap(N).matrix()
    blocks = [F.matrix(lam1 + rot(h, N) @ lam2) for h in range(N)]
    return A.T @ block_diag(*blocks) @ A


def bs_matrix(F, lam1, lam2):
    """``(F(lam1) (x) F(lam2)) F(T^lam1 (x) T^lam2)^*``, an N^2 x N^2 matrix."""
    return rbs_matrix(F, lam1, lam2, 0)


def rbs_matrix(F, lam1, lam2, k):
    """As ``bs_matrix`` with the first factor taken at ``R_k lam1``."""
    lam1 = _nonzero(lam1)
    lam2 = _nonzero(lam2)
    first = F.matrix(rot(k, F.N) @ lam1)
    return np.kron(first, F.matrix(lam2)) @ tensor_transform(F, lam1, lam2).conj().T


# --- reduced scalar invariants ----------------------------------------------


def hex_frequencies(N, half):
    """Hex lattice points (unit spacing, in DFT bins) with radius <= ``half``.

    Only the sector ``[0, 2 pi / N)`` and the origin are kept, sorted by
    (radius, angle).  The disc keeps every orbit inside the square window.
    """
    n = int(np.ceil(2 * half / np.sqrt(3))) + 1
    a, b = np.meshgrid(np.arange(-n, n + 1), np.arange(-n, n + 1), indexing="ij")
    pts = np.stack([a + 0.5 * b, (np.sqrt(3) / 2) * b], axis=-1).reshape(-1, 2)
    r = np.hypot(pts[:, 0], pts[:, 1])
    ang = np.arctan2(pts[:, 1], pts[:, 0]) % (2 * np.pi)
    keep = (r <= half + 1e-9) & ((r < 1e-12) | (ang < 2 * np.pi / N - 1e-9))
    pts, r, ang = pts[keep], r[keep], ang[keep]
    ang[r < 1e-12] = 0.0
    order = np.lexsort((ang, np.round(r, 9)))
    return pts[order]


def _dot(u, v):
    return np.sum(u * np.conj(v))


def _pack(z, moduli):
    z = np.asarray(z, dtype=complex)
    if moduli:
        return np.abs(z)
    return np.stack([z.real, z.imag], axis=-1).ravel()


def _ps(orbit, lams, N):
    vals, idx = [], []
    for i, lam in enumerate(lams):
        u = orbit(lam)
        vals.append(abs(_dot(u, u)))
        idx.append((i,))
    return np.array(vals, dtype=complex), idx


def _rps(orbit, lams, N):
    vals, idx = [], []
    for i, lam in enumerate(lams):
        u = orbit(lam)
        for h in range(N):
            vals.append(_dot(u, np.roll(u, h)))
            idx.append((i, h))
    return np.array(vals), idx


def _pairs(lams):
    L = len(lams)
    return [(i, j) for i in range(L) for j in range(i, L)]


def _bs(orbit, lams, N):
    vals, idx = [], []
    for i, j in _pairs(lams):
        u, v = orbit(lams[i]), orbit(lams[j])
        vals.append(_dot(u * v, orbit(lams[i] + lams[j])))
        idx.append((i, j))
    return np.array(vals), idx


def _rbs(orbit, lams, N):
    vals, idx = [], []
    for i, j in _pairs(lams):
        u, v = orbit(lams[i]), orbit(lams[j])
        w = orbit(lams[i] + lams[j])
        for h in range(N):
            vals.append(_dot(w, u * np.roll(v, h)))
            idx.append((i, j, h))
    return np.array(vals), idx


_REDUCERS = {"PS": _ps, "RPS": _rps, "BS": _bs, "RBS": _rbs}


def reduced_invariants(orbit, lams, kind, N, moduli=False):
    """Reduced invariants of the orbit map ``orbit(lam) -> C^N`` over ``lams``.

    Enumeration: PS and RPS run over ``lams`` (RPS with ``h`` innermost); BS
    and RBS run over pairs ``i <= j`` (RBS with ``h`` innermost).  PS emits
    ``(|<u, u>|, 0)`` so that the RPS length is N times the PS length.
    ``RPS+BS`` is the concatenation.
    """
    kind = InvariantConfig(N=N, kind=kind).kind
    lams = np.asarray(lams, dtype=float)
    if kind == "RPS+BS":
        a, ia = _rps(orbit, lams, N)
        b, ib = _bs(orbit, lams, N)
        vals = np.concatenate([a, b])
        idx = [("RPS",) + t for t in ia] + [("BS",) + t for t in ib]
    else:
        vals, idx = _REDUCERS[kind](orbit, lams, N)
    return FeatureVector(_pack(vals, moduli), kind, idx)


def _to_gray(image):
    img = np.asarray(image, dtype=float)
    if img.ndim == 3:
        img = img[..., :3] @ np.array([0.299, 0.587, 0.114])
    if img.ndim != 2:
        raise DimensionError("expected a 2-D grayscale or RGB image")
    return img


def image_orbits(image, N):
    """Orbit-vector map of an image through its bilinearly interpolated DFT."""
    fhat = np.fft.fft2(image)
    M = image.shape[0]

    def orbit(b):
        return orbit_vector(fhat, 2 * np.pi * np.asarray(b) / M, N)

    return orbit


def feature_pipeline(image, cfg=InvariantConfig()):
    """Grayscale, centre, DFT, hex window, then ``reduced_invariants``.

    Frequencies are in DFT bins; the orbit vectors are read off the DFT with
    periodic bilinear interpolation.
    """
    img = _to_gray(image)
    if min(img.shape) < 32:
        raise DimensionError(f"image {img.shape} is smaller than 32 x 32")
    if img.shape[0] != img.shape[1]:
        raise DimensionError("expected a square image")
    if cfg.centering == "geometric":
        img = center_geometric(img).image
    lams = hex_frequencies(cfg.N, cfg.grid_half)
    fv = reduced_invariants(image_orbits(img, cfg.N), lams, cfg.kind, cfg.N, cfg.moduli)
    log.info("feature %s length %d (reference %d)", fv.kind, len(fv), REFERENCE_DIMS[fv.kind])
    return fv


def weak_cyclicity_report(orbits, mode="auto", tol=1e-9):
    """Fraction of orbit vectors that are cyclic, and the per-vector flags.

    ``mode`` is ``plain`` (``is_cyclic``), ``real`` (``is_r_cyclic`` on the
    first half) or ``auto`` (plain for odd N, real for even N).
    """
    orbits = np.atleast_2d(np.asarray(orbits))
    N = orbits.shape[1]
    if mode == "auto":
        mode = "plain" if N % 2 else "real"
    if mode == "plain":
        flags = np.array([is_cyclic(v, tol) for v in orbits])
    elif mode == "real":
        flags = np.array([is_r_cyclic(v[: N // 2], tol, N) for v in orbits])
    else:
        raise ValueError(f"unknown mode {mode!r}")
    frac = float(flags.mean()) if flags.size else 0.0
    return frac, flags


def real_orbit_defect(orbit):
    """Distance of an orbit vector from ``b_map`` of its first half."""
    orbit = np.asarray(orbit)
    return float(np.abs(orbit - b_map(orbit[: orbit.shape[0] // 2])).max())


def nearest_neighbour(train_x, train_y, test_x):
    """Trivial 1-NN labels under the Euclidean distance."""
    train_x = np.asarray(train_x, dtype=float)
    test_x = np.atleast_2d(np.asarray(test_x, dtype=float))
    d = ((test_x[:, None, :] - train_x[None, :, :]) ** 2).sum(axis=-1)
    return np.asarray(train_y)[np.argmin(d, axis=1)]


def feature_distance(a, b):
    """Relative Euclidean distance between two feature vectors."""
    a = np.asarray(getattr(a, "values", a))
    b = np.asarray(getattr(b, "values", b))
    scale = max(np.linalg.norm(a), np.linalg.norm(b), 1e-300)
    return float(np.linalg.norm(a - b) / scale)
