"""Non-commutative Fourier transform of sampled functions on SE(2,N).

A group function is an array ``f[k, i1, i2]`` with layer ``k`` sampled on an
``M x M`` periodic pixel grid, ``x = (i1, i2)``.  Planar DFTs are unnormalised,
``fhat(mu) = sum_x f(x) exp(-i <mu, x>)``, and bin ``(p, q)`` stands for
``mu = 2 pi (p, q) / M``.  The transform at ``lam`` is

    F(lam)[i, j] = fhat_{(j - i) mod N}(R_j lam).

Rotated bins are exact lattice points when N divides 4; otherwise the DFT is
read off by periodic bilinear interpolation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, IncompleteFieldError
from .repr import rot

EXACT_ORDERS = (1, 2, 4)
_INT_TOL = 1e-9


def centered_bins(M):
    """Signed bin index of each DFT position, in ``[-M/2, M/2)``."""
    return np.rint(np.fft.fftfreq(M) * M).astype(int)


def rotate_bins(bins, k, N):
    """Rotate bin coordinates (shape ``(..., 2)``) by R_k, snapping to integers when exact."""
    out = np.asarray(bins, dtype=float) @ rot(k, N).T
    if N in EXACT_ORDERS:
        snapped = np.rint(out)
        if np.all(np.abs(out - snapped) < _INT_TOL):
            return snapped
    return out


def eval_dft(fhat, bins):
    """Evaluate periodic DFT arrays at (possibly fractional) bins.

    ``fhat`` has shape ``(..., M, M)`` and ``bins`` shape ``(P, 2)``; the
    result has shape ``(..., P)``.  Integer bins are read exactly, others by
    periodic bilinear interpolation.
    """
    fhat = np.asarray(fhat)
    bins = np.asarray(bins, dtype=float)
    M = fhat.shape[-1]
    if fhat.shape[-2] != M:
        raise DimensionError("DFT arrays must be square")
    p, q = bins[..., 0], bins[..., 1]
    rp, rq = np.rint(p), np.rint(q)
    if np.all(np.abs(p - rp) < _INT_TOL) and np.all(np.abs(q - rq) < _INT_TOL):
        return fhat[..., rp.astype(int) % M, rq.astype(int) % M]
    p0, q0 = np.floor(p), np.floor(q)
    tp, tq = p - p0, q - q0
    i0, j0 = p0.astype(int) % M, q0.astype(int) % M
    i1, j1 = (i0 + 1) % M, (j0 + 1) % M
    return (
        fhat[..., i0, j0] * (1 - tp) * (1 - tq)
        + fhat[..., i1, j0] * tp * (1 - tq)
        + fhat[..., i0, j1] * (1 - tp) * tq
        + fhat[..., i1, j1] * tp * tq
    )


def canonical_slice(N, M):
    """Canonical frequency representatives on the ``M x M`` DFT lattice.

    Returns ``(bins, stab)``: integer bins of shape ``(L, 2)`` and the size of
    the stabiliser of each one.  For N dividing 4 the lattice is rotation
    closed and each nonzero orbit is represented by its element of smallest
    polar angle; Nyquist bins can have nontrivial stabilisers.  For other N
    the slice is the set of nonzero bins with angle in ``[0, 2 pi / N)``.
    """
    c = centered_bins(M)
    P, Q = np.meshgrid(c, c, indexing="ij")
    pts = np.stack([P.ravel(), Q.ravel()], axis=1)
    pts = pts[np.any(pts != 0, axis=1)]
    ang = np.arctan2(pts[:, 1], pts[:, 0]) % (2 * np.pi)
    if N not in EXACT_ORDERS:
        keep = ang < 2 * np.pi / N - 1e-12
        order = np.lexsort((ang[keep], np.hypot(*pts[keep].T)))
        return pts[keep][order], np.ones(int(keep.sum()), dtype=int)

    def wrap(b):
        return c[np.asarray(b, dtype=int) % M]

    seen = {}
    for p in map(tuple, pts):
        if p in seen:
            continue
        members = {tuple(wrap(rotate_bins(np.array(p), k, N))) for k in range(N)}
        rep = min(members, key=lambda b: (np.arctan2(b[1], b[0]) % (2 * np.pi), b))
        for m in members:
            seen[m] = (rep, N // len(members))
    reps = sorted({v for v in seen.values()}, key=lambda v: (np.hypot(*v[0]), np.arctan2(v[0][1], v[0][0]) % (2 * np.pi)))
    bins = np.array([r for r, _ in reps], dtype=int).reshape(-1, 2)
    stab = np.array([s for _, s in reps], dtype=int)
    return bins, stab


def plancherel_weights(N, M, stab):
    """Weight of each slice frequency in the discrete Plancherel sum.

    Exact lattices use ``1 / (|Stab| M^2)``.  Otherwise the ``N L`` orbit
    points stand in for the ``M^2 - 1`` nonzero bins and get equal shares.
    """
    stab = np.asarray(stab)
    if N in EXACT_ORDERS:
        return 1.0 / (stab * M * M)
    L = stab.shape[0]
    return np.full(L, (M * M - 1) / (N * L * M * M))


@dataclass
class SpectralField:
    """NCFT data on the canonical lattice slice plus the lam = 0 slot."""

    N: int
    M: int
    layer_hat: np.ndarray  # (N, M, M) planar DFTs of the layers
    bins: np.ndarray  # (L, 2) integer bins
    stab: np.ndarray  # (L,)
    weights: np.ndarray  # (L,)
    mats: np.ndarray  # (L, N, N)
    dc: np.ndarray  # (N,) unnormalised DFT over k of the layer sums

    @property
    def lambdas(self):
        return 2 * np.pi * self.bins / self.M

    def index(self, b):
        b = np.asarray(b)
        hit = np.nonzero(np.all(self.bins == b, axis=1))[0]
        if hit.size == 0:
            raise KeyError(f"bin {tuple(b)} is not a canonical slice frequency")
        return int(hit[0])

    def __getitem__(self, b):
        return self.mats[self.index(b)]

    def matrix(self, lam):
        """``F(lam)`` at an arbitrary frequency (radians per pixel)."""
        lam = np.asarray(lam, dtype=float)
        b = lam * self.M / (2 * np.pi)
        return _matrix_at_bins(self.layer_hat, b[None, :], self.N)[0]

    def __len__(self):
        return self.bins.shape[0]


def _matrix_at_bins(layer_hat, bins, N):
    L = bins.shape[0]
    mats = np.empty((L, N, N), dtype=complex)
    i = np.arange(N)
    for j in range(N):
        vals = eval_dft(layer_hat, rotate_bins(bins, j, N))  # (N, L)
        mats[:, :, j] = vals[(j - i) % N].T
    return mats


def ncft_forward(f):
    """Forward NCFT of ``f[k, i1, i2]`` on the canonical lattice slice."""
    f = np.asarray(f)
    if f.ndim != 3 or f.shape[1] != f.shape[2] or f.shape[1] < 2:
        raise DimensionError(f"expected an (N, M, M) array with M >= 2, got {f.shape}")
    N, M = f.shape[0], f.shape[1]
    layer_hat = np.fft.fft2(f, axes=(1, 2))
    bins, stab = canonical_slice(N, M)
    mats = _matrix_at_bins(layer_hat, bins, N)
    dc = np.fft.fft(layer_hat[:, 0, 0])
    return SpectralField(N, M, layer_hat, bins, stab, plancherel_weights(N, M, stab), mats, dc)


def ncft_inverse(F, M=None):
    """Discrete Plancherel inversion ``f(a) = sum_lam w(lam) tr(F(lam) T^lam(a)) + dc part``.

    Only the slice matrices and ``dc`` are read, never ``layer_hat``.
    """
    N = F.N
    M = F.M if M is None else int(M)
    bins, stab = canonical_slice(N, M)
    if F.bins.shape != bins.shape or not np.array_equal(F.bins, bins):
        raise IncompleteFieldError(f"field does not cover the canonical slice for N={N}, M={M}")
    w = plancherel_weights(N, M, stab)
    dc_part = np.fft.ifft(F.dc) / (M * M)
    j = np.arange(N)
    if N in EXACT_ORDERS:
        acc = np.zeros((N, M, M), dtype=complex)
        for jj in range(N):
            rb = rotate_bins(bins, jj, N).astype(int) % M
            for k in range(N):
                np.add.at(acc[k], (rb[:, 0], rb[:, 1]), w * F.mats[:, (jj - k) % N, jj])
        out = np.fft.ifft2(acc, axes=(1, 2)) * (M * M)
        return out + dc_part[:, None, None]
    x = np.arange(M)
    out = np.empty((N, M, M), dtype=complex)
    mu = np.stack([rotate_bins(bins, jj, N) for jj in range(N)]) * (2 * np.pi / M)  # (N, L, 2)
    E1 = np.exp(1j * mu[..., 0, None] * x)  # (N, L, M)
    E2 = np.exp(1j * mu[..., 1, None] * x)
    for k in range(N):
        coef = F.mats[:, (j - k) % N, j].T * w  # (N, L)
        out[k] = np.einsum("jl,jla,jlb->ab", coef, E1, E2) + dc_part[k]
    return out


def parseval_sides(F, f):
    """Return ``(spectral energy, spatial energy)`` for a Parseval check."""
    N, M = F.N, F.M
    spectral = np.sum(F.weights * np.sum(np.abs(F.mats) ** 2, axis=(1, 2)))
    spectral += np.sum(np.abs(F.dc) ** 2) / (N * M * M)
    return float(spectral), float(np.sum(np.abs(np.asarray(f)) ** 2))


def orbit_vector(fhat, lam, N):
    """``out[k] = fhat(R_k lam)`` for a planar DFT array ``fhat``.

    ``lam`` is in radians per pixel.  With this orientation
    ``S(h) orbit_vector(lam) = orbit_vector(R_{-h} lam)``.
    """
    fhat = np.asarray(fhat)
    M = fhat.shape[-1]
    b = np.asarray(lam, dtype=float) * M / (2 * np.pi)
    pts = np.stack([rotate_bins(b, k, N) for k in range(N)])
    return eval_dft(fhat, pts)


def ft_of_lift(psi_orbit, f_orbit):
    """Rank-one transform of a left-invariant lift: ``out[i, j] = psi_orbit[i] f_orbit[j]``."""
    psi_orbit = np.asarray(psi_orbit)
    f_orbit = np.asarray(f_orbit)
    if psi_orbit.shape != f_orbit.shape or psi_orbit.ndim != 1:
        raise DimensionError("orbit vectors must be 1-D and of equal length")
    return np.outer(psi_orbit, f_orbit)


def left_translate(f, a):
    """``(Lambda(a) f)(l, y) = f(l - k, R_{-k}(y - x))`` for grid-exact ``a = (k, x)``.

    Requires N dividing 4 and integer ``x`` so that no resampling is needed.
    """
    f = np.asarray(f)
    N, M = f.shape[0], f.shape[1]
    k = a.k
    x = np.rint(a.x).astype(int)
    if N not in EXACT_ORDERS or not np.allclose(a.x, x):
        raise ValueError("left_translate needs N | 4 and an integer translation")
    out = np.empty_like(f)
    for ell in range(N):
        out[ell] = rotate_image(f[(ell - k) % N], k, N)
    return np.roll(out, shift=(x[0], x[1]), axis=(1, 2))


def rotate_image(img, k, N):
    """``g(y) = img(R_{-k} y)`` on the periodic grid (exact for N | 4)."""
    if N not in EXACT_ORDERS:
        raise ValueError("pixel-exact rotation needs N | 4")
    img = np.asarray(img)
    M = img.shape[0]
    c = np.arange(M)
    I1, I2 = np.meshgrid(c, c, indexing="ij")
    src = np.stack([I1, I2], axis=-1) @ rot(-k, N).T
    src = np.rint(src).astype(int) % M
    return img[src[..., 0], src[..., 1]]
