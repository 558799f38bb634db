"""Irreducible representations of SE(2,N) = Z_N x| R^2.

Group law: ``(k, x)(h, y) = (k + h, x + R_k y)`` with ``R_k`` the rotation by
``2 pi k / N``.  For a frequency ``lam != 0``

    T^lam(k, x) = diag_h(exp(i <R_h lam, x>)) S(k),

so ``T[i, j] = exp(i <R_i lam, x>)`` when ``i = j + k`` and zero otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, InvalidFrequencyError
from .zn_core import shift_matrix

# angles closer than this to the upper slice boundary wrap to the next sector
_ANGLE_EPS = 1e-12


def rotation(theta):
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def rot(k, N):
    """Matrix of R_k, the rotation by ``2 pi k / N``."""
    return rotation(2 * np.pi * (int(k) % N) / N)


def rotate_points(points, k, N):
    """Apply R_k to the last axis of ``points`` (shape ``(..., 2)``)."""
    points = np.asarray(points, dtype=float)
    return points @ rot(k, N).T


def orbit(lam, N):
    """``(R_0 lam, ..., R_{N-1} lam)`` as an ``(N, 2)`` array."""
    lam = np.asarray(lam, dtype=float)
    return np.stack([rot(k, N) @ lam for k in range(N)])


def canonicalize(lam, N):
    """Return ``(c, ell)`` with ``lam = R_ell c`` and ``c`` in the slice [0, 2 pi / N).

    The zero vector is returned unchanged with ``ell = 0``.
    """
    lam = np.asarray(lam, dtype=float)
    r = np.hypot(lam[0], lam[1])
    if r == 0.0:
        return lam.copy(), 0
    width = 2 * np.pi / N
    ang = np.arctan2(lam[1], lam[0]) % (2 * np.pi)
    ell = int(np.floor(ang / width))
    if ang - ell * width >= width - _ANGLE_EPS:
        ell += 1
    ell %= N
    c = rot(-ell, N) @ lam
    if c[1] < 0 and abs(c[1]) < 1e-15 * r:
        c[1] = 0.0
    return c, ell


@dataclass(frozen=True)
class GroupElement:
    k: int
    x: np.ndarray
    N: int

    def __post_init__(self):
        object.__setattr__(self, "k", int(self.k) % self.N)
        x = np.asarray(self.x, dtype=float).reshape(2)
        object.__setattr__(self, "x", x)

    def __mul__(self, other):
        if other.N != self.N:
            raise DimensionError("elements of different groups")
        return GroupElement(self.k + other.k, self.x + rot(self.k, self.N) @ other.x, self.N)

    def inverse(self):
        return GroupElement(-self.k, -(rot(-self.k, self.N) @ self.x), self.N)

    @classmethod
    def identity(cls, N):
        return cls(0, np.zeros(2), N)


@dataclass(frozen=True)
class IrredRep:
    lam: np.ndarray
    N: int
    canonical: np.ndarray = field(init=False, repr=False)
    offset: int = field(init=False)

    def __post_init__(self):
        lam = np.asarray(self.lam, dtype=float).reshape(2)
        if not np.any(lam):
            raise InvalidFrequencyError("T^0 is reducible; use the layer means instead")
        object.__setattr__(self, "lam", lam)
        c, ell = canonicalize(lam, self.N)
        object.__setattr__(self, "canonical", c)
        object.__setattr__(self, "offset", ell)


def _rep_matrix(lam, k, x, N):
    # no check on lam so that tensor products may hit lam = 0
    phases = np.exp(1j * (orbit(lam, N) @ np.asarray(x, dtype=float)))
    return phases[:, None] * shift_matrix(k, N)


def rep_matrix(rep, g):
    """Dense N x N matrix of ``T^lam(g)``."""
    if g.N != rep.N:
        raise DimensionError("representation and element have different N")
    return _rep_matrix(rep.lam, g.k, g.x, rep.N)


def section(x, N):
    """Decompose a point as ``x = R_h y`` with ``y`` in the spatial slice."""
    y, h = canonicalize(x, N)
    return h, y


def rep_coeff_dual(rep, g, mhat, nhat, section_map=section):
    """Coefficient of T^lam(g) in the dual (character) basis.

    With ``chi_n(h) = exp(2 pi i n h / N) / sqrt(N)`` this is
    ``<T chi_n, chi_m> = conj(n(k)) [n - m](h) J_{n - m}(lam, y) / N`` where
    ``g = (k, R_h y)`` is split by ``section_map``.
    """
    from .apfun import gen_bessel

    N = rep.N
    m = int(mhat) % N
    n = int(nhat) % N
    h, y = section_map(g.x, N)
    char_k = np.exp(-2j * np.pi * n * g.k / N)
    char_h = np.exp(2j * np.pi * ((n - m) % N) * h / N)
    return char_k * char_h * gen_bessel(n - m, rep.lam, y, N) / N


@dataclass(frozen=True)
class InductionReductionMap:
    """The unitary ``A: C^{N x N} -> (+)_h C^N`` with ``(A t)_h(l) = t(l, l + h)``."""

    N: int

    def apply(self, t):
        return ind_red_apply(self, t)

    def adjoint(self, blocks):
        return ind_red_adjoint(self, blocks)

    def matrix(self):
        N = self.N
        A = np.zeros((N * N, N * N))
        for h in range(N):
            for ell in range(N):
                A[h * N + ell, ell * N + (ell + h) % N] = 1.0
        return A


def ind_red_apply(A, t):
    """Return an ``(N, N)`` array whose row ``h`` is the block ``(A t)_h``."""
    t = np.asarray(t)
    N = A.N
    if t.shape != (N, N):
        raise DimensionError(f"expected shape {(N, N)}, got {t.shape}")
    ell = np.arange(N)
    h = np.arange(N)[:, None]
    return t[ell[None, :], (ell[None, :] + h) % N]


def ind_red_adjoint(A, blocks):
    """``A*((v_h)_h)(r, s) = v_{s - r}(r)``."""
    blocks = np.asarray(blocks)
    N = A.N
    if blocks.shape != (N, N):
        raise DimensionError(f"expected shape {(N, N)}, got {blocks.shape}")
    r = np.arange(N)[:, None]
    s = np.arange(N)[None, :]
    return blocks[(s - r) % N, r]
