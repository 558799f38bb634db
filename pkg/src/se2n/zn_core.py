"""Arithmetic of Z_N: shifts, the unitary DFT, circulant matrices and cyclicity tests.

Conventions used everywhere in the package:

* ``S(k) v [h] = v[(h - k) mod N]``
* ``dft_zn(v)[k] = N^{-1/2} sum_h exp(-2 pi i k h / N) v[h]``
* ``Circ(v)[i, j] = v[(i - j) mod N]``, so ``S(k) = Circ(e_k)``
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, UnsupportedError

DEFAULT_TOL = 1e-9


@dataclass(frozen=True)
class CyclicIndex:
    value: int
    N: int

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("group order must be positive")
        object.__setattr__(self, "value", int(self.value) % self.N)

    def _coerce(self, other):
        if isinstance(other, CyclicIndex):
            if other.N != self.N:
                raise DimensionError(f"orders differ: {self.N} vs {other.N}")
            return other.value
        return int(other)

    def __add__(self, other):
        return CyclicIndex(self.value + self._coerce(other), self.N)

    __radd__ = __add__

    def __sub__(self, other):
        return CyclicIndex(self.value - self._coerce(other), self.N)

    def __rsub__(self, other):
        return CyclicIndex(self._coerce(other) - self.value, self.N)

    def __neg__(self):
        return CyclicIndex(-self.value, self.N)

    def __int__(self):
        return self.value

    def __index__(self):
        return self.value

    def __eq__(self, other):
        if isinstance(other, CyclicIndex):
            return self.N == other.N and self.value == other.value
        if isinstance(other, (int, np.integer)):
            return self.value == int(other) % self.N
        return NotImplemented

    def __hash__(self):
        return hash((self.value, self.N))


def _as_vector(v):
    v = np.asarray(v)
    if v.ndim != 1:
        raise DimensionError(f"expected a vector, got shape {v.shape}")
    return v


def _index(k, N):
    if isinstance(k, CyclicIndex):
        if k.N != N:
            raise DimensionError(f"index of Z_{k.N} applied to a vector of length {N}")
        return k.value
    return int(k) % N


def shift_apply(k, v):
    """Apply the shift S(k): ``out[h] = v[(h - k) mod N]``."""
    v = _as_vector(v)
    return np.roll(v, _index(k, v.shape[0]))


def shift_matrix(k, N):
    return np.roll(np.eye(N), int(k) % N, axis=0)


def dft_zn(v, axis=-1):
    """Unitary DFT on Z_N along ``axis``."""
    return np.fft.fft(np.asarray(v), axis=axis, norm="ortho")


def idft_zn(v, axis=-1):
    return np.fft.ifft(np.asarray(v), axis=axis, norm="ortho")


def dft_matrix(N):
    """Matrix of ``dft_zn``: ``F[a, b] = exp(-2 pi i a b / N) / sqrt(N)``."""
    idx = np.arange(N)
    return np.exp(-2j * np.pi * np.outer(idx, idx) / N) / np.sqrt(N)


def circ_dense(v):
    v = _as_vector(v)
    N = v.shape[0]
    idx = np.arange(N)
    return v[(idx[:, None] - idx[None, :]) % N]


@dataclass(frozen=True)
class CirculantMatrix:
    """Circulant matrix stored by its first column."""

    generator: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "generator", _as_vector(self.generator))

    @property
    def N(self):
        return self.generator.shape[0]

    def dense(self):
        return circ_dense(self.generator)

    def eigenvalues(self):
        return circ_eigenvalues(self)

    def apply(self, x):
        # circular convolution of the generator with x
        x = np.asarray(x)
        return np.fft.ifft(np.fft.fft(self.generator) * np.fft.fft(x))

    def __matmul__(self, other):
        if isinstance(other, CirculantMatrix):
            if other.N != self.N:
                raise DimensionError("orders differ")
            return CirculantMatrix(self.apply(other.generator))
        return self.dense() @ other

    @classmethod
    def from_dense(cls, M, tol=1e-12):
        M = np.asarray(M)
        gen = M[:, 0].copy()
        if not np.allclose(circ_dense(gen), M, atol=tol, rtol=0):
            raise ValueError("matrix is not circulant")
        return cls(gen)


def circ_eigenvalues(M):
    """Eigenvalues of Circ(v), equal to ``sqrt(N) dft_zn(v)``.

    Entry ``k`` belongs to the eigenvector ``exp(2 pi i k h / N)``.
    """
    gen = M.generator if isinstance(M, CirculantMatrix) else _as_vector(M)
    return np.fft.fft(gen)


def is_cyclic(v, tol=DEFAULT_TOL):
    """True iff the shifts of ``v`` form a basis of C^N.

    The threshold is relative to ``max|v|``.
    """
    v = _as_vector(v)
    scale = np.max(np.abs(v)) if v.size else 0.0
    if scale == 0.0:
        return False
    return bool(np.min(np.abs(circ_eigenvalues(v))) > tol * scale)


def r_shift(w):
    """S_R on the first half: ``(conj w[-1], w[0], ..., w[-2])``."""
    w = _as_vector(w)
    out = np.roll(w.astype(complex), 1)
    out[0] = np.conj(out[0])
    return out


def b_map(w):
    """Embed w in C^{N/2} as the vector ``(w, conj w)`` of C^N."""
    w = _as_vector(w)
    return np.concatenate([w, np.conj(w)])


def b_inverse(v):
    v = _as_vector(v)
    if v.shape[0] % 2:
        raise UnsupportedError("the first-half section needs an even N")
    return v[: v.shape[0] // 2]


@dataclass(frozen=True)
class RCirculantMatrix:
    """The "even circulant" matrix ``(w, S_R w, ..., S_R^{N/2-1} w)``."""

    generator: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "generator", _as_vector(self.generator).astype(complex))

    @property
    def N(self):
        return 2 * self.generator.shape[0]

    def dense(self):
        cols = [self.generator]
        for _ in range(self.generator.shape[0] - 1):
            cols.append(r_shift(cols[-1]))
        return np.stack(cols, axis=1)

    def realified(self):
        C = self.dense()
        return np.block([[C.real, -C.imag], [C.imag, C.real]])


def is_r_cyclic(w, tol=DEFAULT_TOL, N=None):
    """R-cyclicity of ``w`` in C^{N/2}: Circ_R w is invertible.

    Invertibility is decided on the smallest singular value of the
    realified matrix, relative to ``max|w|``.
    """
    w = _as_vector(w)
    if N is not None:
        if N % 2:
            raise UnsupportedError("R-cyclicity is only defined for even N")
        if N != 2 * w.shape[0]:
            raise DimensionError(f"expected {N // 2} entries, got {w.shape[0]}")
    scale = np.max(np.abs(w)) if w.size else 0.0
    if scale == 0.0:
        return False
    sv = np.linalg.svd(RCirculantMatrix(w).realified(), compute_uv=False)
    return bool(sv[-1] > tol * scale)
