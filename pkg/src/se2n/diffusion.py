"""Hypoelliptic heat evolution on SE(2,N) and the masking inpainting procedure."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy import linalg, ndimage

from .apfun import parallel_map
from .errors import DegenerateInputError, DimensionError
from .lift import gradient_lift
from .zn_core import CirculantMatrix

log = logging.getLogger(__name__)

EPS_FLOOR = 1.0 / 255


@dataclass(frozen=True)
class DiffusionParams:
    N: int = 30
    beta: float = 25.0
    T: float = 1.0
    steps: int = 10

    def __post_init__(self):
        if self.N < 1 or self.steps < 1:
            raise ValueError("N and steps must be positive")
        if self.beta < 0 or self.T < 0:
            raise ValueError("beta and T must be nonnegative")


@dataclass
class MaskState:
    good: np.ndarray
    bad: np.ndarray

    def __post_init__(self):
        self.good = np.asarray(self.good, dtype=bool)
        self.bad = np.asarray(self.bad, dtype=bool)
        if self.good.shape != self.bad.shape:
            raise DimensionError("good and bad masks differ in shape")
        if np.any(self.good & self.bad) or not np.all(self.good | self.bad):
            raise ValueError("good and bad must partition the grid")

    @classmethod
    def from_bad(cls, bad):
        bad = np.asarray(bad, dtype=bool)
        return cls(~bad, bad.copy())

    @classmethod
    def from_image(cls, f):
        """Corrupted pixels are the zeros of ``f``."""
        return cls.from_bad(np.asarray(f) == 0)


def jump_generator(N, beta):
    """``Xi_N = -beta I + beta/2 (S + S^{-1})`` as a circulant matrix."""
    g = np.zeros(N)
    g[0] -= beta
    g[1 % N] += beta / 2
    g[-1 % N] += beta / 2
    return CirculantMatrix(g)


def thetas(N):
    return 2 * np.pi * np.arange(N) / N


def hat_delta(lam, p):
    """``-1/2 diag((lam1 cos th_k + lam2 sin th_k)^2) + Xi_N``."""
    lam = np.asarray(lam, dtype=float)
    th = thetas(p.N)
    c = lam[0] * np.cos(th) + lam[1] * np.sin(th)
    return jump_generator(p.N, p.beta).dense() - 0.5 * np.diag(c**2)


def spatial_symbol(N, M, paper_coefficients=False):
    """``a[r, k, l] = cos th_r sin(2 pi k / M) + sin th_r sin(2 pi l / M)``.

    ``paper_coefficients`` selects the double-cosine variant with ``cos th_r`` in
    both terms.
    """
    th = thetas(N)
    s = np.sin(2 * np.pi * np.arange(M) / M)
    second = np.cos(th) if paper_coefficients else np.sin(th)
    return np.cos(th)[:, None, None] * s[None, :, None] + second[:, None, None] * s[None, None, :]


class CyclicTridiagonal:
    """Batched solver for periodic tridiagonal systems with shared structure.

    Row ``i`` reads ``lo[i] x[i-1] + diag[i] x[i] + up[i] x[i+1]`` with indices
    mod n.  Arrays have shape ``(..., n)`` with ``n >= 3``; the factorisation
    (Thomas sweep plus the Sherman-Morrison correction vector) is computed
    once and reused by ``solve``.
    """

    def __init__(self, lo, diag, up):
        lo, diag, up = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (lo, diag, up)))
        n = diag.shape[-1]
        if n < 3:
            raise ValueError("cyclic Thomas needs n >= 3")
        self.n = n
        alpha = lo[..., 0]  # A[0, n-1]
        beta = up[..., -1]  # A[n-1, 0]
        gamma = -diag[..., 0]
        b = diag.copy()
        b[..., 0] -= gamma
        b[..., -1] -= alpha * beta / gamma
        self.lo, self.up = lo, up
        # forward elimination coefficients
        cp = np.empty_like(b)
        den = np.empty_like(b)
        den[..., 0] = b[..., 0]
        cp[..., 0] = up[..., 0] / den[..., 0]
        for i in range(1, n):
            den[..., i] = b[..., i] - lo[..., i] * cp[..., i - 1]
            cp[..., i] = up[..., i] / den[..., i]
        self.cp, self.den = cp, den
        u = np.zeros_like(b)
        u[..., 0] = gamma
        u[..., -1] = beta
        self.z = self._tridiag(u)
        self.alpha, self.gamma = alpha, gamma
        self.fact_den = 1.0 + self.z[..., 0] + alpha * self.z[..., -1] / gamma

    def _tridiag(self, r):
        n = self.n
        y = np.empty(np.broadcast_shapes(r.shape, self.den.shape), dtype=np.result_type(r, self.den))
        y[..., 0] = r[..., 0] / self.den[..., 0]
        for i in range(1, n):
            y[..., i] = (r[..., i] - self.lo[..., i] * y[..., i - 1]) / self.den[..., i]
        for i in range(n - 2, -1, -1):
            y[..., i] -= self.cp[..., i] * y[..., i + 1]
        return y

    def solve(self, r):
        x = self._tridiag(np.asarray(r))
        fact = (x[..., 0] + self.alpha * x[..., -1] / self.gamma) / self.fact_den
        return x - fact[..., None] * self.z


def _cn_stepper(N, beta, diag_decay, tau):
    """Return ``step(psi)`` for CN on ``d psi/dt = Xi psi - diag_decay psi``.

    ``psi`` and ``diag_decay`` have shape ``(..., N)``.
    """
    off = beta / 2
    if N >= 3:
        diag = 1.0 + 0.5 * tau * (beta + diag_decay)
        lo = np.full_like(diag, -0.5 * tau * off)
        solver = CyclicTridiagonal(lo, diag, lo)

        def step(psi):
            xi_psi = -beta * psi + off * (np.roll(psi, 1, axis=-1) + np.roll(psi, -1, axis=-1))
            rhs = psi + 0.5 * tau * (xi_psi - diag_decay * psi)
            return solver.solve(rhs)

        return step
    Xi = jump_generator(N, beta).dense()
    A = Xi[None, :, :] - diag_decay.reshape(-1, N)[:, :, None] * np.eye(N)[None]
    I = np.eye(N)[None]
    Lm = I - 0.5 * tau * A
    Rm = I + 0.5 * tau * A
    shape = diag_decay.shape

    def step(psi):
        flat = psi.reshape(-1, N)
        rhs = np.einsum("bij,bj->bi", Rm, flat)
        return np.linalg.solve(Lm, rhs[..., None])[..., 0].reshape(shape)

    return step


def spatial_generator_decay(N, M, dx=None, paper_coefficients=False):
    """Per-bin diagonal ``a^2 / (2 dx^2)`` arranged as ``(M, M, N)``; ``dx`` defaults to ``1/sqrt(M)``."""
    dx = 1.0 / np.sqrt(M) if dx is None else float(dx)
    a = spatial_symbol(N, M, paper_coefficients)
    return np.moveaxis(a**2 / (2 * dx * dx), 0, -1)


def evolve_spatial(psi0, p, dx=None, paper_coefficients=False):
    """Crank-Nicolson evolution of ``psi0[k, i1, i2]`` over time ``p.T`` in ``p.steps`` steps.

    Each layer is transformed by a 2-D DFT; every frequency pair then carries
    an independent N-dimensional system ``Xi_N - (1/(2 dx^2)) diag(a^2)``
    solved by the cyclic Thomas algorithm.
    """
    psi0 = np.asarray(psi0)
    if psi0.ndim != 3 or psi0.shape[0] != p.N or psi0.shape[1] != psi0.shape[2]:
        raise DimensionError(f"expected ({p.N}, M, M), got {psi0.shape}")
    if p.T == 0:
        return psi0.copy()
    N, M = p.N, psi0.shape[1]
    decay = spatial_generator_decay(N, M, dx, paper_coefficients)
    tau = p.T / p.steps
    step = _cn_stepper(N, p.beta, decay, tau)
    state = np.moveaxis(np.fft.fft2(psi0, axes=(1, 2)), 0, -1)  # (M, M, N)
    for _ in range(p.steps):
        state = step(state)
    out = np.fft.ifft2(np.moveaxis(state, -1, 0), axes=(1, 2))
    return out.real if np.isrealobj(psi0) else out


def ap_generator(lam, N, beta):
    """Dense ``N^2 x N^2`` generator on ``h[k, n]`` (flattened as ``k * N + n``)."""
    lam = np.asarray(lam, dtype=float)
    th = thetas(N)
    G = np.zeros((N * N, N * N))
    for k in range(N):
        for n in range(N):
            i = k * N + n
            c = lam[0] * np.cos(th[(k + n) % N]) + lam[1] * np.sin(th[(k + n) % N])
            G[i, i] += -(c**2) - beta
            G[i, ((k + 1) % N) * N + (n - 1) % N] += beta / 2
            G[i, ((k - 1) % N) * N + (n + 1) % N] += beta / 2
    return G


def evolve_ap(coeffs, F, p):
    """Evolve group AP coefficients ``h[k, n, q]`` by the exact matrix exponential per frequency."""
    coeffs = np.asarray(coeffs)
    N = p.N
    if coeffs.shape != (N, N, F.Q):
        raise DimensionError(f"expected shape {(N, N, F.Q)}, got {coeffs.shape}")
    lam = F.lambdas

    def one(q):
        E = linalg.expm(p.T * ap_generator(lam[q], N, p.beta))
        return E @ coeffs[:, :, q].reshape(-1)

    cols = parallel_map(one, range(F.Q))
    return np.stack([c.reshape(N, N) for c in cols], axis=-1)


def project(psi):
    return np.asarray(psi).sum(axis=0)


def nine_point_average(f):
    return ndimage.uniform_filter(np.asarray(f, dtype=float), size=3, mode="wrap")


def _bad_boundary(bad):
    """Bad pixels with at least one good 8-neighbour."""
    good = ~bad
    near_good = ndimage.binary_dilation(good, structure=np.ones((3, 3), dtype=bool), border_value=0)
    return bad & near_good


@dataclass
class InpaintResult:
    image: np.ndarray
    bad_sizes: list
    mass_residuals: list


def inpaint_masked(f, mask, p, n_intervals=10, dx=None, paper_coefficients=False, return_log=False):
    """Masking inpainting: alternate diffusion with re-imposition on trusted pixels.

    Each round diffuses for ``T / n_intervals``, rescales good pixels by
    ``sigma = (h_ref + h) / (2 h)`` with ``h = max_k psi``, then promotes bad
    boundary pixels with ``f >= (9-point average of f)``.  A promoted pixel
    keeps its value at promotion time as reference.
    """
    f = np.asarray(f, dtype=float)
    if f.ndim != 2:
        raise DimensionError("expected a 2-D image")
    mask = mask if isinstance(mask, MaskState) else MaskState.from_bad(mask)
    if mask.good.shape != f.shape:
        raise DimensionError("mask and image differ in shape")
    if not mask.good.any():
        raise DegenerateInputError("every pixel is marked as corrupted")
    good, bad = mask.good.copy(), mask.bad.copy()
    f0 = np.clip(f, 0.0, 1.0)
    f_eps = np.maximum(np.where(bad, 0.0, f0), EPS_FLOOR)
    psi = gradient_lift(f_eps, p.N)
    h_ref = psi.max(axis=0)
    sub = DiffusionParams(p.N, p.beta, p.T / n_intervals, p.steps)
    bad_sizes = [int(bad.sum())]
    residuals = []
    for r in range(n_intervals):
        mass0 = psi.sum()
        psi = evolve_spatial(psi, sub, dx, paper_coefficients)
        residuals.append(abs(psi.sum() - mass0) / max(abs(mass0), 1e-300))
        h = psi.max(axis=0)
        safe = np.where(np.abs(h) > 1e-300, h, 1.0)
        sigma = np.where(good, 0.5 * (h_ref + h) / safe, 1.0)
        psi = psi * sigma[None]
        fr = project(psi)
        W = _bad_boundary(bad) & (fr >= nine_point_average(fr))
        h_ref = np.where(W, h * sigma, h_ref)
        good |= W
        bad &= ~W
        bad_sizes.append(int(bad.sum()))
        log.info("round %d: bad=%d mass residual=%.2e", r + 1, bad_sizes[-1], residuals[-1])
    out = project(psi)
    out = _affine_fit(out, f0, mask.good)
    out = np.clip(out, 0.0, 1.0)
    if return_log:
        return InpaintResult(out, bad_sizes, residuals)
    return out


def _affine_fit(out, ref, where):
    """Least-squares ``a out + b`` matching ``ref`` on ``where``."""
    x = out[where]
    y = ref[where]
    if x.size < 2 or np.ptp(x) == 0:
        return out
    A = np.stack([x, np.ones_like(x)], axis=1)
    (a, b), *_ = np.linalg.lstsq(A, y, rcond=None)
    return a * out + b
