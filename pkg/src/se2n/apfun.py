"""Almost-periodic functions with frequencies in a finite rotation-invariant set.

A planar AP function is stored by coefficients ``h[n, q]`` with

    f(x) = sum_q sum_n exp(i <R_n lam_q, x>) h[n, q],

where ``lam_q`` runs over the canonical slice of the frequency set.  Sampling
on ``E~ = {R_m y_j}`` gives a circular convolution in ``n``; after a DFT over
``n`` it splits into N independent blocks of generalised Bessel values

    J_n(lam, y) = sum_r exp(i xi rho cos(alpha - omega + 2 pi r / N)) exp(-2 pi i n r / N).
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg
from scipy.spatial import cKDTree

from .errors import CapExceededError, DimensionError, IllPosedError, SolverError
from .repr import canonicalize, rotate_points

COND_LIMIT = 1e12


def _workers():
    try:
        return max(1, int(os.environ.get("SE2N_THREADS", "1")))
    except ValueError:
        return 1


def parallel_map(fn, items):
    """Map honouring ``SE2N_THREADS``; results keep input order."""
    items = list(items)
    n = min(_workers(), len(items))
    if n <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))


# --- point sets ------------------------------------------------------------


def _polar(points):
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    return np.hypot(points[:, 0], points[:, 1]), np.arctan2(points[:, 1], points[:, 0]) % (2 * np.pi)


@dataclass(frozen=True)
class FrequencySet:
    """Canonical-slice frequencies ``lam_q = xi_q exp(i omega_q)``."""

    xi: np.ndarray
    omega: np.ndarray
    N: int
    has_zero: bool = False
    level: np.ndarray | None = None  # generation index from gen_freqset

    def __post_init__(self):
        object.__setattr__(self, "xi", np.asarray(self.xi, dtype=float).ravel())
        object.__setattr__(self, "omega", np.asarray(self.omega, dtype=float).ravel())
        if self.xi.shape != self.omega.shape:
            raise DimensionError("xi and omega must have equal length")
        if np.any(self.xi <= 0):
            raise ValueError("frequencies in the slice must be nonzero")

    @classmethod
    def from_points(cls, points, N, dedup_tol=1e-9, **kw):
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        canon = np.array([canonicalize(p, N)[0] for p in pts]).reshape(-1, 2)
        keep = _dedup_indices(canon, dedup_tol)
        xi, om = _polar(canon[keep])
        return cls(xi, om, N, **kw)

    @property
    def Q(self):
        return self.xi.shape[0]

    @property
    def lambdas(self):
        return np.stack([self.xi * np.cos(self.omega), self.xi * np.sin(self.omega)], axis=1)

    def full(self):
        """Rotated copies: ``full()[n, q] = R_n lam_q``."""
        lam = self.lambdas
        return np.stack([rotate_points(lam, n, self.N) for n in range(self.N)])

    def full_points(self, include_zero=True):
        pts = self.full().reshape(-1, 2)
        if include_zero and self.has_zero:
            pts = np.vstack([np.zeros((1, 2)), pts])
        return pts


@dataclass(frozen=True)
class SpatialSampleSet:
    """Slice points ``y_j = rho_j exp(i alpha_j)``; the full set is ``{R_m y_j}``."""

    rho: np.ndarray
    alpha: np.ndarray
    N: int

    def __post_init__(self):
        object.__setattr__(self, "rho", np.asarray(self.rho, dtype=float).ravel())
        object.__setattr__(self, "alpha", np.asarray(self.alpha, dtype=float).ravel())
        if self.rho.shape != self.alpha.shape:
            raise DimensionError("rho and alpha must have equal length")
        if np.any(self.rho <= 0):
            raise ValueError("sample points must have rho > 0")

    @classmethod
    def from_points(cls, points, N):
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        canon = np.array([canonicalize(p, N)[0] for p in pts]).reshape(-1, 2)
        rho, alpha = _polar(canon)
        return cls(rho, alpha, N)

    @property
    def P(self):
        return self.rho.shape[0]

    @property
    def points(self):
        return np.stack([self.rho * np.cos(self.alpha), self.rho * np.sin(self.alpha)], axis=1)

    def full(self):
        """``full()[m, j] = R_m y_j``."""
        return np.stack([rotate_points(self.points, m, self.N) for m in range(self.N)])


def polar_grid(N, radii, n_angles):
    """Polar grid of the slice: each radius at ``n_angles`` evenly spaced angles."""
    radii = np.asarray(radii, dtype=float)
    ang = (np.arange(n_angles) + 0.5) * (2 * np.pi / N) / n_angles
    R, A = np.meshgrid(radii, ang, indexing="ij")
    return R.ravel(), A.ravel()


def spiral_set(N, Q, rmax, rmin=0.0):
    """Golden-angle spiral folded into the slice; avoids the exact product
    symmetries that make ``E = F`` polar grids singular."""
    j = np.arange(Q)
    rho = rmin + (rmax - rmin) * np.sqrt((j + 0.5) / Q)
    alpha = ((j * 0.6180339887498949) % 1.0) * (2 * np.pi / N)
    return rho, alpha


# --- generalised Bessel functions ------------------------------------------


def gen_bessel(nhat, lam, y, N):
    """``J_nhat(lam, y)`` for cartesian ``lam`` and ``y``."""
    lam = np.asarray(lam, dtype=float)
    y = np.asarray(y, dtype=float)
    xi, om = np.hypot(*lam), np.arctan2(lam[1], lam[0])
    rho, al = np.hypot(*y), np.arctan2(y[1], y[0])
    return complex(gen_bessel_polar(nhat, xi, om, rho, al, N))


def gen_bessel_polar(nhat, xi, omega, rho, alpha, N):
    r = np.arange(N)
    arg = np.multiply.outer(np.asarray(xi) * np.asarray(rho), np.ones(N))
    ang = np.multiply.outer(np.asarray(alpha) - np.asarray(omega), np.ones(N)) + 2 * np.pi * r / N
    terms = np.exp(1j * arg * np.cos(ang)) * np.exp(-2j * np.pi * int(nhat) * r / N)
    return terms.sum(axis=-1)


@dataclass
class FourierBesselBlock:
    nhat: int
    matrix: np.ndarray  # (P, Q)
    _factor: object = field(default=None, repr=False)
    _factor_key: object = field(default=None, repr=False)
    hits: int = 0
    builds: int = 0

    def cond(self):
        return float(np.linalg.cond(self.matrix))

    def factor(self, d2, paper_sign=False):
        """Cached factorisation of ``J*J + diag(d2)`` (or ``- diag(d2)``)."""
        key = (bytes(np.ascontiguousarray(d2).data), paper_sign)
        if self._factor is not None and self._factor_key == key:
            self.hits += 1
            return self._factor
        J = self.matrix
        A = J.conj().T @ J + (-1.0 if paper_sign else 1.0) * np.diag(d2)
        try:
            if paper_sign:
                fac = ("lu", linalg.lu_factor(A, check_finite=True))
                if np.min(np.abs(np.diag(fac[1][0]))) <= 1e-14 * np.max(np.abs(np.diag(fac[1][0]))):
                    raise SolverError(f"regularised block n_hat={self.nhat} is singular")
            else:
                fac = ("cho", linalg.cho_factor(A, lower=False, check_finite=True))
        except (linalg.LinAlgError, ValueError) as exc:
            raise SolverError(f"regularised block n_hat={self.nhat} cannot be factorised: {exc}") from exc
        self._factor, self._factor_key = fac, key
        self.builds += 1
        return fac

    def solve(self, rhs, d2, paper_sign=False):
        kind, fac = self.factor(d2, paper_sign)
        b = self.matrix.conj().T @ rhs
        if kind == "cho":
            return linalg.cho_solve(fac, b)
        return linalg.lu_solve(fac, b)


def fb_tensor(E, F):
    """All blocks at once: array ``(N, P, Q)`` with ``[n, j, q] = J_n(lam_q, y_j)``."""
    if E.N != F.N:
        raise DimensionError("E and F use different N")
    if E.P == 0 or F.Q == 0:
        raise ValueError("empty sample or frequency set")
    N = F.N
    r = np.arange(N)
    ang = E.alpha[:, None, None] - F.omega[None, :, None] + 2 * np.pi * r / N
    g = np.exp(1j * (E.rho[:, None] * F.xi[None, :])[:, :, None] * np.cos(ang))  # (P, Q, N)
    return np.moveaxis(np.fft.fft(g, axis=-1), -1, 0)


def build_fb_operator(E, F):
    """List of the N Fourier-Bessel blocks."""
    T = fb_tensor(E, F)
    return [FourierBesselBlock(n, T[n]) for n in range(F.N)]


def _check_coeffs(coeffs, F):
    coeffs = np.asarray(coeffs)
    if coeffs.shape != (F.N, F.Q):
        raise DimensionError(f"expected coefficients of shape {(F.N, F.Q)}, got {coeffs.shape}")
    return coeffs


def ap_evaluate(coeffs, E, F, blocks=None):
    """Samples ``s[m, j] = f(R_m y_j)``."""
    coeffs = _check_coeffs(coeffs, F)
    T = fb_tensor(E, F) if blocks is None else np.stack([b.matrix for b in blocks])
    ch = np.fft.fft(coeffs, axis=0)
    sh = np.einsum("npq,nq->np", T, ch)
    return np.fft.ifft(sh, axis=0)


def ap_evaluate_points(coeffs, F, points):
    """Evaluate at arbitrary cartesian points (shape ``(..., 2)``)."""
    coeffs = _check_coeffs(coeffs, F)
    lam = F.full()  # (N, Q, 2)
    pts = np.asarray(points, dtype=float)
    ph = np.exp(1j * np.einsum("nqc,...c->...nq", lam, pts))
    return np.einsum("...nq,nq->...", ph, coeffs)


def ap_interpolate(samples, E, F, blocks=None, cond_limit=COND_LIMIT):
    samples = np.asarray(samples)
    if E.P != F.Q:
        raise DimensionError("interpolation needs P == Q")
    if samples.shape != (F.N, E.P):
        raise DimensionError(f"expected samples of shape {(F.N, E.P)}, got {samples.shape}")
    blocks = build_fb_operator(E, F) if blocks is None else blocks
    sh = np.fft.fft(samples, axis=0)

    def solve(n):
        J = blocks[n].matrix
        c = np.linalg.cond(J)
        if not np.isfinite(c) or c > cond_limit:
            raise IllPosedError(n, c)
        return np.linalg.solve(J, sh[n])

    w = np.stack(parallel_map(solve, range(F.N)))
    return np.fft.ifft(w, axis=0)


def ap_approximate(samples, E, F, d, blocks=None, paper_sign=False):
    """Weighted least squares per block: ``(J*J + diag d^2) w = J* s``.

    ``d`` may have shape ``(Q,)`` (same weights for every block) or ``(N, Q)``.
    ``paper_sign=True`` uses ``J*J - diag d^2`` instead.
    """
    samples = np.asarray(samples)
    if samples.shape != (F.N, E.P):
        raise DimensionError(f"expected samples of shape {(F.N, E.P)}, got {samples.shape}")
    d = np.broadcast_to(np.asarray(d, dtype=float), (F.N, F.Q))
    if np.any(d < 0):
        raise ValueError("weights must be nonnegative")
    blocks = build_fb_operator(E, F) if blocks is None else blocks
    sh = np.fft.fft(samples, axis=0)
    w = np.stack(parallel_map(lambda n: blocks[n].solve(sh[n], d[n] ** 2, paper_sign), range(F.N)))
    return np.fft.ifft(w, axis=0)


def weights_profile(F, alpha=100.0):
    """Step profile in ``|lam|``: alpha/10 up to 1, alpha up to 3/2, 100 alpha beyond."""
    xi = F.xi
    return np.where(xi <= 1.0, alpha / 10, np.where(xi <= 1.5, alpha, 100 * alpha))


def ap_translate(coeffs, xi, F):
    """Coefficients of ``f(. - xi)``."""
    coeffs = _check_coeffs(coeffs, F)
    ph = np.exp(-1j * (F.full() @ np.asarray(xi, dtype=float)))
    return coeffs * ph


def ap_rotate(coeffs, h, F):
    """Coefficients of ``f(R_{-h} .)``; samples move by ``h`` rows."""
    coeffs = _check_coeffs(coeffs, F)
    return np.roll(coeffs, int(h), axis=0)


# --- frequency set generation -----------------------------------------------


def _dedup_indices(points, tol):
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if pts.shape[0] == 0:
        return np.array([], dtype=int)
    tree = cKDTree(pts)
    taken = np.zeros(pts.shape[0], dtype=bool)
    keep = []
    for i in range(pts.shape[0]):
        if taken[i]:
            continue
        keep.append(i)
        taken[tree.query_ball_point(pts[i], tol)] = True
    return np.array(keep, dtype=int)


def rotation_closure(points, N, tol=1e-9):
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    allp = np.concatenate([rotate_points(pts, k, N) for k in range(N)])
    return allp[_dedup_indices(allp, tol)]


def roots_of_unity(N):
    t = 2 * np.pi * np.arange(N) / N
    return np.stack([np.cos(t), np.sin(t)], axis=1)


def gen_freqset(seed, depth, N, dedup_tol=1e-9, cap=200_000):
    """Iterated sumsets ``F_k = (F_{k-1} + F_{k-1}) u F_{k-1}``, quotiented by rotations.

    ``seed`` is an array of cartesian points (closed under rotations first) or
    a FrequencySet.  The result records the generation index of each point.
    """
    if isinstance(seed, FrequencySet):
        seed = seed.full_points()
    if depth < 1:
        raise ValueError("depth must be >= 1")
    cur = rotation_closure(seed, N, dedup_tol)
    level = np.ones(cur.shape[0], dtype=int)
    for k in range(2, depth + 1):
        n = cur.shape[0]
        if n * n > 50 * cap:
            raise CapExceededError(f"sumset of {n} points exceeds the cap {cap}")
        sums = (cur[:, None, :] + cur[None, :, :]).reshape(-1, 2)
        allp = np.concatenate([cur, sums])
        keep = _dedup_indices(allp, dedup_tol)
        keep_new = keep[keep >= n]
        cur = np.concatenate([cur, allp[keep_new]])
        level = np.concatenate([level, np.full(keep_new.shape[0], k)])
        if cur.shape[0] > cap:
            raise CapExceededError(f"|F_{k}| = {cur.shape[0]} exceeds the cap {cap}")
    r = np.hypot(cur[:, 0], cur[:, 1])
    zero = r <= dedup_tol
    has_zero = bool(np.any(zero))
    cur, level = cur[~zero], level[~zero]
    canon = np.array([canonicalize(p, N)[0] for p in cur]).reshape(-1, 2)
    keep = _dedup_indices(canon, dedup_tol)
    # an orbit's level is the smallest level among its members
    tree = cKDTree(canon)
    lev = np.array([level[tree.query_ball_point(canon[i], dedup_tol)].min() for i in keep], dtype=int)
    xi, om = _polar(canon[keep])
    order = np.lexsort((om, xi))
    return FrequencySet(xi[order], om[order], N, has_zero=has_zero, level=lev[order])


@dataclass(frozen=True)
class AdmissibilityCertificate:
    F1: np.ndarray  # (n1, 2) points of the full set
    F2: np.ndarray
    witnesses: list  # for each point of F2: (index in F1, index in F1, k)


def _member_fn(points, tol):
    tree = cKDTree(points) if len(points) else None

    def member(q):
        q = np.atleast_2d(q)
        if tree is None:
            return np.zeros(q.shape[0], dtype=bool)
        d, _ = tree.query(q)
        return d <= tol

    return member


def is_admissible(F, tol=1e-9):
    """Search a partition of the full set into F1 (pairwise rotated sums stay in
    the set) and F2 (every point is such a sum).

    Returns ``(ok, certificate)``.  Tries the generation levels first, when
    known, then a greedy orbit-by-orbit construction ordered by ``|lam|``.
    """
    N = F.N
    if F.Q == 0:
        return True, AdmissibilityCertificate(np.zeros((0, 2)), np.zeros((0, 2)), [])
    full = F.full()  # (N, Q, 2)
    allpts = F.full_points(include_zero=True)
    member = _member_fn(allpts, tol)
    rots = [lambda p, k=k: rotate_points(p, k, N) for k in range(N)]

    def closed(orbit_ids):
        pts = full[:, orbit_ids].reshape(-1, 2)
        for k in range(N):
            s = (pts[:, None, :] + rots[k](pts)[None, :, :]).reshape(-1, 2)
            if not np.all(member(s)):
                return False
        return True

    def cover(orbit_ids):
        f1 = full[:, orbit_ids].reshape(-1, 2)
        rest = np.setdiff1d(np.arange(F.Q), orbit_ids)
        f2 = full[:, rest].reshape(-1, 2)
        if f2.shape[0] == 0:
            return AdmissibilityCertificate(f1, f2, [])
        if f1.shape[0] == 0:
            return None
        wit = [None] * f2.shape[0]
        tree = cKDTree(f2)
        for k in range(N):
            s = f1[:, None, :] + rots[k](f1)[None, :, :]
            d, idx = tree.query(s.reshape(-1, 2))
            for flat in np.nonzero(d <= tol)[0]:
                t = idx[flat]
                if wit[t] is None:
                    wit[t] = (int(flat // f1.shape[0]), int(flat % f1.shape[0]), k)
        if any(w is None for w in wit):
            return None
        return AdmissibilityCertificate(f1, f2, wit)

    candidates = []
    if F.level is not None and F.level.size == F.Q and F.level.max() > 1:
        candidates.append(np.nonzero(F.level < F.level.max())[0])
    chosen = []
    for q in np.argsort(F.xi, kind="stable"):
        if closed(chosen + [q]):
            chosen.append(q)
    candidates.append(np.array(chosen, dtype=int))
    for ids in candidates:
        if ids.size and not closed(list(ids)):
            continue
        cert = cover(ids)
        if cert is not None:
            return True, cert
    return False, None


# --- serialisation -----------------------------------------------------------


def write_point_set(path, a, b, header=""):
    """One ``a b`` pair per line (``rho alpha`` or ``xi omega``)."""
    with open(path, "w") as fh:
        if header:
            fh.write(f"# {header}\n")
        for u, v in zip(a, b):
            fh.write(f"{float(u)!r} {float(v)!r}\n")


def read_point_set(path):
    data = np.loadtxt(path, comments="#", ndmin=2)
    if data.shape[1] != 2:
        raise ValueError(f"{path}: expected two columns")
    return data[:, 0], data[:, 1]


def write_coefficients(path, coeffs):
    """Little-endian complex128 with a 16-byte header ``(N, Q)`` as int64."""
    coeffs = np.asarray(coeffs, dtype=np.complex128)
    N, Q = coeffs.shape[0], coeffs.shape[-1]
    with open(path, "wb") as fh:
        fh.write(np.array([N, Q], dtype="<i8").tobytes())
        fh.write(coeffs.astype("<c16").tobytes())


def read_coefficients(path):
    raw = open(path, "rb").read()
    if len(raw) < 16:
        raise ValueError(f"{path}: truncated header")
    N, Q = (int(v) for v in np.frombuffer(raw[:16], dtype="<i8"))
    data = np.frombuffer(raw[16:], dtype="<c16")
    if data.size == N * Q:
        return data.reshape(N, Q).copy()
    if data.size == N * N * Q:
        return data.reshape(N, N, Q).copy()
    raise ValueError(f"{path}: payload size {data.size} does not match N={N}, Q={Q}")
