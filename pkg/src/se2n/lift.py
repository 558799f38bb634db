"""Lifts of planar images to SE(2,N) and centering operators.

Planar images live on the same periodic ``M x M`` grid as in ``ncft``; the
quasi-regular action is ``pi(k, x) f(y) = f(R_{-k}(y - x))``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage, optimize

from .errors import DimensionError, NotAdmissibleError, NotCenterableError, UnsupportedError
from .ncft import centered_bins, eval_dft, rotate_bins


@dataclass(frozen=True)
class Wavelet:
    values: np.ndarray
    hat: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise DimensionError("wavelet must be a square array")
        if not np.any(v):
            raise ValueError("wavelet must have positive norm")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "hat", np.fft.fft2(v))

    @property
    def M(self):
        return self.values.shape[0]


def gaussian_wavelet(M, sigma=2.0):
    """Isotropic periodic Gaussian centred at pixel (0, 0)."""
    c = centered_bins(M).astype(float)
    X1, X2 = np.meshgrid(c, c, indexing="ij")
    g = np.exp(-(X1**2 + X2**2) / (2 * sigma**2))
    return Wavelet(g / g.sum())


def delta_wavelet(M):
    d = np.zeros((M, M))
    d[0, 0] = 1.0
    return Wavelet(d)


def _lattice_bins(M):
    c = centered_bins(M)
    P, Q = np.meshgrid(c, c, indexing="ij")
    return np.stack([P.ravel(), Q.ravel()], axis=1)


def _rotated_hat(hat, k, N):
    """``mu -> hat(R_k mu)`` sampled on the lattice."""
    M = hat.shape[-1]
    b = rotate_bins(_lattice_bins(M), k, N)
    return eval_dft(hat, b).reshape(hat.shape)


def _check(psi, f):
    f = np.asarray(f)
    if f.shape != psi.values.shape:
        raise DimensionError(f"image {f.shape} and wavelet {psi.values.shape} differ")
    return f


def wavelet_lift(psi, f, N):
    """Left-invariant lift ``W f(k, .) = f * (R_k Psi^*)``.

    Layer ``k`` has DFT ``fhat(mu) conj(Psihat(R_{-k} mu))``.
    """
    f = _check(psi, f)
    fhat = np.fft.fft2(f)
    layers = np.stack([fhat * np.conj(_rotated_hat(psi.hat, -k, N)) for k in range(N)])
    out = np.fft.ifft2(layers, axes=(1, 2))
    if np.isrealobj(f) and np.isrealobj(psi.values):
        return out.real
    return out


def almost_lift(psi, f, N):
    """Almost-left-invariant lift, layer DFT ``fhat(R_k mu) conj(Psihat(R_{-k} mu))``."""
    f = _check(psi, f)
    fhat = np.fft.fft2(f)
    layers = np.stack(
        [_rotated_hat(fhat, k, N) * np.conj(_rotated_hat(psi.hat, -k, N)) for k in range(N)]
    )
    out = np.fft.ifft2(layers, axes=(1, 2))
    if np.isrealobj(f) and np.isrealobj(psi.values):
        return out.real
    return out


def quasi_regular(f, k, x, N):
    """``pi(k, x) f`` for integer ``x`` and N | 4 (pixel exact)."""
    from .ncft import rotate_image

    g = rotate_image(np.asarray(f), k, N)
    x = np.rint(np.asarray(x)).astype(int)
    return np.roll(g, shift=(x[0], x[1]), axis=(0, 1))


def partial_derivatives(f):
    """Periodic central differences along axis 0 (x1) and axis 1 (x2)."""
    f = np.asarray(f, dtype=float)
    d1 = 0.5 * (np.roll(f, -1, axis=0) - np.roll(f, 1, axis=0))
    d2 = 0.5 * (np.roll(f, -1, axis=1) - np.roll(f, 1, axis=1))
    return d1, d2


def gradient_lift(f, N, tol=1e-9):
    """Place ``f(x)`` on the layer whose angle is closest to the level-line direction.

    The direction is ``theta`` with ``tan theta = -d1 f / d2 f``.  For even N
    angles are compared mod pi and the layer is chosen among the first N/2;
    for odd N they are compared mod 2 pi.  Where both partials are below
    ``tol`` the value is spread as ``f / N`` over all layers.
    """
    f = np.asarray(f, dtype=float)
    d1, d2 = partial_derivatives(f)
    theta = np.arctan2(-d1, d2)
    if N % 2 == 0:
        period, n_layers = np.pi, N // 2
    else:
        period, n_layers = 2 * np.pi, N
    step = 2 * np.pi / N
    k = np.rint((theta % period) / step).astype(int) % n_layers
    crit = (np.abs(d1) < tol) & (np.abs(d2) < tol)
    out = np.zeros((N,) + f.shape)
    idx = np.indices(f.shape)
    out[k, idx[0], idx[1]] = f
    out[:, crit] = f[crit] / N
    return out


@dataclass(frozen=True)
class CenteredImage:
    image: np.ndarray
    center: np.ndarray


def pixel_coordinates(M):
    """Coordinates with the origin at pixel ``(M // 2, M // 2)``."""
    return np.arange(M) - M // 2


def translate_image(f, xi):
    """``f(y - xi)`` by a Fourier phase shift (sub-pixel, periodic)."""
    f = np.asarray(f)
    M1, M2 = f.shape
    k1 = 2 * np.pi * np.fft.fftfreq(M1)
    k2 = 2 * np.pi * np.fft.fftfreq(M2)
    phase = np.exp(-1j * (k1[:, None] * xi[0] + k2[None, :] * xi[1]))
    g = np.fft.ifft2(np.fft.fft2(f) * phase)
    return g.real if np.isrealobj(f) else g


def geometric_center(f):
    f = np.asarray(f, dtype=float)
    mass = f.sum()
    if abs(mass) <= 1e-12 * max(np.abs(f).sum(), 1e-300):
        raise NotCenterableError("image has zero average")
    x1 = pixel_coordinates(f.shape[0])
    x2 = pixel_coordinates(f.shape[1])
    return np.array([(x1[:, None] * f).sum() / mass, (x2[None, :] * f).sum() / mass])


def center_geometric(f):
    """Translate ``f`` so that its centroid sits at the grid origin ``(M//2, M//2)``."""
    c = geometric_center(f)
    return CenteredImage(translate_image(np.asarray(f, dtype=float), -c), c)


def cyclic_lift(psi, f, N, allow_even=False):
    """Geometric centering followed by ``almost_lift``.

    Rotations of the input act on the lift through ``k -> 2k``, which is a
    bijection of Z_N only for odd N; even N is refused unless ``allow_even``.
    """
    if N % 2 == 0 and not allow_even:
        raise UnsupportedError("cyclic lifts separate rotations only for odd N")
    return almost_lift(psi, center_geometric(f).image, N)


# --- centering of almost-periodic functions --------------------------------


@dataclass(frozen=True)
class Rect:
    xmin: float
    xmax: float
    ymin: float
    ymax: float

    def bounds(self):
        return self.xmin, self.xmax, self.ymin, self.ymax

    def contains(self, p, tol=0.0):
        return (self.xmin - tol <= p[0] <= self.xmax + tol) and (self.ymin - tol <= p[1] <= self.ymax + tol)


@dataclass(frozen=True)
class Disk:
    cx: float
    cy: float
    r: float

    def bounds(self):
        return self.cx - self.r, self.cx + self.r, self.cy - self.r, self.cy + self.r

    def contains(self, p, tol=0.0):
        return np.hypot(p[0] - self.cx, p[1] - self.cy) <= self.r + tol


@dataclass(frozen=True)
class APCenter:
    center: np.ndarray
    coeffs: np.ndarray
    score: float
    ambiguous: bool


def _score_parts(u, lam, y):
    e = u * np.exp(-1j * (lam @ y))
    g = e.real.sum()
    grad = (e[:, None] * (-1j) * lam).real.sum(axis=0)
    hess = -(e.real[:, None, None] * lam[:, :, None] * lam[:, None, :]).sum(axis=0)
    return g, grad, hess


def center_ap(coeffs, F, K, seeds=64, tol=1e-12, amb_tol=1e-9, max_starts=32):
    """Centre a planar AP function given by coefficients ``coeffs[n, q]``.

    The centre maximises ``G(y) = sum cos(theta - <lam, y>)`` over the full
    frequency set, which is the chordal torus distance between ``m(f)`` and
    ``Lambda(y)``.  Search: a ``seeds x seeds`` grid over ``K``, then Newton
    refinement (BFGS as fallback) from the best grid-local maxima.  Returns the centre and ``tau_c f``.
    """
    from .apfun import ap_translate

    coeffs = np.asarray(coeffs)
    a = coeffs.ravel()
    mod = np.abs(a)
    if np.any(mod <= tol * max(mod.max(), 1e-300)) or mod.max() == 0:
        raise NotAdmissibleError("all coefficient moduli must be nonzero")
    u = a / mod
    lam = F.full().reshape(-1, 2)
    x0, x1, y0, y1 = K.bounds()
    gx, gy = np.meshgrid(np.linspace(x0, x1, seeds), np.linspace(y0, y1, seeds), indexing="ij")
    pts = np.stack([gx.ravel(), gy.ravel()], axis=1)
    vals = (u[None, :] * np.exp(-1j * (pts @ lam.T))).real.sum(axis=1)
    grid = vals.reshape(gx.shape)
    # seeds: discrete local maxima of the grid inside K, best first
    peak = (grid == ndimage.maximum_filter(grid, size=3, mode="nearest")).ravel()
    # seeds one grid step outside K may still climb to a maximum inside it
    pad = max((x1 - x0), (y1 - y0)) / max(seeds - 1, 1)
    inside = np.array([K.contains(p, tol=pad) for p in pts])
    cand = np.nonzero(peak & inside)[0]
    if cand.size == 0:
        cand = np.nonzero(inside)[0]
    order = cand[np.argsort(-vals[cand])][:max_starts]

    def neg(y):
        g, grad, _ = _score_parts(u, lam, y)
        return -g, -grad

    def newton(y, iters=30):
        # plain Newton on a concave patch; None if it leaves the patch
        for _ in range(iters):
            g, grad, hess = _score_parts(u, lam, y)
            if np.linalg.norm(grad) < 1e-13 * max(1.0, abs(g)):
                return y
            if np.linalg.eigvalsh(hess).max() >= 0:
                return None
            step = np.linalg.solve(hess, -grad)
            if np.linalg.norm(step) > 1.0:
                return None
            y = y + step
        return y

    found = []
    for i in order:
        y = newton(pts[i].copy())
        if y is None:
            res = optimize.minimize(neg, pts[i], jac=True, method="BFGS", options={"gtol": 1e-12})
            y = newton(res.x)
            if y is None:
                y = res.x
        if not K.contains(y, tol=1e-9):
            continue
        found.append((_score_parts(u, lam, y)[0], y))
    if not found:
        raise NotAdmissibleError("no local maximum inside the search region")
    found.sort(key=lambda t: -t[0])
    best_g, best_y = found[0]
    ambiguous = False
    for g, y in found[1:]:
        if np.linalg.norm(y - best_y) > 1e-6 and best_g - g <= amb_tol * max(1.0, abs(best_g)):
            ambiguous = True
            break
    return APCenter(best_y, ap_translate(coeffs, best_y, F), float(best_g), ambiguous)
