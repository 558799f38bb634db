"""Command-line entry points: inpaint, features, approx, freqset, selftest.

Exit codes: 0 ok, 2 bad input, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

import numpy as np

from . import report
from .apfun import (
    FrequencySet,
    SpatialSampleSet,
    gen_freqset,
    is_admissible,
    read_point_set,
    roots_of_unity,
    write_coefficients,
    write_point_set,
)
from .diffusion import DiffusionParams, MaskState, inpaint_masked
from .drivers import NormsRegime, blob_image, default_sets, norms_table
from .errors import NumericalError, SE2NError
from .imageio import read_image, write_image
from .invariants import REFERENCE_DIMS, InvariantConfig, feature_pipeline

log = logging.getLogger("se2n")

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3


def _out_dir(path):
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    return p


def _emit(rows, header, stream=None):
    w = csv.writer(stream or sys.stdout, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)


def cmd_inpaint(args):
    f = read_image(args.input)
    if args.mask:
        bad = read_image(args.mask) > 0
        if bad.shape != f.shape:
            raise ValueError(f"mask {bad.shape} and image {f.shape} differ in shape")
        f = np.where(bad, 0.0, f)
    else:
        bad = f == 0
    p = DiffusionParams(args.n, args.beta, args.time, args.steps)
    res = inpaint_masked(
        f,
        MaskState.from_bad(bad),
        p,
        n_intervals=args.intervals,
        paper_coefficients=args.paper_coefficients,
        return_log=True,
    )
    out = _out_dir(args.out)
    write_image(out, res.image)
    rows = [(r, s, "" if r == 0 else f"{res.mass_residuals[r - 1]:.3e}") for r, s in enumerate(res.bad_sizes)]
    _emit(rows, ["round", "bad_pixels", "mass_residual"])
    if args.report:
        report.inpaint_figure(out.with_suffix(".png" if out.suffix != ".png" else ".report.png"), f, res.image, bad)
        report.bad_set_figure(out.with_name(out.stem + "_badset.png"), res.bad_sizes)
    return EXIT_OK


def cmd_features(args):
    cfg = InvariantConfig(N=args.n, grid_half=args.window, kind=args.kind,
                          centering="none" if args.no_center else "geometric", moduli=args.moduli)
    out = _out_dir(args.out)
    failed = 0
    names, rows = [], []
    for path in args.inputs:
        try:
            fv = feature_pipeline(read_image(path), cfg)
        except (OSError, SE2NError, ValueError) as exc:
            log.error("%s: %s", path, exc)
            failed += 1
            continue
        names.append(Path(path).name)
        rows.append(fv.values)
    with open(out, "w", newline="") as fh:
        dim = len(rows[0]) if rows else 0
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "kind", "dim"] + [f"v{i}" for i in range(dim)])
        for name, v in zip(names, rows):
            w.writerow([name, cfg.kind, len(v)] + [repr(float(x)) for x in v])
    log.info("%s length %d, reference %d", cfg.kind, dim, REFERENCE_DIMS[cfg.kind])
    _emit([(n, cfg.kind, len(v)) for n, v in zip(names, rows)], ["id", "kind", "dim"])
    if args.report and rows:
        report.features_figure(out.with_suffix(".png"), names, np.array(rows))
    return EXIT_INPUT if failed else EXIT_OK


def cmd_approx(args):
    regime = NormsRegime(N=args.n, alpha=args.alpha)
    if args.input:
        img = read_image(args.input)
    else:
        img = blob_image(64, seed=args.seed)
    if args.e or args.f:
        if not (args.e and args.f):
            raise ValueError("--e and --f must be given together")
        E = SpatialSampleSet(*read_point_set(args.e), args.n)
        F = FrequencySet(*read_point_set(args.f), args.n)
    else:
        E, F = default_sets(regime)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    t = norms_table(img, E, F, regime, paper_sign=args.paper_sign)
    for name, c in t["coeffs"].items():
        write_coefficients(out / f"{name}.coef", c)
    write_point_set(out / "E.txt", E.rho, E.alpha, "rho alpha")
    write_point_set(out / "F.txt", F.xi, F.omega, "xi omega")
    header = ["method", "coefficients", "evaluation", "rotated", "translated"]
    rows = [(k, *(f"{v:.6g}" for v in t[k])) for k in ("interpolation", "approximation")]
    with open(out / "norms.csv", "w") as fh:
        _emit(rows, header, fh)
    _emit(rows, header)
    if args.report:
        report.norms_figure(out / "norms.png", t)
    return EXIT_OK


def cmd_freqset(args):
    if args.seed_file:
        a, b = read_point_set(args.seed_file)
        seed = np.stack([a * np.cos(b), a * np.sin(b)], axis=1)
    else:
        seed = roots_of_unity(args.n)
    F = gen_freqset(seed, args.depth, args.n, cap=args.cap)
    ok, cert = is_admissible(F)
    out = _out_dir(args.out)
    write_point_set(out, F.xi, F.omega, f"xi omega N={args.n} has_zero={F.has_zero}")
    cert_path = out.with_name(out.stem + "_certificate.txt")
    with open(cert_path, "w") as fh:
        fh.write(f"admissible {ok}\n")
        if cert is not None:
            fh.write(f"F1 {len(cert.F1)}\nF2 {len(cert.F2)}\n")
            for x, y in cert.F1:
                fh.write(f"F1 {x!r} {y!r}\n")
            for (x, y), (i, j, k) in zip(cert.F2, cert.witnesses):
                fh.write(f"F2 {x!r} {y!r} = F1[{i}] + R_{k} F1[{j}]\n")
    _emit([(args.n, args.depth, F.Q, int(F.has_zero), int(ok), len(cert.F1) if cert else 0)],
          ["N", "depth", "Q", "has_zero", "admissible", "F1_size"])
    if args.report:
        report.freqset_figure(out.with_suffix(".png"), F, cert)
    return EXIT_OK if ok else EXIT_NUMERIC


def _selftest_checks(seed):
    from .apfun import ap_evaluate, fb_tensor
    from .diffusion import hat_delta
    from .ncft import ncft_forward, ncft_inverse
    from .repr import GroupElement, _rep_matrix
    from scipy.linalg import expm

    rng = np.random.default_rng(seed)

    def rep():
        N = 5
        lam = rng.normal(size=2)
        a = GroupElement(2, rng.normal(size=2), N)
        b = GroupElement(4, rng.normal(size=2), N)
        ab = a * b
        lhs = _rep_matrix(lam, ab.k, ab.x, N)
        rhs = _rep_matrix(lam, a.k, a.x, N) @ _rep_matrix(lam, b.k, b.x, N)
        return np.abs(lhs - rhs).max() < 1e-11

    def ncft():
        f = rng.normal(size=(4, 8, 8))
        return np.abs(ncft_inverse(ncft_forward(f)) - f).max() < 1e-10

    def apfun():
        N, Q = 4, 5
        E = SpatialSampleSet(rng.uniform(0.5, 2, Q), rng.uniform(0, np.pi / 2, Q), N)
        F = FrequencySet(rng.uniform(0.5, 2, Q), rng.uniform(0, np.pi / 2, Q), N)
        c = rng.normal(size=(N, Q)) + 1j * rng.normal(size=(N, Q))
        lam, y = F.full().reshape(-1, 2), E.full()
        brute = np.einsum("mjl,l->mj", np.exp(1j * np.einsum("mjc,lc->mjl", y, lam)), c.ravel())
        return np.abs(ap_evaluate(c, E, F) - brute).max() < 1e-9 * np.abs(brute).max() and fb_tensor(E, F).shape == (N, Q, Q)

    def diffusion():
        from .diffusion import evolve_spatial
        N, M = 4, 8
        psi = rng.random((N, M, M))
        out = evolve_spatial(psi, DiffusionParams(N, 1.0, 0.1, 64))
        return abs(out.sum() - psi.sum()) < 1e-8 * psi.sum() and np.linalg.norm(out) <= np.linalg.norm(psi)

    def freqset():
        ok, cert = is_admissible(gen_freqset(roots_of_unity(4), 3, 4))
        return ok and len(cert.F1) > 0

    def generator():
        H = hat_delta(np.array([0.3, 0.1]), DiffusionParams(5, 2.0, 1.0, 1))
        return np.allclose(H, H.conj().T) and np.all(np.linalg.eigvalsh(H) <= 1e-12) and np.all(np.isfinite(expm(H)))

    return [("representation", rep), ("ncft", ncft), ("apfun", apfun),
            ("diffusion", diffusion), ("freqset", freqset), ("generator", generator)]


def cmd_selftest(args):
    rows, ok = [], True
    for name, fn in _selftest_checks(args.seed):
        passed = bool(fn())
        ok &= passed
        rows.append((name, "pass" if passed else "FAIL"))
    _emit(rows, ["check", "status"])
    return EXIT_OK if ok else EXIT_NUMERIC


def build_parser():
    p = argparse.ArgumentParser(prog="se2n", description="Harmonic analysis on SE(2,N).")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, n):
        sp.add_argument("--n", type=int, default=n, help="order N of the rotation group")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--report", action="store_true", help="also render matplotlib figures")

    s = sub.add_parser("inpaint", help="masked hypoelliptic inpainting")
    s.add_argument("input")
    s.add_argument("--mask", help="image whose nonzero pixels are corrupted")
    s.add_argument("--beta", type=float, default=25.0)
    s.add_argument("--time", type=float, default=1.0)
    s.add_argument("--steps", type=int, default=10)
    s.add_argument("--intervals", type=int, default=10)
    s.add_argument("--paper-coefficients", action="store_true",
                   help="use the double-cosine spatial symbol instead of the corrected one")
    s.add_argument("--out", required=True)
    common(s, 30)
    s.set_defaults(func=cmd_inpaint)

    s = sub.add_parser("features", help="invariant feature vectors as CSV")
    s.add_argument("inputs", nargs="+")
    s.add_argument("--kind", default="rbs", choices=["ps", "bs", "rps", "rbs", "rpsbs"])
    s.add_argument("--window", type=int, default=8, help="half-size of the frequency window")
    s.add_argument("--moduli", action="store_true")
    s.add_argument("--no-center", action="store_true")
    s.add_argument("--out", required=True)
    common(s, 6)
    s.set_defaults(func=cmd_features)

    s = sub.add_parser("approx", help="AP interpolation/approximation and the norm table")
    s.add_argument("input", nargs="?")
    s.add_argument("--e", help="sample set file (rho alpha)")
    s.add_argument("--f", help="frequency set file (xi omega)")
    s.add_argument("--alpha", type=float, default=100.0)
    s.add_argument("--paper-sign", action="store_true", help="solve with J*J - diag d^2")
    s.add_argument("--out", required=True)
    common(s, 8)
    s.set_defaults(func=cmd_approx, seed=1)

    s = sub.add_parser("freqset", help="generate an admissible frequency set")
    s.add_argument("--depth", type=int, default=2)
    s.add_argument("--seed-file", help="seed points (xi omega); default roots of unity")
    s.add_argument("--cap", type=int, default=200_000)
    s.add_argument("--out", required=True)
    common(s, 5)
    s.set_defaults(func=cmd_freqset)

    s = sub.add_parser("selftest", help="quick numerical self checks")
    common(s, 5)
    s.set_defaults(func=cmd_selftest)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except NumericalError as exc:
        log.error("%s", exc)
        return EXIT_NUMERIC
    except (OSError, SE2NError, ValueError) as exc:
        log.error("%s", exc)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
