"""Command-line entry point: ``weierlin <subcommand> [options]``.

Every subcommand prints (or writes with ``--out``) a JSON report that
echoes its configuration.  Exit status is 0 on success, 2 when the
mathematics refuses (Hardy window, resonance, missing offset) and 1 on
I/O or input-format errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
import warnings

import numpy as np

from . import apsolve, bohr, diffiter, fractal, henon, linearize, polymap, weierstrass
from .errors import DomainError, HardyWarning
from .report import complex_columns, csv_text, dumps, write_atomic

log = logging.getLogger("weierlin")

LOG_ENV = "WEIERLIN_LOG_LEVEL"


class InputError(Exception):
    """Bad input file or flag value (exit status 1)."""


# -- helpers ------------------------------------------------------------------


def _vector(text: str) -> list[float]:
    try:
        return [float(v) for v in text.replace(";", ",").split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a comma-separated vector: {text!r}") from exc


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _load_map(path: str) -> polymap.PolyMap:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read map spec {path}: {exc.strerror}") from exc
    try:
        return polymap.PolyMap.from_json(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    except (ValueError, TypeError) as exc:
        raise InputError(f"{path}: {exc}") from exc


def _config(args: argparse.Namespace) -> dict:
    return {k: v for k, v in vars(args).items() if k not in ("func", "command")}


def _emit(args: argparse.Namespace, body: dict) -> None:
    text = dumps({"command": args.command, "config": _config(args), **body})
    if args.out:
        write_atomic(args.out, text)
    else:
        sys.stdout.write(text)


def _emit_csv(path: str | None, header, rows) -> None:
    if path:
        write_atomic(path, csv_text(header, rows))


def _z(v):
    return None if v is None else {"re": complex(v).real, "im": complex(v).imag}


# -- subcommands --------------------------------------------------------------


def cmd_fixedpoint(args) -> None:
    f = _load_map(args.map)
    seeds = [args.start] if args.start else []
    rng = np.random.default_rng(args.seed)
    seeds += list(rng.uniform(-args.box, args.box, size=(args.tries, f.dim)))
    found, failures = [], 0
    for s in seeds:
        try:
            a = polymap.find_fixed_point(f, s, args.tol)
        except DomainError:
            failures += 1
            continue
        if not any(np.linalg.norm(a - b) <= 1e-8 for b in found):
            found.append(a)
    if not found:
        raise polymap.ConvergenceError(f"no fixed point found from {len(seeds)} seeds")
    points = []
    for a in found:
        spec = polymap.eigen_decompose(polymap.jacobian(f, a))
        points.append(
            {
                "point": a,
                "residual": float(np.linalg.norm(polymap.evaluate(f, a) - a)),
                "eigenvalues": [_z(v) for v in spec.eigenvalues],
            }
        )
    _emit(args, {"fixed_points": points, "failed_seeds": failures})


def cmd_spectrum(args) -> None:
    f = _load_map(args.map)
    at = np.zeros(f.dim) if args.at is None else np.asarray(args.at, float)
    spec = polymap.eigen_decompose(polymap.jacobian(f, at))
    nr = polymap.check_nonresonance(spec, args.max_order)
    body = {
        "at": at,
        "eigenvalues": [_z(v) for v in spec.eigenvalues],
        "eigenvectors": [{"re": v.real, "im": v.imag} for v in spec.eigenvectors],
        "expanding": spec.expanding_mask,
        "nonresonant": nr.ok,
        "witness": None if nr.witness is None else list(nr.witness),
    }
    if spec.expanding_mask.any():
        body["lambda_abs"] = apsolve.expanding_scale(spec)
    _emit(args, body)


def cmd_linearize(args) -> None:
    f = _load_map(args.map)
    if args.at is not None:
        f = polymap.shift(f, args.at)
    series = linearize.solve_series(f, order=args.order, double=args.double)
    series = linearize.with_radius(series, f, args.tol)
    body = {"series": series, "rho0": series.rho0}
    if args.csv:
        if series.q != 1:
            raise InputError("curve sampling is limited to one expanding direction")
        if series.rho0 <= 0:
            raise DomainError("no validated radius; cannot sample the curve")
        t = np.linspace(-args.tmax, args.tmax, args.samples)
        values = linearize.extend_curve(series, f, t[:, None])
        header = ["t"] + [f"a{j + 1}" for j in range(f.dim)]
        _emit_csv(args.csv, header, np.column_stack([t, values]))
    _emit(args, body)


def cmd_bohr(args) -> None:
    try:
        t, values = bohr.read_signal_csv(args.input)
    except OSError as exc:
        raise InputError(f"cannot read {args.input}: {exc.strerror}") from exc
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    aps = bohr.scan_sampled(t, values, args.lam, args.kmin, args.kmax)
    _emit(args, {"spectrum": aps})


def cmd_weier(args) -> None:
    r = complex(args.r, args.r_imag)
    s = weierstrass.WeierstrassSeries(args.lam, r, args.amplitude, None, args.n)
    body = {
        "series": s,
        "hardy": s.hardy,
        "tail_bound": weierstrass.tail_bound(s),
        "D": fractal.theoretical_dimension(r, args.lam),
    }
    if args.csv:
        t = np.linspace(args.tmin, args.tmax, args.samples)
        header, rows = complex_columns(t, s(t), "w")
        _emit_csv(args.csv, header, rows)
    _emit(args, body)


def cmd_boxdim(args) -> None:
    try:
        pts = fractal.read_points_csv(args.input)
    except OSError as exc:
        raise InputError(f"cannot read {args.input}: {exc.strerror}") from exc
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    est = fractal.box_dimension(pts, args.min_scale, args.max_scale, args.scales)
    _emit(args, {"estimate": est})


def cmd_henon(args) -> None:
    rep = henon.analyze(args.sigma, args.beta, args.order)
    lin = rep.pop("linearization")
    body = dict(rep)
    body["linearization"] = lin
    if lin is not None and args.csv:
        t = np.linspace(0.0, 2 * math.pi, args.samples)
        values, plane, _ = henon.synth_curve(lin, args.order, t)
        _emit_csv(
            args.csv,
            ["t", "re_P", "im_P", "x", "y"],
            np.column_stack([t, values.real, values.imag, plane]),
        )
    _emit(args, body)


def cmd_diffiter(args) -> None:
    if args.field == "logistic":
        F = diffiter.logistic_field()
    else:
        try:
            F = diffiter.load_field(args.field)
        except OSError as exc:
            raise InputError(f"cannot read {args.field}: {exc.strerror}") from exc
        except json.JSONDecodeError as exc:
            raise InputError(f"{args.field}: malformed JSON at line {exc.lineno}, column {exc.colno}") from exc
    x = np.asarray(args.x if args.x is not None else [args.t] * F.dim, dtype=float)
    if x.shape != (F.dim,):
        raise InputError(f"--x needs {F.dim} components")
    body: dict = {}
    sol = diffiter.solve_prop1(F, x, args.t)
    off, eig = diffiter.prop1_residuals(F, sol)
    body["prop1"] = sol
    body["residuals"] = {"offset": off, "eigen": eig}
    di = diffiter.DifferentialIteration(F, x, args.n)
    a0 = np.full(F.dim, 0.1) if args.a0 is None else np.asarray(args.a0, float)
    traj = diffiter.euler_iterate(di, a0, args.steps)
    body["trajectory"] = {"steps": traj.steps_done, "diverged": traj.diverged, "final": traj.points[-1]}
    if args.csv:
        header = ["step"] + [f"a{j + 1}" for j in range(F.dim)]
        _emit_csv(args.csv, header, np.column_stack([np.arange(len(traj.points)), traj.points]))
    try:
        u = np.linspace(-args.umax, args.umax, args.samples)
        w = diffiter.limit_weierstrass(sol, args.terms, u)
        body["limit"] = {"status": "ok", "prefactor": diffiter.limit_prefactor(sol.sigma, sol.rho, sol.t)}
        if args.limit_csv:
            header, rows = complex_columns(u, w, "w")
            _emit_csv(args.limit_csv, header, rows)
    except DomainError as exc:
        body["limit"] = {"status": "refused", "reason": str(exc)}
    _emit(args, body)


# -- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="weierlin", description=__doc__.splitlines()[0])
    p.add_argument("--seed", type=int, default=0, help="random seed for sampled grids")
    p.add_argument("--out", help="write the JSON report here instead of stdout")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("fixedpoint", help="fixed points of a polynomial map")
    s.add_argument("--map", required=True)
    s.add_argument("--start", type=_vector, help="initial guess, comma separated")
    s.add_argument("--tries", type=int, default=20, help="extra random seeds")
    s.add_argument("--box", type=float, default=2.0, help="half-width of the seed box")
    s.add_argument("--tol", type=float, default=1e-12)
    s.set_defaults(func=cmd_fixedpoint)

    s = sub.add_parser("spectrum", help="eigenvalues and non-resonance at a point")
    s.add_argument("--map", required=True)
    s.add_argument("--at", type=_vector)
    s.add_argument("--max-order", type=int, default=8)
    s.set_defaults(func=cmd_spectrum)

    s = sub.add_parser("linearize", help="local series of the semi-invariant curve")
    s.add_argument("--map", required=True)
    s.add_argument("--at", type=_vector, help="fixed point to shift to the origin")
    s.add_argument("--order", type=_positive_int, default=12)
    s.add_argument("--tol", type=float, default=1e-8)
    s.add_argument("--double", action="store_true", help="use f o f for negative eigenvalues")
    s.add_argument("--csv", help="sampled curve output")
    s.add_argument("--tmax", type=float, default=10.0)
    s.add_argument("--samples", type=_positive_int, default=1001)
    s.set_defaults(func=cmd_linearize)

    s = sub.add_parser("bohr", help="Fourier-Bohr coefficients of a sampled signal")
    s.add_argument("--input", required=True, help="CSV: t, re, im per coordinate")
    s.add_argument("--lambda", dest="lam", type=float, required=True)
    s.add_argument("--kmin", type=int, default=-4)
    s.add_argument("--kmax", type=int, default=4)
    s.set_defaults(func=cmd_bohr)

    s = sub.add_parser("weier", help="truncated Weierstrass-Mandelbrot series")
    s.add_argument("--lambda", dest="lam", type=float, required=True)
    s.add_argument("--r", type=float, required=True)
    s.add_argument("--r-imag", type=float, default=0.0)
    s.add_argument("--n", type=int, default=12)
    s.add_argument("--amplitude", type=float, default=1.0)
    s.add_argument("--tmin", type=float, default=0.0)
    s.add_argument("--tmax", type=float, default=2 * math.pi)
    s.add_argument("--samples", type=_positive_int, default=2 ** 16)
    s.add_argument("--csv")
    s.set_defaults(func=cmd_weier)

    s = sub.add_parser("boxdim", help="box-counting dimension of a planar point cloud")
    s.add_argument("--input", required=True, help="CSV with x, y columns")
    s.add_argument("--scales", type=int, default=fractal.DEFAULT_SCALES)
    s.add_argument("--min-scale", type=float)
    s.add_argument("--max-scale", type=float)
    s.set_defaults(func=cmd_boxdim)

    s = sub.add_parser("henon", help="Hénon worked example")
    s.add_argument("--sigma", type=float, default=1.4)
    s.add_argument("--beta", type=float, default=0.3)
    s.add_argument("--order", type=int, default=8, help="truncation n of the synthesized curve")
    s.add_argument("--samples", type=_positive_int, default=4096)
    s.add_argument("--csv")
    s.set_defaults(func=cmd_henon)

    s = sub.add_parser("diffiter", help="differential iteration and its limit solution")
    s.add_argument("--field", default="logistic", help="JSON vector field, or 'lorenz' / 'logistic'")
    s.add_argument("--x", type=_vector, help="position-time vector (default: t in every slot)")
    s.add_argument("--t", type=float, default=1.0)
    s.add_argument("--n", type=_positive_int, default=100)
    s.add_argument("--steps", type=_positive_int, default=1000)
    s.add_argument("--a0", type=_vector)
    s.add_argument("--terms", type=int, default=8)
    s.add_argument("--umax", type=float, default=10.0)
    s.add_argument("--samples", type=_positive_int, default=1001)
    s.add_argument("--csv", help="trajectory output")
    s.add_argument("--limit-csv", help="limit function samples")
    s.set_defaults(func=cmd_diffiter)
    return p


def main(argv=None) -> int:
    level = os.environ.get(LOG_ENV, "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default", HardyWarning)
            args.func(args)
    except DomainError as exc:
        print(f"weierlin: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except (InputError, OSError) as exc:
        print(f"weierlin: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
