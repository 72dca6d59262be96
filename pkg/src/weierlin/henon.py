"""Worked example: the Hénon map, its period-2 composition and curve synthesis.

The classic form ``(x, y) -> (1 - sigma x^2 + y, beta x)`` is shifted so
its fixed point sits at the origin:

    f(a, b) = (gamma a + b + h(a), beta a),   h(a) = -sigma a^2,

with ``gamma = -2 sigma x*``.  The expanding eigenvalue is negative, so
the analysis runs on ``f o f`` with scale ``lam^2``.
"""

from __future__ import annotations

import cmath
import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

from . import apsolve, bohr, linearize
from .errors import DomainError, HardyViolation, HardyWarning, NoNonzeroOffset
from .fractal import theoretical_dimension
from .polymap import PolyMap, Spectrum, compose, eigen_decompose, jacobian
from .weierstrass import hardy_check

log = logging.getLogger(__name__)

MAX_BRANCH_DEPTH = 8


@dataclass(frozen=True)
class HenonParams:
    sigma: float
    beta: float
    gamma: float

    def h(self, a):
        return -self.sigma * np.asarray(a) ** 2

    def dh(self, a):
        return -2.0 * self.sigma * np.asarray(a)

    def eigenvalues(self) -> tuple[float, float]:
        """Roots of ``mu^2 - gamma mu - beta = 0``, larger modulus first."""
        disc = self.gamma ** 2 + 4 * self.beta
        if disc < 0:
            raise DomainError("complex eigenvalues at the origin")
        s = math.sqrt(disc)
        roots = sorted([(self.gamma - s) / 2, (self.gamma + s) / 2], key=lambda z: -abs(z))
        return roots[0], roots[1]


class HenonOrigin(NamedTuple):
    map: PolyMap
    spectrum: Spectrum
    params: HenonParams
    fixed_point: tuple[float, float]


def fixed_point(sigma: float, beta: float) -> float:
    """The fixed point ``x*`` of the classic map (the root used in the shift)."""
    if sigma == 0:
        if beta == 1:
            raise DomainError("no fixed point for sigma = 0, beta = 1")
        return 1.0 / (1.0 - beta)
    disc = (1 - beta) ** 2 + 4 * sigma
    if disc < 0:
        raise DomainError(f"complex fixed point: discriminant {disc:.6g} < 0")
    return (beta - 1 + math.sqrt(disc)) / (2 * sigma)


def shifted_map(params: HenonParams) -> PolyMap:
    terms = [
        (0, (1, 0), params.gamma),
        (0, (0, 1), 1.0),
        (1, (1, 0), params.beta),
    ]
    if params.sigma:
        terms.append((0, (2, 0), -params.sigma))
    return PolyMap(2, terms)


def henon_at_origin(sigma: float = 1.4, beta: float = 0.3) -> HenonOrigin:
    """Shift the classic Hénon map so that its fixed point is the origin."""
    x = fixed_point(sigma, beta)
    params = HenonParams(float(sigma), float(beta), -2.0 * sigma * x)
    f = shifted_map(params)
    spec = eigen_decompose(jacobian(f, np.zeros(2)))
    return HenonOrigin(f, spec, params, (x, beta * x))


def double_iterate(f: PolyMap) -> PolyMap:
    """``f o f`` (degree 4 for the quadratic Hénon map)."""
    return compose(f, f)


def solve_c0(map2: PolyMap, lambda_sq: float, seeds: Sequence | None = None, tol: float = 1e-8) -> np.ndarray:
    """Nonzero offset of the period-2 problem ``c / lam^2 = (f o f)(c)``."""
    return apsolve.solve_offset(map2, lambda_sq, seeds, tol)


def product_matrix(params: HenonParams, c0) -> np.ndarray:
    """Jacobian of ``f o f`` at ``c0`` as the product of the two factor matrices."""
    c1, c2 = (float(v) for v in c0)
    first = params.gamma * c1 + c2 + float(params.h(c1))
    outer = np.array([[params.gamma + float(params.dh(first)), 1.0], [params.beta, 0.0]])
    inner = np.array([[params.gamma + float(params.dh(c1)), 1.0], [params.beta, 0.0]])
    return outer @ inner


@dataclass(frozen=True)
class RatioSolution:
    """Roots of ``det(M - rho I) = 0`` and their ratios ``r = 1/(lam^2 rho)``.

    ``r`` is the ratio of smaller modulus.  ``r_prime`` is ``None`` when
    its root ``rho`` vanishes (``beta = 0``).
    """

    r: complex
    r_prime: complex | None
    rho: complex
    rho_prime: complex
    trace: float
    det: float
    discriminant: float
    hardy: bool
    hardy_prime: bool

    @property
    def real(self) -> bool:
        return self.discriminant >= 0

    def to_dict(self) -> dict:
        def z(v):
            return None if v is None else {"re": complex(v).real, "im": complex(v).imag}

        return {
            "r": z(self.r),
            "r_prime": z(self.r_prime),
            "rho": z(self.rho),
            "rho_prime": z(self.rho_prime),
            "trace": self.trace,
            "det": self.det,
            "discriminant": self.discriminant,
            "hardy": self.hardy,
            "hardy_prime": self.hardy_prime,
        }


def solve_r(params: HenonParams, c0, lambda_sq: float) -> RatioSolution:
    """Solve the 2x2 determinant quadratic ``rho^2 - tr rho + det = 0``."""
    M = product_matrix(params, c0)
    tr = float(np.trace(M))
    det = float(np.linalg.det(M))
    disc = tr * tr - 4 * det
    root = math.sqrt(disc) if disc >= 0 else cmath.sqrt(disc)
    rhos = sorted([(tr + root) / 2, (tr - root) / 2], key=lambda z: -abs(z))
    ratios: list[complex | None] = []
    for rho in rhos:
        if abs(rho) <= 1e-14 * max(1.0, abs(tr)):
            warnings.warn("rho = 0 gives r = inf; ratio excluded", HardyWarning, stacklevel=2)
            ratios.append(None)
        else:
            ratios.append(complex(1.0 / (lambda_sq * rho)))
    flags = [r is not None and hardy_check(lambda_sq, r) for r in ratios]
    return RatioSolution(
        r=ratios[0],
        r_prime=ratios[1],
        rho=complex(rhos[0]),
        rho_prime=complex(rhos[1]),
        trace=tr,
        det=det,
        discriminant=disc,
        hardy=flags[0],
        hardy_prime=flags[1],
    )


@dataclass(frozen=True)
class HenonLinearization:
    c0: np.ndarray
    r: complex
    r_prime: complex | None
    alpha: complex
    alpha_prime: complex
    lambda_sq: float
    lam: float = 0.0
    hardy: bool = False
    hardy_prime: bool = False

    def to_dict(self) -> dict:
        def z(v):
            return None if v is None else {"re": complex(v).real, "im": complex(v).imag}

        return {
            "c0": np.asarray(self.c0, float).tolist(),
            "r": z(self.r),
            "r_prime": z(self.r_prime),
            "alpha": z(self.alpha),
            "alpha_prime": z(self.alpha_prime),
            "lambda_sq": self.lambda_sq,
            "lambda": self.lam,
            "hardy": self.hardy,
            "hardy_prime": self.hardy_prime,
        }


def steinberg_target(origin: HenonOrigin, order: int = 12, tol: float = 1e-10) -> Callable:
    """First coordinate of the local curve of ``f o f``, prolonged to all ``t``."""
    series = linearize.solve_series(origin.map, origin.spectrum, order=order, double=True)
    series = linearize.with_radius(series, origin.map, tol)
    if series.rho0 <= 0:
        raise DomainError("local series failed to validate on any radius")

    def target(t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        return linearize.extend_curve(series, origin.map, t[:, None])[:, 0]

    return target


def fit_amplitudes(
    target: Callable,
    r: complex,
    r_prime: complex | None,
    lambda_sq: float,
    T: float = 200.0,
    samples: int | None = None,
) -> tuple[complex, complex]:
    """Match the Bohr coefficients of ``target`` at ``mu = 1`` and ``mu = lam^2``.

    The synthesized curve has ``c(lam^{2k}) = -(alpha r^|k| + alpha' r'^|k|)``;
    with both ratios this is a 2x2 linear solve, with one ratio only the
    ``mu = 1`` coefficient is used.
    """
    n = bohr.required_samples(lambda_sq, T, samples)
    c1 = complex(bohr.bohr_coefficient(target, 1.0, T, n).value[0])
    if r_prime is None:
        return -c1, 0j
    c2 = complex(bohr.bohr_coefficient(target, lambda_sq, T, n).value[0])
    A = np.array([[1.0, 1.0], [r, r_prime]], dtype=complex)
    if abs(np.linalg.det(A)) < 1e-12:
        raise DomainError("equal ratios: amplitudes are not identifiable")
    alpha, alpha_p = np.linalg.solve(A, -np.array([c1, c2]))
    return complex(alpha), complex(alpha_p)


def synth_coefficients(lin: HenonLinearization, n: int) -> dict[int, complex]:
    """``alpha r^|k| + alpha' r'^|k|`` over ``|k| <= n``, Hardy-failing ratios dropped."""
    terms = []
    if lin.hardy:
        terms.append((lin.alpha, lin.r))
    if lin.hardy_prime and lin.r_prime is not None:
        terms.append((lin.alpha_prime, lin.r_prime))
    if not terms:
        raise HardyViolation("both ratios fail the Hardy window; synthesis refused")
    return {k: sum(a * r ** abs(k) for a, r in terms) for k in range(-n, n + 1)}


def synth_curve(lin: HenonLinearization, n: int, t) -> tuple[np.ndarray, np.ndarray, dict[int, complex]]:
    """Sample ``P_n(t) = sum_k (1 - exp(i lam^{2k} t)) (alpha r^|k| + alpha' r'^|k|)``.

    Returns ``(P, plane, coeffs)`` where ``plane`` holds the planar curve
    ``(Re P(lam t), Re P(t))`` with the signed eigenvalue ``lam``.
    """
    coeffs = synth_coefficients(lin, n)
    t = np.asarray(t, dtype=float)

    def P(s):
        ks = np.array(sorted(coeffs))
        w = np.array([coeffs[k] for k in ks])
        return (1.0 - np.exp(1j * np.multiply.outer(s, lin.lambda_sq ** ks.astype(float)))) @ w

    lam = lin.lam if lin.lam else -math.sqrt(lin.lambda_sq)
    values = P(t)
    plane = np.column_stack([np.real(P(lam * t)), np.real(values)])
    return values, plane, coeffs


# -- branch generation --------------------------------------------------------


@dataclass
class BranchTree:
    """Values generated from samples ``a(t)``.

    ``forward`` holds ``a(t lam)`` from the linear relation.  ``levels[L]``
    has shape ``(N, 2^(L+1))``; NaN marks a branch that terminated on a
    negative discriminant (or an unused slot when ``sigma = 0``).
    """

    forward: np.ndarray
    forward_residual: float
    levels: list[np.ndarray] = field(default_factory=list)
    residuals: list[float] = field(default_factory=list)
    terminated: list[int] = field(default_factory=list)

    def leaves(self) -> int:
        return int(np.count_nonzero(np.isfinite(self.levels[-1]))) if self.levels else 0


def _invert(params: HenonParams, r: float, a: np.ndarray) -> tuple[np.ndarray, int]:
    """Roots ``y`` of ``gamma y + h(y) = (1 - r beta) a / r``; shape ``a.shape + (2,)``."""
    rhs = (1 - r * params.beta) * a / r
    out = np.full(a.shape + (2,), np.nan)
    if params.sigma == 0:
        out[..., 0] = rhs / params.gamma
        return out, 0
    disc = params.gamma ** 2 - 4 * params.sigma * rhs
    ok = disc >= 0
    s = np.sqrt(np.where(ok, disc, 0.0))
    out[..., 0] = np.where(ok, (params.gamma + s) / (2 * params.sigma), np.nan)
    out[..., 1] = np.where(ok, (params.gamma - s) / (2 * params.sigma), np.nan)
    bad = np.isfinite(a) & ~ok
    return out, int(np.count_nonzero(bad))


def branch_generate(params: HenonParams, r: float, a_samples, depth: int = 3) -> BranchTree:
    """Forward branch plus a binary tree of inverse-quadratic branches.

    Parameters
    ----------
    params : HenonParams
    r : float
        Real ratio with ``1 - r beta != 0``.
    a_samples : array_like
        Samples of ``a(t)``.
    depth : int
        Tree depth, at most ``MAX_BRANCH_DEPTH``.
    """
    if isinstance(r, complex):
        if abs(r.imag) > 0:
            raise ValueError("branch generation needs a real ratio")
        r = r.real
    r = float(r)
    if r == 0 or abs(1 - r * params.beta) < 1e-14:
        raise DomainError("need r != 0 and 1 - r beta != 0")
    if not 1 <= depth <= MAX_BRANCH_DEPTH:
        raise ValueError(f"depth must lie in 1..{MAX_BRANCH_DEPTH}")
    a = np.asarray(a_samples, dtype=float).reshape(-1)
    k = 1 - r * params.beta
    fwd = (params.gamma * a + params.h(a)) / k
    fwd_res = float(np.max(np.abs(k * fwd - params.gamma * a - params.h(a)), initial=0.0))
    tree = BranchTree(fwd, fwd_res)
    current = a[:, None]
    for _ in range(depth):
        roots, dead = _invert(params, r, current)
        level = roots.reshape(len(a), -1)
        parents = np.repeat(current, 2, axis=1)
        fin = np.isfinite(level)
        res = np.abs(params.gamma * level + params.h(level) - k * parents / r)
        scale = 1.0 + np.abs(k * parents / r)
        tree.levels.append(level)
        tree.residuals.append(float(np.max((res / scale)[fin], initial=0.0)))
        tree.terminated.append(dead)
        current = level
    return tree


# -- pipeline -----------------------------------------------------------------


def analyze(
    sigma: float = 1.4,
    beta: float = 0.3,
    n: int = 8,
    seeds: Sequence | None = None,
    fit_window: float = 200.0,
) -> dict:
    """Full pipeline as a plain report; domain refusals are recorded, not raised.

    Returns a dict with keys ``origin``, ``c0``, ``ratios``, ``D``,
    ``linearization`` (or ``None``) and ``status`` messages.
    """
    origin = henon_at_origin(sigma, beta)
    p = origin.params
    lam, lam_p = (complex(v).real for v in origin.spectrum.eigenvalues)
    report: dict = {
        "x_star": origin.fixed_point[0],
        "gamma": p.gamma,
        "lambda": lam,
        "lambda_prime": lam_p,
        "status": [],
    }
    map2 = double_iterate(origin.map)
    lambda_sq = lam * lam
    report["lambda_sq"] = lambda_sq
    try:
        c0 = solve_c0(map2, lambda_sq, seeds)
        report["c0"] = c0.tolist()
        report["c0_residual"] = apsolve.offset_residual(map2, lambda_sq, c0)
    except NoNonzeroOffset as exc:
        c0 = np.zeros(2)
        report["c0"] = None
        report["status"].append(f"no nonzero offset ({exc}); ratios use c0 = 0")
    ratios = solve_r(p, c0, lambda_sq)
    report["ratios"] = ratios.to_dict()
    passing = [z for z, ok in ((ratios.r, ratios.hardy), (ratios.r_prime, ratios.hardy_prime)) if ok]
    report["D"] = theoretical_dimension(min(passing, key=abs), lambda_sq) if passing else None
    report["linearization"] = None
    if not passing:
        report["status"].append("both ratios fail the Hardy window; synthesis refused")
        return report
    target = steinberg_target(origin)
    alpha, alpha_p = fit_amplitudes(target, ratios.r, ratios.r_prime, lambda_sq, fit_window)
    lin = HenonLinearization(
        c0, ratios.r, ratios.r_prime, alpha, alpha_p, lambda_sq, lam, ratios.hardy, ratios.hardy_prime
    )
    report["linearization"] = lin
    return report
