"""Almost-periodic solution of ``a(lam t) = f(a(t))`` as a sum of Weierstrass series.

The constant Fourier-Bohr term ``c(0)`` is a nonzero solution of
``c / |lam| = f(c)``.  Each remaining mode comes from an eigenpair
``(rho, c)`` of the Jacobian of ``f`` at ``c(0)`` with ratio
``r = 1 / (rho |lam|)``.
"""

from __future__ import annotations

import itertools
import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ConvergenceError, HardyViolation, HardyWarning, NoNonzeroOffset, SingularSystemError
from .polymap import PolyMap, Spectrum, eigen_decompose, evaluate, jacobian, newton
from .weierstrass import WeierstrassSeries, hardy_check

log = logging.getLogger(__name__)

OFFSET_TOL = 1e-10
MODE_TOL = 1e-9
GRID_SEEDS = 400


@dataclass(frozen=True)
class Mode:
    """One amplitude mode.  ``paired`` marks a complex ratio whose
    conjugate mode is implied (real maps only)."""

    r: complex
    c: np.ndarray
    rho: complex
    hardy: bool
    paired: bool = False

    def to_dict(self) -> dict:
        return {
            "r": {"re": self.r.real, "im": self.r.imag},
            "rho": {"re": self.rho.real, "im": self.rho.imag},
            "c": {"re": np.real(self.c).tolist(), "im": np.imag(self.c).tolist()},
            "hardy": self.hardy,
            "paired": self.paired,
        }


@dataclass(frozen=True)
class APSolution:
    lambda_abs: float
    offset: np.ndarray
    modes: list[Mode]
    dominant_index: int
    excluded: list[complex] = field(default_factory=list)

    @property
    def ratios(self) -> list[complex]:
        return [m.r for m in self.modes]

    @property
    def dominant(self) -> Mode:
        return self.modes[self.dominant_index]

    def to_dict(self) -> dict:
        return {
            "lambda_abs": self.lambda_abs,
            "offset": np.asarray(self.offset, float).tolist(),
            "dominant_index": self.dominant_index,
            "modes": [m.to_dict() for m in self.modes],
            "excluded_rho": [{"re": z.real, "im": z.imag} for z in self.excluded],
        }


def expanding_scale(spectrum: Spectrum) -> float:
    """``|lam|`` as the product of the moduli of the expanding eigenvalues."""
    mask = spectrum.expanding_mask
    if not mask.any():
        raise ValueError("no expanding eigenvalue")
    return float(np.prod(np.abs(spectrum.eigenvalues[mask])))


def seed_grid(dim: int, half_width: float = 2.0, max_seeds: int = GRID_SEEDS) -> np.ndarray:
    """Deterministic grid over ``[-w, w]^d`` ordered by distance from the origin.

    The origin is left out since it always solves the offset equation.
    """
    per_axis = max(2, int(math.floor(max_seeds ** (1.0 / dim))))
    axis = np.linspace(-half_width, half_width, per_axis)
    pts = np.array(list(itertools.product(axis, repeat=dim)))
    norms = np.linalg.norm(pts, axis=1)
    pts = pts[norms > 1e-12]
    order = np.lexsort((*pts.T[::-1], np.linalg.norm(pts, axis=1)))
    return pts[order]


def offset_residual(f: PolyMap, lambda_abs: float, c) -> float:
    c = np.asarray(c, dtype=float)
    return float(np.linalg.norm(c / lambda_abs - evaluate(f, c)))


def solve_offset(
    f: PolyMap,
    lambda_abs: float,
    seeds: Sequence | None = None,
    tol: float = 1e-8,
    half_width: float = 2.0,
    grid: bool = True,
) -> np.ndarray:
    """Nonzero solution of ``c / |lam| = f(c)`` by Newton.

    User ``seeds`` are tried first, then a deterministic grid over
    ``[-half_width, half_width]^d``.  The first root with ``||c|| > tol``
    wins.  The returned root satisfies the equation to ``OFFSET_TOL``.

    Raises
    ------
    NoNonzeroOffset
        Every seed converged to zero or failed.
    """
    if lambda_abs <= 1:
        raise ValueError("|lambda| must exceed 1")
    tried = [np.asarray(s, dtype=float).reshape(-1) for s in (seeds or [])]
    if grid:
        tried.extend(seed_grid(f.dim, half_width))
    if not tried:
        raise ValueError("no seeds")
    eye = np.eye(f.dim) / lambda_abs

    def res(c):
        return evaluate(f, c) - c / lambda_abs

    def jac(c):
        return jacobian(f, c) - eye

    for seed in tried:
        try:
            c = newton(res, jac, seed, OFFSET_TOL)
        except (ConvergenceError, SingularSystemError, FloatingPointError, OverflowError):
            continue
        if np.linalg.norm(c) > tol:
            log.debug("offset %s from seed %s", c, seed)
            return c
    raise NoNonzeroOffset(f"only the zero offset found from {len(tried)} seeds")


def solve_modes(f: PolyMap, offset, lambda_abs: float) -> tuple[list[Mode], list[complex]]:
    """Modes from the eigenpairs of the Jacobian at ``offset``.

    Returns ``(modes, excluded)``: ``excluded`` lists eigenvalues ``rho = 0``
    whose ratio would be infinite.  Modes are sorted by ``|r|`` ascending.
    For a real Jacobian each complex-conjugate pair becomes one mode with
    ``paired=True`` (the member with ``Im rho > 0`` is kept).
    """
    J = jacobian(f, np.asarray(offset, dtype=float))
    spec = eigen_decompose(J)
    scale = max(1.0, float(np.linalg.norm(J, 2)))
    modes: list[Mode] = []
    excluded: list[complex] = []
    for rho, c in zip(spec.eigenvalues, spec.eigenvectors):
        if abs(rho) <= 1e-12 * scale:
            warnings.warn(f"eigenvalue {rho} ~ 0 gives r = inf; mode excluded", HardyWarning, stacklevel=2)
            excluded.append(complex(rho))
            continue
        if np.linalg.norm(J @ c - rho * c) > MODE_TOL * np.linalg.norm(c) * scale:
            raise ArithmeticError(f"mode residual too large for rho={rho}")
        r = 1.0 / (rho * lambda_abs)
        if abs(rho.imag) > 1e-12 * scale:
            if rho.imag < 0:
                continue
            paired = True
        else:
            rho, r, c, paired = complex(rho.real), complex(r.real), np.real(c).astype(complex), False
        modes.append(Mode(complex(r), c, complex(rho), hardy_check(lambda_abs, r), paired))
    modes.sort(key=lambda m: (abs(m.r), -m.r.real, -m.r.imag))
    return modes, excluded


def solve(f: PolyMap, lambda_abs: float, seeds=None, tol: float = 1e-8) -> APSolution:
    """Offset plus modes in one call."""
    c0 = solve_offset(f, lambda_abs, seeds, tol)
    modes, excluded = solve_modes(f, c0, lambda_abs)
    if not modes:
        raise NoNonzeroOffset("no usable mode at the offset")
    return APSolution(float(lambda_abs), c0, modes, 0, excluded)


def from_modes(lambda_abs: float, ratios, amplitudes=None, offset=None) -> APSolution:
    """Build a solution from explicit ratios (for synthesis and tests)."""
    ratios = [complex(r) for r in ratios]
    if amplitudes is None:
        amplitudes = [np.ones(1, dtype=complex)] * len(ratios)
    amps = [np.atleast_1d(np.asarray(a, dtype=complex)) for a in amplitudes]
    d = len(amps[0])
    off = np.zeros(d) if offset is None else np.atleast_1d(np.asarray(offset, dtype=float))
    modes = [
        Mode(r, a, 1.0 / (r * lambda_abs), hardy_check(lambda_abs, r)) for r, a in zip(ratios, amps)
    ]
    dominant = int(np.argmin([abs(r) for r in ratios]))
    return APSolution(float(lambda_abs), off, modes, dominant)


def _expand(mode: Mode) -> list[tuple[complex, np.ndarray]]:
    if mode.paired:
        return [(mode.r, mode.c), (mode.r.conjugate(), np.conj(mode.c))]
    return [(mode.r, mode.c)]


def assemble(solution: APSolution, n: int) -> list[WeierstrassSeries]:
    """One ``WeierstrassSeries`` per mode (two per conjugate pair).

    The dominant series carries ``c(0)`` as its offset; the others carry
    zero.  Modes outside the Hardy window are dropped with a
    ``HardyWarning``.  The constant correction lives in
    :func:`constant_correction`.
    """
    out: list[WeierstrassSeries] = []
    d = len(solution.offset)
    for i, mode in enumerate(solution.modes):
        if not mode.hardy:
            warnings.warn(
                f"mode r={mode.r:.6g} outside the Hardy window; dropped", HardyWarning, stacklevel=2
            )
            continue
        for j, (r, c) in enumerate(_expand(mode)):
            carries = i == solution.dominant_index and j == 0
            off = solution.offset if carries else np.zeros(d)
            out.append(WeierstrassSeries(solution.lambda_abs, r, c, off, n))
    if not out:
        raise HardyViolation("no mode passes the Hardy window")
    if not solution.modes[solution.dominant_index].hardy:
        out[0] = WeierstrassSeries(out[0].lam, out[0].r, out[0].amplitude, solution.offset, n)
    return out


def constant_correction(solution: APSolution, n: int) -> np.ndarray:
    """``-sum_i c_i sum_{|k|<=n} r_i^|k|`` over the retained modes.

    Each kernel has mean ``sum r^|k|``; subtracting it leaves ``c(0)`` as
    the Bohr coefficient at ``mu = 0`` of the assembled curve.
    """
    ks = np.abs(np.arange(-n, n + 1))
    total = np.zeros(len(solution.offset), dtype=complex)
    for mode in solution.modes:
        if not mode.hardy:
            continue
        for r, c in _expand(mode):
            total -= c * np.sum(r ** ks)
    return total


def evaluate_solution(solution: APSolution, t, n: int) -> np.ndarray:
    """Assembled curve ``c(0) + sum_i c_i (w_i(t) - sum_k r_i^|k|)``; shape ``(N, d)``."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", HardyWarning)
        series = assemble(solution, n)
    total = np.zeros((len(t), len(solution.offset)), dtype=complex)
    for s in series:
        total += s(t)
    return total + constant_correction(solution, n)


def truncation_residual(solution: APSolution, n: int, grid=None, n_ref: int = 200) -> float:
    """Sup on ``grid`` of the dropped terms ``sum_i ||c_i|| sum_{n<|k|<=n_ref} |r_i|^|k| |1 - e^{i lam^k t}|``.

    A sum of non-negative terms over a shrinking index set, so it never
    increases with ``n``.
    """
    grid = np.linspace(-2 * math.pi, 2 * math.pi, 257) if grid is None else np.asarray(grid, float)
    if n >= n_ref:
        return 0.0
    ks = np.concatenate([np.arange(-n_ref, -n), np.arange(n + 1, n_ref + 1)])
    lam = solution.lambda_abs
    with np.errstate(over="ignore", invalid="ignore"):
        phases = np.multiply.outer(grid, lam ** ks.astype(float))
        g = np.abs(1.0 - np.exp(1j * phases))
    g = np.where(np.isfinite(g), g, 2.0)
    total = np.zeros(len(grid))
    for mode in solution.modes:
        if not mode.hardy:
            continue
        weight = len(_expand(mode)) * np.linalg.norm(mode.c)
        total += weight * (g @ (abs(mode.r) ** np.abs(ks)))
    return float(total.max())
