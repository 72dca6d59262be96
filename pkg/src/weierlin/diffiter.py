"""Differential iterations ``a -> a + delta * F(a)`` with ``delta = x / n``.

For ``n -> infinity`` the almost-periodic ansatz gives a closed-form
offset, a Weierstrass ratio governed by ``sigma`` and the dimension
``D = 1 - sigma / rho``.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from importlib import resources
from typing import Sequence

import numpy as np

from .errors import ConvergenceError, H1Violation, HardyViolation, NoNonzeroOffset, SingularSystemError
from .polymap import PolyMap, eigen_decompose, evaluate, jacobian, newton, normalize_vector
from .apsolve import seed_grid

log = logging.getLogger(__name__)

OVERFLOW_GUARD = 1e12
PROP1_TOL = 1e-12
MAX_EXPONENT = 700.0
SEED_WIDTHS = (4.0, 32.0, 256.0)


@dataclass(frozen=True)
class DifferentialIteration:
    F: PolyMap
    x: np.ndarray
    n: int

    def __post_init__(self):
        x = np.atleast_1d(np.asarray(self.x, dtype=float))
        if x.shape != (self.F.dim,):
            raise ValueError(f"x must have length {self.F.dim}")
        if int(self.n) < 1:
            raise ValueError("n must be >= 1")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "n", int(self.n))

    @property
    def delta(self) -> np.ndarray:
        return self.x / self.n

    def step(self, a) -> np.ndarray:
        return np.asarray(a, dtype=float) + self.delta * evaluate(self.F, a)

    def as_map(self) -> PolyMap:
        """The Euler step as a ``PolyMap``."""
        terms = [(i, tuple(int(i == j) for j in range(self.F.dim)), 1.0) for i in range(self.F.dim)]
        terms += [(t, e, c * self.delta[t]) for t, e, c in self.F.terms]
        return PolyMap(self.F.dim, terms)


@dataclass(frozen=True)
class Trajectory:
    points: np.ndarray
    diverged: bool
    steps_done: int


def euler_iterate(di: DifferentialIteration, a0, steps: int, guard: float = OVERFLOW_GUARD) -> Trajectory:
    """Iterate the Euler map; stops early once ``||a|| > guard``."""
    if steps < 1:
        raise ValueError("steps must be >= 1")
    a = np.asarray(a0, dtype=float).reshape(-1)
    if a.shape != (di.F.dim,):
        raise ValueError(f"a0 must have length {di.F.dim}")
    out = np.empty((steps + 1, len(a)))
    out[0] = a
    delta = di.delta
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(1, steps + 1):
            a = a + delta * evaluate(di.F, a)
            if not np.all(np.isfinite(a)) or np.linalg.norm(a) > guard:
                return Trajectory(out[:k], True, k - 1)
            out[k] = a
    return Trajectory(out, False, steps)


@dataclass(frozen=True)
class Prop1Solution:
    c0: np.ndarray
    rho: float
    sigma: float
    amplitude: np.ndarray
    t: float
    D: float
    x: np.ndarray = field(default_factory=lambda: np.zeros(0))
    sigma_imag: float = 0.0

    @property
    def hardy(self) -> bool:
        return self.sigma < 0

    def to_dict(self) -> dict:
        return {
            "c0": self.c0.tolist(),
            "rho": self.rho,
            "sigma": self.sigma,
            "sigma_imag": self.sigma_imag,
            "amplitude": {"re": np.real(self.amplitude).tolist(), "im": np.imag(self.amplitude).tolist()},
            "t": self.t,
            "D": self.D,
            "hardy": self.hardy,
        }


def expanding_rate(F: PolyMap, tol: float = 1e-12) -> float:
    """The single positive eigenvalue of ``dF(0)``; every other must be negative."""
    spec = eigen_decompose(jacobian(F, np.zeros(F.dim)))
    re = spec.eigenvalues.real
    scale = max(1.0, float(np.abs(spec.eigenvalues).max()))
    if np.any(np.abs(re) <= tol * scale):
        raise H1Violation(f"dF(0) has an eigenvalue with zero real part: {spec.eigenvalues}")
    pos = np.flatnonzero(re > 0)
    if len(pos) != 1:
        raise H1Violation(f"need exactly one expanding rate, found {len(pos)} in {spec.eigenvalues}")
    rho = spec.eigenvalues[pos[0]]
    if abs(rho.imag) > tol * scale:
        raise H1Violation(f"expanding rate {rho} is not real")
    return float(rho.real)


def prop1_offset(F: PolyMap, x, t: float, rho: float, seeds=None, tol: float = PROP1_TOL) -> np.ndarray:
    """Nonzero root of ``rho t c + x * F(c) = 0`` (componentwise ``x``).

    User seeds first, then grids of growing half-width ``SEED_WIDTHS``.
    """
    x = np.asarray(x, dtype=float)
    d = F.dim

    def res(c):
        return rho * t * c + x * evaluate(F, c)

    def jac(c):
        return rho * t * np.eye(d) + x[:, None] * jacobian(F, c)

    tried = [np.asarray(s, dtype=float).reshape(-1) for s in (seeds or [])]
    for width in SEED_WIDTHS:
        tried.extend(seed_grid(d, width, 125))
    for seed in tried:
        try:
            c = newton(res, jac, seed, tol)
        except (ConvergenceError, SingularSystemError):
            continue
        if np.linalg.norm(c) > 1e-8:
            # one undamped step to push the root to rounding level
            try:
                polished = c + np.linalg.solve(jac(c), -res(c))
                if np.linalg.norm(res(polished)) <= np.linalg.norm(res(c)):
                    c = polished
            except np.linalg.LinAlgError:
                pass
            return c
    raise NoNonzeroOffset("only c0 = 0 solves rho t c + x F(c) = 0")


def solve_prop1(F: PolyMap, x, t: float, seeds: Sequence | None = None) -> Prop1Solution:
    """Offset, ``sigma`` and dimension of the limit almost-periodic solution.

    ``sigma t`` is the eigenvalue of largest real part of ``x * dF(c0)``,
    the Jacobian with row ``i`` scaled by ``x_i``.

    Raises
    ------
    H1Violation
        ``dF(0)`` does not have exactly one positive eigenvalue.
    NoNonzeroOffset
        Newton only finds ``c0 = 0``.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape != (F.dim,):
        raise ValueError(f"x must have length {F.dim}")
    if t <= 0:
        raise ValueError("t must be positive")
    rho = expanding_rate(F)
    c0 = prop1_offset(F, x, t, rho, seeds)
    M = x[:, None] * jacobian(F, c0)
    spec = eigen_decompose(M)
    i = int(np.argmax(spec.eigenvalues.real))
    st = spec.eigenvalues[i]
    sigma = float(st.real) / t
    D = 1.0 - sigma / rho
    amp = normalize_vector(spec.eigenvectors[i])
    return Prop1Solution(c0, rho, sigma, amp, float(t), D, x, float(st.imag) / t)


def prop1_residuals(F: PolyMap, sol: Prop1Solution) -> tuple[float, float]:
    """(offset residual, eigen residual) of a solution."""
    off = float(np.linalg.norm(sol.rho * sol.t * sol.c0 + sol.x * evaluate(F, sol.c0)))
    M = sol.x[:, None] * jacobian(F, sol.c0)
    st = complex(sol.sigma, sol.sigma_imag) * sol.t
    eig = float(np.linalg.norm(M @ sol.amplitude - st * sol.amplitude))
    return off, eig


def limit_prefactor(sigma: float, rho: float, t: float) -> float:
    s = (sigma + rho) * t
    return (1.0 - math.exp(-s)) / s


def limit_weierstrass(sol: Prop1Solution, n_terms: int, u) -> np.ndarray:
    """Limit function ``pref * sum_{|k|<=n} e^{-t(sigma+rho)|k|} (1 - exp(i e^{t rho k} u)) * c``.

    Returns shape ``(N, d)``.  Needs ``sigma < 0`` and ``sigma + rho > 0``.
    """
    if sol.sigma >= 0:
        raise HardyViolation(f"sigma = {sol.sigma} >= 0")
    decay = sol.t * (sol.sigma + sol.rho)
    if decay <= 0:
        raise HardyViolation(f"sigma + rho = {sol.sigma + sol.rho:.6g} <= 0: kernel does not decay")
    if sol.t * sol.rho * n_terms > MAX_EXPONENT:
        raise ValueError("n_terms too large: exp(t rho n) overflows")
    u = np.atleast_1d(np.asarray(u, dtype=float))
    ks = np.arange(-n_terms, n_terms + 1)
    weights = np.exp(-decay * np.abs(ks))
    freqs = np.exp(sol.t * sol.rho * ks)
    w = (1.0 - np.exp(1j * np.multiply.outer(u, freqs))) @ weights
    return limit_prefactor(sol.sigma, sol.rho, sol.t) * w[:, None] * sol.amplitude[None, :]


def limit_bound(sol: Prop1Solution, n_terms: int) -> float:
    """``pref * 2 * sum e^{-t(sigma+rho)|k|} * ||c||`` in closed geometric form."""
    q = math.exp(-sol.t * (sol.sigma + sol.rho))
    geo = (1 + q - 2 * q ** (n_terms + 1)) / (1 - q)
    return limit_prefactor(sol.sigma, sol.rho, sol.t) * 2 * geo * float(np.linalg.norm(sol.amplitude))


# -- diagnostic ---------------------------------------------------------------


def euler_vs_ap_consistency(
    F: PolyMap,
    x,
    t: float,
    n_list: Sequence[int] = (10, 100, 1000),
    a0=None,
    horizon: float = 50.0,
    seeds=None,
) -> dict:
    """Compare the orbit time-average with ``c0`` for increasing ``n``.

    Each run covers ``horizon`` units of the position-time variable
    (``horizon * n`` steps) and averages the second half.  Nothing is
    asserted; the gap trend is reported as ``shrinking`` or
    ``non-convergent``.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    report: dict = {"n": list(map(int, n_list)), "runs": []}
    try:
        sol = solve_prop1(F, x, t, seeds)
        ref = sol.c0
        report["prop1"] = "ok"
    except (NoNonzeroOffset, H1Violation) as exc:
        ref = np.zeros(F.dim)
        report["prop1"] = f"{type(exc).__name__}: {exc}"
    report["c0"] = ref.tolist()
    start = np.full(F.dim, 0.1) if a0 is None else np.asarray(a0, dtype=float)
    gaps = []
    for n in n_list:
        di = DifferentialIteration(F, x, n)
        traj = euler_iterate(di, start, max(1, int(round(horizon * n))))
        if traj.diverged:
            status, mean, gap = "diverged", None, None
        else:
            tail = traj.points[len(traj.points) // 2 :]
            mean = tail.mean(axis=0)
            gap = float(np.linalg.norm(mean - ref))
            status = "zero_mean" if np.linalg.norm(mean) <= 1e-9 else "ok"
        report["runs"].append(
            {"n": int(n), "status": status, "mean": None if mean is None else mean.tolist(), "gap": gap}
        )
        gaps.append(gap)
    finite = [g for g in gaps if g is not None]
    if len(finite) == len(gaps) and all(b < a for a, b in zip(finite, finite[1:])):
        report["trend"] = "shrinking"
    elif finite and max(finite) == 0.0:
        report["trend"] = "exact"
    else:
        report["trend"] = "non-convergent"
    return report


def load_field(name_or_path: str) -> PolyMap:
    """Load a vector field from a JSON file, or a shipped one by name (``lorenz``)."""
    if name_or_path == "lorenz":
        text = resources.files("weierlin").joinpath("data/lorenz.json").read_text()
    else:
        with open(name_or_path) as fh:
            text = fh.read()
    return PolyMap.from_dict(json.loads(text))


def logistic_field() -> PolyMap:
    """``F(a) = a - a^2``."""
    return PolyMap(1, [(0, (1,), 1.0), (0, (2,), -1.0)])
