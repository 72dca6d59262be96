"""Semi-invariant curves ``a(lambda t) = f(a(t))`` by power-series matching.

The curve is parameterized by the expanding eigen-directions only
(``t`` in R^q).  Coefficients are found degree by degree from

    (lambda^m I - J) a_m = [f(a_{<m})]_m

where ``lambda^m = prod_j lambda_j^{m_j}``.  Away from the origin the
curve is prolonged by iterating the map: ``a(lambda^p s) = f^(p)(a(s))``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import numpy as np
from scipy.signal import convolve

from . import polymap
from .errors import DimensionError, ResonanceError
from .polymap import PolyMap, Spectrum

log = logging.getLogger(__name__)

RADIUS_START = 1e-4
RADIUS_FACTOR = 1.25
RADIUS_POINTS = 60


@dataclass(frozen=True)
class CurveSeries:
    """Truncated Taylor expansion of a semi-invariant curve.

    ``indices[k]`` is a multi-index in ``t`` (length q) and ``coeffs[k]``
    the matching d-vector.  ``doubled`` marks a series built for ``f o f``
    (negative expanding eigenvalue), in which case ``lambdas`` holds the
    squared eigenvalues.
    """

    dim: int
    lambdas: np.ndarray
    indices: np.ndarray
    coeffs: np.ndarray
    order: int
    rho0: float = 0.0
    doubled: bool = False

    @property
    def q(self) -> int:
        return len(self.lambdas)

    @property
    def coefficients(self) -> dict[tuple[int, ...], np.ndarray]:
        return {tuple(int(x) for x in m): c for m, c in zip(self.indices, self.coeffs)}

    def coefficient(self, m) -> np.ndarray:
        m = tuple(int(x) for x in np.atleast_1d(m))
        return self.coefficients.get(m, np.zeros(self.dim))

    def __call__(self, t):
        return evaluate_series(self, t)

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "q": self.q,
            "lambdas": self.lambdas.tolist(),
            "order": self.order,
            "rho0": self.rho0,
            "doubled": self.doubled,
            "coefficients": [
                {"index": [int(x) for x in m], "value": c.tolist()}
                for m, c in zip(self.indices, self.coeffs)
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CurveSeries":
        idx = np.array([c["index"] for c in data["coefficients"]], dtype=int)
        val = np.array([c["value"] for c in data["coefficients"]], dtype=float)
        return cls(
            dim=int(data["dim"]),
            lambdas=np.asarray(data["lambdas"], dtype=float),
            indices=idx.reshape(-1, int(data["q"])),
            coeffs=val.reshape(-1, int(data["dim"])),
            order=int(data["order"]),
            rho0=float(data.get("rho0", 0.0)),
            doubled=bool(data.get("doubled", False)),
        )


def _as_points(t, q: int) -> tuple[np.ndarray, bool]:
    """Return ``(points, single)`` with points of shape (N, q)."""
    t = np.asarray(t, dtype=float)
    if t.ndim == 0:
        if q != 1:
            raise DimensionError(f"scalar t given for q={q}")
        return t.reshape(1, 1), True
    if q == 1 and t.ndim == 1:
        return t.reshape(-1, 1), t.shape == (1,)
    if t.shape[-1] != q:
        raise DimensionError(f"t must have trailing dimension {q}, got {t.shape}")
    if t.ndim == 1:
        return t.reshape(1, q), True
    return t.reshape(-1, q), False


def evaluate_series(series: CurveSeries, t) -> np.ndarray:
    """Plain evaluation of the truncated series (no prolongation)."""
    pts, single = _as_points(t, series.q)
    mono = np.prod(pts[:, None, :] ** series.indices[None, :, :], axis=-1)
    out = mono @ series.coeffs
    return out[0] if single else out


# -- truncated multivariate power series -------------------------------------


class _Trunc:
    """Dense truncated power series in q variables, total degree <= N."""

    def __init__(self, q: int, N: int):
        self.q, self.N = q, N
        grids = np.indices((N + 1,) * q)
        self.mask = grids.sum(axis=0) <= N

    def zeros(self) -> np.ndarray:
        return np.zeros((self.N + 1,) * self.q)

    def one(self) -> np.ndarray:
        x = self.zeros()
        x[(0,) * self.q] = 1.0
        return x

    def mul(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        if self.q == 1:
            z = np.convolve(x, y)[: self.N + 1]
        else:
            z = convolve(x, y, method="direct")[tuple(slice(0, self.N + 1) for _ in range(self.q))]
        return np.where(self.mask, z, 0.0)


def _compose_series(f: PolyMap, A: np.ndarray, ts: _Trunc) -> np.ndarray:
    """Truncated series of ``f(a(t))`` for coordinate series ``A[i]``."""
    out = np.zeros_like(A)
    powers: dict[tuple[int, int], np.ndarray] = {}

    def power(j: int, e: int) -> np.ndarray:
        if e == 0:
            return ts.one()
        if (j, e) not in powers:
            powers[(j, e)] = ts.mul(power(j, e - 1), A[j])
        return powers[(j, e)]

    for target, exps, coeff in f.terms:
        prod = None
        for j, e in enumerate(exps):
            if e:
                p = power(j, e)
                prod = p if prod is None else ts.mul(prod, p)
        if prod is None:
            prod = ts.one()
        out[target] += coeff * prod
    return out


def solve_series(
    f: PolyMap,
    spectrum: Spectrum | None = None,
    order: int = 8,
    double: bool = False,
    check_resonance: bool = True,
) -> CurveSeries:
    """Solve the functional equation order by order around the fixed point 0.

    Parameters
    ----------
    f : PolyMap
        Map with ``f(0) = 0``; use :func:`polymap.shift` first otherwise.
    spectrum : Spectrum, optional
        Eigen-decomposition of ``Df(0)``; computed if omitted.
    order : int
        Truncation degree in ``t``.
    double : bool
        Allow negative expanding eigenvalues by working with ``f o f``.
    check_resonance : bool
        Run :func:`polymap.check_nonresonance` up to ``order`` first.

    Raises
    ------
    ResonanceError
        Non-resonance fails, or a divisor ``|lambda^m - lambda_l|`` drops
        below 1e-9.
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    d = f.dim
    if np.linalg.norm(polymap.evaluate(f, np.zeros(d))) > 1e-12:
        raise ValueError("f(0) != 0: shift the fixed point to the origin first")
    if spectrum is None:
        spectrum = polymap.eigen_decompose(polymap.jacobian(f, np.zeros(d)))
    lam = spectrum.eigenvalues
    expanding = np.flatnonzero(spectrum.expanding_mask)
    if expanding.size == 0:
        raise ValueError("no expanding eigenvalue: nothing to parameterize")
    if np.any(np.abs(lam[expanding].imag) > 1e-12):
        raise ValueError("complex expanding eigenvalues are not supported")
    doubled = False
    if np.any(lam[expanding].real < 0):
        if not double:
            raise ValueError("negative expanding eigenvalue: pass double=True to use f o f")
        f = polymap.compose(f, f)
        spectrum = polymap.eigen_decompose(polymap.jacobian(f, np.zeros(d)))
        lam = spectrum.eigenvalues
        expanding = np.flatnonzero(spectrum.expanding_mask)
        doubled = True
    if check_resonance:
        nr = polymap.check_nonresonance(spectrum, max(order, 2))
        if not nr.ok:
            raise ResonanceError(f"spectrum resonant: lambda^{nr.witness} = 1", index=nr.witness)

    J = polymap.jacobian(f, np.zeros(d))
    lam_exp = lam[expanding].real
    q = len(expanding)
    ts = _Trunc(q, order)
    A = np.zeros((d,) + (order + 1,) * q)
    for j, idx in enumerate(expanding):
        e = [0] * q
        e[j] = 1
        A[(slice(None),) + tuple(e)] = spectrum.eigenvectors[idx].real

    for m_deg in range(2, order + 1):
        B = _compose_series(f, A, ts)
        for m in polymap.multi_indices(m_deg, q):
            lam_m = float(np.prod(lam_exp ** np.asarray(m)))
            div = np.abs(lam_m - lam)
            ell = int(np.argmin(div))
            if div[ell] < polymap.RESONANCE_TOL:
                raise ResonanceError(
                    f"small divisor |lambda^{m} - lambda_{ell}| = {div[ell]:.3e}",
                    index=m,
                    target=ell,
                )
            rhs = B[(slice(None),) + m]
            A[(slice(None),) + m] = np.linalg.solve(lam_m * np.eye(d) - J, rhs)

    indices, coeffs = [], []
    for deg in range(1, order + 1):
        for m in polymap.multi_indices(deg, q):
            c = A[(slice(None),) + m]
            if np.any(c != 0.0):
                indices.append(m)
                coeffs.append(c.copy())
    return CurveSeries(
        dim=d,
        lambdas=lam_exp.copy(),
        indices=np.array(indices, dtype=int).reshape(-1, q),
        coeffs=np.array(coeffs, dtype=float).reshape(-1, d),
        order=order,
        doubled=doubled,
    )


def _working_map(series: CurveSeries, f: PolyMap) -> PolyMap:
    return polymap.compose(f, f) if series.doubled else f


def _ball_samples(q: int, radius: float, n: int, rng: np.random.Generator) -> np.ndarray:
    if q == 1:
        return np.linspace(-radius, radius, n).reshape(-1, 1)
    dirs = rng.normal(size=(n, q))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    radii = radius * rng.uniform(0.0, 1.0, size=(n, 1)) ** (1.0 / q)
    # always include the boundary along each axis
    axes = np.vstack([np.eye(q), -np.eye(q)]) * radius
    return np.vstack([dirs * radii, dirs * radius, axes])


def residual(series: CurveSeries, f: PolyMap, t) -> np.ndarray:
    """``||a(lambda t) - f(a(t))||`` for the plain series at each point."""
    g = _working_map(series, f)
    pts, _ = _as_points(t, series.q)
    lhs = evaluate_series(series, pts * series.lambdas)
    rhs = polymap.evaluate(g, evaluate_series(series, pts))
    return np.linalg.norm(lhs - rhs, axis=-1)


def radius_grid() -> np.ndarray:
    return RADIUS_START * RADIUS_FACTOR ** np.arange(RADIUS_POINTS)


def validate_radius(
    series: CurveSeries, f: PolyMap, tol: float, samples: int = 257, seed: int = 0
) -> float:
    """Largest grid radius whose sampled residual stays below ``tol``.

    The grid is geometric (``1e-4 * 1.25**k``, 60 points).  The scan stops
    at the first failing radius, so the result is the end of the passing
    prefix.  Returns 0.0 (and logs the smallest residual seen) when even
    the first radius fails.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    rng = np.random.default_rng(seed)
    best = 0.0
    for radius in radius_grid():
        pts = _ball_samples(series.q, radius, samples, rng)
        with np.errstate(over="ignore", invalid="ignore"):
            res = residual(series, f, pts)
        worst = float(np.max(res)) if np.all(np.isfinite(res)) else np.inf
        if worst > tol:
            if best == 0.0:
                log.warning(
                    "no radius meets tol=%g: residual %.3e already at radius %.3e",
                    tol, worst, radius,
                )
            break
        best = float(radius)
    return best


def with_radius(series: CurveSeries, f: PolyMap, tol: float) -> CurveSeries:
    return replace(series, rho0=validate_radius(series, f, tol))


def extend_curve(
    series: CurveSeries,
    f: PolyMap,
    t,
    p: int | None = None,
    inverse: PolyMap | None = None,
) -> np.ndarray:
    """Evaluate the curve anywhere by prolongation ``a(lambda^p s) = f^(p)(a(s))``.

    By default ``p`` is the smallest non-negative integer with
    ``||t / lambda^p|| <= rho0``.  An explicit negative ``p`` needs the
    inverse map (of ``f o f`` when the series is doubled).
    """
    if series.rho0 <= 0:
        raise ValueError("series has no validated radius (rho0 = 0)")
    g = _working_map(series, f)
    pts, single = _as_points(t, series.q)
    out = np.empty((len(pts), series.dim))
    if p is not None:
        if p < 0 and inverse is None:
            raise ValueError("negative p requires an inverse map")
        s = pts / series.lambdas ** p
        a = evaluate_series(series, s)
        step = g if p >= 0 else inverse
        for _ in range(abs(p)):
            a = polymap.evaluate(step, a)
        out[:] = a
    else:
        ps = np.zeros(len(pts), dtype=int)
        s = pts.copy()
        # shrink until inside the validated ball
        while True:
            outside = np.linalg.norm(s, axis=1) > series.rho0
            if not outside.any():
                break
            s[outside] /= series.lambdas
            ps[outside] += 1
        for pv in np.unique(ps):
            sel = ps == pv
            a = evaluate_series(series, s[sel])
            for _ in range(int(pv)):
                a = polymap.evaluate(g, a)
            out[sel] = a
    return out[0] if single else out
