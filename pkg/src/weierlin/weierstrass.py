"""Truncated Weierstrass-Mandelbrot series

    w_r(t) = sum_{k=-n}^{n} r^{|k|} (1 - exp(i lambda^k t))

with the Hardy window ``|lambda r| > 1 and |r| < 1``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DominanceTie, HardyViolation, HardyWarning


def hardy_check(lam: float, r: complex) -> bool:
    """True iff ``|lam * r| > 1`` and ``|r| < 1`` (both strict)."""
    if lam <= 1:
        raise ValueError("lambda must exceed 1")
    return bool(abs(lam * r) > 1.0 and abs(r) < 1.0)


def _ks(n: int) -> np.ndarray:
    return np.arange(-n, n + 1)


def kernel(lam: float, r: complex, n: int, t) -> np.ndarray:
    """Scalar kernel ``w_r(t)`` at each ``t`` (complex)."""
    t = np.asarray(t, dtype=float)
    ks = _ks(n)
    weights = np.asarray(r, dtype=complex) ** np.abs(ks)
    phases = np.multiply.outer(t, lam ** ks.astype(float))
    return (1.0 - np.exp(1j * phases)) @ weights


@dataclass(frozen=True)
class WeierstrassSeries:
    """``offset + amplitude * w_r(t)`` truncated to ``|k| <= n``.

    The Hardy window is enforced at construction; pass
    ``enforce_hardy=False`` only to build deliberately divergent series
    (negative tests, diagnostics).
    """

    lam: float
    r: complex
    amplitude: np.ndarray
    offset: np.ndarray
    n: int
    enforce_hardy: bool = True

    def __init__(self, lam, r, amplitude=1.0, offset=None, n=12, enforce_hardy=True):
        lam = float(lam)
        if lam <= 1:
            raise ValueError("lambda must exceed 1")
        if int(n) < 0:
            raise ValueError("truncation n must be >= 0")
        amp = np.atleast_1d(np.asarray(amplitude, dtype=complex))
        off = np.zeros(len(amp)) if offset is None else np.atleast_1d(np.asarray(offset))
        if off.shape != amp.shape:
            raise ValueError("offset and amplitude must have the same length")
        r = complex(r)
        if enforce_hardy and not hardy_check(lam, r):
            raise HardyViolation(
                f"Hardy window violated: |lambda r| = {abs(lam * r):.6g}, |r| = {abs(r):.6g}"
            )
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "amplitude", amp)
        object.__setattr__(self, "offset", off)
        object.__setattr__(self, "n", int(n))
        object.__setattr__(self, "enforce_hardy", enforce_hardy)

    @property
    def dim(self) -> int:
        return len(self.amplitude)

    @property
    def hardy(self) -> bool:
        return hardy_check(self.lam, self.r)

    def __call__(self, t):
        return eval_series(self, t)

    def coefficients(self) -> dict[int, np.ndarray]:
        """Bohr coefficient at ``mu = lam**k``: ``-amplitude * r**|k|``."""
        return {int(k): -self.amplitude * self.r ** abs(int(k)) for k in _ks(self.n)}

    def constant(self) -> np.ndarray:
        """Bohr coefficient at ``mu = 0``: ``offset + amplitude * sum r**|k|``."""
        return self.offset + self.amplitude * np.sum(self.r ** np.abs(_ks(self.n)))

    def to_dict(self) -> dict:
        return {
            "lambda": self.lam,
            "r": {"re": self.r.real, "im": self.r.imag},
            "amplitude": {"re": self.amplitude.real.tolist(), "im": self.amplitude.imag.tolist()},
            "offset": {"re": np.real(self.offset).tolist(), "im": np.imag(self.offset).tolist()},
            "n": self.n,
        }


def eval_series(series: WeierstrassSeries, t) -> np.ndarray:
    """Complex d-vector(s): shape ``(d,)`` for scalar ``t``, ``(N, d)`` for arrays."""
    t_arr = np.asarray(t, dtype=float)
    w = kernel(series.lam, series.r, series.n, np.atleast_1d(t_arr))
    out = series.offset[None, :] + w[:, None] * series.amplitude[None, :]
    return out[0] if t_arr.ndim == 0 else out


def eval_complex_r(lam: float, rho: float, theta: float, n: int, t) -> np.ndarray:
    """Conjugate-pair form ``2 sum_{|k|<=n} rho^|k| cos(k theta) (exp(i lam^k t) - 1)``.

    Equals the sum of the kernels for ``r = rho e^{i theta}`` and its
    conjugate, with the sign of the displayed formula (``e^{...} - 1``).
    """
    if not 0 < rho < 1:
        raise ValueError("rho must lie in (0, 1)")
    t = np.asarray(t, dtype=float)
    ks = _ks(n)
    weights = 2.0 * rho ** np.abs(ks) * np.cos(ks * theta)
    phases = np.multiply.outer(t, lam ** ks.astype(float))
    return (np.exp(1j * phases) - 1.0) @ weights


# -- scale behaviour ---------------------------------------------------------


def scale_defect(series: WeierstrassSeries, t) -> np.ndarray:
    """``|w(lam t) - w(t)/r|`` for the kernel of ``series``."""
    t = np.asarray(t, dtype=float)
    lam, r, n = series.lam, series.r, series.n
    return np.abs(kernel(lam, r, n, lam * t) - kernel(lam, r, n, t) / r)


def scale_identity_terms(series: WeierstrassSeries, t) -> tuple[np.ndarray, np.ndarray]:
    """Split ``w(lam t) - w(t)/r`` on the truncated range into (interior, edge).

    interior = (r^2 - 1) * sum_{k=-n+1}^{0} r^{-k-1} g(lam^k t)
    edge     = r^n g(lam^{n+1} t) - r^{n-1} g(lam^{-n} t)

    with ``g(x) = 1 - exp(i x)``.  The sum is exact for the truncated
    series; for ``n -> infinity`` the edge vanishes and the interior tends
    to the full ``k <= 0`` sum.
    """
    t = np.asarray(t, dtype=float)
    lam, r, n = series.lam, series.r, series.n

    def g(x):
        return 1.0 - np.exp(1j * x)

    ks = np.arange(-n + 1, 1)
    if ks.size:
        weights = (r * r - 1.0) * r ** (-ks - 1.0)
        interior = g(np.multiply.outer(t, lam ** ks.astype(float))) @ weights
    else:
        interior = np.zeros(t.shape, dtype=complex)
    edge = r ** n * g(lam ** (n + 1) * t) - r ** (n - 1) * g(lam ** (-float(n)) * t)
    return interior, edge


def shift_sum(series: WeierstrassSeries, t) -> np.ndarray:
    """``(r^2 - 1) sum_{k=-n}^{0} r^{-k-1} g(lam^k t)`` over the truncated index range."""
    t = np.asarray(t, dtype=float)
    lam, r, n = series.lam, series.r, series.n
    ks = np.arange(-n, 1)
    weights = (r * r - 1.0) * r ** (-ks - 1.0)
    return (1.0 - np.exp(1j * np.multiply.outer(t, lam ** ks.astype(float)))) @ weights


def linear_scale_bound(lam: float, r: float, t) -> np.ndarray:
    """``(1 - r^2) / (r (1 - r/lam)) |t|``: bound on the k <= 0 shift sum for 0 < r < 1."""
    if not 0 < r < 1:
        raise ValueError("bound derived for real 0 < r < 1")
    return (1 - r * r) / (r * (1 - r / lam)) * np.abs(np.asarray(t, dtype=float))


def tail_bound(series: WeierstrassSeries, t_max: float | None = None) -> float:
    """Uniform bound on the dropped ``|k| > n`` terms.

    ``2 ||amp|| |r|^{n+1} / (1 - |r|)`` covers ``k > n``; with ``t_max``
    the ``k < -n`` side adds ``||amp|| t_max (|r|/lam)^{n+1} / (1 - |r|/lam)``
    from ``|1 - e^{ix}| <= |x|``.
    """
    a = float(np.linalg.norm(series.amplitude))
    r = abs(series.r)
    if r >= 1:
        raise HardyViolation("tail bound needs |r| < 1")
    bound = 2 * a * r ** (series.n + 1) / (1 - r)
    if t_max is not None:
        q = r / series.lam
        bound += a * abs(t_max) * q ** (series.n + 1) / (1 - q)
    return float(bound)


def truncation_for(r: float, eps: float, amplitude: float = 1.0) -> int:
    """Smallest ``n`` with ``2 amplitude r^{n+1} / (1 - r) < eps``."""
    n = 0
    while 2 * amplitude * r ** (n + 1) / (1 - r) >= eps:
        n += 1
    return n


# -- dominant mode -----------------------------------------------------------


@dataclass(frozen=True)
class DominanceReport:
    dominant: complex
    ratios: list[float]
    sup_w: list[float]
    p: int
    sup_at_p: list[float]
    first_p_ratio: int | None
    first_p_sup: int | None
    threshold: float


def _first_p(values: Sequence[float], scale: Sequence[float], threshold: float, cap: int = 100_000):
    if not values:
        return None
    p = 0
    while True:
        if all(v ** p * s < threshold for v, s in zip(values, scale)):
            return p
        p += 1
        if p > cap:
            return None


def dominant_reduction(
    ratios,
    lam: float,
    p: int = 0,
    grid=None,
    n: int = 12,
    threshold: float = 1e-6,
) -> DominanceReport:
    """How fast subdominant modes fade relative to the smallest ``|r|``.

    For each subdominant mode ``i`` reports ``|r0/r_i|`` and
    ``sup_grid |w_i(t)|``; ``sup_at_p`` is ``|r0/r_i|^p sup|w_i|``.
    ``first_p_ratio`` is the smallest ``p`` with every ``|r0/r_i|^p`` under
    ``threshold``; ``first_p_sup`` includes the ``sup|w_i|`` factor.

    ``ratios`` may be a sequence of ``r`` values or an object with a
    ``ratios`` attribute.
    """
    if hasattr(ratios, "ratios"):
        ratios = ratios.ratios
    rs = [complex(r) for r in ratios]
    if not rs:
        raise ValueError("need at least one mode")
    grid = np.linspace(0.0, 2 * math.pi, 1025) if grid is None else np.asarray(grid, float)
    mods = [abs(r) for r in rs]
    i0 = int(np.argmin(mods))
    r0 = rs[i0]
    others = [r for i, r in enumerate(rs) if i != i0]
    if any(math.isclose(abs(r), abs(r0), rel_tol=1e-12) for r in others):
        raise DominanceTie(f"no dominant mode: several ratios share |r| = {abs(r0):.6g}")
    q = [abs(r0) / abs(r) for r in others]
    sups = [float(np.max(np.abs(kernel(lam, r, n, grid)))) for r in others]
    return DominanceReport(
        dominant=r0,
        ratios=q,
        sup_w=sups,
        p=p,
        sup_at_p=[v ** p * s for v, s in zip(q, sups)],
        first_p_ratio=_first_p(q, [1.0] * len(q), threshold),
        first_p_sup=_first_p(q, sups, threshold),
        threshold=threshold,
    )


def sum_series(series_list: Sequence[WeierstrassSeries], t) -> np.ndarray:
    """Pointwise sum of several series (shared dimension)."""
    if not series_list:
        raise ValueError("empty series list")
    total = eval_series(series_list[0], t)
    for s in series_list[1:]:
        total = total + eval_series(s, t)
    return total


def warn_hardy(message: str) -> None:
    warnings.warn(message, HardyWarning, stacklevel=3)
