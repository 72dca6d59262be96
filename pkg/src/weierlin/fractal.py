"""Fractal dimension: closed-form values and a 2-D box-counting estimator."""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegeneratePointCloud, HardyViolation
from .weierstrass import hardy_check

log = logging.getLogger(__name__)

MIN_POINTS = 1000
DEFAULT_SCALES = 12
FIT_SCALES = 8


def theoretical_dimension(r0: complex, lam: float) -> float:
    """``D = 2 + log|r0| / log lam`` for a graph of ``w_{r0}``.

    Only meaningful inside the Hardy window, where it lies in (1, 2).
    """
    if not hardy_check(lam, r0):
        raise HardyViolation(f"dimension formula needs the Hardy window (lambda={lam}, r={r0})")
    return 2.0 + math.log(abs(r0)) / math.log(abs(lam))


def diffiter_dimension(sigma: float, rho: float) -> float:
    """``D = 1 - sigma / rho`` for the differential-iteration limit.

    Values outside (1, 2) are returned as computed but logged.
    """
    if sigma >= 0:
        raise HardyViolation(f"need sigma < 0, got {sigma}")
    if rho <= 0:
        raise ValueError(f"need rho > 0, got {rho}")
    D = 1.0 - sigma / rho
    if not 1.0 < D < 2.0:
        log.warning("dimension %.6g outside (1, 2)", D)
    return D


@dataclass(frozen=True)
class BoxCountEstimate:
    scales: np.ndarray
    counts: np.ndarray
    slope: float
    D: float
    r2: float
    fit: slice

    def to_dict(self) -> dict:
        return {
            "D": self.D,
            "slope": self.slope,
            "r2": self.r2,
            "fit_start": self.fit.start,
            "fit_stop": self.fit.stop,
            "table": [
                {"scale": float(s), "count": int(c)} for s, c in zip(self.scales, self.counts)
            ],
        }


def count_boxes(points: np.ndarray, origin: np.ndarray, eps: float) -> int:
    idx = np.floor((points - origin) / eps).astype(np.int64)
    idx -= idx.min(axis=0)
    width = int(idx[:, 1].max()) + 1
    return int(np.unique(idx[:, 0] * width + idx[:, 1]).size)


def default_fit(n_scales: int) -> slice:
    if n_scales <= FIT_SCALES:
        return slice(0, n_scales)
    start = (n_scales - FIT_SCALES) // 2
    return slice(start, start + FIT_SCALES)


def box_dimension(
    points,
    min_scale: float | None = None,
    max_scale: float | None = None,
    n_scales: int = DEFAULT_SCALES,
    fit: slice | None = None,
    origin=None,
) -> BoxCountEstimate:
    """Box-counting dimension of a planar point cloud.

    Square boxes anchored at the lower-left corner of the cloud.  Scales
    are geometric from ``max_scale`` down to ``min_scale`` (defaults:
    extent/2 and extent/256, where extent is the larger side of the
    bounding box).  The slope of ``log N`` against ``log eps`` is fitted on
    the middle ``FIT_SCALES`` scales unless ``fit`` is given.  ``origin``
    overrides the grid anchor (it must not exceed the cloud's minimum).
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("points must have shape (N, 2)")
    if len(pts) < MIN_POINTS:
        raise ValueError(f"need at least {MIN_POINTS} points, got {len(pts)}")
    if not np.all(np.isfinite(pts)):
        raise ValueError("non-finite coordinates")
    lower = pts.min(axis=0)
    if origin is None:
        origin = lower
    else:
        origin = np.asarray(origin, dtype=float)
        if np.any(origin > lower):
            raise ValueError("origin must lie at or below the cloud's minimum corner")
    extent = float(np.ptp(pts, axis=0).max())
    if extent == 0.0:
        raise DegeneratePointCloud("all points coincide")
    hi = extent / 2 if max_scale is None else float(max_scale)
    lo = extent / 256 if min_scale is None else float(min_scale)
    if not 0 < lo < hi:
        raise ValueError("need 0 < min_scale < max_scale")
    if n_scales < 2:
        raise ValueError("need at least two scales")
    scales = np.geomspace(hi, lo, n_scales)
    counts = np.array([count_boxes(pts, origin, eps) for eps in scales])
    if counts[-1] <= 1:
        raise DegeneratePointCloud("every point falls in one box at the finest scale")
    fit = default_fit(n_scales) if fit is None else fit
    x = np.log(scales[fit])
    y = np.log(counts[fit])
    slope, intercept = np.polyfit(x, y, 1)
    pred = slope * x + intercept
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 0.0
    return BoxCountEstimate(scales, counts, float(slope), float(-slope), r2, fit)


def graph_points(t, values) -> np.ndarray:
    """Planar graph ``(t, Re w(t))``; the real part is used for complex signals."""
    return np.column_stack([np.asarray(t, float), np.real(np.asarray(values)).reshape(-1)])


def read_points_csv(path) -> np.ndarray:
    """Two numeric columns (x, y) after a header row."""
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if len(rows) < 2:
        raise ValueError(f"{path}: no data rows")
    try:
        pts = np.array([[float(r[0]), float(r[1])] for r in rows[1:]])
    except (ValueError, IndexError) as exc:
        raise ValueError(f"{path}: expected two numeric columns ({exc})") from exc
    return pts
