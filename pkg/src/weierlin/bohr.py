"""Fourier-Bohr coefficients by finite-window time averaging.

    c(mu) ~ 1/(2T) * integral_{-T}^{T} a(t) exp(-i mu t) dt

estimated with the trapezoidal rule on a uniform grid.  The scan only
looks at the geometric almost-period grid ``mu = lambda**k`` plus ``mu = 0``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

MIN_SAMPLES = 64
SAMPLES_PER_PERIOD = 16
INSTABILITY = 0.5


@dataclass(frozen=True)
class BohrCoefficient:
    mu: float
    value: np.ndarray
    window: float
    samples: int
    k: int | None = None
    null: bool = False
    stable: bool = True

    @property
    def magnitude(self) -> float:
        return float(np.linalg.norm(self.value))


@dataclass(frozen=True)
class AlmostPeriodSet:
    """Coefficients on ``mu = lambda**k`` for ``k in k_range`` plus the offset ``mu = 0``."""

    lam: float
    k_range: tuple[int, int]
    coefficients: list[BohrCoefficient]
    offset: BohrCoefficient
    noise_floor: float
    samples: int
    window: float = field(default=0.0)

    @property
    def stable(self) -> bool:
        return self.offset.stable and all(c.stable for c in self.coefficients)

    def by_k(self, k: int) -> BohrCoefficient:
        return self.coefficients[k - self.k_range[0]]

    def to_dict(self) -> dict:
        def row(c: BohrCoefficient) -> dict:
            return {
                "k": c.k,
                "mu": c.mu,
                "re": np.real(c.value).tolist(),
                "im": np.imag(c.value).tolist(),
                "magnitude": c.magnitude,
                "null": c.null,
                "stable": c.stable,
            }

        return {
            "lambda": self.lam,
            "k_min": self.k_range[0],
            "k_max": self.k_range[1],
            "window": self.window,
            "samples": self.samples,
            "noise_floor": self.noise_floor,
            "stable": self.stable,
            "offset": row(self.offset),
            "coefficients": [row(c) for c in self.coefficients],
        }


def noise_floor(T: float) -> float:
    return max(1e-9, 10.0 / T)


def _as_2d(values: np.ndarray) -> np.ndarray:
    values = np.asarray(values)
    return values.reshape(len(values), -1)


def _check_finite(values: np.ndarray) -> None:
    if not np.all(np.isfinite(values)):
        raise ValueError("signal has non-finite samples")


def mean_coefficient(t: np.ndarray, values: np.ndarray, mu: float) -> np.ndarray:
    """Trapezoidal mean of ``values * exp(-i mu t)`` over the sampled window."""
    t = np.asarray(t, dtype=float)
    values = _as_2d(values)
    _check_finite(values)
    span = t[-1] - t[0]
    if span <= 0:
        raise ValueError("sample times must increase")
    kernel = np.exp(-1j * mu * t)[:, None]
    return np.trapezoid(values * kernel, t, axis=0) / span


def sample(signal: Callable, T: float, samples: int) -> tuple[np.ndarray, np.ndarray]:
    t = np.linspace(-T, T, samples)
    return t, _as_2d(signal(t))


def bohr_coefficient(signal: Callable, mu: float, T: float, samples: int = 4097) -> BohrCoefficient:
    """Estimate ``c(mu)`` of ``signal`` (vectorized callable ``t -> (N,) or (N, d)``)."""
    if T <= 0:
        raise ValueError("window T must be positive")
    if samples < MIN_SAMPLES:
        raise ValueError(f"need at least {MIN_SAMPLES} samples")
    t, values = sample(signal, T, samples)
    return BohrCoefficient(float(mu), mean_coefficient(t, values, mu), float(T), int(samples))


def required_samples(mu_max: float, T: float, samples: int | None = None) -> int:
    need = math.ceil(SAMPLES_PER_PERIOD * mu_max * 2 * T / (2 * math.pi)) + 1
    return max(need, samples or 0, MIN_SAMPLES)


def _differs(a: np.ndarray, b: np.ndarray, floor: float) -> bool:
    big = max(np.linalg.norm(a), np.linalg.norm(b))
    return big > floor and np.linalg.norm(a - b) > INSTABILITY * big


def scan_spectrum(
    signal: Callable,
    lam: float,
    k_min: int,
    k_max: int,
    T: float,
    samples: int | None = None,
) -> AlmostPeriodSet:
    """Estimate coefficients at ``mu = lam**k`` (``k_min..k_max``) and at ``mu = 0``.

    Every coefficient is computed on windows ``T`` and ``2T``; it is
    flagged unstable when the two estimates differ by more than 50 % of
    the larger one (and the larger one clears the noise floor).  A
    coefficient below ``max(1e-9, 10/T)`` is flagged null.

    The default sample count resolves ``lam**k_max`` only.  Pass
    ``samples`` (see :func:`required_samples`) when the signal carries
    higher frequencies, otherwise they alias onto the scanned ones.
    """
    if lam <= 1:
        raise ValueError("lambda must exceed 1")
    if k_min > k_max:
        raise ValueError("k_min must not exceed k_max")
    if T <= 0:
        raise ValueError("window T must be positive")
    n = required_samples(lam ** k_max, T, samples)
    floor = noise_floor(T)
    t1, v1 = sample(signal, T, n)
    t2, v2 = sample(signal, 2 * T, 2 * n - 1)

    def estimate(mu: float, k: int | None) -> BohrCoefficient:
        c1 = mean_coefficient(t1, v1, mu)
        c2 = mean_coefficient(t2, v2, mu)
        return BohrCoefficient(
            mu=mu,
            value=c1,
            window=float(T),
            samples=n,
            k=k,
            null=bool(np.linalg.norm(c1) < floor),
            stable=not _differs(c1, c2, floor),
        )

    coeffs = [estimate(float(lam ** k), k) for k in range(k_min, k_max + 1)]
    return AlmostPeriodSet(
        lam=float(lam),
        k_range=(k_min, k_max),
        coefficients=coeffs,
        offset=estimate(0.0, None),
        noise_floor=floor,
        samples=n,
        window=float(T),
    )


def scan_sampled(t, values, lam: float, k_min: int, k_max: int) -> AlmostPeriodSet:
    """Scan an externally sampled signal (uniform grid).  No stability check
    is possible beyond the given window, so the half-window is used as the
    comparison estimate."""
    t = np.asarray(t, dtype=float)
    values = _as_2d(values)
    _check_finite(values)
    dt = np.diff(t)
    if len(t) < MIN_SAMPLES or np.any(dt <= 0) or np.ptp(dt) > 1e-6 * dt.mean():
        raise ValueError("need >= 64 strictly increasing, uniformly spaced samples")
    T = (t[-1] - t[0]) / 2
    mid = (t[0] + t[-1]) / 2
    inner = np.abs(t - mid) <= T / 2 + 1e-12 * T
    floor = noise_floor(T)

    def estimate(mu: float, k: int | None) -> BohrCoefficient:
        c1 = mean_coefficient(t, values, mu)
        c_half = mean_coefficient(t[inner], values[inner], mu)
        return BohrCoefficient(
            mu=mu,
            value=c1,
            window=float(T),
            samples=len(t),
            k=k,
            null=bool(np.linalg.norm(c1) < floor),
            stable=not _differs(c1, c_half, floor),
        )

    return AlmostPeriodSet(
        lam=float(lam),
        k_range=(k_min, k_max),
        coefficients=[estimate(float(lam ** k), k) for k in range(k_min, k_max + 1)],
        offset=estimate(0.0, None),
        noise_floor=floor,
        samples=len(t),
        window=float(T),
    )


def parseval_defect(aps: AlmostPeriodSet, signal: Callable, T: float, samples: int | None = None) -> float:
    """``| mean ||a(t)||^2 - sum_mu ||c(mu)||^2 |`` over the scanned set."""
    t, values = sample(signal, T, samples or aps.samples)
    _check_finite(values)
    power = np.trapezoid(np.sum(np.abs(values) ** 2, axis=1), t) / (2 * T)
    spectral = np.linalg.norm(aps.offset.value) ** 2 + sum(
        np.linalg.norm(c.value) ** 2 for c in aps.coefficients
    )
    return float(abs(power - spectral))


def mean_power(signal: Callable, T: float, samples: int) -> float:
    t, values = sample(signal, T, samples)
    return float(np.trapezoid(np.sum(np.abs(values) ** 2, axis=1), t) / (2 * T))


def read_signal_csv(path) -> tuple[np.ndarray, np.ndarray]:
    """Read ``t, re(a1), im(a1), re(a2), im(a2), ...`` with a header row."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty file")
    try:
        data = np.array([[float(x) for x in r] for r in rows[1:] if r], dtype=float)
    except ValueError as exc:
        raise ValueError(f"{path}: non-numeric entry ({exc})") from exc
    if data.ndim != 2 or data.shape[1] < 3 or (data.shape[1] - 1) % 2:
        raise ValueError(f"{path}: expected columns t, re, im per coordinate")
    t = data[:, 0]
    values = data[:, 1::2] + 1j * data[:, 2::2]
    return t, values
