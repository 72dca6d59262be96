"""Sparse polynomial maps of R^d and the fixed-point / spectrum machinery around them.

A map is a list of monomial terms ``(target, exponents, coeff)``; the
component ``f_target`` receives ``coeff * prod(a_j ** exponents[j])``.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Callable, Iterable, NamedTuple, Sequence

import numpy as np

from .errors import (
    ConvergenceError,
    DefectiveMatrixError,
    DegreeOverflowError,
    DimensionError,
    SingularSystemError,
)

MAX_DEGREE = 64
RESONANCE_TOL = 1e-9
NEWTON_MAX_ITER = 200


Term = tuple[int, tuple[int, ...], float]


@dataclass(frozen=True)
class PolyMap:
    """Polynomial map R^d -> R^d stored as sparse monomial terms.

    Duplicate ``(target, exponents)`` pairs are merged on construction and
    exact zeros are dropped, so two maps built from the same polynomial in
    different term order compare equal.
    """

    dim: int
    terms: tuple[Term, ...]
    _targets: np.ndarray = field(init=False, repr=False, compare=False)
    _exps: np.ndarray = field(init=False, repr=False, compare=False)
    _coeffs: np.ndarray = field(init=False, repr=False, compare=False)

    def __init__(self, dim: int, terms: Iterable[Sequence]):
        if int(dim) < 1:
            raise ValueError(f"dim must be positive, got {dim}")
        dim = int(dim)
        merged: dict[tuple[int, tuple[int, ...]], float] = {}
        for term in terms:
            target, exps, coeff = term
            target = int(target)
            exps = tuple(int(e) for e in exps)
            if not 0 <= target < dim:
                raise DimensionError(f"target index {target} outside 0..{dim - 1}")
            if len(exps) != dim:
                raise DimensionError(f"multi-index {exps} has length {len(exps)}, expected {dim}")
            if any(e < 0 for e in exps):
                raise ValueError(f"negative exponent in {exps}")
            key = (target, exps)
            merged[key] = merged.get(key, 0.0) + float(coeff)
        clean = tuple(sorted((t, e, c) for (t, e), c in merged.items() if c != 0.0))
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "terms", clean)
        m = len(clean)
        object.__setattr__(self, "_targets", np.array([t for t, _, _ in clean], dtype=int))
        object.__setattr__(
            self, "_exps", np.array([e for _, e, _ in clean], dtype=int).reshape(m, dim)
        )
        object.__setattr__(self, "_coeffs", np.array([c for _, _, c in clean], dtype=float))

    # -- constructors ------------------------------------------------------

    @classmethod
    def identity(cls, dim: int) -> "PolyMap":
        return cls.affine(np.eye(dim))

    @classmethod
    def affine(cls, matrix, offset=None) -> "PolyMap":
        """``a -> matrix @ a + offset``."""
        matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
        d = matrix.shape[0]
        if matrix.shape != (d, d):
            raise DimensionError(f"matrix must be square, got {matrix.shape}")
        terms = []
        for i in range(d):
            for j in range(d):
                if matrix[i, j] != 0.0:
                    exps = [0] * d
                    exps[j] = 1
                    terms.append((i, exps, matrix[i, j]))
        if offset is not None:
            offset = np.asarray(offset, dtype=float).reshape(-1)
            if offset.shape != (d,):
                raise DimensionError("offset length must match matrix size")
            for i in range(d):
                terms.append((i, [0] * d, offset[i]))
        return cls(d, terms)

    @classmethod
    def from_dict(cls, spec: dict) -> "PolyMap":
        """Build from ``{"dim": d, "terms": [{"target", "exponents", "coeff"}]}``."""
        try:
            dim = spec["dim"]
            raw = spec["terms"]
        except (KeyError, TypeError) as exc:
            raise ValueError(f"map spec needs 'dim' and 'terms': {exc}") from exc
        terms = []
        for k, t in enumerate(raw):
            try:
                terms.append((t["target"], t["exponents"], t["coeff"]))
            except (KeyError, TypeError) as exc:
                raise ValueError(f"term {k} malformed: {t!r}") from exc
        return cls(dim, terms)

    @classmethod
    def from_json(cls, text: str) -> "PolyMap":
        # JSONDecodeError already carries line/column; let it propagate.
        return cls.from_dict(json.loads(text))

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "terms": [
                {"target": t, "exponents": list(e), "coeff": c} for t, e, c in self.terms
            ],
        }

    # -- basic properties --------------------------------------------------

    @property
    def degree(self) -> int:
        if not self.terms:
            return 0
        return int(self._exps.sum(axis=1).max())

    def components(self) -> list[dict[tuple[int, ...], float]]:
        """Per-coordinate ``{exponents: coeff}`` dictionaries."""
        out: list[dict[tuple[int, ...], float]] = [{} for _ in range(self.dim)]
        for t, e, c in self.terms:
            out[t][e] = c
        return out

    def __call__(self, a):
        return evaluate(self, a)


def _check_vector(f: PolyMap, a) -> np.ndarray:
    a = np.asarray(a)
    if a.ndim == 0 or a.shape[-1] != f.dim:
        raise DimensionError(f"expected trailing dimension {f.dim}, got shape {a.shape}")
    return a


def _monomials(f: PolyMap, a: np.ndarray) -> np.ndarray:
    # shape (..., n_terms)
    if not f.terms:
        return np.zeros(a.shape[:-1] + (0,), dtype=a.dtype)
    return np.prod(a[..., None, :] ** f._exps, axis=-1)


def evaluate(f: PolyMap, a) -> np.ndarray:
    """Evaluate the map at ``a`` (shape ``(d,)`` or a batch ``(..., d)``; complex allowed)."""
    a = _check_vector(f, a)
    if not np.iscomplexobj(a):
        a = a.astype(float)
    mono = _monomials(f, a) * f._coeffs
    out = np.zeros(a.shape, dtype=mono.dtype if mono.size else a.dtype)
    for i in range(f.dim):
        sel = f._targets == i
        if sel.any():
            out[..., i] = mono[..., sel].sum(axis=-1)
    return out


def jacobian(f: PolyMap, a) -> np.ndarray:
    """Analytic Jacobian ``J[..., i, j] = d f_i / d a_j``."""
    a = _check_vector(f, a)
    if not np.iscomplexobj(a):
        a = a.astype(float)
    d = f.dim
    out = np.zeros(a.shape + (d,), dtype=a.dtype)
    if not f.terms:
        return out
    for j in range(d):
        ej = f._exps[:, j]
        active = ej > 0
        if not active.any():
            continue
        exps = f._exps[active].copy()
        exps[:, j] -= 1
        mono = np.prod(a[..., None, :] ** exps, axis=-1) * (f._coeffs[active] * ej[active])
        targets = f._targets[active]
        for i in range(d):
            sel = targets == i
            if sel.any():
                out[..., i, j] = mono[..., sel].sum(axis=-1)
    return out


# -- polynomial algebra ----------------------------------------------------

Poly = dict[tuple[int, ...], float]


def _poly_mul(p: Poly, q: Poly) -> Poly:
    out: Poly = {}
    for ep, cp in p.items():
        for eq, cq in q.items():
            e = tuple(x + y for x, y in zip(ep, eq))
            out[e] = out.get(e, 0.0) + cp * cq
    return out


def compose(f: PolyMap, g: PolyMap, max_degree: int = MAX_DEGREE) -> PolyMap:
    """Return the polynomial map ``f o g`` (apply ``g`` first)."""
    if f.dim != g.dim:
        raise DimensionError(f"cannot compose maps of dimension {f.dim} and {g.dim}")
    if f.degree * max(g.degree, 1) > max_degree:
        raise DegreeOverflowError(
            f"composition degree {f.degree * g.degree} exceeds cap {max_degree}"
        )
    d = f.dim
    gcomp = g.components()
    one = {(0,) * d: 1.0}
    powers: dict[tuple[int, int], Poly] = {}

    def power(j: int, e: int) -> Poly:
        if e == 0:
            return one
        key = (j, e)
        if key not in powers:
            powers[key] = _poly_mul(power(j, e - 1), gcomp[j])
        return powers[key]

    terms = []
    for target, exps, coeff in f.terms:
        prod = one
        for j, e in enumerate(exps):
            if e:
                prod = _poly_mul(prod, power(j, e))
        for e, c in prod.items():
            terms.append((target, e, coeff * c))
    return PolyMap(d, terms)


def iterate_map(f: PolyMap, p: int) -> PolyMap:
    """``f^(p)`` as a single polynomial (p >= 1)."""
    if p < 1:
        raise ValueError("p must be >= 1")
    out = map
    for _ in range(p - 1):
        out = compose(f, out)
    return out


def shift(f: PolyMap, point) -> PolyMap:
    """Conjugate by translation: ``a -> f(a + point) - point``.

    If ``point`` is a fixed point of ``f`` the result fixes the origin.
    """
    point = np.asarray(point, dtype=float).reshape(-1)
    d = f.dim
    forward = PolyMap.affine(np.eye(d), point)
    back = PolyMap.affine(np.eye(d), -point)
    return compose(back, compose(f, forward))


def dilate(f: PolyMap, scales) -> PolyMap:
    """Conjugate by a diagonal dilation ``D``: ``a -> D f(D^-1 a)``."""
    s = np.asarray(scales, dtype=float).reshape(-1)
    if s.shape != (f.dim,):
        raise DimensionError("one scale per coordinate")
    terms = []
    for t, e, c in f.terms:
        terms.append((t, e, c * s[t] / np.prod(s ** np.asarray(e))))
    return PolyMap(f.dim, terms)


def add(f: PolyMap, g: PolyMap) -> PolyMap:
    if f.dim != g.dim:
        raise DimensionError("dimension mismatch")
    return PolyMap(f.dim, list(f.terms) + list(g.terms))


def row_scale(f: PolyMap, weights) -> PolyMap:
    """Multiply component ``i`` by ``weights[i]``."""
    w = np.asarray(weights, dtype=float).reshape(-1)
    if w.shape != (f.dim,):
        raise DimensionError("one weight per component")
    return PolyMap(f.dim, [(t, e, c * w[t]) for t, e, c in f.terms])


# -- Newton ------------------------------------------------------------------


def newton(
    residual: Callable[[np.ndarray], np.ndarray],
    jac: Callable[[np.ndarray], np.ndarray],
    seed,
    tol: float,
    max_iter: int = NEWTON_MAX_ITER,
) -> np.ndarray:
    """Damped Newton iteration for ``residual(x) = 0``.

    The step is halved while the residual norm fails to decrease.  Returns
    the first iterate with ``||residual|| <= tol``.

    Raises
    ------
    SingularSystemError
        The Newton matrix is singular at some iterate.
    ConvergenceError
        ``max_iter`` exhausted without reaching ``tol``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    x = np.array(seed, dtype=float).reshape(-1)
    g = residual(x)
    norm = np.linalg.norm(g)
    for _ in range(max_iter):
        if not np.isfinite(norm):
            break
        if norm <= tol:
            return x
        J = np.atleast_2d(jac(x))
        try:
            if np.linalg.cond(J) > 1e14:
                raise np.linalg.LinAlgError("ill-conditioned")
            step = np.linalg.solve(J, -g)
        except np.linalg.LinAlgError as exc:
            raise SingularSystemError(f"singular Newton system at {x.tolist()}") from exc
        scale = 1.0
        for _ in range(40):
            trial = x + scale * step
            g_trial = residual(trial)
            n_trial = np.linalg.norm(g_trial)
            if np.isfinite(n_trial) and n_trial < norm:
                break
            scale *= 0.5
        else:
            # no decrease anywhere along the ray: stagnation at rounding level
            if norm <= tol:
                return x
            raise ConvergenceError(f"Newton stagnated at residual {norm:.3e}")
        x, g, norm = trial, g_trial, n_trial
    if norm <= tol:
        return x
    raise ConvergenceError(f"Newton did not reach tol={tol:g} in {max_iter} iterations")


def find_fixed_point(f: PolyMap, seed, tol: float = 1e-12) -> np.ndarray:
    """Solve ``f(a) = a`` by damped Newton from ``seed``."""
    seed = _check_vector(f, np.asarray(seed, dtype=float).reshape(-1))
    eye = np.eye(f.dim)
    a = newton(
        lambda x: evaluate(f, x) - x,
        lambda x: jacobian(f, x) - eye,
        seed,
        tol,
    )
    assert np.linalg.norm(evaluate(f, a) - a) <= tol
    return a


# -- spectra -----------------------------------------------------------------


@dataclass(frozen=True)
class Spectrum:
    """Eigenpairs sorted by decreasing modulus; ``eigenvectors[i]`` pairs with ``eigenvalues[i]``."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def expanding_mask(self) -> np.ndarray:
        return np.abs(self.eigenvalues) > 1.0

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)


def normalize_vector(v) -> np.ndarray:
    """Unit norm with the first non-negligible component real and positive."""
    v = np.asarray(v, dtype=complex)
    v = v / np.linalg.norm(v)
    big = np.abs(v) > 1e-12 * np.abs(v).max()
    first = v[np.argmax(big)]
    return v * (abs(first) / first)


def eigen_decompose(J) -> Spectrum:
    """Dense eigen-decomposition of a small real matrix (LAPACK ``geev``)."""
    J = np.atleast_2d(np.asarray(J, dtype=float))
    d = J.shape[0]
    if J.shape != (d, d):
        raise DimensionError(f"matrix must be square, got {J.shape}")
    if not np.all(np.isfinite(J)):
        raise ValueError("matrix has non-finite entries")
    if d > 16:
        raise ValueError("dense solver limited to d <= 16")
    vals, vecs = np.linalg.eig(J)
    if d > 1 and np.linalg.cond(vecs) > 1e10:
        raise DefectiveMatrixError(
            f"eigenvectors nearly dependent for eigenvalues {vals}; "
            "repeated eigenvalue lacks full geometric multiplicity"
        )
    order = sorted(range(d), key=lambda i: (-abs(vals[i]), -vals[i].real, -vals[i].imag))
    vals = vals[order].astype(complex)
    vecs = np.array([normalize_vector(vecs[:, i]) for i in order])
    scale = max(1.0, np.linalg.norm(J, 2))
    for lam, v in zip(vals, vecs):
        if np.linalg.norm(J @ v - lam * v) > 1e-9 * scale:
            raise ArithmeticError(f"eigen residual too large for eigenvalue {lam}")
    return Spectrum(vals, vecs)


class NonResonance(NamedTuple):
    ok: bool
    witness: tuple[int, ...] | None


def _compositions(total: int, parts: int):
    """Non-negative compositions in decreasing lexicographic order."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def multi_indices(total: int, parts: int):
    """All non-negative multi-indices of given total degree (lexicographically decreasing)."""
    return _compositions(total, parts)


def check_nonresonance(
    spectrum: Spectrum, max_order: int, tol: float = RESONANCE_TOL
) -> NonResonance:
    """Scan integer multi-indices ``n`` with ``2 <= |n|_1 <= max_order`` for ``lambda^n = 1``.

    Entries of ``n`` may be negative (``n`` ranges over Z^d).  The first
    witness in a deterministic order (by total order, then decreasing
    lexicographic magnitude pattern, then sign pattern with positives first)
    is returned.
    """
    if max_order < 2:
        raise ValueError("max_order must be >= 2")
    lam = np.asarray(spectrum.eigenvalues, dtype=complex)
    d = len(lam)
    for order in range(2, max_order + 1):
        for pattern in _compositions(order, d):
            nz = [i for i, e in enumerate(pattern) if e]
            for signs in itertools.product((1, -1), repeat=len(nz)):
                n = list(pattern)
                for i, s in zip(nz, signs):
                    n[i] *= s
                if any(n[i] < 0 and lam[i] == 0 for i in range(d)):
                    continue
                value = np.prod([lam[i] ** n[i] for i in nz])
                if abs(value - 1.0) <= tol:
                    return NonResonance(False, tuple(n))
    return NonResonance(True, None)


# -- bounded orbits ----------------------------------------------------------


@dataclass(frozen=True)
class BoxRegion:
    lower: np.ndarray
    upper: np.ndarray

    def __init__(self, lower, upper):
        lo = np.asarray(lower, dtype=float).reshape(-1)
        hi = np.asarray(upper, dtype=float).reshape(-1)
        if lo.shape != hi.shape or np.any(lo > hi):
            raise ValueError("need lower <= upper componentwise with equal lengths")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    def contains(self, points) -> np.ndarray:
        p = np.asarray(points)
        return np.all((p >= self.lower) & (p <= self.upper), axis=-1)


class OrbitReport(NamedTuple):
    bounded: bool
    sample: int | None = None
    step: int | None = None
    point: np.ndarray | None = None


def orbit_bounded(
    f: PolyMap,
    region: BoxRegion,
    samples: int,
    steps: int,
    seeds=None,
    rng: int | np.random.Generator | None = 0,
) -> OrbitReport:
    """Check that sampled orbits of length ``steps`` stay inside ``region``.

    Seeds are drawn uniformly in ``region`` unless given explicitly.  The
    reported escape is the lowest-indexed escaping seed, with the number
    of applications of ``f`` after which it first left the region.
    """
    if samples < 1 or steps < 1:
        raise ValueError("samples and steps must be >= 1")
    if seeds is None:
        gen = np.random.default_rng(rng)
        x = gen.uniform(region.lower, region.upper, size=(samples, f.dim))
    else:
        x = np.asarray(seeds, dtype=float).reshape(-1, f.dim)[:samples].copy()
    first_escape = np.full(len(x), -1)
    escape_point = np.zeros_like(x)
    alive = np.ones(len(x), dtype=bool)
    for step in range(1, steps + 1):
        with np.errstate(over="ignore", invalid="ignore"):
            x[alive] = evaluate(f, x[alive])
        out = alive & ~(region.contains(x) & np.all(np.isfinite(x), axis=-1))
        if out.any():
            first_escape[out] = step
            escape_point[out] = x[out]
            alive &= ~out
        if not alive.any():
            break
    escaped = np.flatnonzero(first_escape >= 0)
    if escaped.size == 0:
        return OrbitReport(True)
    i = int(escaped[0])
    return OrbitReport(False, i, int(first_escape[i]), escape_point[i])


def classic_henon(sigma: float = 1.4, beta: float = 0.3) -> PolyMap:
    """``(x, y) -> (1 - sigma x^2 + y, beta x)``."""
    return PolyMap(
        2,
        [
            (0, (0, 0), 1.0),
            (0, (2, 0), -sigma),
            (0, (0, 1), 1.0),
            (1, (1, 0), beta),
        ],
    )

