import warnings

import numpy as np
import pytest

from weierlin import apsolve as ap
from weierlin import polymap as pm
from weierlin.errors import HardyViolation, HardyWarning, NoNonzeroOffset

import oracles


def quadratic():
    return pm.PolyMap(1, [(0, (1,), 2.0), (0, (2,), 1.0)])


def test_scalar_offset_and_mode():
    f = quadratic()
    c0 = ap.solve_offset(f, 2.0)
    assert c0[0] == pytest.approx(oracles.OFFSET_2A_A2, abs=1e-12)
    assert ap.offset_residual(f, 2.0, c0) <= 1e-10
    modes, excluded = ap.solve_modes(f, c0, 2.0)
    assert excluded == []
    assert len(modes) == 1
    assert modes[0].r == pytest.approx(oracles.MODE_R_2A_A2, abs=1e-12)
    assert modes[0].rho == pytest.approx(-1.0, abs=1e-12)
    assert not modes[0].hardy


def test_linear_map_has_no_offset():
    with pytest.raises(NoNonzeroOffset):
        ap.solve_offset(pm.PolyMap(1, [(0, (1,), 2.0)]), 2.0)


def test_offset_argument_checks():
    with pytest.raises(ValueError):
        ap.solve_offset(quadratic(), 1.0)
    with pytest.raises(ValueError):
        ap.solve_offset(quadratic(), 2.0, seeds=[], grid=False)


def test_offset_follows_dilation():
    f = quadratic()
    s = np.array([3.0])
    g = pm.dilate(f, s)
    # the dilated root -4.5 lies outside the default seed box
    got = ap.solve_offset(g, 2.0, half_width=8.0)
    assert got == pytest.approx(s * ap.solve_offset(f, 2.0), abs=1e-10)


def test_seed_grid_deterministic_and_origin_free():
    a = ap.seed_grid(2)
    assert np.array_equal(a, ap.seed_grid(2))
    assert np.all(np.linalg.norm(a, axis=1) > 0)
    assert np.all(np.diff(np.linalg.norm(a, axis=1)) >= -1e-12)


def test_diagonal_modes_axis_aligned():
    f = pm.PolyMap(2, [(0, (1, 0), 3.0), (1, (0, 1), 0.5)])
    modes, _ = ap.solve_modes(f, [0.7, -0.2], 2.0)
    for m in modes:
        assert np.count_nonzero(np.abs(m.c) > 1e-12) == 1
    assert [m.r for m in modes] == pytest.approx([1 / 6, 1.0])


def test_mode_residual():
    f = pm.classic_henon()
    c = np.array([0.3, -0.1])
    J = pm.jacobian(f, c)
    modes, _ = ap.solve_modes(f, c, 1.9)
    for m in modes:
        rho = 1.0 / (m.r * 1.9)
        assert np.linalg.norm(J @ m.c - rho * m.c) <= 1e-9 * np.linalg.norm(m.c)


def test_zero_eigenvalue_excluded():
    f = pm.PolyMap(2, [(0, (1, 0), 2.0), (0, (2, 0), 1.0)])
    with pytest.warns(HardyWarning):
        modes, excluded = ap.solve_modes(f, [-1.5, 0.0], 2.0)
    assert excluded == [0j]
    assert len(modes) == 1


def test_complex_pair_merged():
    rot = pm.PolyMap.affine([[0.0, -1.0], [1.0, 0.0]], [0.0, 0.0])
    modes, _ = ap.solve_modes(rot, [0.0, 0.0], 2.0)
    assert len(modes) == 1 and modes[0].paired
    assert modes[0].rho.imag > 0


def test_henon_cross_check():
    from weierlin import henon

    o = henon.henon_at_origin()
    lsq = o.spectrum.eigenvalues[0].real ** 2
    ff = henon.double_iterate(o.map)
    c0 = henon.solve_c0(ff, lsq)
    assert c0 == pytest.approx(ap.solve_offset(ff, lsq), abs=1e-10)
    modes, _ = ap.solve_modes(ff, c0, lsq)
    ratios = henon.solve_r(o.params, c0, lsq)
    got = sorted(m.r.real for m in modes)
    want = sorted([ratios.r.real, ratios.r_prime.real])
    assert got == pytest.approx(want, rel=1e-9)


def test_assemble_single_mode_examples():
    sol = ap.from_modes(2.0, [0.6])
    t = np.linspace(-3, 3, 13)
    (s0,) = ap.assemble(sol, 0)
    assert np.allclose(s0(t)[:, 0], 1 - np.exp(1j * t))
    (s1,) = ap.assemble(sol, 1)
    expect = (1 - np.exp(1j * t)) + 0.6 * (1 - np.exp(2j * t)) + 0.6 * (1 - np.exp(0.5j * t))
    assert np.allclose(s1(t)[:, 0], expect)


def test_dominant_index():
    sol = ap.from_modes(2.0, [0.9, 0.6])
    assert sol.dominant.r == 0.6


def test_assemble_drops_non_hardy_modes():
    sol = ap.from_modes(2.0, [0.6, 0.3])
    with pytest.warns(HardyWarning):
        series = ap.assemble(sol, 3)
    assert len(series) == 1
    with pytest.raises(HardyViolation), warnings.catch_warnings():
        warnings.simplefilter("ignore", HardyWarning)
        ap.assemble(ap.from_modes(2.0, [0.3]), 3)


def test_mean_of_assembled_curve_is_offset():
    from weierlin import bohr

    sol = ap.from_modes(2.0, [0.6, 0.8], [[1.0, 0.0], [0.0, 0.5]], offset=[0.25, -1.0])
    coeff = bohr.bohr_coefficient(lambda t: ap.evaluate_solution(sol, t, 6), 0.0, 2000.0)
    assert np.allclose(coeff.value, [0.25, -1.0], atol=0.01)


def test_truncation_residual_monotone():
    sol = ap.from_modes(2.0, [0.6, 0.8])
    values = [ap.truncation_residual(sol, n) for n in range(0, 30, 3)]
    assert all(b <= a for a, b in zip(values, values[1:]))
    assert values[-1] < values[0]


def test_truncation_residual_covers_difference():
    sol = ap.from_modes(2.0, [0.6])
    grid = np.linspace(-3, 3, 61)
    gap = np.abs(ap.evaluate_solution(sol, grid, 40) - ap.evaluate_solution(sol, grid, 5))
    # the constant correction moves too; its part is bounded by the same tail
    assert gap.max() <= 2 * ap.truncation_residual(sol, 5, grid) + 2 * 2 * 0.6 ** 6 / 0.4
