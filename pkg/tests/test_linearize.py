import numpy as np
import pytest

from weierlin import linearize as lz
from weierlin import polymap as pm
from weierlin.errors import ResonanceError

import oracles


def quadratic():
    return pm.PolyMap(1, [(0, (1,), 2.0), (0, (2,), 1.0)])


def test_linear_map_is_exact():
    f = pm.PolyMap(1, [(0, (1,), 2.0)])
    s = lz.solve_series(f, order=6)
    assert s.coefficient(1) == pytest.approx([1.0])
    assert all(np.all(s.coefficient(m) == 0) for m in range(2, 7))
    s = lz.with_radius(s, f, 1e-12)
    assert s.rho0 == pytest.approx(lz.radius_grid()[-1])


def test_quadratic_coefficients():
    s = lz.solve_series(quadratic(), order=3)
    assert abs(s.coefficient(2)[0] - oracles.STEINBERG_C2) <= 1e-12
    assert abs(s.coefficient(3)[0] - oracles.STEINBERG_C3) <= 1e-12


def test_coefficients_match_exponential():
    s = lz.solve_series(quadratic(), order=12)
    fact = np.cumprod(np.arange(1, 13, dtype=float))
    for m in range(1, 13):
        assert s.coefficient(m)[0] == pytest.approx(1.0 / fact[m - 1], rel=1e-12)


def test_validate_radius_examples():
    f = quadratic()
    hi = lz.validate_radius(lz.solve_series(f, order=12), f, 1e-8)
    lo = lz.validate_radius(lz.solve_series(f, order=2), f, 1e-8)
    assert hi >= 0.3
    assert hi >= lo


def test_residual_inside_radius():
    f = quadratic()
    s = lz.with_radius(lz.solve_series(f, order=12), f, 1e-8)
    t = np.random.default_rng(3).uniform(-s.rho0, s.rho0, 1000)
    assert lz.residual(s, f, t[:, None]).max() <= 1e-8


def test_order_validation():
    with pytest.raises(ValueError):
        lz.solve_series(quadratic(), order=0)


def test_requires_origin_fixed():
    f = pm.PolyMap(1, [(0, (1,), 2.0), (0, (0,), 1.0)])
    with pytest.raises(ValueError):
        lz.solve_series(f)


def test_resonance_is_reported():
    f = pm.PolyMap(2, [(0, (1, 0), 2.0), (1, (0, 1), 0.5), (0, (1, 1), 1.0)])
    with pytest.raises(ResonanceError) as info:
        lz.solve_series(f, order=4)
    assert info.value.index == (1, 1)


def test_small_divisor_reports_m_and_l():
    # eigenvalues 4 and 2 (both expanding): 2^2 - 4 vanishes at m = (0, 2)
    f = pm.PolyMap(2, [(0, (1, 0), 2.0), (1, (0, 1), 4.0), (1, (2, 0), 1.0)])
    with pytest.raises(ResonanceError) as info:
        lz.solve_series(f, order=3, check_resonance=False)
    assert info.value.index == (0, 2) and info.value.target == 0


def test_henon_needs_doubling():
    from weierlin.henon import henon_at_origin

    o = henon_at_origin()
    with pytest.raises(ValueError):
        lz.solve_series(o.map, o.spectrum, order=6)
    s = lz.solve_series(o.map, o.spectrum, order=8, double=True)
    assert s.doubled
    assert s.lambdas[0] == pytest.approx(oracles.HENON_LAMBDA_SQ, rel=1e-12)
    s = lz.with_radius(s, o.map, 1e-10)
    assert s.rho0 > 0.05


def test_linear_part_is_eigenvector():
    from weierlin.henon import henon_at_origin

    o = henon_at_origin()
    s = lz.solve_series(o.map, o.spectrum, order=6, double=True)
    ff = pm.compose(o.map, o.map)
    v = s.coefficient(1)
    assert np.linalg.norm(pm.jacobian(ff, np.zeros(2)) @ v - s.lambdas[0] * v) <= 1e-9


def test_extend_curve_examples():
    f = quadratic()
    s = lz.with_radius(lz.solve_series(f, order=12), f, 1e-8)
    inside = 0.5 * s.rho0
    assert lz.extend_curve(s, f, [inside]) == pytest.approx(s([inside]))
    for t in (1.2, 4.0, 10.0):
        assert lz.extend_curve(s, f, [t])[0] == pytest.approx(np.expm1(t), rel=1e-7)

    lin = pm.PolyMap(1, [(0, (1,), 2.0)])
    sl = lz.with_radius(lz.solve_series(lin, order=4), lin, 1e-12)
    t = 8 * sl.rho0 * 0.9
    assert lz.extend_curve(sl, lin, [t]) == pytest.approx([t])


def test_extend_matches_higher_order_series():
    f = quadratic()
    low = lz.with_radius(lz.solve_series(f, order=8), f, 1e-8)
    high = lz.solve_series(f, order=24)
    s = 0.9 * low.rho0
    via_map = pm.evaluate(f, pm.evaluate(f, low([s])))
    assert via_map == pytest.approx(high([4 * s]), abs=1e-6)


def test_seam_continuity():
    f = quadratic()
    s = lz.with_radius(lz.solve_series(f, order=12), f, 1e-8)
    t = 2.0 * s.rho0 * (1 - 1e-3)
    a0 = lz.extend_curve(s, f, [t], p=0)
    a1 = lz.extend_curve(s, f, [t], p=1)
    assert np.abs(a0 - a1).max() <= 10 * 1e-8


def test_negative_p_needs_inverse():
    f = quadratic()
    s = lz.with_radius(lz.solve_series(f, order=6), f, 1e-8)
    with pytest.raises(ValueError):
        lz.extend_curve(s, f, [0.01], p=-1)


def test_series_json_round_trip():
    s = lz.solve_series(quadratic(), order=5)
    back = lz.CurveSeries.from_dict(s.to_dict())
    assert np.array_equal(back.coeffs, s.coeffs) and back.order == 5
