import math
import warnings

import numpy as np
import pytest

from weierlin import bohr, henon
from weierlin import polymap as pm
from weierlin.errors import HardyViolation, HardyWarning, NoNonzeroOffset
from weierlin.weierstrass import eval_complex_r

import oracles


@pytest.fixture(scope="module")
def origin():
    return henon.henon_at_origin(1.4, 0.3)


@pytest.fixture(scope="module")
def c0(origin):
    return henon.solve_c0(henon.double_iterate(origin.map), oracles.HENON_LAMBDA_SQ)


def synthetic(hardy=True, hardy_prime=True):
    return henon.HenonLinearization(
        np.zeros(2), 0.6, 0.8, 1.0, 0.5, 4.0, -2.0, hardy, hardy_prime
    )


def test_origin_four_digit_values(origin):
    lam, lam_p = origin.spectrum.eigenvalues.real
    assert origin.fixed_point[0] == pytest.approx(0.6313, abs=1e-4)
    assert origin.params.gamma == pytest.approx(-1.7678, abs=1e-4)
    assert lam == pytest.approx(-1.9237, abs=1e-4)
    assert lam_p == pytest.approx(0.1559, abs=1e-4)
    assert np.allclose(pm.evaluate(origin.map, [0.0, 0.0]), 0.0, atol=1e-15)


def test_origin_derived_values(origin):
    assert origin.fixed_point[0] == pytest.approx(oracles.HENON_X_STAR, abs=1e-12)
    assert origin.params.gamma == pytest.approx(oracles.HENON_GAMMA, abs=1e-12)


def test_gamma_beta_consistency(origin):
    lam, lam_p = origin.params.eigenvalues()
    assert lam + lam_p == pytest.approx(origin.params.gamma, abs=1e-9)
    assert -lam * lam_p == pytest.approx(origin.params.beta, abs=1e-9)


def test_complex_fixed_point_rejected():
    with pytest.raises(Exception):
        henon.fixed_point(-1.0, 0.3)


def test_double_iterate(origin):
    ff = henon.double_iterate(origin.map)
    assert ff.degree == 4
    assert np.allclose(pm.evaluate(ff, [0.0, 0.0]), 0.0, atol=1e-15)
    ev = sorted(np.abs(np.linalg.eigvals(pm.jacobian(ff, np.zeros(2)))), reverse=True)
    assert ev[0] == pytest.approx(3.7006, abs=1e-3)
    assert ev[1] == pytest.approx(0.0243, abs=1e-3)
    for p in np.random.default_rng(5).uniform(-0.5, 0.5, size=(10, 2)):
        seq = pm.evaluate(origin.map, pm.evaluate(origin.map, p))
        assert np.linalg.norm(pm.evaluate(ff, p) - seq) <= 1e-10


def test_c0_root(origin, c0):
    ff = henon.double_iterate(origin.map)
    assert np.linalg.norm(c0 / oracles.HENON_LAMBDA_SQ - pm.evaluate(ff, c0)) <= 1e-10
    assert c0 == pytest.approx(oracles.HENON_C0, abs=1e-9)


def test_linear_case_has_no_offset():
    # sigma = 0 leaves no expanding direction of its own, so borrow the sigma = 1.4 lambda^2
    o = henon.henon_at_origin(0.0, 0.3)
    with pytest.raises(NoNonzeroOffset):
        henon.solve_c0(henon.double_iterate(o.map), oracles.HENON_LAMBDA_SQ)


def test_ratios_at_zero_offset(origin):
    lsq = oracles.HENON_LAMBDA_SQ
    sol = henon.solve_r(origin.params, np.zeros(2), lsq)
    assert sol.rho.real == pytest.approx(lsq, rel=1e-12)
    assert sol.rho_prime.real == pytest.approx(oracles.HENON_LAMBDA_PRIME_SQ, rel=1e-9)
    assert sol.r.real == pytest.approx(oracles.HENON_R_AT_ZERO[0], rel=1e-12)
    assert sol.r_prime.real == pytest.approx(oracles.HENON_R_AT_ZERO[1], rel=1e-9)


def test_ratios_at_offset(origin, c0):
    lsq = oracles.HENON_LAMBDA_SQ
    sol = henon.solve_r(origin.params, c0, lsq)
    assert sol.r.real == pytest.approx(oracles.HENON_R, rel=1e-9)
    assert sol.r_prime.real == pytest.approx(oracles.HENON_R_PRIME, rel=1e-9)
    assert sol.det == pytest.approx(0.3 ** 2, rel=1e-12)
    assert (sol.r * sol.r_prime).real == pytest.approx(1 / (lsq ** 2 * 0.09), rel=1e-9)
    assert not sol.hardy and not sol.hardy_prime


def test_product_matrix_is_composed_jacobian(origin, c0):
    ff = henon.double_iterate(origin.map)
    assert np.allclose(henon.product_matrix(origin.params, c0), pm.jacobian(ff, c0), atol=1e-12)


def test_complex_discriminant_branch(origin):
    p = origin.params
    c1 = (p.gamma - 0.1) / (2 * p.sigma)  # inner factor gamma + h'(c1) = 0.1
    c2 = -(p.gamma * c1 + float(p.h(c1)))  # outer argument vanishes
    sol = henon.solve_r(p, [c1, c2], 4.0)
    assert sol.discriminant < 0 and not sol.real
    assert sol.r_prime == pytest.approx(np.conj(sol.r))
    # the pair sums to the real-valued complex-r form
    t = np.linspace(-2, 2, 9)
    from weierlin.weierstrass import kernel

    pair = kernel(4.0, sol.r, 3, t) + kernel(4.0, sol.r_prime, 3, t)
    rho, theta = abs(sol.r), math.atan2(sol.r.imag, sol.r.real)
    assert np.allclose(pair, -eval_complex_r(4.0, rho, theta, 3, t), atol=1e-12)


def test_synth_examples():
    lin = synthetic()
    P, plane, coeffs = henon.synth_curve(lin, 5, [0.0])
    assert abs(P[0]) == 0.0
    t = np.linspace(-4, 4, 33)
    P0, _, _ = henon.synth_curve(lin, 0, t)
    assert np.allclose(P0, 1.5 * (1 - np.exp(1j * t)))
    _, plane, _ = henon.synth_curve(lin, 3, t)
    assert plane.shape == (33, 2)


def test_synth_bounded():
    lin = synthetic()
    P, _, coeffs = henon.synth_curve(lin, 6, np.random.default_rng(2).uniform(-30, 30, 500))
    assert np.abs(P).max() <= 2 * sum(abs(c) for c in coeffs.values())


def test_synth_bohr_round_trip():
    lin = synthetic()
    T = 1000.0
    n = bohr.required_samples(4.0 ** 4, T)  # resolve the top harmonic, not just the scanned ones
    P = lambda s: henon.synth_curve(lin, 4, s)[0]
    _, _, coeffs = henon.synth_curve(lin, 4, [0.0])
    aps = bohr.scan_spectrum(P, 4.0, -2, 2, T, n)
    # line spectrum of P: nu = 4^k with weight -coeff, plus the constant sum at nu = 0
    lines = {4.0 ** k: abs(c) for k, c in coeffs.items()}
    lines[0.0] = abs(sum(coeffs.values()))
    for k in range(-2, 3):
        mu = 4.0 ** k
        want = -(1.0 * 0.6 ** abs(k) + 0.5 * 0.8 ** abs(k))
        err = abs(aps.by_k(k).value[0] - want)
        leakage = sum(a / (T * abs(mu - nu)) for nu, a in lines.items() if nu != mu)
        assert err <= 5 / T if k >= 0 else err <= leakage


def test_synth_refused_when_both_fail():
    with pytest.raises(HardyViolation):
        henon.synth_curve(synthetic(False, False), 3, [0.0])
    _, _, coeffs = henon.synth_curve(synthetic(True, False), 1, [0.0])
    assert coeffs[1] == pytest.approx(0.6)


def test_analyze_reports_refusal():
    rep = henon.analyze(1.4, 0.3)
    assert rep["D"] is None and rep["linearization"] is None
    assert any("refused" in s for s in rep["status"])
    assert rep["lambda"] == pytest.approx(oracles.HENON_LAMBDA, abs=1e-12)


def test_branch_tree(origin):
    a = np.linspace(-0.3, 0.3, 50)
    tree = henon.branch_generate(origin.params, oracles.HENON_R, a, depth=3)
    assert tree.levels[-1].shape == (50, 8)
    assert tree.leaves() <= 8 * 50
    assert max(tree.residuals) <= 1e-9
    assert tree.forward_residual <= 1e-12
    per_point = np.isfinite(tree.levels[-1]).sum(axis=1)
    assert per_point.max() <= 8


def test_branch_tree_linear_collapses():
    p = henon.HenonParams(0.0, 0.3, oracles.HENON_GAMMA)
    tree = henon.branch_generate(p, 0.5, np.linspace(-1, 1, 7), depth=3)
    assert np.all(np.isfinite(tree.levels[-1]).sum(axis=1) == 1)
    assert tree.terminated == [0, 0, 0]


def test_branch_tree_terminations_recorded(origin):
    tree = henon.branch_generate(origin.params, 0.5, np.array([5.0, -5.0]), depth=2)
    assert sum(tree.terminated) >= 1


def test_branch_argument_checks(origin):
    with pytest.raises(ValueError):
        henon.branch_generate(origin.params, 0.5, [0.0], depth=9)
    with pytest.raises(Exception):
        henon.branch_generate(origin.params, 1 / 0.3, [0.0])
