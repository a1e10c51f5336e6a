import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bipartite_prim.graph_model import InputError
from bipartite_prim.limits import (
    ThetaParams,
    default_grid,
    ell_inverse,
    ell_rho,
    extinction_F,
    extinction_probabilities,
    fixed_point_residuals,
    giant_system_residuals,
    linear_limit,
    linear_limit_curve,
    simulate_two_type_bp,
    sublinear_limit,
)

THETAS = (0.1, 0.3, 0.5, 0.7)
LAMBDAS = (1.1, 1.5, 2.0, 5.0, 20.0)


def bisect_q1(theta, lam, digits=40):
    """Smaller root of F by bisection in high precision (independent oracle)."""
    mpmath.mp.dps = digits
    g = mpmath.sqrt((1 - mpmath.mpf(theta)) / theta)
    lam = mpmath.mpf(lam)

    def F(x):
        return lam * g * (mpmath.exp(lam / g * (x - 1)) - 1) - mpmath.log(x)

    # F > 0 near 0; find a grid point where F < 0 to the left of 1
    hi = next(mpmath.mpf(k) / 1000 for k in range(1, 1000) if F(mpmath.mpf(k) / 1000) < 0)
    lo = mpmath.mpf(10) ** -300
    for _ in range(400):
        mid = (lo + hi) / 2
        if F(mid) > 0:
            lo = mid
        else:
            hi = mid
    return float((lo + hi) / 2)


def test_sublinear_values():
    assert sublinear_limit(0.1) == pytest.approx(0.25, abs=1e-15)
    assert sublinear_limit(0.5) == 0.5
    mpmath.mp.dps = 30
    t = mpmath.mpf(7) / 10
    exact = 1 / (1 + mpmath.sqrt((1 - t) / t))
    assert sublinear_limit(0.7) == pytest.approx(float(exact), abs=1e-15)


def test_theta_validation():
    for bad in (0.0, 1.0, -0.2, 1.3):
        with pytest.raises(InputError):
            ThetaParams.of(bad)


def test_q1_symmetric_case():
    q = extinction_probabilities(0.5, 2.0)
    assert q.q1 == pytest.approx(bisect_q1(0.5, 2.0), abs=1e-12)
    assert q.q1 == pytest.approx(q.q2, abs=1e-14)
    # q = exp(2 (q - 1)) in the symmetric case
    assert abs(q.q1 - math.exp(2 * (q.q1 - 1))) < 1e-14


@pytest.mark.parametrize("theta", THETAS)
@pytest.mark.parametrize("lam", LAMBDAS)
def test_q1_against_bisection_and_residuals(theta, lam):
    q = extinction_probabilities(theta, lam)
    assert q.q1 == pytest.approx(bisect_q1(theta, lam), abs=1e-11)
    assert max(map(abs, fixed_point_residuals(theta, q))) < 1e-12
    assert abs(extinction_F(q.q1, lam, theta)) < 1e-12
    pt = ell_rho(theta, lam)
    assert max(map(abs, giant_system_residuals(theta, pt))) < 1e-12
    assert 0 < pt.ell < 1 and 0 < pt.rho < 1


def test_subcritical_extinction_is_certain():
    assert extinction_probabilities(0.3, 0.7) == extinction_probabilities(0.3, 0.7)
    q = extinction_probabilities(0.3, 1.0)
    assert (q.q1, q.q2) == (1.0, 1.0)
    with pytest.raises(InputError):
        extinction_probabilities(0.3, 0.0)
    with pytest.raises(InputError):
        ell_rho(0.3, 1.0)


def test_near_critical_ratio():
    # (1 - q1) / (1 - q2) tends to gamma as lambda -> 1+
    for theta in (0.1, 0.3, 0.7):
        q = extinction_probabilities(theta, 1 + 1e-4)
        g = ThetaParams.of(theta).gamma
        assert (1 - q.q1) / (1 - q.q2) == pytest.approx(g, abs=1e-2)


def test_large_lambda():
    q = extinction_probabilities(0.5, 50.0)
    assert 0 < q.q1 < 1e-20
    assert ell_rho(0.5, 50.0).ell == pytest.approx(1.0, abs=1e-15)


@given(st.sampled_from(THETAS), st.floats(1.01, 30.0), st.floats(1.01, 30.0))
@settings(max_examples=100)
def test_ell_increasing(theta, a, b):
    if a == b:
        return
    lo, hi = sorted((a, b))
    assert ell_rho(theta, lo).ell < ell_rho(theta, hi).ell


@pytest.mark.parametrize("theta", THETAS)
def test_ell_inverse_round_trip(theta):
    grid = default_grid(512)
    curve = linear_limit_curve(theta, grid)
    err = max(abs(ell_rho(theta, lam).ell - s) for s, lam in zip(curve.s, curve.lam))
    assert err < 1e-9
    assert np.all(np.diff(curve.lam) > 0)


def test_symmetric_curve_is_flat():
    curve = linear_limit_curve(0.5, default_grid(32))
    assert np.allclose(curve.rho, 0.5, atol=1e-14)


@pytest.mark.parametrize("theta", (0.1, 0.3, 0.7))
def test_curve_endpoints(theta):
    assert linear_limit(theta, 1e-4) == pytest.approx(sublinear_limit(theta), abs=5e-3)
    assert linear_limit(theta, 0.999) == pytest.approx(theta, abs=1e-2)


def test_curve_validation_and_csv(tmp_path):
    with pytest.raises(InputError):
        linear_limit_curve(0.3, [0.2, 0.1])
    with pytest.raises(InputError):
        linear_limit_curve(0.3, [0.0, 0.5])
    with pytest.raises(InputError):
        ell_inverse(0.3, 1.0)
    curve = linear_limit_curve(0.3, [0.25, 0.5])
    path = tmp_path / "c.csv"
    text = curve.to_csv(path)
    assert path.read_text() == text
    lines = text.splitlines()
    assert lines[0] == "s,lambda,rho"
    assert [float(x) for x in lines[2].split(",")] == [0.5, curve.lam[1], curve.rho[1]]


def test_branching_simulation_matches_solver():
    q = extinction_probabilities(0.3, 2.0).q1
    assert simulate_two_type_bp(0.3, 2.0, 200, 20_000, seed=3) == pytest.approx(q, abs=0.015)
    assert simulate_two_type_bp(0.3, 0.5, 200, 5_000, seed=3) >= 0.99


def test_branching_simulation_reproducible_and_validated():
    a = simulate_two_type_bp(0.5, 1.5, 100, 5000, seed=11)
    assert a == simulate_two_type_bp(0.5, 1.5, 100, 5000, seed=11)
    assert simulate_two_type_bp(0.5, 1.5, 0, 10, seed=1) == 0.0
    with pytest.raises(InputError):
        simulate_two_type_bp(0.5, 1.5, 10, 0, seed=1)
