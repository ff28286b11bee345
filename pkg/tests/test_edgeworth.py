import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from edgesym.densities import gaussian, laplace, logistic, student
from edgesym.edgeworth import ENVELOPE, EdgeworthModel, solve_z_star
from edgesym.errors import XiTooLarge

FAMILIES = {"gaussian": gaussian(), "laplace": laplace(), "logistic": logistic()}


def integrate_density(model, lo=-np.inf, hi=np.inf):
    u = model.z_star
    knots = [lo, -40.0, 0.0, 40.0, hi]
    if math.isfinite(u):
        knots += [model.theta - model.sigma * u, model.theta + model.sigma * u]
    knots = sorted(k for k in set(knots) if lo <= k <= hi)
    total = 0.0
    for a, b in zip(knots[:-1], knots[1:]):
        total += integrate.quad(lambda x: float(model.pdf(x)), a, b,
                                epsabs=1e-13, epsrel=1e-12, limit=400)[0]
    return total


def grid_scan_z_star(f1, xi):
    """Dense sign-change scan of |xi| phi(u)(u^2 - kappa) - 1, then bisection."""
    kappa = f1.kappa
    u = np.linspace(math.sqrt(kappa), 60.0, 600_001)
    g = abs(xi) * f1.score(u) * (u * u - kappa) - 1.0
    i = int(np.argmax(g > 0))
    lo, hi = u[i - 1], u[i]
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if abs(xi) * float(f1.score(mid)) * (mid * mid - kappa) - 1.0 > 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


@pytest.mark.parametrize("family", FAMILIES)
@pytest.mark.parametrize("xi", [-0.15, -0.10, -0.05, 0.05, 0.10, 0.15])
def test_normalization(family, xi):
    model = EdgeworthModel(FAMILIES[family], xi=xi)
    assert integrate_density(model) == pytest.approx(1.0, abs=1e-6)


def test_normalization_with_location_scale():
    model = EdgeworthModel(gaussian(), theta=2.5, sigma=0.4, xi=0.2)
    assert integrate_density(model) == pytest.approx(1.0, abs=1e-6)


def test_null_density_is_reference():
    f1 = logistic()
    model = EdgeworthModel(f1, theta=1.0, sigma=2.0, xi=0.0)
    x = np.linspace(-10, 10, 101)
    np.testing.assert_array_equal(model.pdf(x), f1.pdf((x - 1.0) / 2.0) / 2.0)
    assert model.z_star == math.inf


def test_density_at_center():
    model = EdgeworthModel(gaussian(), xi=0.1)
    assert float(model.pdf(0.0)) == pytest.approx(float(gaussian().pdf(0.0)), rel=1e-15)


@pytest.mark.parametrize("family", FAMILIES)
def test_tails(family):
    f1 = FAMILIES[family]
    model = EdgeworthModel(f1, xi=0.1)
    u = model.z_star
    left = np.linspace(-u - 5, -u - 1e-9, 20)
    right = np.linspace(u + 1e-9, u + 5, 20)
    assert np.all(model.pdf(left) == 0.0)
    np.testing.assert_allclose(model.pdf(right), 2.0 * f1.pdf(right), rtol=1e-15)
    mirrored = EdgeworthModel(f1, xi=-0.1)
    assert np.all(mirrored.pdf(-left) == 0.0)


def test_nonnegative_everywhere():
    for f1 in FAMILIES.values():
        for xi in (-0.2, 0.05, 0.3):
            model = EdgeworthModel(f1, xi=xi)
            assert np.all(model.pdf(np.linspace(-30, 30, 20001)) >= 0.0)


def test_gaussian_density_is_continuous_at_truncation():
    model = EdgeworthModel(gaussian(), xi=0.1)
    u = model.z_star
    for point in (-u, u):
        assert float(model.pdf(point - 1e-9)) == pytest.approx(float(model.pdf(point + 1e-9)),
                                                               abs=1e-7)


@pytest.mark.parametrize("family", FAMILIES)
def test_z_star_grid_scan_oracle(family):
    f1 = FAMILIES[family]
    for xi in (0.1, -0.05):
        assert solve_z_star(f1, xi) == pytest.approx(grid_scan_z_star(f1, xi), abs=1e-9)


def test_z_star_residual():
    f1 = gaussian()
    u = solve_z_star(f1, 0.1)
    residual = float(f1.pdf(u)) - 0.1 * abs(float(f1.pdf_derivative(u))) * (u * u - f1.kappa)
    assert abs(residual) < 1e-12
    assert u * u > f1.kappa


def test_z_star_monotone_in_xi():
    values = [solve_z_star(gaussian(), xi) for xi in (0.1, 0.01, 0.001)]
    assert values[0] < values[1] < values[2]


def test_z_star_cube_root_scaling():
    scaled = [solve_z_star(gaussian(), xi) * xi ** (1 / 3) for xi in (1e-2, 1e-3, 1e-4)]
    assert max(scaled) / min(scaled) - 1.0 < 0.10


def test_student_z_star_exists():
    model = EdgeworthModel(student(5), xi=0.05)
    assert math.isfinite(model.z_star)
    assert integrate_density(model) == pytest.approx(1.0, abs=1e-6)


def test_xi_too_large():
    # for the Gaussian the bracket stays positive iff |xi| < sqrt(a)/2
    bound = math.sqrt(gaussian().std_constant) / 2.0
    EdgeworthModel(gaussian(), xi=0.99 * bound)
    with pytest.raises(XiTooLarge):
        EdgeworthModel(gaussian(), xi=1.01 * bound)
    with pytest.raises(XiTooLarge):
        EdgeworthModel(laplace(), xi=-0.4)


def test_xi_zero_has_no_z_star():
    with pytest.raises(ValueError):
        solve_z_star(gaussian(), 0.0)


@pytest.mark.parametrize("family", FAMILIES)
@pytest.mark.parametrize("xi", [0.0, 0.1, -0.15])
def test_cdf_matches_quadrature(family, xi):
    model = EdgeworthModel(FAMILIES[family], theta=0.3, sigma=1.7, xi=xi)
    for x in (-8.0, -2.0, 0.3, 1.0, 4.0, 9.0):
        expected = integrate_density(model, -np.inf, x)
        assert float(model.cdf(x)) == pytest.approx(expected, abs=1e-9)


def test_cdf_anchor_points():
    model = EdgeworthModel(gaussian(), theta=1.0, sigma=2.0)
    assert float(model.cdf(1.0)) == pytest.approx(0.5, abs=1e-15)
    # MAD standardization: P(|Z| <= 1) = 1/2, so F(theta + sigma) = 3/4
    assert float(model.cdf(3.0)) == pytest.approx(0.75, abs=1e-13)
    skewed = EdgeworthModel(gaussian(), xi=0.1)
    assert float(skewed.cdf(-skewed.z_star)) == 0.0
    assert float(skewed.cdf(-np.inf)) == 0.0
    assert float(skewed.cdf(np.inf)) == pytest.approx(1.0, abs=1e-15)


def test_cdf_monotone():
    model = EdgeworthModel(laplace(), xi=0.2)
    c = model.cdf(np.linspace(-20, 20, 5001))
    assert np.all(np.diff(c) >= -1e-15)


def _central_moment(model, k, center):
    u = model.z_star
    knots = [-np.inf, -u, 0.0, u, np.inf]
    return sum(integrate.quad(lambda x: (x - center) ** k * float(model.pdf(x)), a, b,
                              epsabs=1e-12, epsrel=1e-11, limit=400)[0]
               for a, b in zip(knots[:-1], knots[1:]))


@pytest.mark.parametrize("family", FAMILIES)
def test_positive_xi_is_right_skewed(family):
    # the mode moves left while the right tail thickens: mean above median,
    # positive third central moment
    model = EdgeworthModel(FAMILIES[family], xi=0.1)
    mean = _central_moment(model, 1, 0.0)
    assert _central_moment(model, 3, mean) > 0.0
    median = float(np.interp(0.5, model.cdf(np.linspace(-5, 5, 200001)),
                             np.linspace(-5, 5, 200001)))
    assert mean > median
    mirrored = EdgeworthModel(FAMILIES[family], xi=-0.1)
    assert _central_moment(mirrored, 3, -mean) == pytest.approx(
        -_central_moment(model, 3, mean), rel=1e-7)


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(list(FAMILIES)), st.floats(0.01, 0.3), st.floats(0.0, 12.0))
def test_reflection(family, xi, u):
    f1 = FAMILIES[family]
    plus = EdgeworthModel(f1, theta=0.7, sigma=1.3, xi=xi)
    minus = EdgeworthModel(f1, theta=0.7, sigma=1.3, xi=-xi)
    assert float(minus.pdf(0.7 - u)) == pytest.approx(float(plus.pdf(0.7 + u)), rel=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.floats(-5, 5), st.floats(0.2, 5), st.floats(-0.3, 0.3), st.floats(-20, 20))
def test_location_scale_equivariance(theta, sigma, xi, x):
    model = EdgeworthModel(gaussian(), theta=theta, sigma=sigma, xi=xi)
    unit = EdgeworthModel(gaussian(), xi=xi)
    assert float(model.pdf(x)) == pytest.approx(float(unit.pdf((x - theta) / sigma)) / sigma,
                                                rel=1e-12, abs=1e-300)


@pytest.mark.parametrize("family", FAMILIES)
@pytest.mark.parametrize("xi", [0.0, 0.1])
def test_sampler_ks(family, xi):
    model = EdgeworthModel(FAMILIES[family], xi=xi)
    n = 100_000
    x = model.rvs(n, np.random.default_rng(11))
    d = stats.kstest(x, model.cdf).statistic
    assert d < 1.95 / math.sqrt(n)


def test_sampler_respects_support():
    model = EdgeworthModel(gaussian(), xi=0.1)
    x = model.rvs(100_000, np.random.default_rng(3))
    assert np.sum(x < -model.z_star) == 0


def test_sampler_deterministic_given_stream():
    model = EdgeworthModel(logistic(), theta=1.0, xi=-0.1)
    a = model.rvs(500, np.random.default_rng(5))
    b = model.rvs(500, np.random.default_rng(5))
    np.testing.assert_array_equal(a, b)


def test_acceptance_rate():
    # the expected rate is exactly 1/ENVELOPE = 0.5 since f integrates to one
    model = EdgeworthModel(gaussian(), xi=0.1)
    proposals = 100_000
    rate = model.acceptance_rate(proposals, np.random.default_rng(8))
    se = math.sqrt(0.25 / proposals)
    assert ENVELOPE == 2.0
    assert rate >= 0.5 - 3 * se
    assert abs(rate - 1 / ENVELOPE) < 4 * se


def test_json_round_trip():
    model = EdgeworthModel(student(5), theta=-1.0, sigma=0.5, xi=0.03)
    data = json.loads(model.to_json())
    assert data == {"family": "student:5", "theta": -1.0, "sigma": 0.5, "xi": 0.03}
    assert EdgeworthModel.from_json(model.to_json()) == model


def test_rejects_bad_sigma():
    with pytest.raises(ValueError):
        EdgeworthModel(gaussian(), sigma=0.0)
