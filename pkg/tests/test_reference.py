import math

import numpy as np
import pytest
from scipy import integrate, stats
from scipy.special import ndtr, ndtri

from empbeta.errors import DomainError, UndefinedBandwidth
from empbeta.estimators import CopulaEstimate
from empbeta.data import compute_ranks
from empbeta.reference import (
    bernstein_transform,
    bernstein_transform_grid,
    bvn_cdf,
    fgm,
    gauss,
    gumbel,
    independence,
    jsv_degree,
    jsv_degree_raw,
    parse_model,
)

ALL = [independence(), fgm(-1.0), fgm(0.6), gauss(0.5), gauss(-0.7), gumbel(tau=0.5)]
IDS = [c.label for c in ALL]
GRID = np.linspace(0, 1, 201)


def grid_points(g):
    return np.stack(np.meshgrid(g, g, indexing="ij"), -1).reshape(-1, 2)


def gauss_conditional_integral(u1, u2, rho):
    """P(X <= a, Y <= b) as the integral of Phi((b - rho x)/sqrt(1-rho^2)) phi(x) over x <= a."""
    a, b = ndtri(u1), ndtri(u2)
    s = math.sqrt(1 - rho * rho)
    f = lambda x: ndtr((b - rho * x) / s) * math.exp(-x * x / 2) / math.sqrt(2 * math.pi)  # noqa: E731
    return integrate.quad(f, -np.inf, a, epsabs=1e-13, epsrel=1e-13)[0]


def test_cdf_examples():
    assert independence().cdf([0.3, 0.7]) == pytest.approx(0.21, abs=1e-15)
    assert fgm(-1).cdf([0.5, 0.5]) == pytest.approx(0.1875, abs=1e-15)
    assert gauss(0.5).cdf([0.5, 0.5]) == pytest.approx(0.25 + math.asin(0.5) / (2 * math.pi), abs=1e-12)


def test_gauss_against_conditioning_integral():
    rng = np.random.default_rng(0)
    for rho in (-0.95, -0.5, 0.0, 0.3, 0.5, 0.9, 0.99):
        for u in rng.uniform(0.001, 0.999, (15, 2)):
            assert gauss(rho).cdf(u) == pytest.approx(gauss_conditional_integral(*u, rho), abs=1e-10)


def test_bvn_against_scipy_multivariate_normal():
    rng = np.random.default_rng(1)
    for rho in (-0.8, 0.5, 0.95):
        h, k = rng.normal(size=(2, 20)) * 2
        ref = stats.multivariate_normal([0, 0], [[1, rho], [rho, 1]]).cdf(np.column_stack([h, k]))
        assert np.allclose(bvn_cdf(h, k, rho), ref, atol=1e-8)


@pytest.mark.parametrize("c", ALL, ids=IDS)
def test_copula_axioms_on_grid(c):
    g = np.linspace(0, 1, 41)
    vals = c.cdf(grid_points(g)).reshape(41, 41)
    assert np.max(np.abs(vals[0, :])) <= 1e-9 and np.max(np.abs(vals[:, 0])) <= 1e-9
    assert np.max(np.abs(vals[-1, :] - g)) <= 1e-9 and np.max(np.abs(vals[:, -1] - g)) <= 1e-9
    assert np.diff(np.diff(vals, axis=0), axis=1).min() >= -1e-9


def test_parameter_validation():
    for bad in (lambda: fgm(1.5), lambda: gauss(1.0), lambda: gumbel(alpha=0.5),
                lambda: parse_model("clayton"), lambda: independence().cdf([0.5, 1.2])):
        with pytest.raises(DomainError):
            bad()
    assert gumbel(tau=0.5).param == pytest.approx(2.0)
    assert parse_model("indep").label == "indep"
    assert parse_model("gumbel", tau=0.5) == gumbel(tau=0.5)


def test_derivative_examples():
    d1, d2, s1, s2 = independence().partial_derivatives([0.3, 0.8])
    assert (d1, s1) == pytest.approx((0.8, 0.0))
    d1, d2, s1, s2 = fgm(-1).partial_derivatives([0.5, 0.5])
    assert d1 == pytest.approx(0.5) and s1 == pytest.approx(0.5)
    rho, u = 0.5, np.array([0.2, 0.7])
    d1 = gauss(rho).partial_derivatives(u)[0]
    assert d1 == pytest.approx(ndtr((ndtri(0.7) - rho * ndtri(0.2)) / math.sqrt(1 - rho**2)), abs=1e-14)
    with pytest.raises(DomainError):
        gauss(0.5).partial_derivatives([0.0, 0.5])


@pytest.mark.parametrize("c", ALL, ids=IDS)
def test_derivatives_match_finite_differences(c):
    rng = np.random.default_rng(2)
    u = rng.uniform(0.05, 0.95, (100, 2))
    h = 1e-5
    e1, e2 = np.array([h, 0]), np.array([0, h])
    d1, d2, s1, s2 = c.partial_derivatives(u)
    assert np.all((d1 >= 0) & (d1 <= 1) & (d2 >= 0) & (d2 <= 1))
    assert np.allclose(d1, (c.cdf(u + e1) - c.cdf(u - e1)) / (2 * h), atol=1e-6)
    assert np.allclose(d2, (c.cdf(u + e2) - c.cdf(u - e2)) / (2 * h), atol=1e-6)
    # second derivatives from differences of the analytic first derivatives
    fd1 = (c.partial_derivatives(u + e1)[0] - c.partial_derivatives(u - e1)[0]) / (2 * h)
    fd2 = (c.partial_derivatives(u + e2)[1] - c.partial_derivatives(u - e2)[1]) / (2 * h)
    assert np.allclose(s1, fd1, atol=1e-6)
    assert np.allclose(s2, fd2, atol=1e-6)


def test_second_derivative_cdf_differences_coarse():
    # the cdf-only second difference is noise limited at h=1e-5; a larger step still agrees
    c, u, h = gumbel(tau=0.5), np.array([0.3, 0.6]), 1e-3
    fd = (c.cdf(u + [h, 0]) - 2 * c.cdf(u) + c.cdf(u - [h, 0])) / h**2
    assert c.partial_derivatives(u)[2] == pytest.approx(fd, abs=1e-5)


@pytest.mark.parametrize("c,stat,expected", [
    (independence(), "tau", 0.0),
    (gauss(0.5), "rho", 6 / math.pi * math.asin(0.25)),
    (fgm(-1), "tau", -2 / 9),
    (gumbel(tau=0.5), "tau", 0.5),
], ids=["indep", "gauss", "fgm", "gumbel"])
def test_sampler_rank_correlation(c, stat, expected):
    x = c.sample(100_000, seed=3)
    r = stats.kendalltau(x[:, 0], x[:, 1])[0] if stat == "tau" else stats.spearmanr(x[:, 0], x[:, 1])[0]
    assert r == pytest.approx(expected, abs=0.01)


@pytest.mark.parametrize("c", ALL, ids=IDS)
def test_sampler_matches_cdf(c):
    x = c.sample(100_000, seed=4)
    g = np.linspace(0, 1, 21)
    emp = CopulaEstimate("empirical", compute_ranks(x)).evaluate_grid([g, g])
    assert np.max(np.abs(emp - c.cdf(grid_points(g)).reshape(21, 21))) <= 0.01


def test_sampler_reproducible():
    c = gumbel(tau=0.3)
    assert np.array_equal(c.sample(50, seed=9), c.sample(50, seed=9))
    assert not np.array_equal(c.sample(50, seed=9), c.sample(50, seed=10))
    with pytest.raises(DomainError):
        c.sample(0, seed=1)


def test_bernstein_transform_examples():
    for m in [(1, 1), (3, 7), (20, 20)]:
        assert bernstein_transform(independence(), m, [0.5, 0.5]) == pytest.approx(0.25, abs=1e-15)
    for c in ALL:
        assert bernstein_transform(c, (6, 4), [0.0, 0.8]) == 0.0
    c = gumbel(tau=0.5)
    diff = bernstein_transform_grid(c, 10, [GRID, GRID]) - c.cdf(grid_points(GRID)).reshape(201, 201)
    assert np.max(np.abs(diff)) <= 2 / (2 * math.sqrt(10))
    with pytest.raises(DomainError):
        bernstein_transform(c, (0, 3), [0.5, 0.5])


def test_fgm_transform_closed_form():
    # B_m maps u(1-u) to u(1-u)(1-1/m) per axis, so the FGM bias is explicit
    theta, m = -1.0, (7, 12)
    c = fgm(theta)
    u = grid_points(np.linspace(0, 1, 31))
    a, b = u[:, 0], u[:, 1]
    expect = a * b + theta * a * (1 - a) * b * (1 - b) * (1 - 1 / m[0]) * (1 - 1 / m[1])
    assert np.allclose(bernstein_transform(c, m, u), expect, atol=1e-14)


@pytest.mark.parametrize("c", [independence(), fgm(-1), gauss(0.5), gumbel(tau=0.5)],
                         ids=["indep", "fgm", "gauss", "gumbel"])
def test_bias_bound(c):
    truth = c.cdf(grid_points(GRID)).reshape(201, 201)
    for m in (2, 5, 10, 20, 50):
        sup = np.max(np.abs(bernstein_transform_grid(c, m, [GRID, GRID]) - truth))
        assert sup <= 2 / (2 * math.sqrt(m)) + 1e-9
    # unequal degrees use m* = min
    sup = np.max(np.abs(bernstein_transform_grid(c, (4, 30), [GRID, GRID]) - truth))
    assert sup <= 1 / math.sqrt(4) + 1e-9


@pytest.mark.parametrize("c", [fgm(-1), gauss(0.5)], ids=["fgm", "gauss"])
def test_rescaled_bias_vanishes(c):
    truth = c.cdf(grid_points(GRID)).reshape(201, 201)
    seq = [math.sqrt(m) * np.max(np.abs(bernstein_transform_grid(c, m, [GRID, GRID]) - truth))
           for m in (5, 10, 20, 50, 100, 200, 400)]
    assert all(b < a for a, b in zip(seq, seq[1:]))
    assert seq[-1] < 0.05


def test_pointwise_error_order_one_over_m():
    c = gauss(0.5)
    scaled = [m * abs(bernstein_transform(c, m, [0.5, 0.5]) - c.cdf([0.5, 0.5]))
              for m in (5, 10, 20, 50, 100, 200)]
    # bounded, and levelling off at a positive constant
    assert max(scaled) < 0.2
    assert scaled[-1] - scaled[-2] < 1e-3


def test_jsv_examples():
    c = fgm(-1)
    b = 0.5 * 2 * 0.25 * 0.5
    v = 2 * 0.5 * 0.5 * math.sqrt(0.25 / math.pi)
    assert jsv_degree_raw(c, [0.5, 0.5], 100) == pytest.approx((4 * b * b / v) ** (2 / 3) * 100 ** (2 / 3))
    assert jsv_degree(c, [0.5, 0.5], 100) == 12
    raw8 = jsv_degree_raw(c, [0.5, 0.5], 800)
    assert raw8 == pytest.approx(4 * jsv_degree_raw(c, [0.5, 0.5], 100))
    assert jsv_degree(c, [0.5, 0.5], 800) == math.floor(raw8)
    assert abs(jsv_degree(c, [0.5, 0.5], 800) - 4 * 12) <= 4
    with pytest.raises(UndefinedBandwidth):
        jsv_degree(independence(), [0.3, 0.3], 100)


def test_jsv_vectorised_and_clamped():
    u = np.random.default_rng(5).uniform(0.01, 0.99, (200, 2))
    deg = jsv_degree(gauss(0.5), u, 20)
    assert deg.shape == (200,) and deg.min() >= 1
    assert np.array_equal(deg, [jsv_degree(gauss(0.5), p, 20) for p in u])
