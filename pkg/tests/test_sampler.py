import math

import numpy as np
import pytest
from scipy import stats

from empbeta.data import RankMatrix
from empbeta.errors import TiedRanks
from empbeta.estimators import CopulaEstimate, regular_grid
from empbeta.sampler import BetaSampler, draw

N = 100_000


def ecdf_grid(x, g):
    """Plain (non-rank) empirical CDF of the draws on the product grid g^d."""
    d = x.shape[1]
    ind = [(x[:, j][None, :] <= g[:, None]).astype(float) for j in range(d)]  # (G, N)
    if d == 2:
        return ind[0] @ ind[1].T / len(x)
    return np.einsum("an,bn,cn->abc", *ind) / len(x)


def random_ranks(rng, n, d):
    return np.column_stack([rng.permutation(n) + 1 for _ in range(d)])


@pytest.mark.parametrize("scheme", ["direct", "orderstat"])
def test_single_observation_is_independence(scheme):
    x = BetaSampler(np.array([[1, 1]]), scheme, seed=1).draw(N)
    for j in range(2):
        assert stats.kstest(x[:, j], "uniform").pvalue > 0.001
    assert abs(stats.kendalltau(x[:, 0], x[:, 1])[0]) < 0.01


def test_comonotone_n2_value():
    x = BetaSampler(np.array([[1, 1], [2, 2]]), "direct_beta", seed=2).draw(N)
    assert np.mean(np.all(x <= 0.5, axis=1)) == pytest.approx(0.3125, abs=0.005)


def test_comonotone_n2_schemes_agree():
    r = np.array([[1, 1], [2, 2]])
    g = regular_grid(11)
    a = ecdf_grid(BetaSampler(r, "direct", seed=3).draw(N), g)
    b = ecdf_grid(BetaSampler(r, "orderstat", seed=4).draw(N), g)
    assert np.max(np.abs(a - b)) <= 0.01


@pytest.mark.parametrize("n,d", [(3, 2), (11, 2), (20, 2), (7, 3), (20, 3)])
def test_scheme_equivalence_and_fit(n, d):
    rng = np.random.default_rng(n * 10 + d)
    r = random_ranks(rng, n, d)
    g = regular_grid(11)
    a = ecdf_grid(BetaSampler(r, "direct", seed=5).draw(N), g)
    b = ecdf_grid(BetaSampler(r, "orderstat", seed=6).draw(N), g)
    assert np.max(np.abs(a - b)) <= 3 * math.sqrt(math.log(g.size**d) / N)
    fitted = CopulaEstimate("beta", r).evaluate_grid([g] * d)
    assert np.max(np.abs(a - fitted)) <= 0.01
    assert np.max(np.abs(b - fitted)) <= 0.01


@pytest.mark.parametrize("scheme", ["direct", "orderstat"])
def test_margins_uniform_ks(scheme):
    r = random_ranks(np.random.default_rng(7), 15, 3)
    x = BetaSampler(r, scheme, seed=8).draw(N)
    crit = stats.kstwo.ppf(0.999, N)
    for j in range(3):
        assert stats.kstest(x[:, j], "uniform").statistic < crit


def test_draws_in_unit_cube_and_reproducible():
    r = random_ranks(np.random.default_rng(9), 10, 2)
    s = BetaSampler(r, "orderstat", seed=10)
    x = s.draw(500)
    assert x.shape == (500, 2) and np.all((x >= 0) & (x <= 1))
    assert np.array_equal(x, BetaSampler(r, "orderstat", seed=10).draw(500))
    y = draw(s, 5, rng=np.random.default_rng(0))
    assert np.array_equal(y, draw(s, 5, rng=np.random.default_rng(0)))


def test_errors():
    with pytest.raises(TiedRanks):
        BetaSampler(np.array([[1, 2], [1, 1]]))
    with pytest.raises(ValueError):
        BetaSampler(np.array([[1, 1]]), scheme="bogus")
    with pytest.raises(ValueError):
        BetaSampler(RankMatrix(np.array([[1, 1]]))).draw(0)
