"""Empirical beta copula and related nonparametric copula estimators."""

__version__ = "0.1.0"

from .bernstein import (  # noqa: E402
    CoefficientArray,
    ValidityReport,
    bernstein_basis,
    check_copula_conditions,
    difference,
    eval_bernstein,
    mixed_partial,
)
from .data import RankMatrix, Sample, compute_ranks, read_sample_csv  # noqa: E402
from .estimators import (  # noqa: E402
    CopulaEstimate,
    beta_cdf,
    beta_copula,
    bernstein_copula,
    checkerboard_copula,
    empirical_copula,
    fit,
    is_genuine_copula_degrees,
    sup_distance,
)
from .reference import ReferenceCopula, fgm, gauss, gumbel, independence, jsv_degree  # noqa: E402
from .sampler import BetaSampler  # noqa: E402
