"""Random draws from a fitted empirical beta copula.

Two equivalent schemes:

``order_statistic``
    For every draw, sort n fresh uniforms per coordinate and return, for a
    uniformly chosen observation i, the order statistics with indices given
    by its rank vector.
``direct_beta``
    Pick i uniformly and draw coordinate j from Beta(R[i, j], n + 1 - R[i, j])
    by inverting the regularized incomplete beta function.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import betaincinv

from .data import RankMatrix

__all__ = ["SCHEMES", "BetaSampler", "draw"]

SCHEMES = ("direct_beta", "order_statistic")
_ALIASES = {"direct": "direct_beta", "orderstat": "order_statistic"}
# uniforms per chunk of the order-statistic scheme
_CHUNK = 2_000_000


@dataclass(frozen=True)
class BetaSampler:
    ranks: RankMatrix
    scheme: str = "direct_beta"
    seed: int | None = None

    def __post_init__(self):
        scheme = _ALIASES.get(self.scheme, self.scheme)
        if scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        object.__setattr__(self, "scheme", scheme)
        if not isinstance(self.ranks, RankMatrix):
            # raises TiedRanks on unresolved ties
            object.__setattr__(self, "ranks", RankMatrix(self.ranks))

    def draw(self, count: int, rng=None) -> np.ndarray:
        """Return ``count`` draws, shape (count, d).

        ``rng`` may be a Generator or a seed; by default a fresh generator is
        built from the sampler's own seed, so repeated calls are reproducible.
        """
        if count < 1:
            raise ValueError("count must be positive")
        rng = np.random.default_rng(self.seed if rng is None else rng)
        r = self.ranks.ranks
        n, d = r.shape
        idx = rng.integers(0, n, size=count)
        chosen = r[idx]  # (count, d)
        if self.scheme == "direct_beta":
            return betaincinv(chosen, n + 1 - chosen, rng.random((count, d)))
        out = np.empty((count, d))
        per_chunk = max(1, _CHUNK // (n * d))
        for start in range(0, count, per_chunk):
            stop = min(count, start + per_chunk)
            w = np.sort(rng.random((stop - start, n, d)), axis=1)
            out[start:stop] = np.take_along_axis(w, chosen[start:stop, None, :] - 1, axis=1)[:, 0, :]
        return out


def draw(sampler: BetaSampler, count: int, rng=None) -> np.ndarray:
    return sampler.draw(count, rng)
