"""Rank-based copula estimators.

All four estimators are averages over the n rank vectors of a product of
univariate factors:

    est(u) = (1/n) sum_i prod_j K(R[i, j], u_j)

with
    empirical     K = 1{R/n <= u}
    checkerboard  K = min(max(n u - R + 1, 0), 1)
    beta          K = F_{n,R}(u),  the Beta(R, n + 1 - R) cdf
    bernstein(m)  K = F_{m,k}(u),  k = ceil(m R / n)

The Bernstein factor is the binomial-mixture form of the Bernstein
transform of the empirical copula; :class:`CopulaEstimate` evaluates the
Bernstein kind through its coefficient array instead, so the two routes
check each other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.special import betainc

from .bernstein import CoefficientArray, basis_matrix, eval_bernstein, eval_bernstein_grid
from .data import RankMatrix, compute_ranks
from .errors import DimensionMismatch, DomainError

__all__ = [
    "KINDS",
    "beta_cdf",
    "beta_cdf_sum",
    "kernel_factors",
    "mixture_eval",
    "CopulaEstimate",
    "fit",
    "empirical_copula",
    "checkerboard_copula",
    "beta_copula",
    "bernstein_copula",
    "bernstein_coefficients",
    "is_genuine_copula_degrees",
    "sup_distance",
    "box_volume",
    "regular_grid",
    "beta_distance_bound",
]

KINDS = ("empirical", "checkerboard", "beta", "bernstein")
_SUM_UP_TO = 30


def beta_cdf_sum(n: int, r: int, u):
    """``sum_{s=r}^n C(n,s) u^s (1-u)^(n-s)``, the literal binomial tail."""
    if not 1 <= r <= n:
        raise DomainError(f"need 1 <= r <= n, got r={r}, n={n}")
    u = np.asarray(u, dtype=float)
    if np.any((u < 0) | (u > 1)):
        raise DomainError("u must lie in [0, 1]")
    p = basis_matrix(n, u.ravel())[:, r:]
    # sum small terms first
    out = np.sort(p, axis=1).sum(axis=1).reshape(u.shape)
    return float(out) if out.ndim == 0 else out


def beta_cdf(n, r, u, method: str = "auto"):
    """Cdf of Beta(r, n + 1 - r) at ``u``, i.e. ``P(Binomial(n, u) >= r)``.

    ``method`` is "sum" (binomial tail), "incbeta" (regularized incomplete
    beta) or "auto", which uses the sum up to n = 30 and the incomplete beta
    above.  Array arguments broadcast under "incbeta".
    """
    if method == "auto":
        method = "sum" if np.ndim(n) == 0 and np.ndim(r) == 0 and n <= _SUM_UP_TO else "incbeta"
    if method == "sum":
        return beta_cdf_sum(int(n), int(r), u)
    if method != "incbeta":
        raise ValueError(f"unknown method {method!r}")
    n, r, u = np.asarray(n), np.asarray(r), np.asarray(u, dtype=float)
    if np.any(r < 1) or np.any(r > n):
        raise DomainError("need 1 <= r <= n")
    if np.any((u < 0) | (u > 1)):
        raise DomainError("u must lie in [0, 1]")
    out = betainc(r, n + 1 - r, u)
    return out[()] if out.ndim == 0 else out


def kernel_factors(kind: str, ranks, u, n: int, m=None) -> np.ndarray:
    """Univariate factor ``K(R, u)`` of the estimator, broadcasting ``ranks``
    against ``u``.  ``m`` is the Bernstein degree (scalar or broadcastable)."""
    if kind == "empirical":
        return (ranks / n <= u).astype(float)
    if kind == "checkerboard":
        return np.clip(n * u - ranks + 1.0, 0.0, 1.0)
    if kind == "beta":
        return betainc(ranks, n + 1 - ranks, u)
    if kind == "bernstein":
        if m is None:
            raise ValueError("bernstein factors need a degree")
        m = np.asarray(m)
        k = (m * ranks + n - 1) // n
        return betainc(k, m + 1 - k, u)
    raise ValueError(f"unknown estimator kind {kind!r}")


def mixture_eval(kind: str, ranks, u, m=None) -> np.ndarray:
    """Evaluate an estimator for a stack of rank matrices at matching points.

    Parameters
    ----------
    ranks : int array, shape (..., n, d)
    u : array, shape (..., d)
        One evaluation point per rank matrix.
    m : int or array of shape (...,) or (..., d), optional
        Bernstein degrees.
    """
    ranks = np.asarray(ranks)
    u = np.asarray(u, dtype=float)
    n, d = ranks.shape[-2:]
    if u.shape[-1] != d:
        raise DimensionMismatch(f"point dimension {u.shape[-1]} != {d}")
    if m is not None:
        m = np.asarray(m)
        if m.ndim == u.ndim - 1 and m.ndim > 0:
            m = m[..., None]
        m = np.broadcast_to(m, u.shape)[..., None, :]
    f = kernel_factors(kind, ranks, u[..., None, :], n, m)
    return f.prod(axis=-1).mean(axis=-1)


def bernstein_coefficients(ranks: RankMatrix, degrees) -> CoefficientArray:
    """Coefficient array ``C_n(s_1/m_1, ..., s_d/m_d)``.

    The indicator ``R/n <= s/m`` is evaluated as ``R m <= s n`` in integers.
    """
    r = ranks.ranks
    n, d = r.shape
    degrees = tuple(int(m) for m in degrees)
    if len(degrees) != d:
        raise DimensionMismatch(f"{len(degrees)} degrees for dimension {d}")
    if any(m < 1 for m in degrees):
        raise DomainError("Bernstein degrees must be positive")
    counts = np.zeros([m + 1 for m in degrees])
    # smallest s with R m <= s n, i.e. ceil(R m / n); the indicator is 1 for s >= it
    first = [(m * r[:, j] + n - 1) // n for j, m in enumerate(degrees)]
    np.add.at(counts, tuple(first), 1.0)
    for ax in range(d):
        counts = np.cumsum(counts, axis=ax)
    return CoefficientArray(counts / n)


@dataclass(frozen=True)
class CopulaEstimate:
    """A fitted rank-based copula estimator, evaluatable on ``[0, 1]^d``.

    Call it with one point (shape (d,)) or many (shape (k, d)).
    """

    kind: str
    ranks: RankMatrix
    degrees: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown estimator kind {self.kind!r}")
        if not isinstance(self.ranks, RankMatrix):
            object.__setattr__(self, "ranks", RankMatrix(self.ranks))
        if self.kind == "bernstein":
            if self.degrees is None:
                raise ValueError("bernstein estimator needs degrees")
            degs = (self.degrees,) * self.d if np.ndim(self.degrees) == 0 else self.degrees
            degs = tuple(int(m) for m in degs)
            if len(degs) != self.d:
                raise DimensionMismatch(f"{len(degs)} degrees for dimension {self.d}")
            if any(m < 1 for m in degs):
                raise DomainError("Bernstein degrees must be positive")
            object.__setattr__(self, "degrees", degs)
        elif self.degrees is not None:
            raise ValueError(f"{self.kind} estimator takes no degrees")

    @property
    def n(self) -> int:
        return self.ranks.n

    @property
    def d(self) -> int:
        return self.ranks.d

    @cached_property
    def coefficients(self) -> CoefficientArray:
        if self.kind != "bernstein":
            raise AttributeError("only the bernstein kind has a coefficient array")
        return bernstein_coefficients(self.ranks, self.degrees)

    def _points(self, u):
        u = np.asarray(u, dtype=float)
        single = u.ndim == 1
        u = np.atleast_2d(u)
        if u.shape[-1] != self.d:
            raise DimensionMismatch(f"point dimension {u.shape[-1]} != {self.d}")
        if np.any((u < 0) | (u > 1)):
            raise DomainError("points must lie in [0, 1]^d")
        return u, single

    def __call__(self, u):
        u, single = self._points(u)
        if self.kind == "bernstein":
            out = eval_bernstein(self.coefficients, u)
        else:
            r = self.ranks.ranks
            f = kernel_factors(self.kind, r[None, :, :], u[:, None, :], self.n)
            out = f.prod(axis=-1).mean(axis=-1)
        return float(out[0]) if single else out

    def axis_factors(self, j: int, grid) -> np.ndarray:
        """Factor matrix of axis ``j`` on ``grid``; shape (n, len(grid))."""
        grid = np.asarray(grid, dtype=float)
        r = self.ranks.ranks[:, j][:, None]
        m = None if self.kind != "bernstein" else self.degrees[j]
        kind = self.kind
        return kernel_factors(kind, r, grid[None, :], self.n, m)

    def evaluate_grid(self, axes) -> np.ndarray:
        """Values on the product grid ``axes[0] x ... x axes[d-1]``."""
        axes = [np.asarray(a, dtype=float) for a in axes]
        if len(axes) != self.d:
            raise DimensionMismatch("one axis per dimension required")
        for a in axes:
            if np.any((a < 0) | (a > 1)):
                raise DomainError("grid must lie in [0, 1]")
        if self.kind == "bernstein":
            return eval_bernstein_grid(self.coefficients, axes)
        return _mixture_grid([self.axis_factors(j, a) for j, a in enumerate(axes)])

    def jump_points(self) -> np.ndarray:
        """Locations ``k/n`` where the empirical kind jumps (empty otherwise)."""
        if self.kind != "empirical":
            return np.empty(0)
        return np.arange(self.n + 1) / self.n


def _mixture_grid(factors: list[np.ndarray], weights=None) -> np.ndarray:
    """sum_i w_i prod_j factors[j][i, g_j] on the full product grid (w_i = 1/n by default)."""
    n = factors[0].shape[0]
    w = np.full(n, 1.0 / n) if weights is None else np.asarray(weights, dtype=float)
    shape = [f.shape[1] for f in factors]
    t = factors[0]
    for f in factors[1:-1]:
        t = (t[:, :, None] * f[:, None, :]).reshape(n, -1)
    if len(factors) == 1:
        return w @ t
    out = t.T @ (factors[-1] * w[:, None])
    return out.reshape(shape)


def fit(data, kind: str, degrees=None, ties: str = "error", seed: int | None = None) -> CopulaEstimate:
    """Rank ``data`` and return the requested estimator."""
    ranks = data if isinstance(data, RankMatrix) else compute_ranks(data, ties=ties, seed=seed)
    return CopulaEstimate(kind, ranks, degrees)


def _ranks(ranks) -> RankMatrix:
    return ranks if isinstance(ranks, RankMatrix) else RankMatrix(ranks)


def empirical_copula(ranks, u):
    return CopulaEstimate("empirical", _ranks(ranks))(u)


def checkerboard_copula(ranks, u):
    return CopulaEstimate("checkerboard", _ranks(ranks))(u)


def beta_copula(ranks, u):
    return CopulaEstimate("beta", _ranks(ranks))(u)


def bernstein_copula(ranks, m, u):
    return CopulaEstimate("bernstein", _ranks(ranks), m)(u)


def is_genuine_copula_degrees(n: int, m) -> bool:
    """True iff every Bernstein degree divides the sample size."""
    return all(n % int(mj) == 0 for mj in np.atleast_1d(m))


def regular_grid(points_per_axis: int) -> np.ndarray:
    """``k / (K - 1)`` for ``k = 0..K-1``; exact at both ends."""
    if points_per_axis < 2:
        raise ValueError("a closed grid needs at least 2 points per axis")
    return np.arange(points_per_axis) / (points_per_axis - 1)


def _same_estimator(f: CopulaEstimate, g: CopulaEstimate) -> bool:
    return (f.kind, f.degrees) == (g.kind, g.degrees) and np.array_equal(f.ranks.ranks, g.ranks.ranks)


def sup_distance(f: CopulaEstimate, g, points_per_axis: int) -> float:
    """Maximum of ``|f - g|`` over a closed regular grid.

    The grid is augmented with the jump locations ``k/n`` of empirical
    estimators so that step heights are not missed.  ``g`` may also be a
    plain callable taking an (N, d) array (e.g. a reference copula cdf).
    """
    d = f.d
    if isinstance(g, CopulaEstimate) and g.d != d:
        raise DimensionMismatch(f"dimensions differ: {f.d} vs {g.d}")
    if isinstance(g, CopulaEstimate) and _same_estimator(f, g):
        return 0.0
    ax = regular_grid(points_per_axis)
    extra = [f.jump_points()]
    if isinstance(g, CopulaEstimate):
        extra.append(g.jump_points())
    ax = np.unique(np.concatenate([ax, *extra]))
    axes = [ax] * d
    if isinstance(g, CopulaEstimate) and "bernstein" not in (f.kind, g.kind):
        # f - g is itself a signed mixture over the pooled observations
        factors = [np.vstack([f.axis_factors(j, ax), g.axis_factors(j, ax)]) for j in range(d)]
        weights = np.concatenate([np.full(f.n, 1.0 / f.n), np.full(g.n, -1.0 / g.n)])
        fv = _mixture_grid(factors, weights)
    else:
        fv = f.evaluate_grid(axes)
        if isinstance(g, CopulaEstimate):
            gv = g.evaluate_grid(axes)
        else:
            pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
            gv = np.asarray(g(pts)).reshape(fv.shape)
        fv = fv - gv
    return float(max(fv.max(), -fv.min()))


def box_volume(c, lower, upper) -> np.ndarray:
    """C-volume of the boxes ``[lower, upper]`` (arrays of shape (k, d)).

    ``c`` is any callable accepting an (N, d) array of points.
    """
    lower = np.atleast_2d(np.asarray(lower, dtype=float))
    upper = np.atleast_2d(np.asarray(upper, dtype=float))
    k, d = lower.shape
    total = np.zeros(k)
    for corner in range(2**d):
        bits = [(corner >> j) & 1 for j in range(d)]
        pts = np.where(np.array(bits, dtype=bool), upper, lower)
        sign = (-1) ** (d - sum(bits))
        total += sign * np.asarray(c(pts))
    return total


def beta_distance_bound(n: int, d: int) -> float:
    """Non-asymptotic bound on sup |empirical - beta|."""
    return d * (math.sqrt(math.log(n) / n) + 1 / math.sqrt(n) + 1 / n)
