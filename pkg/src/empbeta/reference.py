"""Bivariate parametric copulas used as ground truth in simulations.

Families: independence, Farlie-Gumbel-Morgenstern (theta in [-1, 1]),
Gaussian (rho in (-1, 1)) and Gumbel (alpha >= 1, or Kendall's tau with
alpha = 1 / (1 - tau)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.special import ndtr, ndtri

from .bernstein import CoefficientArray, eval_bernstein, eval_bernstein_grid
from .errors import DomainError, UndefinedBandwidth

__all__ = [
    "FAMILIES",
    "ReferenceCopula",
    "independence",
    "fgm",
    "gauss",
    "gumbel",
    "parse_model",
    "bvn_cdf",
    "cdf",
    "partial_derivatives",
    "sample",
    "bernstein_transform",
    "bernstein_transform_grid",
    "jsv_degree",
    "jsv_degree_raw",
]

FAMILIES = ("independence", "fgm", "gauss", "gumbel")

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(32)
_GL_NODES2, _GL_WEIGHTS2 = np.polynomial.legendre.leggauss(64)
_BVN_TOL = 1e-13


def _plackett_integrand(theta, h, k):
    c2 = np.cos(theta) ** 2
    return np.exp(-(h * h + k * k - 2.0 * h * k * np.sin(theta)) / (2.0 * c2))


def _bvn_gl(h, k, rho, nodes, weights):
    top = math.asin(rho)
    theta = 0.5 * top * (nodes + 1.0)
    vals = _plackett_integrand(theta[None, :], h[:, None], k[:, None])
    return 0.5 * top * (vals @ weights) / (2.0 * math.pi)


def bvn_cdf(h, k, rho: float) -> np.ndarray:
    """P(X <= h, Y <= k) for standard normals with correlation ``rho``.

    Uses the one-dimensional representation

        Phi(h) Phi(k) + (1 / 2 pi) int_0^{asin rho}
            exp(-(h^2 + k^2 - 2 h k sin t) / (2 cos^2 t)) dt

    with 32- and 64-point Gauss-Legendre rules; points where the two rules
    disagree by more than 1e-13 are redone with adaptive quadrature.
    Infinite limits are allowed.
    """
    h, k = np.broadcast_arrays(np.asarray(h, dtype=float), np.asarray(k, dtype=float))
    shape = h.shape
    h, k = h.ravel(), k.ravel()
    out = np.empty(h.shape)
    finite = np.isfinite(h) & np.isfinite(k)
    # at least one infinite limit: reduce to a univariate cdf
    inf = ~finite
    out[inf] = np.where(
        (h[inf] == -np.inf) | (k[inf] == -np.inf),
        0.0,
        np.minimum(ndtr(h[inf]), ndtr(k[inf])),
    )
    if rho == 0.0:
        out[finite] = ndtr(h[finite]) * ndtr(k[finite])
        return out.reshape(shape)
    hf, kf = h[finite], k[finite]
    base = ndtr(hf) * ndtr(kf)
    lo = _bvn_gl(hf, kf, rho, _GL_NODES, _GL_WEIGHTS)
    hi = _bvn_gl(hf, kf, rho, _GL_NODES2, _GL_WEIGHTS2)
    res = base + hi
    for i in np.nonzero(np.abs(hi - lo) > _BVN_TOL)[0]:
        val, _ = integrate.quad(
            _plackett_integrand, 0.0, math.asin(rho), args=(hf[i], kf[i]),
            epsabs=1e-14, epsrel=1e-12, limit=200,
        )
        res[i] = base[i] + val / (2.0 * math.pi)
    out[finite] = np.clip(res, 0.0, 1.0)
    return out.reshape(shape)


@dataclass(frozen=True)
class ReferenceCopula:
    """A bivariate parametric copula with a single parameter ``param``.

    ``param`` is theta (fgm), rho (gauss) or alpha (gumbel); unused for
    independence.
    """

    family: str
    param: float = 0.0
    d: int = 2

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise DomainError(f"unknown family {self.family!r}")
        if self.d != 2:
            raise DomainError("reference copulas are bivariate")
        p = float(self.param)
        if self.family == "fgm" and not -1.0 <= p <= 1.0:
            raise DomainError("FGM parameter must lie in [-1, 1]")
        if self.family == "gauss" and not -1.0 < p < 1.0:
            raise DomainError("Gaussian correlation must lie in (-1, 1)")
        if self.family == "gumbel" and not p >= 1.0:
            raise DomainError("Gumbel parameter must be >= 1")
        object.__setattr__(self, "param", p)

    @property
    def label(self) -> str:
        if self.family == "independence":
            return "indep"
        if self.family == "gumbel":
            return f"gumbel_tau{self.kendall_tau:g}"
        key = {"fgm": "theta", "gauss": "rho"}[self.family]
        return f"{self.family}_{key}{self.param:g}"

    @property
    def kendall_tau(self) -> float:
        p = self.param
        if self.family == "independence":
            return 0.0
        if self.family == "fgm":
            return 2.0 * p / 9.0
        if self.family == "gauss":
            return 2.0 / math.pi * math.asin(p)
        return 1.0 - 1.0 / p

    def cdf(self, u):
        return cdf(self, u)

    def __call__(self, u):
        return cdf(self, u)

    def partial_derivatives(self, u):
        return partial_derivatives(self, u)

    def sample(self, n: int, seed=None) -> np.ndarray:
        return sample(self, n, seed)


def independence() -> ReferenceCopula:
    return ReferenceCopula("independence")


def fgm(theta: float) -> ReferenceCopula:
    return ReferenceCopula("fgm", theta)


def gauss(rho: float) -> ReferenceCopula:
    return ReferenceCopula("gauss", rho)


def gumbel(tau: float | None = None, alpha: float | None = None) -> ReferenceCopula:
    if (tau is None) == (alpha is None):
        raise DomainError("give exactly one of tau and alpha")
    if alpha is None:
        if not 0.0 <= tau < 1.0:
            raise DomainError("Gumbel Kendall's tau must lie in [0, 1)")
        alpha = 1.0 / (1.0 - tau)
    return ReferenceCopula("gumbel", alpha)


def parse_model(name: str, theta=None, rho=None, tau=None, alpha=None) -> ReferenceCopula:
    """Build a model from CLI-style options, e.g. ``("fgm", theta=-1)``."""
    name = name.lower()
    if name in ("indep", "independence", "pi"):
        return independence()
    if name == "fgm":
        if theta is None:
            raise DomainError("fgm needs --theta")
        return fgm(float(theta))
    if name in ("gauss", "gaussian", "normal"):
        if rho is None:
            raise DomainError("gauss needs --rho")
        return gauss(float(rho))
    if name == "gumbel":
        return gumbel(
            tau=None if tau is None else float(tau),
            alpha=None if alpha is None else float(alpha),
        )
    raise DomainError(f"unknown model {name!r}")


def _pts(u):
    u = np.asarray(u, dtype=float)
    single = u.ndim == 1
    u = np.atleast_2d(u)
    if u.shape[-1] != 2:
        raise DomainError("reference copulas take points in [0, 1]^2")
    if np.any((u < 0) | (u > 1)) or np.any(np.isnan(u)):
        raise DomainError("points must lie in [0, 1]^2")
    return u[:, 0], u[:, 1], single


def _out(x, single):
    return float(x[0]) if single else x


def cdf(c: ReferenceCopula, u):
    """Exact copula value at one point (shape (2,)) or many (shape (k, 2))."""
    u1, u2, single = _pts(u)
    p = c.param
    if c.family == "independence":
        v = u1 * u2
    elif c.family == "fgm":
        v = u1 * u2 * (1.0 + p * (1.0 - u1) * (1.0 - u2))
    elif c.family == "gauss":
        v = bvn_cdf(ndtri(u1), ndtri(u2), p)
    else:
        v = np.zeros_like(u1)
        pos = (u1 > 0) & (u2 > 0)
        x, y = -np.log(u1[pos]), -np.log(u2[pos])
        v[pos] = np.exp(-((x**p + y**p) ** (1.0 / p)))
    return _out(v, single)


def partial_derivatives(c: ReferenceCopula, u):
    """First and second partial derivatives ``(dC/du1, dC/du2, d2C/du1^2, d2C/du2^2)``
    at interior points."""
    u1, u2, single = _pts(u)
    if np.any((u1 <= 0) | (u1 >= 1) | (u2 <= 0) | (u2 >= 1)):
        raise DomainError("derivatives are evaluated at interior points only")
    p = c.param
    if c.family == "independence":
        d1, d2 = u2.copy(), u1.copy()
        s1 = s2 = np.zeros_like(u1)
    elif c.family == "fgm":
        d1 = u2 + p * u2 * (1 - u2) * (1 - 2 * u1)
        d2 = u1 + p * u1 * (1 - u1) * (1 - 2 * u2)
        s1 = -2 * p * u2 * (1 - u2)
        s2 = -2 * p * u1 * (1 - u1)
    elif c.family == "gauss":
        z1, z2 = ndtri(u1), ndtri(u2)
        sd = math.sqrt(1 - p * p)
        a1, a2 = (z2 - p * z1) / sd, (z1 - p * z2) / sd
        d1, d2 = ndtr(a1), ndtr(a2)
        phi = lambda z: np.exp(-0.5 * z * z) / math.sqrt(2 * math.pi)  # noqa: E731
        s1 = phi(a1) * (-p / sd) / phi(z1)
        s2 = phi(a2) * (-p / sd) / phi(z2)
    else:
        x, y = -np.log(u1), -np.log(u2)
        a = x**p + y**p
        cval = np.exp(-(a ** (1 / p)))

        def first_second(xj, uj):
            g = a ** (1 / p - 1) * xj ** (p - 1) / uj
            dlng = (1 / p - 1) * (-p * xj ** (p - 1) / uj) / a - (p - 1) / (uj * xj) - 1 / uj
            return cval * g, cval * g * (g + dlng)

        d1, s1 = first_second(x, u1)
        d2, s2 = first_second(y, u2)
    return tuple(_out(np.asarray(t, dtype=float), single) for t in (d1, d2, s1, s2))


def _stable(alpha_s: float, size: int, rng) -> np.ndarray:
    """Positive stable variates with Laplace transform exp(-t^alpha_s), 0 < alpha_s <= 1."""
    if alpha_s == 1.0:
        return np.ones(size)
    theta = rng.uniform(0.0, math.pi, size)
    w = rng.exponential(1.0, size)
    a = alpha_s
    return (np.sin(a * theta) / np.sin(theta) ** (1 / a)) * (
        np.sin((1 - a) * theta) / w
    ) ** ((1 - a) / a)


def sample(c: ReferenceCopula, n: int, seed=None) -> np.ndarray:
    """Draw ``n`` observations, shape (n, 2).

    ``seed`` may be an int, a ``SeedSequence`` or a ``Generator``.  FGM uses
    conditional inversion, Gauss transformed correlated normals, Gumbel the
    Marshall-Olkin frailty construction with a positive stable mixing
    variable.
    """
    if n < 1:
        raise DomainError("sample size must be positive")
    rng = np.random.default_rng(seed)
    p = c.param
    if c.family == "independence":
        return rng.random((n, 2))
    if c.family == "fgm":
        u, w = rng.random(n), rng.random(n)
        a = p * (1.0 - 2.0 * u)
        small = np.abs(a) < 1e-12
        a_safe = np.where(small, 1.0, a)
        disc = np.sqrt((1.0 + a_safe) ** 2 - 4.0 * a_safe * w)
        v = np.where(small, w, 2.0 * w / (1.0 + a_safe + disc))
        return np.column_stack([u, v])
    if c.family == "gauss":
        z = rng.standard_normal((n, 2))
        z[:, 1] = p * z[:, 0] + math.sqrt(1 - p * p) * z[:, 1]
        return ndtr(z)
    s = _stable(1.0 / p, n, rng)
    e = rng.exponential(1.0, (n, 2))
    return np.exp(-((e / s[:, None]) ** (1.0 / p)))


def bernstein_transform(c, m, u):
    """``B_m(C)(u)`` computed from the coefficient array ``C(s/m)``."""
    m = tuple(int(k) for k in np.broadcast_to(m, (2,)))
    if any(k < 1 for k in m):
        raise DomainError("Bernstein degrees must be positive")
    coeffs = CoefficientArray.from_function(lambda pts: cdf(c, pts), m)
    return eval_bernstein(coeffs, u)


def bernstein_transform_grid(c, m, axes) -> np.ndarray:
    """``B_m(C)`` on the product grid ``axes[0] x axes[1]``."""
    m = tuple(int(k) for k in np.broadcast_to(m, (2,)))
    if any(k < 1 for k in m):
        raise DomainError("Bernstein degrees must be positive")
    coeffs = CoefficientArray.from_function(lambda pts: cdf(c, pts), m)
    return eval_bernstein_grid(coeffs, axes)


def jsv_degree_raw(c: ReferenceCopula, u, n: int):
    """Unrounded data-size dependent Bernstein degree ``{4 b^2 / V}^(2/3) n^(2/3)``.

    ``b = 1/2 sum_j u_j (1 - u_j) C_jj`` and
    ``V = sum_j C_j (1 - C_j) sqrt(u_j (1 - u_j) / pi)``.
    """
    if c.family == "independence":
        raise UndefinedBandwidth("independence copula: second derivatives vanish, degree undefined")
    single = np.ndim(u) == 1
    d1, d2, s1, s2 = (np.atleast_1d(t) for t in partial_derivatives(c, u))
    u = np.atleast_2d(np.asarray(u, dtype=float))
    w1, w2 = u[:, 0] * (1 - u[:, 0]), u[:, 1] * (1 - u[:, 1])
    b = 0.5 * (w1 * np.asarray(s1) + w2 * np.asarray(s2))
    v = d1 * (1 - d1) * np.sqrt(w1 / math.pi) + d2 * (1 - d2) * np.sqrt(w2 / math.pi)
    if np.any(b == 0):
        raise UndefinedBandwidth(f"{c.label}: bias term vanishes, degree undefined")
    out = (4 * b * b / v) ** (2 / 3) * n ** (2 / 3)
    return float(out[0]) if single else out


def jsv_degree(c: ReferenceCopula, u, n: int):
    """Integer part of :func:`jsv_degree_raw`, clamped to at least 1."""
    raw = jsv_degree_raw(c, u, n)
    out = np.maximum(1, np.floor(raw)).astype(np.int64)
    return int(out) if np.ndim(out) == 0 else out
