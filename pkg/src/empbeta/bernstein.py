"""Bernstein polynomials on the unit cube and copula-validity checks.

A coefficient array ``a`` with extents ``m_j + 1`` defines the polynomial

    B_m(a)(u) = sum_s a[s] * prod_j p(m_j, s_j, u_j),
    p(m, s, u) = C(m, s) u^s (1 - u)^(m - s).

It is a copula when ``a`` vanishes on the lower faces (C.1), equals
``s_j / m_j`` along the edges through the top corner (C.2) and has
nonnegative full mixed differences (C.3).  The first two are necessary, the
third only sufficient.
"""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from os import PathLike

import numpy as np
from scipy.special import gammaln, xlog1py, xlogy

from .errors import DimensionMismatch, DomainError, ParseError

__all__ = [
    "CONDITION_TOL",
    "CoefficientArray",
    "ValidityReport",
    "bernstein_basis",
    "basis_matrix",
    "eval_bernstein",
    "difference",
    "check_copula_conditions",
    "mixed_partial",
    "mixed_partial_grid_min",
    "derivative_identity_rhs",
    "read_coefficients_csv",
    "write_coefficients_csv",
]

CONDITION_TOL = 1e-12
MAX_WITNESSES = 100
_LOG_SPACE_ABOVE = 50


def _check_unit(u):
    u = np.asarray(u, dtype=float)
    if np.any((u < 0) | (u > 1)) or np.any(np.isnan(u)):
        raise DomainError("evaluation points must lie in [0, 1]")
    return u


def bernstein_basis(m, s, u):
    """Bernstein basis polynomial ``C(m, s) u^s (1-u)^(m-s)``.

    Broadcasts over array arguments.  Degrees above 50 are handled in log
    space so that the binomial coefficient never overflows.
    """
    m, s, u = np.broadcast_arrays(np.asarray(m), np.asarray(s), _check_unit(u))
    if np.any(m < 0) or np.any(s < 0) or np.any(s > m):
        raise DomainError("basis index s must satisfy 0 <= s <= m")
    if np.all(m <= _LOG_SPACE_ABOVE):
        comb = np.vectorize(math.comb, otypes=[float])(m, s)
        out = comb * np.power(u, s) * np.power(1.0 - u, m - s)
    else:
        logc = gammaln(m + 1.0) - gammaln(s + 1.0) - gammaln(m - s + 1.0)
        out = np.exp(logc + xlogy(s, u) + xlog1py(m - s, -u))
    return out[()] if out.ndim == 0 else out


def basis_matrix(m: int, u) -> np.ndarray:
    """All degree-``m`` basis values at points ``u``; shape (len(u), m + 1)."""
    u = _check_unit(np.atleast_1d(u))
    s = np.arange(m + 1)
    if m <= _LOG_SPACE_ABOVE:
        comb = np.array([math.comb(m, k) for k in s], dtype=float)
        return comb * np.power(u[:, None], s) * np.power(1.0 - u[:, None], m - s)
    logc = gammaln(m + 1.0) - gammaln(s + 1.0) - gammaln(m - s + 1.0)
    return np.exp(logc + xlogy(s, u[:, None]) + xlog1py(m - s, -u[:, None]))


def _is_exact(values: np.ndarray) -> bool:
    return values.dtype == object and all(
        isinstance(v, (int, Fraction)) for v in values.flat
    )


@dataclass(frozen=True)
class CoefficientArray:
    """Bernstein coefficients over the index box ``prod_j {0..m_j}``.

    Arrays built from ``Fraction``/``int`` entries stay exact (object dtype)
    so that differences and condition checks are exact rational arithmetic.
    """

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.dtype == object and _is_exact(v):
            v = np.vectorize(Fraction, otypes=[object])(v)
        else:
            v = v.astype(float)
            if not np.all(np.isfinite(v)):
                raise DomainError("coefficient array has non-finite entries")
        if v.ndim < 1 or any(k < 2 for k in v.shape):
            raise DomainError("every axis needs degree m_j >= 1 (extent >= 2)")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_function(cls, f, degrees) -> "CoefficientArray":
        """Coefficients ``f(s_1/m_1, ..., s_d/m_d)`` of the Bernstein transform of ``f``.

        ``f`` is called once with an (N, d) array of grid points.
        """
        degrees = tuple(int(m) for m in degrees)
        if any(m < 1 for m in degrees):
            raise DomainError("degrees must be positive")
        axes = [np.arange(m + 1) / m for m in degrees]
        pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, len(degrees))
        vals = np.asarray(f(pts), dtype=float).reshape([m + 1 for m in degrees])
        return cls(vals)

    @property
    def degrees(self) -> tuple[int, ...]:
        return tuple(k - 1 for k in self.values.shape)

    @property
    def d(self) -> int:
        return self.values.ndim

    @property
    def exact(self) -> bool:
        return self.values.dtype == object


def _as_coeffs(a) -> CoefficientArray:
    return a if isinstance(a, CoefficientArray) else CoefficientArray(np.asarray(a))


def _points(u, d: int) -> tuple[np.ndarray, bool]:
    u = np.asarray(u, dtype=float)
    single = u.ndim == 1
    u = np.atleast_2d(u)
    if u.shape[-1] != d:
        raise DimensionMismatch(f"points have dimension {u.shape[-1]}, coefficients {d}")
    return u, single


def _contract(values: np.ndarray, mats: list[np.ndarray]) -> np.ndarray:
    """sum_s values[s] prod_j mats[j][k, s_j] for every row k."""
    k = mats[0].shape[0]
    t = mats[0] @ values.reshape(values.shape[0], -1)  # (k, rest)
    for j in range(1, len(mats)):
        t = t.reshape(k, values.shape[j], -1)
        t = np.einsum("ks,ksr->kr", mats[j], t)
    return t.reshape(k)


def eval_bernstein(a, u):
    """Evaluate ``B_m(a)`` at one point (shape (d,)) or many (shape (k, d))."""
    a = _as_coeffs(a)
    u, single = _points(u, a.d)
    u = _check_unit(u)
    mats = [basis_matrix(m, u[:, j]) for j, m in enumerate(a.degrees)]
    out = _contract(a.values.astype(float), mats)
    return float(out[0]) if single else out


def eval_bernstein_grid(a, axes) -> np.ndarray:
    """Evaluate ``B_m(a)`` on the product grid ``axes[0] x ... x axes[d-1]``."""
    a = _as_coeffs(a)
    if len(axes) != a.d:
        raise DimensionMismatch("one axis per coefficient dimension required")
    t = a.values.astype(float)
    for j, (m, ax) in enumerate(zip(a.degrees, axes)):
        p = basis_matrix(m, ax)  # (G_j, m_j + 1)
        t = np.tensordot(p, t, axes=([1], [j]))  # new axis at front
        t = np.moveaxis(t, 0, j)
    return t


def difference(a, axes) -> np.ndarray:
    """Composed forward differences along ``axes`` (0-based, distinct).

    Along a differenced axis the result has extent ``m_j`` and its entry
    ``i`` corresponds to index ``s_j = i + 1``, i.e. ``a[.., s_j, ..] -
    a[.., s_j - 1, ..]``.  Works exactly on rational arrays.
    """
    a = _as_coeffs(a)
    axes = list(axes)
    if len(set(axes)) != len(axes):
        raise ValueError("difference axes must be distinct")
    if any(ax < 0 or ax >= a.d for ax in axes):
        raise DimensionMismatch(f"axis out of range for a {a.d}-dimensional array")
    out = a.values
    for ax in axes:
        out = np.diff(out, axis=ax)
    return out


def full_difference(a) -> np.ndarray:
    """``Delta_1 ... Delta_d a`` on ``prod_j {1..m_j}``."""
    a = _as_coeffs(a)
    return difference(a, range(a.d))


@dataclass(frozen=True)
class ValidityReport:
    """Outcome of :func:`check_copula_conditions`.

    ``witnesses`` maps each failed condition ("C.1", "C.2", "C.3") to at most
    100 ``(multi_index, value)`` pairs; multi-indices use the array's own
    ``s`` labels.  For C.2 the value is the offending coefficient.
    """

    grounded: bool
    uniform_margins: bool
    nonneg_differences: bool
    witnesses: dict = field(default_factory=dict)

    @property
    def is_copula_certified(self) -> bool:
        return self.grounded and self.uniform_margins and self.nonneg_differences

    def summary(self) -> str:
        mark = {True: "ok", False: "FAIL"}
        lines = [
            f"C.1 grounded: {mark[self.grounded]}",
            f"C.2 uniform margins: {mark[self.uniform_margins]}",
            f"C.3 nonnegative mixed differences: {mark[self.nonneg_differences]}",
        ]
        for cond, items in self.witnesses.items():
            for idx, val in items[:5]:
                lines.append(f"  {cond} witness {idx}: {val}")
            if len(items) > 5:
                lines.append(f"  {cond} ... {len(items) - 5} more")
        return "\n".join(lines)


def _collect(mask: np.ndarray, values: np.ndarray, offset: int = 0) -> list:
    out = []
    for idx in zip(*np.nonzero(mask)):
        out.append((tuple(int(i) + offset for i in idx), values[idx]))
        if len(out) >= MAX_WITNESSES:
            break
    return out


def _abs_gt(x: np.ndarray, tol: float) -> np.ndarray:
    return np.vectorize(lambda v: abs(v) > tol, otypes=[bool])(x)


def check_copula_conditions(a, tol: float = CONDITION_TOL) -> ValidityReport:
    """Check (C.1)-(C.3) on a coefficient array; never raises on failure."""
    a = _as_coeffs(a)
    v = a.values
    d, degs = a.d, a.degrees
    witnesses: dict[str, list] = {}

    lower = np.zeros(v.shape, dtype=bool)
    for j in range(d):
        sl = [slice(None)] * d
        sl[j] = 0
        lower[tuple(sl)] = True
    bad = lower & _abs_gt(v, tol)
    if bad.any():
        witnesses["C.1"] = _collect(bad, v)

    bad_edges = []
    for j in range(d):
        sl = [m for m in degs]
        sl[j] = slice(None)
        edge = v[tuple(sl)]
        m = degs[j]
        target = (
            np.array([Fraction(s, m) for s in range(m + 1)], dtype=object)
            if a.exact
            else np.arange(m + 1) / m
        )
        off = _abs_gt(edge - target, tol)
        for s in np.nonzero(off)[0]:
            idx = list(degs)
            idx[j] = int(s)
            bad_edges.append((tuple(idx), edge[s]))
    if bad_edges:
        witnesses["C.2"] = bad_edges[:MAX_WITNESSES]

    delta = full_difference(a)
    neg = np.vectorize(lambda x: x < -tol, otypes=[bool])(delta)
    if neg.any():
        witnesses["C.3"] = _collect(neg, delta, offset=1)

    return ValidityReport(
        grounded="C.1" not in witnesses,
        uniform_margins="C.2" not in witnesses,
        nonneg_differences="C.3" not in witnesses,
        witnesses=witnesses,
    )


def mixed_partial(a, u):
    """Full mixed partial derivative of ``B_m(a)`` at interior points.

    Uses the expansion over ``Delta_1...Delta_d a`` against degree ``m_j - 1``
    bases scaled by ``m_j``.
    """
    a = _as_coeffs(a)
    u, single = _points(u, a.d)
    if np.any((u <= 0) | (u >= 1)):
        raise DomainError("mixed partial is evaluated at interior points only")
    delta = full_difference(a).astype(float)
    mats = [m * basis_matrix(m - 1, u[:, j]) for j, m in enumerate(a.degrees)]
    out = _contract(delta, mats)
    return float(out[0]) if single else out


def mixed_partial_grid_min(a, points_per_axis: int = 51) -> float:
    """Smallest mixed partial over an interior product grid.

    A heuristic only: a nonnegative minimum on a grid does not prove that
    ``B_m(a)`` is d-increasing.
    """
    a = _as_coeffs(a)
    ax = np.arange(1, points_per_axis + 1) / (points_per_axis + 1)
    delta = full_difference(a).astype(float)
    t = delta
    for j, m in enumerate(a.degrees):
        p = m * basis_matrix(m - 1, ax)
        t = np.moveaxis(np.tensordot(p, t, axes=([1], [j])), 0, j)
    return float(t.min())


def derivative_identity_rhs(a, t):
    """``sum_{r=1}^n (a_r - a_{r-1}) n p(n-1, r-1, t)``, the derivative of
    ``sum_r a_r p(n, r, t)``."""
    a = np.asarray(a, dtype=float)
    n = a.size - 1
    if n < 1:
        raise DomainError("need at least two coefficients")
    t = _check_unit(np.atleast_1d(t))
    out = n * basis_matrix(n - 1, t) @ np.diff(a)
    return float(out[0]) if np.ndim(t) == 1 and out.size == 1 else out


def write_coefficients_csv(a, path: str | PathLike) -> None:
    """One row per multi-index in row-major order: ``s_1,...,s_d,value``."""
    a = _as_coeffs(a)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        for idx in itertools.product(*(range(k) for k in a.values.shape)):
            val = a.values[idx]
            w.writerow([*idx, str(val) if a.exact else f"{float(val):.17g}"])


def read_coefficients_csv(path: str | PathLike) -> CoefficientArray:
    """Inverse of :func:`write_coefficients_csv`.

    Values written as ``p/q`` are read as exact fractions; if every value is
    rational the array stays exact.
    """
    entries = {}
    d = None
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not f.strip() for f in row):
                continue
            if d is None:
                d = len(row) - 1
                if d < 1:
                    raise ParseError(f"{path}:{lineno}: need s_1..s_d and a value")
            if len(row) != d + 1:
                raise ParseError(f"{path}:{lineno}: expected {d + 1} fields")
            try:
                idx = tuple(int(f) for f in row[:d])
                raw = row[d].strip()
                val = float(raw) if any(c in raw.lower() for c in ".ein") else Fraction(raw)
            except ValueError as exc:
                raise ParseError(f"{path}:{lineno}: {exc}") from None
            entries[idx] = val
    if not entries:
        raise ParseError(f"{path}: no coefficients")
    shape = tuple(max(idx[j] for idx in entries) + 1 for j in range(d))
    if len(entries) != math.prod(shape) or any(min(i) < 0 for i in entries):
        raise ParseError(f"{path}: coefficients do not fill a full index box {shape}")
    exact = all(isinstance(v, Fraction) for v in entries.values())
    arr = np.empty(shape, dtype=object if exact else float)
    for idx, val in entries.items():
        arr[idx] = val
    return CoefficientArray(arr)
