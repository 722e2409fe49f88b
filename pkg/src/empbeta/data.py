"""Sample ingestion, componentwise ranks and pseudo-observations.

Ranks are 1-based: the rank of X[i, j] is the number of k with
X[k, j] <= X[i, j].  Ties are either refused or broken uniformly at random
with a dedicated, seeded generator so that estimation on tied data can be
replayed.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from os import PathLike

import numpy as np

from .errors import NonFiniteInput, ParseError, TiedRanks, TiesPresent

__all__ = [
    "Sample",
    "RankMatrix",
    "as_sample",
    "compute_ranks",
    "batch_ranks",
    "pseudo_observations",
    "read_sample_csv",
]


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Sample:
    """An n x d matrix of finite observations, one row per observation."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        if v.ndim != 2 or v.shape[0] < 1 or v.shape[1] < 1:
            raise ValueError(f"sample must be a nonempty 2-d array, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise NonFiniteInput("sample contains NaN or infinite entries")
        object.__setattr__(self, "values", _frozen(v))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)


def as_sample(x) -> Sample:
    return x if isinstance(x, Sample) else Sample(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class RankMatrix:
    """Componentwise ranks; every column is a permutation of 1..n.

    ``tie_seed`` records the seed of the tie-breaking stream when random
    tie-breaking actually changed something, and is None otherwise.
    """

    ranks: np.ndarray
    tie_seed: int | None = None

    def __post_init__(self):
        r = np.asarray(self.ranks)
        if r.ndim == 1:
            r = r[:, None]
        if r.ndim != 2 or r.shape[0] < 1:
            raise ValueError(f"ranks must be a nonempty 2-d array, got shape {r.shape}")
        if not np.issubdtype(r.dtype, np.integer):
            if not np.all(np.equal(np.mod(r, 1), 0)):
                raise ValueError("ranks must be integers")
        r = r.astype(np.int64)
        n = r.shape[0]
        expected = np.arange(1, n + 1)
        for j in range(r.shape[1]):
            if not np.array_equal(np.sort(r[:, j]), expected):
                raise TiedRanks(f"rank column {j} is not a permutation of 1..{n}")
        object.__setattr__(self, "ranks", _frozen(r))

    @property
    def n(self) -> int:
        return self.ranks.shape[0]

    @property
    def d(self) -> int:
        return self.ranks.shape[1]

    def pseudo_observations(self) -> np.ndarray:
        """Scaled ranks R / n, the grid points where the empirical copula jumps."""
        return self.ranks / self.n


def compute_ranks(sample, ties: str = "error", seed: int | None = None) -> RankMatrix:
    """Rank each column of ``sample``.

    Parameters
    ----------
    sample : Sample or array_like, shape (n, d)
    ties : {"error", "random"}
        With "error", any duplicated value in a column raises
        :class:`TiesPresent`.  With "random", each block of tied values gets
        a uniformly random permutation of the ranks it spans.
    seed : int, optional
        Seed of the tie-breaking stream; only consulted when ties occur.
    """
    if ties not in ("error", "random"):
        raise ValueError(f"unknown tie policy {ties!r}")
    x = as_sample(sample).values
    n, d = x.shape
    ranks = np.empty((n, d), dtype=np.int64)
    rng = None
    used = False
    for j in range(d):
        col = x[:, j]
        order = np.argsort(col, kind="stable")
        has_ties = np.any(np.diff(col[order]) == 0)
        if has_ties:
            if ties == "error":
                raise TiesPresent(f"column {j} contains tied values")
            if rng is None:
                rng = np.random.default_rng(seed)
            used = True
            # lexsort: last key is primary
            order = np.lexsort((rng.random(n), col))
        ranks[order, j] = np.arange(1, n + 1)
    return RankMatrix(ranks, tie_seed=seed if used else None)


def batch_ranks(samples: np.ndarray) -> np.ndarray:
    """Ranks along axis -2 of a stack of continuous samples, shape (..., n, d).

    No tie handling: intended for simulated data where ties have probability
    zero.
    """
    order = np.argsort(samples, axis=-2)
    ranks = np.empty_like(order)
    n = samples.shape[-2]
    idx = np.broadcast_to(np.arange(1, n + 1)[:, None], samples.shape[-2:])
    np.put_along_axis(ranks, order, np.broadcast_to(idx, samples.shape), axis=-2)
    return ranks


def pseudo_observations(sample, ties: str = "error", seed: int | None = None) -> np.ndarray:
    return compute_ranks(sample, ties=ties, seed=seed).pseudo_observations()


def read_sample_csv(path: str | PathLike, has_header: bool = False) -> Sample:
    """Read a comma-separated file of reals into a :class:`Sample`.

    Blank lines are skipped.  Raises :class:`ParseError` for non-numeric
    fields, ragged rows or a file without data rows; I/O problems surface as
    ``OSError``.
    """
    rows: list[list[float]] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        for lineno, fields in enumerate(reader, start=1):
            if has_header and lineno == 1:
                continue
            if not fields or all(not f.strip() for f in fields):
                continue
            try:
                row = [float(f) for f in fields]
            except ValueError as exc:
                raise ParseError(f"{path}:{lineno}: {exc}") from None
            if rows and len(row) != len(rows[0]):
                raise ParseError(
                    f"{path}:{lineno}: expected {len(rows[0])} fields, got {len(row)}"
                )
            rows.append(row)
    if not rows:
        raise ParseError(f"{path}: no data rows")
    return Sample(np.array(rows))
