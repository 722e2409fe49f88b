"""Monte Carlo measurement of estimator performance.

Integrated squared bias, variance and mean squared error are each a single
expectation over two independent fitted estimators and one uniform point V:

    isb  = E[(C1(V) - C(V)) (C2(V) - C(V))]
    ivar = E[(C1(V) - C2(V))^2 / 2]
    imse = E[((C1(V) - C(V))^2 + (C2(V) - C(V))^2) / 2]

so ``isb + ivar == imse`` holds replicate by replicate.  Localized errors
(LIMSE) on a cell B use one fitted estimator per replicate and V uniform on B.

Random numbers
--------------
Replicate ``l`` at sample size ``n`` draws from its own stream
``SeedSequence(master_seed, spawn_key=(tag, n, l))`` with tag 0 for the
three measures, 1 for LIMSE and 2 for LRE heatmaps.  Within a replicate the
stream yields, in order, the first sample, the second sample (measures only)
and then the uniforms for V.  With ``pair_across_n`` the measure streams
drop ``n`` from the key (``spawn_key=(0, 0, l)``), draw samples of the
largest size and use their first ``n`` rows, so replicates are also paired
across sample sizes.  All estimators of a configuration are
evaluated on the same samples and points (common random numbers), so the
results do not depend on how replicates are split into batches or workers.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .data import batch_ranks
from .errors import ConfigError, UndefinedBandwidth
from .estimators import kernel_factors
from .reference import ReferenceCopula, jsv_degree

__all__ = [
    "MEASURES",
    "EstimatorSpec",
    "ExperimentConfig",
    "MCEstimate",
    "PerformanceReport",
    "LREHeatmap",
    "parse_estimators",
    "parse_n_range",
    "replicate_rng",
    "run_measures",
    "run_limse",
    "run_lre_heatmap",
    "run_study",
]

MEASURES = ("isb", "ivar", "imse")
_TAG_MEASURES, _TAG_LIMSE, _TAG_LRE = 0, 1, 2
_RULES = ("ceil_n_over_3", "jsv")
_RULE_ALIASES = {"n/3": "ceil_n_over_3", "ceil3": "ceil_n_over_3", "ceil_n_over_3": "ceil_n_over_3", "jsv": "jsv"}


@dataclass(frozen=True)
class EstimatorSpec:
    """An estimator kind plus, for Bernstein, its degree rule.

    ``kind`` is one of empirical, checkerboard, beta, bernstein or oracle
    (the true copula itself, a zero-error control).  ``rule`` is a fixed
    degree (int), "ceil_n_over_3" or "jsv".
    """

    kind: str
    rule: int | str | None = None

    def __post_init__(self):
        if self.kind not in ("empirical", "checkerboard", "beta", "bernstein", "oracle"):
            raise ConfigError(f"unknown estimator kind {self.kind!r}")
        if self.kind == "bernstein":
            rule = self.rule
            if isinstance(rule, str):
                if rule.isdigit():
                    rule = int(rule)
                elif rule in _RULE_ALIASES:
                    rule = _RULE_ALIASES[rule]
                else:
                    raise ConfigError(f"unknown Bernstein degree rule {rule!r}")
            if rule is None or (isinstance(rule, int) and rule < 1):
                raise ConfigError("bernstein needs a positive degree or a degree rule")
            object.__setattr__(self, "rule", rule)
        elif self.rule is not None:
            raise ConfigError(f"{self.kind} takes no degree rule")

    @classmethod
    def parse(cls, text: str) -> "EstimatorSpec":
        """``"beta"``, ``"bernstein:n/3"``, ``"bernstein:jsv"``, ``"bernstein:12"``."""
        kind, _, rule = text.strip().partition(":")
        return cls(kind, rule or None)

    @property
    def label(self) -> str:
        if self.kind != "bernstein":
            return self.kind
        rule = {"ceil_n_over_3": "n/3"}.get(self.rule, self.rule)
        return f"bernstein:{rule}"

    def degrees(self, model: ReferenceCopula, n: int, points: np.ndarray):
        """Bernstein degree for each evaluation point (array of shape points.shape[:-1])."""
        if self.rule == "ceil_n_over_3":
            return np.full(points.shape[:-1], -(-n // 3))
        if self.rule == "jsv":
            flat = points.reshape(-1, points.shape[-1])
            return np.asarray(jsv_degree(model, flat, n)).reshape(points.shape[:-1])
        return np.full(points.shape[:-1], int(self.rule))


def parse_estimators(text) -> tuple[EstimatorSpec, ...]:
    if isinstance(text, str):
        text = [t for t in text.split(",") if t.strip()]
    return tuple(t if isinstance(t, EstimatorSpec) else EstimatorSpec.parse(t) for t in text)


def parse_n_range(text: str) -> tuple[int, ...]:
    """``"20:100:10"`` (inclusive), ``"50"`` or ``"20,50,100"``."""
    text = text.strip()
    if ":" in text:
        parts = [int(p) for p in text.split(":")]
        if len(parts) == 2:
            parts.append(1)
        start, stop, step = parts
        if step < 1:
            raise ConfigError("n range step must be positive")
        return tuple(range(start, stop + 1, step))
    return tuple(int(p) for p in text.split(","))


@dataclass(frozen=True)
class ExperimentConfig:
    model: ReferenceCopula
    estimators: tuple[EstimatorSpec, ...]
    n_values: tuple[int, ...]
    reps: int = 20_000
    master_seed: int = 0
    lre_cells: int | None = None
    lre_n: tuple[int, ...] = ()
    batch_size: int = 500
    n_jobs: int = 1
    pair_across_n: bool = False

    def __post_init__(self):
        object.__setattr__(self, "estimators", parse_estimators(self.estimators))
        object.__setattr__(self, "n_values", tuple(int(n) for n in np.atleast_1d(self.n_values)))
        object.__setattr__(self, "lre_n", tuple(int(n) for n in np.atleast_1d(self.lre_n)))
        if self.reps < 2:
            raise ConfigError("need at least 2 replications")
        if not self.n_values or min(self.n_values) < 1:
            raise ConfigError("n_values must be nonempty positive sample sizes")
        if not self.estimators:
            raise ConfigError("estimator list is empty")
        if self.lre_cells is not None and self.lre_cells < 1:
            raise ConfigError("lre_cells must be positive")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be positive")

    def check_bandwidths(self) -> None:
        for spec in self.estimators:
            if spec.kind == "bernstein" and spec.rule == "jsv" and self.model.family == "independence":
                raise UndefinedBandwidth(
                    f"model {self.model.label}: jsv degree rule is undefined for the independence copula"
                )


@dataclass(frozen=True)
class MCEstimate:
    value: float
    stderr: float

    def __float__(self):
        return float(self.value)


def replicate_rng(master_seed: int, tag: int, n: int, rep: int) -> np.random.Generator:
    """Independent stream for one replicate; see the module docstring."""
    ss = np.random.SeedSequence(master_seed, spawn_key=(tag, n, rep))
    return np.random.default_rng(ss)


def _evaluate(spec: EstimatorSpec, model, ranks, points, n: int) -> np.ndarray:
    """Estimator values, ranks (B, n, d) and points (B, P, d) -> (B, P)."""
    if spec.kind == "oracle":
        return np.asarray(model.cdf(points.reshape(-1, points.shape[-1]))).reshape(points.shape[:-1])
    m = None
    if spec.kind == "bernstein":
        m = spec.degrees(model, n, points)[..., None, None]  # (B, P, 1, 1)
    f = kernel_factors(spec.kind, ranks[:, None, :, :], points[:, :, None, :], n, m)
    return f.prod(axis=-1).mean(axis=-1)


def _measure_batch(cfg: ExperimentConfig, n: int, start: int, stop: int) -> dict:
    model, d = cfg.model, cfg.model.d
    b = stop - start
    s1 = np.empty((b, n, d))
    s2 = np.empty((b, n, d))
    v = np.empty((b, d))
    if cfg.pair_across_n:
        size = max(cfg.n_values)
        for i, rep in enumerate(range(start, stop)):
            rng = replicate_rng(cfg.master_seed, _TAG_MEASURES, 0, rep)
            s1[i] = model.sample(size, rng)[:n]
            s2[i] = model.sample(size, rng)[:n]
            v[i] = rng.random(d)
    else:
        for i, rep in enumerate(range(start, stop)):
            rng = replicate_rng(cfg.master_seed, _TAG_MEASURES, n, rep)
            s1[i] = model.sample(n, rng)
            s2[i] = model.sample(n, rng)
            v[i] = rng.random(d)
    r1, r2 = batch_ranks(s1), batch_ranks(s2)
    truth = np.asarray(model.cdf(v))
    out = {}
    for spec in cfg.estimators:
        e1 = _evaluate(spec, model, r1, v[:, None, :], n)[:, 0] - truth
        e2 = _evaluate(spec, model, r2, v[:, None, :], n)[:, 0] - truth
        out[spec.label] = {
            "isb": e1 * e2,
            "ivar": 0.5 * (e1 - e2) ** 2,
            "imse": 0.5 * (e1 * e1 + e2 * e2),
        }
    return out


def _batches(reps: int, size: int):
    return [(s, min(reps, s + size)) for s in range(0, reps, size)]


def _run_batches(cfg: ExperimentConfig, fn, *args) -> list:
    jobs = _batches(cfg.reps, cfg.batch_size)
    if cfg.n_jobs == 1:
        return [fn(cfg, *args, s, e) for s, e in jobs]
    from joblib import Parallel, delayed

    return Parallel(n_jobs=cfg.n_jobs)(delayed(fn)(cfg, *args, s, e) for s, e in jobs)


def _mean_se(x: np.ndarray) -> MCEstimate:
    return MCEstimate(float(np.mean(x)), float(np.std(x, ddof=1) / math.sqrt(x.size)))


@dataclass
class PerformanceReport:
    """Per (estimator label, n) Monte Carlo estimates of isb, ivar and imse.

    ``contributions[(label, n)][measure]`` holds the per-replicate terms,
    aligned across estimators (same replicate, same samples and V), which is
    what :meth:`paired_difference` relies on.
    """

    model: str
    reps: int
    master_seed: int
    estimators: tuple[str, ...]
    n_values: tuple[int, ...]
    contributions: dict = field(repr=False, default_factory=dict)

    def estimate(self, label: str, n: int, measure: str) -> MCEstimate:
        return _mean_se(self.contributions[(label, n)][measure])

    def value(self, label: str, n: int, measure: str) -> float:
        return self.estimate(label, n, measure).value

    def stderr(self, label: str, n: int, measure: str) -> float:
        return self.estimate(label, n, measure).stderr

    def paired_difference(self, n: int, measure: str, a: str, b: str) -> MCEstimate:
        """Mean and standard error of measure(a) - measure(b) over shared replicates."""
        diff = self.contributions[(a, n)][measure] - self.contributions[(b, n)][measure]
        return _mean_se(diff)

    def paired_difference_n(self, label: str, measure: str, n_a: int, n_b: int) -> MCEstimate:
        """measure(n_a) - measure(n_b) for one estimator.

        Only a paired comparison when the report was produced with
        ``pair_across_n``; otherwise the two arrays are independent and the
        standard error is still valid but not reduced.
        """
        diff = self.contributions[(label, n_a)][measure] - self.contributions[(label, n_b)][measure]
        return _mean_se(diff)

    def decomposition_gap(self, label: str, n: int) -> float:
        c = self.contributions[(label, n)]
        return float(np.max(np.abs(c["imse"] - c["isb"] - c["ivar"])))

    def suspicious(self) -> list[tuple[str, int, str]]:
        """Entries more than 3 standard errors below zero."""
        bad = []
        for (label, n) in self.contributions:
            for m in MEASURES:
                est = self.estimate(label, n, m)
                if est.value < -3 * est.stderr:
                    bad.append((label, n, m))
        return bad

    def rows(self, measure: str) -> list[tuple[int, str, float, float]]:
        out = []
        for n in self.n_values:
            for label in self.estimators:
                est = self.estimate(label, n, measure)
                out.append((n, label, est.value, est.stderr))
        return out


def run_measures(cfg: ExperimentConfig) -> PerformanceReport:
    """Estimate isb, ivar and imse for every estimator and sample size."""
    cfg.check_bandwidths()
    labels = tuple(s.label for s in cfg.estimators)
    if len(set(labels)) != len(labels):
        raise ConfigError("duplicate estimators in configuration")
    report = PerformanceReport(cfg.model.label, cfg.reps, cfg.master_seed, labels, cfg.n_values)
    for n in cfg.n_values:
        parts = _run_batches(cfg, _measure_batch, n)
        for label in labels:
            report.contributions[(label, n)] = {
                m: np.concatenate([p[label][m] for p in parts]) for m in MEASURES
            }
    return report


def _check_cell(cell, d: int) -> tuple[np.ndarray, np.ndarray]:
    lo, hi = (np.asarray(x, dtype=float) for x in cell)
    if lo.shape != (d,) or hi.shape != (d,):
        raise ConfigError(f"cell bounds must both have length {d}")
    if np.any(lo < 0) or np.any(hi > 1) or np.any(hi <= lo):
        raise ConfigError("cell must be a box inside [0, 1]^d with positive volume")
    return lo, hi


def _limse_batch(cfg, spec, n, lo, hi, start, stop):
    model, d = cfg.model, cfg.model.d
    b = stop - start
    s = np.empty((b, n, d))
    v = np.empty((b, d))
    for i, rep in enumerate(range(start, stop)):
        rng = replicate_rng(cfg.master_seed, _TAG_LIMSE, n, rep)
        s[i] = model.sample(n, rng)
        v[i] = lo + rng.random(d) * (hi - lo)
    est = _evaluate(spec, model, batch_ranks(s), v[:, None, :], n)[:, 0]
    return (est - np.asarray(model.cdf(v))) ** 2


def run_limse(cfg: ExperimentConfig, estimator, cell, n: int | None = None) -> MCEstimate:
    """Localized integrated mean squared error of one estimator on a box.

    ``cell`` is ``(lower, upper)``; one fresh sample and one uniform point in
    the cell per replicate.
    """
    spec = estimator if isinstance(estimator, EstimatorSpec) else EstimatorSpec.parse(estimator)
    if spec.kind == "bernstein" and spec.rule == "jsv" and cfg.model.family == "independence":
        raise UndefinedBandwidth(f"model {cfg.model.label}: jsv degree rule is undefined")
    n = cfg.n_values[0] if n is None else n
    lo, hi = _check_cell(cell, cfg.model.d)
    parts = _run_batches(cfg, _limse_batch, spec, n, lo, hi)
    return _mean_se(np.concatenate(parts))


@dataclass
class LREHeatmap:
    """Localized relative efficiency ``100 * LIMSE(num) / LIMSE(den)`` per cell.

    Arrays are indexed ``[j, k]`` for the cell
    ``[j/K, (j+1)/K] x [k/K, (k+1)/K]`` (0-based).  ``num_sq``/``den_sq``
    keep the per-replicate squared errors, shape (L, K, K).
    """

    cells: int
    n: int
    numerator: str
    denominator: str
    num_sq: np.ndarray = field(repr=False)
    den_sq: np.ndarray = field(repr=False)

    @property
    def limse_num(self) -> np.ndarray:
        return self.num_sq.mean(axis=0)

    @property
    def limse_den(self) -> np.ndarray:
        return self.den_sq.mean(axis=0)

    @property
    def lre(self) -> np.ndarray:
        return 100.0 * self.limse_num / self.limse_den

    @property
    def border_mask(self) -> np.ndarray:
        """Cells touching u1 = 1 or u2 = 1."""
        k = self.cells
        mask = np.zeros((k, k), dtype=bool)
        mask[-1, :] = True
        mask[:, -1] = True
        return mask

    def _linear_stat(self, weights: np.ndarray) -> MCEstimate:
        """sum_c w_c LRE_c with a delta-method standard error."""
        a, e = self.limse_num, self.limse_den
        lre = 100.0 * a / e
        infl = 100.0 * (self.num_sq - (lre / 100.0) * self.den_sq) / e  # (L, K, K)
        per_rep = np.tensordot(infl, weights, axes=([1, 2], [0, 1]))
        value = float(np.sum(weights * lre))
        return MCEstimate(value, float(np.std(per_rep, ddof=1) / math.sqrt(per_rep.size)))

    def mean_lre(self) -> MCEstimate:
        w = np.full((self.cells, self.cells), 1.0 / self.cells**2)
        return self._linear_stat(w)

    def border_contrast(self) -> MCEstimate:
        """Mean LRE over border cells minus mean LRE over the remaining cells."""
        mask = self.border_mask
        w = np.where(mask, 1.0 / mask.sum(), -1.0 / (~mask).sum())
        return self._linear_stat(w)


def _lre_batch(cfg, specs, n, cells, start, stop):
    model = cfg.model
    b = stop - start
    s = np.empty((b, n, 2))
    w = np.empty((b, 2))
    for i, rep in enumerate(range(start, stop)):
        rng = replicate_rng(cfg.master_seed, _TAG_LRE, n, rep)
        s[i] = model.sample(n, rng)
        w[i] = rng.random(2)
    ranks = batch_ranks(s)
    base = np.arange(cells)
    # the same offset inside every cell: u_j = (cell index + W_j) / K
    ax = (base[None, None, :] + w[:, :, None]) / cells  # (B, 2, K)
    pts = np.stack(np.broadcast_arrays(ax[:, 0, :, None], ax[:, 1, None, :]), axis=-1)  # (B,K,K,2)
    truth = np.asarray(model.cdf(pts.reshape(-1, 2))).reshape(b, cells, cells)
    out = []
    for spec in specs:
        if spec.kind == "oracle" or (spec.kind == "bernstein" and spec.rule == "jsv"):
            est = _evaluate(spec, model, ranks, pts.reshape(b, -1, 2), n).reshape(b, cells, cells)
        else:
            m = None
            if spec.kind == "bernstein":
                m = spec.degrees(model, n, np.zeros((1, 2)))[0]
            f1 = kernel_factors(spec.kind, ranks[:, :, 0, None], ax[:, 0, None, :], n, m)
            f2 = kernel_factors(spec.kind, ranks[:, :, 1, None], ax[:, 1, None, :], n, m)
            est = np.einsum("bnj,bnk->bjk", f1, f2) / n
        out.append((est - truth) ** 2)
    return out


def run_lre_heatmap(cfg: ExperimentConfig, n: int | None = None,
                    numerator="beta", denominator="empirical") -> LREHeatmap:
    """LRE of ``denominator`` relative to ``numerator`` on a K x K grid of cells.

    Every replicate uses one sample and one uniform offset shared by all
    cells and both estimators.
    """
    if cfg.model.d != 2:
        raise ConfigError("LRE heatmaps are bivariate")
    if cfg.lre_cells is None:
        raise ConfigError("lre_cells is not set")
    num = numerator if isinstance(numerator, EstimatorSpec) else EstimatorSpec.parse(numerator)
    den = denominator if isinstance(denominator, EstimatorSpec) else EstimatorSpec.parse(denominator)
    for spec in (num, den):
        if spec.kind == "bernstein" and spec.rule == "jsv" and cfg.model.family == "independence":
            raise UndefinedBandwidth(f"model {cfg.model.label}: jsv degree rule is undefined")
    n = (cfg.lre_n or cfg.n_values)[0] if n is None else n
    parts = _run_batches(cfg, _lre_batch, (num, den), n, cfg.lre_cells)
    num_sq = np.concatenate([p[0] for p in parts])
    den_sq = np.concatenate([p[1] for p in parts])
    return LREHeatmap(cfg.lre_cells, n, num.label, den.label, num_sq, den_sq)


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def write_measure_csv(report: PerformanceReport, measure: str, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["n", "estimator", "value", "stderr"])
        for n, label, value, se in report.rows(measure):
            w.writerow([n, label, _fmt(value), _fmt(se)])


def write_lre_csv(heatmap: LREHeatmap, path) -> None:
    """Rows ``cell_j, cell_k, lre_percent`` with 1-based cell indices."""
    lre = heatmap.lre
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["cell_j", "cell_k", "lre_percent"])
        for j in range(heatmap.cells):
            for k in range(heatmap.cells):
                w.writerow([j + 1, k + 1, _fmt(lre[j, k])])


def run_study(cfg: ExperimentConfig, out_dir) -> list[Path]:
    """Run all measures (and LRE heatmaps if ``lre_cells`` is set) and write CSVs.

    Returns the written paths, manifest last.  Output is byte-identical for
    a fixed configuration.
    """
    cfg.check_bandwidths()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    report = run_measures(cfg)
    label = cfg.model.label
    written = []
    for m in MEASURES:
        p = out / f"{label}_{m}.csv"
        write_measure_csv(report, m, p)
        written.append(p)
    lre_ns = ()
    if cfg.lre_cells:
        lre_ns = cfg.lre_n or (max(cfg.n_values),)
        for n in lre_ns:
            hm = run_lre_heatmap(cfg, n=n)
            p = out / f"{label}_lre_n{n}.csv"
            write_lre_csv(hm, p)
            written.append(p)
    manifest = {
        "model": {"family": cfg.model.family, "param": cfg.model.param, "label": label},
        "estimators": list(report.estimators),
        "n_values": list(cfg.n_values),
        "reps": cfg.reps,
        "master_seed": cfg.master_seed,
        "seed_scheme": "SeedSequence(master_seed, spawn_key=(tag, n, replicate)); "
                       "tag 0 measures, 1 limse, 2 lre",
        "common_random_numbers": True,
        "pair_across_n": cfg.pair_across_n,
        "lre_cells": cfg.lre_cells,
        "lre_n": list(lre_ns),
        "files": [p.name for p in written],
        "versions": {"empbeta": __version__, "numpy": np.__version__, "scipy": scipy.__version__},
    }
    mp = out / "manifest.json"
    mp.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    written.append(mp)
    return written
