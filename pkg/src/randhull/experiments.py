"""Reproducible Monte Carlo experiments on face counts of boundary hulls.

A master seed pins every replication: replication seeds derive from the
(cell index, replication index) pair through the documented mixing function,
so results are byte-identical for any worker count.  The binomial model
samples a fixed number of boundary points per replication; the Poissonized
model first draws the point count from a Poisson law.  Summaries report
means, unbiased variances with bootstrap intervals, and Kolmogorov distances
of self-normalized samples to the standard normal.
"""

from __future__ import annotations

import math
import multiprocessing
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .body import Ball, Body, Ellipsoid, sample_surface
from .geometry import GeneralPositionError
from .hull import f_vector, incremental_hull
from .rng import Stream, derive_seed
from .stabilization import scores

AUDIT_TAG = 0xAD17
BOOT_TAG = 0xB0075

# Fraction of replications whose score sums are re-verified exactly.
_AUDIT_THRESHOLD = int(0.01 * 2 ** 64)

_SQRT2 = math.sqrt(2.0)


class ConfigError(ValueError):
    """Invalid experiment configuration."""


def body_label(body: Body) -> str:
    if isinstance(body, Ball):
        center = ",".join(format(c, "g") for c in body.center)
        return f"ball(d={body.dimension},r={body.radius:g},c=[{center}])"
    axes = ",".join(format(a, "g") for a in body.semi_axes)
    return f"ellipsoid({axes})"


@dataclass(frozen=True)
class ExperimentConfig:
    body: Body
    dimension: int
    k_list: tuple[int, ...]
    model: str  # "binomial" or "poisson"
    cells: tuple[float, ...]  # n values (binomial) or t values (poisson)
    replications: int
    master_seed: int

    def __post_init__(self):
        d = self.dimension
        if self.body.dimension != d:
            raise ConfigError("body dimension does not match experiment dimension")
        if self.model not in ("binomial", "poisson"):
            raise ConfigError(f"unknown model {self.model!r}")
        if not self.cells:
            raise ConfigError("empty cell grid")
        if self.model == "binomial":
            if any(int(n) != n or n < d + 2 for n in self.cells):
                raise ConfigError("binomial n values must be integers >= d+2")
        else:
            if any(t <= 1 for t in self.cells):
                raise ConfigError("poisson t values must exceed 1")
        if self.replications < 2:
            raise ConfigError("need at least 2 replications")
        if not self.k_list or any(not 0 <= k <= d - 1 for k in self.k_list):
            raise ConfigError(f"face dimensions must lie in 0..{d - 1}")


@dataclass(frozen=True)
class ReplicationRecord:
    rep: int
    seed: int
    realized_n: int
    degenerate: bool
    fvec: tuple[int, ...] | None


@dataclass(frozen=True)
class ReplicationTable:
    model: str
    body: Body
    dimension: int
    cells: tuple[float, ...]
    master_seed: int
    records: dict  # cell value -> list[ReplicationRecord]

    def values(self, cell, k: int) -> np.ndarray:
        """f_k across non-degenerate replications of one cell."""
        return np.array([r.fvec[k] for r in self.records[cell]
                         if not r.degenerate], dtype=float)

    def degenerate_count(self, cell) -> int:
        return sum(1 for r in self.records[cell] if r.degenerate)


def _replicate(task) -> tuple[int, int, ReplicationRecord]:
    body, d, model, cell, cell_idx, rep, master_seed = task
    seed = derive_seed(master_seed, cell_idx, rep)
    stream = Stream(seed)
    if model == "poisson":
        realized = stream.poisson(float(cell))
    else:
        realized = int(cell)
    if realized <= d + 1:
        return cell_idx, rep, ReplicationRecord(rep, seed, realized, True, None)
    pts = sample_surface(body, stream, realized)
    try:
        h = incremental_hull(pts)
    except GeneralPositionError:
        return cell_idx, rep, ReplicationRecord(rep, seed, realized, True, None)
    fv = f_vector(h)
    if derive_seed(master_seed, AUDIT_TAG, cell_idx, rep) < _AUDIT_THRESHOLD:
        for k in range(d):
            total = scores(h, k).total()
            if total.denominator != 1 or total.numerator != fv[k]:
                raise RuntimeError(
                    f"score audit failed: sum of k={k} scores is {total}, "
                    f"f_k is {fv[k]}")
    return cell_idx, rep, ReplicationRecord(rep, seed, realized, False, fv)


def _warm_up(dimension: int):
    # Compile the fast kernel in the parent so forked workers inherit it.
    rows = np.vstack([np.zeros(dimension), np.eye(dimension),
                      np.full(dimension, 0.3)])
    incremental_hull(rows)


def _run_model(config: ExperimentConfig, threads: int) -> ReplicationTable:
    tasks = [(config.body, config.dimension, config.model, cell, ci, rep,
              config.master_seed)
             for ci, cell in enumerate(config.cells)
             for rep in range(config.replications)]
    if threads > 1 and len(tasks) > 1:
        _warm_up(config.dimension)
        ctx = multiprocessing.get_context("fork")
        chunk = max(1, len(tasks) // (threads * 16))
        with ctx.Pool(threads) as pool:
            results = pool.map(_replicate, tasks, chunksize=chunk)
    else:
        results = [_replicate(t) for t in tasks]
    records: dict = {cell: [None] * config.replications for cell in config.cells}
    for cell_idx, rep, rec in results:
        records[config.cells[cell_idx]][rep] = rec
    return ReplicationTable(config.model, config.body, config.dimension,
                            config.cells, config.master_seed, records)


def run_binomial(config: ExperimentConfig, threads: int = 1) -> ReplicationTable:
    """Hulls of a fixed number of uniform boundary points per replication."""
    if config.model != "binomial":
        raise ConfigError("config.model must be 'binomial'")
    return _run_model(config, threads)


def run_poisson(config: ExperimentConfig, threads: int = 1) -> ReplicationTable:
    """Hulls of a Poisson-distributed number of uniform boundary points;
    replications with N <= d+1 are flagged degenerate and excluded from
    summaries but counted."""
    if config.model != "poisson":
        raise ConfigError("config.model must be 'poisson'")
    return _run_model(config, threads)


# ---------------------------------------------------------------------------
# Normal distribution utilities.
# ---------------------------------------------------------------------------

def normal_cdf(x: float) -> float:
    """Standard normal CDF via the complementary error function:
    Phi(x) = erfc(-x / sqrt(2)) / 2 (absolute error below 1e-12)."""
    if not math.isfinite(x):
        raise ValueError("normal_cdf needs finite input")
    return 0.5 * math.erfc(-x / _SQRT2)


def ks_to_normal(sample) -> float:
    """One-sample Kolmogorov-Smirnov statistic against the standard normal:
    max over order statistics of max(|i/M - Phi(x_(i))|, |(i-1)/M - Phi(x_(i))|)."""
    xs = sorted(float(v) for v in np.asarray(sample, dtype=float).ravel())
    m = len(xs)
    if m == 0:
        raise ValueError("empty sample")
    worst = 0.0
    for i, x in enumerate(xs, start=1):
        phi = normal_cdf(x)
        worst = max(worst, abs(i / m - phi), abs((i - 1) / m - phi))
    return worst


def fit_power_law(xs, ys) -> tuple[float, float, float]:
    """Ordinary least squares of log y against log x:
    (slope, intercept, r_squared)."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if len(xs) < 3 or len(xs) != len(ys):
        raise ValueError("need at least 3 (x, y) pairs")
    if np.any(xs <= 0) or np.any(ys <= 0):
        raise ValueError("power-law fit needs strictly positive data")
    lx = np.log(xs)
    ly = np.log(ys)
    slope, intercept = np.polyfit(lx, ly, 1)
    pred = slope * lx + intercept
    ss_res = float(np.sum((ly - pred) ** 2))
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return float(slope), float(intercept), r2


# ---------------------------------------------------------------------------
# Summaries.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SummaryStats:
    body: str
    dimension: int
    k: int
    model: str
    cell: float
    mean: float
    var: float
    var_ci_lo: float
    var_ci_hi: float
    ks: float
    m_effective: int
    degenerate_count: int

    def as_dict(self) -> dict:
        return {"body": self.body, "d": self.dimension, "k": self.k,
                "model": self.model, "cell": self.cell, "mean": self.mean,
                "var": self.var, "var_ci_lo": self.var_ci_lo,
                "var_ci_hi": self.var_ci_hi, "ks": self.ks,
                "m_effective": self.m_effective,
                "degenerate_count": self.degenerate_count}


def _self_normalized_ks(values: np.ndarray) -> float:
    # Centering by the sample mean and scaling by the population-style
    # (ddof=0) standard deviation; a constant sample degenerates to a point
    # mass at zero, whose Kolmogorov distance to the normal is 1/2.
    sd = float(values.std(ddof=0))
    if sd == 0.0:
        return 0.5
    return ks_to_normal((values - values.mean()) / sd)


def _bootstrap_var_interval(values: np.ndarray, stream: Stream,
                            resamples: int = 1000) -> tuple[float, float]:
    m = len(values)
    idx = stream.below_array(m, resamples * m).reshape(resamples, m)
    boot = values[idx].var(axis=1, ddof=1)
    lo, hi = np.percentile(boot, [2.5, 97.5])
    return float(lo), float(hi)


def summarize(table: ReplicationTable, k: int,
              bootstrap_resamples: int = 1000) -> list[SummaryStats]:
    """Per-cell mean, unbiased variance with a bootstrap 95% interval, and
    Kolmogorov distance of the self-normalized sample to the normal."""
    d = table.dimension
    if not 0 <= k <= d - 1:
        raise ValueError(f"k must be in 0..{d - 1}")
    label = body_label(table.body)
    out = []
    for ci, cell in enumerate(table.cells):
        values = table.values(cell, k)
        if len(values) < 2:
            raise ValueError(f"cell {cell}: fewer than 2 usable replications")
        boot_stream = Stream(derive_seed(table.master_seed, BOOT_TAG, ci, k))
        ci_lo, ci_hi = _bootstrap_var_interval(values, boot_stream,
                                               bootstrap_resamples)
        out.append(SummaryStats(
            body=label, dimension=d, k=k, model=table.model, cell=cell,
            mean=float(values.mean()), var=float(values.var(ddof=1)),
            var_ci_lo=ci_lo, var_ci_hi=ci_hi,
            ks=_self_normalized_ks(values),
            m_effective=len(values),
            degenerate_count=table.degenerate_count(cell)))
    return out


@dataclass(frozen=True)
class CltReport:
    k: int
    cells: tuple[float, ...]
    ks: tuple[float, ...]
    normalized: tuple[float, ...]  # ks * sqrt(cell)
    band_ratio: float
    band_ok: bool  # max/min of the normalized sequence within 3


def clt_report(table: ReplicationTable, k: int) -> CltReport:
    """Kolmogorov distances per cell and the rate-normalized sequence
    ks * sqrt(cell); flags when the sequence leaves a factor-3 band."""
    if len(table.cells) < 2:
        raise ValueError("need at least 2 cells")
    ks_vals = []
    for cell in table.cells:
        values = table.values(cell, k)
        if len(values) < 2:
            raise ValueError(f"cell {cell}: fewer than 2 usable replications")
        if float(values.std(ddof=0)) == 0.0:
            raise ValueError(
                f"cell {cell}: variance is zero, standardization undefined "
                "(face counts are deterministic)")
        ks_vals.append(_self_normalized_ks(values))
    normalized = tuple(v * math.sqrt(c) for v, c in zip(ks_vals, table.cells))
    ratio = max(normalized) / min(normalized)
    return CltReport(k, table.cells, tuple(ks_vals), normalized,
                     float(ratio), ratio <= 3.0)


# ---------------------------------------------------------------------------
# Serialization: replication CSVs and summary JSON documents.
# ---------------------------------------------------------------------------

def replication_csv_lines(table: ReplicationTable, cell) -> list[str]:
    """Byte-exact CSV: header ``rep,seed,n,degenerate,f0,...``, decimal
    integers, seeds as 16-digit lowercase hex, zero face counts on
    degenerate rows."""
    d = table.dimension
    header = "rep,seed,n,degenerate," + ",".join(f"f{k}" for k in range(d))
    lines = [header]
    for rec in table.records[cell]:
        fv = rec.fvec if rec.fvec is not None else (0,) * d
        lines.append(f"{rec.rep},{rec.seed:016x},{rec.realized_n},"
                     f"{1 if rec.degenerate else 0},"
                     + ",".join(str(v) for v in fv))
    return lines


def cell_file_name(model: str, cell) -> str:
    tag = "n" if model == "binomial" else "t"
    value = int(cell) if float(cell) == int(cell) else cell
    return f"reps_{tag}{value}.csv"


def write_replication_csvs(table: ReplicationTable, outdir) -> list[str]:
    import os
    paths = []
    for cell in table.cells:
        path = os.path.join(outdir, cell_file_name(table.model, cell))
        with open(path, "w", newline="") as fh:
            fh.write("\n".join(replication_csv_lines(table, cell)) + "\n")
        paths.append(path)
    return paths


def summary_document(table: ReplicationTable, k_list) -> list[dict]:
    out = []
    for k in k_list:
        for s in summarize(table, k):
            out.append(s.as_dict())
    return out
