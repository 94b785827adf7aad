"""Per-vertex score functions and radii of stabilization.

The k-face score of a hull vertex is its incident k-face count divided by
k+1, an exact rational; summed over all vertices it reproduces f_k exactly.
The stabilization radius at a vertex x is the smallest R such that every
solid cap cut off by a facet through x fits inside B(x, R); points farther
than R cannot change x's scores.  Balls admit a closed form; ellipsoids use
multi-start projected ascent on the boundary.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .body import Ball, Body, Ellipsoid, diameter, sample_surface
from .hull import HullComplex, enumerate_k_faces, incremental_hull
from .rng import Stream, derive_seed

TAIL_TAG = 0x7A11
MOMENT_TAG = 0x303E27


class InsufficientDataError(RuntimeError):
    """Too few usable grid points for a tail fit."""


@dataclass(frozen=True)
class ScoreTable:
    """Incident k-face counts per hull vertex; score = count / (k+1)."""

    k: int
    counts: dict[int, int]

    @property
    def divisor(self) -> int:
        return self.k + 1

    def value(self, vertex: int) -> Fraction:
        return Fraction(self.counts.get(vertex, 0), self.k + 1)

    def total(self) -> Fraction:
        return Fraction(sum(self.counts.values()), self.k + 1)


def scores(h: HullComplex, k: int) -> ScoreTable:
    """Exact score table from the set-based k-face enumeration."""
    d = h.dimension
    if not 0 <= k <= d - 1:
        raise ValueError(f"k must be in 0..{d - 1}, got {k}")
    counts: dict[int, int] = {v: 0 for v in h.hull_vertices}
    for face in enumerate_k_faces(h, k):
        for v in face:
            counts[v] += 1
    return ScoreTable(k, counts)


def vertex_score_count(h: HullComplex, k: int, vertex: int) -> int:
    """Incident k-face count of one vertex (array path, no full table)."""
    d = h.dimension
    if not 0 <= k <= d - 1:
        raise ValueError(f"k must be in 0..{d - 1}, got {k}")
    verts = h.facet_vertices
    rows = verts[(verts == vertex).any(axis=1)]
    if rows.size == 0:
        raise ValueError(f"point {vertex} is not a hull vertex")
    if k == 0:
        return 1
    faces = set()
    for row in rows.tolist():
        rest = tuple(u for u in row if u != vertex)
        for combo in itertools.combinations(rest, k):
            faces.add(combo)
    return len(faces)


@dataclass(frozen=True)
class StabilizationRecord:
    point_index: int
    radius: float
    facet: tuple[int, ...]


def _ball_cap_reach(body: Ball, x: np.ndarray, normals: np.ndarray,
                    offsets: np.ndarray) -> np.ndarray:
    """Farthest distance from x over the solid caps cut by the given planes
    of a ball (closed form: antipode if admissible, else the rim circle)."""
    c = np.asarray(body.center)
    rho = body.radius
    t_loc = offsets - normals @ c
    alpha = normals @ (x - c)
    w = (x - c)[None, :] - alpha[:, None] * normals
    beta = np.linalg.norm(w, axis=1)
    s = np.sqrt(np.maximum(rho * rho - t_loc * t_loc, 0.0))
    rim = np.hypot(t_loc - alpha, s + beta)
    out = np.where(-alpha >= t_loc, rho + np.linalg.norm(x - c), rim)
    return out


def _ellipsoid_cap_reach(body: Ellipsoid, x: np.ndarray, normal: np.ndarray,
                         offset: float, tol: float = 1e-6) -> float:
    """max |z - x| over the boundary part of a solid cap, by projected
    ascent in sphere coordinates with 2d+1 deterministic starts."""
    a = np.asarray(body.semi_axes)
    d = len(a)
    b = a * normal
    bn = float(np.linalg.norm(b))
    t = min(offset, bn)  # clamp: the plane supports the body at t = |b|
    bhat = b / bn
    c_t = t / bn
    s_t = math.sqrt(max(1.0 - c_t * c_t, 0.0))

    def project(s: np.ndarray) -> np.ndarray:
        s = s / np.linalg.norm(s)
        if s @ b >= t:
            return s
        w = s - (s @ bhat) * bhat
        wn = np.linalg.norm(w)
        if wn < 1e-14:
            w = np.zeros(d)
            w[int(np.argmin(np.abs(bhat)))] = 1.0
            w -= (w @ bhat) * bhat
            wn = np.linalg.norm(w)
        return c_t * bhat + s_t * (w / wn)

    def objective(s: np.ndarray) -> float:
        z = a * s
        return float(np.sum((z - x) ** 2))

    starts = [project(-x / a)]
    for i in range(d):
        e = np.zeros(d)
        e[i] = 1.0
        starts.append(project(e))
        starts.append(project(-e))
    best = 0.0
    for s in starts:
        val = objective(s)
        step = 1.0
        for _ in range(500):
            grad = 2.0 * a * (a * s - x)
            cand = project(s + step * grad / max(np.linalg.norm(grad), 1e-300))
            cval = objective(cand)
            if cval > val + 1e-18:
                s, val = cand, cval
                step = min(step * 1.5, 1.0)
            else:
                step *= 0.5
                if step < 1e-10:
                    break
        best = max(best, val)
    return math.sqrt(best)


def stabilization_radius(body: Body, x_index: int,
                         h: HullComplex) -> StabilizationRecord:
    """Smallest R with every solid cap cut by a facet through the vertex
    contained in B(x, R): the max cap reach over incident facets."""
    verts = h.facet_vertices
    rows = np.nonzero((verts == x_index).any(axis=1))[0]
    if rows.size == 0:
        raise ValueError(f"point {x_index} is not a hull vertex")
    x = h.points[x_index]
    normals, offsets = h.facet_planes(rows)
    if isinstance(body, Ball):
        reach = _ball_cap_reach(body, x, normals, offsets)
        best = int(np.argmax(reach))
        return StabilizationRecord(x_index, float(reach[best]),
                                   tuple(verts[rows[best]].tolist()))
    best_r = -1.0
    best_row = rows[0]
    for i, row in enumerate(rows):
        r = _ellipsoid_cap_reach(body, x, normals[i], float(offsets[i]))
        if r > best_r:
            best_r = r
            best_row = row
    return StabilizationRecord(x_index, best_r,
                               tuple(verts[best_row].tolist()))


@dataclass(frozen=True)
class TailResult:
    n: int
    r_grid: np.ndarray
    survival: np.ndarray
    stderr: np.ndarray
    slope: float
    intercept: float
    r_squared: float
    radii: np.ndarray


def _tail_replicate(task) -> float:
    body, n, master_seed, rep = task
    stream = Stream(derive_seed(master_seed, TAIL_TAG, rep))
    pts = sample_surface(body, stream, n)
    h = incremental_hull(pts)
    hv = sorted(h.hull_vertices)
    vi = hv[stream.below(len(hv))]
    return stabilization_radius(body, vi, h).radius


def radius_tail_experiment(body: Body, n: int, r_grid, replications: int,
                           master_seed: int, threads: int = 1) -> TailResult:
    """Empirical survival of the stabilization radius at a random hull
    vertex, with a least-squares fit of log P(R >= r) against r^(d-1) * n
    over grid points with empirical survival in [10/M, 0.5]."""
    d = body.dimension
    if n < d + 1:
        raise ValueError("n must be at least d+1")
    if replications < 100:
        raise ValueError("need at least 100 replications")
    tasks = [(body, n, master_seed, rep) for rep in range(replications)]
    if threads > 1:
        import multiprocessing

        ctx = multiprocessing.get_context("fork")
        with ctx.Pool(threads) as pool:
            radii = np.array(pool.map(_tail_replicate, tasks,
                                      chunksize=max(1, replications // (threads * 16))))
    else:
        radii = np.array([_tail_replicate(t) for t in tasks])
    if r_grid is None:
        levels = np.geomspace(0.5, max(10.0 / replications, 1e-3), 12)
        r_grid = np.unique(np.quantile(radii, 1.0 - levels))
    r_grid = np.asarray(r_grid, dtype=float)
    survival = np.array([(radii >= r).mean() for r in r_grid])
    stderr = np.sqrt(np.maximum(survival * (1.0 - survival), 1e-12)
                     / replications)
    lo = 10.0 / replications
    mask = (survival >= lo) & (survival <= 0.5)
    if int(mask.sum()) < 2:
        raise InsufficientDataError(
            "fewer than two grid points with survival in the fit window")
    xs = (r_grid[mask] ** (d - 1)) * n
    ys = np.log(survival[mask])
    slope, intercept = np.polyfit(xs, ys, 1)
    pred = slope * xs + intercept
    ss_res = float(np.sum((ys - pred) ** 2))
    ss_tot = float(np.sum((ys - ys.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return TailResult(n, r_grid, survival, stderr, float(slope),
                      float(intercept), r2, radii)


@dataclass(frozen=True)
class MomentResult:
    k: int
    q_list: tuple[int, ...]
    n_grid: tuple[int, ...]
    moments: dict  # (n, q) -> empirical mean of score^q
    flagged: dict  # q -> True when largest-n moment exceeds twice smallest-n

    def moment(self, n: int, q: int) -> float:
        return self.moments[(n, q)]


def moment_experiment(body: Body, k: int, q_list: Sequence[int],
                      n_grid: Sequence[int], replications: int,
                      master_seed: int) -> MomentResult:
    """Empirical q-th moments of the score of the first sample point."""
    if replications < 500:
        raise ValueError("need at least 500 replications")
    if not set(q_list) <= {1, 2, 4}:
        raise ValueError("q values must come from {1, 2, 4}")
    moments: dict = {}
    for ni, n in enumerate(n_grid):
        acc = {q: 0.0 for q in q_list}
        for rep in range(replications):
            stream = Stream(derive_seed(master_seed, MOMENT_TAG, ni, rep))
            pts = sample_surface(body, stream, n)
            h = incremental_hull(pts)
            xi = vertex_score_count(h, k, 0) / (k + 1)
            for q in q_list:
                acc[q] += xi ** q
        for q in q_list:
            moments[(n, q)] = acc[q] / replications
    n_lo, n_hi = min(n_grid), max(n_grid)
    flagged = {q: moments[(n_hi, q)] > 2.0 * moments[(n_lo, q)]
               for q in q_list}
    return MomentResult(k, tuple(q_list), tuple(n_grid), moments, flagged)
