"""Incremental beneath-beyond convex hulls in general dimension.

The construction inserts points in index order, starting from a simplex on
the first d+1 affinely independent points.  Each unprocessed point holds one
facet it lies beyond; the region visible from the inserted point is found by
graph search from that facet, torn out, and re-roofed with new facets over
the horizon ridges.  All side decisions are exact (float filter with integer
fallback, see :mod:`randhull.geometry`); any exact degeneracy encountered is
an error, never repaired.

Two engines produce identical complexes: a JIT-compiled filter-only kernel
(:mod:`randhull._fast`) that handles the common general-position case, and a
pure-Python engine with exact fallbacks that takes over whenever the filter
refuses to commit a sign.

``brute_force_hull`` enumerates all d-subsets and keeps those with every
other point strictly on one side; it exists as an independent oracle for the
incremental construction and is only intended for small inputs (n <= 25).
"""

from __future__ import annotations

import itertools
import math
from bisect import bisect_left
from typing import Sequence

import numpy as np

from . import _fast
from .geometry import (
    GeneralPositionError,
    Hyperplane,
    affine_forms,
    eval_sign,
    exact_affine_rank_full,
    exact_orientation,
    orientation,
)


class Facet:
    """A (d-1)-simplex of the hull boundary.

    ``vertices`` are strictly increasing point indices; ``neighbors[i]`` is
    the facet across the ridge opposite ``vertices[i]``; ``plane`` is the
    outward unit-normal hyperplane.  The affine functional ``coef`` (x-part
    then constant) is positive beyond the facet and carries the certified
    error vector ``err``; ``flip`` relates it to the orientation of the
    sorted vertex rows so exact fallbacks stay consistent.
    """

    __slots__ = ("verts", "coef", "err", "flip", "nbrs", "conflicts",
                 "alive", "visit", "seval_stamp", "seval_sign", "_plane")

    def __init__(self, verts: tuple[int, ...], coef: list[float],
                 err: list[float], flip: int):
        self.verts = verts
        self.coef = coef
        self.err = err
        self.flip = flip
        self.nbrs: list = [None] * len(verts)
        self.conflicts: list[int] = []
        self.alive = True
        self.visit = -1
        self.seval_stamp = -1
        self.seval_sign = 0
        self._plane = None

    @property
    def vertices(self) -> tuple[int, ...]:
        return self.verts

    @property
    def neighbors(self) -> list["Facet"]:
        return list(self.nbrs)

    @property
    def plane(self) -> Hyperplane:
        if self._plane is None:
            nrm = math.sqrt(math.fsum(c * c for c in self.coef[:-1]))
            self._plane = Hyperplane(tuple(c / nrm for c in self.coef[:-1]),
                                     -self.coef[-1] / nrm)
        return self._plane

    def side_sign(self, coords: Sequence[tuple[float, ...]], x) -> int:
        """Exact sign of the facet functional at x (+1 beyond, 0 on)."""
        s = eval_sign(self.coef, self.err, x)
        if s is None:
            rows = [coords[u] for u in self.verts]
            rows.append(tuple(x))
            s = self.flip * exact_orientation(rows)
        return s

    def __repr__(self):
        return f"Facet{self.verts}"


class HullComplex:
    """Boundary complex of a full-dimensional simplicial convex hull.

    Backed by flat arrays (``facet_vertices``, ``facet_neighbors``,
    ``facet_coef``, ``facet_err``, ``facet_flip``); ``facets`` materializes
    linked :class:`Facet` objects on first use.
    """

    __slots__ = ("dimension", "points", "facet_vertices", "facet_neighbors",
                 "facet_coef", "facet_err", "facet_flip",
                 "_facets", "_hull_vertices")

    def __init__(self, dimension, points, facet_vertices, facet_neighbors,
                 facet_coef, facet_err, facet_flip):
        self.dimension = dimension
        self.points = points
        self.facet_vertices = facet_vertices
        self.facet_neighbors = facet_neighbors
        self.facet_coef = facet_coef
        self.facet_err = facet_err
        self.facet_flip = facet_flip
        self._facets = None
        self._hull_vertices = None

    @property
    def hull_vertices(self) -> frozenset[int]:
        if self._hull_vertices is None:
            self._hull_vertices = frozenset(np.unique(self.facet_vertices).tolist())
        return self._hull_vertices

    @property
    def facets(self) -> list[Facet]:
        if self._facets is None:
            verts = self.facet_vertices.tolist()
            coef = self.facet_coef.tolist()
            err = self.facet_err.tolist()
            flips = self.facet_flip.tolist()
            out = [Facet(tuple(v), c, e, int(fl))
                   for v, c, e, fl in zip(verts, coef, err, flips)]
            for f, row in zip(out, self.facet_neighbors.tolist()):
                f.nbrs = [out[j] for j in row]
            self._facets = out
        return self._facets

    def f_vector(self) -> tuple[int, ...]:
        return f_vector(self)

    def k_faces(self, k: int) -> set[tuple[int, ...]]:
        return enumerate_k_faces(self, k)

    def facet_vertex_sets(self) -> set[tuple[int, ...]]:
        return {tuple(v) for v in self.facet_vertices.tolist()}

    def facet_planes(self, rows=None) -> tuple[np.ndarray, np.ndarray]:
        """Unit outward normals and offsets for the given facet rows
        (all facets when rows is None)."""
        coef = self.facet_coef if rows is None else self.facet_coef[rows]
        nrm = np.linalg.norm(coef[:, :-1], axis=1)
        return coef[:, :-1] / nrm[:, None], -coef[:, -1] / nrm

    def __repr__(self):
        return (f"HullComplex(d={self.dimension}, n={len(self.points)}, "
                f"facets={len(self.facet_vertices)})")


def _as_points(points, dimension=None) -> np.ndarray:
    pts = np.ascontiguousarray(np.asarray(points, dtype=float))
    if pts.ndim != 2:
        raise ValueError("points must be a 2-d array-like (n rows of d coordinates)")
    n, d = pts.shape
    if dimension is not None and dimension != d:
        raise ValueError(f"points have dimension {d}, expected {dimension}")
    if d < 2:
        raise ValueError("dimension must be at least 2")
    if not np.isfinite(pts).all():
        raise ValueError("points contain non-finite coordinates")
    return pts


def _check_distinct(coords: list[tuple[float, ...]]):
    seen: dict = {}
    for i, t in enumerate(coords):
        j = seen.get(t)
        if j is not None:
            raise GeneralPositionError(f"points {j} and {i} coincide")
        seen[t] = i


def _initial_simplex(coords: list[tuple[float, ...]], d: int) -> list[int]:
    """First d+1 affinely independent points in index order (exact)."""
    first = coords[:d + 1]
    if orientation(first) != 0:
        return list(range(d + 1))
    chosen = [0]
    for i in range(1, len(coords)):
        if len(chosen) == d + 1:
            break
        rows = [coords[j] for j in chosen]
        rows.append(coords[i])
        if exact_affine_rank_full(rows):
            chosen.append(i)
    if len(chosen) < d + 1:
        raise GeneralPositionError(
            "all points lie on a common hyperplane (not full-dimensional)")
    return chosen


class _Builder:
    """Exact-arithmetic reference engine."""

    def __init__(self, pts: np.ndarray):
        self.pts = pts
        self.n, self.d = pts.shape
        self.coords = [tuple(row) for row in pts.tolist()]
        self.facets: list[Facet] = []
        self.conflict_facet: list = [None] * self.n

    def _exact_side(self, f: Facet, xt) -> int:
        rows = [self.coords[u] for u in f.verts]
        rows.append(xt)
        return f.flip * exact_orientation(rows)

    def _cached_side(self, f: Facet, pid: int, xt) -> int:
        if f.seval_stamp == pid:
            return f.seval_sign
        s = eval_sign(f.coef, f.err, xt)
        if s is None:
            s = self._exact_side(f, xt)
        f.seval_stamp = pid
        f.seval_sign = s
        return s

    def _make_facets(self, vert_lists: list[tuple[int, ...]],
                     opposite: list[int]):
        """Facets for the given vertex tuples, oriented so that the matching
        opposite point lies beneath."""
        mats = self.pts[np.array(vert_lists, dtype=np.intp)]
        coef, err = affine_forms(mats)
        coef_l = coef.tolist()
        err_l = err.tolist()
        flips = np.empty(len(vert_lists))
        out = []
        for t, nv in enumerate(vert_lists):
            w = self.coords[opposite[t]]
            s = eval_sign(coef_l[t], err_l[t], w)
            if s is None:
                rows = [self.coords[u] for u in nv]
                rows.append(w)
                s = exact_orientation(rows)
            if s == 0:
                raise GeneralPositionError(
                    f"points {nv + (opposite[t],)} lie on a common hyperplane")
            flips[t] = -s
            row = coef_l[t] if s < 0 else [-c for c in coef_l[t]]
            out.append(Facet(nv, row, err_l[t], -s))
        coef *= flips[:, None]
        return out, coef, err

    def _distribute(self, cands: list[int], facets: list[Facet],
                    coef: np.ndarray, err: np.ndarray):
        d = self.d
        carr = np.asarray(cands, dtype=np.intp)
        x = self.pts[carr]
        s = x @ coef[:, :d].T
        s += coef[:, d]
        e = np.abs(x) @ err[:, :d].T
        e += err[:, d]
        beyond = s > e
        beneath = s < -e
        any_beyond = beyond.any(axis=1).tolist()
        all_beneath = beneath.all(axis=1).tolist()
        first = beyond.argmax(axis=1).tolist()
        cf = self.conflict_facet
        for r, q in enumerate(cands):
            if any_beyond[r]:
                f = facets[first[r]]
                f.conflicts.append(q)
                cf[q] = f
            elif all_beneath[r]:
                cf[q] = None
            else:
                self._distribute_slow(q, facets, beneath[r])

    def _distribute_slow(self, q: int, facets: list[Facet], beneath_row):
        xt = self.coords[q]
        for c, f in enumerate(facets):
            if beneath_row[c]:
                continue
            sgn = self._exact_side(f, xt)
            if sgn > 0:
                f.conflicts.append(q)
                self.conflict_facet[q] = f
                return
            if sgn == 0:
                raise GeneralPositionError(
                    f"point {q} lies on the affine span of facet {f.verts}")
        self.conflict_facet[q] = None

    def _insert(self, pid: int):
        f0 = self.conflict_facet[pid]
        if f0 is None:
            return
        d = self.d
        xt = self.coords[pid]
        f0.visit = pid
        visible = [f0]
        stack = [f0]
        horizon = []
        while stack:
            v = stack.pop()
            nbrs = v.nbrs
            for i in range(d):
                nb = nbrs[i]
                if nb.visit == pid:
                    continue
                sgn = self._cached_side(nb, pid, xt)
                if sgn > 0:
                    nb.visit = pid
                    visible.append(nb)
                    stack.append(nb)
                elif sgn < 0:
                    horizon.append((v, i, nb))
                else:
                    raise GeneralPositionError(
                        f"point {pid} lies on the affine span of facet {nb.verts}")
        cands = []
        for v in visible:
            v.alive = False
            for q in v.conflicts:
                if q != pid:
                    cands.append(q)
            v.conflicts = []
        vert_lists = []
        opposite = []
        for v, i, b in horizon:
            ridge = v.verts[:i] + v.verts[i + 1:]
            pos = bisect_left(ridge, pid)
            vert_lists.append(ridge[:pos] + (pid,) + ridge[pos:])
            opposite.append(v.verts[i])
        newfacets, coef, err = self._make_facets(vert_lists, opposite)
        ridge_map: dict = {}
        for t, (v, i, b) in enumerate(horizon):
            nf = newfacets[t]
            nv = nf.verts
            ppos = nv.index(pid)
            nf.nbrs[ppos] = b
            b.nbrs[b.nbrs.index(v)] = nf
            for l in range(d):
                if l == ppos:
                    continue
                key = nv[:l] + nv[l + 1:]
                other = ridge_map.pop(key, None)
                if other is None:
                    ridge_map[key] = (nf, l)
                else:
                    of, ol = other
                    nf.nbrs[l] = of
                    of.nbrs[ol] = nf
        if ridge_map:
            raise AssertionError("internal error: unmatched horizon ridges")
        self.facets.extend(newfacets)
        if cands:
            self._distribute(cands, newfacets, coef, err)

    def build_arrays(self, simplex: list[int]):
        d = self.d
        vert_lists = []
        opposite = []
        for l in range(d + 1):
            vert_lists.append(tuple(simplex[:l] + simplex[l + 1:]))
            opposite.append(simplex[l])
        facets, coef, err = self._make_facets(vert_lists, opposite)
        for a in range(d + 1):
            fa = facets[a]
            for b in range(d + 1):
                if a != b:
                    fa.nbrs[fa.verts.index(simplex[b])] = facets[b]
        self.facets.extend(facets)
        in_simplex = set(simplex)
        rest = [i for i in range(self.n) if i not in in_simplex]
        if rest:
            self._distribute(rest, facets, coef, err)
        for pid in rest:
            self._insert(pid)
        alive = [f for f in self.facets if f.alive]
        rowof = {id(f): i for i, f in enumerate(alive)}
        verts = np.array([f.verts for f in alive], dtype=np.int64)
        nbrs = np.array([[rowof[id(nb)] for nb in f.nbrs] for f in alive],
                        dtype=np.int64)
        coef_arr = np.array([f.coef for f in alive])
        err_arr = np.array([f.err for f in alive])
        flip_arr = np.array([f.flip for f in alive], dtype=np.int8)
        return verts, nbrs, coef_arr, err_arr, flip_arr


def incremental_hull(points, dimension: int | None = None,
                     engine: str = "auto") -> HullComplex:
    """Convex hull of the points by incremental beneath-beyond insertion.

    Requires n >= d+1 pairwise distinct points.  Exact degeneracies (d+1
    points on a common hyperplane met during construction, coincident
    points, inputs that are not full-dimensional) raise
    :class:`GeneralPositionError` naming the offending indices.

    ``engine`` selects "fast" (JIT filter-only kernel), "exact" (pure
    Python with integer fallbacks), or "auto" (fast first, exact whenever
    the fast kernel declines to commit).  Both engines produce the same
    complex.
    """
    pts = _as_points(points, dimension)
    n, d = pts.shape
    if n < d + 1:
        raise GeneralPositionError(f"need at least d+1 = {d + 1} points, got {n}")
    coords = [tuple(row) for row in pts.tolist()]
    _check_distinct(coords)
    simplex = _initial_simplex(coords, d)
    if engine not in ("auto", "fast", "exact"):
        raise ValueError(f"unknown engine {engine!r}")
    arrays = None
    if engine in ("auto", "fast"):
        arrays = _fast.build_arrays(pts, simplex)
        if arrays is None and engine == "fast":
            raise RuntimeError("fast hull engine unavailable or declined; "
                               "use engine='auto' or 'exact'")
    if arrays is None:
        builder = _Builder(pts)
        arrays = builder.build_arrays(simplex)
    return HullComplex(d, pts, *arrays)


def brute_force_hull(points, dimension: int | None = None) -> HullComplex:
    """Oracle hull: a d-subset is a facet iff it is affinely independent and
    every other point lies strictly on one side (exact tests throughout).

    Exhaustive over all C(n, d) subsets; intended for n <= 25.
    """
    pts = _as_points(points, dimension)
    n, d = pts.shape
    if n < d + 1:
        raise GeneralPositionError(f"need at least d+1 = {d + 1} points, got {n}")
    coords = [tuple(row) for row in pts.tolist()]
    _check_distinct(coords)
    subsets = list(itertools.combinations(range(n), d))
    mats = pts[np.array(subsets, dtype=np.intp)]
    coef, err = affine_forms(mats)
    svals = coef[:, :d] @ pts.T + coef[:, d][:, None]
    evals = err[:, :d] @ np.abs(pts).T + err[:, d][:, None]
    member = np.zeros((len(subsets), n), dtype=bool)
    rows_ix = np.repeat(np.arange(len(subsets)), d)
    member[rows_ix, np.array(subsets, dtype=np.intp).ravel()] = True
    pos_c = (svals > evals) & ~member
    neg_c = (svals < -evals) & ~member
    uncertain = ~(pos_c | neg_c) & ~member
    found: list[tuple] = []
    coef_l_all = coef.tolist()
    err_l_all = err.tolist()
    for si, subset in enumerate(subsets):
        pos = int(pos_c[si].sum())
        neg = int(neg_c[si].sum())
        zero = 0
        if pos and neg:
            continue
        if uncertain[si].any():
            for q in np.nonzero(uncertain[si])[0]:
                rows = [coords[u] for u in subset]
                rows.append(coords[int(q)])
                s = exact_orientation(rows)
                if s > 0:
                    pos += 1
                elif s < 0:
                    neg += 1
                else:
                    zero += 1
            if pos and neg:
                continue
        if zero:
            if pos or neg:
                raise GeneralPositionError(
                    f"a point lies on the affine span of {subset}")
            continue  # subset affinely dependent: functional identically zero
        coef_l = coef_l_all[si]
        if pos:
            coef_l = [-c for c in coef_l]
            flip = -1
        else:
            flip = 1
        found.append((subset, coef_l, err_l_all[si], flip))
    if not found:
        raise GeneralPositionError("no facets: input is not full-dimensional")
    ridge_map: dict = {}
    nbrs = np.full((len(found), d), -1, dtype=np.int64)
    for fi, (subset, _, _, _) in enumerate(found):
        for i in range(d):
            ridge = subset[:i] + subset[i + 1:]
            ridge_map.setdefault(ridge, []).append((fi, i))
    for ridge, incident in ridge_map.items():
        if len(incident) != 2:
            raise GeneralPositionError(
                f"ridge {ridge} lies in {len(incident)} facets (degenerate input)")
        (fa, ia), (fb, ib) = incident
        nbrs[fa, ia] = fb
        nbrs[fb, ib] = fa
    verts = np.array([f[0] for f in found], dtype=np.int64)
    coef_arr = np.array([f[1] for f in found])
    err_arr = np.array([f[2] for f in found])
    flip_arr = np.array([f[3] for f in found], dtype=np.int8)
    return HullComplex(d, pts, verts, nbrs, coef_arr, err_arr, flip_arr)


# ---------------------------------------------------------------------------
# Face enumeration and f-vector identities.
# ---------------------------------------------------------------------------

def enumerate_k_faces(h: HullComplex, k: int) -> set[tuple[int, ...]]:
    """All k-faces of a simplicial hull as sorted (k+1)-tuples of indices."""
    d = h.dimension
    if not 0 <= k <= d - 1:
        raise ValueError(f"k must be in 0..{d - 1}, got {k}")
    faces: set[tuple[int, ...]] = set()
    for row in h.facet_vertices.tolist():
        faces.update(itertools.combinations(row, k + 1))
    return faces


def _count_unique_rows(sub: np.ndarray) -> int:
    w = sub.shape[1]
    if sub.size == 0:
        return 0
    bits = int(sub.max()).bit_length() + 1
    if bits * w <= 63:
        code = sub[:, 0].astype(np.int64)
        for c in range(1, w):
            code = (code << bits) | sub[:, c]
        return int(np.unique(code).size)
    return int(np.unique(sub, axis=0).shape[0])


def f_vector(h: HullComplex) -> tuple[int, ...]:
    """(f_0, ..., f_{d-1}) of the hull; facet count taken directly, interior
    dimensions counted by deduplicating vertex tuples drawn from facets."""
    d = h.dimension
    verts_arr = h.facet_vertices
    counts = [0] * d
    counts[0] = int(np.unique(verts_arr).size)
    counts[d - 1] = verts_arr.shape[0]
    for k in range(1, d - 1):
        combos = list(itertools.combinations(range(d), k + 1))
        sub = verts_arr[:, combos].reshape(-1, k + 1)
        counts[k] = _count_unique_rows(sub)
    return tuple(counts)


def euler_check(f: Sequence[int], d: int) -> bool:
    """Exact Euler relation sum (-1)^i f_i = 1 - (-1)^d."""
    if len(f) != d:
        raise ValueError(f"f-vector must have length d = {d}")
    total = sum((f[i] if i % 2 == 0 else -f[i]) for i in range(d))
    return total == 1 - (-1) ** d


def dehn_sommerville_check(f: Sequence[int], d: int) -> bool:
    """Exact Dehn-Sommerville identities for simplicial d-polytopes:
    sum_{i=k}^{d-1} (-1)^i C(i+1, k+1) f_i = (-1)^(d-1) f_k for every k."""
    if len(f) != d:
        raise ValueError(f"f-vector must have length d = {d}")
    for k in range(d):
        lhs = sum(((-1) ** i) * math.comb(i + 1, k + 1) * f[i]
                  for i in range(k, d))
        if lhs != ((-1) ** (d - 1)) * f[k]:
            return False
    return True


def validate_complex(h: HullComplex, exact: bool = False):
    """Structural checks: strictly increasing facet vertices, mutually
    consistent neighbors, every ridge in exactly two facets.  With
    ``exact=True`` additionally verifies (exactly) that every hull vertex is
    beneath or on every facet plane, and strictly beneath when not a member.
    """
    d = h.dimension
    ridge_count: dict = {}
    for f in h.facets:
        if len(f.verts) != d or any(a >= b for a, b in zip(f.verts, f.verts[1:])):
            raise AssertionError(f"facet vertices not strictly increasing: {f.verts}")
        for i in range(d):
            nb = f.nbrs[i]
            if nb is None:
                raise AssertionError(f"facet {f.verts} has missing neighbor at slot {i}")
            ridge = f.verts[:i] + f.verts[i + 1:]
            j = nb.nbrs.index(f)
            if nb.verts[:j] + nb.verts[j + 1:] != ridge:
                raise AssertionError(
                    f"inconsistent adjacency between {f.verts} and {nb.verts}")
            ridge_count[ridge] = ridge_count.get(ridge, 0) + 1
    for ridge, c in ridge_count.items():
        if c != 2:
            raise AssertionError(f"ridge {ridge} lies in {c} facets")
    if exact:
        coords = [tuple(row) for row in h.points.tolist()]
        hv = sorted(h.hull_vertices)
        for f in h.facets:
            members = set(f.verts)
            for v in hv:
                if v in members:
                    continue
                if f.side_sign(coords, coords[v]) >= 0:
                    raise AssertionError(
                        f"hull vertex {v} is not strictly beneath facet {f.verts}")


def facet_dump_lines(h: HullComplex) -> list[str]:
    """Canonical facet dump: ``facet v_1 .. v_d nx_1 .. nx_d t`` per line,
    sorted by vertex tuple.

    Plane coefficients are recomputed through one fixed evaluation path and
    oriented by the stored exact flip, so the dump does not depend on which
    engine built the hull.
    """
    order = np.lexsort(h.facet_vertices.T[::-1])
    verts = h.facet_vertices[order]
    coef, _ = affine_forms(h.points[verts])
    coef *= h.facet_flip[order, None]
    nrm = np.linalg.norm(coef[:, :-1], axis=1)
    normals = coef[:, :-1] / nrm[:, None]
    offsets = -coef[:, -1] / nrm
    lines = []
    for row, nvec, t in zip(verts.tolist(), normals.tolist(), offsets.tolist()):
        parts = ["facet"] + [str(v) for v in row]
        parts += [format(c, ".17g") for c in nvec]
        parts.append(format(t, ".17g"))
        lines.append(" ".join(parts))
    return lines
