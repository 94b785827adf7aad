"""Combinatorial types of d-polytopes with d+2 vertices.

Such a polytope is the hull of a d-simplex S and an extra point x; its type
is determined by how many facets of S the point x lies beyond, folded to
j = min(count, d - count).  The face counts of each type have a closed
binomial form, checked against actual hulls in the tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .geometry import GeneralPositionError, Side, SupportingPlane
from .hull import incremental_hull


@dataclass(frozen=True)
class TypeLabel:
    """Canonical type of a d-polytope with d+2 vertices: 1 <= j <= d//2."""

    d: int
    j: int

    def __post_init__(self):
        if self.d < 2:
            raise ValueError("dimension must be at least 2")
        if not 1 <= self.j <= self.d // 2:
            raise ValueError(f"type index must be in 1..{self.d // 2}, got {self.j}")

    def __str__(self):
        return f"T_{self.j}^{self.d}"

    def f_vector(self) -> tuple[int, ...]:
        return (self.d + 2,) + tuple(
            type_f_count(self.d, self.j, k) for k in range(1, self.d))


def type_f_count(d: int, j: int, k: int) -> int:
    """Number of k-faces of the type-j polytope with d+2 vertices:
    C(d+2, d-k+1) - C(j+1, d-k+1) - C(d-j+1, d-k+1), with C(a, b) = 0 for
    a < b (which encodes the k-range conditions)."""
    if d < 2:
        raise ValueError("dimension must be at least 2")
    if not 1 <= j <= d // 2:
        raise ValueError(f"type index must be in 1..{d // 2}, got {j}")
    if not 1 <= k <= d - 1:
        raise ValueError(f"face dimension must be in 1..{d - 1}, got {k}")
    m = d - k + 1
    return math.comb(d + 2, m) - math.comb(j + 1, m) - math.comb(d - j + 1, m)


def _simplex_planes(simplex: Sequence[Sequence[float]]) -> list[SupportingPlane]:
    pts = [tuple(float(c) for c in p) for p in simplex]
    d = len(pts[0])
    if len(pts) != d + 1:
        raise ValueError(f"a d-simplex needs d+1 points, got {len(pts)}")
    planes = []
    for l in range(d + 1):
        facet = pts[:l] + pts[l + 1:]
        planes.append(SupportingPlane(facet, pts[l]))
    return planes


def beyond_count(x: Sequence[float], simplex: Sequence[Sequence[float]]) -> int:
    """Number of facets of the simplex that x lies strictly beyond (exact);
    points on a facet span are not beyond."""
    planes = _simplex_planes(simplex)
    return sum(1 for pl in planes if pl.side_of(x) is Side.BEYOND)


def region_of(x: Sequence[float],
              simplex: Sequence[Sequence[float]]) -> Optional[tuple[int, bool]]:
    """Open-region index of x relative to the simplex.

    Returns (j, on_boundary) with j in 1..d-1 when x lies beyond j facets,
    None when x is inside the simplex (beyond none).  The flag marks points
    exactly on some facet span, which belong to no open region.  Points
    beyond all d+1-1 ... beyond d facets fall outside the labeled regions
    (they swallow a simplex vertex) and raise ValueError.
    """
    planes = _simplex_planes(simplex)
    d = len(planes) - 1
    sides = [pl.side_of(x) for pl in planes]
    j = sum(1 for s in sides if s is Side.BEYOND)
    boundary = any(s is Side.ON for s in sides)
    if j == 0:
        return None
    if j >= d:
        raise ValueError(
            f"point is beyond {j} facets: outside the labeled regions 1..{d - 1}")
    return j, boundary


def classify_d_plus_2(points) -> TypeLabel:
    """Combinatorial type of the polytope spanned by exactly d+2 points.

    The last point is designated the apex and the first d+1 the simplex;
    if that simplex is affinely dependent the designation rotates backwards
    until an independent one is found.  Errors: hull with fewer than d+2
    vertices, apex on a facet span, apex beyond d facets, or no valid
    designation.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2:
        raise ValueError("points must be a 2-d array")
    n, d = pts.shape
    if n != d + 2:
        raise ValueError(f"need exactly d+2 = {d + 2} points, got {n}")
    h = incremental_hull(pts)
    if len(h.hull_vertices) != d + 2:
        raise GeneralPositionError(
            f"hull has {len(h.hull_vertices)} vertices, not {d + 2}: "
            "the extra point is not in convex position")
    rows = [tuple(r) for r in pts.tolist()]
    last_err = None
    for rot in range(d + 2):
        apex_idx = (d + 1 - rot) % (d + 2)
        simplex = [rows[i] for i in range(d + 2) if i != apex_idx]
        try:
            j = beyond_count(rows[apex_idx], simplex)
        except GeneralPositionError as exc:
            last_err = exc
            continue
        if j == 0 or j == d:
            raise GeneralPositionError(
                f"apex designation {apex_idx} is beyond {j} facets: "
                "inconsistent with a (d+2)-vertex hull")
        return TypeLabel(d, min(j, d - j))
    raise GeneralPositionError(
        f"no affinely independent simplex designation found: {last_err}")
