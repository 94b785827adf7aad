"""Exact-sign geometric predicates and hyperplane primitives.

Points are length-d sequences of finite binary doubles.  Every combinatorial
decision (orientation sign, beyond/on/beneath classification) is exact with
respect to those double values: a floating evaluation with a certified forward
error bound decides the common case, and an integer determinant over the
operands' dyadic representations settles anything the filter cannot.  Exact
zeros are reported as zeros, never perturbed.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Sequence

import numpy as np

# Unit roundoff of IEEE binary64.
_U = 2.0 ** -53

# Relative slack multiplied onto every certified bound; absorbs the rounding
# of the bound computation itself.
_SLACK = 1.0 + 2.0 ** -30


class GeneralPositionError(ValueError):
    """Raised when an exact degeneracy (points on a common hyperplane,
    affinely dependent defining sets, ...) is encountered."""


class Side(Enum):
    BEYOND = "beyond"
    ON = "on"
    BENEATH = "beneath"


@dataclass(frozen=True)
class Hyperplane:
    """H(u, t) = {x : <x, u> = t} with unit normal u; the beyond halfspace is
    {x : <x, u> > t}."""

    normal: tuple[float, ...]
    offset: float

    def __post_init__(self):
        nrm = math.sqrt(math.fsum(c * c for c in self.normal))
        if not (abs(nrm - 1.0) <= 1e-12):
            raise ValueError(f"normal is not unit length: |u| = {nrm!r}")
        if not all(math.isfinite(c) for c in self.normal) or not math.isfinite(self.offset):
            raise ValueError("hyperplane coefficients must be finite")

    def signed_height(self, x: Sequence[float]) -> float:
        return math.fsum(c * xi for c, xi in zip(self.normal, x)) - self.offset


def _check_point(p, d: int) -> tuple[float, ...]:
    t = tuple(float(c) for c in p)
    if len(t) != d:
        raise ValueError(f"point has dimension {len(t)}, expected {d}")
    if not all(math.isfinite(c) for c in t):
        raise ValueError(f"point has non-finite coordinates: {t}")
    return t


# ---------------------------------------------------------------------------
# Exact integer determinant sign.
#
# Binary doubles are dyadic rationals: scaling each matrix column by the
# largest denominator appearing in it turns the matrix into integers while
# multiplying the determinant by a positive factor, so the sign is preserved.
# ---------------------------------------------------------------------------


def _scaled_int_matrix(rows: Sequence[Sequence[float]], augment: bool) -> list[list[int]]:
    cols = list(zip(*rows))
    int_cols = []
    for col in cols:
        ratios = [float(v).as_integer_ratio() for v in col]
        scale = max(r[1] for r in ratios)  # denominators are powers of two
        int_cols.append([num * (scale // den) for num, den in ratios])
    if augment:
        int_cols.append([1] * len(rows))
    return [list(r) for r in zip(*int_cols)]


def _bareiss_sign(m: list[list[int]]) -> int:
    """Sign of det(m) for an integer matrix, by fraction-free elimination."""
    n = len(m)
    sign = 1
    prev = 1
    for k in range(n - 1):
        piv = next((i for i in range(k, n) if m[i][k] != 0), None)
        if piv is None:
            return 0
        if piv != k:
            m[k], m[piv] = m[piv], m[k]
            sign = -sign
        pivot = m[k][k]
        for i in range(k + 1, n):
            row_i = m[i]
            row_k = m[k]
            f = row_i[k]
            for j in range(k + 1, n):
                row_i[j] = (row_i[j] * pivot - f * row_k[j]) // prev
            row_i[k] = 0
        prev = pivot
    v = m[n - 1][n - 1]
    return (v > 0) - (v < 0)


def exact_orientation(rows: Sequence[Sequence[float]]) -> int:
    """Exact sign of det of the rows augmented with a column of ones."""
    return _bareiss_sign(_scaled_int_matrix(rows, augment=True))


def exact_affine_rank_full(rows: Sequence[Sequence[float]]) -> bool:
    """True iff the given m points are affinely independent (exact)."""
    m = _scaled_int_matrix(rows, augment=True)
    nrow = len(m)
    ncol = len(m[0])
    rank = 0
    prev = 1
    r = 0
    for c in range(ncol):
        piv = next((i for i in range(r, nrow) if m[i][c] != 0), None)
        if piv is None:
            continue
        if piv != r:
            m[r], m[piv] = m[piv], m[r]
        pivot = m[r][c]
        for i in range(r + 1, nrow):
            f = m[i][c]
            for j in range(c, ncol):
                m[i][j] = (m[i][j] * pivot - f * m[r][j]) // prev
        prev = pivot
        rank += 1
        r += 1
        if r == nrow:
            break
    return rank == nrow


# ---------------------------------------------------------------------------
# Floating filter: batched determinants with a certified error bound.
#
# Determinants are evaluated by the Leibniz sum (small m) or first-row
# expansion (larger m) together with the same expression on absolute values.
# A classical forward analysis bounds the rounding error of any such
# evaluation by gamma_k * perm(|A|) with k bounded by the operation count;
# the coefficient 4*m! used here over-covers every evaluation order as well
# as the rounding of the bound itself.
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _leibniz_tables(m: int):
    perms = list(itertools.permutations(range(m)))
    signs = np.empty(len(perms))
    cols = np.array(perms, dtype=np.intp)
    for t, p in enumerate(perms):
        inv = sum(1 for i in range(m) for j in range(i + 1, m) if p[i] > p[j])
        signs[t] = -1.0 if inv & 1 else 1.0
    rows = np.broadcast_to(np.arange(m, dtype=np.intp), cols.shape)
    return rows, cols, signs


def _err_coeff(m: int) -> float:
    return 4.0 * math.factorial(m) * _U * _SLACK


def det_batch(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Determinants and certified absolute error bounds for a (..., m, m)
    stack of matrices with exact double entries.

    Large stacks of m >= 5 matrices are processed in slices so the m!-term
    expansion stays cache-resident.
    """
    m = a.shape[-1]
    lead = a.shape[:-2]
    flat = a.reshape(-1, m, m)
    b = flat.shape[0]
    if m >= 5 and b > 512:
        det = np.empty(b)
        perm = np.empty(b)
        for i in range(0, b, 256):
            det[i:i + 256], perm[i:i + 256] = _det_perm(flat[i:i + 256])
        return det.reshape(lead), _err_coeff(m) * perm.reshape(lead)
    det, perm = _det_perm(a)
    return det, _err_coeff(m) * perm


def _det_perm(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    m = a.shape[-1]
    if m == 1:
        v = a[..., 0, 0]
        return v, np.abs(v)
    if m == 2:
        t0 = a[..., 0, 0] * a[..., 1, 1]
        t1 = a[..., 0, 1] * a[..., 1, 0]
        return t0 - t1, np.abs(t0) + np.abs(t1)
    if m <= 5:
        rows, cols, signs = _leibniz_tables(m)
        gathered = a[..., rows, cols]  # (..., m!, m)
        terms = gathered.prod(axis=-1)
        absterms = np.abs(gathered).prod(axis=-1)
        return terms @ signs, absterms.sum(axis=-1)
    # First-row expansion for larger matrices (test scales only).
    det = None
    perm = None
    keep = np.arange(1, m)
    for j in range(m):
        cols = np.concatenate([np.arange(j), np.arange(j + 1, m)])
        sub_det, sub_perm = _det_perm(a[..., keep[:, None], cols[None, :]])
        term = a[..., 0, j] * sub_det
        absterm = np.abs(a[..., 0, j]) * sub_perm
        if j % 2:
            term = -term
        det = term if det is None else det + term
        perm = absterm if perm is None else perm + absterm
    return det, perm


def orientation(simplex_points: Sequence[Sequence[float]]) -> int:
    """Exact sign of the (d+1)x(d+1) determinant of the points augmented
    with ones: +1, 0 or -1."""
    pts = [tuple(float(c) for c in p) for p in simplex_points]
    d = len(pts[0])
    if len(pts) != d + 1:
        raise ValueError(f"orientation needs d+1 points in dimension d, got {len(pts)} points of dimension {d}")
    for p in pts:
        _check_point(p, d)
    a = np.empty((d + 1, d + 1))
    a[:, :d] = pts
    a[:, d] = 1.0
    det, err = det_batch(a)
    det = float(det)
    err = float(err)
    if det > err:
        return 1
    if -det > err:
        return -1
    return exact_orientation(pts)


# ---------------------------------------------------------------------------
# Affine facet functionals.
#
# For facet points q_1..q_d the value s(x) = det[(q_1,1); ..; (q_d,1); (x,1)]
# is affine in x.  Expanding along the last row expresses its coefficients as
# the signed maximal minors of the d x (d+1) matrix [Q | 1], whose entries are
# exact doubles, so each coefficient carries a certified bound.  Evaluating
# x-coefficients against |x| plus the bound of the constant term then gives a
# certified bound for s(x) itself.
# ---------------------------------------------------------------------------

def affine_forms(point_mats: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Facet functionals for a (F, d, d) stack of facet point matrices.

    Returns (coef, err), both (F, d+1): s_f(x) = coef[f, :d] @ x + coef[f, d],
    certified via |s_hat - s| <= err[f, :d] @ |x| + err[f, d].
    """
    f, d, d2 = point_mats.shape
    if d != d2:
        raise ValueError("facet point matrices must be d x d")
    b = np.empty((f, d, d + 1))
    b[:, :, :d] = point_mats
    b[:, :, d] = 1.0
    minors = np.empty((f, d + 1, d, d))
    for j in range(d + 1):
        cols = [c for c in range(d + 1) if c != j]
        minors[:, j] = b[:, :, cols]
    det, err = det_batch(minors.reshape(f * (d + 1), d, d))
    det = det.reshape(f, d + 1)
    err = err.reshape(f, d + 1)
    signs = np.array([1.0 if (d + j) % 2 == 0 else -1.0 for j in range(d + 1)])
    coef = det * signs
    # Extra term covering the rounding of the affine evaluation itself.
    err = (err + (d + 2) * _U * np.abs(coef)) * _SLACK
    return coef, err


def eval_sign(coef: Sequence[float], err: Sequence[float], x: Sequence[float]):
    """Committed sign of the facet functional at x, or None if uncertain."""
    s = coef[-1]
    e = err[-1]
    for c, b, xi in zip(coef, err, x):
        s += c * xi
        e += b * (xi if xi >= 0.0 else -xi)
    if s > e:
        return 1
    if -s > e:
        return -1
    return None


class SupportingPlane:
    """Oriented affine span of d affinely independent points in R^d.

    The orientation is fixed so the interior reference lies strictly beneath.
    Side classification of query points is exact.
    """

    __slots__ = ("points", "coef", "err", "flip")

    def __init__(self, facet_points: Sequence[Sequence[float]], interior_reference: Sequence[float]):
        pts = [tuple(float(c) for c in p) for p in facet_points]
        d = len(pts[0])
        if len(pts) != d:
            raise ValueError(f"a facet in dimension {d} needs {d} points, got {len(pts)}")
        for p in pts:
            _check_point(p, d)
        ref = _check_point(interior_reference, d)
        coef, err = affine_forms(np.asarray(pts, dtype=float)[None, :, :])
        self.points = tuple(pts)
        coef_l = coef[0].tolist()
        err_l = err[0].tolist()
        s = eval_sign(coef_l, err_l, ref)
        if s is None:
            s = exact_orientation(list(pts) + [ref])
        if s == 0:
            raise GeneralPositionError(
                "degenerate facet or reference on its affine span")
        self.flip = -s
        if self.flip < 0:
            coef_l = [-c for c in coef_l]
        self.coef = coef_l
        self.err = err_l

    def side_of(self, x: Sequence[float]) -> Side:
        xt = _check_point(x, len(self.points[0]))
        s = eval_sign(self.coef, self.err, xt)
        if s is None:
            s = self.flip * exact_orientation(list(self.points) + [xt])
        if s > 0:
            return Side.BEYOND
        if s < 0:
            return Side.BENEATH
        return Side.ON

    @property
    def hyperplane(self) -> Hyperplane:
        c = self.coef
        nrm = math.sqrt(math.fsum(v * v for v in c[:-1]))
        if nrm == 0.0:
            raise GeneralPositionError("degenerate facet: zero normal")
        return Hyperplane(tuple(v / nrm for v in c[:-1]), -c[-1] / nrm)


def facet_hyperplane(facet_points: Sequence[Sequence[float]],
                     interior_reference: Sequence[float]) -> Hyperplane:
    """Hyperplane through the facet points, oriented away from the reference."""
    return SupportingPlane(facet_points, interior_reference).hyperplane


def side_of(plane: SupportingPlane, x: Sequence[float]) -> Side:
    """Exact beyond/on/beneath classification of x against the plane."""
    return plane.side_of(x)
