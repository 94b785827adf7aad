"""Smooth convex bodies: balls and axis-aligned ellipsoids.

Both variants have twice continuously differentiable boundaries with positive
curvature, closed-form support functions and normals, exact rolling radii,
and uniform boundary samplers.  Caps, cap surface areas, metric-ball surface
areas, and packings of pairwise disjoint caps support the geometric
experiments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .rng import Stream


class CapacityError(RuntimeError):
    """Requested packing size cannot be met by the bisection grid."""


@dataclass(frozen=True)
class Ball:
    dimension: int
    radius: float = 1.0
    center: tuple[float, ...] = ()

    def __post_init__(self):
        if self.dimension < 2:
            raise ValueError("dimension must be at least 2")
        if not self.radius > 0:
            raise ValueError("radius must be positive")
        c = self.center if self.center else (0.0,) * self.dimension
        if len(c) != self.dimension:
            raise ValueError("center dimension mismatch")
        object.__setattr__(self, "center", tuple(float(x) for x in c))


@dataclass(frozen=True)
class Ellipsoid:
    """Axis-aligned ellipsoid centered at the origin: sum (x_i/a_i)^2 = 1."""

    semi_axes: tuple[float, ...]

    def __post_init__(self):
        axes = tuple(float(a) for a in self.semi_axes)
        if len(axes) < 2:
            raise ValueError("dimension must be at least 2")
        if not all(a > 0 for a in axes):
            raise ValueError("semi-axes must be positive")
        object.__setattr__(self, "semi_axes", axes)

    @property
    def dimension(self) -> int:
        return len(self.semi_axes)


Body = Union[Ball, Ellipsoid]


@dataclass(frozen=True)
class Cap:
    """Boundary cap of height h below the supporting hyperplane at y:
    membership is <x, normal> >= threshold."""

    center: tuple[float, ...]
    normal: tuple[float, ...]
    height: float
    threshold: float


@dataclass(frozen=True)
class BlaschkeRadii:
    r_in: float
    r_out: float


@dataclass(frozen=True)
class AreaEstimate:
    value: float
    stderr: float


def _check_unit(u) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    nrm = float(np.linalg.norm(u))
    if abs(nrm - 1.0) > 1e-12:
        raise ValueError(f"direction must be a unit vector, |u| = {nrm!r}")
    return u


def diameter(body: Body) -> float:
    if isinstance(body, Ball):
        return 2.0 * body.radius
    return 2.0 * max(body.semi_axes)


def support(body: Body, u: Sequence[float]) -> float:
    """Support function: sup over the body of <x, u> for unit u."""
    u = _check_unit(u)
    if isinstance(body, Ball):
        return float(np.dot(body.center, u)) + body.radius
    a = np.asarray(body.semi_axes)
    return float(math.sqrt(np.sum((a * u) ** 2)))


def support_point(body: Body, u: Sequence[float]) -> np.ndarray:
    """The unique boundary point whose outward normal is u."""
    u = _check_unit(u)
    if isinstance(body, Ball):
        return np.asarray(body.center) + body.radius * u
    a = np.asarray(body.semi_axes)
    h = math.sqrt(float(np.sum((a * u) ** 2)))
    return (a * a) * u / h


def boundary_residual(body: Body, x: Sequence[float]) -> float:
    """Defining-equation residual; zero on the boundary."""
    x = np.asarray(x, dtype=float)
    if isinstance(body, Ball):
        return float(np.linalg.norm(x - np.asarray(body.center)) / body.radius - 1.0)
    a = np.asarray(body.semi_axes)
    return float(np.sum((x / a) ** 2) - 1.0)


def _check_on_boundary(body: Body, x, tol: float = 1e-9) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    r = boundary_residual(body, x)
    if abs(r) > tol:
        raise ValueError(f"point is not on the boundary (residual {r:.3e})")
    return x


def boundary_normal(body: Body, x: Sequence[float]) -> np.ndarray:
    """Outward unit normal at a boundary point."""
    x = _check_on_boundary(body, x)
    if isinstance(body, Ball):
        return (x - np.asarray(body.center)) / body.radius
    a = np.asarray(body.semi_axes)
    g = x / (a * a)
    return g / np.linalg.norm(g)


def blaschke_radii(body: Body) -> BlaschkeRadii:
    """Largest inner and smallest outer rolling-ball radii: extreme principal
    curvature radii (a_min^2/a_max and a_max^2/a_min for ellipsoids)."""
    if isinstance(body, Ball):
        return BlaschkeRadii(body.radius, body.radius)
    a_min = min(body.semi_axes)
    a_max = max(body.semi_axes)
    return BlaschkeRadii(a_min * a_min / a_max, a_max * a_max / a_min)


# ---------------------------------------------------------------------------
# Uniform boundary sampling.
# ---------------------------------------------------------------------------

def _unit_vector(stream: Stream, d: int) -> list[float]:
    while True:
        v = [stream.gauss() for _ in range(d)]
        r = math.sqrt(math.fsum(c * c for c in v))
        if r > 1e-8:
            return [c / r for c in v]


def sample_surface(body: Body, stream: Stream, size: int | None = None):
    """Uniform samples from the boundary with respect to surface measure.

    Balls: normalized Gaussian directions scaled to the sphere.  Ellipsoids:
    rejection from the sphere with acceptance weight min(a) * |u / a|, the
    surface-element Jacobian of the sphere-to-ellipsoid map normalized to
    peak one.  Returns a point (size None) or a (size, d) array.
    """
    d = body.dimension
    if size is not None:
        out = np.empty((size, d))
        for i in range(size):
            out[i] = sample_surface(body, stream)
        return out
    if isinstance(body, Ball):
        u = _unit_vector(stream, d)
        c = body.center
        return np.array([c[i] + body.radius * u[i] for i in range(d)])
    axes = body.semi_axes
    a_min = min(axes)
    while True:
        u = _unit_vector(stream, d)
        w = a_min * math.sqrt(math.fsum((u[i] / axes[i]) ** 2 for i in range(d)))
        if stream.uniform() <= w:
            return np.array([axes[i] * u[i] for i in range(d)])


# ---------------------------------------------------------------------------
# Surface areas: closed form for spheres, spherical-product quadrature for
# ellipsoids (integrand prod(a) * |D^-1 u| over the unit sphere).
# ---------------------------------------------------------------------------

def sphere_area(d: int, radius: float = 1.0) -> float:
    """Surface area of the (d-1)-sphere of the given radius in R^d."""
    return 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0) * radius ** (d - 1)


def _sphere_quadrature(d: int, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes (m, d) and weights for integration over the unit sphere S^{d-1},
    built as a product rule in spherical coordinates."""
    if d == 2:
        m = 4 * order
        theta = (np.arange(m) + 0.5) * (2.0 * math.pi / m)
        nodes = np.stack([np.cos(theta), np.sin(theta)], axis=1)
        weights = np.full(m, 2.0 * math.pi / m)
        return nodes, weights
    # polar angle with weight sin(theta)^(d-2) via Gauss-Legendre in cos
    x, w = np.polynomial.legendre.leggauss(order)
    sub_nodes, sub_weights = _sphere_quadrature(d - 1, order)
    sin_t = np.sqrt(1.0 - x * x)
    nodes = np.empty((order * len(sub_nodes), d))
    weights = np.empty(order * len(sub_nodes))
    for i in range(order):
        s = slice(i * len(sub_nodes), (i + 1) * len(sub_nodes))
        nodes[s, 0] = x[i]
        nodes[s, 1:] = sin_t[i] * sub_nodes
        weights[s] = w[i] * sin_t[i] ** (d - 3) * sub_weights
    return nodes, weights


_QUAD_ORDER = {2: 512, 3: 192, 4: 64, 5: 32}


def surface_area(body: Body, order: int | None = None) -> float:
    """Total boundary surface area (exact for balls, deterministic
    quadrature for ellipsoids)."""
    d = body.dimension
    if isinstance(body, Ball):
        return sphere_area(d, body.radius)
    if order is None:
        order = _QUAD_ORDER.get(d, 16)
    nodes, weights = _sphere_quadrature(d, order)
    a = np.asarray(body.semi_axes)
    dens = np.sqrt(np.sum((nodes / a) ** 2, axis=1)) * np.prod(a)
    return float(dens @ weights)


def make_cap(body: Body, y: Sequence[float], h: float) -> Cap:
    """Cap of height h centered at the boundary point y."""
    if not h > 0:
        raise ValueError("cap height must be positive")
    y = _check_on_boundary(body, y)
    u = boundary_normal(body, y)
    thr = support(body, u) - h
    return Cap(tuple(y.tolist()), tuple(u.tolist()), h, thr)


def cap_from_direction(body: Body, u: Sequence[float], h: float) -> Cap:
    """Cap of height h centered at the boundary point with outward normal u."""
    y = support_point(body, u)
    return make_cap(body, y, h)


def cap_contains(body: Body, cap: Cap, x: Sequence[float]) -> bool:
    x = _check_on_boundary(body, x)
    return float(np.dot(x, cap.normal)) >= cap.threshold


def _sphere_cap_area(d: int, radius: float, h: float) -> float:
    """Area of a spherical cap of Euclidean height h on a radius-R sphere,
    by quadrature of the profile integral (relative error far below 1e-10)."""
    h = min(h, 2.0 * radius)
    cos_t = 1.0 - h / radius
    theta = math.acos(max(-1.0, min(1.0, cos_t)))
    if d == 2:
        return 2.0 * radius * theta
    x, w = np.polynomial.legendre.leggauss(192)
    phi = 0.5 * theta * (x + 1.0)
    integral = 0.5 * theta * float(np.sin(phi) ** (d - 2) @ w)
    return sphere_area(d - 1) * radius ** (d - 1) * integral


def cap_area(body: Body, cap: Cap, n_samples: int = 200_000,
             stream: Stream | None = None) -> AreaEstimate:
    """Surface area of a boundary cap.

    Balls: deterministic quadrature, zero reported uncertainty.  Ellipsoids:
    Monte Carlo hit fraction times the total area (itself by deterministic
    quadrature), with a binomial standard error.
    """
    if not cap.height > 0:
        raise ValueError("cap height must be positive")
    d = body.dimension
    if isinstance(body, Ball):
        return AreaEstimate(_sphere_cap_area(d, body.radius, cap.height), 0.0)
    if stream is None:
        stream = Stream(0x5171CA9)
    total = surface_area(body)
    pts = sample_surface(body, stream, n_samples)
    hits = int(np.count_nonzero(pts @ np.asarray(cap.normal) >= cap.threshold))
    p = hits / n_samples
    return AreaEstimate(total * p,
                        total * math.sqrt(max(p * (1.0 - p), 1e-12) / n_samples))


def boundary_ball_area(body: Body, x: Sequence[float], r: float,
                       n_samples: int = 200_000,
                       stream: Stream | None = None) -> AreaEstimate:
    """Surface area of the metric ball B(x, r) intersected with the boundary.

    Spheres reduce exactly to a cap of height r^2 / (2R); ellipsoids use the
    Monte Carlo hit fraction.
    """
    if not r > 0:
        raise ValueError("radius must be positive")
    x = _check_on_boundary(body, x)
    d = body.dimension
    if isinstance(body, Ball):
        if r >= 2.0 * body.radius:
            return AreaEstimate(sphere_area(d, body.radius), 0.0)
        return AreaEstimate(
            _sphere_cap_area(d, body.radius, r * r / (2.0 * body.radius)), 0.0)
    if r >= diameter(body):
        return AreaEstimate(surface_area(body), 0.0)
    if stream is None:
        stream = Stream(0xBA11A9EA)
    total = surface_area(body)
    pts = sample_surface(body, stream, n_samples)
    hits = int(np.count_nonzero(np.linalg.norm(pts - x, axis=1) <= r))
    p = hits / n_samples
    return AreaEstimate(total * p,
                        total * math.sqrt(max(p * (1.0 - p), 1e-12) / n_samples))


# ---------------------------------------------------------------------------
# Pairwise disjoint cap packings.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CapPacking:
    height: float
    centers: np.ndarray  # (m, d) boundary points

    def caps(self, body: Body) -> list[Cap]:
        return [make_cap(body, y, self.height) for y in self.centers]


def _cap_separation(body: Body, h: float) -> float:
    # A cap of height h lies inside the metric ball of radius
    # sqrt(2 r_out h) + h around its center (rolling bound), so centers
    # farther apart than twice that radius give disjoint caps.
    r_out = blaschke_radii(body).r_out
    return 2.0 * (math.sqrt(2.0 * r_out * h) + h)


def _greedy_centers(pool: np.ndarray, sep: float, target: int) -> np.ndarray:
    chosen = [0]
    mind = np.linalg.norm(pool - pool[0], axis=1)
    while len(chosen) < target:
        i = int(np.argmax(mind))
        if mind[i] <= sep:
            break
        chosen.append(i)
        np.minimum(mind, np.linalg.norm(pool - pool[i], axis=1), out=mind)
    return pool[chosen]


def pack_disjoint_caps(body: Body, n: int, stream: Stream,
                       pool_factor: int = 100) -> CapPacking:
    """Common height h and >= n centers whose height-h caps are pairwise
    disjoint.

    Centers come from greedy farthest-point selection over a pool of
    pool_factor * n uniform boundary samples; disjointness is guaranteed by
    the sufficient separation criterion of :func:`_cap_separation`.  The
    height is the largest (within 1% relative) for which the greedy selection
    yields n centers.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    pool = sample_surface(body, stream, pool_factor * n)
    diam = diameter(body)

    def feasible(h: float) -> np.ndarray | None:
        centers = _greedy_centers(pool, _cap_separation(body, h), n)
        return centers if len(centers) >= n else None

    h = diam
    centers = feasible(h)
    while centers is None:
        h *= 0.5
        if h < diam * 2.0 ** -60:
            raise CapacityError(
                f"cannot pack {n} disjoint caps: height underflows the grid")
        centers = feasible(h)
    lo, lo_centers = h, centers
    hi = min(diam, 2.0 * h)
    while hi > lo * 1.01:
        mid = math.sqrt(lo * hi)
        c = feasible(mid)
        if c is not None:
            lo, lo_centers = mid, c
        else:
            hi = mid
    return CapPacking(lo, lo_centers)
