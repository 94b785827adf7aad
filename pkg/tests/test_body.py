"""Convex body models: support/normal oracles, samplers, caps, packings."""

import math

import numpy as np
import pytest

from randhull.body import (AreaEstimate, Ball, BlaschkeRadii, CapacityError,
                           Ellipsoid, blaschke_radii, boundary_ball_area,
                           boundary_normal, cap_area, cap_contains,
                           cap_from_direction, diameter, make_cap,
                           pack_disjoint_caps, sample_surface, sphere_area,
                           support, support_point, surface_area)
from randhull.rng import Stream, derive_seed


def test_support_ball():
    b = Ball(3, 1.0)
    for u in np.eye(3):
        assert support(b, u) == pytest.approx(1.0)
    shifted = Ball(3, 2.0, (1.0, 0.0, 0.0))
    assert support(shifted, (1, 0, 0)) == pytest.approx(3.0)
    with pytest.raises(ValueError):
        support(b, (1, 1, 0))


def test_support_ellipsoid_axis():
    e = Ellipsoid((2, 1, 1, 1))
    assert support(e, (1, 0, 0, 0)) == pytest.approx(2.0)
    u = np.array([1, 1, 0, 0]) / math.sqrt(2)
    assert support(e, u) == pytest.approx(math.sqrt(2.5))


def test_support_matches_numeric_maximization():
    # oracle: maximize <x, u> over a dense surface sample plus local refinement
    e = Ellipsoid((2, 1, 1, 1))
    stream = Stream(derive_seed(31, 0))
    u = np.array([0.3, -0.5, 0.7, 0.2])
    u /= np.linalg.norm(u)
    pts = sample_surface(e, stream, 20_000)
    best = float((pts @ u).max())
    h = support(e, u)
    assert best <= h + 1e-9
    # the closed-form touching point achieves the supremum
    y = support_point(e, u)
    assert float(y @ u) == pytest.approx(h, abs=1e-12)
    assert h - best < 2e-3


def test_boundary_normal_ball_and_axis():
    assert boundary_normal(Ball(3), (1, 0, 0)) == pytest.approx((1, 0, 0))
    e = Ellipsoid((2, 1))
    assert boundary_normal(e, (2, 0)) == pytest.approx((1, 0))


def test_boundary_normal_matches_finite_differences():
    e = Ellipsoid((2, 1))
    x = np.array([math.sqrt(2.0), 1.0 / math.sqrt(2.0)])
    n = boundary_normal(e, x)
    assert n == pytest.approx((0.4472135954999579, 0.8944271909999159), abs=1e-12)
    # oracle: gradient of sum (x_i/a_i)^2 by central differences
    a = np.array(e.semi_axes)

    def implicit(p):
        return float(np.sum((p / a) ** 2))

    eps = 1e-6
    grad = np.array([
        (implicit(x + eps * dv) - implicit(x - eps * dv)) / (2 * eps)
        for dv in np.eye(2)])
    grad /= np.linalg.norm(grad)
    assert n == pytest.approx(grad, abs=1e-8)


def test_boundary_normal_requires_boundary_point():
    with pytest.raises(ValueError):
        boundary_normal(Ball(3), (0.5, 0, 0))


def test_sample_surface_on_boundary():
    for body in (Ball(3, 2.0, (1.0, -1.0, 0.5)), Ellipsoid((2, 1, 1))):
        pts = sample_surface(body, Stream(11), 500)
        if isinstance(body, Ball):
            r = np.linalg.norm(pts - np.array(body.center), axis=1)
            assert np.abs(r - body.radius).max() < 1e-12
        else:
            a = np.array(body.semi_axes)
            res = np.abs(np.sum((pts / a) ** 2, axis=1) - 1.0)
            assert res.max() < 1e-12


def test_sphere_band_fraction():
    # mass of {x_3 >= 0.5} on the unit 2-sphere is h / (2R) = 1/4
    n = 1_000_000
    pts = sample_surface(Ball(3), Stream(derive_seed(2, 7)), n)
    frac = float((pts[:, 2] >= 0.5).mean())
    sigma = math.sqrt(0.25 * 0.75 / n)
    assert abs(frac - 0.25) < 3.0 * sigma


def test_ellipsoid_sampler_chi_square_against_quadrature():
    import scipy.stats

    e = Ellipsoid((2, 1, 1))
    a = np.array(e.semi_axes)
    n = 200_000
    pts = sample_surface(e, Stream(derive_seed(3, 5)), n)
    u = pts / a
    z_edges = np.linspace(-1, 1, 9)
    phi_edges = np.linspace(-math.pi, math.pi, 9)
    zi = np.clip(np.digitize(u[:, 0], z_edges) - 1, 0, 7)
    pi_ = np.clip(np.digitize(np.arctan2(u[:, 2], u[:, 1]), phi_edges) - 1, 0, 7)
    observed = np.bincount(zi * 8 + pi_, minlength=64).astype(float)

    # oracle: deterministic quadrature of the surface element per bin
    from randhull.body import _sphere_quadrature

    nodes, weights = _sphere_quadrature(3, 400)
    dens = np.sqrt(np.sum((nodes / a) ** 2, axis=1)) * np.prod(a) * weights
    zq = np.clip(np.digitize(nodes[:, 0], z_edges) - 1, 0, 7)
    pq = np.clip(np.digitize(np.arctan2(nodes[:, 2], nodes[:, 1]), phi_edges) - 1, 0, 7)
    expected = np.bincount(zq * 8 + pq, weights=dens, minlength=64)
    expected *= n / expected.sum()
    chi2 = float(((observed - expected) ** 2 / expected).sum())
    assert chi2 < scipy.stats.chi2.ppf(0.999, 63)


def test_surface_area_against_prolate_closed_form():
    # prolate spheroid axes (2, 1, 1)
    a, b = 2.0, 1.0
    ecc = math.sqrt(1.0 - (b / a) ** 2)
    closed = 2.0 * math.pi * b * b * (1.0 + (a / (b * ecc)) * math.asin(ecc))
    quad = surface_area(Ellipsoid((2, 1, 1)))
    assert quad == pytest.approx(closed, rel=1e-9)
    assert surface_area(Ball(4, 2.0)) == pytest.approx(sphere_area(4, 2.0))


def test_cap_membership():
    b = Ball(3)
    cap = cap_from_direction(b, (0, 0, 1), 1.0)
    assert cap.threshold == pytest.approx(0.0, abs=1e-15)
    assert cap_contains(b, cap, (0, 0, 1))
    x_hi = np.array([math.sqrt(1 - 0.04), 0, 0.2])
    x_lo = np.array([math.sqrt(1 - 0.04), 0, -0.2])
    assert cap_contains(b, cap, x_hi)
    assert not cap_contains(b, cap, x_lo)
    full = cap_from_direction(b, (0, 0, 1), 2.0)
    pts = sample_surface(b, Stream(5), 200)
    assert all(cap_contains(b, full, p) for p in pts)


def test_cap_area_hemisphere_and_arc():
    est = cap_area(Ball(3), cap_from_direction(Ball(3), (0, 0, 1), 1.0))
    assert est.stderr == 0.0
    assert est.value == pytest.approx(2.0 * math.pi, rel=1e-12)
    arc = cap_area(Ball(2), cap_from_direction(Ball(2), (1, 0), 0.5))
    assert arc.value == pytest.approx(2.0 * math.pi / 3.0, rel=1e-12)
    whole = cap_area(Ball(3), cap_from_direction(Ball(3), (0, 1, 0), 2.0))
    assert whole.value == pytest.approx(4.0 * math.pi, rel=1e-12)


def test_cap_area_matches_exact_linear_form_d3():
    # on the unit 2-sphere the cap area is exactly 2 pi R h
    stream = Stream(derive_seed(17, 1))
    for _ in range(20):
        u = np.array([stream.gauss() for _ in range(3)])
        u /= np.linalg.norm(u)
        h = 0.05 + 1.9 * stream.uniform()
        est = cap_area(Ball(3), cap_from_direction(Ball(3), u, h))
        assert est.value == pytest.approx(2.0 * math.pi * h, rel=1e-9)


def test_ellipsoid_cap_area_monte_carlo():
    e = Ellipsoid((2, 1, 1))
    cap = cap_from_direction(e, (0, 0, 1), 0.25)
    est = cap_area(e, cap, n_samples=100_000, stream=Stream(8))
    assert est.stderr > 0
    # sphere-like cross-check: the same cap on the inscribed unit sphere has
    # smaller area; the estimate must be positive and below the total
    assert 0.0 < est.value < surface_area(e)


def test_boundary_ball_area_sphere_reduction():
    est = boundary_ball_area(Ball(3), (0, 0, 1), 1.0)
    assert est.value == pytest.approx(math.pi, rel=1e-12)
    whole = boundary_ball_area(Ball(3), (0, 0, 1), 2.5)
    assert whole.value == pytest.approx(4.0 * math.pi, rel=1e-12)
    with pytest.raises(ValueError):
        boundary_ball_area(Ball(3), (0, 0, 1), -1.0)


def test_boundary_ball_area_scaling_band():
    vals = []
    for r in (0.05, 0.1, 0.2, 0.4):
        est = boundary_ball_area(Ball(3), (0, 0, 1), r)
        vals.append(est.value / r ** 2)
    assert max(vals) / min(vals) < 1.1


def test_blaschke_radii_values():
    assert blaschke_radii(Ball(3)) == BlaschkeRadii(1.0, 1.0)
    assert blaschke_radii(Ball(5, 3.0)) == BlaschkeRadii(3.0, 3.0)
    r = blaschke_radii(Ellipsoid((2, 1, 1)))
    assert (r.r_in, r.r_out) == pytest.approx((0.5, 4.0))


def test_blaschke_radii_match_circle_fit_oracle():
    # osculating-circle radius through three nearby points of the principal
    # ellipse sections at the axis endpoints
    def circum_radius(p1, p2, p3):
        a = np.linalg.norm(p2 - p3)
        b = np.linalg.norm(p1 - p3)
        c = np.linalg.norm(p1 - p2)
        area = 0.5 * abs((p2[0] - p1[0]) * (p3[1] - p1[1])
                         - (p3[0] - p1[0]) * (p2[1] - p1[1]))
        return a * b * c / (4.0 * area)

    h = 1e-4
    ell = lambda t: np.array([2.0 * math.cos(t), math.sin(t)])
    r_min = circum_radius(ell(-h), ell(0.0), ell(h))
    ell_side = lambda t: np.array([2.0 * math.sin(t), math.cos(t)])
    r_max = circum_radius(ell_side(-h), ell_side(0.0), ell_side(h))
    got = blaschke_radii(Ellipsoid((2, 1, 1)))
    assert got.r_in == pytest.approx(r_min, rel=1e-6)
    assert got.r_out == pytest.approx(r_max, rel=1e-6)


def test_rolling_balls_contain_and_exclude_samples():
    e = Ellipsoid((2, 1, 1))
    r = blaschke_radii(e)
    stream = Stream(derive_seed(23, 9))
    pts = sample_surface(e, stream, 200)
    others = sample_surface(e, stream, 50)
    for x in pts:
        u = boundary_normal(e, x)
        c_in = x - r.r_in * u
        c_out = x - r.r_out * u
        d_in = np.linalg.norm(others - c_in, axis=1)
        d_out = np.linalg.norm(others - c_out, axis=1)
        assert (d_in >= r.r_in - 1e-9).all()
        assert (d_out <= r.r_out + 1e-9).all()


def test_support_hyperplane_property():
    for body in (Ball(4, 1.5, (0.2, 0, 0, -0.1)), Ellipsoid((1.5, 1, 1, 1))):
        stream = Stream(derive_seed(29, 2))
        pts = sample_surface(body, stream, 300)
        for _ in range(20):
            u = np.array([stream.gauss() for _ in range(4)])
            u /= np.linalg.norm(u)
            assert (pts @ u).max() <= support(body, u) + 1e-9


def test_normal_is_support_maximizer():
    body = Ellipsoid((2, 1, 1))
    pts = sample_surface(body, Stream(41), 100)
    for x in pts:
        u = boundary_normal(body, x)
        assert float(x @ u) == pytest.approx(support(body, u), abs=1e-9)


def test_cap_area_height_scaling_band():
    e = Ellipsoid((2, 1, 1))
    stream = Stream(derive_seed(47, 3))
    vals = []
    for k in range(2, 8):
        h = 2.0 ** -k
        cap = cap_from_direction(e, (0.6, 0.8, 0.0), h)
        est = cap_area(e, cap, n_samples=400_000, stream=stream)
        vals.append(est.value / h)
    assert max(vals) / min(vals) < 4.0


def test_sampler_cap_frequencies_match_areas():
    body = Ball(3, 1.0)
    stream = Stream(derive_seed(53, 4))
    n = 50_000
    pts = sample_surface(body, stream, n)
    total = surface_area(body)
    for _ in range(20):
        u = np.array([stream.gauss() for _ in range(3)])
        u /= np.linalg.norm(u)
        h = 0.1 + 1.5 * stream.uniform()
        cap = cap_from_direction(body, u, h)
        p = cap_area(body, cap).value / total
        freq = float((pts @ u >= cap.threshold).mean())
        sigma = math.sqrt(p * (1 - p) / n)
        assert abs(freq - p) < 4.0 * sigma


def test_pack_single_cap_is_large():
    pack = pack_disjoint_caps(Ball(3), 1, Stream(61))
    assert pack.height >= diameter(Ball(3)) / 2.0
    assert len(pack.centers) >= 1


def test_pack_disjoint_caps_audit():
    body = Ball(3)
    pack = pack_disjoint_caps(body, 12, Stream(derive_seed(67, 5)))
    caps = pack.caps(body)
    assert len(caps) >= 12
    pts = sample_surface(body, Stream(71), 100_000)
    normals = np.array([c.normal for c in caps])
    thresholds = np.array([c.threshold for c in caps])
    membership = (pts @ normals.T) >= thresholds
    assert int(membership.sum(axis=1).max()) <= 1


def test_pack_capacity_error_unreachable_sizes():
    with pytest.raises(ValueError):
        pack_disjoint_caps(Ball(3), 0, Stream(3))


def test_ellipsoid_pack_heights_shrink():
    body = Ellipsoid((2, 1, 1))
    h_small = pack_disjoint_caps(body, 4, Stream(81)).height
    h_large = pack_disjoint_caps(body, 40, Stream(83)).height
    assert h_large < h_small
