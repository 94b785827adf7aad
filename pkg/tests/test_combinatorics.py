"""Types of (d+2)-vertex polytopes: closed-form counts vs actual hulls."""

import numpy as np
import pytest

from randhull.combinatorics import (TypeLabel, beyond_count, classify_d_plus_2,
                                    region_of, type_f_count)
from randhull.geometry import GeneralPositionError
from randhull.hull import brute_force_hull, f_vector, incremental_hull
from randhull.rng import Stream, derive_seed

S4 = [[0, 0, 0, 0], [1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]]


def test_type_f_count_d4():
    assert [type_f_count(4, 1, k) for k in (1, 2, 3)] == [14, 16, 8]
    assert [type_f_count(4, 2, k) for k in (1, 2, 3)] == [15, 18, 9]


def test_type_f_count_d3_matches_deterministic_identities():
    # five boundary points in dimension 3: (5, 9, 6)
    assert type_f_count(3, 1, 1) == 9
    assert type_f_count(3, 1, 2) == 6


def test_type_f_count_validation():
    with pytest.raises(ValueError):
        type_f_count(4, 3, 1)
    with pytest.raises(ValueError):
        type_f_count(4, 0, 1)
    with pytest.raises(ValueError):
        type_f_count(4, 1, 0)
    with pytest.raises(ValueError):
        type_f_count(4, 1, 4)


@pytest.mark.parametrize("d", [4, 5, 6, 7])
def test_strict_type_ordering(d):
    for k in range(1, d):
        assert type_f_count(d, 1, k) < type_f_count(d, 2, k)


def test_type_label_canonical():
    lbl = TypeLabel(4, 2)
    assert str(lbl) == "T_2^4"
    assert lbl.f_vector() == (6, 15, 18, 9)
    with pytest.raises(ValueError):
        TypeLabel(4, 3)


def test_beyond_count_examples():
    centroid = np.mean(S4, axis=0)
    assert beyond_count(centroid, S4) == 0
    assert beyond_count([2, 0.1, 0.1, 0.1], S4) == 1
    assert beyond_count([-1, -1, 0.1, 0.1], S4) == 2


def test_beyond_count_on_span_not_beyond():
    # x on the span of facet {e1..e4} but outside it: not counted as beyond
    tri = [[0, 0], [1, 0], [0, 1]]
    assert beyond_count([0.5, 0.5], tri) == 0  # on the diagonal span
    assert beyond_count([2.0, -1.0], tri) == 1  # on span of x-axis, beyond diag


def test_beyond_count_degenerate_simplex():
    with pytest.raises(GeneralPositionError):
        beyond_count([1, 1], [[0, 0], [1, 0], [2, 0]])


def test_region_of_cases():
    assert region_of(np.mean(S4, axis=0), S4) is None
    assert region_of([2, 0.1, 0.1, 0.1], S4) == (1, False)
    assert region_of([-1, -1, 0.1, 0.1], S4) == (2, False)
    j, boundary = region_of([2.0, -1.0, -1.0, 1.0], S4)[0], None
    assert 1 <= j <= 3
    on = region_of([-0.5, 0.2, 0.2, 0.0], S4)
    assert on[1] is True  # exactly on the x4 = 0 facet span
    # corner wedge beyond all facets incident to a vertex: no labeled region
    tri = [[0.0, 0.0], [1.0, 0.0], [0.5, 1.0]]
    with pytest.raises(ValueError):
        region_of([2.0, -0.5], tri)


def test_region_partition_for_convex_position_points():
    d = 4
    stream = Stream(derive_seed(97, d))
    hits = 0
    while hits < 300:
        x = [stream.gauss() * 1.5 for _ in range(d)]
        try:
            r = region_of(x, S4)
        except ValueError:
            continue
        if r is None:
            continue
        j, boundary = r
        assert not boundary
        assert 1 <= j <= d - 1
        hits += 1


def test_classify_witnesses():
    pts1 = np.array(S4 + [[2, 0.1, 0.1, 0.1]], float)
    lbl = classify_d_plus_2(pts1)
    assert (lbl.d, lbl.j) == (4, 1)
    assert f_vector(incremental_hull(pts1)) == (6, 14, 16, 8)
    assert f_vector(brute_force_hull(pts1)) == (6, 14, 16, 8)

    pts2 = np.array(S4 + [[-1, -1, 0.1, 0.1]], float)
    lbl2 = classify_d_plus_2(pts2)
    assert (lbl2.d, lbl2.j) == (4, 2)
    assert f_vector(incremental_hull(pts2)) == (6, 15, 18, 9)


def test_classify_folds_high_beyond_counts():
    # apex beyond three facets of the 4-simplex: type folds to T_1^4
    x = [-1.0, -1.0, -1.0, 0.2]
    assert beyond_count(x, S4) == 3
    pts = np.array(S4 + [x], float)
    lbl = classify_d_plus_2(pts)
    assert (lbl.d, lbl.j) == (4, 1)
    assert f_vector(incremental_hull(pts)) == (6, 14, 16, 8)


def test_classify_rejects_interior_apex():
    pts = np.array(S4 + [np.mean(S4, axis=0).tolist()], float)
    with pytest.raises(GeneralPositionError):
        classify_d_plus_2(pts)


def test_classify_rejects_wrong_count():
    with pytest.raises(ValueError):
        classify_d_plus_2(np.array(S4, float))


def test_classify_rotates_designation_when_last_simplex_degenerate():
    # the last d+1 points contain a dependent set only in the default
    # designation; rotation must still find the right label
    pts = np.array([[2, 0.1, 0.1, 0.1]] + S4, float)  # apex listed first
    lbl = classify_d_plus_2(pts)
    assert (lbl.d, lbl.j) == (4, 1)


def _random_valid_config(d, stream):
    while True:
        simplex = np.array([[stream.gauss() for _ in range(d)]
                            for _ in range(d + 1)])
        x = np.array([stream.gauss() * 1.4 for _ in range(d)])
        try:
            j = beyond_count(x, simplex)
        except GeneralPositionError:
            continue
        if 1 <= j <= d - 1:
            return np.vstack([simplex, x]), j


@pytest.mark.parametrize("d", [4, 5, 6, 7])
def test_formula_matches_hull_f_vector(d):
    stream = Stream(derive_seed(103, d))
    for _ in range(15):
        pts, j_raw = _random_valid_config(d, stream)
        lbl = classify_d_plus_2(pts)
        assert lbl.j == min(j_raw, d - j_raw)
        fv = f_vector(incremental_hull(pts))
        assert fv[0] == d + 2
        for k in range(1, d):
            assert fv[k] == type_f_count(d, lbl.j, k)


@pytest.mark.parametrize("d", [4, 5])
def test_designation_invariance(d):
    stream = Stream(derive_seed(107, d))
    for _ in range(10):
        pts, _ = _random_valid_config(d, stream)
        labels = set()
        for rot in range(d + 2):
            rolled = np.roll(pts, rot, axis=0)
            labels.add(classify_d_plus_2(rolled))
        assert len(labels) == 1
