import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fracperim.geometry.celltree import (BOUNDARY, EXTERIOR, INTERIOR, classify_boundary,
                                         tubular_volume, tubular_volume_1d)
from fracperim.geometry.distance import level_set_area, level_set_region, signed_distance_grid
from fracperim.geometry.io import dump_json, load_set, set_from_json
from fracperim.geometry.maps import SimilarityMap, apply_map
from fracperim.geometry.sets import (BallSet, HalfPlane, IntervalUnion, PolygonRegion, Polyline,
                                     Region, interval_ops, regular_polygon, shoelace_area, unit_square)


# ---------------------------------------------------------------------------
# sets

def test_interval_union_validation():
    with pytest.raises(ValueError):
        IntervalUnion([(0, 1), (0.5, 2)])
    with pytest.raises(ValueError):
        IntervalUnion([])
    with pytest.raises(ValueError):
        IntervalUnion([(1, 1)])
    U = IntervalUnion([(2, 3), (0, 1), (1, 1.5)])
    assert U.intervals[0] == (0.0, 1.0)
    assert list(U.endpoints()) == [0.0, 1.5, 2.0, 3.0]
    assert U.measure == 2.5
    assert U.complement()[0] == (-math.inf, 0.0)


def test_interval_ops():
    inter, diff = interval_ops([(0, 2), (3, 5)], [(1, 4)])
    assert inter == [(1, 2), (3, 4)]
    assert diff == [(0, 1), (4, 5)]


def test_degenerate_polygon_rejected():
    with pytest.raises(ValueError):
        PolygonRegion([[0, 0], [1, 0], [2, 0]])


def test_polygon_orientation_and_area():
    P = PolygonRegion([[0, 0], [0, 1], [1, 1], [1, 0]])       # clockwise input
    assert P.area == pytest.approx(1.0)
    assert P.perimeter == pytest.approx(4.0)
    assert P.contains([[0.5, 0.5], [2, 2]]).tolist() == [True, False]


def test_ball_set():
    B = BallSet([[0, 0], [3, 0]], [1.0, 0.5])
    assert B.min_gap() == pytest.approx(1.5)
    assert B.measure == pytest.approx(math.pi * 1.25)
    assert B.to_region(256).area == pytest.approx(B.measure, rel=1e-3)


# ---------------------------------------------------------------------------
# similarity maps

def test_identity_map():
    S = unit_square()
    T = apply_map(SimilarityMap.identity(), S)
    assert np.allclose(T.vertices, S.vertices)


def test_third_scaling():
    T = apply_map(SimilarityMap(1 / 3, 0.0, (0.0, 0.0)), unit_square((0.5, 0.5)))
    assert T.area == pytest.approx(1 / 9)
    lo, hi = T.bbox()
    assert np.allclose(hi - lo, 1 / 3)


def test_rotated_triangle_shoelace():
    tri = PolygonRegion([[0, 0], [1, 0], [0, 1]])
    F = SimilarityMap(1 / 3, math.pi / 2, (1.0, 0.0))
    T = apply_map(F, tri)
    # shoelace oracle on the transformed vertex list
    V = np.array([F(v) for v in tri.vertices])
    assert abs(shoelace_area(V)) == pytest.approx(1 / 18)
    assert T.area == pytest.approx(1 / 18)
    assert np.allclose(np.sort(T.vertices, axis=0), np.sort(V, axis=0))


@given(st.floats(0.1, 3), st.floats(-3.2, 3.2), st.floats(-5, 5), st.floats(-5, 5),
       st.floats(0.1, 3), st.floats(-3.2, 3.2))
@settings(max_examples=50, deadline=None)
def test_map_composition(s1, a1, tx, ty, s2, a2):
    F = SimilarityMap(s1, a1, (tx, ty))
    G = SimilarityMap(s2, a2, (ty, tx))
    x = np.array([[0.3, -0.7], [1.1, 2.0]])
    assert np.allclose((F @ G)(x), F(G(x)), atol=1e-9)


# ---------------------------------------------------------------------------
# cell classifier

def test_half_plane_row():
    tree = classify_boundary(HalfPlane((0.0, 1.0), 0.0), 5, root_box=((-1, -1), (1, 1)))
    lo, hi = tree.leaves(BOUNDARY)
    assert len(lo) == 32
    assert np.all(lo[:, 1] == 0.0)
    # the tiling is exact and every other leaf is settled
    assert math.isclose(tree.volumes.sum(), 4.0)
    assert tree.measure(INTERIOR) + tree.measure(BOUNDARY) == pytest.approx(2.0 + 2.0 / 16)


def test_disk_boundary_count():
    disk = regular_polygon((0, 0), 1.0, 512)
    tree = classify_boundary(disk, 6)
    h = tree.cell_size()[0]
    n = tree.count(BOUNDARY)
    est = 2 * math.pi / h
    assert est / 2 <= n <= 2 * est


def test_koch_boundary_growth():
    from fracperim.fractals import koch_snowflake
    E = koch_snowflake(6)
    counts = [classify_boundary(E, d).count(BOUNDARY) for d in range(3, 8)]
    slope = np.polyfit(np.arange(3, 8) * math.log(2), np.log(counts), 1)[0]
    assert slope == pytest.approx(math.log(4) / math.log(3), abs=0.1)


def test_tree_depth_limit():
    with pytest.raises(ValueError, match="exceeds configured limit"):
        classify_boundary(unit_square(), 20)


def test_interior_measure_brackets_area():
    E = regular_polygon((0.1, 0.2), 0.8, 64)
    tree = classify_boundary(E, 8)
    assert tree.measure(INTERIOR) <= E.area <= tree.measure(INTERIOR) + tree.measure(BOUNDARY)
    assert tree.count(EXTERIOR) > 0


# ---------------------------------------------------------------------------
# tubular neighbourhoods

def test_segment_stadium():
    seg = Polyline([[0, 0], [1, 0]])
    tree = classify_boundary(seg, 10, root_box=((-0.5, -0.75), (1.5, 1.25)))
    v = tubular_volume(tree, 0.1)
    ref = 2 * 0.1 + math.pi * 0.01
    assert v.lo <= ref <= v.hi
    assert v.value == pytest.approx(ref, rel=0.05)


def test_annulus():
    circ = regular_polygon((0, 0), 1.0, 1024)
    tree = classify_boundary(circ, 10)
    v = tubular_volume(tree, 0.1)
    assert v.value == pytest.approx(0.4 * math.pi, rel=0.05)


def test_tube_bracket_shrinks():
    sq = unit_square()
    widths = []
    for d in (6, 8, 10):
        v = tubular_volume(classify_boundary(sq, d), 0.1)
        assert v.lo <= v.hi
        widths.append(v.error)
    assert widths[0] > widths[1] > widths[2]


def test_tube_1d_and_empty():
    assert tubular_volume_1d([0.0, 1.0], 0.1) == pytest.approx(0.4)
    assert tubular_volume_1d([], 0.1) == 0.0


# ---------------------------------------------------------------------------
# signed distance and level sets

def test_signed_distance_nodes():
    disk = regular_polygon((0, 0), 1.0, 256)
    h = 0.05
    f = signed_distance_grid(disk, h, bbox=((-2.5, -2.5), (2.5, 2.5)))
    xs, ys = f.coords()
    i0, j0 = np.argmin(abs(xs)), np.argmin(abs(ys))
    assert f.values[j0, i0] == pytest.approx(-1.0, abs=2 * h)
    i2 = np.argmin(abs(xs - 2.0))
    assert f.values[j0, i2] == pytest.approx(1.0, abs=2 * h)
    sq = unit_square((0.5, 0.5))
    g = signed_distance_grid(sq, 0.05)
    xs, ys = g.coords()
    i, j = np.argmin(abs(xs - 0.5)), np.argmin(abs(ys - 0.5))
    assert g.values[j, i] == pytest.approx(-0.5, abs=1e-12)


def test_insufficient_box():
    with pytest.raises(ValueError, match="insufficient bounding box"):
        signed_distance_grid(unit_square(), 0.1, bbox=((-0.6, -0.6), (0.6, 0.6)), level_range=0.25)


def _pixel_area(sq, r, h=0.004):
    # brute-force oracle: fraction of pixel centres with signed distance < r
    from shapely import points
    xs = np.arange(-0.5 + h / 2, 1.5, h)
    X, Y = np.meshgrid(xs, xs)
    pts = points(np.stack([X.ravel(), Y.ravel()], 1))
    d = np.asarray([sq.geom.exterior.distance(p) for p in pts])
    inside = sq.contains(np.stack([X.ravel(), Y.ravel()], 1))
    sd = np.where(inside, -d, d)
    return float(np.sum(sd < r)) * h * h


@pytest.mark.parametrize("r, ref", [(0.25, 1 + 4 * 0.25 + math.pi * 0.0625), (-0.25, 0.25), (0.0, 1.0)])
def test_level_set_areas(r, ref):
    sq = unit_square((0.5, 0.5))
    f = signed_distance_grid(sq, 0.01, level_range=0.3)
    lo, hi = level_set_area(f, r)
    assert lo <= ref <= hi
    assert 0.5 * (lo + hi) == pytest.approx(ref, rel=0.03)


def test_level_set_pixel_oracle():
    sq = unit_square((0.5, 0.5))
    f = signed_distance_grid(sq, 0.01, level_range=0.3)
    lo, hi = level_set_area(f, 0.25)
    assert lo <= _pixel_area(sq, 0.25, 0.01) <= hi + 0.01


def test_level_out_of_range():
    f = signed_distance_grid(unit_square(), 0.05, level_range=0.2)
    with pytest.raises(ValueError):
        level_set_region(f, 5.0)


# ---------------------------------------------------------------------------
# JSON round trips

@pytest.mark.parametrize("doc", [
    {"kind": "intervals", "items": [[0, 1], [2, 3]]},
    {"kind": "polygon", "vertices": [[0, 0], [1, 0], [0, 1]]},
    {"kind": "balls", "dim": 2, "items": [{"c": [0, 0], "r": 0.5}, {"c": [2, 0], "r": 0.25}]},
])
def test_roundtrip(doc, tmp_path):
    obj = set_from_json(doc)
    p = tmp_path / "x.json"
    text = dump_json(obj.to_json(), p)
    assert text.endswith("\n") and "\r" not in text
    again = load_set(p)
    assert json.loads(dump_json(again.to_json())) == json.loads(text)


def test_recursive_and_generator_json():
    from fracperim.perimeter import AppendixASet
    E = set_from_json({"kind": "recursive", "name": "koch", "level": 2})
    assert len(E.vertices) == 48
    A = set_from_json(AppendixASet(0.5).to_json())
    assert isinstance(A, AppendixASet) and A.a == 0.5


def test_unknown_kind():
    with pytest.raises(ValueError):
        set_from_json({"kind": "blob"})


def test_multipolygon_region():
    R = set_from_json({"kind": "multipolygon", "items": [
        {"vertices": [[0, 0], [1, 0], [1, 1], [0, 1]]},
        {"vertices": [[2, 0], [3, 0], [3, 1], [2, 1]], "holes": [[[2.25, 0.25], [2.75, 0.25], [2.75, 0.75], [2.25, 0.75]]]},
    ]})
    assert isinstance(R, Region)
    assert R.area == pytest.approx(1.75)
