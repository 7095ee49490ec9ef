import math

import numpy as np
import pytest
import shapely

from fracperim.fractals import (OverlapError, build_recursive, check_overlaps, dendrite_spec,
                                exploded_fractal, exploded_lambda, exploded_spec, get_spec,
                                koch_maps, koch_pieces, koch_snowflake, koch_spec, sponge_spec)
from fracperim.geometry.sets import shoelace_area, unit_square


def test_koch_level_zero():
    T = koch_snowflake(0)
    assert T.perimeter == pytest.approx(3.0)
    assert T.area == pytest.approx(math.sqrt(3) / 4)


@pytest.mark.parametrize("k", [1, 2, 3, 4, 5])
def test_koch_area_increments(k):
    a = shoelace_area(koch_snowflake(k).vertices)
    b = shoelace_area(koch_snowflake(k - 1).vertices)
    assert abs(a) - abs(b) == pytest.approx(3 * 4 ** (k - 1) * math.sqrt(3) / 4 * 9.0 ** -k, rel=1e-9)
    assert len(koch_snowflake(k).vertices) == 3 * 4 ** k


def test_koch_pieces_counts_and_sides():
    for k, count in ((1, 3), (2, 12)):
        tri = [t for t, _, _ in koch_pieces(k)]
        assert len(tri) == count
        for p in tri:
            assert p.perimeter == pytest.approx(3 * 3.0 ** -k)


def test_koch_witnesses_in_complement():
    deep = koch_snowflake(6).geom
    for _, (c, r), _ in koch_pieces(3):
        # the open ball may touch the curve at its tip but must not overlap it
        ball = shapely.Point(c).buffer(r, quad_segs=64)
        assert shapely.intersection(ball, deep).area <= 1e-9 * ball.area


def test_koch_spec_matches_pieces():
    tris = [t for t, _, _ in koch_pieces(3)]
    build = build_recursive(koch_spec(), 3)
    level3 = [p for k, _, p in build.pieces if k == 3]
    assert len(tris) == len(level3)
    for t, p in zip(tris, level3):
        assert np.allclose(np.sort(t.vertices, axis=0), np.sort(p.vertices, axis=0), atol=1e-12)


def test_koch_union_is_snowflake():
    from fracperim.fractals import unit_triangle
    from fracperim.geometry.sets import Region
    build = build_recursive(koch_spec(), 4)
    U = Region.union([unit_triangle()] + [p for _, _, p in build.pieces])
    assert U.area == pytest.approx(koch_snowflake(4).area, rel=1e-12)


def test_dendrite_pieces():
    build = build_recursive(dendrite_spec(), 3, check=True)
    assert len(build.pieces) == 13
    assert [sum(1 for k, _, _ in build.pieces if k == j) for j in (1, 2, 3)] == [1, 3, 9]


def test_sponge_piece_areas():
    spec = sponge_spec()
    build = build_recursive(spec, 3, check=True)
    base = spec.T0.area
    for k, _, p in build.pieces:
        assert p.area == pytest.approx(base * spec.lam ** (-2 * k), rel=1e-12)


def test_exploded_examples():
    assert exploded_lambda(2, 0.5, 2) == pytest.approx(2 ** (1 / 1.5))
    B = exploded_fractal(2, 0.5, 2, 3)
    assert len(B) == 7
    lam = exploded_lambda(2, 0.5, 2)
    assert sorted(set(np.round(B.radii, 12))) == sorted(set(np.round([1 / (4 * lam ** k) for k in (1, 2, 3)], 12)))
    assert exploded_fractal(2, 0.5, 2, 6).min_gap() >= 0.5


def test_exploded_spec_checks():
    build_recursive(exploded_spec(), 4, check=True)


@pytest.mark.parametrize("name", ["koch", "sierpinski-dendrite", "sponge", "exploded"])
def test_specs_dimension_valid(name):
    spec = get_spec(name)
    assert spec.dimension_valid
    assert spec.rate(spec.threshold) == pytest.approx(0.0, abs=1e-12)


def test_overlap_detection():
    sq = unit_square()
    with pytest.raises(OverlapError, match=r"\(1,1,1,2\)"):
        check_overlaps([(1, 1, sq), (1, 2, unit_square((0.5, 0.0)))])


def test_unknown_spec():
    with pytest.raises(ValueError):
        get_spec("mandelbrot")


def test_koch_maps_scale():
    for k in (1, 2, 3):
        maps = koch_maps(k)
        assert len(maps) == 3 * 4 ** (k - 1)
        assert all(F.scale == pytest.approx(3.0 ** -k) for F in maps)
