import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from fracperim.estimate import Estimate, esum
from fracperim.geometry.celltree import classify_boundary
from fracperim.geometry.sets import PolygonRegion, box, regular_polygon, unit_square
from fracperim.kernel.interaction import interaction_2d, self_perimeter
from fracperim.kernel.interval import interaction_1d, interval_interaction
from fracperim.kernel.params import KernelParams, QuadraturePolicy, check_s
from fracperim.kernel.treecode import cell_interaction, treecode_interaction

TIGHT = QuadraturePolicy(target_rel_error=1e-11)


def dblquad_oracle(a, b, c, d, s):
    val, _ = integrate.dblquad(lambda y, x: abs(x - y) ** (-1 - s), a, b, c, d,
                               epsabs=0, epsrel=1e-12)
    return val


# ---------------------------------------------------------------------------
# estimates and parameters

def test_estimate_arithmetic():
    a, b = Estimate(1.0, 0.1), Estimate(2.0, 0.2, False)
    c = a + b
    assert c.value == 3.0 and math.isclose(c.error, 0.3) and not c.rigorous
    assert (a - a).value == 0.0 and (a - a).error == pytest.approx(0.2)
    assert Estimate.from_bracket(1.0, 3.0) == Estimate(2.0, 1.0)
    assert esum([Estimate(0.1), Estimate(0.2), Estimate(0.3)]).value == 0.6
    with pytest.raises(ValueError):
        Estimate(1.0, -1.0)
    with pytest.raises(ValueError):
        Estimate.from_bracket(2.0, 1.0)


@pytest.mark.parametrize("s", [0.0, 1.0, -0.2, 1.5, float("nan")])
def test_s_domain(s):
    with pytest.raises(ValueError, match=r"s must lie in \(0,1\)"):
        check_s(s)


# ---------------------------------------------------------------------------
# closed-form interval interactions

def test_interval_examples():
    assert interval_interaction(0, 1, 2, 3, 0.5) == pytest.approx(4 * (2 * math.sqrt(2) - 1 - math.sqrt(3)), rel=1e-14)
    assert interval_interaction(0, 1, 1, 2, 0.5) == pytest.approx(4 * (2 - math.sqrt(2)), rel=1e-14)


def test_interval_matches_quadrature():
    assert interval_interaction(0, 1, 2, 3, 0.5) == pytest.approx(dblquad_oracle(0, 1, 2, 3, 0.5), rel=1e-10)


def test_touching_reduction():
    # with u = y - x the touching case is int_0^1 int_0^... of u^(-1-s): a 1D integral
    s = 0.3
    f = lambda u: min(u, 2 - u) * u ** (-1 - s)
    ref = integrate.quad(f, 0, 1, limit=200)[0] + integrate.quad(f, 1, 2)[0]
    assert interval_interaction(0, 1, 1, 2, s) == pytest.approx(ref, rel=1e-9)


def test_interval_ordering_error():
    with pytest.raises(ValueError):
        interval_interaction(0, 1, 0.5, 2, 0.5)


@given(st.floats(-5, 5), st.floats(0.01, 3), st.one_of(st.just(0.0), st.floats(1e-3, 2)), st.floats(0.01, 3),
       st.floats(0.05, 0.95), st.floats(-50, 50))
@settings(max_examples=60, deadline=None)
def test_interval_translation_and_symmetry(a, la, gap, lc, s, t):
    b, c = a + la, a + la + gap
    d = c + lc
    v = interval_interaction(a, b, c, d, s)
    assert v > 0
    assert interval_interaction(a + t, b + t, c + t, d + t, s) == pytest.approx(v, rel=1e-8)
    assert interaction_1d([(c, d)], [(a, b)], s) == pytest.approx(v, rel=1e-12)


def test_translated_quadruple_equal():
    for s in (0.2, 0.5, 0.8):
        assert interval_interaction(10, 11, 12, 13, s) == pytest.approx(interval_interaction(0, 1, 2, 3, s), rel=1e-12)


def test_full_line_interval():
    # P_s((0,1)) on the line equals 4 / (s (1 - s)) ... at s = 1/2 the value is 8
    assert interaction_1d([(0.0, 1.0)], [(-math.inf, 0.0), (1.0, math.inf)], 0.5) == pytest.approx(8.0, rel=1e-14)


# ---------------------------------------------------------------------------
# planar interactions

def test_far_squares_monopole():
    A = unit_square((0.5, 0.5))
    B = unit_square((10.5, 0.5))
    v = interaction_2d(A, B, KernelParams(0.5), TIGHT)
    assert v.value == pytest.approx(10 ** -2.5, rel=1e-2)
    # tensor Gauss-Legendre oracle (smooth integrand, order 20)
    x, w = np.polynomial.legendre.leggauss(20)
    x, w = 0.5 * (x + 1), 0.5 * w
    X = np.stack(np.meshgrid(x, x, indexing="ij"), -1).reshape(-1, 2)
    W = np.outer(w, w).ravel()
    Y = X + np.array([10.0, 0.0])
    D = np.linalg.norm(X[:, None] - Y[None], axis=-1)
    ref = W @ D ** -2.5 @ W
    assert v.value == pytest.approx(ref, rel=1e-10)


def test_symmetry_and_scaling_2d():
    A = unit_square((0.5, 0.5))
    B = PolygonRegion([[1.4, 0.0], [2.5, 0.3], [2.0, 1.2]])
    p = KernelParams(0.5)
    ab = interaction_2d(A, B, p, TIGHT)
    ba = interaction_2d(B, A, p, TIGHT)
    assert ab.value == pytest.approx(ba.value, rel=1e-12)
    A2 = PolygonRegion(np.asarray(A.vertices) * 2)
    B2 = PolygonRegion(np.asarray(B.vertices) * 2)
    assert interaction_2d(A2, B2, p, TIGHT).value == pytest.approx(2 ** 1.5 * ab.value, rel=1e-9)


def test_overlap_rejected():
    with pytest.raises(ValueError, match="sets must be disjoint"):
        interaction_2d(unit_square(), unit_square((0.5, 0.0)), KernelParams(0.5))


def test_touching_squares_finite():
    A, B = unit_square((0.5, 0.5)), unit_square((1.5, 0.5))
    v = interaction_2d(A, B, KernelParams(0.5), TIGHT)
    assert math.isfinite(v.value) and v.value > 0


def test_boundary_reduction_against_cell_quadrature():
    # independent oracle: treecode over two uniform box grids
    p = KernelParams(0.4)
    A = box((0.0, 0.0), (1.0, 0.5))
    B = box((1.25, -0.25), (2.0, 1.0))
    direct = interaction_2d(A, B, p, TIGHT)

    def grid(lo, hi, m):
        xs = np.linspace(lo[0], hi[0], m + 1)
        ys = np.linspace(lo[1], hi[1], m + 1)
        L = np.array([(x, y) for x in xs[:-1] for y in ys[:-1]])
        H = np.array([(x, y) for x in xs[1:] for y in ys[1:]])
        return L, H

    la, ha = grid((0.0, 0.0), (1.0, 0.5), 4)
    lb, hb = grid((1.25, -0.25), (2.0, 1.0), 4)
    cells = cell_interaction(la, ha, lb, hb, p, TIGHT)
    assert abs(cells.value - direct.value) <= cells.error + direct.error + 1e-10 * direct.value


def test_self_perimeter_scaling():
    E = regular_polygon((0.0, 0.0), 1.0, 12)
    p = KernelParams(0.3)
    a = self_perimeter(E, p, TIGHT)
    b = self_perimeter(PolygonRegion(np.asarray(E.vertices) * 3), p, TIGHT)
    assert b.value == pytest.approx(3 ** 1.7 * a.value, rel=1e-9)


# ---------------------------------------------------------------------------
# treecode

def test_treecode_brackets_direct():
    p = KernelParams(0.5)
    A = regular_polygon((0.0, 0.0), 0.5, 64)
    B = regular_polygon((3.0, 0.5), 0.5, 64)
    ta = classify_boundary(A, 5)
    tb = classify_boundary(B, 5)
    br = treecode_interaction(ta, tb, p)
    d = interaction_2d(A, B, p, TIGHT)
    assert br.lo - d.error <= d.value <= br.hi + d.error


def test_single_leaf_tree_equals_box_interaction():
    p = KernelParams(0.5)
    v = cell_interaction([[0, 0]], [[1, 1]], [[2, 0]], [[3, 1]], p, TIGHT)
    d = interaction_2d(box((0, 0), (1, 1)), box((2, 0), (3, 1)), p, TIGHT)
    assert v.value == pytest.approx(d.value, rel=1e-10)


def test_larger_theta_never_increases_error():
    p = KernelParams(0.5)
    rng = np.random.default_rng(0)
    lo = rng.uniform(0, 1, size=(40, 2)).round(3)
    lo = np.unique(np.floor(lo * 8) / 8, axis=0)
    hi = lo + 0.125
    lb, hb = lo + np.array([2.0, 0.0]), hi + np.array([2.0, 0.0])
    errs = [cell_interaction(lo, hi, lb, hb, p, QuadraturePolicy(theta=t)).error for t in (1.0, 2.0, 4.0, 8.0)]
    assert all(e2 <= e1 * (1 + 1e-9) for e1, e2 in zip(errs, errs[1:]))
