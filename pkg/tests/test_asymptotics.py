import math

import pytest
from scipy.special import gamma

from fracperim.asymptotics import asymptotic_scan, k1n_constant, k1n_identity, omega
from fracperim.geometry.sets import IntervalUnion, box, regular_polygon, unit_square
from fracperim.perimeter import AppendixASet


def test_omega_values():
    assert omega(0) == pytest.approx(1.0)
    assert omega(1) == pytest.approx(2.0)
    assert omega(2) == pytest.approx(math.pi)
    assert omega(3) == pytest.approx(4 * math.pi / 3)
    assert omega(1.5) == pytest.approx(math.pi ** 0.75 / gamma(1.75), rel=1e-14)
    with pytest.raises(ValueError):
        omega(-1)


@pytest.mark.parametrize("n, ref", [(2, 2 / math.pi), (3, 0.5)])
def test_k1n_values(n, ref):
    K = k1n_constant(n)
    assert K.value == pytest.approx(ref, rel=1e-6)
    assert abs(K.value - ref) <= 10 * K.error


@pytest.mark.parametrize("n", [2, 3])
def test_k1n_refinement(n):
    errs = [k1n_constant(n, q).error for q in (256, 512, 1024, 2048)]
    assert errs == sorted(errs, reverse=True)


def test_identity():
    for n in (2, 3):
        assert k1n_identity(n)["rel_dev"] <= 1e-6


def test_square_in_ball():
    scan = asymptotic_scan(unit_square(), regular_polygon((0, 0), 2.0, 1024))
    assert scan.target == pytest.approx(8.0)
    assert scan.rel_dev <= 0.02
    # the nonlocal part vanishes in the limit when the boundaries are apart
    nl = [v.value for v in scan.scaled_nonlocal]
    assert nl == sorted(nl, reverse=True) and nl[-1] < 0.1


def test_window_inside_set():
    scan = asymptotic_scan(box((-1, -1), (1, 1)), regular_polygon((0, 0), 0.5, 64), s_values=(0.9, 0.95, 0.99))
    assert scan.target == 0.0
    assert all(v.value == 0.0 for v in scan.scaled_local)
    tot = [v.value for v in scan.scaled_total]
    assert tot == sorted(tot, reverse=True)
    assert scan.rel_dev < 0.1


def test_edge_on_window_boundary_refused():
    scan = asymptotic_scan(box((0, 0), (1, 1)), box((0, -1), (2, 2)), s_values=(0.9, 0.95))
    assert scan.target is None and scan.notes


def test_appendix_growth_flag():
    scan = asymptotic_scan(AppendixASet(0.5), None, s_values=(0.9, 0.95, 0.99))
    assert scan.increasing
    assert scan.target is None


def test_interval_target():
    scan = asymptotic_scan(IntervalUnion([(0, 1)]), None)
    # (1 - s) P_s = 2 / s -> 2 = w_0 * (two jump points)
    assert scan.target == 2.0
    assert scan.limit == pytest.approx(2.0, rel=0.01)
