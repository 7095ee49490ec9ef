"""Acceptance criteria, one test each, with a PASS/FAIL line per criterion.

Run ``pytest tests/test_acceptance.py -v -s`` to see the report lines
interleaved with the pytest output.
"""

import math
import time

import numpy as np
import pytest
from scipy import integrate

from fracperim.asymptotics import asymptotic_scan, k1n_identity
from fracperim.checks import boundary_coincidence, exploded_check, property_suite, triangle
from fracperim.dimension import (box_count_series, delta_grid, dim_inequality_check,
                                 dimF_threshold, minkowski_dimension_boxes)
from fracperim.fractals import dendrite_spec, koch_snowflake, koch_spec
from fracperim.geometry.sets import IntervalUnion, Polyline, regular_polygon, unit_square
from fracperim.kernel.interval import interval_interaction
from fracperim.perimeter import AppendixASet, appendixA_lower_bound, appendixA_perimeter

KOCH_S = 2 - math.log(4) / math.log(3)
DENDRITE_S = 2 - math.log(3) / math.log(2)


@pytest.fixture
def report(capsys):
    t0 = time.perf_counter()

    def emit(name, ok, detail, budget):
        dt = time.perf_counter() - t0
        ok = bool(ok) and dt <= budget
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] {name}: {detail} ({dt:.1f}s, budget {budget:g}s)")
        return ok
    return emit


def test_c1_koch_threshold(report):
    fit = dimF_threshold(koch_spec(), levels=7)
    assert report("C1 Koch threshold", abs(fit.s_star - KOCH_S) <= 0.02,
                  f"s_star {fit.s_star:.6f} vs {KOCH_S:.6f} +- 0.02", 120)


def test_c2_dendrite_threshold(report):
    fit = dimF_threshold(dendrite_spec(), levels=7)
    assert report("C2 dendrite threshold", abs(fit.s_star - DENDRITE_S) <= 0.03,
                  f"s_star {fit.s_star:.6f} vs {DENDRITE_S:.6f} +- 0.03", 120)


def test_c3_koch_box_dimension(report):
    G = Polyline(koch_snowflake(7).vertices, closed=True)
    slope, _ = minkowski_dimension_boxes(box_count_series(G, delta_grid("3^-1..3^-6")))
    target = math.log(4) / math.log(3)
    assert report("C3 Koch box dimension", abs(slope - target) <= 0.05,
                  f"slope {slope:.4f} vs {target:.6f} +- 0.05", 30)


def test_c4_asymptotic_law(report):
    scan = asymptotic_scan(unit_square(), regular_polygon((0, 0), 2.0, 1024))
    assert report("C4 asymptotic law", scan.target == pytest.approx(8.0) and scan.rel_dev <= 0.02,
                  f"limit {scan.limit:.5f} +- {scan.limit_err:.1e} vs 8, rel dev {scan.rel_dev:.2e}", 300)


def test_c5_constant_identity(report):
    rows = [k1n_identity(n) for n in (2, 3)]
    worst = max(r["rel_dev"] for r in rows)
    assert report("C5 constant identity", worst <= 1e-6, f"max rel dev {worst:.2e}", 1)


def test_c6_appendix_finite_and_blowup(report):
    finite = all(e.rigorous and math.isfinite(e.hi)
                 for e in (appendixA_perimeter(0.5, s) for s in np.arange(1, 10) / 10))
    sc = [(s, appendixA_perimeter(0.5, s)) for s in (0.90, 0.95, 0.99)]
    scaled = [(1 - s) * e.value for s, e in sc]
    increasing = all(a < b for a, b in zip(scaled, scaled[1:]))
    dominates = all((1 - s) * e.lo >= appendixA_lower_bound(0.5, s) for s, e in sc)
    assert report("C6 Appendix-A finiteness and blow-up", finite and increasing and dominates,
                  f"(1-s)P_s = {', '.join(f'{v:.4g}' for v in scaled)}", 10)


def test_c7_interval_oracle(report):
    rng = np.random.default_rng(20240607)
    worst = 0.0
    for _ in range(100):
        a = rng.uniform(-2, 2)
        b = a + rng.uniform(0.05, 1.5)
        c = b + rng.uniform(0.05, 1.0)
        d = c + rng.uniform(0.05, 1.5)
        s = rng.uniform(0.05, 0.95)
        exact = interval_interaction(a, b, c, d, s)
        ref, _ = integrate.dblquad(lambda y, x: (y - x) ** (-1 - s), a, b, c, d,
                                   epsabs=0, epsrel=1e-12)
        worst = max(worst, abs(exact - ref) / abs(ref))
    assert report("C7 exact-formula oracle", worst <= 1e-8, f"max rel dev {worst:.2e}", 30)


def test_c8_property_suites(report):
    rows = property_suite()
    bad = [name for name, ok, _ in rows if not ok]
    assert report("C8 property suites", not bad, f"{len(rows) - len(bad)}/{len(rows)} pass {bad or ''}", 120)


def test_c9_visintin(report):
    W = regular_polygon((0, 0), 2.0, 256)
    corpus = {"square": (unit_square(), W), "triangle": (triangle(), W),
              "koch3": (koch_snowflake(3), W), "appendixA": (AppendixASet(0.5), IntervalUnion([(-1, 1)]))}
    margins = {}
    for name, (E, Om) in corpus.items():
        rows = dim_inequality_check(E, Om, s_grid=(0.3, 0.5, 0.7))
        margins[name] = min(r.margin for r in rows)
    assert report("C9 dimension inequality", all(m > 0 for m in margins.values()),
                  "min margins " + ", ".join(f"{k} {v:.3g}" for k, v in margins.items()), 120)


def test_q_boundary_coincidence(report):
    name, ok, detail = boundary_coincidence()
    assert report("Q1 " + name, ok, detail, 60)


def test_q_exploded_threshold(report):
    name, ok, detail = exploded_check()
    assert report("Q2 " + name, ok, detail, 60)
