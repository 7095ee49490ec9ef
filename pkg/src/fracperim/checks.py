"""Invariant suites shared by ``fracperim check`` and the test-suite.

Each check returns ``(name, passed, detail)``. Comparisons use the
combined reported error of the two sides plus a small relative floor.
"""

from __future__ import annotations

import math

import numpy as np

from .estimate import Estimate
from .geometry.maps import SimilarityMap, apply_map
from .geometry.sets import IntervalUnion, PolygonRegion, Region, unit_square
from .kernel.params import KernelParams, QuadraturePolicy

POLICY = QuadraturePolicy(target_rel_error=1e-10)
FLOOR = 1e-9


def agree(x: Estimate, y: Estimate, floor: float = FLOOR) -> bool:
    return abs(x.value - y.value) <= x.error + y.error + floor * max(abs(x.value), abs(y.value))


def triangle() -> PolygonRegion:
    return PolygonRegion([[0.0, 0.0], [1.0, 0.0], [0.3, 0.8]])


def corpus(quick: bool = False) -> dict:
    """Planar and linear test sets keyed by name."""
    from .fractals import koch_snowflake
    from .perimeter import appendixA_set
    out = {"square": unit_square(), "triangle": triangle(),
           "koch3": koch_snowflake(2 if quick else 3),
           "appendixA": appendixA_set(0.5, 12)}
    return out


def _P(E, s):
    from .perimeter import frac_perimeter
    return frac_perimeter(E, None, s=s, policy=POLICY).total


def _transform(E, F: SimilarityMap):
    if isinstance(E, IntervalUnion):
        return E.scaled(F.scale, float(F.translation[0]))
    return apply_map(F, E)


def scaling_checks(E, name, s=0.5, lams=(0.5, 2.0, 3.0)):
    n = 1 if isinstance(E, IntervalUnion) else 2
    base = _P(E, s)
    out = []
    for lam in lams:
        got = _P(_transform(E, SimilarityMap(lam, 0.0, (0.0, 0.0))), s)
        want = base.scale(lam ** (n - s))
        out.append((f"scaling {name} lambda={lam}", agree(got, want), f"{got.value:.12g} vs {want.value:.12g}"))
    return out


def motion_checks(E, name, s=0.5):
    base = _P(E, s)
    out = []
    moved = _transform(E, SimilarityMap(1.0, 0.0, (0.37, -1.21)))
    got = _P(moved, s)
    out.append((f"translation {name}", agree(got, base), f"{got.value:.12g} vs {base.value:.12g}"))
    if not isinstance(E, IntervalUnion):
        got = _P(apply_map(SimilarityMap(1.0, 0.7, (0.0, 0.0)), E), s)
        out.append((f"rotation {name}", agree(got, base), f"{got.value:.12g} vs {base.value:.12g}"))
    return out


def subadditivity_check(s=0.5):
    A = unit_square()
    B = PolygonRegion([[0.2, 0.1], [1.3, 0.2], [0.6, 1.1]])
    U = Region.union([A, B])
    pu, pa, pb = _P(U, s), _P(A, s), _P(B, s)
    ok = pu.value - pu.error <= pa.value + pa.error + pb.value + pb.error
    return ("subadditivity square+triangle", ok, f"{pu.value:.6g} <= {pa.value + pb.value:.6g}")


def kernel_checks(s=0.5):
    from .kernel.interaction import interaction_2d
    from .kernel.interval import interaction_1d
    p = KernelParams(s, 2)
    A = unit_square()
    B = PolygonRegion([[1.5, -0.2], [2.5, 0.1], [2.0, 0.9]])
    B1 = PolygonRegion([[1.5, -0.2], [2.5, 0.1], [2.0, 0.9]])
    C = PolygonRegion([[-0.5, 1.2], [0.5, 1.2], [0.5, 2.0], [-0.5, 2.0]])
    ab, ba = interaction_2d(A, B, p, POLICY), interaction_2d(B1, A, p, POLICY)
    out = [("kernel symmetry 2D", agree(ab, ba), f"{ab.value:.12g} vs {ba.value:.12g}")]
    both = interaction_2d(Region.union([B, C]), A, p, POLICY)
    parts = interaction_2d(B, A, p, POLICY) + interaction_2d(C, A, p, POLICY)
    out.append(("kernel additivity 2D", agree(both, parts), f"{both.value:.12g} vs {parts.value:.12g}"))
    I, J, K = [(0.0, 1.0)], [(1.5, 2.0)], [(-3.0, -1.0)]
    x, y = interaction_1d(I, J, s), interaction_1d(J, I, s)
    out.append(("kernel symmetry 1D", abs(x - y) <= 1e-14 * x, f"{x:.15g} vs {y:.15g}"))
    u = interaction_1d(I, J + K, s)
    v = interaction_1d(I, J, s) + interaction_1d(I, K, s)
    out.append(("kernel additivity 1D", abs(u - v) <= 1e-13 * u, f"{u:.15g} vs {v:.15g}"))
    return out


def property_suite(quick: bool = False) -> list:
    out = []
    for name, E in corpus(quick).items():
        out += scaling_checks(E, name)
        out += motion_checks(E, name)
    out.append(subadditivity_check())
    out += kernel_checks()
    return out


def boundary_coincidence(level: int = 3, depth: int = 8):
    """Boundary leaves of the cell classifier equal the grid cells the Koch curve crosses."""
    from .dimension import occupied_cells
    from .fractals import koch_snowflake
    from .geometry.celltree import BOUNDARY, classify_boundary
    E = koch_snowflake(level)
    tree = classify_boundary(E, depth)
    h = tree.cell_size()
    lo, _ = tree.leaves(BOUNDARY)
    a = {tuple(v) for v in np.rint((lo - tree.root_lo) / h).astype(np.int64).tolist()}
    b = {tuple(v) for v in occupied_cells(E, float(h[0]), origin=tree.root_lo, touch="any").tolist()}
    return ("grid classifier boundary coincidence", a == b, f"{len(a)} vs {len(b)} cells")


def constants_check():
    from .asymptotics import k1n_identity
    out = []
    for n in (2, 3):
        r = k1n_identity(n)
        out.append((f"n w_n K_1n = 2 w_(n-1), n={n}", r["rel_dev"] <= 1e-6, f"rel dev {r['rel_dev']:.2e}"))
    return out


def exploded_check():
    from .dimension import dimF_threshold
    from .fractals import exploded_spec
    fit = dimF_threshold(exploded_spec(b=2, sigma=0.5), levels=6)
    return ("exploded s_star near sigma", abs(fit.s_star - 0.5) <= 0.03, f"s_star {fit.s_star:.6f}")


def run_checks(quick: bool = False) -> list:
    out = property_suite(quick)
    out.append(boundary_coincidence())
    out += constants_check()
    if not quick:
        out.append(exploded_check())
    return out
