"""Recursive self-similar sets: Koch snowflake, Sierpinski dendrite and
sponge, and exploded fractals.

A recursive family is T = union_k union_i F_k^i(T0) where level k holds
a * b^(k-1) similarity maps of ratio lambda^(-k). An optional witness set
S0 has images F_k^i(S0) outside T, which forces divergence of the
s-perimeter at the threshold s = n - log b / log lambda.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
import shapely
from shapely.strtree import STRtree

from .geometry.maps import SimilarityMap, apply_map
from .geometry.sets import BallSet, PolygonRegion, Region, regular_polygon

T_HEIGHT = 1.0 / math.sqrt(3.0)     # distance from barycenter to a vertex of the unit triangle
WITNESS_RADIUS = 1e-3


def unit_triangle() -> PolygonRegion:
    """Equilateral triangle of side 1, barycenter 0, top vertex on the y-axis."""
    t = T_HEIGHT
    return PolygonRegion([(0.0, t), (-0.5, -0.5 * t), (0.5, -0.5 * t)])


@dataclass
class RecursiveFractalSpec:
    name: str
    T0: PolygonRegion
    a: int
    b: int
    lam: float
    map_gen: Callable[[int], list] = field(repr=False)
    S0: object = None
    n: int = 2
    max_level: int = 8
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.a < 1 or self.b < 2 or not self.lam > 1:
            raise ValueError("need a >= 1, b >= 2 and lambda > 1")

    @property
    def similarity_dimension(self) -> float:
        return math.log(self.b) / math.log(self.lam)

    @property
    def dimension_valid(self) -> bool:
        return self.n - 1 < self.similarity_dimension < self.n

    @property
    def threshold(self) -> float:
        """n - log b / log lambda."""
        return self.n - self.similarity_dimension

    def rate(self, s: float) -> float:
        """Growth rate log b - (n - s) log lambda of the per-level terms."""
        return math.log(self.b) - (self.n - s) * math.log(self.lam)

    def count(self, k: int) -> int:
        return self.a * self.b ** (k - 1)

    def maps(self, k: int) -> list:
        if not 1 <= k <= self.max_level:
            raise ValueError(f"level {k} outside 1..{self.max_level}")
        return self.map_gen(k)

    def pieces(self, k: int) -> list:
        return [apply_map(F, self.T0) for F in self.maps(k)]

    def witnesses(self, k: int) -> list:
        if self.S0 is None:
            return []
        return [apply_map(F, self.S0) for F in self.maps(k)]

    def to_json(self, level: int) -> dict:
        return {"kind": "recursive", "name": self.name, "params": dict(self.params), "level": level}


# ---------------------------------------------------------------------------
# Koch snowflake

def _koch_refine(v: np.ndarray):
    """One middle-third step; returns new vertex loop and the added triangles."""
    P = v
    Q = np.roll(v, -1, axis=0)
    d = Q - P
    p1 = P + d / 3.0
    p2 = P + 2.0 * d / 3.0
    # outward normal of a counterclockwise loop
    nrm = np.stack([d[:, 1], -d[:, 0]], axis=1)
    tip = 0.5 * (P + Q) + nrm * (math.sqrt(3.0) / 6.0)
    out = np.stack([P, p1, tip, p2], axis=1).reshape(-1, 2)
    return out, (p1, tip, p2)


@lru_cache(maxsize=16)
def _koch_levels(level: int):
    v = np.asarray(unit_triangle().vertices)
    added = []
    for _ in range(level):
        v, tri = _koch_refine(v)
        added.append(tri)
    return v, added


def koch_snowflake(level: int) -> PolygonRegion:
    """Snowflake polygon after ``level`` middle-third steps (3 * 4^level vertices)."""
    if level < 0:
        raise ValueError("level must be >= 0")
    v, _ = _koch_levels(level)
    return PolygonRegion(v.copy())


def koch_curve_vertices(level: int) -> np.ndarray:
    """Closed vertex loop of the snowflake outline (first vertex repeated)."""
    v, _ = _koch_levels(level)
    return np.vstack([v, v[:1]])


def _piece_map(p1, tip, p2, k: int) -> SimilarityMap:
    c = (p1 + tip + p2) / 3.0
    ang = math.atan2(tip[1] - c[1], tip[0] - c[0]) - math.pi / 2.0
    return SimilarityMap(3.0 ** (-k), ang, tuple(c))


def koch_maps(k: int) -> list:
    """F_k^i taking the unit triangle onto the triangles added at step k.

    Rotations are fixed by sending the top vertex P = (0, t) of T0 to the
    tip of the new triangle, so the witness ball near P lands outside.
    """
    _, added = _koch_levels(k)
    p1, tip, p2 = added[k - 1]
    return [_piece_map(p1[i], tip[i], p2[i], k) for i in range(len(tip))]


def koch_witness(sides: int = 64) -> PolygonRegion:
    """Inscribed polygon of the ball B_{1/1000}(0, t + 1/1000); it touches T0 at P."""
    rho = WITNESS_RADIUS
    return regular_polygon((0.0, T_HEIGHT + rho), rho, sides, phase=-math.pi / 2)


def koch_pieces(level: int):
    """List of (triangle, (ball center, radius), map) for step ``level``."""
    if level < 1:
        raise ValueError("level must be >= 1")
    T0 = unit_triangle()
    c0 = np.array([0.0, T_HEIGHT + WITNESS_RADIUS])
    out = []
    for F in koch_maps(level):
        out.append((apply_map(F, T0), (F(c0), WITNESS_RADIUS * F.scale), F))
    return out


def koch_spec(max_level: int = 8, witness_sides: int = 64) -> RecursiveFractalSpec:
    return RecursiveFractalSpec("koch", unit_triangle(), a=3, b=4, lam=3.0, map_gen=koch_maps,
                                S0=koch_witness(witness_sides), max_level=max_level)


# ---------------------------------------------------------------------------
# Sierpinski-type families (b = 3, lambda = 2)

def _sierpinski_uprights(m: int) -> list:
    """Maps onto the 3^m upright sub-triangles of generation m."""
    V = np.asarray(unit_triangle().vertices)
    maps = [SimilarityMap()]
    for _ in range(m):
        maps = [U.compose(SimilarityMap(0.5, 0.0, tuple(0.5 * V[i]))) for U in maps for i in range(3)]
    return maps


def sierpinski_maps(k: int) -> list:
    """F_k^i onto the inverted middle triangles removed at step k."""
    mid = SimilarityMap(0.5, math.pi, (0.0, 0.0))
    return [U.compose(mid) for U in _sierpinski_uprights(k - 1)]


DENDRITE_INNER = 0.5


def dendrite_star(inner: float = DENDRITE_INNER) -> PolygonRegion:
    """Six-pointed star inside the unit triangle.

    Tips sit at the three vertices and the three edge midpoints. Between
    two neighbouring tips the outline dips to the point at ``inner``
    times the way from the barycenter to the midpoint of the half edge.
    """
    V = np.asarray(unit_triangle().vertices)
    tips = []
    for i in range(3):
        tips.append(V[i])
        tips.append(0.5 * (V[i] + V[(i + 1) % 3]))
    verts = []
    for i in range(6):
        A, B = tips[i], tips[(i + 1) % 6]
        verts.append(A)
        verts.append(inner * 0.5 * (A + B))
    return PolygonRegion(verts)


def dendrite_notches(inner: float = DENDRITE_INNER) -> Region:
    """The six triangles removed from T0 to obtain the star."""
    return Region(shapely.difference(unit_triangle().geom, dendrite_star(inner).geom))


def dendrite_spec(max_level: int = 8, inner: float = DENDRITE_INNER) -> RecursiveFractalSpec:
    star = dendrite_star(inner)
    return RecursiveFractalSpec("sierpinski_dendrite", star, a=1, b=3, lam=2.0, map_gen=sierpinski_maps,
                                S0=dendrite_notches(inner), max_level=max_level, params={"inner": inner})


SPONGE_RADIUS = 0.1


def sponge_spec(max_level: int = 8, radius: float = SPONGE_RADIUS, sides: int = 64) -> RecursiveFractalSpec:
    """T0 minus a central disk; the removed disks are the witnesses."""
    hole = regular_polygon((0.0, 0.0), radius, sides)
    T0 = PolygonRegion(unit_triangle().vertices, [hole.vertices])
    return RecursiveFractalSpec("sponge", T0, a=1, b=3, lam=2.0, map_gen=sierpinski_maps, S0=hole,
                                max_level=max_level, params={"radius": radius, "sides": sides})


def sponge_set(level: int, radius: float = SPONGE_RADIUS, sides: int = 64) -> Region:
    """E = T0 minus the disks F_k^i(B), k <= level."""
    spec = sponge_spec(max(level, 1), radius, sides)
    holes = [spec.S0] + [w for k in range(1, level + 1) for w in spec.witnesses(k)]
    return Region(shapely.difference(unit_triangle().geom, shapely.union_all([h.geom for h in holes])))


# ---------------------------------------------------------------------------
# exploded fractals

def exploded_lambda(b: int, sigma: float, n: int = 2) -> float:
    return b ** (1.0 / (n - sigma))


def exploded_fractal(b: int, sigma: float, n: int = 2, K: int = 4) -> BallSet:
    """Balls B_{1/(4 lambda^k)}(k, 0, ..., 0, i), 1 <= k <= K, 1 <= i <= b^(k-1)."""
    if b < 2:
        raise ValueError("b must be >= 2")
    if not 0 < sigma < 1:
        raise ValueError("sigma must lie in (0,1)")
    if n < 2:
        raise ValueError("n must be >= 2")
    lam = exploded_lambda(b, sigma, n)
    centers, radii = [], []
    for k in range(1, K + 1):
        for i in range(1, b ** (k - 1) + 1):
            c = np.zeros(n)
            c[0], c[-1] = k, i
            centers.append(c)
            radii.append(1.0 / (4.0 * lam ** k))
    return BallSet(np.array(centers), np.array(radii), dim=n)


def exploded_spec(b: int = 2, sigma: float = 0.5, max_level: int = 8, sides: int = 64) -> RecursiveFractalSpec:
    """Planar exploded family with T0 = B_{1/4}(0) and witness B_{1/16}(5/16, 0)."""
    lam = exploded_lambda(b, sigma, 2)

    def maps(k):
        return [SimilarityMap(lam ** (-k), 0.0, (k, i)) for i in range(1, b ** (k - 1) + 1)]

    T0 = regular_polygon((0.0, 0.0), 0.25, sides)
    S0 = regular_polygon((5.0 / 16.0, 0.0), 1.0 / 16.0, sides, phase=math.pi)
    return RecursiveFractalSpec("exploded", T0, a=1, b=b, lam=lam, map_gen=maps, S0=S0,
                                max_level=max_level, params={"b": b, "sigma": sigma})


# ---------------------------------------------------------------------------
# generation with checks

class OverlapError(ValueError):
    pass


@dataclass
class RecursiveBuild:
    spec: RecursiveFractalSpec
    level: int
    pieces: list          # [(k, i, PolygonRegion)]
    witnesses: list       # [(k, i, PolygonRegion)]

    def union(self) -> Region:
        return Region.union([p for _, _, p in self.pieces])


def build_recursive(spec: RecursiveFractalSpec, level: int, check: bool = False,
                    area_tol: float = 1e-12) -> RecursiveBuild:
    """All pieces T_k^i (and witnesses S_k^i) for k <= level, ordered by (k, i)."""
    if level > spec.max_level:
        raise ValueError(f"level {level} exceeds max_level {spec.max_level}")
    pieces, wits = [], []
    for k in range(1, level + 1):
        maps = spec.maps(k)
        pieces += [(k, i, apply_map(F, spec.T0)) for i, F in enumerate(maps, 1)]
        if spec.S0 is not None:
            wits += [(k, i, apply_map(F, spec.S0)) for i, F in enumerate(maps, 1)]
    out = RecursiveBuild(spec, level, pieces, wits)
    if check:
        check_overlaps(pieces, area_tol)
        if wits:
            check_witnesses(pieces, wits, area_tol)
    return out


def _pairs(items_a, items_b, same: bool):
    geoms_b = [p.geom for _, _, p in items_b]
    tree = STRtree(geoms_b)
    for ia, (k, i, p) in enumerate(items_a):
        for jb in tree.query(p.geom):
            if same and jb <= ia:
                continue
            yield (k, i, p), items_b[jb]


def check_overlaps(pieces, area_tol: float = 1e-12) -> None:
    """Raise OverlapError naming (k, i, h, j) if two pieces overlap in area."""
    for (k, i, p), (h, j, q) in _pairs(pieces, pieces, same=True):
        tol = area_tol * min(p.area, q.area)
        if shapely.intersection(p.geom, q.geom).area > tol:
            raise OverlapError(f"pieces overlap: (k,i,h,j) = ({k},{i},{h},{j})")


def check_witnesses(pieces, witnesses, area_tol: float = 1e-12) -> None:
    for (k, i, w), (h, j, q) in _pairs(witnesses, pieces, same=False):
        tol = area_tol * min(w.area, q.area)
        if shapely.intersection(w.geom, q.geom).area > tol:
            raise OverlapError(f"witness S_{k}^{i} meets piece T_{h}^{j}: (k,i,h,j) = ({k},{i},{h},{j})")


# ---------------------------------------------------------------------------
# name lookup

SPECS = {
    "koch": koch_spec,
    "sierpinski_dendrite": dendrite_spec,
    "sponge": sponge_spec,
    "exploded": exploded_spec,
}


def get_spec(name: str, **params) -> RecursiveFractalSpec:
    key = name.replace("-", "_")
    if key == "dendrite":
        key = "sierpinski_dendrite"
    if key not in SPECS:
        raise ValueError(f"unknown fractal {name!r}")
    return SPECS[key](**params)


def recursive_set(name: str, params: dict, level: int):
    """Concrete set for a ``{"kind": "recursive"}`` description."""
    key = name.replace("-", "_")
    if key == "koch":
        return koch_snowflake(level)
    if key == "exploded":
        return exploded_fractal(int(params.get("b", 2)), float(params.get("sigma", 0.5)),
                                int(params.get("n", 2)), level)
    if key == "sponge":
        return sponge_set(level, float(params.get("radius", SPONGE_RADIUS)))
    spec = get_spec(key, **params)
    return build_recursive(spec, level).union()
