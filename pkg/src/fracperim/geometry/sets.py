"""Set representations with exact membership oracles.

Every set exposes ``dim``, ``bbox()`` and a vectorized ``contains``.
Planar sets additionally expose their boundary as oriented ``Segments``
(outward normals), which is what the interaction kernel consumes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import shapely
from shapely.geometry import MultiPolygon, Polygon
from shapely.geometry.polygon import orient

from ..kernel.boundary import Segments


class FullSpace:
    """The whole of R^n used as a window."""

    def __init__(self, dim: int = 2):
        self.dim = dim

    def __repr__(self):
        return f"FullSpace(dim={self.dim})"

    def describe(self):
        return "full space"


FULL_PLANE = FullSpace(2)
FULL_LINE = FullSpace(1)


# ---------------------------------------------------------------------------
# one dimension

class IntervalUnion:
    """Finite union of disjoint open intervals, stored sorted."""

    dim = 1

    def __init__(self, intervals: Sequence[Sequence[float]], allow_empty: bool = False):
        iv = sorted((float(a), float(b)) for a, b in intervals)
        for a, b in iv:
            if not a < b:
                raise ValueError(f"interval ({a}, {b}) is empty")
            if math.isinf(a) or math.isinf(b):
                raise ValueError("intervals must be bounded")
        for (a0, b0), (a1, b1) in zip(iv, iv[1:]):
            if a1 < b0:
                raise ValueError("intervals overlap")
        if not iv and not allow_empty:
            raise ValueError("empty interval union")
        self.intervals = tuple(iv)

    def __repr__(self):
        return f"IntervalUnion({list(self.intervals)})"

    def __len__(self):
        return len(self.intervals)

    @property
    def measure(self) -> float:
        return math.fsum(b - a for a, b in self.intervals)

    def bbox(self):
        return np.array([self.intervals[0][0]]), np.array([self.intervals[-1][1]])

    def contains(self, x):
        x = np.asarray(x, dtype=float).reshape(-1)
        out = np.zeros(x.shape, dtype=bool)
        for a, b in self.intervals:
            out |= (x > a) & (x < b)
        return out

    def endpoints(self) -> np.ndarray:
        """Boundary points, merging endpoints shared by touching intervals."""
        pts = []
        for a, b in self.intervals:
            if pts and pts[-1] == a:
                pts.pop()
            else:
                pts.append(a)
            pts.append(b)
        return np.array(pts)

    def complement(self):
        """Complementary intervals, including the two unbounded rays."""
        out = []
        left = -math.inf
        for a, b in self.intervals:
            if a > left:
                out.append((left, a))
            left = b
        out.append((left, math.inf))
        return out

    def scaled(self, lam: float, shift: float = 0.0) -> "IntervalUnion":
        if lam > 0:
            return IntervalUnion([(lam * a + shift, lam * b + shift) for a, b in self.intervals])
        return IntervalUnion([(lam * b + shift, lam * a + shift) for a, b in self.intervals])

    def to_json(self):
        return {"kind": "intervals", "items": [list(i) for i in self.intervals]}


def interval_ops(A, B):
    """(A & B, A - B) for sorted lists of disjoint intervals (rays allowed)."""
    inter, diff = [], []
    for a, b in A:
        pieces = [(a, b)]
        for c, d in B:
            lo, hi = max(a, c), min(b, d)
            if lo < hi:
                inter.append((lo, hi))
            nxt = []
            for p, q in pieces:
                if d <= p or c >= q:
                    nxt.append((p, q))
                    continue
                if p < c:
                    nxt.append((p, c))
                if d < q:
                    nxt.append((d, q))
            pieces = nxt
        diff.extend(pieces)
    return sorted(inter), sorted(diff)


# ---------------------------------------------------------------------------
# two dimensions

def _ring_area(v: np.ndarray) -> float:
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def shoelace_area(vertices) -> float:
    """Signed area of a vertex loop (positive when counterclockwise)."""
    return _ring_area(np.asarray(vertices, dtype=float))


class PlanarSet:
    """Common interface of bounded open planar sets with polygonal boundary."""

    dim = 2

    @property
    def geom(self):
        raise NotImplementedError

    @property
    def area(self) -> float:
        return float(self.geom.area)

    @property
    def perimeter(self) -> float:
        return float(self.geom.length)

    def bbox(self):
        x0, y0, x1, y1 = self.geom.bounds
        return np.array([x0, y0]), np.array([x1, y1])

    @property
    def diameter(self) -> float:
        lo, hi = self.bbox()
        return float(np.hypot(*(hi - lo)))

    def contains(self, pts):
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        g = self.geom
        shapely.prepare(g)
        return shapely.contains_xy(g, pts[:, 0], pts[:, 1])

    def rings(self):
        """Boundary rings, exteriors counterclockwise and holes clockwise."""
        return oriented_rings(self.geom)

    def segments(self) -> Segments:
        return Segments.from_rings(self.rings())


def oriented_rings(geom):
    polys = _polygons(geom)
    rings = []
    for p in polys:
        p = orient(p, 1.0)
        rings.append(np.asarray(p.exterior.coords)[:-1])
        rings.extend(np.asarray(h.coords)[:-1] for h in p.interiors)
    return rings


def _polygons(geom):
    if geom is None or geom.is_empty:
        return []
    if isinstance(geom, Polygon):
        return [geom]
    if isinstance(geom, MultiPolygon):
        return list(geom.geoms)
    # GeometryCollection from overlay: keep the areal parts
    return [p for g in getattr(geom, "geoms", []) for p in _polygons(g) if p.area > 0]


class PolygonRegion(PlanarSet):
    """Simple polygon (optionally with holes) given by its vertex loop.

    Vertices are stored counterclockwise; a clockwise input is reversed.
    Degenerate input (self-intersecting, zero area) is rejected here.
    """

    def __init__(self, vertices, holes=()):
        v = np.array(vertices, dtype=float).reshape(-1, 2)
        if len(v) >= 2 and np.array_equal(v[0], v[-1]):
            v = v[:-1]
        if len(v) < 3:
            raise ValueError("polygon needs at least 3 vertices")
        if _ring_area(v) < 0:
            v = v[::-1].copy()
        hs = []
        for h in holes:
            h = np.array(h, dtype=float).reshape(-1, 2)
            if len(h) >= 2 and np.array_equal(h[0], h[-1]):
                h = h[:-1]
            if _ring_area(h) > 0:
                h = h[::-1].copy()
            hs.append(h)
        self.vertices = v
        self.holes = tuple(hs)
        self.vertices.setflags(write=False)
        g = Polygon(v, [h for h in hs])
        if not g.is_valid or g.area <= 0.0:
            raise ValueError("degenerate polygon: must be simple with positive area")
        self._geom = g

    @property
    def geom(self):
        return self._geom

    @property
    def signed_area(self) -> float:
        return _ring_area(self.vertices) + sum(_ring_area(h) for h in self.holes)

    @property
    def area(self) -> float:
        return self.signed_area

    @property
    def perimeter(self) -> float:
        total = 0.0
        for r in (self.vertices, *self.holes):
            total += float(np.hypot(*(np.roll(r, -1, axis=0) - r).T).sum())
        return total

    def rings(self):
        return [self.vertices, *self.holes]

    def __repr__(self):
        return f"PolygonRegion({len(self.vertices)} vertices, {len(self.holes)} holes)"

    def to_json(self):
        d = {"kind": "polygon", "vertices": self.vertices.tolist()}
        if self.holes:
            d["holes"] = [h.tolist() for h in self.holes]
        return d


class Region(PlanarSet):
    """Planar set given by a shapely (multi)polygon, e.g. a union of pieces."""

    def __init__(self, geom, allow_empty: bool = False):
        if not geom.is_valid:
            geom = shapely.make_valid(geom)
        # boolean operations may leave stray lines or points; keep area only
        polys = [g for g in _polygons(geom) if g.area > 0]
        geom = MultiPolygon(polys) if len(polys) > 1 else (polys[0] if polys else Polygon())
        if (geom.is_empty or geom.area <= 0) and not allow_empty:
            raise ValueError("degenerate region: zero area")
        self._geom = geom

    @property
    def geom(self):
        return self._geom

    @classmethod
    def union(cls, pieces) -> "Region":
        return cls(shapely.union_all([as_geom(p) for p in pieces]))

    def __repr__(self):
        return f"Region({self._geom.geom_type}, area={self.area:.6g})"

    def to_json(self):
        polys = _polygons(self._geom)
        if len(polys) == 1 and not polys[0].interiors:
            return {"kind": "polygon", "vertices": np.asarray(polys[0].exterior.coords)[:-1].tolist()}
        return {"kind": "multipolygon", "items": [
            {"vertices": np.asarray(orient(p).exterior.coords)[:-1].tolist(),
             "holes": [np.asarray(h.coords)[:-1].tolist() for h in orient(p).interiors]}
            for p in polys]}


def as_geom(obj):
    """Shapely geometry of a planar set (balls are polygonized)."""
    if isinstance(obj, PlanarSet):
        return obj.geom
    if isinstance(obj, BallSet):
        return obj.to_region().geom
    if hasattr(obj, "geom_type"):
        return obj
    raise TypeError(f"not a planar set: {obj!r}")


def box(lo, hi) -> PolygonRegion:
    (x0, y0), (x1, y1) = lo, hi
    return PolygonRegion([(x0, y0), (x1, y0), (x1, y1), (x0, y1)])


def unit_square(center=(0.0, 0.0)) -> PolygonRegion:
    cx, cy = center
    return box((cx - 0.5, cy - 0.5), (cx + 0.5, cy + 0.5))


def regular_polygon(center, radius, m=256, phase=0.0) -> PolygonRegion:
    """Regular m-gon inscribed in the circle of given center and radius."""
    t = phase + 2.0 * np.pi * np.arange(m) / m
    c = np.asarray(center, dtype=float)
    return PolygonRegion(c + radius * np.stack([np.cos(t), np.sin(t)], axis=1))


disk_polygon = regular_polygon


@dataclass
class BallSet:
    """Finite union of open balls B_r(c) in R^n."""

    centers: np.ndarray
    radii: np.ndarray
    dim: int = 2
    polygon_sides: int = field(default=128, repr=False)

    def __post_init__(self):
        self.centers = np.asarray(self.centers, dtype=float).reshape(-1, self.dim)
        self.radii = np.asarray(self.radii, dtype=float).reshape(-1)
        if len(self.centers) != len(self.radii):
            raise ValueError("centers and radii differ in length")
        if len(self.radii) == 0:
            raise ValueError("empty ball set")
        if np.any(self.radii <= 0):
            raise ValueError("radii must be positive")
        if self.dim not in (1, 2, 3):
            raise ValueError("dim must be 1, 2 or 3")

    @property
    def balls(self):
        return list(zip(self.centers, self.radii))

    def __len__(self):
        return len(self.radii)

    def bbox(self):
        return (self.centers - self.radii[:, None]).min(axis=0), (self.centers + self.radii[:, None]).max(axis=0)

    def contains(self, pts):
        pts = np.asarray(pts, dtype=float).reshape(-1, self.dim)
        out = np.zeros(len(pts), dtype=bool)
        for c, r in self.balls:
            out |= np.sum((pts - c) ** 2, axis=1) < r * r
        return out

    def min_gap(self) -> float:
        """Smallest distance between two distinct balls."""
        if len(self) < 2:
            return math.inf
        from scipy.spatial.distance import pdist, squareform
        D = squareform(pdist(self.centers))
        gap = D - self.radii[:, None] - self.radii[None, :]
        np.fill_diagonal(gap, np.inf)
        return float(gap.min())

    @property
    def measure(self) -> float:
        from ..asymptotics import omega
        return float(omega(self.dim) * np.sum(self.radii ** self.dim))

    def to_region(self, sides: int | None = None) -> Region:
        if self.dim != 2:
            raise ValueError("only planar ball sets can be polygonized")
        m = sides or self.polygon_sides
        return Region.union([regular_polygon(c, r, m) for c, r in self.balls])

    def to_json(self):
        return {"kind": "balls", "dim": self.dim,
                "items": [{"c": c.tolist(), "r": float(r)} for c, r in self.balls]}


class Polyline:
    """Planar curve made of segments; no interior (membership is empty)."""

    dim = 2

    def __init__(self, vertices, closed: bool = False):
        v = np.array(vertices, dtype=float).reshape(-1, 2)
        if len(v) < 1:
            raise ValueError("empty polyline")
        self.vertices = v
        self.closed = closed

    def segments(self):
        v = self.vertices
        if len(v) == 1:
            return v.copy(), v.copy()
        if self.closed:
            return v, np.roll(v, -1, axis=0)
        return v[:-1], v[1:]

    @property
    def length(self) -> float:
        P, Q = self.segments()
        return float(np.hypot(*(Q - P).T).sum())

    def bbox(self):
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    def contains(self, pts):
        return np.zeros(len(np.asarray(pts).reshape(-1, 2)), dtype=bool)


class HalfPlane:
    """{x : x . normal <= offset}; its boundary is an infinite line."""

    dim = 2

    def __init__(self, normal=(0.0, 1.0), offset: float = 0.0):
        n = np.asarray(normal, dtype=float)
        self.normal = n / np.hypot(*n)
        self.offset = float(offset)

    def contains(self, pts):
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        return pts @ self.normal < self.offset

    def clipped_line(self, lo, hi):
        """The boundary line clipped to a box, as one segment (or None)."""
        lo, hi = np.asarray(lo, float), np.asarray(hi, float)
        c = np.array([lo, [hi[0], lo[1]], hi, [lo[0], hi[1]]])
        t = np.array([-self.normal[1], self.normal[0]])
        p0 = self.normal * self.offset
        diag = float(np.hypot(*(hi - lo))) + float(np.hypot(*(c.mean(0) - p0)))
        P, Q = p0 - 2 * diag * t, p0 + 2 * diag * t
        from .celltree import clip_segment
        seg = clip_segment(P, Q, lo, hi)
        return seg
