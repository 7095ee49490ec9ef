"""Adaptive quadtree (binary tree in 1D) classifying cells against a set.

Cells are half-open boxes [lo, hi) except along the upper faces of the
root box, so every point of the root box lies in exactly one leaf. A
cell is Boundary when the set's boundary meets it; otherwise all of it
lies on one side and it is tagged from the membership oracle at its
center. Boundary cells are refined down to the requested depth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from ..estimate import Estimate
from .sets import BallSet, HalfPlane, IntervalUnion, PlanarSet, Polyline

INTERIOR, EXTERIOR, BOUNDARY = 1, -1, 0
MAX_DEPTH = {1: 40, 2: 14}


@dataclass
class AdaptiveCellTree:
    root_lo: np.ndarray
    root_hi: np.ndarray
    lo: np.ndarray          # (N, d) leaf lower corners
    hi: np.ndarray          # (N, d) leaf upper corners
    depth: np.ndarray       # (N,)
    tag: np.ndarray         # (N,) in {INTERIOR, EXTERIOR, BOUNDARY}
    max_depth: int
    source: object = field(default=None, repr=False)

    @property
    def dim(self) -> int:
        return self.lo.shape[1]

    def __len__(self):
        return len(self.tag)

    @property
    def volumes(self) -> np.ndarray:
        return np.prod(self.hi - self.lo, axis=1)

    def measure(self, tag: int) -> float:
        return math.fsum(self.volumes[self.tag == tag])

    @property
    def root_measure(self) -> float:
        return float(np.prod(self.root_hi - self.root_lo))

    def count(self, tag: int) -> int:
        return int(np.sum(self.tag == tag))

    def leaves(self, tag: int):
        m = self.tag == tag
        return self.lo[m], self.hi[m]

    def cell_size(self, depth: int | None = None) -> np.ndarray:
        d = self.max_depth if depth is None else depth
        return (self.root_hi - self.root_lo) / 2 ** d

    def tag_at(self, pts) -> np.ndarray:
        """Tag of the leaf containing each point (half-open convention)."""
        pts = np.asarray(pts, dtype=float).reshape(-1, self.dim)
        out = np.full(len(pts), EXTERIOR, dtype=np.int8)
        inside = np.ones(len(pts), dtype=bool)
        # leaves are disjoint; linear scan in blocks is enough at desk scale
        for start in range(0, len(self.tag), 4096):
            lo = self.lo[start:start + 4096]
            hi = self.hi[start:start + 4096]
            upper = np.where(self.hi[start:start + 4096] >= self.root_hi, np.inf, hi)
            hit = np.all((pts[:, None, :] >= lo[None]) & (pts[:, None, :] < upper[None]), axis=2)
            any_hit = hit.any(axis=1)
            out[any_hit] = self.tag[start:start + 4096][hit.argmax(axis=1)[any_hit]]
        return np.where(inside, out, EXTERIOR)


# ---------------------------------------------------------------------------
# geometric tests

def clip_segment(P, Q, lo, hi):
    """Liang-Barsky clip of one segment to a closed box; None when disjoint."""
    P, Q = np.asarray(P, float), np.asarray(Q, float)
    t0, t1 = _clip_params(P[None], Q[None], np.asarray(lo, float)[None], np.asarray(hi, float)[None])
    if t0[0] > t1[0]:
        return None
    d = Q - P
    return P + t0[0] * d, P + t1[0] * d


def _clip_params(P, Q, lo, hi):
    d = Q - P
    t0 = np.zeros(len(P))
    t1 = np.ones(len(P))
    for p, q in ((-d[:, 0], P[:, 0] - lo[:, 0]), (d[:, 0], hi[:, 0] - P[:, 0]),
                 (-d[:, 1], P[:, 1] - lo[:, 1]), (d[:, 1], hi[:, 1] - P[:, 1])):
        with np.errstate(divide="ignore", invalid="ignore"):
            r = q / p
        neg = p < 0
        pos = p > 0
        t0 = np.where(neg, np.maximum(t0, r), t0)
        t1 = np.where(pos, np.minimum(t1, r), t1)
        # parallel and outside
        t0 = np.where((p == 0) & (q < 0), 2.0, t0)
    return t0, t1


def segments_meet_cells(P, Q, lo, hi, closed_x, closed_y):
    """Does segment k meet the half-open cell k? (all arrays row-aligned)"""
    t0, t1 = _clip_params(P, Q, lo, hi)
    hit = t0 <= t1
    d = Q - P
    on_x = (d[:, 0] == 0) & (P[:, 0] == hi[:, 0]) & ~closed_x
    on_y = (d[:, 1] == 0) & (P[:, 1] == hi[:, 1]) & ~closed_y
    proper = hit & (t0 < t1) & ~on_x & ~on_y
    C = P + t0[:, None] * d
    point = hit & (t0 == t1) & ((C[:, 0] < hi[:, 0]) | closed_x) & ((C[:, 1] < hi[:, 1]) | closed_y)
    return proper | point


def circles_meet_cells(c, r, lo, hi):
    near = np.clip(c, lo, hi)
    dmin = np.hypot(*(c - near).T)
    far = np.where(np.abs(c - lo) > np.abs(c - hi), lo, hi)
    dmax = np.hypot(*(c - far).T)
    return (dmin <= r) & (r <= dmax)


# ---------------------------------------------------------------------------
# classification

def _boundary_primitives(E, lo, hi):
    """('segments', P, Q) or ('circles', C, R) or ('points', X) describing dE."""
    if isinstance(E, IntervalUnion):
        return "points", E.endpoints()
    if isinstance(E, PlanarSet):
        S = E.segments()
        return "segments", S.P, S.Q
    if isinstance(E, Polyline):
        P, Q = E.segments()
        return "segments", P, Q
    if isinstance(E, HalfPlane):
        seg = E.clipped_line(lo, hi)
        if seg is None:
            z = np.zeros((0, 2))
            return "segments", z, z
        return "segments", seg[0][None], seg[1][None]
    if isinstance(E, BallSet) and E.dim == 2:
        return "circles", E.centers, E.radii
    raise TypeError(f"no boundary description for {type(E).__name__}")


def default_root_box(E, margin: float = 0.125):
    lo, hi = E.bbox()
    lo, hi = np.asarray(lo, float), np.asarray(hi, float)
    c = 0.5 * (lo + hi)
    half = 0.5 * float(np.max(hi - lo)) * (1.0 + 2.0 * margin)
    return c - half, c + half


def classify_boundary(E, tree_depth: int, root_box=None, depth_limit: int | None = None) -> AdaptiveCellTree:
    """Adaptive tree over ``root_box`` with leaves tagged against ``E``."""
    if root_box is None:
        if isinstance(E, HalfPlane):
            raise ValueError("a half-plane needs an explicit root box")
        root_box = default_root_box(E)
    rlo = np.atleast_1d(np.asarray(root_box[0], dtype=float))
    rhi = np.atleast_1d(np.asarray(root_box[1], dtype=float))
    dim = len(rlo)
    limit = MAX_DEPTH[dim] if depth_limit is None else depth_limit
    if tree_depth > limit:
        raise ValueError(f"tree depth {tree_depth} exceeds configured limit {limit}")
    if tree_depth < 0:
        raise ValueError("tree depth must be nonnegative")
    prim = _boundary_primitives(E, rlo, rhi)
    nchild = 2 ** dim
    offsets = np.array(np.meshgrid(*[[0, 1]] * dim, indexing="ij")).reshape(dim, -1).T

    # active boundary cells as integer coordinates at the current depth
    cells = np.zeros((1, dim), dtype=np.int64)
    nprim = len(prim[1])
    inc_cell = np.zeros(nprim, dtype=np.int64)
    inc_prim = np.arange(nprim)
    inc_cell, inc_prim = _filter(prim, cells, inc_cell, inc_prim, rlo, rhi, 0)
    out_lo, out_hi, out_depth, out_tag = [], [], [], []

    for d in range(tree_depth + 1):
        size = (rhi - rlo) / 2 ** d
        has = np.zeros(len(cells), dtype=bool)
        has[inc_cell] = True
        # settled cells
        quiet = ~has
        if quiet.any():
            lo = rlo + cells[quiet] * size
            hi = lo + size
            centers = 0.5 * (lo + hi)
            inside = np.asarray(E.contains(centers if dim > 1 else centers[:, 0]))
            out_lo.append(lo)
            out_hi.append(hi)
            out_depth.append(np.full(len(lo), d))
            out_tag.append(np.where(inside, INTERIOR, EXTERIOR))
        if d == tree_depth:
            lo = rlo + cells[has] * size
            out_lo.append(lo)
            out_hi.append(lo + size)
            out_depth.append(np.full(len(lo), d))
            out_tag.append(np.full(len(lo), BOUNDARY))
            break
        # refine boundary cells
        bidx = np.flatnonzero(has)
        remap = -np.ones(len(cells), dtype=np.int64)
        remap[bidx] = np.arange(len(bidx))
        children = (2 * cells[bidx][:, None, :] + offsets[None]).reshape(-1, dim)
        pc = remap[inc_cell]
        new_cell = (pc[:, None] * nchild + np.arange(nchild)[None]).ravel()
        new_prim = np.repeat(inc_prim, nchild)
        cells = children
        inc_cell, inc_prim = _filter(prim, cells, new_cell, new_prim, rlo, rhi, d + 1)

    lo = np.concatenate(out_lo)
    hi = np.concatenate(out_hi)
    # snap upper faces on the root boundary so the leaves tile it exactly
    hi = np.where(np.isclose(hi, rhi, rtol=0, atol=1e-15 * np.max(np.abs(rhi) + 1)), rhi, hi)
    order = np.lexsort(tuple(lo.T[::-1]))
    return AdaptiveCellTree(rlo, rhi, lo[order], hi[order], np.concatenate(out_depth)[order],
                            np.concatenate(out_tag).astype(np.int8)[order], tree_depth, source=E)


def _filter(prim, cells, inc_cell, inc_prim, rlo, rhi, depth):
    if len(inc_cell) == 0:
        return inc_cell, inc_prim
    size = (rhi - rlo) / 2 ** depth
    n = 2 ** depth
    c = cells[inc_cell]
    lo = rlo + c * size
    hi = lo + size
    closed = c == n - 1
    kind = prim[0]
    if kind == "segments":
        P, Q = prim[1][inc_prim], prim[2][inc_prim]
        keep = segments_meet_cells(P, Q, lo, hi, closed[:, 0], closed[:, 1])
    elif kind == "circles":
        keep = circles_meet_cells(prim[1][inc_prim], prim[2][inc_prim], lo, hi)
    else:
        x = prim[1][inc_prim]
        keep = (x >= lo[:, 0]) & ((x < hi[:, 0]) | (closed[:, 0] & (x <= hi[:, 0])))
    return inc_cell[keep], inc_prim[keep]


# ---------------------------------------------------------------------------
# tubular neighbourhoods

def boundary_samples(tree: AdaptiveCellTree, spacing: float | None = None):
    """Points S with d(x, S) - lo_slack <= d(x, dE) <= d(x, S) + hi_slack.

    Exact boundary geometry is sampled when the source set provides it;
    otherwise Boundary leaf centers stand in for it (each Boundary leaf
    meets dE, and dE is covered by the Boundary leaves).
    """
    E = tree.source
    size = float(np.max(tree.cell_size()))
    eta = spacing or 0.5 * size
    try:
        prim = _boundary_primitives(E, tree.root_lo, tree.root_hi)
    except TypeError:
        prim = None
    if prim is not None and prim[0] == "segments":
        P, Q = prim[1], prim[2]
        pts = _sample_segments(P, Q, eta)
        return pts, 0.5 * eta, 0.0
    if prim is not None and prim[0] == "circles":
        pts = []
        for c, r in zip(prim[1], prim[2]):
            m = max(8, int(math.ceil(2 * math.pi * r / eta)))
            t = 2 * math.pi * np.arange(m) / m
            pts.append(c + r * np.stack([np.cos(t), np.sin(t)], axis=1))
        return np.concatenate(pts), 0.5 * eta, 0.0
    blo, bhi = tree.leaves(BOUNDARY)
    if len(blo) == 0:
        return np.zeros((0, tree.dim)), 0.0, 0.0
    half_diag = 0.5 * float(np.max(np.linalg.norm(bhi - blo, axis=1)))
    return 0.5 * (blo + bhi), half_diag, half_diag


def _sample_segments(P, Q, eta):
    L = np.hypot(*(Q - P).T)
    m = np.maximum(1, np.ceil(L / eta).astype(int))
    t = np.concatenate([np.arange(k + 1) / k for k in m])
    rep = np.repeat(np.arange(len(P)), m + 1)
    return P[rep] + t[:, None] * (Q - P)[rep]


def tubular_volume(tree: AdaptiveCellTree, rho: float, window=None, pixel: float | None = None,
                   max_pixels: int = 4_000_000) -> Estimate:
    """|{x in window : d(x, dE) <= rho}| bracketed by pixel classification.

    ``window`` is a box ``(lo, hi)``, a planar set, or None (a box large
    enough to hold the whole neighbourhood). A pixel counts towards the
    inner bound when it lies in the neighbourhood entirely, and towards
    the outer bound when it might meet it; both bounds are rigorous.
    The flag ``rigorous`` is cleared when rho is below twice the leaf size.
    """
    if rho <= 0:
        raise ValueError("rho must be positive")
    if tree.dim != 2:
        raise ValueError("tubular_volume works on planar trees; see tubular_volume_1d")
    pts, lo_slack, hi_slack = boundary_samples(tree)
    if len(pts) == 0:
        return Estimate(0.0, 0.0, True)
    leaf = float(np.max(tree.cell_size()))
    if window is None:
        wlo = pts.min(axis=0) - rho - lo_slack
        whi = pts.max(axis=0) + rho + lo_slack
        wset = None
    elif isinstance(window, PlanarSet):
        wlo, whi = window.bbox()
        wset = window
    else:
        wlo, whi = (np.asarray(z, dtype=float) for z in window)
        wset = None
    ext = whi - wlo
    h = pixel or min(rho / 8.0, leaf)
    h = max(h, math.sqrt(float(np.prod(ext)) / max_pixels))
    nx, ny = (max(1, int(math.ceil(e / h))) for e in ext)
    hx, hy = ext[0] / nx, ext[1] / ny
    half = 0.5 * math.hypot(hx, hy)
    xs = wlo[0] + hx * (np.arange(nx) + 0.5)
    ys = wlo[1] + hy * (np.arange(ny) + 0.5)
    kd = cKDTree(pts)
    inner = outer = 0
    cell_area = hx * hy
    for j0 in range(0, ny, max(1, 2_000_000 // nx)):
        yy = ys[j0:j0 + max(1, 2_000_000 // nx)]
        X, Y = np.meshgrid(xs, yy)
        C = np.stack([X.ravel(), Y.ravel()], axis=1)
        d, _ = kd.query(C, distance_upper_bound=rho + lo_slack + half + 1e-12)
        full = d + hi_slack + half <= rho
        part = d - lo_slack - half <= rho
        if wset is not None:
            wd = _distance_to_boundary(wset, C)
            win = wset.contains(C)
            w_full = win & (wd > half)
            w_part = win | (wd <= half)
            full &= w_full
            part &= w_part
        inner += int(full.sum())
        outer += int(part.sum())
    rig = rho >= 2.0 * leaf
    return Estimate.from_bracket(inner * cell_area, outer * cell_area, rigorous=rig)


def _distance_to_boundary(S: PlanarSet, pts):
    import shapely
    b = S.geom.boundary
    return shapely.distance(b, shapely.points(pts))


def tubular_volume_1d(points, rho: float, window=None) -> float:
    """Exact length of {x in window : d(x, points) <= rho} in 1D."""
    pts = np.sort(np.asarray(points, dtype=float))
    if len(pts) == 0:
        return 0.0
    ivs = []
    for p in pts:
        a, b = p - rho, p + rho
        if ivs and a <= ivs[-1][1]:
            ivs[-1][1] = max(ivs[-1][1], b)
        else:
            ivs.append([a, b])
    if window is None:
        return math.fsum(b - a for a, b in ivs)
    total = []
    for a, b in ivs:
        for c, d in window:
            lo, hi = max(a, c), min(b, d)
            if lo < hi:
                total.append(hi - lo)
    return math.fsum(total)
