"""Signed distance fields on regular grids and their level sets."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .sets import PlanarSet, PolygonRegion, Region


@dataclass
class ScalarField:
    """Samples ``values[j, i]`` at (x0 + i h, y0 + j h)."""

    origin: np.ndarray
    h: float
    values: np.ndarray
    margin: float = math.inf   # |r| below which level sets stay inside the box

    @property
    def shape(self):
        return self.values.shape

    def coords(self):
        ny, nx = self.values.shape
        return (self.origin[0] + self.h * np.arange(nx),
                self.origin[1] + self.h * np.arange(ny))


def segment_distances(pts, P, Q, chunk: int = 2048) -> np.ndarray:
    """Exact Euclidean distance from each point to the union of segments.

    A KD-tree over segment midpoints prunes the candidates: the nearest
    segment lies within d_mid + L_max / 2 of any query point, where d_mid
    is the distance to the closest midpoint.
    """
    pts = np.asarray(pts, dtype=float)
    M = 0.5 * (P + Q)
    half = 0.5 * float(np.max(np.hypot(*(Q - P).T)))
    kd = cKDTree(M)
    dmid, _ = kd.query(pts)
    out = np.empty(len(pts))
    for a in range(0, len(pts), chunk):
        X = pts[a:a + chunk]
        cand = kd.query_ball_point(X, dmid[a:a + chunk] + 2 * half + 1e-12)
        for k, idx in enumerate(cand):
            idx = np.asarray(idx, dtype=int)
            A, B = P[idx], Q[idx]
            d = B - A
            L2 = np.einsum("ij,ij->i", d, d)
            t = np.clip(np.einsum("ij,ij->i", X[k] - A, d) / np.where(L2 > 0, L2, 1.0), 0.0, 1.0)
            out[a + k] = np.min(np.hypot(*(A + t[:, None] * d - X[k]).T))
    return out


def signed_distance_grid(p: PlanarSet, grid_spacing: float, bbox=None, level_range: float = 0.0) -> ScalarField:
    """Signed distance (negative inside) to ``p`` sampled on a grid.

    The box must contain the polygon's box grown by ``level_range`` so that
    every level set with |r| <= level_range stays inside it.
    """
    if grid_spacing <= 0:
        raise ValueError("grid spacing must be positive")
    plo, phi = (np.asarray(z, float) for z in p.bbox())
    if bbox is None:
        pad = level_range + 2 * grid_spacing
        lo, hi = plo - pad, phi + pad
    else:
        lo, hi = (np.asarray(z, float) for z in bbox)
        if np.any(lo > plo - level_range) or np.any(hi < phi + level_range):
            raise ValueError("insufficient bounding box for the requested level range")
    nx = int(math.floor((hi[0] - lo[0]) / grid_spacing)) + 1
    ny = int(math.floor((hi[1] - lo[1]) / grid_spacing)) + 1
    xs = lo[0] + grid_spacing * np.arange(nx)
    ys = lo[1] + grid_spacing * np.arange(ny)
    X, Y = np.meshgrid(xs, ys)
    pts = np.stack([X.ravel(), Y.ravel()], axis=1)
    S = p.segments()
    d = segment_distances(pts, S.P, S.Q)
    inside = p.contains(pts)
    vals = np.where(inside, -d, d).reshape(ny, nx)
    # distance from the box edge to the polygon bounds how far level sets may go
    margin = float(min(np.min(plo - lo), np.min(hi - phi)))
    return ScalarField(lo, grid_spacing, vals, margin)


def level_set_region(field: ScalarField, r: float):
    """Cells certainly inside / outside {phi < r} and the undecided rest.

    The field is 1-Lipschitz, so on a cell of side h the value stays within
    h*sqrt(2)/2 of every corner. Returns three boolean arrays over cells
    (shape (ny-1, nx-1)): inside, outside, uncertain.
    """
    if abs(r) >= field.margin:
        raise ValueError("level |r| reaches the edge of the sampled box")
    v = field.values
    c = np.stack([v[:-1, :-1], v[1:, :-1], v[:-1, 1:], v[1:, 1:]])
    slack = field.h * math.sqrt(2) / 2
    inside = c.max(axis=0) + slack < r
    outside = c.min(axis=0) - slack >= r
    return inside, outside, ~(inside | outside)


def level_set_area(field: ScalarField, r: float) -> tuple[float, float]:
    """Rigorous bracket on the area of {phi < r} within the sampled box."""
    inside, _, unsure = level_set_region(field, r)
    a = field.h ** 2
    return float(inside.sum() * a), float((inside.sum() + unsure.sum()) * a)


__all__ = ["ScalarField", "segment_distances", "signed_distance_grid", "level_set_region",
           "level_set_area", "PolygonRegion", "Region"]
