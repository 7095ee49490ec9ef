from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

import shapely

from .sets import BallSet, PolygonRegion, Region


@dataclass(frozen=True)
class SimilarityMap:
    """x -> scale * R(rotation_angle) x + translation."""

    scale: float = 1.0
    rotation_angle: float = 0.0
    translation: tuple = (0.0, 0.0)

    def __post_init__(self):
        if not self.scale > 0:
            raise ValueError("scale must be positive")
        object.__setattr__(self, "translation", tuple(float(t) for t in self.translation))

    @property
    def matrix(self) -> np.ndarray:
        c, s = math.cos(self.rotation_angle), math.sin(self.rotation_angle)
        return self.scale * np.array([[c, -s], [s, c]])

    def __call__(self, pts):
        pts = np.asarray(pts, dtype=float)
        return pts @ self.matrix.T + np.asarray(self.translation)

    def compose(self, inner: "SimilarityMap") -> "SimilarityMap":
        """self o inner."""
        t = self(np.asarray(inner.translation))
        return SimilarityMap(self.scale * inner.scale,
                             self.rotation_angle + inner.rotation_angle, tuple(t))

    __matmul__ = compose

    @classmethod
    def identity(cls) -> "SimilarityMap":
        return cls()

    def to_json(self):
        return {"scale": self.scale, "angle": self.rotation_angle,
                "translation": list(self.translation)}


def apply_map(m: SimilarityMap, p):
    """Image of a polygon, region or planar ball set under a similarity map."""
    if isinstance(p, PolygonRegion):
        return PolygonRegion(m(p.vertices), [m(h) for h in p.holes])
    if isinstance(p, BallSet):
        return BallSet(m(p.centers), p.radii * m.scale, dim=2, polygon_sides=p.polygon_sides)
    if isinstance(p, Region):
        return Region(shapely.transform(p.geom, m))
    raise TypeError(f"cannot map {type(p).__name__}")
