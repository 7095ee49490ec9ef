"""JSON (de)serialization of set descriptions."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from shapely.geometry import MultiPolygon, Polygon

from .sets import BallSet, IntervalUnion, PolygonRegion, Region


def set_from_json(doc: dict):
    kind = doc.get("kind")
    if kind == "intervals":
        gen = doc.get("generator")
        if gen and gen.get("name") == "appendixA":
            from ..perimeter import AppendixASet
            return AppendixASet(float(gen["a"]))
        return IntervalUnion(doc["items"])
    if kind == "polygon":
        return PolygonRegion(doc["vertices"], doc.get("holes", ()))
    if kind == "multipolygon":
        polys = [Polygon(it["vertices"], it.get("holes", [])) for it in doc["items"]]
        return Region(MultiPolygon(polys) if len(polys) > 1 else polys[0])
    if kind == "balls":
        items = doc["items"]
        return BallSet([it["c"] for it in items], [it["r"] for it in items], dim=int(doc.get("dim", 2)))
    if kind == "recursive":
        from ..fractals import recursive_set
        return recursive_set(doc["name"], doc.get("params", {}), int(doc["level"]))
    raise ValueError(f"unknown set kind {kind!r}")


def set_to_json(obj) -> dict:
    if hasattr(obj, "to_json"):
        return obj.to_json()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def load_set(path):
    """Read a set description; raises OSError for unreadable files."""
    with open(Path(path), encoding="utf-8") as fh:
        return set_from_json(json.load(fh))


def dump_json(doc: dict, path=None) -> str:
    text = json.dumps(doc, indent=1, sort_keys=True, default=_default) + "\n"
    if path is not None:
        with open(Path(path), "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    return text


def _default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")
