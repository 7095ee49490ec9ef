"""Exact interaction of one-dimensional intervals.

For a < b <= c < d the double integral of |x-y|^-(1+s) over (a,b)x(c,d)
has the closed form

    [(c-a)^(1-s) + (d-b)^(1-s) - (c-b)^(1-s) - (d-a)^(1-s)] / (s(1-s)).

The bracket is evaluated as a difference of two increments
``(x+h)^p - x^p`` computed through ``expm1``/``log1p`` so that widely
separated intervals do not lose all their digits to cancellation.
"""

from __future__ import annotations

import math
from typing import Iterable, Sequence

import numpy as np

from .params import check_s


def _pow_increment(x: float, h: float, p: float) -> float:
    """(x + h)**p - x**p for x >= 0, h >= 0."""
    if h == 0.0:
        return 0.0
    if x == 0.0:
        return h ** p
    return x ** p * math.expm1(p * math.log1p(h / x))


def interval_interaction(a: float, b: float, c: float, d: float, s: float) -> float:
    """L_s((a,b), (c,d)) for a < b <= c < d; ``d`` may be ``inf``."""
    s = check_s(s)
    if not (a < b <= c < d):
        raise ValueError(f"need a < b <= c < d, got ({a}, {b}, {c}, {d})")
    if math.isinf(a):
        raise ValueError("left interval must be bounded; mirror the arguments instead")
    p = 1.0 - s
    h = b - a
    near = _pow_increment(c - b, h, p)
    far = 0.0 if math.isinf(d) else _pow_increment(d - b, h, p)
    return (near - far) / (s * p)


def pair_interaction(I: Sequence[float], J: Sequence[float], s: float) -> float:
    """L_s(I, J) for two non-overlapping intervals in either order.

    At most one of the two may be unbounded.
    """
    (a, b), (c, d) = I, J
    if b <= c:
        lo, hi = (a, b), (c, d)
    elif d <= a:
        lo, hi = (c, d), (a, b)
    else:
        raise ValueError("sets must be disjoint")
    if math.isinf(lo[0]):
        # mirror so that the unbounded piece sits on the right
        return interval_interaction(-hi[1], -hi[0], -lo[1], -lo[0], s)
    return interval_interaction(lo[0], lo[1], hi[0], hi[1], s)


def interaction_1d(A: Iterable[Sequence[float]], B: Iterable[Sequence[float]], s: float) -> float:
    """L_s(A, B) for finite unions of pairwise disjoint intervals."""
    A = [tuple(map(float, I)) for I in A]
    B = [tuple(map(float, J)) for J in B]
    return math.fsum(pair_interaction(I, J, s) for I in A for J in B)


def _pow_increment_array(x, h, p):
    x = np.asarray(x, dtype=float)
    h = np.asarray(h, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = x ** p * np.expm1(p * np.log1p(h / x))
    out = np.where(x == 0.0, h ** p, out)
    return np.where(h == 0.0, 0.0, out)


def interval_interaction_array(a, b, c, d, s: float) -> np.ndarray:
    """Vectorized :func:`interval_interaction` (no ordering checks)."""
    s = check_s(s)
    p = 1.0 - s
    a, b, c, d = np.broadcast_arrays(*(np.asarray(z, dtype=float) for z in (a, b, c, d)))
    h = b - a
    near = _pow_increment_array(c - b, h, p)
    with np.errstate(invalid="ignore"):
        far = np.where(np.isinf(d), 0.0, _pow_increment_array(np.where(np.isinf(d), 1.0, d - b), h, p))
    return (near - far) / (s * p)
