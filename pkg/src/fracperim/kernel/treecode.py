"""Hierarchical (Barnes-Hut style) summation of L_s over cell decompositions.

Both trees' leaves are grouped into their dyadic ancestors. A pair of
clusters whose bounding boxes are at distance at least
``theta * (diam_A + diam_B)`` is replaced by the monopole term
m_A m_B / |c_A - c_B|^p, p = n + s. With centroids as expansion points the
first-order terms cancel and the remainder is bounded by

    1/2 p (p + 1) d^(-p-2) (I_A m_B + I_B m_A),

where d is the box distance and I the second moment about the centroid.
Leaf pairs are evaluated exactly through the boundary reduction of the
two boxes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..estimate import Estimate
from .boundary import edge_pair_integrals
from .params import KernelParams, QuadraturePolicy

_CORNERS = np.array([[0, 0], [1, 0], [1, 1], [0, 1]])
_NORMALS = np.array([[0.0, -1.0], [1.0, 0.0], [0.0, 1.0], [-1.0, 0.0]])


@dataclass
class _Cluster:
    lo: np.ndarray
    hi: np.ndarray
    mass: float
    centroid: np.ndarray
    inertia: float          # int |x - centroid|^2
    leaves: np.ndarray      # leaf indices (only for leaf clusters)
    children: list

    @property
    def diam(self) -> float:
        return float(np.hypot(*(self.hi - self.lo)))


def _build(lo: np.ndarray, hi: np.ndarray, leaf_size: int = 1) -> _Cluster | None:
    """Binary space partition over a box list (split along the longer axis)."""
    if len(lo) == 0:
        return None
    idx = np.arange(len(lo))
    return _node(lo, hi, idx, leaf_size)


def _node(lo, hi, idx, leaf_size):
    l, h = lo[idx], hi[idx]
    w = h - l
    m = np.prod(w, axis=1)
    c = 0.5 * (l + h)
    M = float(m.sum())
    cen = (m[:, None] * c).sum(axis=0) / M
    second = float(np.sum(m * (np.sum((c - cen) ** 2, axis=1) + np.sum(w ** 2, axis=1) / 12.0)))
    node = _Cluster(l.min(axis=0), h.max(axis=0), M, cen, second, idx, [])
    if len(idx) > leaf_size:
        ext = node.hi - node.lo
        ax = int(np.argmax(ext))
        order = idx[np.argsort(c[:, ax], kind="stable")]
        half = len(order) // 2
        node.children = [_node(lo, hi, order[:half], leaf_size), _node(lo, hi, order[half:], leaf_size)]
    return node


def _box_distance(a: _Cluster, b: _Cluster) -> float:
    gap = np.maximum(0.0, np.maximum(a.lo - b.hi, b.lo - a.hi))
    return float(np.hypot(*gap))


def box_pair_interactions(loA, hiA, loB, hiB, s: float, rtol: float = 1e-9):
    """Exact L_s between row-aligned disjoint boxes; returns (values, errors, exact)."""
    k = len(loA)
    if k == 0:
        return np.zeros(0), np.zeros(0), True
    wA, wB = hiA - loA, hiB - loB
    VA = loA[:, None, :] + _CORNERS[None] * wA[:, None, :]
    VB = loB[:, None, :] + _CORNERS[None] * wB[:, None, :]
    PA, QA = VA, np.roll(VA, -1, axis=1)
    PB, QB = VB, np.roll(VB, -1, axis=1)
    ii, jj = np.meshgrid(np.arange(4), np.arange(4), indexing="ij")
    ii, jj = ii.ravel(), jj.ravel()
    P1 = PA[:, ii].reshape(-1, 2)
    Q1 = QA[:, ii].reshape(-1, 2)
    P2 = PB[:, jj].reshape(-1, 2)
    Q2 = QB[:, jj].reshape(-1, 2)
    w = np.einsum("ki,ki->k", _NORMALS[ii], _NORMALS[jj])
    scale = float(max(np.max(np.abs(np.concatenate([loA, hiA, loB, hiB]))), 1e-300))
    v, e, exact = edge_pair_integrals(P1, Q1, P2, Q2, s, rtol=rtol, tol_geo=1e-12 * scale)
    v = (np.tile(w, k) * v).reshape(k, 16)
    e = (np.abs(np.tile(w, k)) * e).reshape(k, 16)
    vals = -np.array([math.fsum(r) for r in v]) / s ** 2
    errs = (e.sum(axis=1) + 1e-14 * np.abs(v).sum(axis=1)) / s ** 2
    return vals, errs, exact


def cell_interaction(loA, hiA, loB, hiB, params: KernelParams, policy: QuadraturePolicy = QuadraturePolicy()) -> Estimate:
    """L_s(union of boxes A, union of boxes B) by treecode summation.

    The boxes inside each family must not overlap; boxes of A and B may
    touch but not overlap (an overlap gives an infinite interaction).
    """
    s, p = params.s, params.n + params.s
    loA, hiA, loB, hiB = (np.asarray(z, dtype=float).reshape(-1, 2) for z in (loA, hiA, loB, hiB))
    ta, tb = _build(loA, hiA), _build(loB, hiB)
    if ta is None or tb is None:
        return Estimate(0.0, 0.0, True)
    far_v, far_e = [], []
    near_a, near_b = [], []
    stack = [(ta, tb)]
    theta = policy.theta
    while stack:
        a, b = stack.pop()
        d = _box_distance(a, b)
        leaf_a, leaf_b = not a.children, not b.children
        if d > 0 and d >= theta * (a.diam + b.diam) and not (leaf_a and leaf_b):
            r = float(np.hypot(*(a.centroid - b.centroid)))
            far_v.append(a.mass * b.mass * r ** (-p))
            far_e.append(0.5 * p * (p + 1) * d ** (-p - 2) * (a.inertia * b.mass + b.inertia * a.mass))
            continue
        if leaf_a and leaf_b:
            near_a.append(int(a.leaves[0]))
            near_b.append(int(b.leaves[0]))
            continue
        if leaf_b or (not leaf_a and a.diam >= b.diam):
            stack.extend((c, b) for c in a.children)
        else:
            stack.extend((a, c) for c in b.children)
    ia, ib = np.array(near_a, dtype=int), np.array(near_b, dtype=int)
    olo = np.maximum(loA[ia], loB[ib])
    ohi = np.minimum(hiA[ia], hiB[ib])
    if len(ia) and np.any(np.all(ohi > olo, axis=1)):
        return Estimate(math.inf, math.inf, False)
    v, e, exact = box_pair_interactions(loA[ia], hiA[ia], loB[ib], hiB[ib], s, rtol=policy.target_rel_error)
    val = math.fsum(far_v) + math.fsum(v)
    err = math.fsum(far_e) + math.fsum(e)
    return Estimate(val, err, bool(exact))


def treecode_interaction(treeA, treeB, params: KernelParams, policy: QuadraturePolicy = QuadraturePolicy()) -> Estimate:
    """Bracket L_s(A, B) from two classified cell trees.

    Interior leaves under-approximate each set and Interior plus Boundary
    leaves over-approximate it; positivity of the kernel turns the two
    cell sums into a rigorous bracket. The bracket is unbounded when the
    outer approximations overlap.
    """
    from ..geometry.celltree import BOUNDARY, INTERIOR
    if treeA.dim != 2 or treeB.dim != 2:
        raise ValueError("treecode_interaction works on planar trees")
    inner_a = treeA.tag == INTERIOR
    inner_b = treeB.tag == INTERIOR
    outer_a = inner_a | (treeA.tag == BOUNDARY)
    outer_b = inner_b | (treeB.tag == BOUNDARY)
    # interiors of the two inner families must be disjoint
    lower = cell_interaction(treeA.lo[inner_a], treeA.hi[inner_a], treeB.lo[inner_b], treeB.hi[inner_b], params, policy)
    if not math.isfinite(lower.value):
        raise ValueError("sets must be disjoint")
    upper = cell_interaction(treeA.lo[outer_a], treeA.hi[outer_a], treeB.lo[outer_b], treeB.hi[outer_b], params, policy)
    if not math.isfinite(upper.value):
        return Estimate(lower.value, math.inf, False)
    return Estimate.from_bracket(max(0.0, lower.lo), upper.hi, rigorous=lower.rigorous and upper.rigorous)
