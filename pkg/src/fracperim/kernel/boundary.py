"""Planar interaction integrals reduced to polygon boundaries.

For bounded planar sets A, B with |A ∩ B| = 0 and piecewise linear
boundaries, two applications of the divergence theorem (using
div_y[(y-x)|y-x|^-(2+s)] = -s|y-x|^-(2+s) and
(y-x)|y-x|^-(2+s) = grad_x |x-y|^-s / s) give

    L_s(A, B) = -(1/s^2) * sum_{e in dA} sum_{f in dB} (nu_e . nu_f) I_s(e, f),
    I_s(e, f) = int_e int_f |x - y|^-s dsigma(x) dsigma(y),

with outward unit normals nu. The same identity with B replaced by the
complement of a bounded set C containing A reads
L_s(A, C^c) = +(1/s^2) * sum (nu_e . nu_f) I_s(e, f) over e in dA, f in dC.

I_s is weakly singular only when the two edges touch. Those cases are
handled exactly (collinear edges) or by a Duffy split that factors out
the radial integral (edges sharing an endpoint). Everything else is
tensor Gauss-Legendre with a Bernstein-ellipse remainder bound, refined
by bisection until the bound meets the requested relative accuracy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ..estimate import Estimate

# candidate Bernstein ellipse parameters and Gauss orders
_RHOS = np.array([1.15, 1.3, 1.5, 1.8, 2.2, 3.0, 4.0, 6.0, 9.0, 14.0, 22.0])
_ORDERS = (4, 8, 12, 16, 24, 32)
_CHUNK = 200_000


@lru_cache(maxsize=None)
def gauss_legendre(q: int):
    x, w = np.polynomial.legendre.leggauss(q)
    return x, w


@dataclass(frozen=True)
class Segments:
    """Oriented boundary edges with outward unit normals."""

    P: np.ndarray
    Q: np.ndarray

    @classmethod
    def from_rings(cls, rings) -> "Segments":
        """Edges of closed rings oriented with the region on the left.

        Outer rings must be counterclockwise and holes clockwise; the
        outward normal of edge P->Q is then the tangent rotated by -90deg.
        """
        P, Q = [], []
        for ring in rings:
            r = np.asarray(ring, dtype=float)
            if len(r) >= 2 and np.array_equal(r[0], r[-1]):
                r = r[:-1]
            P.append(r)
            Q.append(np.roll(r, -1, axis=0))
        if not P:
            z = np.zeros((0, 2))
            return cls(z, z.copy())
        return cls(np.concatenate(P), np.concatenate(Q))

    def __len__(self):
        return len(self.P)

    @property
    def lengths(self) -> np.ndarray:
        return np.hypot(*(self.Q - self.P).T)

    @property
    def normals(self) -> np.ndarray:
        d = self.Q - self.P
        L = np.hypot(d[:, 0], d[:, 1])
        return np.stack([d[:, 1] / L, -d[:, 0] / L], axis=1)

    def reversed(self) -> "Segments":
        return Segments(self.Q.copy(), self.P.copy())

    def concat(self, other: "Segments") -> "Segments":
        return Segments(np.concatenate([self.P, other.P]), np.concatenate([self.Q, other.Q]))

    @property
    def scale(self) -> float:
        if len(self) == 0:
            return 1.0
        pts = np.concatenate([self.P, self.Q])
        return float(max(np.ptp(pts[:, 0]), np.ptp(pts[:, 1]), 1e-300))


# ---------------------------------------------------------------------------
# vectorized planar predicates

def _cross(a, b):
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def point_segment_distance(X, P, Q):
    d = Q - P
    dd = np.einsum("...i,...i->...", d, d)
    t = np.einsum("...i,...i->...", X - P, d) / np.where(dd > 0, dd, 1.0)
    t = np.clip(np.where(dd > 0, t, 0.0), 0.0, 1.0)
    r = X - P - t[..., None] * d
    return np.hypot(r[..., 0], r[..., 1])


def segment_distance(P1, Q1, P2, Q2):
    """Minimum distance between segments P1Q1 and P2Q2 (vectorized)."""
    dist = np.minimum(
        np.minimum(point_segment_distance(P1, P2, Q2), point_segment_distance(Q1, P2, Q2)),
        np.minimum(point_segment_distance(P2, P1, Q1), point_segment_distance(Q2, P1, Q1)),
    )
    d1, d2 = Q1 - P1, Q2 - P2
    o1 = _cross(d1, P2 - P1)
    o2 = _cross(d1, Q2 - P1)
    o3 = _cross(d2, P1 - P2)
    o4 = _cross(d2, Q1 - P2)
    crossing = (o1 * o2 < 0) & (o3 * o4 < 0)
    return np.where(crossing, 0.0, dist)


def _max_endpoint_distance(P1, Q1, P2, Q2):
    return np.maximum.reduce([
        np.hypot(*(P1 - P2).T), np.hypot(*(P1 - Q2).T),
        np.hypot(*(Q1 - P2).T), np.hypot(*(Q1 - Q2).T)])


# ---------------------------------------------------------------------------
# Bernstein ellipse remainder bounds

def _gauss_bound_factor(M, q):
    """min over rho of (64/15) M(rho) rho^-2q / (rho^2 - 1); M has shape (k, nrho)."""
    r = _RHOS[None, :]
    with np.errstate(over="ignore", invalid="ignore"):
        b = (64.0 / 15.0) * M * r ** (-2.0 * q) / (r * r - 1.0)
    b = np.where(np.isfinite(b), b, np.inf)
    return b.min(axis=1)


def _sup_modulus(P1, Q1, P2, Q2, s):
    """Bound on |g| over the Bernstein ellipses in the first segment's parameter.

    Returns array (k, nrho). The first segment is extended to half-length
    a*h and the second is taken as real; |Re(w.w)| >= D^2 - (b h)^2.
    """
    c = 0.5 * (P1 + Q1)
    hvec = 0.5 * (Q1 - P1)
    h = np.hypot(hvec[:, 0], hvec[:, 1])
    out = np.empty((len(P1), len(_RHOS)))
    for j, rho in enumerate(_RHOS):
        a = 0.5 * (rho + 1.0 / rho)
        b = 0.5 * (rho - 1.0 / rho)
        D = segment_distance(c - a * hvec, c + a * hvec, P2, Q2)
        gap = D * D - (b * h) ** 2
        with np.errstate(divide="ignore", invalid="ignore"):
            out[:, j] = np.where(gap > 0, gap ** (-0.5 * s), np.inf)
    return out


def _tensor_gauss(P1, Q1, P2, Q2, s, q):
    x, w = gauss_legendre(q)
    c1, h1 = 0.5 * (P1 + Q1), 0.5 * (Q1 - P1)
    c2, h2 = 0.5 * (P2 + Q2), 0.5 * (Q2 - P2)
    X = c1[:, None, :] + x[None, :, None] * h1[:, None, :]
    Y = c2[:, None, :] + x[None, :, None] * h2[:, None, :]
    diff = X[:, :, None, :] - Y[:, None, :, :]
    r2 = np.einsum("kijd,kijd->kij", diff, diff)
    vals = r2 ** (-0.5 * s)
    I = np.einsum("kij,i,j->k", vals, w, w)
    L1 = np.hypot(h1[:, 0], h1[:, 1])
    L2 = np.hypot(h2[:, 0], h2[:, 1])
    return I * L1 * L2


# ---------------------------------------------------------------------------
# exact singular cases

def _collinear(P1, Q1, P2, Q2, s):
    """I_s for edges on a common line (overlapping, touching or apart)."""
    t = Q1 - P1
    L1 = np.hypot(t[:, 0], t[:, 1])
    t = t / L1[:, None]
    a2 = np.einsum("ki,ki->k", P2 - P1, t)
    b2 = np.einsum("ki,ki->k", Q2 - P1, t)
    lo2, hi2 = np.minimum(a2, b2), np.maximum(a2, b2)
    F = lambda z: np.abs(z) ** (2.0 - s) / ((1.0 - s) * (2.0 - s))
    # int_0^L1 int_lo2^hi2 |u - v|^-s dv du
    return F(L1 - lo2) - F(-lo2) - F(L1 - hi2) + F(-hi2)


def _point_segment_1d(X, Y0, Y1, s, rtol, max_depth=60):
    """int_0^1 |X - Y(w)|^-s dw with Y(w) = Y0 + w (Y1 - Y0); returns (value, bound).

    Vectorized over rows; each row is adaptively bisected until its
    Gauss remainder bound drops below ``rtol`` times a lower bound for
    the integral.
    """
    k = len(X)
    val = np.zeros(k)
    err = np.zeros(k)
    idx = np.arange(k)
    w0 = np.zeros(k)
    w1 = np.ones(k)
    depth = 0
    while len(idx):
        A = Y0[idx] + w0[:, None] * (Y1[idx] - Y0[idx])
        B = Y0[idx] + w1[:, None] * (Y1[idx] - Y0[idx])
        Xi = X[idx]
        width = w1 - w0
        hvec = 0.5 * (B - A)
        h = np.hypot(hvec[:, 0], hvec[:, 1])
        c = 0.5 * (A + B)
        M = np.empty((len(idx), len(_RHOS)))
        for j, rho in enumerate(_RHOS):
            a = 0.5 * (rho + 1.0 / rho)
            b = 0.5 * (rho - 1.0 / rho)
            D = point_segment_distance(Xi, c - a * hvec, c + a * hvec)
            gap = D * D - (b * h) ** 2
            with np.errstate(divide="ignore", invalid="ignore"):
                M[:, j] = np.where(gap > 0, gap ** (-0.5 * s), np.inf)
        far = np.maximum(np.hypot(*(Xi - A).T), np.hypot(*(Xi - B).T))
        floor = width * far ** (-s)
        done = np.zeros(len(idx), dtype=bool)
        for q in _ORDERS:
            bnd = 0.5 * width * _gauss_bound_factor(M, q)
            ok = (~done) & (bnd <= rtol * floor)
            if depth >= max_depth:
                ok = ~done
            if ok.any():
                x, wq = gauss_legendre(q)
                pts = c[ok][:, None, :] + x[None, :, None] * hvec[ok][:, None, :]
                r = np.hypot(*(Xi[ok][:, None, :] - pts).transpose(2, 0, 1))
                v = 0.5 * width[ok] * np.einsum("kj,j->k", r ** (-s), wq)
                np.add.at(val, idx[ok], v)
                bb = bnd[ok]
                np.add.at(err, idx[ok], np.where(np.isfinite(bb), bb, np.abs(v)))
                done |= ok
        rest = ~done
        mid = 0.5 * (w0[rest] + w1[rest])
        idx = np.concatenate([idx[rest], idx[rest]])
        w0, w1 = np.concatenate([w0[rest], mid]), np.concatenate([mid, w1[rest]])
        depth += 1
    return val, err


def _corner(O, E1, E2, s, rtol):
    """I_s for edges O->E1 and O->E2 sharing the endpoint O (not collinear).

    Splitting the parameter rectangle along its diagonal and substituting
    v = (L2/L1) u w (resp. u = (L1/L2) v w) factors out int_0^L u^(1-s) du.
    """
    d1, d2 = E1 - O, E2 - O
    L1 = np.hypot(d1[:, 0], d1[:, 1])
    L2 = np.hypot(d2[:, 0], d2[:, 1])
    a, b = d1 / L1[:, None], d2 / L2[:, None]
    zero = np.zeros_like(a)
    # part 1: int_0^1 |a - w (L2/L1) b|^-s dw
    j1, e1 = _point_segment_1d(a, zero, (L2 / L1)[:, None] * b, s, rtol)
    j2, e2 = _point_segment_1d(b, zero, (L1 / L2)[:, None] * a, s, rtol)
    c1 = (L2 / L1) * L1 ** (2.0 - s) / (2.0 - s)
    c2 = (L1 / L2) * L2 ** (2.0 - s) / (2.0 - s)
    return c1 * j1 + c2 * j2, c1 * e1 + c2 * e2


# ---------------------------------------------------------------------------
# driver

class _Accumulator:
    def __init__(self, npairs):
        self.val = np.zeros(npairs)
        self.err = np.zeros(npairs)
        self.mag = np.zeros(npairs)

    def add(self, idx, v, e):
        np.add.at(self.val, idx, v)
        np.add.at(self.err, idx, e)
        np.add.at(self.mag, idx, np.abs(v))


def edge_pair_integrals(P1, Q1, P2, Q2, s, rtol=1e-9, max_depth=40, tol_geo=None):
    """I_s(e_k, f_k) for each row k, with rigorous remainder bounds.

    Returns ``(values, errors, exact)`` where ``exact`` is false if some
    piece hit the refinement cap and its bound is only the size of the
    piece. Crossing edges raise ``ValueError`` since they cannot bound
    two disjoint regions.
    """
    P1, Q1, P2, Q2 = (np.asarray(z, dtype=float).reshape(-1, 2) for z in (P1, Q1, P2, Q2))
    n = len(P1)
    acc = _Accumulator(n)
    if n == 0:
        return acc.val, acc.err, True
    if tol_geo is None:
        pts = np.concatenate([P1, Q1, P2, Q2])
        tol_geo = 1e-12 * max(float(np.ptp(pts[:, 0])), float(np.ptp(pts[:, 1])), 1e-300)
    exact = True
    idx = np.arange(n)
    depth = 0
    while len(idx):
        A0, A1, B0, B1 = P1, Q1, P2, Q2
        dA, dB = A1 - A0, B1 - B0
        LA = np.hypot(dA[:, 0], dA[:, 1])
        LB = np.hypot(dB[:, 0], dB[:, 1])
        Lmax = np.maximum(LA, LB)
        dist = segment_distance(A0, A1, B0, B1)
        # collinear: parallel and the second edge lies on the first's line
        par = np.abs(_cross(dA, dB)) <= 1e-12 * LA * LB
        online = (np.abs(_cross(dA, B0 - A0)) <= tol_geo * LA) & (np.abs(_cross(dA, B1 - A0)) <= tol_geo * LA)
        col = par & online & (dist <= 2.0 * Lmax)
        ends = [(A0, B0), (A0, B1), (A1, B0), (A1, B1)]
        shared = np.zeros(len(idx), dtype=bool)
        for X, Y in ends:
            shared |= np.hypot(*(X - Y).T) <= tol_geo
        touching = (dist <= tol_geo) & ~col
        corner = touching & shared
        tjunc = touching & ~shared
        sep = ~col & ~touching

        if col.any():
            v = _collinear(A0[col], A1[col], B0[col], B1[col], s)
            acc.add(idx[col], v, 1e-14 * np.abs(v))
        if corner.any():
            c = np.flatnonzero(corner)
            O, E1, E2 = _corner_frame(A0[c], A1[c], B0[c], B1[c], tol_geo)
            v, e = _corner(O, E1, E2, s, rtol)
            acc.add(idx[c], v, e + 1e-14 * np.abs(v))

        new = []
        if tjunc.any():
            t = np.flatnonzero(tjunc)
            new.append(_split_tjunction(idx[t], A0[t], A1[t], B0[t], B1[t], tol_geo))
        if sep.any():
            k = np.flatnonzero(sep)
            sub = _separated(idx[k], A0[k], A1[k], B0[k], B1[k], s, rtol, acc,
                             force=depth >= max_depth)
            if sub is not None:
                new.append(sub)
            if depth >= max_depth:
                exact = False
        if not new:
            break
        idx = np.concatenate([z[0] for z in new])
        P1 = np.concatenate([z[1] for z in new])
        Q1 = np.concatenate([z[2] for z in new])
        P2 = np.concatenate([z[3] for z in new])
        Q2 = np.concatenate([z[4] for z in new])
        depth += 1
    return acc.val, acc.err, exact


def _corner_frame(A0, A1, B0, B1, tol):
    """Return the shared vertex O and the two far endpoints."""
    O = np.empty_like(A0)
    E1 = np.empty_like(A0)
    E2 = np.empty_like(A0)
    done = np.zeros(len(A0), dtype=bool)
    for X, Xo, Y, Yo in ((A0, A1, B0, B1), (A0, A1, B1, B0), (A1, A0, B0, B1), (A1, A0, B1, B0)):
        m = (~done) & (np.hypot(*(X - Y).T) <= tol)
        O[m], E1[m], E2[m] = X[m], Xo[m], Yo[m]
        done |= m
    return O, E1, E2


def _split_tjunction(idx, A0, A1, B0, B1, tol):
    """Split the edge whose interior contains an endpoint of the other."""
    out = [], [], [], [], []
    handled = np.zeros(len(idx), dtype=bool)
    for X in (B0, B1):
        m = (~handled) & (point_segment_distance(X, A0, A1) <= tol)
        if m.any():
            _push(out, idx[m], A0[m], X[m], B0[m], B1[m])
            _push(out, idx[m], X[m], A1[m], B0[m], B1[m])
            handled |= m
    for X in (A0, A1):
        m = (~handled) & (point_segment_distance(X, B0, B1) <= tol)
        if m.any():
            _push(out, idx[m], A0[m], A1[m], B0[m], X[m])
            _push(out, idx[m], A0[m], A1[m], X[m], B1[m])
            handled |= m
    if not handled.all():
        raise ValueError("sets must be disjoint (boundary edges cross)")
    return tuple(np.concatenate(z) if z else np.zeros((0, 2)) for z in out)


def _push(out, *cols):
    for lst, col in zip(out, cols):
        lst.append(col)


def _separated(idx, A0, A1, B0, B1, s, rtol, acc, force=False):
    LA = np.hypot(*(A1 - A0).T)
    LB = np.hypot(*(B1 - B0).T)
    Mu = _sup_modulus(A0, A1, B0, B1, s)
    Mv = _sup_modulus(B0, B1, A0, A1, s)
    floor = LA * LB * _max_endpoint_distance(A0, A1, B0, B1) ** (-s)
    done = np.zeros(len(idx), dtype=bool)
    for q in _ORDERS:
        bnd = 0.5 * LA * LB * (_gauss_bound_factor(Mu, q) + _gauss_bound_factor(Mv, q))
        ok = (~done) & (bnd <= rtol * floor)
        if force and q == _ORDERS[-1]:
            ok = ~done
        if ok.any():
            v = _tensor_gauss(A0[ok], A1[ok], B0[ok], B1[ok], s, q)
            b = bnd[ok]
            b = np.where(np.isfinite(b), b, np.abs(v) + floor[ok])
            acc.add(idx[ok], v, b + 1e-14 * np.abs(v))
            done |= ok
    rest = ~done
    if not rest.any():
        return None
    # bisect the longer edge
    splitA = LA[rest] >= LB[rest]
    a0, a1, b0, b1, ii = A0[rest], A1[rest], B0[rest], B1[rest], idx[rest]
    ma = 0.5 * (a0 + a1)
    mb = 0.5 * (b0 + b1)
    out = [], [], [], [], []
    sa = splitA
    _push(out, ii[sa], a0[sa], ma[sa], b0[sa], b1[sa])
    _push(out, ii[sa], ma[sa], a1[sa], b0[sa], b1[sa])
    sb = ~splitA
    _push(out, ii[sb], a0[sb], a1[sb], b0[sb], mb[sb])
    _push(out, ii[sb], a0[sb], a1[sb], mb[sb], b1[sb])
    return tuple(np.concatenate(z) for z in out)


# ---------------------------------------------------------------------------
# assembled boundary sums

def boundary_sum(SA: Segments, SB: Segments, s: float, rtol: float = 1e-9,
                 symmetric: bool = False, max_depth: int = 40) -> Estimate:
    """sum_{e in SA, f in SB} (nu_e . nu_f) I_s(e, f) with a rigorous bound.

    With ``symmetric=True`` SA and SB must be the same edge list and only
    the upper triangle of pairs is evaluated.
    """
    m, k = len(SA), len(SB)
    if m == 0 or k == 0:
        return Estimate(0.0, 0.0, True)
    NA, NB = SA.normals, SB.normals
    scale = max(SA.scale, SB.scale)
    tol_geo = 1e-12 * scale
    vals, errs = [], []
    exact = True
    if symmetric:
        ii, jj = np.triu_indices(m)
    else:
        ii, jj = np.meshgrid(np.arange(m), np.arange(k), indexing="ij")
        ii, jj = ii.ravel(), jj.ravel()
    for start in range(0, len(ii), _CHUNK):
        i = ii[start:start + _CHUNK]
        j = jj[start:start + _CHUNK]
        v, e, ex = edge_pair_integrals(SA.P[i], SA.Q[i], SB.P[j], SB.Q[j], s,
                                       rtol=rtol, max_depth=max_depth, tol_geo=tol_geo)
        w = np.einsum("ki,ki->k", NA[i], NB[j])
        if symmetric:
            w = np.where(i == j, w, 2.0 * w)
        vals.append(w * v)
        errs.append(np.abs(w) * e)
        exact &= ex
    vals = np.concatenate(vals)
    errs = np.concatenate(errs)
    total = math.fsum(vals)
    # rounding allowance for the summation and the kernel evaluations
    err = math.fsum(errs) + 1e-14 * math.fsum(np.abs(vals))
    return Estimate(total, err, exact)
