"""Fractional s-perimeter of sets in a window, and the classical perimeter.

P_s(E, Omega) = L_s(E & Omega, Omega - E)                  (local part)
              + L_s(E & Omega, R^n - (E | Omega))
              + L_s(E - Omega, Omega - E)                  (nonlocal part)

In 1D every term is a finite sum of closed-form interval interactions.
In 2D each term is reduced to boundary edge integrals, which also handles
the unbounded complement exactly, so no far-field truncation is needed.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import shapely

from .estimate import Estimate
from .geometry.sets import (FullSpace, HalfPlane, IntervalUnion, PlanarSet, Region, as_geom,
                            interval_ops)
from .kernel.interaction import DEFAULT_POLICY, complement_interaction, interaction_2d, self_perimeter
from .kernel.interval import interaction_1d, interval_interaction_array
from .kernel.params import KernelParams, QuadraturePolicy, check_s


@dataclass(frozen=True)
class PerimeterBreakdown:
    local: Estimate
    nonlocal_: Estimate
    s: float
    omega_descriptor: str = "full space"
    total: Estimate = field(default=None)

    def __post_init__(self):
        if self.total is None:
            object.__setattr__(self, "total", self.local + self.nonlocal_)

    @property
    def rigorous(self) -> bool:
        return self.total.rigorous

    def to_record(self) -> dict:
        return {"s": self.s, "local": self.local.value, "nonlocal": self.nonlocal_.value,
                "total": self.total.value, "err_local": self.local.error,
                "err_nonlocal": self.nonlocal_.error, "rigorous": self.rigorous,
                "omega": self.omega_descriptor}


def _describe(Omega) -> str:
    if Omega is None or isinstance(Omega, FullSpace):
        return "full space"
    if isinstance(Omega, IntervalUnion):
        return f"intervals {list(Omega.intervals)}"
    return repr(Omega)


def _is_null(E) -> bool:
    if E is None:
        return True
    if isinstance(E, IntervalUnion):
        return len(E) == 0
    if isinstance(E, PlanarSet):
        return E.geom.is_empty or E.area == 0.0
    return False


def frac_perimeter(E, Omega=None, params: KernelParams | float | None = None,
                   policy: QuadraturePolicy = DEFAULT_POLICY, *, s: float | None = None) -> PerimeterBreakdown:
    """Local/nonlocal decomposition of P_s(E, Omega).

    Parameters
    ----------
    E : IntervalUnion, PolygonRegion, Region or BallSet
        Bounded set (balls are polygonized).
    Omega : window, optional
        ``None`` or :class:`FullSpace` for the whole space, otherwise a
        bounded set of the same dimension as ``E``.
    params : KernelParams or float
        Kernel order; a bare float is taken as ``s``.
    """
    if params is None:
        params = s
    if not isinstance(params, KernelParams):
        check_s(params)
        dim = 1 if isinstance(E, (IntervalUnion, AppendixASet)) or isinstance(Omega, IntervalUnion) else 2
        params = KernelParams(float(params), dim)
    sv = params.s
    desc = _describe(Omega)
    zero = Estimate(0.0, 0.0, True)
    if isinstance(E, HalfPlane):
        if Omega is None or isinstance(Omega, FullSpace):
            raise ValueError("unbounded E with unbounded window")
        raise ValueError("unbounded E is not supported in 2D")
    if isinstance(E, AppendixASet):
        return E.breakdown(Omega, sv, desc)
    if _is_null(E):
        return PerimeterBreakdown(zero, zero, sv, desc)
    if params.n == 1:
        return _frac_perimeter_1d(E, Omega, sv, desc)
    full = Omega is None or isinstance(Omega, FullSpace)
    if full:
        return PerimeterBreakdown(self_perimeter(E, params, policy), zero, sv, desc)
    gE, gO = as_geom(E), as_geom(Omega)
    EO = Region(shapely.intersection(gE, gO), allow_empty=True)
    OmE = Region(shapely.difference(gO, gE), allow_empty=True)
    EmO = Region(shapely.difference(gE, gO), allow_empty=True)
    U = Region(shapely.union(gE, gO), allow_empty=True)
    local = _maybe(interaction_2d, EO, OmE, params, policy)
    nl1 = complement_interaction(EO, U, params, policy) if not _is_null(EO) else zero
    nl2 = _maybe(interaction_2d, EmO, OmE, params, policy)
    return PerimeterBreakdown(local, nl1 + nl2, sv, desc)


def _maybe(fn, A, B, params, policy):
    if _is_null(A) or _is_null(B):
        return Estimate(0.0, 0.0, True)
    return fn(A, B, params, policy, check=False)


def _frac_perimeter_1d(E, Omega, s, desc):
    cE = E.complement()
    if Omega is None or isinstance(Omega, FullSpace):
        return PerimeterBreakdown(Estimate(interaction_1d(E.intervals, cE, s)), Estimate(0.0), s, desc)
    W = list(Omega.intervals)
    EO, EmO = interval_ops(E.intervals, W)
    cEO, cEmO = interval_ops(cE, W)
    local = interaction_1d(EO, cEO, s)
    nonlocal_ = math.fsum([interaction_1d(EO, cEmO, s), interaction_1d(EmO, cEO, s)])
    return PerimeterBreakdown(Estimate(local), Estimate(nonlocal_), s, desc)


# ---------------------------------------------------------------------------
# the interval-union example E = union_k (a^(2k+1), a^(2k))

def appendixA_set(a: float, K: int) -> IntervalUnion:
    """First K intervals (a^(2k+1), a^(2k)), k = 1..K."""
    if not 0.0 < a < 1.0:
        raise ValueError("a must lie in (0,1)")
    return IntervalUnion([(a ** (2 * k + 1), a ** (2 * k)) for k in range(1, K + 1)])


def appendixA_lower_bound(a: float, s: float) -> float:
    """Explicit lower bound on (1 - s) P_s(E) from the j = k pairs."""
    r = a ** (2 * (1 - s))
    p = 1 - s
    return (r * (1 - a) ** p + a ** p * (1 - a) ** p - a ** p * (1 - a * a) ** p) / (s * (1 - r))


@dataclass(frozen=True)
class AppendixAResult:
    estimate: Estimate
    exterior: float
    I1: float
    I2: float
    I3: float
    tail: float

    @property
    def value(self):
        return self.estimate.value


def appendixA_perimeter(a: float, s: float, K: int | None = None, D: int = 60, detail: bool = False):
    """P_s(E) on the line for E = union_{k>=1} (a^(2k+1), a^(2k)).

    With Omega = (-1, 1) the value splits as

        ext + I1 + I2 + I3,

    the interactions of E with the complement of Omega, with (-1, 0), with
    the gaps (a^(2j), a^(2j-1)) and with (a, 1). The gap pairs (k, j) are
    grouped by the offset d = j - k: since the pair (k + m, j + m) is the
    pair (k, j) scaled by a^(2m), each offset contributes an exact
    geometric series with ratio r = a^(2(1-s)). Offsets |d| > D, levels
    k > K of ext and I3, and the far part of I1 are bounded by geometric
    tails, giving a rigorous bracket (up to a 1e-13 relative allowance
    for rounding).
    """
    s = check_s(s)
    if not 0.0 < a < 1.0:
        raise ValueError("a must lie in (0,1)")
    la = -math.log(a)
    kmax = int(280 * math.log(10) / (2 * la))           # keep a^(2k) far from underflow
    K = min(kmax, 200) if K is None else K
    if K < 1 or K > kmax:
        raise ValueError(f"K must lie in [1, {kmax}] for a = {a}")
    p = 1.0 - s
    r = a ** (2 * p)
    a2 = a * a
    k = np.arange(1, K + 1, dtype=float)
    lo, hi = a ** (2 * k + 1), a ** (2 * k)

    ext = math.fsum(interval_interaction_array(lo, hi, 1.0, math.inf, s)) \
        + math.fsum(interval_interaction_array(-hi, -lo, 1.0, math.inf, s))
    I3 = math.fsum(interval_interaction_array(lo, hi, a, 1.0, s))
    I1 = math.fsum(interval_interaction_array(-1.0, 0.0, lo, hi, s))
    # I1 beyond level K: the k-th term is r^(k-1) L(I_2, (-a^(-2(k-1)), 0))
    len2 = a * a - a ** 3
    L_half = float(interval_interaction_array(-hi[0], -lo[0], 0.0, math.inf, s))   # L(I_2, (-inf, 0))
    I1_tail_hi = r ** K / (1 - r) * L_half
    I1_tail_gap = len2 / s * a2 ** K / (1 - a2)        # room between the two I1 tail bounds

    # I2 by offsets d = j - k; the first pair on each diagonal has k = max(1, 1 - d)
    d = np.arange(-D, D + 1)
    k0 = np.maximum(1, 1 - d).astype(float)
    j0 = k0 + d
    plo, phi = a ** (2 * k0 + 1), a ** (2 * k0)
    glo, ghi = a ** (2 * j0), a ** (2 * j0 - 1)
    left = d > 0                                         # gap below the piece
    f = np.where(left,
                 interval_interaction_array(np.where(left, glo, 0.0), np.where(left, ghi, plo), plo, phi, s),
                 interval_interaction_array(plo, phi, np.where(left, phi, glo), np.where(left, phi + 1, ghi), s))
    I2 = math.fsum(f) / (1 - r)

    c_up = la / (s * (1 - a) ** s * a ** (1 + s))        # j >= k + 2 coefficient
    tails = [
        2.0 * a ** (2 * K + 2) / ((1 + a) * s * (1 - a2) ** s),                 # ext, k > K
        la / (s * (1 - a) ** s) * a ** (2 * K + 2) / (1 - a2),                   # I3, k > K
        c_up * r / (1 - r) * a ** (2 * (D + 1)) / (1 - a2),                      # I2, d > D
        (1 - a) / (s * (1 - a2) ** s) * r / (1 - r) * a ** (2 * (D + 1)) / (1 - a2),  # I2, d < -D
    ]
    low = math.fsum([ext, I1, I2, I3, I1_tail_hi - I1_tail_gap])
    high = math.fsum([ext, I1, I2, I3, I1_tail_hi] + tails)
    slack = 1e-13 * high
    est = Estimate.from_bracket(low - slack, high + slack, rigorous=True)
    if detail:
        return AppendixAResult(est, ext, I1 + I1_tail_hi, I2, I3, high - low)
    return est


@dataclass(frozen=True)
class AppendixASet:
    """The infinite union of (a^(2k+1), a^(2k)), k >= 1, kept symbolic."""

    a: float

    def __post_init__(self):
        if not 0.0 < self.a < 1.0:
            raise ValueError("a must lie in (0,1)")

    def truncated(self, K: int) -> IntervalUnion:
        return appendixA_set(self.a, K)

    def boundary_points(self, eps: float = 1e-12) -> np.ndarray:
        """0 and every a^m (m >= 2) above eps."""
        m = np.arange(2, 2 + jump_count(self.a, eps))
        return np.concatenate([[0.0], self.a ** m])

    def breakdown(self, Omega, s: float, desc: str) -> PerimeterBreakdown:
        res = appendixA_perimeter(self.a, s, detail=True)
        tot = res.estimate
        if Omega is None or isinstance(Omega, FullSpace):
            return PerimeterBreakdown(tot, Estimate(0.0), s, desc)
        W = list(getattr(Omega, "intervals", []))
        if W != [(-1.0, 1.0)]:
            raise ValueError("the infinite example set supports the window (-1, 1) only")
        # E sits inside the window, so the nonlocal part is the interaction with |x| >= 1
        nl = Estimate(res.exterior, tot.error, True)
        local = Estimate(tot.value - res.exterior, tot.error, True)
        return PerimeterBreakdown(local, nl, s, desc, total=tot)

    def to_json(self) -> dict:
        K = 40
        return {"kind": "intervals", "items": [list(iv) for iv in self.truncated(K).intervals],
                "generator": {"name": "appendixA", "a": self.a}}


def appendixA_self_similar(a: float, s: float, K: int) -> Estimate:
    """Independent bracket for the same P_s(E) from self-similarity.

    With E_K the first K intervals and R = E - E_K = a^(2K) E,
    P_s(E) = P_s(E_K) - L_s(E_K, R) + L_s(R, cE), where
    0 <= L_s(R, cE) <= P_s(R) = a^(2K(1-s)) P_s(E) and L_s(E_K, R) is
    bracketed by the first K more intervals of R and the hull (0, a^(2K+1)).
    """
    s = check_s(s)
    EK = appendixA_set(a, K)
    P_EK = interaction_1d(EK.intervals, EK.complement(), s)
    R_part = appendixA_set(a, 2 * K).intervals[:K]   # sorted ascending: levels K+1..2K
    L_lo = interaction_1d(EK.intervals, R_part, s)
    L_hi = L_lo + interaction_1d(EK.intervals, [(0.0, a ** (4 * K + 2))], s)
    q = a ** (2 * K * (1 - s))
    lo = P_EK - L_hi
    hi = (P_EK - L_lo) / (1 - q)
    return Estimate.from_bracket(lo * (1 - 1e-13), hi * (1 + 1e-13))


# ---------------------------------------------------------------------------
# classical perimeter

class BoundaryEdgeWarning(UserWarning):
    """An edge of E lies on the boundary of the window."""


def _window_geom(Omega, E):
    if isinstance(Omega, HalfPlane):
        lo, hi = E.bbox()
        pad = 1.0 + float(np.max(np.asarray(hi) - np.asarray(lo)))
        big = shapely.box(lo[0] - pad, lo[1] - pad, hi[0] + pad, hi[1] + pad)
        n, c = Omega.normal, Omega.offset
        # clip the big box by x.n <= c
        from shapely.geometry import Polygon
        t = np.array([-n[1], n[0]])
        R = 10.0 * (pad + float(np.max(np.abs(np.concatenate([lo, hi])))) + abs(c))
        p0 = n * c
        half = Polygon([p0 + R * t, p0 - R * t, p0 - R * t - R * n, p0 + R * t - R * n])
        return shapely.intersection(big, half)
    return as_geom(Omega)


def classical_perimeter(E, Omega=None, return_flag: bool = False):
    """Length of the boundary of E inside Omega.

    Edges lying on the boundary of Omega count half their length and
    raise a :class:`BoundaryEdgeWarning`; ``return_flag=True`` returns
    ``(length, on_boundary_length)`` instead of just the length.
    """
    gE = as_geom(E)
    bE = gE.boundary
    if Omega is None or isinstance(Omega, FullSpace):
        length, on = bE.length, 0.0
    else:
        gO = _window_geom(Omega, E)
        inside = shapely.intersection(bE, gO).length
        on = shapely.intersection(bE, gO.boundary).length
        length = inside - 0.5 * on
    if on > 0:
        warnings.warn("an edge of E lies on the window boundary; counted with weight 1/2",
                      BoundaryEdgeWarning, stacklevel=2)
    return (length, on) if return_flag else length


def jump_count(a: float, eps: float) -> int:
    """Number of boundary points a^m (m >= 2) of the example set above ``eps``.

    This counts the jumps of the indicator function on (eps, 1); it grows
    without bound as eps -> 0, which is why the set has infinite classical
    perimeter.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    L = math.log(eps) / math.log(a)
    return max(0, math.ceil(L) - 2)


__all__ = ["PerimeterBreakdown", "frac_perimeter", "appendixA_set", "appendixA_perimeter",
           "appendixA_lower_bound", "AppendixASet", "appendixA_self_similar", "classical_perimeter",
           "BoundaryEdgeWarning", "jump_count"]
