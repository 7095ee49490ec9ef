"""Box-counting and Minkowski dimensions, and the s-perimeter threshold Dim_F."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import shapely

from .estimate import Estimate
from .geometry.sets import FullSpace, IntervalUnion, PlanarSet, Polyline, as_geom
from .kernel.interaction import interaction_2d, self_perimeter
from .kernel.params import KernelParams, QuadraturePolicy
from .geometry.maps import apply_map


# ---------------------------------------------------------------------------
# box counting

def _as_segments(G):
    """(P, Q) segment arrays, or (X, None) for a point cloud."""
    if isinstance(G, Polyline):
        return G.segments()
    if isinstance(G, PlanarSet):
        S = G.segments()
        return S.P, S.Q
    X = np.asarray(G, dtype=float)
    if X.ndim != 2 or X.shape[1] != 2 or len(X) == 0:
        raise ValueError("expected a nonempty (N, 2) point cloud, a polyline or a planar set")
    return X, None


def occupied_cells(G, delta: float, origin=(0.0, 0.0), touch: str = "length") -> np.ndarray:
    """Integer indices of the half-open delta-grid cells meeting G.

    With ``touch="length"`` a cell counts when G crosses it along a piece of
    positive length (so the unit segment occupies 3 cells at delta = 1/3);
    ``touch="any"`` also counts cells met in a single point.
    """
    if touch not in ("length", "any"):
        raise ValueError("touch must be 'length' or 'any'")
    if not delta > 0:
        raise ValueError("delta must be positive")
    P, Q = _as_segments(G)
    o = np.asarray(origin, dtype=float)
    if Q is None:
        return np.unique(np.floor((P - o) / delta).astype(np.int64), axis=0)
    A = (P - o) / delta
    B = (Q - o) / delta
    d = B - A
    # parameters where the segment crosses a grid line, plus both ends
    ts = [np.zeros(len(A)), np.ones(len(A))]
    owners = [np.arange(len(A)), np.arange(len(A))]
    for ax in (0, 1):
        lo = np.minimum(A[:, ax], B[:, ax])
        hi = np.maximum(A[:, ax], B[:, ax])
        first = np.floor(lo) + 1
        cnt = np.maximum(0, np.ceil(hi) - first).astype(np.int64)
        if cnt.sum() == 0:
            continue
        own = np.repeat(np.arange(len(A)), cnt)
        offs = np.arange(cnt.sum()) - np.repeat(np.cumsum(cnt) - cnt, cnt)
        lines = first[own] + offs
        t = (lines - A[own, ax]) / d[own, ax]
        ts.append(t)
        owners.append(own)
    t = np.concatenate(ts)
    own = np.concatenate(owners)
    order = np.lexsort((t, own))
    t, own = t[order], own[order]
    same = own[1:] == own[:-1]
    tm = 0.5 * (t[1:] + t[:-1])[same]
    om = own[1:][same]
    pts = [A[om] + tm[:, None] * d[om]]
    if touch == "any":
        pts += [A, B]
    else:
        pts.append(A[np.all(d == 0, axis=1)])     # degenerate segments are points
    pts = np.concatenate(pts)
    return np.unique(np.floor(pts).astype(np.int64), axis=0)


def box_count(G, delta: float, origin=(0.0, 0.0), touch: str = "length") -> int:
    """Number of cells of the axis-aligned delta-grid meeting G."""
    return int(len(occupied_cells(G, delta, origin, touch)))


@dataclass
class BoxCountSeries:
    deltas: np.ndarray
    counts: np.ndarray
    fit: tuple = field(default=None)    # (slope, intercept, residual)

    def __post_init__(self):
        self.deltas = np.asarray(self.deltas, dtype=float)
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if self.fit is None and len(self.deltas) >= 2:
            self.fit = _loglog_fit(self.deltas, self.counts)

    def to_csv_rows(self):
        return [("delta", "count")] + [(float(d), int(c)) for d, c in zip(self.deltas, self.counts)]


def _loglog_fit(deltas, counts):
    x = -np.log(deltas)
    y = np.log(counts)
    A = np.stack([x, np.ones_like(x)], axis=1)
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    res = y - A @ coef
    return float(coef[0]), float(coef[1]), float(np.sqrt(np.mean(res ** 2)))


def box_count_series(G, deltas, origin=(0.0, 0.0)) -> BoxCountSeries:
    deltas = np.sort(np.asarray(deltas, dtype=float))[::-1]
    return BoxCountSeries(deltas, [box_count(G, d, origin) for d in deltas])


def minkowski_dimension_boxes(series: BoxCountSeries):
    """Least-squares slope of log N against -log delta, with diagnostics."""
    d, c = series.deltas, series.counts
    if len(d) < 2 or np.all(c == c[0]):
        raise ValueError("degenerate box-count series")
    if len(d) < 4 or math.log10(d.max() / d.min()) < 2:
        warnings.warn("fewer than 4 scales or less than 2 decades of delta", RuntimeWarning, stacklevel=2)
    slope, intercept, resid = _loglog_fit(d, c)
    x, y = -np.log(d), np.log(c)
    local = np.diff(y) / np.diff(x)
    return slope, {"intercept": intercept, "residual": resid, "local_slopes": local.tolist()}


def delta_grid(spec: str) -> np.ndarray:
    """Parse ``"3^-1..3^-6"`` (or a comma list of numbers) into deltas."""
    spec = spec.strip()
    if ".." in spec:
        a, b = spec.split("..")
        ba, ea = a.split("^")
        bb, eb = b.split("^")
        if ba != bb:
            raise ValueError("both ends must use the same base")
        e0, e1 = int(ea), int(eb)
        step = 1 if e1 >= e0 else -1
        return np.array([float(ba) ** e for e in range(e0, e1 + step, step)])
    return np.array([float(v) for v in spec.split(",")])


# ---------------------------------------------------------------------------
# covering/packing sandwich

def separated_subset(G, delta: float, spacing: float | None = None) -> tuple[int, float]:
    """Greedy maximal set of sample points on G with pairwise distances > 2 delta.

    Returns ``(size, h)`` with h the sample spacing. The balls B_delta
    around the chosen points are disjoint, so size <= P(G, delta); and
    every point of G lies within 2 delta + h/2 of a chosen point.
    """
    P, Q = _as_segments(G)
    h = spacing or delta / 8.0
    if Q is None:
        X = P
        h = 0.0
    else:
        L = np.hypot(*(Q - P).T)
        m = np.maximum(1, np.ceil(L / h).astype(int))
        t = np.concatenate([np.arange(k + 1) / k for k in m])
        rep = np.repeat(np.arange(len(P)), m + 1)
        X = P[rep] + t[:, None] * (Q - P)[rep]
        h = float(np.max(L / m))
    cell = 2.0 * delta
    grid: dict = {}
    count = 0
    r2 = (2.0 * delta) ** 2
    keys = np.floor(X / cell).astype(np.int64)
    for (x, y), (i, j) in zip(X.tolist(), keys.tolist()):
        ok = True
        for di in (-1, 0, 1):
            for dj in (-1, 0, 1):
                for (u, v) in grid.get((i + di, j + dj), ()):
                    if (u - x) ** 2 + (v - y) ** 2 <= r2:
                        ok = False
                        break
                if not ok:
                    break
            if not ok:
                break
        if ok:
            grid.setdefault((i, j), []).append((x, y))
            count += 1
    return count, h


def counting_sandwich(G, delta: float) -> dict:
    """Computable version of N(G, 2 delta) <= P(G, delta) <= N(G, delta / 2).

    A ball of diameter D meets at most 4 cells of side D, which turns
    grid counts into covering-number bounds:
    box_count(4 delta + h) / 4 <= N(G, 2 delta + h/2) <= |M| <= P(G, delta)
    and P(G, delta) <= N(G, delta/2) <= box_count(delta / sqrt 2).
    """
    m, h = separated_subset(G, delta)
    lower = box_count(G, 4.0 * delta + h, touch="any") / 4.0
    upper = box_count(G, delta / math.sqrt(2.0), touch="any")
    return {"delta": delta, "lower": lower, "packing": m, "upper": upper,
            "holds": lower <= m <= upper}


# ---------------------------------------------------------------------------
# tubular neighbourhoods and Minkowski content

def boundary_geometry(E):
    """Shapely geometry of the boundary of a planar set or polyline."""
    if isinstance(E, Polyline):
        P, Q = E.segments()
        return shapely.multilinestrings([[p, q] for p, q in zip(P, Q)])
    return as_geom(E).boundary


def _coarsen(boundary, rho: float, max_vertices: int, frac: float):
    """Douglas-Peucker simplification and its Hausdorff slack.

    Every vertex of the original line lies within ``tol`` of the simplified
    chords, and since the original curve runs continuously between the
    chord ends every chord point lies within ``tol`` of the curve too.
    """
    if shapely.get_num_coordinates(boundary) <= max_vertices:
        return boundary, 0.0
    tol = frac * rho
    return shapely.simplify(boundary, tol, preserve_topology=False), tol


def tubular_volume_polygonal(boundary, rho: float, window=None, quad_segs: int = 8,
                             max_vertices: int = 2000, frac: float = 0.25) -> Estimate:
    """|{x in window : d(x, boundary) <= rho}| for a polygonal boundary.

    The shapely buffer replaces each circular arc by an inscribed polygon,
    so it is contained in the true neighbourhood; the buffer of radius
    rho / cos(pi / (4 quad_segs)) circumscribes the arcs and contains it.
    Boundaries with more than ``max_vertices`` vertices are simplified with
    tolerance ``frac * rho`` first, and the two radii are moved by that
    tolerance so that the bracket stays valid.
    """
    if rho <= 0:
        raise ValueError("rho must be positive")
    if boundary.is_empty:
        return Estimate(0.0, 0.0, True)
    S, tol = _coarsen(boundary, rho, max_vertices, frac)
    inner = shapely.buffer(S, rho - tol, quad_segs=quad_segs)
    outer = shapely.buffer(S, (rho + tol) / math.cos(math.pi / (4 * quad_segs)), quad_segs=quad_segs)
    if window is not None and not isinstance(window, FullSpace):
        W = as_geom(window)
        inner = shapely.intersection(inner, W)
        outer = shapely.intersection(outer, W)
    lo, hi = inner.area, outer.area
    return Estimate.from_bracket(lo * (1 - 1e-12), hi * (1 + 1e-12))


def minkowski_content(tree, r: float, rho_list, window=None) -> list:
    """|N_rho^window(boundary)| / rho^(n - r) for each rho, from the cell tree."""
    from .geometry.celltree import tubular_volume, tubular_volume_1d
    out = []
    for rho in rho_list:
        if tree.dim == 1:
            pts = tree.source.endpoints()
            v = Estimate(tubular_volume_1d(pts, rho, window))
        else:
            v = tubular_volume(tree, rho, window)
        out.append(v.scale(rho ** (r - tree.dim)))
    return out


# ---------------------------------------------------------------------------
# threshold dimension

@dataclass
class ThresholdFit:
    s_grid: np.ndarray
    level_rates: np.ndarray
    rate_errors: np.ndarray
    s_star: float
    ci: float
    family: str
    method: str = "threshold"
    contributions: np.ndarray = field(default=None, repr=False)   # (len(s_grid), levels)
    spot_check: dict = field(default_factory=dict)

    def to_csv_rows(self):
        rows = [("s", "rate", "rate_err")]
        rows += [(float(s), float(r), float(e)) for s, r, e in zip(self.s_grid, self.level_rates, self.rate_errors)]
        return rows

    def summary(self) -> dict:
        return {"s_star": self.s_star, "ci": self.ci, "method": f"{self.method}:{self.family}"}


def _base_terms(spec, s: float, policy: QuadraturePolicy):
    params = KernelParams(s, 2)
    upper = self_perimeter(spec.T0, params, policy)
    lower = interaction_2d(spec.T0, spec.S0, params, policy) if spec.S0 is not None else None
    return lower, upper


def level_contributions(spec, s: float, levels: int, family: str = "lower",
                        policy: QuadraturePolicy = QuadraturePolicy(target_rel_error=1e-8),
                        spot_check: int = 2):
    """c_k(s) for k = 1..levels and a spot-check report.

    Each term L_s(F(T0), F(S0)) equals scale^(n - s) L_s(T0, S0) for a
    similarity F (change of variables), so the level sums are formed from
    the generated maps' scales and one base interaction. ``spot_check``
    pieces per level are evaluated directly on the mapped polygons and
    compared with the scaled base value.
    """
    lower, upper = _base_terms(spec, s, policy)
    base = lower if family == "lower" else upper
    if base is None:
        raise ValueError("the lower family needs a witness set S0")
    params = KernelParams(s, 2)
    c = np.empty(levels)
    worst = 0.0
    ok = True
    for k in range(1, levels + 1):
        maps = spec.maps(k)
        scales = np.array([F.scale for F in maps])
        c[k - 1] = math.fsum(scales ** (spec.n - s)) * base.value
        picks = sorted({0, len(maps) - 1, len(maps) // 2})[:max(spot_check, 0)]
        for i in picks:
            F = maps[i]
            T = apply_map(F, spec.T0)
            if family == "lower":
                direct = interaction_2d(T, apply_map(F, spec.S0), params, policy, check=False)
            else:
                direct = self_perimeter(T, params, policy)
            pred = base.scale(F.scale ** (spec.n - s))
            dev = abs(direct.value - pred.value)
            worst = max(worst, dev / abs(pred.value))
            ok &= dev <= direct.error + pred.error + 1e-9 * abs(pred.value)
    return c, {"max_rel_dev": worst, "ok": bool(ok), "base": base.to_dict()}


def _rate_fit(c):
    k = np.arange(1, len(c) + 1, dtype=float)
    y = np.log(c)
    A = np.stack([k, np.ones_like(k)], axis=1)
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    res = y - A @ coef
    dof = max(len(k) - 2, 1)
    se = math.sqrt(float(res @ res) / dof / float(np.sum((k - k.mean()) ** 2)))
    return float(coef[0]), se


def dimF_threshold(spec, s_grid=None, levels: int = 7, family: str = "lower",
                   policy: QuadraturePolicy = QuadraturePolicy(target_rel_error=1e-8)) -> ThresholdFit:
    """Locate the s where the per-level growth rate of c_k(s) changes sign."""
    if not spec.dimension_valid:
        raise ValueError("spec is not dimension-valid: log b / log lambda must lie in (n-1, n)")
    if levels < 3:
        raise ValueError("need at least 3 levels")
    if family not in ("lower", "upper"):
        raise ValueError("family must be 'lower' or 'upper'")
    if s_grid is None:
        s_grid = np.round(np.arange(0.05, 0.96, 0.05), 10)
    s_grid = np.asarray(s_grid, dtype=float)
    rates, errs, C = [], [], []
    spot = {"max_rel_dev": 0.0, "ok": True}
    for s in s_grid:
        c, rep = level_contributions(spec, float(s), levels, family, policy)
        rate, se = _rate_fit(c)
        rates.append(rate)
        errs.append(se)
        C.append(c)
        spot["max_rel_dev"] = max(spot["max_rel_dev"], rep["max_rel_dev"])
        spot["ok"] = spot["ok"] and rep["ok"]
    rates = np.array(rates)
    s_star, ci = _root(s_grid, rates)
    return ThresholdFit(s_grid, rates, np.array(errs), s_star, ci, family,
                        contributions=np.array(C), spot_check=spot)


def _root(s, r):
    sign = np.sign(r)
    change = np.flatnonzero(sign[:-1] * sign[1:] <= 0)
    if len(change) == 0:
        raise ValueError("growth rate does not change sign on the s grid")
    i = int(change[0])
    # three grid points nearest to the crossing
    near = np.argsort(np.abs(s - 0.5 * (s[i] + s[i + 1])), kind="stable")[:3]
    near = np.sort(near)
    x, y = s[near], r[near]
    A = np.stack([x, np.ones_like(x)], axis=1)
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    beta, alpha = coef
    root = -alpha / beta
    res = y - A @ coef
    sigma = math.sqrt(float(res @ res) / max(len(x) - 2, 1))
    ci = 2.0 * sigma / abs(beta)
    return float(root), float(ci)


# ---------------------------------------------------------------------------
# Dim_F <= Dim_M through the tubular-volume integral

@dataclass
class InequalityRow:
    s: float
    lhs: float            # rigorous upper bound of 2 P_s^L(E, Omega)
    rhs: float            # rigorous lower bound of n w_n int |N_rho| rho^(-1-s)
    rhs_trapezoid: float  # trapezoid estimate of the same integral
    margin: float

    def to_dict(self):
        return dict(self.__dict__)


def recursive_perimeter_bound(build, s: float,
                              policy: QuadraturePolicy = QuadraturePolicy(target_rel_error=1e-8)) -> Estimate:
    """Upper bound on P_s of ``seed | pieces`` by subadditivity and similarity scaling.

    P_s(A | B) <= P_s(A) + P_s(B) and P_s(F(T0)) = scale^(n-s) P_s(T0), so the
    bound needs only the seed's own perimeter. The seed counts once when the
    pieces are attached to it (``build.spec.T0`` is taken as level 0).
    """
    spec = build.spec
    base = self_perimeter(spec.T0, KernelParams(s, spec.n), policy)
    factor = 1.0 + math.fsum(F.scale ** (spec.n - s) for k in range(1, build.level + 1) for F in spec.maps(k))
    hi = base.hi * factor
    return Estimate.from_bracket(0.0, hi, rigorous=base.rigorous)


def _rho_grid(rho_min, rho_max, m):
    return np.geomspace(rho_min, rho_max, m)


def dim_inequality_check(E, Omega, s_grid=(0.3, 0.5, 0.7), rho_list=None,
                         policy: QuadraturePolicy = QuadraturePolicy(target_rel_error=1e-8)) -> list:
    """Both sides of 2 P_s^L(E, Omega) <= n w_n int_0^inf |N_rho^Omega(dE)| / rho^(1+s) d rho.

    The right side is bounded below with a left Riemann sum (|N_rho| is
    nondecreasing in rho), dropping the part below the smallest rho and
    using |N_rho| >= |N_rho_max| beyond the largest one. Once rho_max
    exceeds the window's extent around dE the tail is exactly
    |Omega| rho_max^(-s) / s.
    """
    from .asymptotics import omega
    from .fractals import RecursiveBuild
    from .perimeter import AppendixASet, frac_perimeter
    if Omega is None or isinstance(Omega, FullSpace):
        raise ValueError("the check needs a bounded window")
    build = None
    if isinstance(E, RecursiveBuild):
        # E is the seed together with its pieces; the left side uses a cheap upper bound
        from .geometry.sets import Region
        build = E
        E = Region.union([build.spec.T0] + [p for _, _, p in build.pieces])
    one_d = isinstance(E, (IntervalUnion, AppendixASet))
    n = 1 if one_d else 2
    if one_d:
        W = list(Omega.intervals)
        diam = W[-1][1] - W[0][0]
        size = math.fsum(b - a for a, b in W)
        pts = E.boundary_points()
        from .geometry.celltree import tubular_volume_1d

        def vol(rho):
            return Estimate(tubular_volume_1d(pts, rho, W))
    else:
        bnd = boundary_geometry(E)
        gW = as_geom(Omega)
        lo, hi = np.asarray(gW.bounds[:2]), np.asarray(gW.bounds[2:])
        diam = float(np.hypot(*(hi - lo)))
        size = gW.area

        def vol(rho):
            return tubular_volume_polygonal(bnd, rho, Omega)
    if rho_list is None:
        rho_list = _rho_grid(1e-4 * diam, 2.0 * diam, 60)
    rho = np.sort(np.asarray(rho_list, dtype=float))
    V = [vol(r) for r in rho]
    Vlo = np.array([v.lo for v in V])
    Vmid = np.array([v.value for v in V])
    c = n * omega(n)
    rows = []
    for s in s_grid:
        if build is not None:
            lhs = 2.0 * recursive_perimeter_bound(build, s, policy).hi
        else:
            lhs = 2.0 * frac_perimeter(E, Omega, KernelParams(s, n), policy).local.hi
        seg = (rho[:-1] ** (-s) - rho[1:] ** (-s)) / s
        body = math.fsum(Vlo[:-1] * seg)
        if Vmid[-1] == 0.0:
            tail_val = 0.0                        # no boundary near the window
        else:
            tail_val = size if rho[-1] >= diam else Vlo[-1]
        rhs = c * (body + tail_val * rho[-1] ** (-s) / s)
        # trapezoid in log rho plus the usual head/tail models
        f = Vmid / rho ** (1 + s)
        trap = float(np.sum(0.5 * (f[1:] + f[:-1]) * np.diff(rho)))
        head = Vmid[0] * rho[0] ** (-s) / (1 - s)
        rhs_t = c * (trap + head + tail_val * rho[-1] ** (-s) / s)
        rows.append(InequalityRow(float(s), float(lhs), float(rhs), float(rhs_t), float(rhs - lhs)))
    return rows
