"""Ball-volume constants and the s -> 1 behaviour of (1 - s) P_s."""

from __future__ import annotations

import math
import warnings
from functools import lru_cache
from dataclasses import dataclass, field

import numpy as np
from scipy.special import roots_legendre

from .estimate import Estimate
from .kernel.params import KernelParams, QuadraturePolicy


def omega(d: int | float) -> float:
    """Volume of the unit ball in R^d, pi^(d/2) / Gamma(d/2 + 1)."""
    if d < 0:
        raise ValueError("dimension must be nonnegative")
    return math.exp(0.5 * d * math.log(math.pi) - math.lgamma(0.5 * d + 1.0))


@lru_cache(maxsize=8)
def _nodes(N: int):
    return roots_legendre(N)


def _sphere_abs_mean(n: int, N: int) -> float:
    """Gauss-Legendre value of int_{S^(n-1)} |v . e| d sigma, ignoring the kink."""
    if n == 2:
        x, w = _nodes(N)
        th = math.pi * (x + 1.0)                 # [0, 2 pi]
        return float(math.pi * np.dot(w, np.abs(np.cos(th))))
    if n == 3:
        # |cos phi| sin phi d phi d theta, with u = cos phi on [-1, 1]
        x, w = _nodes(N)
        return float(2.0 * math.pi * np.dot(w, np.abs(x)))
    raise ValueError("n must be 2 or 3")


def k1n_constant(n: int, quad_points: int = 4096) -> Estimate:
    """K_{1,n} = (1 / (n w_n)) int_{S^(n-1)} |v . e| by a kink-unaware rule.

    The quadrature does not split at the kink of |v . e|, so it converges
    only algebraically; the reported error is the change when the number
    of nodes is halved.
    """
    if quad_points < 4:
        raise ValueError("quad_points must be at least 4")
    q = _sphere_abs_mean(n, quad_points)
    q2 = _sphere_abs_mean(n, quad_points // 2)
    c = n * omega(n)
    return Estimate(q / c, abs(q - q2) / c, False)


def k1n_identity(n: int, quad_points: int = 4096) -> dict:
    """Compare n w_n K_{1,n} with 2 w_{n-1}."""
    K = k1n_constant(n, quad_points)
    lhs = n * omega(n) * K.value
    rhs = 2.0 * omega(n - 1)
    return {"n": n, "lhs": lhs, "rhs": rhs, "rel_dev": abs(lhs - rhs) / rhs,
            "quad_error": n * omega(n) * K.error}


DEFAULT_S_GRID = (0.90, 0.92, 0.94, 0.96, 0.98)


@dataclass
class AsymptoticScan:
    s: np.ndarray
    scaled_local: list
    scaled_nonlocal: list
    limit: float
    limit_err: float
    target: float | None
    rel_dev: float | None
    increasing: bool
    notes: list = field(default_factory=list)

    @property
    def scaled_total(self) -> list:
        return [a + b for a, b in zip(self.scaled_local, self.scaled_nonlocal)]

    def to_csv_rows(self):
        rows = [("s", "scaled_local", "err_local", "scaled_nonlocal", "err_nonlocal", "scaled_total")]
        for s, l, nl, t in zip(self.s, self.scaled_local, self.scaled_nonlocal, self.scaled_total):
            rows.append((float(s), l.value, l.error, nl.value, nl.error, t.value))
        return rows

    def summary(self) -> dict:
        return {"limit": self.limit, "limit_err": self.limit_err, "target": self.target,
                "rel_dev": self.rel_dev}


def _affine_extrapolate(s, y, yerr):
    """Intercept at s = 1 of the least-squares line of y against (1 - s)."""
    x = 1.0 - np.asarray(s, dtype=float)
    A = np.stack([np.ones_like(x), x], axis=1)
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    res = y - A @ coef
    dof = max(len(x) - 2, 1)
    sigma2 = float(res @ res) / dof
    cov = sigma2 * np.linalg.inv(A.T @ A)
    # propagate the per-point errors through the (linear) intercept map
    row = np.linalg.solve(A.T @ A, A.T)[0]
    prop = float(np.abs(row) @ np.asarray(yerr))
    return float(coef[0]), math.sqrt(cov[0, 0]) + prop


def asymptotic_scan(E, Omega=None, s_values=DEFAULT_S_GRID,
                    policy: QuadraturePolicy = QuadraturePolicy(target_rel_error=1e-9)) -> AsymptoticScan:
    """Tabulate (1 - s) P_s(E, Omega) and extrapolate it to s = 1.

    The target w_{n-1} P(E, Omega) is reported only when no edge of E lies
    on the boundary of the window, where the two perimeters split that
    edge differently.
    """
    from .perimeter import AppendixASet, BoundaryEdgeWarning, classical_perimeter, frac_perimeter
    from .geometry.sets import IntervalUnion
    s_values = np.asarray(sorted(s_values), dtype=float)
    if len(s_values) < 2:
        raise ValueError("need at least two s values")
    one_d = isinstance(E, (IntervalUnion, AppendixASet))
    n = 1 if one_d else 2
    loc, nl = [], []
    for s in s_values:
        br = frac_perimeter(E, Omega, KernelParams(float(s), n), policy)
        loc.append(br.local.scale(1.0 - s))
        nl.append(br.nonlocal_.scale(1.0 - s))
    tot = np.array([a.value + b.value for a, b in zip(loc, nl)])
    err = np.array([a.error + b.error for a, b in zip(loc, nl)])
    limit, limit_err = _affine_extrapolate(s_values, tot, err)
    notes = []
    target = rel = None
    if isinstance(E, AppendixASet):
        notes.append("classical perimeter is infinite")
    elif one_d:
        target = omega(0) * _jumps_in(E, Omega)
    else:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", BoundaryEdgeWarning)
            length, on = classical_perimeter(E, Omega, return_flag=True)
        if on > 0:
            notes.append("an edge of E lies on the window boundary; no target comparison")
        else:
            target = omega(1) * length
    if target is not None:
        # a zero target (no boundary in the window) is compared absolutely
        rel = abs(limit - target) / target if target > 0 else abs(limit)
    inc = bool(np.all(np.diff(tot) > 0))
    return AsymptoticScan(s_values, loc, nl, limit, limit_err, target, rel, inc, notes)


def _jumps_in(E, Omega) -> float:
    pts = E.endpoints()
    if Omega is None or not hasattr(Omega, "intervals"):
        return float(len(pts))
    return float(sum(1 for p in pts for a, b in Omega.intervals if a < p < b))


__all__ = ["omega", "k1n_constant", "k1n_identity", "AsymptoticScan", "asymptotic_scan"]
