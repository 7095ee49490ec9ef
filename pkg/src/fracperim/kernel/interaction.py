"""L_s(A, B) for planar sets through boundary integrals.

For disjoint bounded A, B in the plane, two applications of the
divergence theorem turn the four-dimensional integral into a sum over
pairs of boundary edges,

    L_s(A, B) = -1/s^2 * sum_{e in dA, f in dB} (nu_e . nu_f) I_s(e, f),
    I_s(e, f) = int_e int_f |x - y|^-s,

and, for A contained in a bounded C, the interaction with the unbounded
complement of C becomes

    L_s(A, R^2 \\ C) = +1/s^2 * sum_{e in dA, f in dC} (nu_e . nu_f) I_s(e, f).

The kernel |x-y|^-s is integrable along edges for every s < 1, so the
edge sums are finite even when A and B touch along a common edge.
"""

from __future__ import annotations

import shapely

from ..estimate import Estimate
from .boundary import Segments, boundary_sum
from .interval import interaction_1d
from .params import KernelParams, QuadraturePolicy

DEFAULT_POLICY = QuadraturePolicy()


def _segments(X) -> Segments:
    if isinstance(X, Segments):
        return X
    from ..geometry.sets import as_geom, oriented_rings
    return Segments.from_rings(oriented_rings(as_geom(X)))


def _geom(X):
    from ..geometry.sets import as_geom
    return as_geom(X)


def check_disjoint(A, B, rel_tol: float = 1e-12) -> None:
    gA, gB = _geom(A), _geom(B)
    common = shapely.intersection(gA, gB).area
    if common > rel_tol * max(min(gA.area, gB.area), 1e-300):
        raise ValueError("sets must be disjoint")


def interaction_2d(A, B, params: KernelParams, policy: QuadraturePolicy = DEFAULT_POLICY,
                   check: bool = True) -> Estimate:
    """L_s(A, B) for disjoint bounded planar sets (polygons, regions, balls)."""
    if params.n != 2:
        raise ValueError("interaction_2d needs n = 2")
    if check:
        check_disjoint(A, B)
    s = params.s
    if _is_empty(A) or _is_empty(B):
        return Estimate(0.0, 0.0, True)
    J = boundary_sum(_segments(A), _segments(B), s, rtol=policy.target_rel_error,
                     max_depth=policy.max_refine_depth)
    out = J.scale(-1.0 / s ** 2)
    # the exact value is nonnegative
    if out.value < 0:
        out = Estimate(0.0, max(out.error + out.value, 0.0), out.rigorous)
    return out


def complement_interaction(A, C, params: KernelParams, policy: QuadraturePolicy = DEFAULT_POLICY) -> Estimate:
    """L_s(A, R^2 minus C) for A contained in the bounded set C."""
    s = params.s
    if _is_empty(A):
        return Estimate(0.0, 0.0, True)
    J = boundary_sum(_segments(A), _segments(C), s, rtol=policy.target_rel_error,
                     max_depth=policy.max_refine_depth)
    return J.scale(1.0 / s ** 2)


def self_perimeter(E, params: KernelParams, policy: QuadraturePolicy = DEFAULT_POLICY) -> Estimate:
    """L_s(E, R^2 minus E) for a bounded planar set (no far-field truncation)."""
    s = params.s
    if _is_empty(E):
        return Estimate(0.0, 0.0, True)
    S = _segments(E)
    J = boundary_sum(S, S, s, rtol=policy.target_rel_error, symmetric=True,
                     max_depth=policy.max_refine_depth)
    return J.scale(1.0 / s ** 2)


def _is_empty(X) -> bool:
    if isinstance(X, Segments):
        return len(X) == 0
    return _geom(X).is_empty or _geom(X).area == 0.0


def interaction(A, B, params: KernelParams, policy: QuadraturePolicy = DEFAULT_POLICY) -> Estimate:
    """Dispatch on dimension: exact in 1D, boundary quadrature in 2D."""
    if params.n == 1:
        ivA = getattr(A, "intervals", A)
        ivB = getattr(B, "intervals", B)
        return Estimate(interaction_1d(ivA, ivB, params.s), 0.0, True)
    return interaction_2d(A, B, params, policy)


__all__ = ["interaction_2d", "complement_interaction", "self_perimeter", "interaction",
           "check_disjoint", "DEFAULT_POLICY"]
