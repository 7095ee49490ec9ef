from __future__ import annotations

from dataclasses import dataclass


def check_s(s: float) -> float:
    s = float(s)
    if not (0.0 < s < 1.0):
        raise ValueError("s must lie in (0,1)")
    return s


@dataclass(frozen=True)
class KernelParams:
    """Order ``s`` and dimension ``n`` of the kernel |x-y|^-(n+s)."""

    s: float
    n: int = 2

    def __post_init__(self):
        check_s(self.s)
        if self.n not in (1, 2):
            raise ValueError(f"n must be 1 or 2, got {self.n}")

    @property
    def exponent(self) -> float:
        return self.n + self.s


@dataclass(frozen=True)
class QuadraturePolicy:
    """Accuracy knobs shared by the 2D interaction routines.

    ``theta`` is the treecode separation ratio: two clusters interact in
    the far field once their distance is at least ``theta`` times the sum
    of their diameters.
    """

    theta: float = 2.0
    quadrature_order: int = 8
    max_refine_depth: int = 40
    target_rel_error: float = 1e-9
    deterministic: bool = True

    def __post_init__(self):
        if self.theta < 1.0:
            raise ValueError("theta must be >= 1")
        if self.quadrature_order < 2:
            raise ValueError("quadrature_order must be >= 2")
        if self.max_refine_depth < 1:
            raise ValueError("max_refine_depth must be >= 1")
        if not (self.target_rel_error > 0.0):
            raise ValueError("target_rel_error must be positive")
