"""Value/error pairs returned by every approximate computation."""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class Estimate:
    """A numeric value with an error bound.

    When ``rigorous`` is true the exact quantity lies in
    ``[value - error, value + error]`` under the error model of the
    routine that produced it. Otherwise ``error`` is a heuristic size.
    """

    value: float
    error: float = 0.0
    rigorous: bool = True

    def __post_init__(self):
        if not (self.error >= 0.0):
            raise ValueError(f"error must be nonnegative, got {self.error!r}")

    @property
    def lo(self) -> float:
        return self.value - self.error

    @property
    def hi(self) -> float:
        return self.value + self.error

    @property
    def rel_error(self) -> float:
        if self.value == 0.0:
            return 0.0 if self.error == 0.0 else math.inf
        return self.error / abs(self.value)

    def __add__(self, other):
        if isinstance(other, Estimate):
            return Estimate(self.value + other.value, self.error + other.error,
                            self.rigorous and other.rigorous)
        return Estimate(self.value + float(other), self.error, self.rigorous)

    __radd__ = __add__

    def __neg__(self):
        return Estimate(-self.value, self.error, self.rigorous)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, factor: float) -> "Estimate":
        return Estimate(self.value * factor, self.error * abs(factor), self.rigorous)

    def contains(self, x: float, slack: float = 0.0) -> bool:
        return self.lo - slack <= x <= self.hi + slack

    @classmethod
    def from_bracket(cls, lo: float, hi: float, rigorous: bool = True) -> "Estimate":
        if hi < lo:
            raise ValueError(f"empty bracket [{lo}, {hi}]")
        return cls(0.5 * (lo + hi), 0.5 * (hi - lo), rigorous)

    def to_dict(self) -> dict:
        return {"value": self.value, "error": self.error, "rigorous": self.rigorous}


def esum(items) -> Estimate:
    """Sum estimates with ``math.fsum`` so the result is order independent."""
    items = list(items)
    if not items:
        return Estimate(0.0, 0.0, True)
    return Estimate(math.fsum(e.value for e in items),
                    math.fsum(e.error for e in items),
                    all(e.rigorous for e in items))
