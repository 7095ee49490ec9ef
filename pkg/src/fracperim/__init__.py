"""Fractional perimeters, fractal dimensions and the s -> 1 asymptotics of explicit sets."""

__version__ = "0.1.0"

from .estimate import Estimate  # noqa: E402
from .kernel.params import KernelParams, QuadraturePolicy  # noqa: E402

__all__ = ["Estimate", "KernelParams", "QuadraturePolicy", "__version__"]
