"""Analytic test surfaces (sine, helicoid, cosine-sine) and power-map warps."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .grid import SurfaceGrid, as_partition

# Type-1 surfaces are this rotation applied to their type-2 counterparts.
PERMUTATION = np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]])


class Family(str, Enum):
    SINE1 = "sine1"
    SINE2 = "sine2"
    HELICOID1 = "helicoid1"
    HELICOID2 = "helicoid2"
    COSSINE1 = "cossine1"
    COSSINE2 = "cossine2"

    @property
    def type2(self) -> bool:
        return self.value.endswith("2")


def _sine(r, t, k):
    return np.stack([r, t, np.sin(k * np.pi * r)], axis=-1)


def _helicoid(r, t, k):
    a = k * np.pi * t
    return np.stack([r * np.cos(a), r * np.sin(a), a], axis=-1)


def _cossine(r, t, k):
    # the cosine-sine kind has no frequency parameter; k is ignored
    return np.stack([r, t, np.cos(0.5 * np.pi * r) * np.sin(0.5 * np.pi * t)], axis=-1)


_TYPE1 = {"sine": _sine, "helicoid": _helicoid, "cossine": _cossine}


@dataclass(frozen=True)
class SurfaceFamily:
    kind: Family
    k: int = 2

    def __post_init__(self):
        object.__setattr__(self, "kind", Family(self.kind))
        if int(self.k) != self.k or self.k < 1:
            raise ValueError(f"k must be a positive integer, got {self.k!r}")

    def evaluate(self, r, t) -> np.ndarray:
        """Points c(r, t) with broadcasting; the last axis holds x, y, z."""
        r, t = np.broadcast_arrays(np.asarray(r, dtype=float), np.asarray(t, dtype=float))
        base = _TYPE1[self.kind.value[:-1]](r, t, self.k)
        if self.kind.type2:
            # type 1 = P @ type 2, so type 2 = P^T @ type 1
            base = base @ PERMUTATION
        return base


@dataclass(frozen=True)
class GammaWarp:
    """gamma(r, t) = (r**exponent_r, t**exponent_t)."""

    exponent_r: float = 1.0
    exponent_t: float = 1.0

    def __post_init__(self):
        if self.exponent_r < 1.0 or self.exponent_t < 1.0:
            raise ValueError("warp exponents must be >= 1")

    def __call__(self, r, t):
        return np.power(r, self.exponent_r), np.power(t, self.exponent_t)

    @property
    def is_identity(self) -> bool:
        return self.exponent_r == 1.0 and self.exponent_t == 1.0


def generate(f: SurfaceFamily, r, t) -> SurfaceGrid:
    r, t = as_partition(r), as_partition(t)
    rr, tt = np.meshgrid(r.values, t.values, indexing="ij")
    return SurfaceGrid(r, t, f.evaluate(rr, tt))


def apply_gamma(g: SurfaceGrid, w: GammaWarp, f: SurfaceFamily) -> SurfaceGrid:
    """Resample the closed form of ``f`` at gamma(r_i, t_j) on the partitions of ``g``."""
    rr, tt = np.meshgrid(g.r.values, g.t.values, indexing="ij")
    return g.with_points(f.evaluate(*w(rr, tt)))
