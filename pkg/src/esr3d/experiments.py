"""Catalogue of the published sine / helicoid / cosine-sine experiments.

In every case the first surface is a type-2 surface and the second is the
matching type-1 surface sampled at gamma(r_i, t_j).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import UnknownCase
from .generators import Family, GammaWarp, SurfaceFamily, apply_gamma, generate
from .grid import Partition

GAMMA_R = GammaWarp(1.25, 1.0)
GAMMA_RT = GammaWarp(1.25, 1.25)
P = [[0, 1, 0], [0, 0, 1], [1, 0, 0]]


@dataclass(frozen=True)
class Case:
    case_id: str
    first: SurfaceFamily
    second: SurfaceFamily
    gamma: GammaWarp
    reference_distance: float
    reference_iterations: int
    reference_seconds: int
    reference_rotation: tuple

    def build(self, m: int = 101, n: int = 101):
        r, t = Partition.uniform(m), Partition.uniform(n)
        c1 = generate(self.first, r, t)
        c2 = apply_gamma(generate(self.second, r, t), self.gamma, self.second)
        return c1, c2


def _case(cid, kind, k1, k2, gamma, dist, iters, secs, rot=P):
    first = SurfaceFamily(Family(kind + "2"), k1)
    second = SurfaceFamily(Family(kind + "1"), k2)
    return Case(cid, first, second, gamma, dist, iters, secs, tuple(map(tuple, rot)))


CASES = {c.case_id: c for c in [
    _case("sine-k2-gr", "sine", 2, 2, GAMMA_R, 0.0003, 3, 27),
    _case("sine-k3-gr", "sine", 2, 3, GAMMA_R, 0.3479, 3, 28),
    _case("sine-k4-gr", "sine", 2, 4, GAMMA_R, 0.3192, 4, 39),
    _case("sine-k2-grt", "sine", 2, 2, GAMMA_RT, 0.0126, 3, 28),
    _case("helicoid-gr", "helicoid", 4, 4, GAMMA_R, 0.0002, 2, 15),
    _case("helicoid-grt", "helicoid", 4, 4, GAMMA_RT, 0.0796, 2, 19,
          [[0.028, 0.762, 0.647], [-0.029, -0.646, 0.763], [0.999, -0.040, 0.004]]),
    _case("cossine-gr", "cossine", 1, 1, GAMMA_R, 0.0002, 3, 22),
    _case("cossine-grt", "cossine", 1, 1, GAMMA_RT, 0.0143, 3, 23,
          [[-0.043, 0.999, 0.026], [-0.035, -0.028, 0.999], [0.998, 0.042, 0.036]]),
]}


def get_case(case_id: str) -> Case:
    try:
        return CASES[case_id]
    except KeyError:
        raise UnknownCase(f"unknown case {case_id!r}; choose from {', '.join(CASES)}") from None


def reference_rotation(case: Case) -> np.ndarray:
    return np.array(case.reference_rotation, dtype=float)
