"""Alternating rotation / row-warp minimization of the elastic surface energy.

The first surface is rotated and the second one is reparametrized row by
row.  Each pass computes the optimal rotation for the current warped field
of the second surface, then re-matches every row of the ORIGINAL second
field against the rotated first field, so warps never compound.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .curve_dp import DpConfig, dp_match
from .errors import NonSquareReversal, PartitionMismatch
from .grid import (
    ShapeField,
    SurfaceGrid,
    Warp2D,
    candidate_moves,
    check_same_lattice,
    corner_candidates,
)
from .rigid import kabsch_umeyama
from .shape import (
    normalize_unit_area,
    reparametrize_grid,
    shape_function,
    squared_field_distance,
    warp_row,
)

INITIAL_ENERGY = 1.0e6


@dataclass(frozen=True)
class RegistrationConfig:
    tol: float = 1e-6
    iten: int = 10
    dp: DpConfig = field(default_factory=DpConfig)
    threads: int | None = None

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.iten < 1:
            raise ValueError("iten must be >= 1")
        if self.threads is not None and self.threads < 1:
            raise ValueError("threads must be >= 1")


@dataclass(frozen=True, eq=False)
class IterationRecord:
    """Diagnostics of one pass of the repeat loop.

    ``rotation_objective_before``/``_after`` are the weighted squared
    distances between the current warped second field and the first field
    rotated by the previous and the new rotation.
    """

    energy: float
    rotation: np.ndarray
    rotation_objective_before: float
    rotation_objective_after: float
    row_energies: np.ndarray
    identity_row_energies: np.ndarray


@dataclass(frozen=True, eq=False)
class RegistrationResult:
    energy: float
    distance: float
    rotation: np.ndarray
    warp: Warp2D
    registered_first: SurfaceGrid
    registered_second: SurfaceGrid
    field_first: ShapeField
    field_second: ShapeField
    iterations: int
    energy_trace: tuple
    row_energies: np.ndarray
    history: tuple = ()


def _match_row(args):
    q1row, q2row, r, w, dp = args
    h = dp_match(q1row, q2row, r, dp)
    warped = warp_row(q2row, r.values, h)
    energy = float(w @ np.sum((q1row - warped) ** 2, axis=1))
    identity = float(w @ np.sum((q1row - q2row) ** 2, axis=1))
    return h, warped, energy, identity


def dp_surface_min(c1: SurfaceGrid, c2: SurfaceGrid, cfg: RegistrationConfig | None = None) -> RegistrationResult:
    """Rotate ``c1`` and warp the rows of ``c2`` to minimize their elastic energy.

    Both grids must share partitions and are expected to be normalized to
    unit area already (see :func:`register_surfaces`).
    """
    cfg = cfg or RegistrationConfig()
    check_same_lattice(c1, c2)
    r, t = c1.r, c1.t
    wr, wt = r.weights, t.weights
    q1 = shape_function(c1)
    q2 = shape_function(c2)
    n = len(t)

    q2_hat = q2
    R_prev = np.eye(3)
    e_curr = INITIAL_ENERGY
    trace, history = [], []
    it = 0
    workers = cfg.threads or os.cpu_count() or 1
    with ThreadPoolExecutor(max_workers=workers) as pool:
        while True:
            it += 1
            e_prev = e_curr
            R, _ = kabsch_umeyama(q2_hat, q1)
            before = squared_field_distance(q2_hat, q1.rotated(R_prev))
            q1_hat = q1.rotated(R)
            after = squared_field_distance(q2_hat, q1_hat)

            jobs = [(q1_hat.row(j), q2.row(j), r, wr, cfg.dp) for j in range(n)]
            rows = list(pool.map(_match_row, jobs))
            warps = [row[0] for row in rows]
            row_e = np.array([row[2] for row in rows])
            q2_hat = ShapeField(r, t, np.stack([row[1] for row in rows], axis=1))
            e_curr = float(wt @ row_e)

            trace.append(e_curr)
            history.append(IterationRecord(
                energy=e_curr,
                rotation=R,
                rotation_objective_before=before,
                rotation_objective_after=after,
                row_energies=row_e,
                identity_row_energies=np.array([row[3] for row in rows]),
            ))
            R_prev = R
            if abs(e_curr - e_prev) < cfg.tol or it > cfg.iten:
                break

    warp = Warp2D(tuple(warps))
    return RegistrationResult(
        energy=e_curr,
        distance=float(np.sqrt(e_curr)),
        rotation=R,
        warp=warp,
        registered_first=c1.rotated(R),
        registered_second=reparametrize_grid(c2, warp),
        field_first=q1_hat,
        field_second=q2_hat,
        iterations=it,
        energy_trace=tuple(trace),
        row_energies=row_e,
        history=tuple(history),
    )


def register_with_corner_search(
    c1: SurfaceGrid,
    c2: SurfaceGrid,
    cfg: RegistrationConfig | None = None,
    include_reversed: bool = True,
    return_all: bool = False,
):
    """Register ``c1`` against every corner reindexing of ``c2``; keep the closest.

    Returns ``(best, candidate_index)``, plus the list of all candidate
    results when ``return_all`` is set.  Candidate indices follow
    :func:`esr3d.grid.corner_candidates`.
    """
    candidates = corner_candidates(c2, include_reversed=include_reversed)
    moves = candidate_moves(include_reversed)
    for cand, (_, _, reverse) in zip(candidates, moves):
        if cand.r != c1.r or cand.t != c1.t:
            if reverse:
                raise NonSquareReversal("reversed candidate partitions differ from the first surface's")
            raise PartitionMismatch("flipped candidate partitions differ from the first surface's")
    results = [dp_surface_min(c1, cand, cfg) for cand in candidates]
    best = min(range(len(results)), key=lambda k: results[k].distance)
    if return_all:
        return results[best], best, results
    return results[best], best


def register_surfaces(c1: SurfaceGrid, c2: SurfaceGrid, cfg: RegistrationConfig | None = None,
                      corner_search: bool = False):
    """Normalize both surfaces to unit area, then register them.

    Returns ``(result, candidate_index)``; the index is 0 without corner search.
    """
    c1n = normalize_unit_area(c1)
    c2n = normalize_unit_area(c2)
    if corner_search:
        return register_with_corner_search(c1n, c2n, cfg)
    return dp_surface_min(c1n, c2n, cfg), 0
