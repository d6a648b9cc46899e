"""Lattice types for discretized surfaces and their reparametrizations.

Arrays are indexed ``[i, j]`` with ``i`` along the r-partition and ``j``
along the t-partition.  Flat I/O uses the traversal order in which ``i``
varies fastest (see :mod:`esr3d.surface_io`).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    InvalidPartition,
    NonFiniteValue,
    NonSquareReversal,
    PartitionMismatch,
)


PARTITION_ATOL = 1e-12


def _frozen(a, dtype=float):
    arr = np.array(a, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Partition:
    """Strictly increasing partition of [0, 1] with endpoints 0 and 1."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size < 2:
            raise InvalidPartition("partition needs at least two values")
        if not np.all(np.isfinite(v)):
            raise NonFiniteValue("partition contains non-finite values")
        if v[0] != 0.0 or v[-1] != 1.0:
            raise InvalidPartition(f"partition must start at 0 and end at 1, got {v[0]!r}..{v[-1]!r}")
        if np.any(np.diff(v) <= 0.0):
            raise InvalidPartition("partition must be strictly increasing")
        object.__setattr__(self, "values", _frozen(v))

    @classmethod
    def uniform(cls, n: int) -> "Partition":
        if n < 2:
            raise InvalidPartition("partition needs at least two values")
        v = np.linspace(0.0, 1.0, n)
        v[-1] = 1.0
        return cls(v)

    def __len__(self):
        return self.values.size

    def __eq__(self, other):
        # flips compute 1 - x, so equality allows a few ulps of rounding
        if not isinstance(other, Partition):
            return NotImplemented
        return self.values.shape == other.values.shape and bool(
            np.all(np.abs(self.values - other.values) <= PARTITION_ATOL)
        )

    def __hash__(self):
        return hash(self.values.size)

    @property
    def steps(self) -> np.ndarray:
        """Interval lengths ``r[i+1] - r[i]`` (length M-1)."""
        return np.diff(self.values)

    @property
    def weights(self) -> np.ndarray:
        """Per-node composite trapezoid weights; positive, summing to 1."""
        d = self.steps
        w = np.empty(self.values.size)
        w[0] = d[0] / 2.0
        w[-1] = d[-1] / 2.0
        w[1:-1] = (self.values[2:] - self.values[:-2]) / 2.0
        return w

    def flipped(self) -> "Partition":
        """Partition seen from the other end: x -> 1 - x, reordered."""
        v = 1.0 - self.values[::-1]
        v[0], v[-1] = 0.0, 1.0
        if Partition(v) == self:
            return self
        return Partition(v)


def as_partition(p) -> Partition:
    return p if isinstance(p, Partition) else Partition(p)


def _check_lattice(r: Partition, t: Partition, arr: np.ndarray, what: str):
    if arr.shape != (len(r), len(t), 3):
        raise DimensionMismatch(
            f"{what} has shape {arr.shape}, expected ({len(r)}, {len(t)}, 3)"
        )
    if not np.all(np.isfinite(arr)):
        raise NonFiniteValue(f"{what} contains non-finite values")


@dataclass(frozen=True, eq=False)
class SurfaceGrid:
    """M x N lattice of points c(r_i, t_j) in R^3."""

    r: Partition
    t: Partition
    points: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "r", as_partition(self.r))
        object.__setattr__(self, "t", as_partition(self.t))
        pts = np.asarray(self.points, dtype=float)
        _check_lattice(self.r, self.t, pts, "points")
        object.__setattr__(self, "points", _frozen(pts))

    @property
    def shape(self):
        return len(self.r), len(self.t)

    def with_points(self, points) -> "SurfaceGrid":
        return SurfaceGrid(self.r, self.t, points)

    def rotated(self, R) -> "SurfaceGrid":
        return self.with_points(self.points @ np.asarray(R).T)


@dataclass(frozen=True, eq=False)
class ShapeField:
    """M x N lattice of shape-function vectors q(r_i, t_j)."""

    r: Partition
    t: Partition
    vectors: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "r", as_partition(self.r))
        object.__setattr__(self, "t", as_partition(self.t))
        v = np.asarray(self.vectors, dtype=float)
        _check_lattice(self.r, self.t, v, "vectors")
        object.__setattr__(self, "vectors", _frozen(v))

    @property
    def shape(self):
        return len(self.r), len(self.t)

    def rotated(self, R) -> "ShapeField":
        return ShapeField(self.r, self.t, self.vectors @ np.asarray(R).T)

    def row(self, j: int) -> np.ndarray:
        """Values along r at fixed t_j, shape (M, 3)."""
        return self.vectors[:, j, :]


def check_same_lattice(a, b):
    """Raise unless ``a`` and ``b`` live on the same partitions."""
    if a.shape != b.shape:
        raise DimensionMismatch(f"lattice shapes differ: {a.shape} vs {b.shape}")
    if a.r != b.r or a.t != b.t:
        raise PartitionMismatch("lattices use different partitions")


@dataclass(frozen=True, eq=False)
class Diffeo1D:
    """Samples h(r_i) and derivative values h'(r_i) of a warp of [0, 1]."""

    samples: np.ndarray
    derivative: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float)
        d = np.asarray(self.derivative, dtype=float)
        if s.ndim != 1 or s.shape != d.shape:
            raise DimensionMismatch("samples and derivative must be 1-D of equal length")
        if not (np.all(np.isfinite(s)) and np.all(np.isfinite(d))):
            raise NonFiniteValue("diffeomorphism contains non-finite values")
        if s[0] != 0.0 or s[-1] != 1.0:
            raise InvalidPartition("warp must fix the endpoints 0 and 1")
        if np.any(np.diff(s) < 0.0):
            raise InvalidPartition("warp samples must be non-decreasing")
        if np.any(d < 0.0):
            raise InvalidPartition("warp derivative must be non-negative")
        object.__setattr__(self, "samples", _frozen(s))
        object.__setattr__(self, "derivative", _frozen(d))

    def __len__(self):
        return self.samples.size

    @classmethod
    def from_samples(cls, samples, r, end_slope: str = "first") -> "Diffeo1D":
        """Forward-difference derivative from samples.

        The last node has no forward difference: ``end_slope="first"``
        copies h'(r_1) there, ``"backward"`` uses the last backward difference.
        """
        r = as_partition(r)
        s = np.asarray(samples, dtype=float)
        if s.shape != r.values.shape:
            raise DimensionMismatch("samples do not match the partition length")
        d = np.empty_like(s)
        d[:-1] = np.diff(s) / r.steps
        if end_slope == "first":
            d[-1] = d[0]
        elif end_slope == "backward":
            d[-1] = d[-2]
        else:
            raise ValueError(f"unknown end_slope rule {end_slope!r}")
        return cls(s, d)

    @classmethod
    def identity(cls, r) -> "Diffeo1D":
        r = as_partition(r)
        return cls(r.values, np.ones(len(r)))


@dataclass(frozen=True, eq=False)
class Warp2D:
    """Row-wise warp h(r_i, t_j) = (h_j(r_i), t_j) of the unit square."""

    rows: tuple

    def __post_init__(self):
        rows = tuple(self.rows)
        if not rows:
            raise DimensionMismatch("warp needs at least one row")
        m = len(rows[0])
        for h in rows:
            if not isinstance(h, Diffeo1D):
                raise TypeError("warp rows must be Diffeo1D instances")
            if len(h) != m:
                raise DimensionMismatch("all warp rows must have the same length")
        object.__setattr__(self, "rows", rows)

    @property
    def shape(self):
        return len(self.rows[0]), len(self.rows)

    @classmethod
    def identity(cls, r, n: int) -> "Warp2D":
        h = Diffeo1D.identity(r)
        return cls((h,) * n)

    def samples(self) -> np.ndarray:
        """h_j(r_i) as an (M, N) array."""
        return np.stack([h.samples for h in self.rows], axis=1)

    def derivatives(self) -> np.ndarray:
        return np.stack([h.derivative for h in self.rows], axis=1)


def make_surface_grid(r, t, points) -> SurfaceGrid:
    return SurfaceGrid(as_partition(r), as_partition(t), points)


# (flip_r, flip_t) for the corners (0,0), (1,0), (1,1), (0,1) moved to the origin.
CORNERS = ((False, False), (True, False), (True, True), (False, True))


def reindex(g: SurfaceGrid, flip_r: bool, flip_t: bool, reverse: bool) -> SurfaceGrid:
    """Move a corner to the origin and optionally swap the traversal direction."""
    pts = g.points
    r, t = g.r, g.t
    if flip_r:
        pts = pts[::-1, :, :]
        r = r.flipped()
    if flip_t:
        pts = pts[:, ::-1, :]
        t = t.flipped()
    if reverse:
        pts = pts.transpose(1, 0, 2)
        r, t = t, r
    return SurfaceGrid(r, t, pts)


def candidate_moves(include_reversed: bool = True):
    """Enumerate (flip_r, flip_t, reverse) in candidate-index order."""
    moves = []
    for flip_r, flip_t in CORNERS:
        moves.append((flip_r, flip_t, False))
        if include_reversed:
            moves.append((flip_r, flip_t, True))
    return moves


def corner_candidates(
    g: SurfaceGrid, include_reversed: bool = True, require_square: bool = True
) -> list[SurfaceGrid]:
    """The lattice reindexings obtained by moving each corner to (r_1, t_1).

    Candidate ``2*c`` keeps the traversal order of corner ``c`` and ``2*c + 1``
    is the reversed (transposed) traversal; index 0 is the input itself.
    With ``include_reversed=False`` only the four corner moves are returned.

    Reversed candidates swap the roles of r and t.  When ``require_square``
    is set they are refused unless M == N.
    """
    if include_reversed and require_square and len(g.r) != len(g.t):
        raise NonSquareReversal(
            f"reversed candidates need M == N, got M={len(g.r)}, N={len(g.t)}"
        )
    return [reindex(g, *move) for move in candidate_moves(include_reversed)]


def stack_rows(rows: Sequence[np.ndarray]) -> np.ndarray:
    """Assemble N arrays of shape (M, 3) into an (M, N, 3) lattice."""
    return np.stack(rows, axis=1)
