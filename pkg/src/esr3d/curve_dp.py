"""Elastic matching of one lattice row by dynamic programming.

Given two rows q1, q2 (M vectors in R^3 sampled on the partition r), find
a non-decreasing h with h(0) = 0, h(1) = 1 minimizing the trapezoid energy

    E(h) = sum_i w_i |q1(r_i) - q2(h(r_i)) sqrt(h'(r_i))|^2

where w are the trapezoid weights of r, q2 is evaluated between nodes by a
natural cubic spline and h' is the forward difference of h.  The last node
has no forward difference; it either copies h'(r_1) (``end_slope="first"``)
or reuses the last forward difference (``end_slope="backward"``).

Search space: h is piecewise linear with breakpoints at lattice nodes
(i, m), meaning h(r_i) = y_m, where y is r with every interval split into
``refine`` equal parts.  A move (a, b) advances i by a and m by b, with
gcd(a, b) = 1; every domain node it spans gets the move's slope as h'.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd

import numpy as np

from .errors import DimensionMismatch, GridTooSmall
from .grid import Diffeo1D, as_partition
from .shape import natural_spline, resample_row


@dataclass(frozen=True)
class DpConfig:
    """Search window of the lattice DP and of the window-strip refinement.

    Moves advance the domain index by 1..max_slope_den and the refined
    target index by 1..max_slope_num.  On a uniform partition the slopes
    are ``b / (a * refine)``; the default allows 1/2 .. 30 in steps of 1/2
    with a breakpoint at every domain node.

    The lattice optimum is then polished by ``strip_levels`` window-strip
    passes: each interior node may move by up to ``strip_halfwidth`` steps
    of a width that halves from one level to the next, starting at the
    lattice spacing.  Set ``strip_levels=0`` for the plain lattice DP.
    """

    max_slope_num: int = 60
    max_slope_den: int = 1
    refine: int = 2
    end_slope: str = "backward"
    strip_levels: int = 12
    strip_halfwidth: int = 4

    def __post_init__(self):
        if self.max_slope_num < 1 or self.max_slope_den < 1:
            raise ValueError("slope bounds must be >= 1")
        if self.refine < 1:
            raise ValueError("refine must be >= 1")
        if self.max_slope_num * self.max_slope_den < self.refine:
            raise ValueError("slope window cannot reach the end of the target lattice")
        if self.end_slope not in ("first", "backward"):
            raise ValueError(f"end_slope must be 'first' or 'backward', got {self.end_slope!r}")
        if self.strip_levels < 0 or self.strip_halfwidth < 1:
            raise ValueError("strip_levels must be >= 0 and strip_halfwidth >= 1")

    @property
    def max_slope(self) -> float:
        """Steepest slope of the lattice stage on a uniform partition."""
        return self.max_slope_num / self.refine

    def moves(self) -> list[tuple[int, int]]:
        """Coprime (domain step, target step) pairs, smallest domain step first."""
        return [
            (a, b)
            for a in range(1, self.max_slope_den + 1)
            for b in range(1, self.max_slope_num + 1)
            if gcd(a, b) == 1
        ]


@dataclass(frozen=True, eq=False)
class RowEnergy:
    value: float
    per_node: np.ndarray


def _as_row(x, m=None):
    a = np.asarray(x, dtype=float)
    if a.ndim != 2 or a.shape[1] != 3:
        raise DimensionMismatch(f"row must have shape (M, 3), got {a.shape}")
    if m is not None and a.shape[0] != m:
        raise DimensionMismatch(f"row has {a.shape[0]} nodes, expected {m}")
    return a


def row_energy(q1row, q2row, h: Diffeo1D, r) -> RowEnergy:
    r = as_partition(r)
    m = len(r)
    q1 = _as_row(q1row, m)
    q2 = _as_row(q2row, m)
    if len(h) != m:
        raise DimensionMismatch(f"warp has {len(h)} samples, expected {m}")
    warped = resample_row(q2, r.values, h.samples) * np.sqrt(h.derivative)[:, None]
    per_node = np.sum((q1 - warped) ** 2, axis=1)
    return RowEnergy(float(r.weights @ per_node), per_node)


def identity_energy(q1row, q2row, r) -> RowEnergy:
    r = as_partition(r)
    return row_energy(q1row, q2row, Diffeo1D.identity(r), r)


def target_lattice(r: np.ndarray, refine: int) -> np.ndarray:
    """``r`` with each interval split into ``refine`` equal parts; y[k*refine] == r[k]."""
    if refine == 1:
        return np.array(r, dtype=float)
    frac = np.arange(refine) / refine
    y = (r[:-1, None] + np.diff(r)[:, None] * frac[None, :]).ravel()
    return np.append(y, r[-1])


def _positions(r, i, a, y0, y1):
    """h at domain nodes i..i+a-1 on the segment from (r_i, y0) to (r_{i+a}, y1).

    ``y0``/``y1`` broadcast; the result has a trailing axis of length a.
    """
    frac = (r[i:i + a] - r[i]) / (r[i + a] - r[i])
    y0 = np.asarray(y0)[..., None]
    y1 = np.asarray(y1)[..., None]
    return y0 + (y1 - y0) * frac


class _RowProblem:
    def __init__(self, q1, q2, r, cfg):
        self.q1 = q1
        self.r = r
        self.w = as_partition(r).weights
        self.spline = natural_spline(r, q2)
        self.y = target_lattice(r, cfg.refine)
        self.end = self.spline(1.0)
        s_y = self.spline(self.y)
        # w |q1 - S sqrt(s)|^2 = w (|q1|^2 - 2 sqrt(s) q1.S + s |S|^2) at lattice points
        self.q1sq = np.sum(q1 ** 2, axis=1)
        self.dot = q1 @ s_y.T
        self.ssq = np.sum(s_y ** 2, axis=1)

    def unit_costs(self, i, bs):
        """Cost of node i under the moves (1, b), b in ``bs``, from every lattice point."""
        y = self.y
        F = y.size
        tgt = np.arange(F)[:, None] + bs[None, :]
        ok = tgt < F
        tgt = np.minimum(tgt, F - 1)
        s = np.where(ok, (y[tgt] - y[:, None]) / (self.r[i + 1] - self.r[i]), 0.0)
        cost = self.w[i] * (self.q1sq[i] - 2.0 * np.sqrt(s) * self.dot[i][:, None] + s * self.ssq[:, None])
        return np.where(ok, cost, np.inf), s, tgt, ok

    def move_costs(self, i, a, b):
        """Cost of nodes i..i+a-1 under the move (a, b) from every lattice point."""
        y = self.y
        F = y.size
        m = np.arange(F - b)
        y0, y1 = y[m], y[m + b]
        s = (y1 - y0) / (self.r[i + a] - self.r[i])
        pos = _positions(self.r, i, a, y0, y1)
        vals = self.spline(pos) * np.sqrt(s)[:, None, None]
        diff = self.q1[i:i + a][None, :, :] - vals
        cost = np.full(F, np.inf)
        cost[m] = np.einsum("a,mak->m", self.w[i:i + a], diff ** 2)
        slope = np.zeros(F)
        slope[m] = s
        return cost, slope

    def end_cost(self, s):
        """Cost of the last node when its derivative is ``s``."""
        return self.w[-1] * np.sum((self.q1[-1] - np.multiply.outer(np.sqrt(s), self.end)) ** 2, axis=-1)


def dp_match(q1row, q2row, r, cfg: DpConfig | None = None) -> Diffeo1D:
    """Warp of [0, 1] minimizing the row energy over the configured lattice paths.

    Runs a backward (cost-to-go) recursion, so the coupling between the
    first slope and the last node under ``end_slope="first"`` is resolved
    exactly when the first move is chosen.  Ties resolve to the earliest
    move in :meth:`DpConfig.moves` order.
    """
    cfg = cfg or DpConfig()
    part = as_partition(r)
    M = len(part)
    if M < 3:
        raise GridTooSmall(f"row matching needs at least 3 nodes, got {M}")
    q1 = _as_row(q1row, M)
    q2 = _as_row(q2row, M)
    rv = part.values
    prob = _RowProblem(q1, q2, rv, cfg)
    F = prob.y.size
    moves = cfg.moves()
    unit_bs = np.array([b for a, b in moves if a == 1])
    wide = [(k, a, b) for k, (a, b) in enumerate(moves) if a > 1]
    backward_end = cfg.end_slope == "backward"

    # G[i, m]: least energy of nodes i.. over paths from (i, m) to (M-1, F-1)
    G = np.full((M, F), np.inf)
    G[M - 1, F - 1] = 0.0
    choice = np.full((M, F), -1, dtype=np.int32)
    first_total = None

    for i in range(M - 2, -1, -1):
        best = np.full(F, np.inf)
        arg = np.full(F, -1, dtype=np.int32)
        firsts = []
        if unit_bs.size:
            cost, s, tgt, ok = prob.unit_costs(i, unit_bs)
            if i + 1 == M - 1 and backward_end:
                cost = cost + np.where(ok, prob.end_cost(s), 0.0)
            cand = cost + G[i + 1][tgt]
            if i == 0 and not backward_end:
                firsts.append(cand[0] + prob.end_cost(s[0]))
            k = np.argmin(cand, axis=1)
            best = cand[np.arange(F), k]
            arg = np.where(np.isfinite(best), k, -1).astype(np.int32)
        for k, a, b in wide:
            if i + a > M - 1 or b > F - 1:
                if i == 0 and not backward_end:
                    firsts.append(np.array([np.inf]))
                continue
            cost, s = prob.move_costs(i, a, b)
            if i + a == M - 1 and backward_end:
                cost = cost + prob.end_cost(s)
            nxt = np.full(F, np.inf)
            nxt[: F - b] = G[i + a, b:]
            cand = cost + nxt
            if i == 0 and not backward_end:
                firsts.append(np.array([cand[0] + prob.end_cost(s[0])]))
            better = cand < best
            best = np.where(better, cand, best)
            arg = np.where(better, k, arg)
        G[i] = best
        choice[i] = arg
        if i == 0 and not backward_end:
            first_total = np.concatenate(firsts)

    if first_total is not None:
        k0 = int(np.argmin(first_total))
        if not np.isfinite(first_total[k0]):
            raise GridTooSmall("no admissible path for this slope window")
        choice[0, 0] = k0
    elif not np.isfinite(G[0, 0]):
        raise GridTooSmall("no admissible path for this slope window")

    samples = np.empty(M)
    i, m = 0, 0
    while i < M - 1:
        a, b = moves[choice[i, m]]
        samples[i:i + a] = _positions(rv, i, a, prob.y[m], prob.y[m + b])
        i, m = i + a, m + b
    samples[-1] = 1.0

    step = np.min(np.diff(prob.y))
    for level in range(cfg.strip_levels):
        delta = step / 2 ** level
        # repeat at a fixed width until the path settles, so it can drift
        # further than one window from the lattice solution
        for _ in range(_MAX_STRIP_PASSES):
            moved = _strip_pass(prob, samples, delta, cfg)
            if np.array_equal(moved, samples):
                break
            samples = moved
    return Diffeo1D.from_samples(samples, part, cfg.end_slope)


_MAX_STRIP_PASSES = 50


def _strip_pass(prob, samples, delta, cfg):
    """One window-strip pass: every interior node may move by k*delta, |k| <= halfwidth.

    The current samples are among the candidates, so the energy never
    increases.  Slopes are kept within [0, max_slope * max_slope_den].
    """
    r = prob.r
    M = r.size
    K = cfg.strip_halfwidth
    smax = cfg.max_slope * cfg.max_slope_den
    # cands[i, k]: candidate h(r_i); the fixed endpoints repeat 0 and 1
    cands = np.clip(samples[:, None] + np.arange(-K, K + 1)[None, :] * delta, 0.0, 1.0)
    cands[0] = 0.0
    cands[-1] = 1.0
    vals = prob.spline(cands.ravel()).reshape(M, 2 * K + 1, 3)
    dots = np.einsum("ik,ick->ic", prob.q1, vals)[:-1, :, None]
    ssqs = np.sum(vals ** 2, axis=-1)[:-1, :, None]

    s = (cands[1:, None, :] - cands[:-1, :, None]) / np.diff(r)[:, None, None]
    ok = (s >= 0.0) & (s <= smax)
    s = np.where(ok, s, 0.0)
    w = prob.w[:-1, None, None]
    cost = w * (prob.q1sq[:-1, None, None] - 2.0 * np.sqrt(s) * dots + s * ssqs)
    end_at = M - 2 if cfg.end_slope == "backward" else 0
    cost[end_at] += prob.end_cost(s[end_at])
    cost[~ok] = np.inf

    choice = np.empty((M - 1, 2 * K + 1), dtype=np.intp)
    G = np.zeros(2 * K + 1)
    rows = np.arange(2 * K + 1)
    for i in range(M - 2, -1, -1):
        total = cost[i] + G
        c = total.argmin(axis=1)
        choice[i] = c
        G = total[rows, c]

    k = int(np.argmin(G))
    if not np.isfinite(G[k]):
        return samples
    out = np.empty(M)
    for i in range(M - 1):
        out[i] = cands[i, k]
        k = choice[i, k]
    out[-1] = 1.0
    return out
