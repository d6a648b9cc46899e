"""Discrete differential geometry on surface lattices.

Shape function of a parametrized surface c:

    q = (c_r x c_t) / sqrt(|c_r x c_t|)

so that the squared L2 norm of q is the surface area.  Integrals over the
unit square use the composite trapezoid rule on the (possibly
non-uniform) partitions.
"""

from __future__ import annotations

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import DegenerateSurface, DimensionMismatch, GridTooSmall
from .grid import Diffeo1D, ShapeField, SurfaceGrid, Warp2D, check_same_lattice

EPS_ZERO = 1e-12


def _diff_along(c: np.ndarray, x: np.ndarray, axis: int) -> np.ndarray:
    c = np.moveaxis(c, axis, 0)
    d = np.empty_like(c)
    dx = (x[2:] - x[:-2]).reshape((-1,) + (1,) * (c.ndim - 1))
    d[1:-1] = (c[2:] - c[:-2]) / dx
    d[0] = (c[1] - c[0]) / (x[1] - x[0])
    d[-1] = (c[-1] - c[-2]) / (x[-1] - x[-2])
    return np.moveaxis(d, 0, axis)


def partial_derivatives(g: SurfaceGrid):
    """Finite-difference partials (dc/dr, dc/dt), each of shape (M, N, 3).

    Centered differences at interior nodes, one-sided first-order
    differences on the boundary.
    """
    m, n = g.shape
    if m < 3 or n < 3:
        raise GridTooSmall(f"need at least 3x3 nodes for centered differences, got {m}x{n}")
    dr = _diff_along(g.points, g.r.values, axis=0)
    dt = _diff_along(g.points, g.t.values, axis=1)
    return dr, dt


def shape_vectors(normal: np.ndarray) -> np.ndarray:
    """Map normals n = c_r x c_t to n / sqrt(|n|), zero where |n| <= EPS_ZERO."""
    norm = np.linalg.norm(normal, axis=-1, keepdims=True)
    out = np.zeros_like(normal)
    ok = norm[..., 0] > EPS_ZERO
    out[ok] = normal[ok] / np.sqrt(norm[ok])
    return out


def shape_function(g: SurfaceGrid) -> ShapeField:
    dr, dt = partial_derivatives(g)
    return ShapeField(g.r, g.t, shape_vectors(np.cross(dr, dt)))


def surface_area(g: SurfaceGrid) -> float:
    """Area of the triangulation that splits every lattice cell along its diagonal.

    Each cell contributes the triangles
    (c[i,j], c[i+1,j+1], c[i,j+1]) and (c[i,j], c[i+1,j], c[i+1,j+1]).
    """
    p = g.points
    p00 = p[:-1, :-1]
    p10 = p[1:, :-1]
    p11 = p[1:, 1:]
    p01 = p[:-1, 1:]
    a1 = np.linalg.norm(np.cross(p11 - p00, p01 - p00), axis=-1)
    a2 = np.linalg.norm(np.cross(p10 - p00, p11 - p00), axis=-1)
    return float(0.5 * (a1.sum() + a2.sum()))


def normalize_unit_area(g: SurfaceGrid) -> SurfaceGrid:
    """Scale every point by 1/sqrt(A) so the triangulated area becomes 1."""
    area = surface_area(g)
    if not area > EPS_ZERO:
        raise DegenerateSurface(f"surface area {area!r} too small to normalize")
    return g.with_points(g.points / np.sqrt(area))


def natural_spline(x, y) -> CubicSpline:
    """Natural cubic spline through (x_i, y_i), vector-valued along axis 0."""
    return CubicSpline(np.asarray(x, dtype=float), np.asarray(y, dtype=float),
                       axis=0, bc_type="natural")


def resample_row(values: np.ndarray, r: np.ndarray, at: np.ndarray) -> np.ndarray:
    """Evaluate the natural spline through (r_i, values_i) at ``at`` (clipped to [0, 1]).

    Positions that coincide with a knot return the knot value itself, so the
    identity warp reproduces its input bit for bit.
    """
    r = np.asarray(r, dtype=float)
    values = np.asarray(values, dtype=float)
    at = np.clip(np.asarray(at, dtype=float), 0.0, 1.0)
    out = natural_spline(r, values)(at)
    idx = np.minimum(np.searchsorted(r, at), r.size - 1)
    hit = r[idx] == at
    out[hit] = values[idx[hit]]
    return out


def warp_row(values: np.ndarray, r: np.ndarray, h: Diffeo1D) -> np.ndarray:
    """The action on one row: values(h(r_i)) * sqrt(h'(r_i))."""
    return resample_row(values, r, h.samples) * np.sqrt(h.derivative)[:, None]


def warp_action(q: ShapeField, h: Warp2D) -> ShapeField:
    """Reparametrize a shape field by a row-wise warp.

    Row j becomes q_j(h_j(r_i)) * sqrt(h_j'(r_i)); for warps that only move
    the r coordinate the Jacobian determinant is h_j'.
    """
    m, n = q.shape
    if h.shape != (m, n):
        raise DimensionMismatch(f"warp shape {h.shape} does not match field shape {(m, n)}")
    r = q.r.values
    rows = [warp_row(q.row(j), r, hj) for j, hj in enumerate(h.rows)]
    return ShapeField(q.r, q.t, np.stack(rows, axis=1))


def reparametrize_grid(g: SurfaceGrid, h: Warp2D) -> SurfaceGrid:
    """Points c_j(h_j(r_i)) by per-row spline interpolation (no Jacobian factor)."""
    if h.shape != g.shape:
        raise DimensionMismatch(f"warp shape {h.shape} does not match grid shape {g.shape}")
    r = g.r.values
    rows = [resample_row(g.points[:, j, :], r, hj.samples) for j, hj in enumerate(h.rows)]
    return g.with_points(np.stack(rows, axis=1))


def lattice_integral(values: np.ndarray, r, t) -> float:
    """Trapezoid-rule integral of an (M, N) array over the unit square."""
    return float(r.weights @ values @ t.weights)


def squared_field_distance(q1: ShapeField, q2: ShapeField) -> float:
    check_same_lattice(q1, q2)
    diff = np.sum((q1.vectors - q2.vectors) ** 2, axis=-1)
    return lattice_integral(diff, q1.r, q1.t)


def field_distance(q1: ShapeField, q2: ShapeField) -> float:
    """Discrete L2 distance between two shape fields on the same lattice."""
    return float(np.sqrt(squared_field_distance(q1, q2)))


def field_norm_squared(q: ShapeField) -> float:
    return lattice_integral(np.sum(q.vectors ** 2, axis=-1), q.r, q.t)
