import numpy as np
import pytest

from esr3d.errors import DegenerateSurface, DimensionMismatch, GridTooSmall, PartitionMismatch
from esr3d.generators import SurfaceFamily, generate
from esr3d.grid import Diffeo1D, Partition, ShapeField, SurfaceGrid, Warp2D
from esr3d.rigid import is_rotation
from esr3d.shape import (
    field_distance,
    field_norm_squared,
    normalize_unit_area,
    partial_derivatives,
    reparametrize_grid,
    shape_function,
    surface_area,
    warp_action,
)

P = np.array([[0, 1, 0], [0, 0, 1], [1, 0, 0]], dtype=float)


def grid_from(fn, m, n, r=None, t=None):
    r = Partition.uniform(m) if r is None else Partition(r)
    t = Partition.uniform(n) if t is None else Partition(t)
    rr, tt = np.meshgrid(r.values, t.values, indexing="ij")
    return SurfaceGrid(r, t, fn(rr, tt))


def flat(scale=1.0):
    return lambda r, t: np.stack([scale * r, scale * t, 0 * r], axis=-1)


def random_rotation(rng):
    q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    return q * np.sign(np.linalg.det(q))


def smooth_warp(r, t, amp=0.3):
    rows = []
    for tj in t.values:
        a = amp * (0.5 + 0.5 * np.sin(2 * np.pi * tj))
        s = r.values + a * r.values * (1 - r.values)
        s[0], s[-1] = 0.0, 1.0
        rows.append(Diffeo1D.from_samples(s, r, "backward"))
    return Warp2D(tuple(rows))


def test_flat_patch_derivatives():
    dr, dt = partial_derivatives(grid_from(flat(), 5, 5))
    np.testing.assert_allclose(dr, np.broadcast_to([1, 0, 0], dr.shape), atol=1e-15)
    np.testing.assert_allclose(dt, np.broadcast_to([0, 1, 0], dt.shape), atol=1e-15)


def test_centered_difference_of_square():
    g = grid_from(lambda r, t: np.stack([r ** 2, t, 0 * r], axis=-1), 5, 5)
    dr, _ = partial_derivatives(g)
    assert dr[2, 1, 0] == pytest.approx(1.0, abs=1e-15)
    # one-sided first-order at the boundary
    assert dr[0, 0, 0] == pytest.approx(0.25 ** 2 / 0.25)


def test_nonuniform_centered_stencil():
    g = grid_from(lambda r, t: np.stack([r ** 2, t, 0 * r], axis=-1), 4, 3, r=[0, 0.2, 0.7, 1])
    dr, _ = partial_derivatives(g)
    assert dr[1, 0, 0] == pytest.approx((0.49 - 0.0) / 0.7)


def test_too_small():
    with pytest.raises(GridTooSmall):
        partial_derivatives(grid_from(flat(), 2, 2))


def test_flat_shape_function():
    q = shape_function(grid_from(flat(), 6, 7))
    np.testing.assert_allclose(q.vectors, np.broadcast_to([0, 0, 1], q.vectors.shape), atol=1e-15)


def test_sine_shape_function_closed_form():
    g = generate(SurfaceFamily("sine1", 2), Partition.uniform(101), Partition.uniform(101))
    q = shape_function(g).vectors
    r = g.r.values[1:-1]
    zr = 2 * np.pi * np.cos(2 * np.pi * r)
    exact = np.stack([-zr, 0 * zr, np.ones_like(zr)], axis=-1) / (1 + zr ** 2)[:, None] ** 0.25
    # centered differences are second order: error ~ (k pi)^3 dr^2 / 6
    np.testing.assert_allclose(q[1:-1, 50], exact, atol=3e-3)


def test_degenerate_node_gives_zero():
    # c(r, t) = (r + t, r + t, 0): dr parallel to dt everywhere
    g = grid_from(lambda r, t: np.stack([r + t, r + t, 0 * r], axis=-1), 4, 4)
    np.testing.assert_array_equal(shape_function(g).vectors, 0.0)


@pytest.mark.parametrize("m", [2, 5, 17])
def test_flat_area_exact(m):
    assert surface_area(grid_from(flat(), m, m + 1)) == pytest.approx(1.0, abs=1e-14)


def test_helicoid_area(oracles):
    g = generate(SurfaceFamily("helicoid1", 4), Partition.uniform(101), Partition.uniform(101))
    assert abs(surface_area(g) - oracles["helicoid_area_k4"]) <= 1e-2


def test_normalize():
    g = grid_from(flat(2.0), 5, 5)
    n = normalize_unit_area(g)
    np.testing.assert_allclose(n.points, g.points / 2)
    assert surface_area(n) == pytest.approx(1.0, rel=1e-12)
    h = normalize_unit_area(generate(SurfaceFamily("helicoid1", 4), Partition.uniform(101), Partition.uniform(101)))
    assert abs(surface_area(h) - 1.0) <= 1e-9
    unit = grid_from(flat(), 5, 5)
    np.testing.assert_allclose(normalize_unit_area(unit).points, unit.points)


def test_normalize_degenerate():
    with pytest.raises(DegenerateSurface):
        normalize_unit_area(grid_from(lambda r, t: np.zeros(r.shape + (3,)), 4, 4))


def test_norm_equals_area():
    for fam in [SurfaceFamily("sine1", 2), SurfaceFamily("helicoid2", 4), SurfaceFamily("cossine1", 1)]:
        g = generate(fam, Partition.uniform(101), Partition.uniform(101))
        a = surface_area(g)
        assert abs(field_norm_squared(shape_function(g)) - a) / a <= 2e-2


def test_identity_warp_action_exact():
    g = generate(SurfaceFamily("sine2", 3), Partition.uniform(11), Partition.uniform(9))
    q = shape_function(g)
    out = warp_action(q, Warp2D.identity(q.r, len(q.t)))
    np.testing.assert_array_equal(out.vectors, q.vectors)


def test_constant_field_action():
    r, t = Partition.uniform(11), Partition.uniform(4)
    q = ShapeField(r, t, np.broadcast_to([0.0, 0.0, 1.0], (11, 4, 3)))
    rows = tuple(Diffeo1D.from_samples(r.values ** 2, r, "first") for _ in range(4))
    out = warp_action(q, Warp2D(rows))
    expect = np.sqrt(rows[0].derivative)
    np.testing.assert_allclose(out.vectors[:, 2, 2], expect, atol=1e-14)
    np.testing.assert_allclose(out.vectors[..., :2], 0.0, atol=1e-14)


def test_warp_action_dimension_mismatch():
    r = Partition.uniform(5)
    q = ShapeField(r, Partition.uniform(2), np.zeros((5, 2, 3)))
    with pytest.raises(DimensionMismatch):
        warp_action(q, Warp2D.identity(r, 3))


def test_field_distance_examples():
    r, t = Partition([0, 0.3, 1]), Partition.uniform(4)
    shape = (3, 4, 3)
    e3 = ShapeField(r, t, np.broadcast_to([0.0, 0, 1], shape))
    zero = ShapeField(r, t, np.zeros(shape))
    e1 = ShapeField(r, t, np.broadcast_to([1.0, 0, 0], shape))
    e2 = ShapeField(r, t, np.broadcast_to([0.0, 1, 0], shape))
    assert field_distance(e3, e3) == 0.0
    assert field_distance(e3, zero) == pytest.approx(1.0, abs=1e-15)
    assert field_distance(e1, e2) == pytest.approx(np.sqrt(2), abs=1e-15)
    with pytest.raises(PartitionMismatch):
        field_distance(e3, ShapeField(Partition.uniform(3), t, np.zeros(shape)))


def _area_error(fam, m):
    r = Partition.uniform(m)
    g = generate(fam, r, r)
    a0 = surface_area(g)
    return abs(surface_area(reparametrize_grid(g, smooth_warp(r, r))) - a0)


@pytest.mark.parametrize("kind,k", [("sine1", 2), ("helicoid1", 4), ("cossine2", 1)])
def test_area_invariance_converges(kind, k):
    fam = SurfaceFamily(kind, k)
    errs = [_area_error(fam, m) for m in (26, 51, 101)]
    assert errs[2] <= 2e-2
    assert errs[0] > errs[1] > errs[2]


def _isometry_error(m):
    r = Partition.uniform(m)
    q1 = shape_function(normalize_unit_area(generate(SurfaceFamily("sine1", 2), r, r)))
    q2 = shape_function(normalize_unit_area(generate(SurfaceFamily("sine2", 3), r, r))).rotated(P)
    h = smooth_warp(r, r)
    return abs(field_distance(warp_action(q1, h), warp_action(q2, h)) - field_distance(q1, q2))


def test_warp_isometry_converges():
    errs = [_isometry_error(m) for m in (26, 51, 101)]
    assert errs[2] <= 2e-2
    assert errs[0] > errs[1] > errs[2]


def test_rotation_isometry_and_commuting(rng):
    r, t = Partition.uniform(21), Partition.uniform(17)
    q1 = shape_function(generate(SurfaceFamily("cossine1"), r, t))
    q2 = shape_function(generate(SurfaceFamily("helicoid2", 4), r, t))
    h = smooth_warp(r, t)
    for _ in range(20):
        R = random_rotation(rng)
        assert is_rotation(R)
        assert abs(field_distance(q1.rotated(R), q2.rotated(R)) - field_distance(q1, q2)) <= 1e-12
        a = warp_action(q1.rotated(R), h).vectors
        b = warp_action(q1, h).rotated(R).vectors
        assert np.max(np.abs(a - b)) <= 1e-12
