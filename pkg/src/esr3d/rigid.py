"""Optimal rotation between shape fields (weighted Kabsch-Umeyama).

The 3x3 SVD is computed with one-sided (Hestenes) Jacobi rotations, so the
alignment has no dependency on a LAPACK driver.
"""

from __future__ import annotations

import numpy as np

from .grid import ShapeField, check_same_lattice

MAX_SWEEPS = 60
OFF_TOL = 1e-14


def _complete_basis(u: np.ndarray, rank: int) -> np.ndarray:
    """Fill columns rank..2 of ``u`` so that it is orthogonal."""
    if rank == 0:
        return np.eye(3)
    if rank == 1:
        a = u[:, 0]
        # pick the coordinate axis least aligned with a
        e = np.zeros(3)
        e[np.argmin(np.abs(a))] = 1.0
        b = e - (e @ a) * a
        u[:, 1] = b / np.linalg.norm(b)
    u[:, 2] = np.cross(u[:, 0], u[:, 1])
    return u


def svd3(m):
    """Singular value decomposition of a 3x3 matrix.

    Returns ``(U, S, V)`` with ``m = U @ diag(S) @ V.T``, U and V orthogonal,
    and S non-negative and sorted in descending order.  Signs of the
    singular vectors are not canonicalized.
    """
    a = np.array(m, dtype=float)
    if a.shape != (3, 3):
        raise ValueError(f"svd3 expects a 3x3 matrix, got shape {a.shape}")
    u = a.copy()
    v = np.eye(3)
    for _ in range(MAX_SWEEPS):
        off = 0.0
        for p, q in ((0, 1), (0, 2), (1, 2)):
            alpha = u[:, p] @ u[:, p]
            beta = u[:, q] @ u[:, q]
            gamma = u[:, p] @ u[:, q]
            if gamma == 0.0:
                continue
            scale = np.sqrt(alpha * beta)
            if scale > 0.0:
                off = max(off, abs(gamma) / scale)
            if abs(gamma) <= OFF_TOL * scale:
                continue
            if abs(beta - alpha) > 1e8 * abs(2.0 * gamma):
                # |zeta| huge: tan ~ 1 / (2 zeta), and zeta itself may overflow
                tan = gamma / (beta - alpha)
            else:
                zeta = (beta - alpha) / (2.0 * gamma)
                tan = np.copysign(1.0, zeta) / (abs(zeta) + np.hypot(1.0, zeta))
            cos = 1.0 / np.hypot(1.0, tan)
            sin = cos * tan
            up, uq = u[:, p].copy(), u[:, q].copy()
            u[:, p] = cos * up - sin * uq
            u[:, q] = sin * up + cos * uq
            vp, vq = v[:, p].copy(), v[:, q].copy()
            v[:, p] = cos * vp - sin * vq
            v[:, q] = sin * vp + cos * vq
        if off < OFF_TOL:
            break

    s = np.linalg.norm(u, axis=0)
    order = np.argsort(-s, kind="stable")
    s, u, v = s[order], u[:, order], v[:, order]

    cutoff = s[0] * 1e-13
    rank = int(np.sum(s > cutoff))
    for k in range(rank):
        u[:, k] /= s[k]
    if rank < 3:
        u = _complete_basis(u, rank)
    return u, s, v


def cross_covariance(a: ShapeField, b: ShapeField) -> np.ndarray:
    """A[k, l] = sum_j wt_j sum_i wr_i a(r_i, t_j)_k b(r_i, t_j)_l."""
    check_same_lattice(a, b)
    w = np.outer(a.r.weights, a.t.weights)
    return np.einsum("ij,ijk,ijl->kl", w, a.vectors, b.vectors)


def kabsch_umeyama(a: ShapeField, b: ShapeField):
    """Proper rotation R maximizing the weighted sum of a . (R b).

    Returns ``(R, maxtrace)`` where ``maxtrace = tr(R A^T)`` for the cross
    covariance A of ``a`` and ``b``.
    """
    A = cross_covariance(a, b)
    U, _, V = svd3(A)
    s3 = 1.0 if np.linalg.det(U @ V) > 0 else -1.0
    R = U @ np.diag([1.0, 1.0, s3]) @ V.T
    return R, float(np.trace(R @ A.T))


def is_rotation(R, tol: float = 1e-10) -> bool:
    R = np.asarray(R, dtype=float)
    if R.shape != (3, 3):
        return False
    return bool(np.max(np.abs(R.T @ R - np.eye(3))) <= tol and abs(np.linalg.det(R) - 1.0) <= tol)
