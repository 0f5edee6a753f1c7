"""Dense linear-algebra primitives.

Conventions used everywhere in the package:

* float64 throughout, no extended precision;
* ``vec`` is column stacking (Fortran order), see :func:`vec` / :func:`unvec`;
* Householder QR returns ``R`` with a nonnegative diagonal.
"""
from __future__ import annotations

import numpy as np
import scipy.linalg as sla

from .errors import NoConvergence, NotSPD, RankDeficient, SingularTriangular

__all__ = [
    "as_matrix",
    "vec",
    "unvec",
    "householder_vector",
    "householder_reflectors",
    "apply_reflectors",
    "apply_reflectors_t",
    "householder_qr",
    "thin_qr",
    "cholesky_spd",
    "solve_triangular",
    "svd",
    "cond2",
]


def as_matrix(M, name="matrix", check_finite=True):
    """Return ``M`` as a 2-D float64 array, rejecting NaN/Inf."""
    A = np.asarray(M, dtype=np.float64)
    if A.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {A.shape}")
    if check_finite and not np.all(np.isfinite(A)):
        raise ValueError(f"{name} has non-finite entries")
    return A


def vec(M):
    """Column-major vectorization: ``vec(M)[i + j*rows] == M[i, j]``."""
    return np.asarray(M).reshape(-1, order="F")


def unvec(x, rows, cols):
    return np.asarray(x).reshape((rows, cols), order="F")


def householder_vector(x):
    """Reflector ``(v, beta)`` with ``v[0] == 1`` and ``(I - beta v v^T) x = ||x|| e_1``.

    The image is always the *nonnegative* multiple of ``e_1``; for ``x`` with
    ``x[0] > 0`` the cancellation-free form of ``x[0] - ||x||`` is used.
    """
    x = np.asarray(x, dtype=np.float64)
    v = x.copy()
    v[0] = 1.0
    sigma = float(x[1:] @ x[1:])
    x0 = float(x[0])
    if sigma == 0.0:
        # already a multiple of e_1: identity, or a sign flip when x0 < 0
        return v, (0.0 if x0 >= 0.0 else 2.0)
    mu = np.sqrt(x0 * x0 + sigma)
    v0 = x0 - mu if x0 <= 0.0 else -sigma / (x0 + mu)
    beta = 2.0 * v0 * v0 / (sigma + v0 * v0)
    v[1:] /= v0
    return v, beta


def householder_reflectors(M):
    """Compact Householder QR of an ``n x p`` matrix (``n >= p``).

    Returns
    -------
    V : (n, p) ndarray
        Column ``j`` holds the reflector vector in rows ``j:`` (unit leading
        entry), zeros above.
    betas : (p,) ndarray
    R : (p, p) ndarray
        Upper triangular with nonnegative diagonal.
    """
    A = as_matrix(M).copy()
    n, p = A.shape
    if n < p:
        raise ValueError(f"need n >= p, got {A.shape}")
    V = np.zeros((n, p))
    betas = np.zeros(p)
    for j in range(p):
        v, beta = householder_vector(A[j:, j])
        if beta != 0.0:
            A[j:, j:] -= np.outer(beta * v, v @ A[j:, j:])
        V[j:, j] = v
        betas[j] = beta
    R = np.triu(A[:p, :])
    return V, betas, R


def apply_reflectors_t(V, betas, B):
    """Compute ``Q^T B`` for the orthogonal ``Q = H_1 H_2 ... H_p``."""
    B = np.array(B, dtype=np.float64, copy=True)
    for j in range(V.shape[1]):
        if betas[j] != 0.0:
            v = V[j:, j]
            B[j:] -= np.outer(betas[j] * v, v @ B[j:])
    return B


def apply_reflectors(V, betas, B):
    """Compute ``Q B`` for the orthogonal ``Q = H_1 H_2 ... H_p``."""
    B = np.array(B, dtype=np.float64, copy=True)
    for j in reversed(range(V.shape[1])):
        if betas[j] != 0.0:
            v = V[j:, j]
            B[j:] -= np.outer(betas[j] * v, v @ B[j:])
    return B


def _check_rank(R, scale):
    d = np.abs(np.diag(R))
    bad = np.flatnonzero(d < 1e-12 * scale)
    if bad.size:
        raise RankDeficient(
            f"|R[{bad[0]},{bad[0]}]| = {d[bad[0]]:.3e} below 1e-12*||M||_F = {1e-12 * scale:.3e}"
        )


def householder_qr(M):
    """Full Householder QR: ``Q_full @ vstack([R, 0]) == M``.

    Returns ``(Q_full, R)`` with ``Q_full`` ``n x n`` orthogonal and ``R`` ``p x p``
    upper triangular with ``diag(R) >= 0``. Raises :class:`RankDeficient` when a
    diagonal entry of ``R`` falls below ``1e-12 * ||M||_F``.
    """
    A = as_matrix(M)
    V, betas, R = householder_reflectors(A)
    _check_rank(R, np.linalg.norm(A))
    Q = apply_reflectors(V, betas, np.eye(A.shape[0]))
    return Q, R


def thin_qr(M):
    """Thin QR ``M = Q R`` with ``Q`` ``n x p`` and ``diag(R) >= 0``."""
    A = as_matrix(M)
    n, p = A.shape
    V, betas, R = householder_reflectors(A)
    _check_rank(R, np.linalg.norm(A))
    Q = apply_reflectors(V, betas, np.eye(n, p))
    return Q, R


def cholesky_spd(S):
    """Lower Cholesky factor of a symmetric positive definite matrix."""
    S = as_matrix(S, "S")
    if S.shape[0] != S.shape[1]:
        raise ValueError("S must be square")
    scale = np.linalg.norm(S)
    if np.linalg.norm(S - S.T) > 1e-12 * scale:
        raise NotSPD("matrix is not symmetric")
    try:
        L = np.linalg.cholesky(S)
    except np.linalg.LinAlgError as exc:
        raise NotSPD(str(exc)) from None
    if np.any(np.diag(L) <= 0.0):
        raise NotSPD("nonpositive pivot")
    return L


def solve_triangular(T, B, lower=False, trans=False):
    """Solve ``T X = B`` (or ``T^T X = B`` when ``trans``) for triangular ``T``."""
    T = np.asarray(T, dtype=np.float64)
    d = np.abs(np.diag(T))
    if d.size and d.min() <= 1e-14 * d.max():
        raise SingularTriangular(f"min |diag| = {d.min():.3e}, max |diag| = {d.max():.3e}")
    return sla.solve_triangular(T, B, lower=lower, trans=1 if trans else 0, check_finite=False)


def svd(M):
    """Thin SVD ``(U, s, V)`` with ``M = U diag(s) V^T`` and ``s`` nonincreasing."""
    A = as_matrix(M)
    try:
        U, s, Vt = np.linalg.svd(A, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(str(exc)) from None
    return U, s, Vt.T


def cond2(M):
    """Spectral condition number; ``inf`` when the smallest singular value is below 1e-300."""
    A = np.asarray(M, dtype=np.float64)
    try:
        s = np.linalg.svd(A, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(str(exc)) from None
    if s[-1] < 1e-300:
        return np.inf
    return float(s[0] / s[-1])
