"""Charts, maximum-volume coordinates and the Cholesky retraction on Gr(n, p).

A chart is an orthogonal frame ``Q`` (``n x n``). A Stiefel representative ``U``
is mapped to ``Ut = Q^T U = [U1; U2]`` and to coordinates ``Xi = U2 U1^{-1}``.
The inverse map is ``U(Xi) = Q [I; Xi] L^{-T}`` with ``L L^T = I + Xi^T Xi``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .errors import ChartSingular, NotHorizontal, NotOrthonormal

__all__ = [
    "StiefelPoint",
    "TangentLift",
    "MvChart",
    "MvCoordinates",
    "default_ref_index",
    "build_chart",
    "identity_chart",
    "permutation_chart",
    "to_coordinates",
    "coordinate_velocity",
    "reconstruct",
    "reconstruct_velocity",
    "projector",
    "subspace_error",
    "projector_velocity_error",
    "orthogonality_defect",
    "geometric_condition",
]

ORTHO_TOL = 1e-10
HORIZONTAL_TOL = 1e-10
HORIZONTAL_REJECT = 1e-6
CHART_COND_LIMIT = 1e12


def orthogonality_defect(U):
    """``||U^T U - I_p||_F``."""
    U = np.asarray(U)
    return float(np.linalg.norm(U.T @ U - np.eye(U.shape[1])))


@dataclass(frozen=True, eq=False)
class StiefelPoint:
    """An ``n x p`` matrix with orthonormal columns.

    ``extrapolated`` is set by the interpolant when the point was produced
    outside the (10 %-padded) node range.
    """

    U: np.ndarray
    extrapolated: bool = False

    def __post_init__(self):
        U = kernels.as_matrix(self.U, "U")
        n, p = U.shape
        if n < p:
            raise ValueError(f"need n >= p, got {U.shape}")
        defect = orthogonality_defect(U)
        if defect > ORTHO_TOL:
            raise NotOrthonormal(f"||U^T U - I||_F = {defect:.3e}")
        object.__setattr__(self, "U", U)

    @property
    def n(self):
        return self.U.shape[0]

    @property
    def p(self):
        return self.U.shape[1]


@dataclass(frozen=True, eq=False)
class TangentLift:
    """Horizontal tangent representative ``Udot`` at ``base`` (``base.U^T Udot = 0``).

    Small horizontality defects (up to 1e-6) are projected away on
    construction; larger ones are rejected.
    """

    Udot: np.ndarray
    base: StiefelPoint

    def __post_init__(self):
        D = kernels.as_matrix(self.Udot, "Udot")
        U = self.base.U
        if D.shape != U.shape:
            raise ValueError(f"Udot shape {D.shape} != base shape {U.shape}")
        defect = float(np.linalg.norm(U.T @ D))
        if defect > HORIZONTAL_REJECT:
            raise NotHorizontal(f"||U^T Udot||_F = {defect:.3e} exceeds {HORIZONTAL_REJECT}")
        if defect > HORIZONTAL_TOL:
            D = D - U @ (U.T @ D)
        object.__setattr__(self, "Udot", D)


def _stiefel(U) -> StiefelPoint:
    return U if isinstance(U, StiefelPoint) else StiefelPoint(U)


def _lift(Udot, base: StiefelPoint) -> TangentLift:
    if isinstance(Udot, TangentLift):
        return Udot
    return TangentLift(Udot, base)


@dataclass(frozen=True, eq=False)
class MvChart:
    """One global coordinate chart, i.e. an orthogonal frame of ``R^n``.

    ``kind`` is ``"householder"`` (frame stored as ``p`` reflectors),
    ``"permutation"`` (row permutation ``perm`` with ``(P U) = U[perm]``) or
    ``"identity"``.
    """

    n: int
    p: int
    kind: str = "householder"
    ref_index: Optional[int] = None
    reflectors: Optional[np.ndarray] = None
    betas: Optional[np.ndarray] = None
    perm: Optional[np.ndarray] = None
    R: Optional[np.ndarray] = field(default=None, repr=False)

    def to_local(self, B):
        """``Q^T B``."""
        B = np.asarray(B, dtype=np.float64)
        if self.kind == "householder":
            return kernels.apply_reflectors_t(self.reflectors, self.betas, B)
        if self.kind == "permutation":
            return B[self.perm].copy()
        return B.copy()

    def from_local(self, B):
        """``Q B``."""
        B = np.asarray(B, dtype=np.float64)
        if self.kind == "householder":
            return kernels.apply_reflectors(self.reflectors, self.betas, B)
        if self.kind == "permutation":
            out = np.empty_like(B)
            out[self.perm] = B
            return out
        return B.copy()

    @property
    def Qframe(self):
        """Dense ``n x n`` frame (formed on demand)."""
        return self.from_local(np.eye(self.n))


@dataclass(frozen=True, eq=False)
class MvCoordinates:
    Xi: np.ndarray
    XiDot: Optional[np.ndarray] = None

    @property
    def x(self):
        """Column-major vectorization of ``Xi``."""
        return kernels.vec(self.Xi)

    @property
    def xdot(self):
        return None if self.XiDot is None else kernels.vec(self.XiDot)

    @property
    def n_coord(self):
        return self.Xi.size


def default_ref_index(nodes) -> int:
    """Index of the node closest to the midpoint of the node range (lowest index on ties)."""
    t = np.asarray(nodes, dtype=np.float64)
    mid = 0.5 * (t.min() + t.max())
    dist = np.abs(t - mid)
    tol = 1e-12 * max(1.0, float(t.max() - t.min()))
    return int(np.flatnonzero(dist <= dist.min() + tol)[0])


def build_chart(samples: Sequence, ref_index: int) -> MvChart:
    """Householder chart from the reference sample ``samples[ref_index]``.

    The frame satisfies ``Q^T U_ref = [R; 0]`` with ``diag(R) >= 0``.
    """
    pts = [_stiefel(U) for U in samples]
    if not pts:
        raise ValueError("no samples")
    n, p = pts[0].U.shape
    for P in pts:
        if P.U.shape != (n, p):
            raise ValueError("samples must share (n, p)")
    if not -len(pts) <= ref_index < len(pts):
        raise IndexError(f"ref_index {ref_index} out of range")
    ref_index = ref_index % len(pts)
    U_ref = pts[ref_index].U
    V, betas, R = kernels.householder_reflectors(U_ref)
    kernels._check_rank(R, np.linalg.norm(U_ref))
    return MvChart(n=n, p=p, kind="householder", ref_index=ref_index, reflectors=V, betas=betas, R=R)


def identity_chart(n: int, p: int) -> MvChart:
    """The unstabilized chart (top ``p`` rows of ``U`` as pivot block)."""
    return MvChart(n=n, p=p, kind="identity")


def permutation_chart(perm, p: int) -> MvChart:
    perm = np.asarray(perm, dtype=np.int64)
    if np.any(np.sort(perm) != np.arange(perm.size)):
        raise ValueError("perm is not a permutation")
    return MvChart(n=perm.size, p=p, kind="permutation", perm=perm)


def _split(chart: MvChart, U):
    Ut = chart.to_local(U)
    return Ut[: chart.p], Ut[chart.p :]


def _check_block(U1):
    c = kernels.cond2(U1)
    if not c <= CHART_COND_LIMIT:
        raise ChartSingular(f"cond2(U1) = {c:.3e} exceeds {CHART_COND_LIMIT:.0e}")


def _right_solve(B, U1):
    """``B U1^{-1}`` via an LU solve with partial pivoting."""
    return np.linalg.solve(U1.T, B.T).T


def to_coordinates(chart: MvChart, U) -> MvCoordinates:
    """MV coordinates ``Xi = U2 U1^{-1}`` of ``U`` in ``chart``."""
    U = _stiefel(U).U
    U1, U2 = _split(chart, U)
    _check_block(U1)
    return MvCoordinates(_right_solve(U2, U1))


def coordinate_velocity(chart: MvChart, U, Udot) -> MvCoordinates:
    """Coordinates and their velocity ``XiDot = (T2 - Xi T1) U1^{-1}``."""
    P = _stiefel(U)
    D = _lift(Udot, P).Udot
    U1, U2 = _split(chart, P.U)
    _check_block(U1)
    T1, T2 = _split(chart, D)
    Xi = _right_solve(U2, U1)
    XiDot = _right_solve(T2 - Xi @ T1, U1)
    return MvCoordinates(Xi, XiDot)


def _retract_local(Xi):
    p = Xi.shape[1]
    L = kernels.cholesky_spd(np.eye(p) + Xi.T @ Xi)
    top = np.vstack([np.eye(p), Xi])
    # top @ L^{-T}  ==  (L^{-1} top^T)^T
    Ut = kernels.solve_triangular(L, top.T, lower=True).T
    return Ut, L


def reconstruct(chart: MvChart, coords) -> StiefelPoint:
    """Cholesky retraction ``Q [I; Xi] L^{-T}``."""
    Xi = coords.Xi if isinstance(coords, MvCoordinates) else np.asarray(coords, dtype=np.float64)
    Xi = kernels.as_matrix(Xi, "Xi")
    Ut, _ = _retract_local(Xi)
    return StiefelPoint(chart.from_local(Ut))


def reconstruct_velocity(chart: MvChart, coords: MvCoordinates):
    """Point and horizontal lift from ``(Xi, XiDot)``.

    Uses ``K = -(I + Xi^T Xi)^{-1} Xi^T XiDot`` and lift ``[K; XiDot + Xi K] L^{-T}``.
    """
    if coords.XiDot is None:
        raise ValueError("coords.XiDot is required")
    Xi = kernels.as_matrix(coords.Xi, "Xi")
    XiDot = kernels.as_matrix(coords.XiDot, "XiDot")
    Ut, L = _retract_local(Xi)
    G = Xi.T @ XiDot
    K = -kernels.solve_triangular(L, kernels.solve_triangular(L, G, lower=True), lower=True, trans=True)
    lift = np.vstack([K, XiDot + Xi @ K])
    Udt = kernels.solve_triangular(L, lift.T, lower=True).T
    point = StiefelPoint(chart.from_local(Ut))
    return point, TangentLift(chart.from_local(Udt), point)


def projector(U):
    """Orthogonal projector ``U U^T``."""
    U = _stiefel(U).U
    return U @ U.T


def subspace_error(U1, U2):
    """Projector distance ``||U1 U1^T - U2 U2^T||_F`` and its value relative to ``||P||_F = sqrt(p)``.

    Evaluated as ``sqrt(2) ||U2 - U1 (U1^T U2)||_F``, which equals
    ``sqrt(2p - 2||U1^T U2||_F^2)`` without the cancellation of that form.
    """
    A = np.asarray(U1.U if isinstance(U1, StiefelPoint) else U1, dtype=np.float64)
    B = np.asarray(U2.U if isinstance(U2, StiefelPoint) else U2, dtype=np.float64)
    if A.shape != B.shape:
        raise ValueError(f"shape mismatch {A.shape} vs {B.shape}")
    absolute = float(np.sqrt(2.0) * np.linalg.norm(B - A @ (A.T @ B)))
    return absolute, absolute / np.sqrt(A.shape[1])


def projector_velocity_error(U, Udot, V, Vdot):
    """``||(Udot U^T + U Udot^T) - (Vdot V^T + V Vdot^T)||_F`` and the norm of the second term.

    Both are computed in an orthonormal basis of ``span[U, Udot, V, Vdot]``, so
    no ``n x n`` matrix is formed.
    """
    U, Udot, V, Vdot = (np.asarray(X, dtype=np.float64) for X in (U, Udot, V, Vdot))
    W, _ = np.linalg.qr(np.hstack([U, Udot, V, Vdot]))
    u, ud, v, vd = (W.T @ X for X in (U, Udot, V, Vdot))
    Pu = ud @ u.T + u @ ud.T
    Pv = vd @ v.T + v @ vd.T
    return float(np.linalg.norm(Pu - Pv)), float(np.linalg.norm(Pv))


def geometric_condition(chart: MvChart, U, spectral: bool = False):
    """``||U1^{-1}||_F`` of ``U`` in ``chart`` (``||U1^{-1}||_2`` when ``spectral``)."""
    U1, _ = _split(chart, _stiefel(U).U)
    _check_block(U1)
    inv = np.linalg.inv(U1)
    return float(np.linalg.norm(inv, 2 if spectral else "fro"))
