"""Discrete orthonormal polynomial bases by the Arnoldi process.

``va_fit``/``va_eval`` implement Vandermonde-with-Arnoldi (Lagrange data);
``cva_fit_augmented``, ``cva_fit_surrogate`` and ``cva_eval`` implement the
confluent (Hermite) extension. All fitting happens on nodes affinely mapped to
``[-1, 1]``; the map is stored in the model and derivatives are rescaled
accordingly.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
import scipy.linalg as sla

from . import kernels
from .errors import Breakdown, DegenerateRange, DegreeTooHigh, NodeCollision, StackedSystemIllConditioned

__all__ = [
    "NodeMap",
    "ArnoldiModel",
    "chebyshev_nodes",
    "node_rescale",
    "arnoldi",
    "basis_recurrence",
    "va_fit",
    "va_eval",
    "cva_fit_augmented",
    "cva_fit_surrogate",
    "cva_eval",
]

BREAKDOWN_TOL = 1e-14
STACKED_COND_LIMIT = 1e8


@dataclass(frozen=True)
class NodeMap:
    """Affine map ``x = (t - center) / halfwidth``."""

    center: float = 0.0
    halfwidth: float = 1.0

    def forward(self, t):
        return (np.asarray(t, dtype=np.float64) - self.center) / self.halfwidth

    def inverse(self, x):
        return self.center + self.halfwidth * np.asarray(x, dtype=np.float64)


@dataclass(frozen=True, eq=False)
class ArnoldiModel:
    """Result of a (confluent) V+A fit.

    Attributes
    ----------
    H : (k+1, k) upper Hessenberg recurrence matrix.
    Q : basis over the sample rows; ``m x (k+1)`` for ``lagrange``, the stacked
        ``[Q_f; Q_d]`` (``2m x (k+1)``) for the Hermite kinds.
    A : (k+1, N) coefficients.
    start : value of the constant first basis function.
    """

    H: np.ndarray
    Q: np.ndarray
    A: np.ndarray
    kind: str
    nodes: np.ndarray
    degree: int
    node_map: NodeMap
    start: float
    stacked_cond: Optional[float] = None
    ill_conditioned: bool = False

    @property
    def n_coord(self):
        return self.A.shape[1]


def chebyshev_nodes(m: int, interval=(0.0, 1.0)):
    """``t_i = a + (b - a)(1/2 - 1/2 cos(pi i / (m - 1)))``, ``i = 0..m-1`` (ascending).

    These are the Chebyshev extrema (Lobatto) points including both endpoints.
    """
    if m < 2:
        raise ValueError("m must be >= 2")
    a, b = map(float, interval)
    i = np.arange(m)
    # sin form is exactly antisymmetric about the midpoint
    u = 0.5 * np.sin(np.pi * (2 * i - (m - 1)) / (2 * (m - 1)))
    return 0.5 * (a + b) + (b - a) * u


def node_rescale(nodes):
    """Map ``nodes`` onto ``[-1, 1]``; returns ``(scaled, NodeMap)``."""
    t = np.asarray(nodes, dtype=np.float64).ravel()
    a, b = float(t.min()), float(t.max())
    if not b > a:
        raise DegenerateRange("all nodes are equal")
    nm = NodeMap() if (a == -1.0 and b == 1.0) else NodeMap(0.5 * (a + b), 0.5 * (b - a))
    return nm.forward(t), nm


def _prepare_nodes(nodes):
    t = np.asarray(nodes, dtype=np.float64).ravel()
    if t.size == 0 or not np.all(np.isfinite(t)):
        raise ValueError("nodes must be finite and non-empty")
    if t.size == 1:
        return t.copy(), NodeMap(float(t[0]), 1.0), np.zeros(1)
    gaps = np.diff(np.sort(t))
    rng = float(t.max() - t.min())
    if rng == 0.0 or gaps.min() < 1e-14 * rng:
        raise NodeCollision(f"minimum node gap {gaps.min():.3e} (range {rng:.3e})")
    x, nm = node_rescale(t)
    return t.copy(), nm, x


def _as_data(Y, m, name):
    Y = np.asarray(Y, dtype=np.float64)
    if Y.ndim == 1:
        Y = Y[:, None]
    if Y.ndim != 2 or Y.shape[0] != m:
        raise ValueError(f"{name} must have {m} rows, got shape {Y.shape}")
    return Y


def arnoldi(op: Callable, b, k: int, reorthogonalize: bool = True):
    """``k`` Arnoldi steps for the operator ``op`` from the unit vector ``b``.

    Modified Gram-Schmidt with one unconditional second pass; the second-pass
    coefficients are folded into ``H`` so that ``op(Q[:, :k]) = Q H`` holds to
    rounding. Raises :class:`Breakdown` when ``H[j+1, j] < 1e-14 ||H||_F``.
    """
    b = np.asarray(b, dtype=np.float64)
    Q = np.zeros((b.size, k + 1))
    H = np.zeros((k + 1, k))
    Q[:, 0] = b
    hnorm2 = 0.0
    for j in range(k):
        v = op(Q[:, j])
        for _ in range(2 if reorthogonalize else 1):
            for i in range(j + 1):
                c = Q[:, i] @ v
                v = v - c * Q[:, i]
                H[i, j] += c
        h = float(np.linalg.norm(v))
        hnorm2 += float(H[: j + 1, j] @ H[: j + 1, j]) + h * h
        if h < BREAKDOWN_TOL * np.sqrt(hnorm2) or h == 0.0:
            raise Breakdown(f"Arnoldi breakdown at step {j + 1}: H[{j + 1},{j}] = {h:.3e}")
        H[j + 1, j] = h
        Q[:, j + 1] = v / h
    return Q, H


def basis_recurrence(H, x, start: float, derivative: bool = False):
    """Evaluate the basis encoded by ``H`` at points ``x``.

    Returns ``W`` (``M x (k+1)``) and, when ``derivative`` is set, ``W'``
    from the differentiated recurrence with ``w'_1 = 0``. The same pair
    is produced by the augmented operator ``[S 0; I S]`` from ``[start; 0]``.
    """
    x = np.asarray(x, dtype=np.float64).ravel()
    k = H.shape[1]
    W = np.zeros((x.size, k + 1))
    W[:, 0] = start
    D = np.zeros((x.size, k + 1)) if derivative else None
    for j in range(k):
        h = H[: j + 1, j]
        W[:, j + 1] = (x * W[:, j] - W[:, : j + 1] @ h) / H[j + 1, j]
        if derivative:
            D[:, j + 1] = (W[:, j] + x * D[:, j] - D[:, : j + 1] @ h) / H[j + 1, j]
    return (W, D) if derivative else W


def va_fit(nodes, data, degree: Optional[int] = None) -> ArnoldiModel:
    """Fit ``data`` (``m x N``) at ``nodes`` in a degree-``k`` V+A basis (``k = m-1`` by default)."""
    t, nm, x = _prepare_nodes(nodes)
    m = t.size
    k = m - 1 if degree is None else int(degree)
    if k > m - 1 or k < 0:
        raise DegreeTooHigh(f"degree {k} not in [0, {m - 1}]")
    Y = _as_data(data, m, "data")
    start = 1.0 / np.sqrt(m)
    Q, H = arnoldi(lambda v: x * v, np.full(m, start), k)
    A = Q.T @ Y
    return ArnoldiModel(H=H, Q=Q, A=A, kind="lagrange", nodes=t, degree=k, node_map=nm, start=start)


def va_eval(model: ArnoldiModel, points):
    """Values ``W(s) A`` of a Lagrange model at ``points`` (``M x N``)."""
    if model.kind != "lagrange":
        raise ValueError(f"va_eval needs a lagrange model, got {model.kind}")
    W = basis_recurrence(model.H, model.node_map.forward(np.atleast_1d(points)), model.start)
    return W @ model.A


def _hermite_data(t, values, derivs, nm):
    m = t.size
    F = _as_data(values, m, "values")
    Fd = _as_data(derivs, m, "derivs")
    if F.shape != Fd.shape:
        raise ValueError("values and derivs must have the same shape")
    # derivatives with respect to the scaled variable
    return np.vstack([F, Fd * nm.halfwidth])


def cva_fit_augmented(nodes, values, derivs, degree: Optional[int] = None) -> ArnoldiModel:
    """Hermite fit by Arnoldi on ``C = [X 0; I X]`` from ``b = [e; 0] / sqrt(m)``."""
    t, nm, x = _prepare_nodes(nodes)
    m = t.size
    k = 2 * m - 1 if degree is None else int(degree)
    if k > 2 * m - 1 or k < 0:
        raise DegreeTooHigh(f"degree {k} not in [0, {2 * m - 1}]")
    Y = _hermite_data(t, values, derivs, nm)
    start = 1.0 / np.sqrt(m)

    def op(v):
        f, d = v[:m], v[m:]
        return np.concatenate([x * f, f + x * d])

    b = np.concatenate([np.full(m, start), np.zeros(m)])
    Q, H = arnoldi(op, b, k)
    A = Q.T @ Y
    return ArnoldiModel(H=H, Q=Q, A=A, kind="hermite_augmented", nodes=t, degree=k, node_map=nm, start=start)


def cva_fit_surrogate(nodes, values, derivs, degree: Optional[int] = None, aux_count: Optional[int] = None) -> ArnoldiModel:
    """Hermite fit with ``H`` taken from a Chebyshev surrogate grid.

    The value and differentiated recurrences driven by that ``H`` give ``Q_f``
    and ``Q_d`` at the actual nodes; the stacked system ``[Q_f; Q_d] A = Y`` is
    solved by QR. A :class:`StackedSystemIllConditioned` warning is issued
    (and ``ill_conditioned`` set) when its condition number exceeds 1e8.
    """
    t, nm, x = _prepare_nodes(nodes)
    m = t.size
    k = 2 * m - 1 if degree is None else int(degree)
    if k > 2 * m - 1 or k < 0:
        raise DegreeTooHigh(f"degree {k} not in [0, {2 * m - 1}]")
    n_aux = max(k + 1, 2 * m) if aux_count is None else int(aux_count)
    if n_aux < k + 1:
        raise ValueError(f"aux_count {n_aux} < degree + 1 = {k + 1}")
    Y = _hermite_data(t, values, derivs, nm)
    t_aux = chebyshev_nodes(n_aux, (-1.0, 1.0))
    start = 1.0 / np.sqrt(n_aux)
    _, H = arnoldi(lambda v: t_aux * v, np.full(n_aux, start), k)
    Qf, Qd = basis_recurrence(H, x, start, derivative=True)
    B = np.vstack([Qf, Qd])
    c = kernels.cond2(B)
    Qb, Rb = np.linalg.qr(B)
    A = sla.solve_triangular(Rb, Qb.T @ Y, check_finite=False)
    ill = not c <= STACKED_COND_LIMIT
    if ill:
        warnings.warn(f"stacked system cond2 = {c:.3e} exceeds {STACKED_COND_LIMIT:.0e}", StackedSystemIllConditioned, stacklevel=2)
    return ArnoldiModel(
        H=H, Q=B, A=A, kind="hermite_surrogate", nodes=t, degree=k, node_map=nm,
        start=start, stacked_cond=c, ill_conditioned=ill,
    )


def cva_eval(model: ArnoldiModel, points):
    """Values and parameter derivatives ``(W_f A, W_d A)`` of a Hermite model."""
    if model.kind not in ("hermite_augmented", "hermite_surrogate"):
        raise ValueError(f"cva_eval needs a hermite model, got {model.kind}")
    x = model.node_map.forward(np.atleast_1d(points))
    Wf, Wd = basis_recurrence(model.H, x, model.start, derivative=True)
    return Wf @ model.A, (Wd @ model.A) / model.node_map.halfwidth
