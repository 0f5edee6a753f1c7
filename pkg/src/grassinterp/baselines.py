"""Reference methods: monomial (confluent) Vandermonde fits, greedy maxvol
permutation charts and SVD-based normal-coordinate interpolation.

Ill-conditioning here is the point of the comparison, so the monomial solver
never raises on it; NaN/Inf results are flagged on the model instead.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.linalg as sla

from . import kernels
from .errors import OutOfChart
from .manifold import MvChart, StiefelPoint, permutation_chart
from .polybasis import NodeMap, node_rescale

__all__ = [
    "MonomialModel",
    "monomial_vandermonde",
    "monomial_fit",
    "monomial_eval",
    "PermutationChart",
    "maxvol_objective",
    "maxvol_chart",
    "grassmann_log",
    "grassmann_exp",
    "NormalCoordinateInterpolant",
    "normal_coordinate_interp",
]


@dataclass(frozen=True, eq=False)
class MonomialModel:
    coefficients: np.ndarray
    node_map: NodeMap
    cond: float
    confluent: bool
    degree: int
    failed: bool = False


def monomial_vandermonde(x, degree: int, confluent: bool = False):
    """``V[i, j] = x_i^j``; with ``confluent`` the derivative rows ``j x_i^(j-1)`` are stacked below."""
    x = np.asarray(x, dtype=np.float64).ravel()
    V = x[:, None] ** np.arange(degree + 1)
    if not confluent:
        return V
    V1 = np.zeros_like(V)
    V1[:, 1:] = V[:, :-1] * np.arange(1, degree + 1)
    return np.vstack([V, V1])


def monomial_fit(nodes, data, degree: Optional[int] = None, derivs=None, rescale: bool = False) -> MonomialModel:
    """Least-squares monomial fit via Householder QR (``numpy.linalg.qr``).

    With ``derivs`` the confluent system is solved. By default the raw
    parameter is used (``rescale=False``), matching the usual baseline.
    """
    t = np.asarray(nodes, dtype=np.float64).ravel()
    m = t.size
    confluent = derivs is not None
    kmax = 2 * m - 1 if confluent else m - 1
    k = kmax if degree is None else int(degree)
    if not 0 <= k <= kmax:
        raise ValueError(f"degree {k} not in [0, {kmax}]")
    F = np.asarray(data, dtype=np.float64)
    F = F[:, None] if F.ndim == 1 else F
    if F.shape[0] != m:
        raise ValueError(f"data must have {m} rows")
    nm = node_rescale(t)[1] if (rescale and m > 1) else NodeMap()
    rhs = F
    if confluent:
        Fd = np.asarray(derivs, dtype=np.float64)
        Fd = Fd[:, None] if Fd.ndim == 1 else Fd
        if Fd.shape != F.shape:
            raise ValueError("derivs must match data shape")
        rhs = np.vstack([F, Fd * nm.halfwidth])
    V = monomial_vandermonde(nm.forward(t), k, confluent)
    cond = kernels.cond2(V)
    with np.errstate(all="ignore"):
        Qv, Rv = np.linalg.qr(V)
        try:
            c = sla.solve_triangular(Rv, Qv.T @ rhs, check_finite=False)
        except (np.linalg.LinAlgError, ValueError):
            c = np.full((k + 1, F.shape[1]), np.nan)
    failed = not np.all(np.isfinite(c))
    return MonomialModel(coefficients=c, node_map=nm, cond=cond, confluent=confluent, degree=k, failed=failed)


def monomial_eval(model: MonomialModel, points):
    """Horner evaluation; returns values, or ``(values, derivs)`` for confluent models."""
    x = model.node_map.forward(np.atleast_1d(points))[:, None]
    c = model.coefficients
    with np.errstate(all="ignore"):
        val = np.broadcast_to(c[-1], (x.shape[0], c.shape[1])).copy()
        der = np.zeros_like(val)
        for j in range(c.shape[0] - 2, -1, -1):
            der = der * x + val
            val = val * x + c[j]
    if model.confluent:
        return val, der / model.node_map.halfwidth
    return val


@dataclass(frozen=True, eq=False)
class PermutationChart:
    """Row permutation selected by greedy maxvol. ``history`` holds the objective per accepted step."""

    perm: np.ndarray
    p: int
    objective: float
    history: list = field(default_factory=list)

    @property
    def chart(self) -> MvChart:
        return permutation_chart(self.perm, self.p)


def _inv_fro(B):
    try:
        with np.errstate(all="ignore"):
            v = float(np.linalg.norm(np.linalg.inv(B)))
    except np.linalg.LinAlgError:
        return np.inf
    return v if np.isfinite(v) else np.inf


def maxvol_objective(samples: Sequence, rows) -> float:
    """``max_i ||U_i[rows]^{-1}||_F``."""
    rows = np.asarray(rows)
    return max(_inv_fro(np.asarray(getattr(U, "U", U))[rows]) for U in samples)


def maxvol_chart(samples: Sequence, max_iters: int = 200, candidates: int = 32) -> PermutationChart:
    """Greedy row-swap search for ``argmin_P max_i ||(P U_i)_1^{-1}||_F``.

    Starts from the identity. Each step takes the worst sample, ranks
    swaps (top row ``r`` <-> bottom row ``s``) by ``|U U_1^{-1}|[s, r]`` (the
    determinant growth factor for that sample) and accepts the candidate with
    the smallest exact objective over all samples, if it improves by more
    than 1e-12.
    """
    mats = [np.asarray(getattr(U, "U", U), dtype=np.float64) for U in samples]
    n, p = mats[0].shape
    top = np.arange(p)
    bottom = np.arange(p, n)

    def per_sample(rows):
        return np.array([_inv_fro(U[rows]) for U in mats])

    vals = per_sample(top)
    if not np.all(np.isfinite(vals)):
        # singular starting block: seed with column-pivoted QR of the worst sample
        _, _, piv = sla.qr(mats[int(np.argmax(vals))].T, pivoting=True, mode="economic")
        top = np.sort(piv[:p])
        bottom = np.setdiff1d(np.arange(n), top)
        vals = per_sample(top)
    obj = float(vals.max())
    history = [obj]
    for _ in range(max_iters):
        if n == p:
            break
        worst = mats[int(np.argmax(vals))]
        try:
            B = np.linalg.solve(worst[top].T, worst[bottom].T).T
        except np.linalg.LinAlgError:
            break
        score = np.abs(B).ravel()
        order = np.argsort(-score, kind="stable")[:candidates]
        best_obj, best_swap = obj, None
        for idx in order:
            s, r = divmod(int(idx), p)
            trial = top.copy()
            trial[r] = bottom[s]
            tv = per_sample(trial)
            if tv.max() < best_obj - 1e-12:
                best_obj, best_swap, best_vals = float(tv.max()), (s, r), tv
        if best_swap is None:
            break
        s, r = best_swap
        top[r], bottom[s] = bottom[s], top[r]
        obj, vals = best_obj, best_vals
        history.append(obj)
    perm = np.concatenate([top, np.sort(bottom)])
    return PermutationChart(perm=perm, p=p, objective=obj, history=history)


def _principal_check(base, U):
    s = np.linalg.svd(base.T @ U, compute_uv=False)
    angle = float(np.arccos(np.clip(s[-1], -1.0, 1.0)))
    if angle >= np.pi / 2 - 1e-6:
        raise OutOfChart(f"largest principal angle {angle:.6f} too close to pi/2")


def grassmann_log(base, U):
    """Horizontal tangent at ``base`` pointing to ``span(U)`` (SVD formula)."""
    base = np.asarray(getattr(base, "U", base), dtype=np.float64)
    U = np.asarray(getattr(U, "U", U), dtype=np.float64)
    _principal_check(base, U)
    G = base.T @ U
    M = np.linalg.solve(G.T, (U - base @ G).T).T
    Qm, s, Vt = np.linalg.svd(M, full_matrices=False)
    return (Qm * np.arctan(s)) @ Vt


def grassmann_exp(base, Delta):
    """Geodesic endpoint ``base V cos(S) V^T + Q sin(S) V^T`` for ``Delta = Q S V^T``."""
    base = np.asarray(getattr(base, "U", base), dtype=np.float64)
    Qd, s, Vt = np.linalg.svd(np.asarray(Delta, dtype=np.float64), full_matrices=False)
    return (base @ Vt.T * np.cos(s)) @ Vt + (Qd * np.sin(s)) @ Vt


def _polar(M):
    Uu, _, Vt = np.linalg.svd(M)
    return Uu @ Vt


@dataclass(frozen=True, eq=False)
class NormalCoordinateInterpolant:
    base: np.ndarray
    model: MonomialModel

    def tangent(self, s):
        n, p = self.base.shape
        out = monomial_eval(self.model, s)
        vals = out[0] if self.model.confluent else out
        return [v.reshape((n, p), order="F") for v in vals]

    def __call__(self, s):
        """Raw ``n x p`` arrays (possibly non-finite when the fit diverged)."""
        with np.errstate(all="ignore"):
            res = []
            for D in self.tangent(s):
                if not np.all(np.isfinite(D)):
                    res.append(np.full_like(D, np.nan))
                    continue
                res.append(grassmann_exp(self.base, D))
            return res


def normal_coordinate_interp(nodes, samples, lifts=None, degree=None, base_index: Optional[int] = None) -> NormalCoordinateInterpolant:
    """Monomial interpolation of Grassmann logarithms about one base sample.

    Lifts are carried to the base by aligning gauges with the polar factor of
    ``U_i^T U_base`` and projecting onto the horizontal space at the base
    (no parallel transport).
    """
    from .manifold import default_ref_index

    mats = [np.asarray(getattr(U, "U", U), dtype=np.float64) for U in samples]
    t = np.asarray(nodes, dtype=np.float64).ravel()
    bi = default_ref_index(t) if base_index is None else base_index
    base = mats[bi]
    X = np.vstack([kernels.vec(grassmann_log(base, U)) for U in mats])
    Xd = None
    if lifts is not None:
        rows = []
        for U, D in zip(mats, lifts):
            D = np.asarray(getattr(D, "Udot", D), dtype=np.float64)
            G = _polar(U.T @ base)
            Dt = D @ G
            rows.append(kernels.vec(Dt - base @ (base.T @ Dt)))
        Xd = np.vstack(rows)
    model = monomial_fit(t, X, degree, derivs=Xd)
    return NormalCoordinateInterpolant(base=base, model=model)
