"""Lagrange and Hermite interpolation of subspace trajectories.

Pipeline: Householder chart from a reference sample, MV coordinates (and
their velocities) per sample, a (confluent) V+A fit of the vectorized
coordinates, and the Cholesky retraction at evaluation time.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import kernels, polybasis
from .errors import ExtrapolationWarning
from .manifold import (
    MvChart,
    MvCoordinates,
    StiefelPoint,
    TangentLift,
    build_chart,
    coordinate_velocity,
    default_ref_index,
    reconstruct,
    reconstruct_velocity,
    to_coordinates,
)

__all__ = [
    "GrassmannInterpolant",
    "fit_lagrange",
    "fit_hermite",
    "evaluate",
    "evaluate_many",
    "evaluate_with_velocity",
    "evaluate_many_with_velocity",
]

EXTRAPOLATION_MARGIN = 0.1


@dataclass(frozen=True, eq=False)
class GrassmannInterpolant:
    chart: MvChart
    model: polybasis.ArnoldiModel
    mode: str
    n: int
    p: int
    nodes: np.ndarray

    @property
    def n_coord(self):
        return self.p * (self.n - self.p)

    @property
    def degree(self):
        return self.model.degree

    def __call__(self, s):
        return evaluate(self, s)


def _points(samples) -> list:
    pts = [U if isinstance(U, StiefelPoint) else StiefelPoint(U) for U in samples]
    if not pts:
        raise ValueError("no samples")
    shape = pts[0].U.shape
    if any(P.U.shape != shape for P in pts):
        raise ValueError("samples must share (n, p)")
    return pts


def _setup(nodes, samples, ref_index):
    t = np.asarray(nodes, dtype=np.float64).ravel()
    pts = _points(samples)
    if t.size != len(pts):
        raise ValueError(f"{t.size} nodes but {len(pts)} samples")
    if ref_index is None:
        ref_index = default_ref_index(t)
    return t, pts, build_chart(pts, ref_index)


def fit_lagrange(nodes, samples: Sequence, degree: Optional[int] = None, ref_index: Optional[int] = None) -> GrassmannInterpolant:
    """MV-V+A interpolant through ``samples`` at ``nodes`` (degree ``m-1`` by default)."""
    t, pts, chart = _setup(nodes, samples, ref_index)
    if t.size < 2:
        raise ValueError("need at least 2 nodes")
    X = np.vstack([to_coordinates(chart, P).x for P in pts])
    model = polybasis.va_fit(t, X, degree)
    n, p = pts[0].U.shape
    return GrassmannInterpolant(chart=chart, model=model, mode="lagrange", n=n, p=p, nodes=t)


def fit_hermite(
    nodes,
    samples: Sequence,
    lifts: Sequence,
    degree: Optional[int] = None,
    approach: str = "augmented",
    ref_index: Optional[int] = None,
    aux_count: Optional[int] = None,
) -> GrassmannInterpolant:
    """MV-CV+A interpolant matching subspaces and horizontal velocities.

    ``approach`` selects the augmented-operator Arnoldi (``"augmented"``) or
    the surrogate-grid Hessenberg with differentiated recurrence (``"surrogate"``).
    """
    t, pts, chart = _setup(nodes, samples, ref_index)
    if len(lifts) != len(pts):
        raise ValueError(f"{len(lifts)} lifts for {len(pts)} samples")
    coords = [coordinate_velocity(chart, P, D if isinstance(D, TangentLift) else TangentLift(D, P)) for P, D in zip(pts, lifts)]
    X = np.vstack([c.x for c in coords])
    Xd = np.vstack([c.xdot for c in coords])
    if approach == "augmented":
        model = polybasis.cva_fit_augmented(t, X, Xd, degree)
    elif approach == "surrogate":
        model = polybasis.cva_fit_surrogate(t, X, Xd, degree, aux_count)
    else:
        raise ValueError(f"unknown approach {approach!r}")
    n, p = pts[0].U.shape
    return GrassmannInterpolant(chart=chart, model=model, mode="hermite", n=n, p=p, nodes=t)


def _extrapolated(interp, s):
    lo, hi = float(interp.nodes.min()), float(interp.nodes.max())
    pad = EXTRAPOLATION_MARGIN * (hi - lo)
    out = (s < lo - pad) | (s > hi + pad)
    if np.any(out):
        warnings.warn(f"evaluating outside the node range [{lo}, {hi}]", ExtrapolationWarning, stacklevel=3)
    return out


def _coordinates(interp: GrassmannInterpolant, s):
    if interp.mode == "lagrange":
        return polybasis.va_eval(interp.model, s), None
    return polybasis.cva_eval(interp.model, s)


def _unvec(interp, x):
    return kernels.unvec(x, interp.n - interp.p, interp.p)


def evaluate_many(interp: GrassmannInterpolant, points) -> list:
    """Evaluate at several parameters; returns a list of :class:`StiefelPoint`."""
    s = np.atleast_1d(np.asarray(points, dtype=np.float64))
    if not np.all(np.isfinite(s)):
        raise ValueError("evaluation points must be finite")
    flags = _extrapolated(interp, s)
    X, _ = _coordinates(interp, s)
    out = []
    for x, flag in zip(X, flags):
        P = reconstruct(interp.chart, _unvec(interp, x))
        out.append(StiefelPoint(P.U, extrapolated=bool(flag)) if flag else P)
    return out


def evaluate(interp: GrassmannInterpolant, s: float) -> StiefelPoint:
    """Interpolated subspace at ``s``."""
    return evaluate_many(interp, [s])[0]


def evaluate_many_with_velocity(interp: GrassmannInterpolant, points) -> list:
    """``[(StiefelPoint, TangentLift), ...]`` at several parameters (Hermite mode only)."""
    if interp.mode != "hermite":
        raise ValueError("velocities need a hermite interpolant")
    s = np.atleast_1d(np.asarray(points, dtype=np.float64))
    if not np.all(np.isfinite(s)):
        raise ValueError("evaluation points must be finite")
    flags = _extrapolated(interp, s)
    X, Xd = _coordinates(interp, s)
    out = []
    for x, xd, flag in zip(X, Xd, flags):
        P, D = reconstruct_velocity(interp.chart, MvCoordinates(_unvec(interp, x), _unvec(interp, xd)))
        if flag:
            P = StiefelPoint(P.U, extrapolated=True)
            D = TangentLift(D.Udot, P)
        out.append((P, D))
    return out


def evaluate_with_velocity(interp: GrassmannInterpolant, s: float):
    """Interpolated subspace and horizontal velocity at ``s`` (Hermite mode only)."""
    return evaluate_many_with_velocity(interp, [s])[0]
