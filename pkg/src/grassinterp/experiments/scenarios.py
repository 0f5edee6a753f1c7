"""Scenario generators: the transcendental curve and the 1-D Helmholtz ROM.

Random coefficient matrices come from numpy's counter-based ``Philox``
bit generator keyed by the user seed; see :func:`philox_uniform`.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np
import scipy.linalg as sla

from .. import kernels
from ..errors import NearResonance
from ..manifold import StiefelPoint, TangentLift

__all__ = [
    "philox_uniform",
    "qr_with_lift",
    "transcendental_coefficients",
    "transcendental_Y",
    "gen_transcendental",
    "noisy_transcendental",
    "helmholtz_operator",
    "helmholtz_sources",
    "helmholtz_states",
    "gen_helmholtz",
]

# stream identifiers (Philox key words) so that independent draws never overlap
STREAM_COEFFS = 0
STREAM_NOISE = 1


def philox_uniform(seed: int, stream: int, shape):
    """i.i.d. uniform [0, 1) draws from ``Philox(key=(seed, stream))``."""
    if seed is None:
        raise ValueError("seed is mandatory")
    bg = np.random.Philox(key=np.array([int(seed) & (2**64 - 1), int(stream)], dtype=np.uint64))
    return np.random.Generator(bg).random(shape)


def qr_with_lift(Y, Ydot):
    """Orthonormal factor of ``Y = U R`` (``diag R >= 0``) and the horizontal lift of ``dU``.

    Differentiating ``Y = U R`` gives ``(I - U U^T) Ydot R^{-1}`` for the
    horizontal part of ``Udot``; the remaining part lies in ``span(U)``.
    """
    U, R = kernels.thin_qr(Y)
    G = Ydot - U @ (U.T @ Ydot)
    lift = kernels.solve_triangular(R, G.T, lower=False, trans=True).T
    return U, lift


@lru_cache(maxsize=8)
def transcendental_coefficients(n: int, p: int, seed: int):
    """``(Y0, Y1, Y2, Y3)``, each ``n x p`` uniform [0, 1)."""
    Ys = philox_uniform(seed, STREAM_COEFFS, (4, n, p))
    Ys.setflags(write=False)
    return Ys


def transcendental_Y(n, p, t, seed):
    """``Y(t) = Y0 + sin(3t) Y1 + cos(3t) Y2 + exp(t) Y3`` and its derivative."""
    Y0, Y1, Y2, Y3 = transcendental_coefficients(int(n), int(p), int(seed))
    t = float(t)
    Y = Y0 + np.sin(3 * t) * Y1 + np.cos(3 * t) * Y2 + np.exp(t) * Y3
    Yd = 3 * np.cos(3 * t) * Y1 - 3 * np.sin(3 * t) * Y2 + np.exp(t) * Y3
    return Y, Yd


def gen_transcendental(n: int, p: int, t: float, seed: int):
    """Point ``qr(Y(t))`` of the transcendental curve and its horizontal lift."""
    if n < p:
        raise ValueError("need n >= p")
    U, D = qr_with_lift(*transcendental_Y(n, p, t, seed))
    P = StiefelPoint(U)
    return P, TangentLift(D, P)


def noisy_transcendental(n: int, p: int, t: float, seed: int, eps: float, index: int):
    """Sample with ``eps * E / ||E||_F`` added to ``Y(t)`` before orthonormalization.

    ``E`` is uniform [0, 1) noise drawn from its own stream (one block per
    ``index``). The lift uses the exact ``Ydot`` with the noisy factor.
    """
    Y, Yd = transcendental_Y(n, p, t, seed)
    E = philox_uniform(seed, STREAM_NOISE + 1 + int(index), (n, p))
    U, D = qr_with_lift(Y + eps * E / np.linalg.norm(E), Yd)
    P = StiefelPoint(U)
    return P, TangentLift(D, P)


def helmholtz_operator(n: int):
    """Banded storage (for ``scipy.linalg.solve_banded``) of ``L = tridiag(-1, 2, -1) / h^2``."""
    h = 1.0 / (n + 1)
    ab = np.zeros((3, n))
    ab[0, 1:] = -1.0 / h**2
    ab[1, :] = 2.0 / h**2
    ab[2, :-1] = -1.0 / h**2
    return ab


def helmholtz_sources(n: int, p: int, width: float = 0.05):
    """``p`` Gaussian bumps centred at ``j/(p+1)`` on the interior grid."""
    x = np.arange(1, n + 1) / (n + 1)
    c = np.arange(1, p + 1) / (p + 1)
    return np.exp(-((x[:, None] - c[None, :]) ** 2) / (2 * width**2))


def helmholtz_states(n: int, p: int, k: float):
    """``Y = A(k)^{-1} F`` and ``Y' = A(k)^{-1} (2k Y)`` with ``A(k) = L - k^2 I``."""
    ab = helmholtz_operator(n)
    ab[1] -= k * k
    F = helmholtz_sources(n, p)
    Y = sla.solve_banded((1, 1), ab, F)
    if not np.all(np.isfinite(Y)) or np.linalg.norm(Y) > 1e8 * np.linalg.norm(F):
        raise NearResonance(f"k = {k} is too close to an eigen-wavenumber")
    Yd = sla.solve_banded((1, 1), ab, 2.0 * k * Y)
    return Y, Yd, F


def gen_helmholtz(n: int, p: int, k: float, dk_dt: float = 1.0):
    """POD basis ``qr(Y(k))`` and its lift; ``dk_dt`` rescales the velocity to another parameter."""
    Y, Yd, _ = helmholtz_states(n, p, k)
    U, D = qr_with_lift(Y, Yd * dk_dt)
    P = StiefelPoint(U)
    return P, TangentLift(D, P)
