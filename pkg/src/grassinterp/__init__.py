"""Stable high-order Lagrange/Hermite interpolation on the Grassmann manifold.

Maximum-volume coordinates in a Householder-stabilized chart combined with
Vandermonde-with-Arnoldi (and its confluent extension) polynomial fits.
"""
from .errors import *  # noqa: F401,F403
from .interpolant import (  # noqa: F401
    GrassmannInterpolant,
    evaluate,
    evaluate_many,
    evaluate_many_with_velocity,
    evaluate_with_velocity,
    fit_hermite,
    fit_lagrange,
)
from .manifold import (  # noqa: F401
    MvChart,
    MvCoordinates,
    StiefelPoint,
    TangentLift,
    build_chart,
    coordinate_velocity,
    geometric_condition,
    projector,
    reconstruct,
    reconstruct_velocity,
    subspace_error,
    to_coordinates,
)
from .polybasis import ArnoldiModel, chebyshev_nodes, cva_eval, cva_fit_augmented, cva_fit_surrogate, va_eval, va_fit  # noqa: F401

__version__ = "0.1.0"
