import warnings

import numpy as np
import pytest

from conftest import fd_convergence, random_stiefel
from grassinterp import (
    evaluate,
    evaluate_many,
    evaluate_many_with_velocity,
    evaluate_with_velocity,
    fit_hermite,
    fit_lagrange,
)
from grassinterp.errors import ExtrapolationWarning
from grassinterp.experiments.scenarios import gen_transcendental
from grassinterp.manifold import (
    MvCoordinates,
    build_chart,
    orthogonality_defect,
    projector,
    projector_velocity_error,
    reconstruct,
    reconstruct_velocity,
    subspace_error,
    to_coordinates,
)
from grassinterp.polybasis import chebyshev_nodes


def _curve(n, p, m, seed=3, interval=(0.0, 1.0)):
    t = chebyshev_nodes(m, interval)
    pairs = [gen_transcendental(n, p, s, seed) for s in t]
    return t, [P for P, _ in pairs], [D for _, D in pairs]


def _max_error(interp, s, seed, n, p):
    truth = [gen_transcendental(n, p, x, seed)[0] for x in s]
    return max(subspace_error(P, Q)[1] for P, Q in zip(truth, evaluate_many(interp, s)))


class TestLagrange:
    def test_constant_trajectory_any_gauge(self, rng):
        U = random_stiefel(rng, 9, 3)
        samples = [U @ random_stiefel(rng, 3, 3) for _ in range(5)]
        interp = fit_lagrange(chebyshev_nodes(5, (0, 2)), samples)
        for P in evaluate_many(interp, np.linspace(0, 2, 13)):
            assert subspace_error(U, P)[0] <= 1e-12

    def test_interpolates_samples(self):
        t, pts, _ = _curve(50, 4, 7)
        interp = fit_lagrange(t, pts)
        for s, P in zip(t, pts):
            assert subspace_error(P, evaluate(interp, s))[0] <= 1e-9

    def test_full_size_transcendental_fit(self):
        t, pts, _ = _curve(1000, 10, 8, seed=0)
        interp = fit_lagrange(t, pts, degree=7)
        assert interp.degree == 7 and interp.n_coord == 9900
        assert orthogonality_defect(evaluate(interp, 0.5).U) <= 1e-12

    def test_two_node_tangent_interpolation(self):
        th0, th1 = 0.2, 1.1
        pts = [np.array([[np.cos(a)], [np.sin(a)]]) for a in (th0, th1)]
        interp = fit_lagrange([0.0, 1.0], pts)
        assert interp.chart.ref_index == 0
        xi1 = to_coordinates(interp.chart, pts[1]).Xi[0, 0]
        assert abs(xi1) == pytest.approx(np.tan(th1 - th0), rel=1e-14)
        for s in np.linspace(0, 1, 9):
            P = evaluate(interp, s)
            # coordinates are linear in s: (1 - l) * tan(0) + l * tan(th1 - th0)
            assert to_coordinates(interp.chart, P).Xi[0, 0] == pytest.approx(s * xi1, abs=1e-14)
            phi = th0 + np.arctan(s * np.tan(th1 - th0))
            assert subspace_error(P, np.array([[np.cos(phi)], [np.sin(phi)]]))[0] <= 1e-14

    def test_needs_two_nodes(self, rng):
        with pytest.raises(ValueError):
            fit_lagrange([0.0], [random_stiefel(rng, 4, 2)])

    def test_sample_count_mismatch(self, rng):
        with pytest.raises(ValueError):
            fit_lagrange([0.0, 1.0, 2.0], [random_stiefel(rng, 4, 2)] * 2)

    def test_velocity_needs_hermite(self):
        t, pts, _ = _curve(20, 2, 4)
        with pytest.raises(ValueError):
            evaluate_with_velocity(fit_lagrange(t, pts), 0.5)


class TestHermite:
    def test_cubic_coordinates_reproduced(self, rng):
        n, p = 10, 3
        frame = random_stiefel(rng, n, p)
        chart = build_chart([frame], 0)
        X1, X2, X3 = (rng.standard_normal((n - p, p)) for _ in range(3))

        def xi(s):
            return s * X1 + s**2 * X2 + s**3 * X3, X1 + 2 * s * X2 + 3 * s**2 * X3

        pairs = [reconstruct_velocity(chart, MvCoordinates(*xi(s))) for s in (0.0, 1.0)]
        interp = fit_hermite([0.0, 1.0], [P for P, _ in pairs], [D for _, D in pairs], degree=3)
        for s in np.linspace(0, 1, 50):
            assert subspace_error(reconstruct(chart, xi(s)[0]), evaluate(interp, s))[0] <= 1e-11

    @pytest.mark.parametrize("approach", ["augmented", "surrogate"])
    def test_node_conditions(self, approach):
        t, pts, lifts = _curve(60, 4, 6)
        interp = fit_hermite(t, pts, lifts, approach=approach)
        for s, P, D in zip(t, pts, lifts):
            Q, E = evaluate_with_velocity(interp, s)
            assert subspace_error(P, Q)[0] <= 1e-9
            assert projector_velocity_error(Q.U, E.Udot, P.U, D.Udot)[0] <= 1e-8

    def test_constant_trajectory_zero_velocity(self, rng):
        U = random_stiefel(rng, 8, 2)
        samples = [U @ random_stiefel(rng, 2, 2) for _ in range(4)]
        interp = fit_hermite(chebyshev_nodes(4, (0, 1)), samples, [np.zeros((8, 2))] * 4)
        for P, D in evaluate_many_with_velocity(interp, np.linspace(0, 1, 11)):
            assert subspace_error(U, P)[0] <= 1e-12
            assert np.linalg.norm(D.Udot) <= 1e-12

    def test_velocity_matches_finite_differences(self):
        t, pts, lifts = _curve(30, 3, 6)
        interp = fit_hermite(t, pts, lifts)
        for s0 in (0.13, 0.5, 0.87):
            P, D = evaluate_with_velocity(interp, s0)
            ok, e1, e2, ratio = fd_convergence(lambda s: projector(evaluate(interp, s)), s0, D.Udot @ P.U.T + P.U @ D.Udot.T)
            assert ok, (s0, e1, e2, ratio)

    def test_approaches_agree(self):
        t, pts, lifts = _curve(80, 5, 8)
        a = fit_hermite(t, pts, lifts, approach="augmented")
        b = fit_hermite(t, pts, lifts, approach="surrogate")
        s = np.linspace(0, 1, 41)
        for P, Q in zip(evaluate_many(a, s), evaluate_many(b, s)):
            assert subspace_error(P, Q)[0] <= 1e-8

    def test_unknown_approach(self):
        t, pts, lifts = _curve(20, 2, 3)
        with pytest.raises(ValueError):
            fit_hermite(t, pts, lifts, approach="nope")

    def test_lift_count_mismatch(self):
        t, pts, lifts = _curve(20, 2, 3)
        with pytest.raises(ValueError):
            fit_hermite(t, pts, lifts[:2])

    def test_gauge_robustness(self, rng):
        t, pts, lifts = _curve(40, 3, 6)
        gauges = [random_stiefel(rng, 3, 3) for _ in t]
        a = fit_hermite(t, pts, lifts)
        b = fit_hermite(t, [P.U @ G for P, G in zip(pts, gauges)], [D.Udot @ G for D, G in zip(lifts, gauges)])
        s = np.linspace(0, 1, 21)
        for (P, D), (Q, E) in zip(evaluate_many_with_velocity(a, s), evaluate_many_with_velocity(b, s)):
            assert subspace_error(P, Q)[0] <= 1e-10
            assert projector_velocity_error(P.U, D.Udot, Q.U, E.Udot)[0] <= 1e-8


class TestEvaluation:
    def test_extrapolation_flag(self):
        t, pts, _ = _curve(20, 2, 4)
        interp = fit_lagrange(t, pts)
        with pytest.warns(ExtrapolationWarning):
            P = evaluate(interp, 1.5)
        assert P.extrapolated
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            assert not evaluate(interp, 1.05).extrapolated

    def test_rejects_nonfinite(self):
        t, pts, _ = _curve(20, 2, 4)
        with pytest.raises(ValueError):
            evaluate_many(fit_lagrange(t, pts), [0.1, np.nan])

    def test_callable(self):
        t, pts, _ = _curve(20, 2, 4)
        interp = fit_lagrange(t, pts)
        np.testing.assert_array_equal(interp(0.3).U, evaluate(interp, 0.3).U)


@pytest.mark.parametrize("mode", ["lagrange", "hermite"])
def test_monotone_spectral_convergence(mode):
    """Max error over probes decreases as nodes are added, until it reaches rounding level."""
    n, p, seed = 60, 3, 5
    s = np.linspace(0, 1, 101)
    errs = []
    for m in (4, 6, 8, 10, 12):
        t, pts, lifts = _curve(n, p, m, seed)
        interp = fit_lagrange(t, pts) if mode == "lagrange" else fit_hermite(t, pts, lifts)
        errs.append(_max_error(interp, s, seed, n, p))
    floor = 1e-12
    for a, b in zip(errs, errs[1:]):
        assert b < a or max(a, b) <= floor, errs
    assert errs[-1] < 1e-3 * errs[0]
