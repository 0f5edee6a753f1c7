import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import fd_convergence, random_lift, random_stiefel
from grassinterp.errors import ChartSingular, NotHorizontal, NotOrthonormal
from grassinterp.experiments.scenarios import gen_transcendental
from grassinterp.manifold import (
    MvCoordinates,
    StiefelPoint,
    TangentLift,
    build_chart,
    coordinate_velocity,
    default_ref_index,
    geometric_condition,
    identity_chart,
    orthogonality_defect,
    permutation_chart,
    projector,
    projector_velocity_error,
    reconstruct,
    reconstruct_velocity,
    subspace_error,
    to_coordinates,
)
from grassinterp.polybasis import chebyshev_nodes


def _origin(n, p):
    return np.vstack([np.eye(p), np.zeros((n - p, p))])


class TestTypes:
    def test_stiefel_rejects_non_orthonormal(self):
        with pytest.raises(NotOrthonormal):
            StiefelPoint(np.ones((3, 1)))

    def test_stiefel_rejects_wide(self):
        with pytest.raises(ValueError):
            StiefelPoint(np.eye(2, 3))

    def test_lift_projects_small_defect(self, rng):
        U = random_stiefel(rng, 6, 2)
        D = random_lift(rng, U) + 1e-8 * U
        lift = TangentLift(D, StiefelPoint(U))
        assert np.linalg.norm(U.T @ lift.Udot) <= 1e-14

    def test_lift_rejects_vertical(self, rng):
        U = random_stiefel(rng, 6, 2)
        with pytest.raises(NotHorizontal):
            TangentLift(U, StiefelPoint(U))


class TestChart:
    def test_single_origin_sample_gives_identity_frame(self):
        chart = build_chart([_origin(5, 2)], 0)
        np.testing.assert_allclose(chart.Qframe, np.eye(5), atol=1e-15)

    def test_frame_orthogonal_and_reference_at_origin(self, rng):
        samples = [random_stiefel(rng, 10, 3) for _ in range(4)]
        chart = build_chart(samples, 2)
        Q = chart.Qframe
        assert np.linalg.norm(Q.T @ Q - np.eye(10)) <= 1e-12
        assert np.linalg.norm(to_coordinates(chart, samples[2]).Xi) <= 1e-12
        assert geometric_condition(chart, samples[2]) == pytest.approx(np.sqrt(3), abs=1e-12)

    def test_transcendental_reference_node(self):
        t = chebyshev_nodes(8, (0.0, 1.0))
        assert default_ref_index(t) == 3
        pts = [gen_transcendental(60, 4, s, 0)[0] for s in t]
        chart = build_chart(pts, 3)
        assert np.linalg.norm(to_coordinates(chart, pts[3]).Xi) <= 1e-12
        assert geometric_condition(chart, pts[3]) == pytest.approx(2.0, abs=1e-8)

    def test_origin_has_sqrt_p_condition(self):
        chart = identity_chart(6, 3)
        assert geometric_condition(chart, _origin(6, 3)) == pytest.approx(np.sqrt(3))

    def test_permutation_chart_roundtrip(self, rng):
        perm = rng.permutation(7)
        chart = permutation_chart(perm, 2)
        B = rng.standard_normal((7, 2))
        np.testing.assert_array_equal(chart.from_local(chart.to_local(B)), B)
        with pytest.raises(ValueError):
            permutation_chart([0, 0, 1], 1)

    def test_singular_block(self):
        U = np.vstack([np.zeros((2, 2)), np.eye(2)])
        with pytest.raises(ChartSingular):
            to_coordinates(identity_chart(4, 2), U)


class TestCoordinates:
    def test_origin(self):
        assert np.all(to_coordinates(identity_chart(5, 2), _origin(5, 2)).Xi == 0)

    def test_tangent_quotient(self):
        th = np.pi / 4
        c = to_coordinates(identity_chart(2, 1), np.array([[np.cos(th)], [np.sin(th)]]))
        np.testing.assert_allclose(c.Xi, [[1.0]], rtol=1e-15)

    def test_n_coord(self, rng):
        c = to_coordinates(identity_chart(8, 3), random_stiefel(rng, 8, 3))
        assert c.n_coord == c.x.size == 15

    def test_roundtrip_subspace(self, rng):
        samples = [random_stiefel(rng, 8, 3) for _ in range(3)]
        chart = build_chart(samples, 0)
        U = samples[1]
        V = reconstruct(chart, to_coordinates(chart, U))
        assert subspace_error(U, V)[0] <= 1e-12

    def test_velocity_at_origin(self, rng):
        samples = [random_stiefel(rng, 7, 2)]
        chart = build_chart(samples, 0)
        Delta = rng.standard_normal((5, 2))
        U = chart.from_local(_origin(7, 2))
        Ud = chart.from_local(np.vstack([np.zeros((2, 2)), Delta]))
        c = coordinate_velocity(chart, U, Ud)
        np.testing.assert_allclose(c.XiDot, Delta, atol=1e-14)

    def test_stationary(self, rng):
        U = random_stiefel(rng, 6, 2)
        c = coordinate_velocity(identity_chart(6, 2), U, np.zeros((6, 2)))
        assert np.all(c.XiDot == 0)

    def test_velocity_finite_difference(self):
        t = chebyshev_nodes(8, (0.0, 1.0))
        chart = build_chart([gen_transcendental(40, 3, s, 1)[0] for s in t], 3)

        def xi(s):
            return to_coordinates(chart, gen_transcendental(40, 3, s, 1)[0]).Xi

        P, D = gen_transcendental(40, 3, 0.5, 1)
        XiDot = coordinate_velocity(chart, P, D).XiDot
        h = 1e-5
        fd = (xi(0.5 + h) - xi(0.5 - h)) / (2 * h)
        assert np.linalg.norm(fd - XiDot) <= 1e-7 * np.linalg.norm(XiDot)
        ok, *_ = fd_convergence(xi, 0.5, XiDot)
        assert ok


class TestReconstruct:
    def test_origin(self, rng):
        chart = build_chart([random_stiefel(rng, 6, 2)], 0)
        np.testing.assert_allclose(reconstruct(chart, np.zeros((4, 2))).U, chart.Qframe[:, :2], atol=1e-15)

    def test_scalar(self):
        U = reconstruct(identity_chart(2, 1), np.array([[1.0]])).U
        np.testing.assert_allclose(U, [[2**-0.5], [2**-0.5]], rtol=1e-15)

    def test_lemma_roundtrip_and_orthogonality(self, rng):
        chart = build_chart([random_stiefel(rng, 12, 4)], 0)
        Xi = rng.standard_normal((8, 4))
        P = reconstruct(chart, Xi)
        assert orthogonality_defect(P.U) <= 1e-12
        assert np.linalg.norm(to_coordinates(chart, P).Xi - Xi) <= 1e-11

    def test_velocity_at_origin(self, rng):
        chart = build_chart([random_stiefel(rng, 6, 2)], 0)
        Delta = rng.standard_normal((4, 2))
        _, D = reconstruct_velocity(chart, MvCoordinates(np.zeros((4, 2)), Delta))
        np.testing.assert_allclose(D.Udot, chart.from_local(np.vstack([np.zeros((2, 2)), Delta])), atol=1e-15)

    def test_zero_velocity(self, rng):
        _, D = reconstruct_velocity(identity_chart(6, 2), MvCoordinates(rng.standard_normal((4, 2)), np.zeros((4, 2))))
        assert np.all(D.Udot == 0)

    def test_velocity_horizontal_and_fd(self, rng):
        chart = build_chart([random_stiefel(rng, 8, 3)], 0)
        X0, X1, X2 = (rng.standard_normal((5, 3)) for _ in range(3))

        def proj(s):
            return projector(reconstruct(chart, X0 + s * X1 + s * s * X2))

        s0 = 0.3
        P, D = reconstruct_velocity(chart, MvCoordinates(X0 + s0 * X1 + s0**2 * X2, X1 + 2 * s0 * X2))
        assert np.linalg.norm(P.U.T @ D.Udot) <= 1e-12
        exact = D.Udot @ P.U.T + P.U @ D.Udot.T
        ok, e1, e2, ratio = fd_convergence(proj, s0, exact)
        assert ok, (e1, e2, ratio)

    def test_requires_velocity(self):
        with pytest.raises(ValueError):
            reconstruct_velocity(identity_chart(3, 1), MvCoordinates(np.zeros((2, 1))))


class TestMetrics:
    def test_projector_block(self):
        P = projector(_origin(4, 2))
        np.testing.assert_array_equal(P, np.diag([1.0, 1.0, 0.0, 0.0]))

    def test_projector_trace_and_idempotent(self, rng):
        P = projector(random_stiefel(rng, 9, 4))
        assert np.trace(P) == pytest.approx(4.0)
        assert np.linalg.norm(P @ P - P) <= 1e-14

    def test_subspace_error_cases(self, rng):
        U = random_stiefel(rng, 5, 2)
        assert subspace_error(U, U @ random_stiefel(rng, 2, 2))[0] <= 1e-14
        a, r = subspace_error(np.array([[1.0], [0.0]]), np.array([[0.0], [1.0]]))
        assert a == pytest.approx(np.sqrt(2)) and r == pytest.approx(np.sqrt(2))

    def test_subspace_error_matches_explicit(self, rng):
        U, V = random_stiefel(rng, 7, 3), random_stiefel(rng, 7, 3)
        a, r = subspace_error(U, V)
        explicit = np.linalg.norm(U @ U.T - V @ V.T)
        assert a == pytest.approx(explicit, rel=1e-13)
        assert r == pytest.approx(explicit / np.sqrt(3), rel=1e-13)

    def test_projector_velocity_error_explicit(self, rng):
        U, V = random_stiefel(rng, 8, 2), random_stiefel(rng, 8, 2)
        Ud, Vd = random_lift(rng, U), random_lift(rng, V)
        diff, ref = projector_velocity_error(U, Ud, V, Vd)
        Pu = Ud @ U.T + U @ Ud.T
        Pv = Vd @ V.T + V @ Vd.T
        assert diff == pytest.approx(np.linalg.norm(Pu - Pv), rel=1e-12)
        assert ref == pytest.approx(np.linalg.norm(Pv), rel=1e-12)


class TestLocalBehaviour:
    def test_differential_at_origin(self, rng):
        chart = build_chart([random_stiefel(rng, 9, 3)], 0)
        Delta = rng.standard_normal((6, 3))
        Delta /= np.linalg.norm(Delta)
        U0 = reconstruct(chart, np.zeros((6, 3))).U
        target = chart.from_local(np.vstack([np.zeros((3, 3)), Delta]))
        errs = [np.linalg.norm((reconstruct(chart, eps * Delta).U - U0) / eps - target) for eps in (1e-3, 1e-4, 1e-5)]
        # first-order accurate: error shrinks tenfold per decade
        for a, b in zip(errs, errs[1:]):
            assert 5 <= a / b <= 20
        assert errs[-1] <= 1e-4

    def test_linearized_projector_bound(self, rng):
        chart = build_chart([random_stiefel(rng, 10, 4)], 0)
        P0 = projector(reconstruct(chart, np.zeros((6, 4))))
        U1_norm = np.linalg.norm(chart.to_local(reconstruct(chart, np.zeros((6, 4))).U)[:4], 2)
        for _ in range(10):
            Delta = rng.standard_normal((6, 4))
            Delta *= rng.uniform(1e-9, 1e-6) / np.linalg.norm(Delta)
            gap = np.linalg.norm(projector(reconstruct(chart, Delta)) - P0)
            assert gap <= np.sqrt(2) * U1_norm * np.linalg.norm(Delta) * (1 + 1e-3)


@settings(max_examples=40, deadline=None)
@given(n=st.integers(2, 12), p=st.integers(1, 4), seed=st.integers(0, 2**32 - 1), size=st.floats(0.0, 10.0))
def test_coordinate_roundtrip_property(n, p, seed, size):
    p = min(p, n - 1)
    rng = np.random.default_rng(seed)
    chart = build_chart([random_stiefel(rng, n, p)], 0)
    Xi = rng.standard_normal((n - p, p))
    Xi *= size / max(np.linalg.norm(Xi), 1e-300)
    P = reconstruct(chart, Xi)
    assert orthogonality_defect(P.U) <= 1e-12
    assert np.linalg.norm(to_coordinates(chart, P).Xi - Xi) <= 1e-11 * (1 + np.linalg.norm(Xi))


@settings(max_examples=40, deadline=None)
@given(n=st.integers(2, 12), p=st.integers(1, 4), seed=st.integers(0, 2**32 - 1), size=st.floats(0.0, 10.0))
def test_gauge_invariance_property(n, p, seed, size):
    p = min(p, n - 1)
    rng = np.random.default_rng(seed)
    chart = build_chart([random_stiefel(rng, n, p)], 0)
    Xi = rng.standard_normal((n - p, p))
    Xi *= size / max(np.linalg.norm(Xi), 1e-300)
    U = reconstruct(chart, Xi).U
    G = random_stiefel(rng, p, p)
    D = random_lift(rng, U)
    a = coordinate_velocity(chart, U, D)
    b = coordinate_velocity(chart, U @ G, D @ G)
    assert np.linalg.norm(a.Xi - b.Xi) <= 1e-11
    assert np.linalg.norm(a.XiDot - b.XiDot) <= 1e-11 * max(1.0, np.linalg.norm(a.XiDot))
