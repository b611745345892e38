import numpy as np
from django.test import SimpleTestCase
from hypothesis import given
from hypothesis import settings as hypothesis_settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose, assert_array_equal

from fusion.baselines import (
    OsmosisEvolutionConfig,
    blended_face_drift,
    direct_blend,
    explicit_step_limit,
    face_drift,
    linear_osmosis,
    osmosis_apply,
    osmosis_fusion,
    osmosis_matrix,
    osmosis_matrix_apply,
    poisson_edit,
    steady_state,
)
from fusion.exceptions import ConvergenceError, ShapeMismatchError
from fusion.grid import laplacian

from .fixtures import random_positive

DIRECT = OsmosisEvolutionConfig(linear_solver="direct")


class OsmosisOperatorTests(SimpleTestCase):
    def test_matrix_agrees_with_operator(self):
        v = random_positive((1, 6, 7), seed=1)
        u = random_positive((1, 6, 7), seed=2)
        drift_faces = face_drift(v)
        from_matrix = osmosis_matrix(drift_faces[0]) @ u[0].ravel()
        assert_allclose(from_matrix.reshape(6, 7), osmosis_apply(u, drift_faces)[0], atol=1e-12)

    def test_guide_is_steady_state(self):
        v = random_positive((3, 9, 9), seed=3)
        assert_allclose(osmosis_matrix_apply(4.0 * v, v), 0.0, atol=1e-12)

    def test_columns_sum_to_zero(self):
        system = osmosis_matrix(face_drift(random_positive((1, 8, 8), seed=4))[0])
        assert_allclose(np.asarray(system.sum(axis=0)).ravel(), 0.0, atol=1e-12)

    def test_off_diagonal_entries_are_non_negative(self):
        system = osmosis_matrix(face_drift(random_positive((1, 8, 8), 1.0, 100.0, seed=5))[0]).toarray()
        off_diagonal = system - np.diag(np.diag(system))
        self.assertGreaterEqual(off_diagonal.min(), 0.0)

    def test_constant_guide_gives_laplacian(self):
        u = random_positive((1, 5, 5), seed=6)
        assert_allclose(osmosis_matrix_apply(u, np.full((1, 5, 5), 3.0)), laplacian(u), atol=1e-12)

    def test_drift_faces_close_the_boundary(self):
        d = face_drift(random_positive((1, 4, 5), seed=7))
        assert_array_equal(d[0, 0, :, -1], 0.0)
        assert_array_equal(d[0, 1, -1, :], 0.0)


class LinearOsmosisTests(SimpleTestCase):
    def setUp(self):
        self.u0 = random_positive((1, 16, 16), 1.0, 10.0, seed=10)
        self.v = random_positive((1, 16, 16), 1.0, 10.0, seed=11)

    def test_reaches_rescaled_guide(self):
        result = linear_osmosis(self.u0, self.v)
        expected = steady_state(self.u0, self.v)
        self.assertLess(np.abs(result.u - expected).max() / np.abs(expected).max(), 1e-3)

    def test_mean_is_conserved_at_every_step(self):
        for cfg, tolerance in ((OsmosisEvolutionConfig(), 1e-5), (DIRECT, 1e-10)):
            result = linear_osmosis(self.u0, self.v, cfg=cfg)
            self.assertEqual(result.means.shape, (cfg.n_steps + 1, 1))
            assert_allclose(result.means, result.means[0], rtol=tolerance)

    def test_stays_non_negative(self):
        result = linear_osmosis(self.u0, self.v, cfg=DIRECT)
        self.assertGreaterEqual(float(result.minima.min()), 0.0)

    @hypothesis_settings(max_examples=20, deadline=None)
    @given(st.floats(min_value=0.1, max_value=100.0))
    def test_output_scales_linearly(self, scale):
        cfg = OsmosisEvolutionConfig(final_time=2000.0, linear_solver="direct")
        base = linear_osmosis(self.u0, self.v, cfg=cfg).u
        scaled = linear_osmosis(scale * self.u0, self.v, cfg=cfg).u
        assert_allclose(scaled, scale * base, rtol=1e-9)

    def test_additive_in_initial_image(self):
        other = random_positive((1, 16, 16), seed=12)
        cfg = OsmosisEvolutionConfig(time_step=10.0, final_time=50.0, linear_solver="direct")
        total = linear_osmosis(self.u0 + other, self.v, cfg=cfg).u
        parts = linear_osmosis(self.u0, self.v, cfg=cfg).u + linear_osmosis(other, self.v, cfg=cfg).u
        assert_allclose(total, parts, rtol=1e-9)

    def test_time_step_is_fitted_to_final_time(self):
        cfg = OsmosisEvolutionConfig(time_step=3.0, final_time=10.0)
        self.assertEqual(cfg.n_steps, 4)

    def test_explicit_scheme(self):
        limit = explicit_step_limit(osmosis_matrix(face_drift(self.v)[0]))
        cfg = OsmosisEvolutionConfig(time_step=0.9 * limit, final_time=20 * limit, scheme="explicit")
        result = linear_osmosis(self.u0, self.v, cfg=cfg)
        assert_allclose(result.means, result.means[0], rtol=1e-12)
        self.assertGreaterEqual(float(result.minima.min()), 0.0)

    def test_explicit_scheme_rejects_unstable_step(self):
        cfg = OsmosisEvolutionConfig(time_step=10.0, final_time=100.0, scheme="explicit")
        with self.assertRaises(ValueError):
            linear_osmosis(self.u0, self.v, cfg=cfg)

    def test_iterative_solver_failure(self):
        cfg = OsmosisEvolutionConfig(solver_tol=1e-15, solver_maxiter=1)
        with self.assertRaises(ConvergenceError) as caught:
            linear_osmosis(self.u0, self.v, cfg=cfg)
        self.assertIsNotNone(caught.exception.residual)

    def test_channel_workers_give_identical_results(self):
        u0 = random_positive((3, 8, 8), seed=13)
        v = random_positive((3, 8, 8), seed=14)
        serial = linear_osmosis(u0, v, cfg=DIRECT)
        threaded = linear_osmosis(u0, v, cfg=DIRECT, workers=3)
        assert_array_equal(serial.u, threaded.u)

    def test_needs_a_drift(self):
        with self.assertRaises(ValueError):
            linear_osmosis(self.u0)

    def test_shape_mismatch(self):
        with self.assertRaises(ShapeMismatchError):
            linear_osmosis(self.u0, random_positive((1, 16, 15), seed=15))

    def test_invalid_config(self):
        with self.assertRaises(ValueError):
            OsmosisEvolutionConfig(scheme="crank-nicolson")
        with self.assertRaises(ValueError):
            OsmosisEvolutionConfig(time_step=0.0)


class OsmosisFusionTests(SimpleTestCase):
    def test_full_foreground_alpha_returns_foreground(self):
        f = random_positive((3, 12, 12), 10.0, 200.0, seed=20)
        b = random_positive((3, 12, 12), 10.0, 200.0, seed=21)
        result = osmosis_fusion(f, b, np.ones((12, 12)), cfg=DIRECT)
        assert_allclose(result.u, f, rtol=1e-3)

    def test_mean_blend_on_binary_alpha_matches_alpha_blend(self):
        f = random_positive((1, 6, 6), seed=22)
        b = random_positive((1, 6, 6), seed=23)
        alpha = np.zeros((6, 6))
        alpha[:, :3] = 1.0
        assert_allclose(blended_face_drift(f, b, alpha, "mean"), blended_face_drift(f, b, alpha, "alpha"))

    def test_mean_blend_averages_on_transition_zone(self):
        f = random_positive((1, 4, 4), seed=24)
        b = random_positive((1, 4, 4), seed=25)
        alpha = np.full((4, 4), 0.3)
        expected = 0.5 * (face_drift(f) + face_drift(b))
        got = blended_face_drift(f, b, alpha, "mean")
        assert_allclose(got[..., 0, :, :-1], expected[..., 0, :, :-1])

    def test_unknown_blend(self):
        with self.assertRaises(ValueError):
            blended_face_drift(np.ones((1, 2, 2)), np.ones((1, 2, 2)), np.ones((2, 2)), "max")

    def test_direct_blend(self):
        f = np.full((1, 2, 2), 10.0)
        b = np.full((1, 2, 2), 20.0)
        alpha = np.array([[1.0, 0.0], [0.5, 0.25]])
        assert_allclose(direct_blend(f, b, alpha)[0], [[10.0, 20.0], [15.0, 17.5]])


class PoissonEditTests(SimpleTestCase):
    def setUp(self):
        rng = np.random.default_rng(30)
        self.b = rng.uniform(0.0, 255.0, size=(3, 20, 20))
        self.mask = np.zeros((20, 20))
        self.mask[5:15, 4:12] = 1.0

    def test_additive_shift_is_absorbed(self):
        u = poisson_edit(self.b + 37.5, self.b, self.mask)
        self.assertLess(np.abs(u - self.b).max(), 1e-6)

    def test_outside_mask_keeps_background(self):
        f = np.random.default_rng(31).uniform(0.0, 255.0, size=(3, 20, 20))
        u = poisson_edit(f, self.b, self.mask)
        outside = self.mask == 0
        assert_array_equal(u[:, outside], self.b[:, outside])
        assert_allclose(laplacian(u)[:, self.mask == 1], laplacian(f)[:, self.mask == 1], atol=1e-8)

    def test_empty_mask(self):
        assert_array_equal(poisson_edit(self.b + 1.0, self.b, np.zeros((20, 20))), self.b)

    def test_full_mask_shifts_foreground_to_background_mean(self):
        f = np.random.default_rng(32).uniform(size=(1, 20, 20))
        u = poisson_edit(f, self.b[:1], np.ones((20, 20)))
        assert_allclose(u - f, self.b[:1].mean() - f.mean())

    def test_mask_must_be_binary(self):
        with self.assertRaises(ValueError):
            poisson_edit(self.b, self.b, np.full((20, 20), 0.5))
