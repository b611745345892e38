import numpy as np
from django.test import SimpleTestCase
from hypothesis import given
from hypothesis import settings as hypothesis_settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose, assert_array_equal

from fusion.exceptions import ConvergenceError
from fusion.grid import (
    GRAD_NORM_SQ_BOUND,
    div,
    grad,
    gradient_matrix,
    inner,
    laplacian,
    laplacian_matrix,
    operator_norm_sq_estimate,
    pixel_norm,
)

seeds = st.integers(min_value=0, max_value=2 ** 32 - 1)


class GradientTests(SimpleTestCase):
    def test_constant_has_zero_gradient(self):
        assert_array_equal(grad(np.full((5, 7), 3.0)), np.zeros((2, 5, 7)))

    def test_ramp_in_x(self):
        u = np.tile(np.arange(4.0), (3, 1))
        g = grad(u)
        assert_array_equal(g[0, :, :-1], np.ones((3, 3)))
        assert_array_equal(g[0, :, -1], np.zeros(3))
        assert_array_equal(g[1], np.zeros((3, 4)))

    def test_batched_channels(self):
        u = np.random.default_rng(1).normal(size=(3, 6, 5))
        g = grad(u)
        self.assertEqual(g.shape, (3, 2, 6, 5))
        for c in range(3):
            assert_array_equal(g[c], grad(u[c]))

    def test_pixel_norm(self):
        p = np.zeros((2, 2, 2))
        p[0, 0, 0], p[1, 0, 0] = 3.0, 4.0
        self.assertEqual(pixel_norm(p)[0, 0], 5.0)


class AdjointTests(SimpleTestCase):
    @hypothesis_settings(max_examples=120, deadline=None)
    @given(seeds)
    def test_div_is_negative_adjoint_of_grad(self, seed):
        rng = np.random.default_rng(seed)
        u = rng.normal(size=(16, 16))
        p = rng.normal(size=(2, 16, 16))
        residual = abs(inner(grad(u), p) + inner(u, div(p)))
        self.assertLessEqual(residual, 1e-12 * (np.linalg.norm(u) * np.linalg.norm(p) + 1.0))

    def test_rectangular_grid(self):
        rng = np.random.default_rng(7)
        u = rng.normal(size=(5, 9))
        p = rng.normal(size=(2, 5, 9))
        self.assertAlmostEqual(inner(grad(u), p), -inner(u, div(p)), places=12)

    def test_laplacian_of_constant_vanishes(self):
        assert_allclose(laplacian(np.full((6, 6), 2.5)), 0.0, atol=0)

    def test_laplacian_sums_to_zero(self):
        u = np.random.default_rng(3).normal(size=(8, 11))
        self.assertAlmostEqual(float(laplacian(u).sum()), 0.0, places=10)


class SparseMatrixTests(SimpleTestCase):
    def test_gradient_matrix_agrees_with_grad(self):
        u = np.random.default_rng(4).normal(size=(6, 9))
        assert_allclose((gradient_matrix(6, 9) @ u.ravel()).reshape(2, 6, 9), grad(u), atol=1e-14)

    def test_laplacian_matrix_agrees_with_laplacian(self):
        u = np.random.default_rng(5).normal(size=(7, 4))
        assert_allclose((laplacian_matrix(7, 4) @ u.ravel()).reshape(7, 4), laplacian(u), atol=1e-13)

    def test_too_small_grid(self):
        with self.assertRaises(ValueError):
            gradient_matrix(1, 5)


class OperatorNormTests(SimpleTestCase):
    def test_estimate_on_32x32(self):
        estimate = operator_norm_sq_estimate(32, 32)
        self.assertGreater(estimate, 6.0)
        self.assertLessEqual(estimate, GRAD_NORM_SQ_BOUND + 1e-9)

    def test_estimate_matches_dense_eigenvalue(self):
        dense = -laplacian_matrix(8, 8).toarray()
        largest = np.linalg.eigvalsh(dense)[-1]
        self.assertAlmostEqual(operator_norm_sq_estimate(8, 8), largest, delta=1e-6)

    def test_iteration_cap(self):
        with self.assertRaises(ConvergenceError):
            operator_norm_sq_estimate(16, 16, tol=1e-16, maxiter=3)
