import io
import math

import numpy as np
from django.test import SimpleTestCase
from hypothesis import given
from hypothesis import strategies as st
from numpy.testing import assert_allclose, assert_array_equal

from fusion.metrics import chroma_error, chroma_error_norm, gcm, metric_rows, write_metrics_csv

from .fixtures import random_positive


class GeometricChannelMeanTests(SimpleTestCase):
    def test_cube_root_of_product(self):
        image = np.array([8.0, 1.0, 27.0]).reshape(3, 1, 1) * np.ones((3, 2, 2))
        assert_allclose(gcm(image), 6.0)

    def test_grayscale_is_rejected(self):
        with self.assertRaises(ValueError):
            gcm(np.ones((1, 4, 4)))

    def test_non_positive_is_rejected(self):
        image = np.ones((3, 2, 2))
        image[1, 0, 0] = 0.0
        with self.assertRaises(ValueError):
            gcm(image)

    @given(st.floats(min_value=1e-3, max_value=1e3))
    def test_homogeneous_of_degree_one(self, scale):
        image = random_positive((3, 4, 4), 1.0, 255.0, seed=8)
        assert_allclose(gcm(scale * image), scale * gcm(image), rtol=1e-12)


class ChromaErrorTests(SimpleTestCase):
    def test_identical_images(self):
        u = random_positive((3, 5, 5), seed=1)
        assert_array_equal(chroma_error(u, u), 0.0)

    @given(st.floats(min_value=1e-3, max_value=1e3))
    def test_invariant_to_brightness(self, scale):
        u = random_positive((3, 5, 5), seed=2)
        assert_allclose(chroma_error(scale * u, u), 0.0, atol=1e-12)

    def test_invariant_to_per_pixel_brightness(self):
        u = random_positive((3, 5, 5), seed=9)
        shading = random_positive((5, 5), 0.1, 10.0, seed=10)
        assert_allclose(chroma_error(shading * u, u), 0.0, atol=1e-12)

    def test_detects_hue_change_at_one_pixel(self):
        u = random_positive((3, 5, 5), seed=11)
        w = u.copy()
        w[0, 2, 3] *= 2.0
        error = chroma_error(u, w)
        self.assertGreater(float(error[:, 2, 3].max()), 0.1)
        error[:, 2, 3] = 0.0
        assert_allclose(error, 0.0, atol=1e-12)

    def test_worked_pixel(self):
        first = np.array([8.0, 1.0, 1.0]).reshape(3, 1, 1) * np.ones((3, 2, 2))
        second = np.array([1.0, 1.0, 8.0]).reshape(3, 1, 1) * np.ones((3, 2, 2))
        assert_allclose(chroma_error(first, second)[:, 0, 0], [3.5, 0.0, 3.5], atol=1e-15)

    def test_symmetric(self):
        u = random_positive((3, 4, 4), seed=3)
        w = random_positive((3, 4, 4), seed=4)
        assert_array_equal(chroma_error(u, w), chroma_error(w, u))

    def test_norm_matches_direct_summation(self):
        u = random_positive((3, 6, 7), 1.0, 255.0, seed=5)
        w = random_positive((3, 6, 7), 1.0, 255.0, seed=6)
        norm = chroma_error_norm(u, w)
        for c in range(3):
            total = 0.0
            for i in range(6):
                for j in range(7):
                    mean_u = (u[0, i, j] * u[1, i, j] * u[2, i, j]) ** (1.0 / 3.0)
                    mean_w = (w[0, i, j] * w[1, i, j] * w[2, i, j]) ** (1.0 / 3.0)
                    total += (u[c, i, j] / mean_u - w[c, i, j] / mean_w) ** 2
            self.assertAlmostEqual(norm.l2[c], math.sqrt(total), delta=1e-12)
            self.assertAlmostEqual(norm.rms[c], math.sqrt(total / 42), delta=1e-12)
        self.assertAlmostEqual(norm.mean_rms, float(norm.rms.mean()))


class MetricReportTests(SimpleTestCase):
    def test_rows_and_csv(self):
        u = random_positive((3, 3, 3), seed=7)
        rows = metric_rows(chroma_error_norm(u, u))
        self.assertEqual(
            [(metric, channel) for metric, channel, _ in rows],
            [("chroma_rms", c) for c in ("R", "G", "B", "mean")] + [("chroma_l2", c) for c in ("R", "G", "B", "mean")],
        )
        handle = io.StringIO()
        write_metrics_csv(rows, handle)
        lines = handle.getvalue().splitlines()
        self.assertEqual(lines[0], "metric,channel,value")
        self.assertEqual(lines[1], "chroma_rms,R,0")
        self.assertEqual(len(lines), 9)
