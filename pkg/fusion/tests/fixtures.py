"""Synthetic images shared by the test modules."""

import numpy as np
from PIL import Image

from fusion.imaging import blur_alpha


def random_positive(shape, low=1.0, high=2.0, seed=0):
    return np.random.default_rng(seed).uniform(low, high, size=shape)


def fusion_fixture(size=32, channels=1):
    """
    Flat foreground, textured background, half-plane alpha map blurred with sigma 2.

    Returns ``(f, b, alpha)`` with intensities on the 0..255 scale.
    """
    rows, cols = np.indices((size, size))
    f = np.full((channels, size, size), 120.0)
    texture = 100.0 + 40.0 * np.sin(rows / 3.0) * np.cos(cols / 4.0) + 10.0 * (rows % 4)
    b = np.repeat(texture[np.newaxis], channels, axis=0)
    if channels == 3:
        b = b * np.array([1.0, 0.8, 0.6])[:, np.newaxis, np.newaxis]
    alpha = blur_alpha((cols < size // 2).astype(np.float64), 2.0)
    return f, b, alpha


def write_png(path, image):
    """Write a ``(C, H, W)`` array with values in 0..255 as an 8-bit PNG."""
    data = np.clip(np.rint(image), 0, 255).astype(np.uint8)
    if data.shape[0] == 1:
        Image.fromarray(data[0]).save(path)
    else:
        Image.fromarray(np.ascontiguousarray(np.moveaxis(data, 0, -1))).save(path)
    return path
