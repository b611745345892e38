# fusion/metrics.py
"""
Chromaticity comparison of colour images.

Dividing every channel by the geometric channel mean removes a global
intensity scale, so two images that differ only by a positive factor have
zero chroma error.
"""

import csv
from typing import NamedTuple

import numpy as np

from .images import as_image, check_positive, check_same_shape

CHANNEL_NAMES = ("R", "G", "B")
METRIC_COLUMNS = ("metric", "channel", "value")


class ChromaErrorNorm(NamedTuple):
    """Per-channel RMS and L2 norms of the chroma error, with their channel means."""

    rms: np.ndarray
    l2: np.ndarray
    mean_rms: float
    mean_l2: float


def _colour_image(image, name):
    image = as_image(image)
    if image.shape[0] != 3:
        raise ValueError(f"{name} must have three colour channels, got {image.shape[0]}")
    check_positive(image, name)
    return image


def gcm(image):
    """Geometric channel mean ``(z0 z1 z2)^(1/3)`` of a positive RGB image."""
    image = _colour_image(image, "image")
    return np.cbrt(image[0] * image[1] * image[2])


def chromaticity(image):
    image = _colour_image(image, "image")
    return image / gcm(image)


def chroma_error(u1, u2):
    """Pixelwise ``|u1/gcm(u1) - u2/gcm(u2)|`` per channel."""
    u1 = _colour_image(u1, "u1")
    u2 = _colour_image(u2, "u2")
    check_same_shape(u1=u1, u2=u2)
    return np.abs(chromaticity(u1) - chromaticity(u2))


def chroma_error_norm(u1, u2):
    error = chroma_error(u1, u2)
    l2 = np.sqrt(np.sum(error ** 2, axis=(1, 2)))
    rms = l2 / np.sqrt(error.shape[1] * error.shape[2])
    return ChromaErrorNorm(rms=rms, l2=l2, mean_rms=float(rms.mean()), mean_l2=float(l2.mean()))


def metric_rows(norm):
    """Rows ``(metric, channel, value)`` for RGB channels and their mean."""
    rows = []
    for metric, values, mean in (("chroma_rms", norm.rms, norm.mean_rms), ("chroma_l2", norm.l2, norm.mean_l2)):
        rows.extend((metric, channel, float(value)) for channel, value in zip(CHANNEL_NAMES, values))
        rows.append((metric, "mean", mean))
    return rows


def write_metrics_csv(rows, handle, digits=12):
    writer = csv.writer(handle, lineterminator="\n")
    writer.writerow(METRIC_COLUMNS)
    for metric, channel, value in rows:
        writer.writerow([metric, channel, f"{value:.{digits}g}"])
