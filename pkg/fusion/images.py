# fusion/images.py
"""
Image-shaped inputs of the fusion model and the checks applied to them.

An image is a float64 array ``(C, H, W)`` with C = 1 or 3 and strictly
positive entries; an alpha map is ``(H, W)`` with entries in [0, 1]. The
weights of the joint model travel in :class:`ModelWeights`.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import PositivityError, ShapeMismatchError

MAX_INTENSITY = 255.0


@dataclass(frozen=True)
class ModelWeights:
    """Weights of the joint energy ``O + gamma*D + eta*R`` plus the positivity floor."""

    eta: float = 0.1
    mu: float = 100.0
    gamma: float = 1.0
    eps: float = 0.05
    offset: float = 1.0

    def __post_init__(self):
        if not self.eta >= 0:
            raise ValueError(f"eta must be >= 0, got {self.eta}")
        if not self.mu > 0:
            raise ValueError(f"mu must be > 0, got {self.mu}")
        if not self.gamma >= 0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")
        if not 0 < self.eps < 1:
            raise ValueError(f"eps must lie in (0, 1), got {self.eps}")
        if not self.offset > 0:
            raise ValueError(f"offset must be > 0, got {self.offset}")


def as_image(array):
    """Return ``array`` as a float64 ``(C, H, W)`` image; 2-D input becomes one channel."""
    image = np.asarray(array, dtype=np.float64)
    if image.ndim == 2:
        image = image[np.newaxis]
    if image.ndim != 3 or image.shape[0] not in (1, 3):
        raise ShapeMismatchError(f"expected a (C, H, W) image with C in (1, 3), got shape {image.shape}")
    if image.shape[1] < 2 or image.shape[2] < 2:
        raise ShapeMismatchError(f"image must be at least 2x2, got {image.shape[1]}x{image.shape[2]}")
    return image


def check_positive(image, name):
    """Raise :class:`PositivityError` naming the first non-positive (or NaN) pixel."""
    bad = ~(np.asarray(image) > 0)
    if bad.any():
        index = np.argwhere(bad)[0]
        raise PositivityError(name, index, np.asarray(image)[tuple(index)])
    return image


def check_alpha(alpha):
    alpha = np.asarray(alpha, dtype=np.float64)
    if alpha.ndim == 3 and alpha.shape[0] == 1:
        alpha = alpha[0]
    if alpha.ndim != 2:
        raise ShapeMismatchError(f"alpha map must be a single (H, W) channel, got shape {alpha.shape}")
    if not (np.all(alpha >= 0.0) and np.all(alpha <= 1.0)):
        raise ValueError("alpha map entries must lie in [0, 1]")
    return alpha


def check_same_shape(**arrays):
    """Check that every keyword array shares the grid size (and channels, for images)."""
    items = list(arrays.items())
    first_name, first = items[0]
    for name, array in items[1:]:
        a, b = np.shape(first), np.shape(array)
        if a[-2:] != b[-2:] or (len(a) == len(b) == 3 and a[0] != b[0]):
            raise ShapeMismatchError(f"{first_name} has shape {a} but {name} has shape {b}")


def clamp_floor(image, offset):
    """Clamp below at the positivity floor."""
    return np.maximum(image, offset)
