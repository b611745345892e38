# fusion/imaging.py
"""Reading and writing image files with Pillow, plus alpha-map smoothing."""

import logging

import numpy as np
from PIL import Image, UnidentifiedImageError
from scipy.ndimage import gaussian_filter

from .exceptions import ImageFormatError
from .images import MAX_INTENSITY, as_image

logger = logging.getLogger(__name__)

SIXTEEN_BIT_MODES = ("I;16", "I;16B", "I;16L", "I")


def _open(path):
    try:
        with Image.open(path) as handle:
            handle.load()
            return handle.copy()
    except FileNotFoundError:
        raise
    except (UnidentifiedImageError, OSError) as exc:
        raise ImageFormatError(f"cannot read image {path}: {exc}") from exc


def _to_array(picture):
    """Pixel values on the 8-bit scale; 16-bit input is rescaled by 255/65535."""
    if picture.mode in SIXTEEN_BIT_MODES:
        data = np.asarray(picture, dtype=np.float64) * (MAX_INTENSITY / 65535.0)
        return data[np.newaxis]
    if picture.mode not in ("L", "RGB"):
        picture = picture.convert("RGB")
    data = np.asarray(picture, dtype=np.float64)
    if data.ndim == 2:
        return data[np.newaxis]
    return np.moveaxis(data, -1, 0)


def load_image(path, offset=0.0):
    """
    Load a grayscale or RGB image as ``(C, H, W)`` float64 on the 0..255 scale.

    Values are clamped below at ``offset`` so the result is a valid
    positive input of the fusion model when ``offset > 0``.
    """
    image = as_image(_to_array(_open(path)))
    if offset > 0:
        clamped = int(np.count_nonzero(image < offset))
        if clamped:
            logger.warning("%s: %d values raised to the offset %g", path, clamped, offset)
        image = np.maximum(image, offset)
    logger.debug("loaded %s with shape %s", path, image.shape)
    return image


def load_alpha(path):
    """Load an alpha map as ``(H, W)`` in [0, 1]; colour files are converted to luminance."""
    picture = _open(path)
    if picture.mode in SIXTEEN_BIT_MODES:
        return np.asarray(picture, dtype=np.float64) / 65535.0
    return np.asarray(picture.convert("L"), dtype=np.float64) / MAX_INTENSITY


def load_mask(path):
    """Binary mask: pixels above half intensity are inside."""
    return load_alpha(path) > 0.5


def blur_alpha(alpha, sigma):
    if sigma < 0:
        raise ValueError(f"blur sigma must be >= 0, got {sigma}")
    if sigma == 0:
        return np.array(alpha, dtype=np.float64, copy=True)
    return np.clip(gaussian_filter(np.asarray(alpha, dtype=np.float64), sigma, mode="reflect"), 0.0, 1.0)


def to_uint8(image):
    """Clip to [0, 255] and round half up."""
    return np.floor(np.clip(image, 0.0, MAX_INTENSITY) + 0.5).astype(np.uint8)


def save_image(image, path):
    """Save a ``(C, H, W)`` image as an 8-bit PNG."""
    image = as_image(image)
    data = to_uint8(image)
    if data.shape[0] == 1:
        picture = Image.fromarray(data[0])
    else:
        picture = Image.fromarray(np.ascontiguousarray(np.moveaxis(data, 0, -1)))
    picture.save(path, format="PNG")
    logger.debug("saved %s", path)


def save_field(image, path):
    """Save a positive field such as v, rescaled so its maximum maps to 255."""
    image = as_image(image)
    peak = float(np.max(image))
    save_image(image * (MAX_INTENSITY / peak) if peak > 0 else image, path)
