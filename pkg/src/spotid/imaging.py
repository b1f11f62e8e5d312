"""Raster types and pre-processing stages feeding the segmentation threads.

Images are numpy arrays: grayscale float64 (H, W) in [0, 1], RGB float64
(H, W, 3) in [0, 1], masks bool (H, W). 8-bit sources are divided by 255 at
decode time so the gamma power law needs no rescaling.
"""

from __future__ import annotations

import numpy as np
import scipy.ndimage as ndi
from PIL import Image

from .errors import InvalidInputError, InvalidParameterError

# ITU-R BT.601 luma weights; they sum to 1 so gray inputs are fixed points.
GRAY_WEIGHTS = np.array([0.299, 0.587, 0.114])


def check_gray_image(img) -> np.ndarray:
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 2 or img.shape[0] < 1 or img.shape[1] < 1:
        raise InvalidInputError(f"grayscale image must be 2-D, got shape {img.shape}")
    if img.min() < 0.0 or img.max() > 1.0:
        raise InvalidInputError("grayscale intensities must lie in [0, 1]")
    return img


def check_rgb_image(img) -> np.ndarray:
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 3 or img.shape[2] != 3:
        raise InvalidInputError(f"RGB image must have shape (H, W, 3), got {img.shape}")
    if img.min() < 0.0 or img.max() > 1.0:
        raise InvalidInputError("RGB channel values must lie in [0, 1]")
    return img


def check_mask(mask) -> np.ndarray:
    mask = np.asarray(mask)
    if mask.dtype != bool:
        if not np.isin(mask, (0, 1)).all():
            raise InvalidInputError("mask values must be boolean")
        mask = mask.astype(bool)
    if mask.ndim != 2:
        raise InvalidInputError(f"mask must be 2-D, got shape {mask.shape}")
    return mask


def to_grayscale(img) -> np.ndarray:
    """Linear BT.601 combination of the R, G, B channels."""
    img = check_rgb_image(img)
    return img @ GRAY_WEIGHTS


def median_filter(img, window: int) -> np.ndarray:
    """Median over a window x window neighborhood, borders edge-replicated."""
    img = check_gray_image(img)
    if window % 2 == 0 or window < 1 or window > min(img.shape):
        raise InvalidParameterError(
            f"median window must be odd, >= 1 and <= min image side, got {window}"
        )
    return ndi.median_filter(img, size=window, mode="nearest")


def gamma_correct(img, gamma: float) -> np.ndarray:
    """Per-pixel power law out = in**gamma on normalized intensities."""
    img = check_gray_image(img)
    if not gamma > 0:
        raise InvalidParameterError(f"gamma must be positive, got {gamma}")
    return np.power(img, gamma)


def load_image(path) -> np.ndarray:
    """Decode a PNG/JPEG file to a normalized RGB array."""
    with Image.open(path) as im:
        arr = np.asarray(im.convert("RGB"), dtype=np.float64)
    return arr / 255.0


def load_mask(path) -> np.ndarray:
    """Decode an 8-bit grayscale mask PNG; any nonzero pixel is foreground."""
    with Image.open(path) as im:
        arr = np.asarray(im.convert("L"))
    return arr > 0


def save_mask(mask, path) -> None:
    """Serialize a mask as 8-bit grayscale PNG, foreground = 255."""
    mask = check_mask(mask)
    Image.fromarray(np.where(mask, 255, 0).astype(np.uint8), mode="L").save(
        path, format="PNG"
    )


def encode_mask_png(mask) -> bytes:
    import io

    mask = check_mask(mask)
    buf = io.BytesIO()
    Image.fromarray(np.where(mask, 255, 0).astype(np.uint8), mode="L").save(
        buf, format="PNG"
    )
    return buf.getvalue()


def decode_mask_png(data: bytes) -> np.ndarray:
    import io

    with Image.open(io.BytesIO(data)) as im:
        arr = np.asarray(im.convert("L"))
    return arr > 0
