"""Core mask grids: binary/probability carriers, resampling and overlap arithmetic.

Binary masks are 2D uint8 arrays with values in {0, 1}; probability masks are
2D float64 arrays with values in [0, 1]. Both are row-major. All functions are
pure and never mutate their inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class ShapeMismatchError(ValueError):
    """Raised when two masks that must share dimensions do not."""


@dataclass(frozen=True)
class BBox:
    """Axis-aligned box in real image coordinates (x0, y0) top-left exclusive of (x1, y1)."""

    x0: float
    y0: float
    x1: float
    y1: float

    def __post_init__(self):
        if not (self.x0 < self.x1 and self.y0 < self.y1):
            raise ValueError(f"degenerate box: {self}")

    @property
    def width(self) -> float:
        return self.x1 - self.x0

    @property
    def height(self) -> float:
        return self.y1 - self.y0


def as_binary(m) -> np.ndarray:
    """Validate and return a 2D uint8 {0,1} array."""
    a = np.asarray(m)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise ValueError(f"binary mask must be 2D non-empty, got shape {a.shape}")
    if not np.isin(a, (0, 1)).all():
        raise ValueError("binary mask values must be 0 or 1")
    return a.astype(np.uint8, copy=False)


def as_prob(m) -> np.ndarray:
    """Validate and return a 2D float64 array with values in [0, 1]."""
    a = np.asarray(m, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise ValueError(f"prob mask must be 2D non-empty, got shape {a.shape}")
    if a.size and (a.min() < 0.0 or a.max() > 1.0):
        raise ValueError("prob mask values must lie in [0, 1]")
    return a


def _bilinear_sample(field: np.ndarray, fy: np.ndarray, fx: np.ndarray) -> np.ndarray:
    """Sample `field` at fractional array coordinates with edge clamping.

    Coordinates are in array index space: (0, 0) is the center of pixel (0, 0).
    """
    h, w = field.shape
    y0 = np.floor(fy).astype(np.int64)
    x0 = np.floor(fx).astype(np.int64)
    wy = fy - y0
    wx = fx - x0
    y0c = np.clip(y0, 0, h - 1)
    y1c = np.clip(y0 + 1, 0, h - 1)
    x0c = np.clip(x0, 0, w - 1)
    x1c = np.clip(x0 + 1, 0, w - 1)
    f = field.astype(np.float64, copy=False)
    top = f[y0c[:, None], x0c[None, :]] * (1 - wx)[None, :] + f[y0c[:, None], x1c[None, :]] * wx[None, :]
    bot = f[y1c[:, None], x0c[None, :]] * (1 - wx)[None, :] + f[y1c[:, None], x1c[None, :]] * wx[None, :]
    return top * (1 - wy)[:, None] + bot * wy[:, None]


def upsample2x_bilinear(m) -> np.ndarray:
    """Bilinearly upsample a probability mask by 2x (half-pixel-center convention).

    Output pixel (i, j) samples the input at ((i + 0.5) / 2 - 0.5,
    (j + 0.5) / 2 - 0.5) with edge clamping, so constants are fixed points and
    values stay inside the input's [min, max] range.
    """
    a = as_prob(m)
    h, w = a.shape
    fy = (np.arange(2 * h) + 0.5) / 2.0 - 0.5
    fx = (np.arange(2 * w) + 0.5) / 2.0 - 0.5
    out = _bilinear_sample(a, fy, fx)
    return np.clip(out, 0.0, 1.0)


def upsample2x_binary(m) -> np.ndarray:
    """Upsample a binary mask by 2x: bilinear on the 0/1 field, then threshold at 0.5."""
    a = as_binary(m)
    return binarize(upsample2x_bilinear(a.astype(np.float64)), 0.5)


def binarize(m, threshold: float = 0.5) -> np.ndarray:
    """Threshold a probability mask: 1 where value >= threshold."""
    if not (0.0 < threshold < 1.0):
        raise ValueError(f"threshold must lie in (0, 1), got {threshold}")
    a = as_prob(m)
    return (a >= threshold).astype(np.uint8)


def mask_iou(a, b) -> float:
    """Intersection over union of two same-sized binary masks.

    Both masks empty counts as perfect agreement (1.0).
    """
    ma, mb = as_binary(a), as_binary(b)
    if ma.shape != mb.shape:
        raise ShapeMismatchError(f"mask shapes differ: {ma.shape} vs {mb.shape}")
    union = int(np.logical_or(ma, mb).sum())
    if union == 0:
        return 1.0
    inter = int(np.logical_and(ma, mb).sum())
    return inter / union


def crop_resize_gt(gt, box: BBox, out_size: int) -> np.ndarray:
    """Crop a ground-truth mask to `box` and resample to out_size x out_size.

    The 0/1 field is sampled bilinearly at the half-pixel centers of the output
    grid mapped into the box, then thresholded at 0.5. Pixel (r, c) of the
    input occupies [r, r+1] x [c, c+1] in image coordinates, so a box equal to
    the full image with matching out_size reproduces the input exactly.
    """
    a = as_binary(gt)
    if out_size < 1:
        raise ValueError(f"out_size must be >= 1, got {out_size}")
    h, w = a.shape
    if box.x1 <= 0 or box.y1 <= 0 or box.x0 >= w or box.y0 >= h:
        raise ValueError(f"box {box} does not intersect {h}x{w} image")
    fy = box.y0 + (np.arange(out_size) + 0.5) * box.height / out_size - 0.5
    fx = box.x0 + (np.arange(out_size) + 0.5) * box.width / out_size - 0.5
    soft = _bilinear_sample(a.astype(np.float64), fy, fx)
    return (soft >= 0.5).astype(np.uint8)
