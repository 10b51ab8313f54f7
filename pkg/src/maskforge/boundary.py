"""Boundary regions of binary masks: exact Euclidean definition and the
convolutional-kernel approximation, plus their agreement measure."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .masks import as_binary, mask_iou


class BoundaryMethod(enum.Enum):
    EXACT = "exact"
    APPROX = "approx"


@dataclass(frozen=True)
class BoundaryParams:
    """Boundary width (in pixels) plus the extraction method to use."""

    width: int = 1
    method: BoundaryMethod = BoundaryMethod.APPROX

    def __post_init__(self):
        if self.width < 1:
            raise ValueError(f"boundary width must be >= 1, got {self.width}")


@dataclass(frozen=True)
class BoundaryKernel:
    """Zero-sum square kernel: center weight side**2 - 1, all others -1."""

    side: int
    weights: np.ndarray = field(compare=False)

    def __post_init__(self):
        w = self.weights
        assert w.shape == (self.side, self.side)
        assert int(w.sum()) == 0


def make_kernel(width: int) -> BoundaryKernel:
    """Build the boundary-detection kernel for the given width.

    Side is 2*width + 1; the center weight balances the -1 ring exactly so a
    constant region responds with zero.
    """
    if width < 1:
        raise ValueError(f"width must be >= 1, got {width}")
    side = 2 * width + 1
    weights = np.full((side, side), -1, dtype=np.int64)
    weights[width, width] = side * side - 1
    return BoundaryKernel(side=side, weights=weights)


def contour(m) -> np.ndarray:
    """Foreground pixels having at least one background 4-neighbor.

    Pixels outside the image count as background, so a mask touching the edge
    has its edge pixels on the contour.
    """
    a = as_binary(m)
    padded = np.pad(a, 1, mode="constant")
    has_bg_neighbor = (
        (padded[:-2, 1:-1] == 0)
        | (padded[2:, 1:-1] == 0)
        | (padded[1:-1, :-2] == 0)
        | (padded[1:-1, 2:] == 0)
    )
    return ((a == 1) & has_bg_neighbor).astype(np.uint8)


def boundary_exact(m, d_hat: int) -> np.ndarray:
    """Pixels within Euclidean distance d_hat of the mask contour (inclusive).

    Covers both the foreground and background side of the contour. An empty
    contour yields an empty region.
    """
    if d_hat < 1:
        raise ValueError(f"d_hat must be >= 1, got {d_hat}")
    c = contour(m)
    if not c.any():
        return np.zeros_like(c)
    dist = ndimage.distance_transform_edt(1 - c)
    return (dist <= d_hat).astype(np.uint8)


def boundary_approx(m, width: int) -> np.ndarray:
    """Kernel approximation of the boundary region.

    Convolves the zero-padded mask with the zero-sum kernel; positive
    responses mark the foreground boundary. The same convolution on the
    value-reversed padded mask marks the background boundary; the result is
    their union. Reversal happens after padding, so outside-image pixels read
    as background on both passes (an all-zeros mask stays all-zeros).
    """
    if width < 1:
        raise ValueError(f"width must be >= 1, got {width}")
    a = as_binary(m)
    kernel = make_kernel(width).weights
    fg = ndimage.convolve(a.astype(np.int64), kernel, mode="constant", cval=0) > 0
    bg = ndimage.convolve((1 - a).astype(np.int64), kernel, mode="constant", cval=1) > 0
    return (fg | bg).astype(np.uint8)


def boundary_region(m, params: BoundaryParams) -> np.ndarray:
    """Dispatch to the exact or approximate boundary per `params`."""
    if params.method is BoundaryMethod.EXACT:
        return boundary_exact(m, params.width)
    return boundary_approx(m, params.width)


def boundary_agreement(m, width: int) -> float:
    """IoU between the exact and kernel-approximated boundary regions."""
    return mask_iou(boundary_exact(m, width), boundary_approx(m, width))
