"""Uncompressed COCO-style run-length codec for binary masks.

Counts alternate runs of 0s and 1s over the column-major flattening of the
mask, always starting with the (possibly zero) leading run of 0s.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .masks import as_binary


class RleError(ValueError):
    """Malformed run-length counts."""


@dataclass(frozen=True)
class RleMask:
    size: tuple[int, int]  # (height, width)
    counts: tuple[int, ...]


def rle_encode(m) -> RleMask:
    """Encode a binary mask as column-major run lengths starting with zeros."""
    a = as_binary(m)
    h, w = a.shape
    flat = a.flatten(order="F")
    change = np.flatnonzero(flat[1:] != flat[:-1]) + 1
    starts = np.concatenate(([0], change))
    ends = np.concatenate((change, [flat.size]))
    runs = (ends - starts).tolist()
    if flat[0] == 1:
        runs = [0] + runs
    return RleMask(size=(h, w), counts=tuple(int(r) for r in runs))


def rle_decode(r: RleMask) -> np.ndarray:
    """Decode run lengths back to a binary mask; inverse of rle_encode."""
    h, w = r.size
    if h < 1 or w < 1:
        raise RleError(f"invalid size {r.size}")
    for i, c in enumerate(r.counts):
        if c < 0:
            raise RleError(f"negative count {c} at index {i}")
    total = sum(r.counts)
    if total != h * w:
        raise RleError(
            f"counts sum to {total}, expected {h * w} (at index {len(r.counts) - 1})")
    values = np.arange(len(r.counts)) % 2  # runs alternate 0, 1, 0, ...
    flat = np.repeat(values.astype(np.uint8), np.asarray(r.counts, dtype=np.int64))
    return flat.reshape((w, h)).T.copy()
