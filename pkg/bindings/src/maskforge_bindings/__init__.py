"""In-process bindings for scripting workflows.

Exposes `boundary`, `refine` and `evaluate` with the same semantics and flag
names as the maskforge CLI, working on plain byte-per-pixel buffers so callers
need no numpy-specific mask types. All functions are pure and hold no state
between calls; results are bit-identical to the native CLI path.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

import maskforge as mf

__version__ = "0.1.0"

__all__ = ["ArrayMaskView", "boundary", "refine", "evaluate"]


@dataclass(frozen=True)
class ArrayMaskView:
    """Row-major byte-per-pixel view of a binary mask."""

    height: int
    width: int
    data: bytes

    def __post_init__(self):
        if self.height < 1 or self.width < 1:
            raise ValueError(f"invalid dimensions {self.height}x{self.width}")
        if len(self.data) != self.height * self.width:
            raise ValueError(
                f"buffer length {len(self.data)} != {self.height}*{self.width}")
        if any(b not in (0, 1) for b in self.data):
            raise ValueError("mask bytes must be 0 or 1")

    @classmethod
    def from_array(cls, arr) -> "ArrayMaskView":
        a = np.ascontiguousarray(np.asarray(arr, dtype=np.uint8))
        return cls(height=a.shape[0], width=a.shape[1], data=a.tobytes())

    def to_array(self) -> np.ndarray:
        return np.frombuffer(self.data, dtype=np.uint8).reshape(self.height, self.width).copy()


def boundary(view: ArrayMaskView, width: int = 1, method: str = "approx") -> ArrayMaskView:
    """Boundary region of a binary mask; mirrors `maskforge boundary`."""
    params = mf.BoundaryParams(width=width, method=mf.BoundaryMethod(method))
    return ArrayMaskView.from_array(mf.boundary_region(view.to_array(), params))


def refine(stage_preds: Sequence, dhat: int = 1, method: str = "approx",
           threshold: float = 0.5) -> ArrayMaskView:
    """Compose stage predictions into the finest mask; mirrors `maskforge refine`.

    `stage_preds` holds the per-stage soft masks (28x28, then each following
    stage doubled) as row-major nested sequences or arrays of floats in [0, 1].
    """
    if len(stage_preds) < 1:
        raise ValueError("need at least the 28x28 stage prediction")
    arrs = [np.asarray(p, dtype=np.float64) for p in stage_preds]
    params = mf.BoundaryParams(width=dhat, method=mf.BoundaryMethod(method))
    final = mf.run_pipeline(arrs[0], arrs[1:], params=params, threshold=threshold)
    return ArrayMaskView.from_array(final)


def evaluate(gt_scenes: Sequence[Sequence[ArrayMaskView]],
             pred_scenes: Sequence[Sequence[ArrayMaskView]],
             tolerances: Sequence[int] = (1, 3), dhat: int = 2,
             iou_floor: float = 0.5) -> dict:
    """Boundary-quality report over a corpus; mirrors `maskforge eval` output.

    Returns the CLI's report payload: f_<n>px per tolerance, boundary_acc,
    nonboundary_acc, n_matched, n_ignored (ratios rounded to 6 decimals like
    the CLI serializer).
    """
    report = mf.evaluate_corpus(
        [[v.to_array() for v in scene] for scene in gt_scenes],
        [[v.to_array() for v in scene] for scene in pred_scenes],
        tolerances=tolerances, d_hat=dhat, iou_floor=iou_floor)
    payload = {}
    for n in tolerances:
        payload[f"f_{n}px"] = round(report.f_boundary[n], 6)
    payload["boundary_acc"] = round(report.boundary_acc, 6)
    payload["nonboundary_acc"] = round(report.nonboundary_acc, 6)
    payload["n_matched"] = report.n_matched
    payload["n_ignored"] = report.n_ignored
    return payload
