"""Multi-stage refinement algebra: training regions, region-restricted loss,
stage loss aggregation, and the coarse-to-fine composition pipeline."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .boundary import BoundaryParams, boundary_region
from .masks import (
    ShapeMismatchError,
    as_binary,
    as_prob,
    binarize,
    upsample2x_binary,
)

# Stage sides are 14 * 2**k for k = 1, 2, 3.
STAGE_SIZES = (28, 56, 112)

BCE_EPS = 1e-7

TRAIN_WIDTH_DEFAULT = 2
INFER_WIDTH_DEFAULT = 1


@dataclass(frozen=True)
class LossWeights:
    """Weights for the initial mask loss and the three refinement stages."""

    w_init: float = 0.25
    w1: float = 0.5
    w2: float = 0.75
    w3: float = 1.0

    def __post_init__(self):
        if min(self.w_init, self.w1, self.w2, self.w3) < 0:
            raise ValueError("loss weights must be nonnegative")


@dataclass(frozen=True)
class StageState:
    """Per-stage bundle: index, raw prediction, composed mask and its boundary."""

    k: int
    raw_pred: np.ndarray
    complete_mask: np.ndarray
    pred_boundary: np.ndarray

    @property
    def size(self) -> int:
        return 14 * 2**self.k


def training_region(gt_prev, pred_prev, d_hat: int = TRAIN_WIDTH_DEFAULT,
                    params: BoundaryParams | None = None) -> np.ndarray:
    """Upsampled union of the previous-stage GT and predicted boundary regions.

    This is the pixel set the next stage's loss is restricted to. Boundary
    method defaults to the kernel approximation at the training width.
    """
    g = as_binary(gt_prev)
    p = as_binary(pred_prev)
    if g.shape != p.shape:
        raise ShapeMismatchError(f"gt/pred shapes differ: {g.shape} vs {p.shape}")
    if params is None:
        params = BoundaryParams(width=d_hat)
    union = np.logical_or(boundary_region(g, params), boundary_region(p, params)).astype(np.uint8)
    return upsample2x_binary(union)


def region_bce_loss(preds: Sequence, gts: Sequence, regions: Sequence) -> float:
    """Binary cross-entropy averaged over region pixels across a batch.

    Predictions are clipped to [eps, 1-eps] before the logarithm. The
    normalizer is the total region pixel count over all instances; an empty
    region yields loss 0 rather than a division by zero.
    """
    if not (len(preds) == len(gts) == len(regions)):
        raise ValueError("preds, gts and regions must have equal length")
    total = 0.0
    delta = 0
    for pred, gt, region in zip(preds, gts, regions):
        p = as_prob(pred)
        y = as_binary(gt)
        r = as_binary(region)
        if not (p.shape == y.shape == r.shape):
            raise ShapeMismatchError(
                f"instance shapes differ: {p.shape}, {y.shape}, {r.shape}")
        pc = np.clip(p, BCE_EPS, 1.0 - BCE_EPS)
        l = -(y * np.log(pc) + (1 - y) * np.log(1.0 - pc))
        total += float((r * l).sum())
        delta += int(r.sum())
    if delta == 0:
        return 0.0
    return total / delta


def aggregate_losses(init_loss: float, stage_losses: Sequence[float],
                     w: LossWeights = LossWeights()) -> float:
    """Weighted sum of the initial-mask loss and the three stage losses."""
    if len(stage_losses) != 3:
        raise ValueError(f"expected 3 stage losses, got {len(stage_losses)}")
    s1, s2, s3 = stage_losses
    return w.w_init * init_loss + w.w1 * s1 + w.w2 * s2 + w.w3 * s3


def compose_stage(prev_complete, prev_boundary, raw_pred,
                  threshold: float = 0.5) -> np.ndarray:
    """One coarse-to-fine composition step.

    Inside the upsampled previous boundary the binarized raw prediction wins;
    everywhere else the upsampled previous complete mask is kept.
    """
    mc = as_binary(prev_complete)
    mb = as_binary(prev_boundary)
    rp = as_prob(raw_pred)
    if mc.shape != mb.shape:
        raise ShapeMismatchError(f"prev mask shapes differ: {mc.shape} vs {mb.shape}")
    expected = (2 * mc.shape[0], 2 * mc.shape[1])
    if rp.shape != expected:
        raise ShapeMismatchError(
            f"raw_pred must be {expected}, got {rp.shape}")
    b_up = upsample2x_binary(mb)
    m_up = upsample2x_binary(mc)
    return np.where(b_up == 1, binarize(rp, threshold), m_up).astype(np.uint8)


def run_pipeline(stage1_pred, stage_preds: Sequence,
                 params: BoundaryParams = BoundaryParams(width=INFER_WIDTH_DEFAULT),
                 threshold: float = 0.5,
                 return_stages: bool = False):
    """Compose stage predictions into the finest complete mask.

    Stage 1's binarized prediction seeds the recurrence; each later stage
    pastes its prediction only inside the upsampled boundary of the previous
    composed mask. Expects 28x28 then 56x56, 112x112 (more stages follow the
    same doubling).
    """
    s1 = as_prob(stage1_pred)
    if s1.shape != (STAGE_SIZES[0], STAGE_SIZES[0]):
        raise ShapeMismatchError(
            f"stage-1 prediction must be {STAGE_SIZES[0]}x{STAGE_SIZES[0]}, got {s1.shape}")
    complete = binarize(s1, threshold)
    stages = [StageState(k=1, raw_pred=s1, complete_mask=complete,
                         pred_boundary=boundary_region(complete, params))]
    size = STAGE_SIZES[0]
    for raw in stage_preds:
        rp = as_prob(raw)
        size *= 2
        if rp.shape != (size, size):
            raise ShapeMismatchError(
                f"expected stage prediction of size {size}x{size}, got {rp.shape}")
        prev = stages[-1]
        complete = compose_stage(prev.complete_mask, prev.pred_boundary, rp, threshold)
        stages.append(StageState(k=prev.k + 1, raw_pred=rp, complete_mask=complete,
                                 pred_boundary=boundary_region(complete, params)))
    if return_stages:
        return stages
    return stages[-1].complete_mask


def oracle_stage_predictor(gt_full) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Stand-in for a trained mask head: area-average downsample the GT.

    Returns soft 28x28, 56x56 and 112x112 masks whose values are block means
    of the full-resolution 112x112 ground truth.
    """
    g = as_binary(gt_full)
    if g.shape != (STAGE_SIZES[-1], STAGE_SIZES[-1]):
        raise ShapeMismatchError(
            f"gt must be {STAGE_SIZES[-1]}x{STAGE_SIZES[-1]}, got {g.shape}")
    f = g.astype(np.float64)
    out = []
    for size in STAGE_SIZES:
        block = STAGE_SIZES[-1] // size
        out.append(f.reshape(size, block, size, block).mean(axis=(1, 3)))
    return tuple(out)
