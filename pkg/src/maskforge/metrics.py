"""Boundary-quality evaluation: instance matching, boundary F1 within a pixel
tolerance, and boundary/non-boundary pixel accuracy."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np
from scipy import ndimage

from .boundary import boundary_exact, contour
from .masks import ShapeMismatchError, as_binary, mask_iou

IOU_FLOOR_DEFAULT = 0.5
ACC_WIDTH_DEFAULT = 2


@dataclass(frozen=True)
class MatchedPair:
    gt_id: int
    pred_id: int
    iou: float


class RegionAccuracies(NamedTuple):
    boundary: float
    nonboundary: float
    boundary_empty: bool
    nonboundary_empty: bool


@dataclass
class EvalReport:
    """Macro-averaged metric values over the matched instances of a corpus."""

    f_boundary: dict[int, float]
    boundary_acc: float
    nonboundary_acc: float
    n_matched: int
    n_ignored: int
    pairs: list[MatchedPair] = field(default_factory=list)


def match_instances(gts: Sequence, preds: Sequence,
                    iou_floor: float = IOU_FLOOR_DEFAULT) -> list[MatchedPair]:
    """Greedily assign each GT its best-IoU prediction.

    GTs are processed in order of descending best IoU (ties: lower GT index
    first); each prediction matches at most one GT; matches below the floor
    are dropped and the GT counts as ignored.
    """
    gt_arrs = [as_binary(g) for g in gts]
    pred_arrs = [as_binary(p) for p in preds]
    shapes = {a.shape for a in gt_arrs + pred_arrs}
    if len(shapes) > 1:
        raise ShapeMismatchError(f"all masks must share image dimensions, got {shapes}")
    if not gt_arrs or not pred_arrs:
        return []
    iou = np.array([[mask_iou(g, p) for p in pred_arrs] for g in gt_arrs])
    order = sorted(range(len(gt_arrs)), key=lambda gi: (-iou[gi].max(), gi))
    used: set[int] = set()
    matches = []
    for gi in order:
        candidates = [(iou[gi, pi], -pi) for pi in range(len(pred_arrs)) if pi not in used]
        if not candidates:
            continue
        best_iou, neg_pi = max(candidates)
        if best_iou >= iou_floor:
            pi = -neg_pi
            used.add(pi)
            matches.append(MatchedPair(gt_id=gi, pred_id=pi, iou=float(best_iou)))
    matches.sort(key=lambda m: m.gt_id)
    return matches


def boundary_f1(gt, pred, n: int) -> float:
    """Boundary F1: contour precision/recall within Euclidean distance n.

    Precision is the fraction of predicted contour pixels within n of some GT
    contour pixel; recall swaps the roles. Both contours empty scores 1.0; an
    empty side scores 0 for its direction.
    """
    g = as_binary(gt)
    p = as_binary(pred)
    if g.shape != p.shape:
        raise ShapeMismatchError(f"mask shapes differ: {g.shape} vs {p.shape}")
    if n < 1:
        raise ValueError(f"tolerance must be >= 1, got {n}")
    cg = contour(g)
    cp = contour(p)
    ng, np_ = int(cg.sum()), int(cp.sum())
    if ng == 0 and np_ == 0:
        return 1.0
    if ng == 0 or np_ == 0:
        return 0.0
    dist_to_gt = ndimage.distance_transform_edt(1 - cg)
    dist_to_pred = ndimage.distance_transform_edt(1 - cp)
    precision = float((dist_to_gt[cp == 1] <= n).mean())
    recall = float((dist_to_pred[cg == 1] <= n).mean())
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def region_accuracies(gt, pred, d_hat: int = ACC_WIDTH_DEFAULT) -> RegionAccuracies:
    """Pixel accuracy of `pred` inside and outside the GT boundary region.

    An empty region reports accuracy 1.0 with its empty flag set.
    """
    g = as_binary(gt)
    p = as_binary(pred)
    if g.shape != p.shape:
        raise ShapeMismatchError(f"mask shapes differ: {g.shape} vs {p.shape}")
    region = boundary_exact(g, d_hat) == 1
    correct = g == p
    n_in = int(region.sum())
    n_out = region.size - n_in
    b_acc = float(correct[region].mean()) if n_in else 1.0
    nb_acc = float(correct[~region].mean()) if n_out else 1.0
    return RegionAccuracies(b_acc, nb_acc, n_in == 0, n_out == 0)


def evaluate_corpus(gt_scenes: Sequence[Sequence], pred_scenes: Sequence[Sequence],
                    tolerances: Sequence[int] = (1, 3),
                    d_hat: int = ACC_WIDTH_DEFAULT,
                    iou_floor: float = IOU_FLOOR_DEFAULT) -> EvalReport:
    """Match and score a corpus of scenes, macro-averaging per matched instance.

    Each scene is a sequence of instance masks; GT and prediction scenes pair
    up by index. Unmatched GT instances are counted as ignored and excluded
    from every average.
    """
    if len(gt_scenes) != len(pred_scenes):
        raise ValueError("gt and pred corpora must have the same scene count")
    n_gt_total = sum(len(s) for s in gt_scenes)
    if n_gt_total == 0:
        raise ValueError("empty ground-truth corpus")
    f_sums = {int(n): 0.0 for n in tolerances}
    b_sum = nb_sum = 0.0
    n_matched = 0
    all_pairs = []
    for gts, preds in zip(gt_scenes, pred_scenes):
        pairs = match_instances(gts, preds, iou_floor)
        for pair in pairs:
            g, p = gts[pair.gt_id], preds[pair.pred_id]
            for n in f_sums:
                f_sums[n] += boundary_f1(g, p, n)
            acc = region_accuracies(g, p, d_hat)
            b_sum += acc.boundary
            nb_sum += acc.nonboundary
        n_matched += len(pairs)
        all_pairs.extend(pairs)
    if n_matched == 0:
        f_avg = {n: 0.0 for n in f_sums}
        b_avg = nb_avg = 0.0
    else:
        f_avg = {n: s / n_matched for n, s in f_sums.items()}
        b_avg = b_sum / n_matched
        nb_avg = nb_sum / n_matched
    return EvalReport(f_boundary=f_avg, boundary_acc=b_avg, nonboundary_acc=nb_avg,
                      n_matched=n_matched, n_ignored=n_gt_total - n_matched,
                      pairs=all_pairs)
