"""Scene file serialization, debug bitmap output, and synthetic corpus
generation used as a desk-scale stand-in for real mask datasets."""

from __future__ import annotations

import json
import math
import os
import tempfile
from dataclasses import dataclass, field

import numpy as np

from .masks import BBox, as_binary
from .rle import RleMask, rle_decode, rle_encode


class SceneFormatError(ValueError):
    """Scene file fails schema or RLE validation."""


@dataclass
class Instance:
    id: int
    category: str
    bbox: BBox
    mask: np.ndarray  # binary, image-sized
    score: float | None = None
    prob: np.ndarray | None = None  # optional soft mask, same size


@dataclass
class Scene:
    image_size: tuple[int, int]  # (height, width)
    instances: list[Instance] = field(default_factory=list)


def _round6(x: float) -> float:
    return round(float(x), 6)


def scene_to_dict(scene: Scene) -> dict:
    """Canonical JSON-ready form: fixed key order, floats rounded to 6 places."""
    out = {"image_size": list(scene.image_size), "instances": []}
    for inst in scene.instances:
        r = rle_encode(inst.mask)
        d = {
            "id": inst.id,
            "category": inst.category,
            "bbox": [_round6(v) for v in (inst.bbox.x0, inst.bbox.y0, inst.bbox.x1, inst.bbox.y1)],
            "mask": {"size": list(r.size), "counts": list(r.counts)},
        }
        if inst.score is not None:
            d["score"] = _round6(inst.score)
        if inst.prob is not None:
            d["prob"] = [_round6(v) for v in inst.prob.flatten().tolist()]
        out["instances"].append(d)
    return out


def scene_from_dict(d: dict) -> Scene:
    try:
        h, w = (int(v) for v in d["image_size"])
        instances = []
        for inst in d["instances"]:
            r = RleMask(size=tuple(int(v) for v in inst["mask"]["size"]),
                        counts=tuple(int(c) for c in inst["mask"]["counts"]))
            mask = rle_decode(r)
            if mask.shape != (h, w):
                raise SceneFormatError(
                    f"instance {inst.get('id')} mask is {mask.shape}, scene is {(h, w)}")
            prob = None
            if "prob" in inst:
                prob = np.asarray(inst["prob"], dtype=np.float64).reshape(h, w)
            instances.append(Instance(
                id=int(inst["id"]),
                category=str(inst["category"]),
                bbox=BBox(*(float(v) for v in inst["bbox"])),
                mask=mask,
                score=float(inst["score"]) if "score" in inst else None,
                prob=prob,
            ))
        return Scene(image_size=(h, w), instances=instances)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, SceneFormatError):
            raise
        raise SceneFormatError(f"malformed scene file: {exc}") from exc


def atomic_write_text(path: str, text: str) -> None:
    """Write via a temp file in the same directory, then rename."""
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_scene(scene: Scene, path: str) -> None:
    atomic_write_text(path, json.dumps(scene_to_dict(scene), separators=(",", ":")) + "\n")


def load_scene(path: str) -> Scene:
    with open(path, encoding="utf-8") as f:
        try:
            d = json.load(f)
        except json.JSONDecodeError as exc:
            raise SceneFormatError(f"{path}: invalid JSON: {exc}") from exc
    return scene_from_dict(d)


def write_pbm(mask, path: str) -> None:
    """Write a plain-text P1 portable bitmap for eyeballing a mask (write-only)."""
    a = as_binary(mask)
    h, w = a.shape
    rows = "\n".join(" ".join(str(v) for v in row) for row in a)
    atomic_write_text(path, f"P1\n{w} {h}\n{rows}\n")


# --- synthetic corpus ---------------------------------------------------------

SHAPE_KINDS = ("disk", "rectangle", "bar", "blob")


def _rasterize_disk(h, w, cy, cx, radius):
    yy, xx = np.mgrid[0:h, 0:w]
    return (((yy + 0.5 - cy) ** 2 + (xx + 0.5 - cx) ** 2) <= radius**2).astype(np.uint8)


def _rasterize_rect(h, w, y0, x0, y1, x1):
    m = np.zeros((h, w), dtype=np.uint8)
    m[max(0, y0):min(h, y1), max(0, x0):min(w, x1)] = 1
    return m


def _rasterize_bar(h, w, cy, cx, length, thickness, angle):
    yy, xx = np.mgrid[0:h, 0:w]
    dy = yy + 0.5 - cy
    dx = xx + 0.5 - cx
    along = dx * math.cos(angle) + dy * math.sin(angle)
    across = -dx * math.sin(angle) + dy * math.cos(angle)
    return ((np.abs(along) <= length / 2) & (np.abs(across) <= thickness / 2)).astype(np.uint8)


def _rasterize_blob(h, w, cy, cx, r0, rng):
    # star-convex outline: radius modulated by a few random harmonics
    n_harm = int(rng.integers(2, 5))
    amps = rng.uniform(0.05, 0.25, size=n_harm)
    phases = rng.uniform(0, 2 * math.pi, size=n_harm)
    yy, xx = np.mgrid[0:h, 0:w]
    dy = yy + 0.5 - cy
    dx = xx + 0.5 - cx
    theta = np.arctan2(dy, dx)
    r_lim = np.full((h, w), float(r0))
    for k, (a, ph) in enumerate(zip(amps, phases), start=2):
        r_lim *= 1.0 + a * np.cos(k * theta + ph) / n_harm
    return ((dx**2 + dy**2) <= r_lim**2).astype(np.uint8)


def random_shape(rng: np.random.Generator, h: int, w: int,
                 kinds=SHAPE_KINDS) -> tuple[str, np.ndarray]:
    """Draw one random shape mask; sizes span roughly 16 to min(h, w) px."""
    kind = kinds[int(rng.integers(len(kinds)))]
    lo, hi = 16, min(h, w)
    extent = int(rng.integers(lo, hi + 1))
    cy = float(rng.uniform(extent / 4, h - extent / 4))
    cx = float(rng.uniform(extent / 4, w - extent / 4))
    if kind == "disk":
        mask = _rasterize_disk(h, w, cy, cx, extent / 2)
    elif kind == "rectangle":
        rh = extent
        rw = int(rng.integers(lo, hi + 1))
        y0 = int(rng.integers(0, max(1, h - rh + 1)))
        x0 = int(rng.integers(0, max(1, w - rw + 1)))
        mask = _rasterize_rect(h, w, y0, x0, y0 + rh, x0 + rw)
    elif kind == "bar":
        thickness = float(rng.uniform(4, max(5, extent / 3)))
        angle = float(rng.uniform(0, math.pi))
        mask = _rasterize_bar(h, w, cy, cx, extent, thickness, angle)
    else:
        mask = _rasterize_blob(h, w, cy, cx, extent / 2, rng)
    return kind, mask


def tight_bbox(mask) -> BBox:
    a = as_binary(mask)
    ys, xs = np.nonzero(a)
    if ys.size == 0:
        raise ValueError("empty mask has no bounding box")
    return BBox(x0=float(xs.min()), y0=float(ys.min()),
                x1=float(xs.max() + 1), y1=float(ys.max() + 1))


def synth_corpus(seed: int, n_scenes: int, image_size: int = 112,
                 max_instances: int = 3, kinds=SHAPE_KINDS) -> list[Scene]:
    """Generate a deterministic-per-seed corpus of shape scenes with GT instances."""
    if n_scenes < 1:
        raise ValueError(f"n_scenes must be >= 1, got {n_scenes}")
    rng = np.random.default_rng(seed)
    scenes = []
    for _ in range(n_scenes):
        h = w = image_size
        n_inst = int(rng.integers(1, max_instances + 1))
        instances = []
        for i in range(n_inst):
            for _attempt in range(20):
                kind, mask = random_shape(rng, h, w, kinds)
                if mask.any():
                    break
            else:
                continue
            instances.append(Instance(id=i, category=kind, bbox=tight_bbox(mask), mask=mask))
        if not instances:
            kind, mask = "rectangle", _rasterize_rect(h, w, h // 4, w // 4, 3 * h // 4, 3 * w // 4)
            instances = [Instance(id=0, category=kind, bbox=tight_bbox(mask), mask=mask)]
        scenes.append(Scene(image_size=(h, w), instances=instances))
    return scenes
