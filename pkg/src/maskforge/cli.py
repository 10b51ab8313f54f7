"""Command-line surface tying the mask, boundary, refinement and metric
modules together.

Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .boundary import BoundaryMethod, BoundaryParams, boundary_agreement, boundary_region
from .masks import BBox, binarize, crop_resize_gt
from .metrics import evaluate_corpus
from .refine import run_pipeline
from .rle import RleError
from .scenes import (
    Instance,
    Scene,
    SceneFormatError,
    atomic_write_text,
    load_scene,
    save_scene,
    synth_corpus,
    tight_bbox,
    write_pbm,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _add_global_flags(p, suppress=False):
    # accepted both before and after the subcommand; post-subcommand wins,
    # so the subparser copies must not clobber values with their defaults
    def default(v):
        return {"default": argparse.SUPPRESS if suppress else v}

    p.add_argument("--seed", type=int, help="RNG seed for synthesis", **default(0))
    p.add_argument("--threads", type=int,
                   help="worker threads (MASKFORGE_THREADS overrides)", **default(1))
    p.add_argument("--quiet", action="store_true",
                   help="suppress progress output", **default(False))


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="maskforge",
                description="Boundary-aware mask refinement toolkit")
    p.add_argument("--version", action="version", version=f"maskforge {__version__}")
    _add_global_flags(p)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    b = sub.add_parser("boundary", help="boundary masks for every instance of a scene")
    b.add_argument("--in", dest="infile", required=True)
    b.add_argument("--width", type=int, default=1)
    b.add_argument("--method", choices=["exact", "approx"], default="approx")
    b.add_argument("--out", required=True)
    b.add_argument("--pbm-dir", help="also dump each boundary mask as a P1 bitmap")

    c = sub.add_parser("compare-boundaries",
                       help="exact-vs-approx boundary agreement IoU over a corpus")
    c.add_argument("--in", dest="indir", required=True, help="corpus directory of scene files")
    c.add_argument("--widths", type=_int_list, default=[1, 2])
    c.add_argument("--sizes", type=_int_list, default=[28, 56, 112])
    c.add_argument("--report", choices=["table", "json"], default="table")
    c.add_argument("--out", help="write the report here instead of stdout")

    r = sub.add_parser("refine", help="compose stage predictions into final masks")
    r.add_argument("--stage1", required=True)
    r.add_argument("--stage2", required=True)
    r.add_argument("--stage3", required=True)
    r.add_argument("--dhat", type=int, default=1)
    r.add_argument("--method", choices=["exact", "approx"], default="approx")
    r.add_argument("--threshold", type=float, default=0.5)
    r.add_argument("--out", required=True)
    r.add_argument("--pbm-dir", help="also dump each final mask as a P1 bitmap")

    e = sub.add_parser("eval", help="boundary-quality metrics of predictions vs GT")
    e.add_argument("--gt", required=True, help="GT scene file or directory")
    e.add_argument("--pred", required=True, help="prediction scene file or directory")
    e.add_argument("--tolerances", type=_int_list, default=[1, 3])
    e.add_argument("--dhat", type=int, default=2)
    e.add_argument("--iou-floor", type=float, default=0.5)
    e.add_argument("--out", help="write the JSON report here instead of stdout")

    s = sub.add_parser("synth", help="generate a deterministic synthetic corpus")
    s.add_argument("--out", required=True, help="output directory")
    s.add_argument("--scenes", type=int, required=True)
    s.add_argument("--size", type=int, default=112)
    s.add_argument("--max-instances", type=int, default=3)

    for subparser in (b, c, r, e, s):
        _add_global_flags(subparser, suppress=True)

    return p


def _threads(args) -> int:
    env = os.environ.get("MASKFORGE_THREADS")
    if env is not None:
        try:
            return max(1, int(env))
        except ValueError:
            raise DataError(f"MASKFORGE_THREADS must be an integer, got {env!r}")
    return max(1, args.threads)


def _scene_paths(path: str) -> list[str]:
    if os.path.isdir(path):
        names = sorted(n for n in os.listdir(path)
                       if n.endswith(".json") and n != "manifest.json")
        if not names:
            raise DataError(f"no scene files in {path}")
        return [os.path.join(path, n) for n in names]
    if not os.path.exists(path):
        raise DataError(f"no such file: {path}")
    return [path]


def _emit(text: str, out: str | None) -> None:
    if out:
        atomic_write_text(out, text)
    else:
        sys.stdout.write(text)


def cmd_boundary(args) -> int:
    scene = load_scene(args.infile)
    params = BoundaryParams(width=args.width, method=BoundaryMethod(args.method))
    out_instances = []
    for inst in scene.instances:
        b = boundary_region(inst.mask, params)
        box = tight_bbox(b) if b.any() else inst.bbox
        out_instances.append(Instance(id=inst.id, category=inst.category,
                                      bbox=box, mask=b, score=inst.score))
        if args.pbm_dir:
            os.makedirs(args.pbm_dir, exist_ok=True)
            write_pbm(b, os.path.join(args.pbm_dir, f"boundary_{inst.id:04d}.pbm"))
    save_scene(Scene(image_size=scene.image_size, instances=out_instances), args.out)
    if not args.quiet:
        print(f"wrote {len(out_instances)} boundary masks to {args.out}")
    return EXIT_OK


def _scene_agreements(path: str, widths, sizes):
    scene = load_scene(path)
    rows = []
    for inst in scene.instances:
        for size in sizes:
            roi = crop_resize_gt(inst.mask, inst.bbox, size)
            for width in widths:
                rows.append((size, width, boundary_agreement(roi, width)))
    return rows


def cmd_compare_boundaries(args) -> int:
    paths = _scene_paths(args.indir)
    n_threads = _threads(args)
    with ThreadPoolExecutor(max_workers=n_threads) as ex:
        per_scene = list(ex.map(
            lambda p: _scene_agreements(p, args.widths, args.sizes), paths))
    sums: dict[tuple[int, int], list] = {(s, w): [0.0, 0] for s in args.sizes for w in args.widths}
    for rows in per_scene:
        for size, width, iou in rows:
            cell = sums[(size, width)]
            cell[0] += iou
            cell[1] += 1
    means = {key: (cell[0] / cell[1] if cell[1] else 0.0) for key, cell in sums.items()}
    if args.report == "json":
        payload = {
            "widths": args.widths,
            "sizes": args.sizes,
            "mean_iou": [
                {"size": s, "width": w, "iou": round(means[(s, w)], 6)}
                for s in args.sizes for w in args.widths
            ],
        }
        text = json.dumps(payload, separators=(",", ":")) + "\n"
    else:
        lines = ["Output size | " + " | ".join(f"width {w}" for w in args.widths)]
        for s in args.sizes:
            cells = " | ".join(f"{means[(s, w)]:.4f}" for w in args.widths)
            lines.append(f"{s}x{s} | {cells}")
        text = "\n".join(lines) + "\n"
    _emit(text, args.out)
    return EXIT_OK


def _stage_prob(inst: Instance) -> np.ndarray:
    if inst.prob is not None:
        return inst.prob
    return inst.mask.astype(np.float64)


def cmd_refine(args) -> int:
    s1 = load_scene(args.stage1)
    s2 = load_scene(args.stage2)
    s3 = load_scene(args.stage3)
    by_id2 = {i.id: i for i in s2.instances}
    by_id3 = {i.id: i for i in s3.instances}
    params = BoundaryParams(width=args.dhat, method=BoundaryMethod(args.method))
    out_instances = []
    for inst in s1.instances:
        if inst.id not in by_id2 or inst.id not in by_id3:
            raise DataError(f"instance {inst.id} missing from a stage file")
        final = run_pipeline(
            _stage_prob(inst),
            [_stage_prob(by_id2[inst.id]), _stage_prob(by_id3[inst.id])],
            params=params, threshold=args.threshold)
        box = tight_bbox(final) if final.any() else BBox(0, 0, final.shape[1], final.shape[0])
        out_instances.append(Instance(id=inst.id, category=inst.category,
                                      bbox=box, mask=final, score=inst.score))
        if args.pbm_dir:
            os.makedirs(args.pbm_dir, exist_ok=True)
            write_pbm(final, os.path.join(args.pbm_dir, f"final_{inst.id:04d}.pbm"))
    save_scene(Scene(image_size=final.shape, instances=out_instances), args.out)
    if not args.quiet:
        print(f"wrote {len(out_instances)} composed masks to {args.out}")
    return EXIT_OK


def cmd_eval(args) -> int:
    gt_paths = _scene_paths(args.gt)
    pred_paths = _scene_paths(args.pred)
    if len(gt_paths) != len(pred_paths):
        raise DataError(
            f"gt/pred scene counts differ: {len(gt_paths)} vs {len(pred_paths)}")
    n_threads = _threads(args)
    with ThreadPoolExecutor(max_workers=n_threads) as ex:
        gt_scenes = list(ex.map(load_scene, gt_paths))
        pred_scenes = list(ex.map(load_scene, pred_paths))
    try:
        report = evaluate_corpus(
            [[i.mask for i in s.instances] for s in gt_scenes],
            [[i.mask for i in s.instances] for s in pred_scenes],
            tolerances=args.tolerances, d_hat=args.dhat, iou_floor=args.iou_floor)
    except ValueError as exc:
        raise DataError(str(exc))
    payload = {}
    for n in args.tolerances:
        payload[f"f_{n}px"] = round(report.f_boundary[n], 6)
    payload["boundary_acc"] = round(report.boundary_acc, 6)
    payload["nonboundary_acc"] = round(report.nonboundary_acc, 6)
    payload["n_matched"] = report.n_matched
    payload["n_ignored"] = report.n_ignored
    _emit(json.dumps(payload, separators=(",", ":")) + "\n", args.out)
    return EXIT_OK


def cmd_synth(args) -> int:
    try:
        scenes = synth_corpus(args.seed, args.scenes, image_size=args.size,
                              max_instances=args.max_instances)
    except ValueError as exc:
        raise DataError(str(exc))
    os.makedirs(args.out, exist_ok=True)
    names = []
    for i, scene in enumerate(scenes):
        name = f"scene_{i:04d}.json"
        save_scene(scene, os.path.join(args.out, name))
        names.append(name)
    manifest = {"seed": args.seed, "image_size": args.size, "scenes": names}
    atomic_write_text(os.path.join(args.out, "manifest.json"),
                      json.dumps(manifest, separators=(",", ":")) + "\n")
    if not args.quiet:
        print(f"wrote {len(names)} scenes to {args.out}")
    return EXIT_OK


_COMMANDS = {
    "boundary": cmd_boundary,
    "compare-boundaries": cmd_compare_boundaries,
    "refine": cmd_refine,
    "eval": cmd_eval,
    "synth": cmd_synth,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (DataError, SceneFormatError, RleError, OSError) as exc:
        print(f"maskforge: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
