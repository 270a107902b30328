"""Command-line surface tying the modules together.

Every subcommand reads JSON configs and map files, runs one operation and
prints a single-line JSON summary to stdout. Exit codes: 0 on success,
1 on usage errors, 2 on data or format errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .augment import AugmentPlan, materialize_patch, patch_plan, scale_albedo, scale_normal, scale_roughness
from .dcrf import build_diffuse_problem, build_normal_problem, build_roughness_problem, dcrf_solve, load_preset
from .estimators import FitConfig, GridSearchConfig, fit_svbrdf_gd, roughness_grid_search
from .gradients import finite_diff_check
from .imageio import MapFileSet, PfmFormatError, read_pfm, write_pfm, write_png
from .losses import LossWeights, NormalBinTable, total_loss, total_loss_cls
from .photometric import PsObservationSet, lambertian_ps
from .render import render_image, sample_novel_light, tonemap
from .scene import SceneConfig, SvbrdfMaps

USAGE_ERROR = 1
DATA_ERROR = 2


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on usage problems; the contract wants 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        raise SystemExit(USAGE_ERROR)


def _load_scene(path) -> SceneConfig:
    return SceneConfig.from_json(Path(path).read_text())


def _load_maps(path) -> tuple[MapFileSet, SvbrdfMaps]:
    fileset = MapFileSet.from_json(Path(path).read_text(), base_dir=Path(path).parent)
    return fileset, fileset.load()


def _emit(summary: dict) -> None:
    print(json.dumps(summary))


def _cmd_render(args) -> int:
    scene = _load_scene(args.scene)
    _, maps = _load_maps(args.maps)
    image = render_image(maps, scene, view_from_camera=not args.ortho_view)
    write_pfm(args.out, image.astype(np.float32))
    if args.preview:
        u8 = np.clip(np.round(255.0 * tonemap(image)), 0, 255).astype(np.uint8)
        write_png(args.preview, u8)
    _emit({"command": "render", "out": args.out, "resolution": list(scene.resolution),
           "min": float(image.min()), "max": float(image.max())})
    return 0


def _cmd_relight(args) -> int:
    scene = _load_scene(args.scene)
    _, maps = _load_maps(args.maps)
    if args.light is not None:
        light = np.asarray(args.light, dtype=float)
        if light[2] <= 0:
            raise ValueError("relight position must have positive z")
    else:
        light = sample_novel_light(args.seed, args.radius)
    image = render_image(maps, scene.with_light(light))
    write_pfm(args.out, image.astype(np.float32))
    _emit({"command": "relight", "out": args.out, "light": [float(x) for x in light]})
    return 0


def _cmd_fit(args) -> int:
    scene = _load_scene(args.scene)
    _, init = _load_maps(args.init)
    observed = read_pfm(args.observed)
    fit = FitConfig()
    if args.config:
        doc = json.loads(Path(args.config).read_text())
        fit = FitConfig(**doc)
    fitted, trace = fit_svbrdf_gd(np.asarray(observed, dtype=float), init, scene, fit)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    out_set = MapFileSet(str(out_dir / "albedo.pfm"), str(out_dir / "normal.pfm"),
                         str(out_dir / "roughness.pfm"), "linear-float", fitted.f0)
    out_set.save(fitted)
    (out_dir / "maps.json").write_text(out_set.to_json())
    (out_dir / "trace.json").write_text(json.dumps({"loss_trace": trace}))
    _emit({"command": "fit", "out_dir": str(out_dir), "iterations": len(trace) - 1,
           "initial_loss": trace[0], "final_loss": trace[-1]})
    return 0


def _cmd_gridsearch(args) -> int:
    scene = _load_scene(args.scene)
    _, maps = _load_maps(args.maps)
    observed = np.asarray(read_pfm(args.observed), dtype=float)
    gs = GridSearchConfig(levels=args.levels, coarse_samples=args.samples,
                          shrink=args.shrink, search_range=(args.range_lo, args.range_hi))
    rough = roughness_grid_search(observed, maps.albedo, maps.normal, maps.f0, scene, gs)
    write_pfm(args.out, rough.astype(np.float32))
    _emit({"command": "gridsearch-rough", "out": args.out,
           "finest_spacing": gs.finest_spacing(),
           "min": float(rough.min()), "max": float(rough.max())})
    return 0


def _cmd_dcrf_refine(args) -> int:
    _, maps = _load_maps(args.maps)
    image = np.asarray(read_pfm(args.image), dtype=float)
    preset = load_preset(args.params) if args.params else load_preset(args.preset)
    if args.preset == "diffuse":
        problem = build_diffuse_problem(maps.albedo, image, preset)
    elif args.preset == "normal":
        problem = build_normal_problem(maps.normal, maps.albedo, preset)
    else:
        if not args.grid_roughness:
            raise ValueError("the roughness preset needs --grid-roughness")
        grid = np.asarray(read_pfm(args.grid_roughness), dtype=float)
        problem = build_roughness_problem(maps.roughness, grid, maps.albedo, image, preset)
    refined, info = dcrf_solve(problem, return_info=True)
    write_pfm(args.out, refined.astype(np.float32))
    _emit({"command": "dcrf-refine", "preset": args.preset, "out": args.out,
           "sweeps": info["sweeps"], "last_update": info["max_updates"][-1]})
    return 0


def _cmd_ps(args) -> int:
    doc = json.loads(Path(args.manifest).read_text())
    base = Path(args.manifest).parent
    images = np.stack([np.asarray(read_pfm(base / p), dtype=float) for p in doc["images"]])
    obs = PsObservationSet(images=images,
                           light_dirs=np.asarray(doc["light_dirs"], dtype=float),
                           trim_high=int(doc.get("trim_high", args.trim_high)),
                           trim_low=int(doc.get("trim_low", args.trim_low)))
    normal, albedo = lambertian_ps(obs)
    write_pfm(args.out_normal, normal.astype(np.float32))
    write_pfm(args.out_albedo, albedo.astype(np.float32))
    _emit({"command": "ps", "lights": int(images.shape[0]),
           "out_normal": args.out_normal, "out_albedo": args.out_albedo})
    return 0


def _cmd_augment(args) -> int:
    _, maps = _load_maps(args.maps)
    plan_doc = json.loads(Path(args.plan).read_text()) if args.plan else {}
    if args.seed is not None:
        plan_doc["seed"] = args.seed
    plan_doc.setdefault("source_size", maps.resolution[0])
    plan = AugmentPlan(**{k: tuple(v) if isinstance(v, list) else v for k, v in plan_doc.items()})
    descriptors = patch_plan(plan)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(plan.seed)
    manifest = []
    limit = args.limit if args.limit is not None else len(descriptors)
    for idx, desc in enumerate(descriptors[:limit]):
        patch = materialize_patch(maps, desc, plan.output_size)
        patch.albedo = scale_albedo(patch.albedo, rng)
        patch.normal = scale_normal(patch.normal, rng)
        patch.roughness = scale_roughness(patch.roughness, rng)
        stem = f"patch_{idx:04d}"
        out_set = MapFileSet(str(out_dir / f"{stem}_albedo.pfm"),
                             str(out_dir / f"{stem}_normal.pfm"),
                             str(out_dir / f"{stem}_roughness.pfm"),
                             "linear-float", maps.f0)
        out_set.save(patch)
        manifest.append({"index": idx, "crop": [desc.row0, desc.col0, desc.size],
                         "flip": desc.flip, "rotation_deg": desc.rotation_deg,
                         "albedo_path": out_set.albedo_path,
                         "normal_path": out_set.normal_path,
                         "roughness_path": out_set.roughness_path})
    (out_dir / "manifest.json").write_text(json.dumps(manifest))
    _emit({"command": "augment", "descriptors": len(descriptors),
           "materialized": min(limit, len(descriptors)), "out_dir": str(out_dir)})
    return 0


def _cmd_gradcheck(args) -> int:
    scene = _load_scene(args.scene)
    _, maps = _load_maps(args.maps)
    h, w = maps.resolution
    rng = np.random.default_rng(args.seed)
    count = min(args.pixels, h * w)
    flat = rng.choice(h * w, size=count, replace=False)
    pixels = [(int(i // w), int(i % w)) for i in flat]
    report = finite_diff_check(maps, scene, step=args.step, pixel_sample=pixels)
    _emit({"command": "gradcheck", "pixels": count, **report})
    return 0 if report["passed"] else 2


def _cmd_loss_eval(args) -> int:
    scene = _load_scene(args.scene)
    _, pred = _load_maps(args.pred)
    _, gt = _load_maps(args.gt)
    novel = [sample_novel_light(args.seed + i, args.radius) for i in range(args.novel)]
    weights = LossWeights()
    table = NormalBinTable()
    if args.class_probs is not None:
        probs = [float(x) for x in args.class_probs.split(",")]
        total, terms = total_loss_cls(pred, gt, weights, table, scene, probs,
                                      args.label, novel_lights=novel)
    else:
        total, terms = total_loss(pred, gt, weights, table, scene, novel_lights=novel)
    _emit({"command": "loss-eval", "total": total,
           "terms": {k: float(v) for k, v in terms.items()},
           "novel_lights": [[float(x) for x in p] for p in novel]})
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="svbrdfkit", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("render", help="render maps under the configured flash")
    p.add_argument("--scene", required=True)
    p.add_argument("--maps", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--preview", default=None, help="also write a tonemapped PNG")
    p.add_argument("--ortho-view", action="store_true", help="view along +z instead of toward the pinhole")
    p.set_defaults(func=_cmd_render)

    p = sub.add_parser("relight", help="render under a novel point light")
    p.add_argument("--scene", required=True)
    p.add_argument("--maps", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--light", type=float, nargs=3, default=None, metavar=("X", "Y", "Z"))
    p.add_argument("--radius", type=float, default=3.0)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_relight)

    p = sub.add_parser("fit", help="gradient-descent fit to an observed image")
    p.add_argument("--scene", required=True)
    p.add_argument("--observed", required=True)
    p.add_argument("--init", required=True, help="maps.json with the starting maps")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--config", default=None, help="FitConfig overrides as JSON")
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("gridsearch-rough", help="coarse-to-fine per-pixel roughness search")
    p.add_argument("--scene", required=True)
    p.add_argument("--observed", required=True)
    p.add_argument("--maps", required=True, help="provides albedo, normals and f0")
    p.add_argument("--out", required=True)
    p.add_argument("--levels", type=int, default=3)
    p.add_argument("--samples", type=int, default=16)
    p.add_argument("--shrink", type=float, default=0.25)
    p.add_argument("--range-lo", type=float, default=0.1)
    p.add_argument("--range-hi", type=float, default=1.0)
    p.set_defaults(func=_cmd_gridsearch)

    p = sub.add_parser("dcrf-refine", help="densely connected CRF refinement")
    p.add_argument("--preset", required=True, choices=("diffuse", "normal", "roughness"))
    p.add_argument("--maps", required=True)
    p.add_argument("--image", required=True, help="observed radiance PFM")
    p.add_argument("--out", required=True)
    p.add_argument("--params", default=None, help="preset-overriding JSON file")
    p.add_argument("--grid-roughness", default=None, help="grid-search roughness PFM")
    p.set_defaults(func=_cmd_dcrf_refine)

    p = sub.add_parser("ps", help="trimmed Lambertian photometric stereo")
    p.add_argument("--manifest", required=True, help="JSON with image paths and light_dirs")
    p.add_argument("--out-normal", required=True)
    p.add_argument("--out-albedo", required=True)
    p.add_argument("--trim-high", type=int, default=5)
    p.add_argument("--trim-low", type=int, default=5)
    p.set_defaults(func=_cmd_ps)

    p = sub.add_parser("augment", help="materialize an augmentation plan")
    p.add_argument("--maps", required=True)
    p.add_argument("--plan", default=None, help="AugmentPlan JSON")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--limit", type=int, default=None, help="materialize only the first N patches")
    p.set_defaults(func=_cmd_augment)

    p = sub.add_parser("gradcheck", help="finite-difference check of the rendering gradients")
    p.add_argument("--scene", required=True)
    p.add_argument("--maps", required=True)
    p.add_argument("--pixels", type=int, default=1000)
    p.add_argument("--step", type=float, default=1e-4)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_gradcheck)

    p = sub.add_parser("loss-eval", help="loss breakdown between two map sets")
    p.add_argument("--scene", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--novel", type=int, default=0, help="number of sampled novel lights")
    p.add_argument("--radius", type=float, default=3.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--class-probs", default=None, help="comma-separated classifier output")
    p.add_argument("--label", type=int, default=0)
    p.set_defaults(func=_cmd_loss_eval)

    return parser


def cli_dispatch(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if not getattr(args, "command", None):
        parser.print_usage(sys.stderr)
        return USAGE_ERROR
    try:
        return args.func(args)
    except (OSError, ValueError, KeyError, IndexError, PfmFormatError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return DATA_ERROR


def main() -> None:
    sys.exit(cli_dispatch(sys.argv[1:]))
