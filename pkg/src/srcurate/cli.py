"""Command-line entry point exposing the whole pipeline.

Every subcommand is seed-controlled and reproducible: the same flags
produce byte-identical manifests, logs and images (timestamps live in
dedicated record fields so determinism diffs can mask them).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import aggregate as agg
from . import degrade as deg
from . import losskernel, patchsel, simulate
from .campaign import CampaignError, read_records
from .config import PipelineConfig, load_pipeline_config
from .evalmetrics import BUILTIN_METRICS, multi_gt_score
from .imgcore import load_image, save_png
from .seeding import derive_seed

IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg")


def _list_images(directory: Path) -> list[Path]:
    files = sorted(p for p in directory.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES)
    if not files:
        raise FileNotFoundError(f"no images found in {directory}")
    return files


def _load_config(args) -> PipelineConfig:
    if getattr(args, "config", None):
        return load_pipeline_config(args.config)
    return PipelineConfig()


def _pick(flag, config_value):
    return config_value if flag is None else flag


def cmd_degrade(args) -> int:
    config = _load_config(args)
    profile = deg.load_profile(_pick(args.profile, config.profile))
    seed = _pick(args.seed, config.campaign.seed)
    in_dir = Path(args.in_dir)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    for src in _list_images(in_dir):
        img = load_image(src)
        recipe = deg.sample_recipe(profile, derive_seed(seed, src.name))
        if args.scale > 1:
            lq = deg.degrade_to_lr(img, recipe, sr_scale=args.scale)
        else:
            lq = deg.degrade(img, recipe)
        if args.back_resize:
            lq = deg.upsample_back(lq, img.shape[0], img.shape[1])
        dst = out_dir / f"{src.stem}.png"
        save_png(dst, lq)
        rows.append({"source": str(src), "output": str(dst), "recipe": recipe.to_dict()})
    agg.write_jsonl(args.manifest, rows)
    print(f"degraded {len(rows)} images -> {out_dir}")
    return 0


def cmd_make_groups(args) -> int:
    config = _load_config(args)
    seed = _pick(args.seed, config.campaign.seed)
    thresholds = patchsel.SelectionThresholds(
        min_std_image=_pick(args.min_std_image, config.thresholds.min_std_image),
        min_std_highfreq=_pick(args.min_std_highfreq, config.thresholds.min_std_highfreq),
        min_diff=_pick(args.min_diff, config.thresholds.min_diff),
    )
    orig_dir = Path(args.orig)
    enhanced_dirs = [Path(d) for d in args.enhanced]
    out_dir = Path(args.out)
    manifest_path = Path(args.manifest)
    rows = []
    n_groups = 0
    for src in _list_images(orig_dir):
        orig = load_image(src)
        enhanced = {}
        for model_id, directory in enumerate(enhanced_dirs, start=1):
            variant_path = directory / src.name
            if not variant_path.exists():
                raise FileNotFoundError(f"missing enhanced variant: {variant_path}")
            enhanced[model_id] = load_image(variant_path)
        groups = patchsel.select_groups(
            orig, enhanced, thresholds=thresholds, want=args.want,
            seed=derive_seed(seed, src.stem), size=args.size, image_id=src.stem,
        )
        for group in groups:
            gdir = out_dir / group.group_id
            save_png(gdir / "orig.png", group.original)
            variants = []
            for model_id in sorted(group.variants):
                save_png(gdir / f"m{model_id}.png", group.variants[model_id])
                rel = (gdir / f"m{model_id}.png").relative_to(manifest_path.parent)
                variants.append({"model_id": model_id, "path": str(rel)})
            rows.append({
                "group_id": group.group_id,
                "source": str(src),
                "x": group.spec.x,
                "y": group.spec.y,
                "size": group.spec.size,
                "original_path": str((gdir / "orig.png").relative_to(manifest_path.parent)),
                "variants": variants,
                "scores": {
                    "std_image": group.score.std_image,
                    "std_highfreq": group.score.std_highfreq,
                    "max_diff": group.max_diff,
                },
            })
            n_groups += 1
    agg.write_jsonl(manifest_path, rows)
    print(f"selected {n_groups} groups -> {manifest_path}")
    return 0


def cmd_serve_annotation(args) -> int:
    import uvicorn

    from .service import create_app, load_campaign

    campaign, patch_files = load_campaign(args.config)
    app = create_app(campaign, patch_files, ui_dir=args.ui_dir)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def cmd_simulate_campaign(args) -> int:
    if args.policy == "all-positive":
        policy = simulate.constant_policy("Positive")
    else:
        policy = simulate.random_policy()
    if args.manifest:
        from .campaign import GroupEntry

        groups = [
            GroupEntry(
                group_id=row["group_id"],
                original_ref=f"{row['group_id']}/orig",
                variant_refs={int(v["model_id"]): f"{row['group_id']}/m{v['model_id']}"
                              for v in row["variants"]},
            )
            for row in agg.read_jsonl(args.manifest)
        ]
    elif args.groups is not None:
        groups = args.groups
    else:
        raise ValueError("simulate-campaign needs --groups or --manifest")
    out = Path(args.out)
    if out.exists():
        out.unlink()
    records, campaign = simulate.simulate_campaign(
        groups, args.annotators, policy, seed=args.seed, log_path=out,
    )
    n_groups = groups if isinstance(groups, int) else len(groups)
    print(f"simulated {n_groups} groups x {args.annotators} annotators: "
          f"{len(records)} records -> {out}")
    return 0


def cmd_aggregate(args) -> int:
    records = read_records(args.records)
    report = agg.build_reports(records, allow_partial=args.allow_partial)
    agg.write_jsonl(args.report, report.to_rows())
    print(report.render_text())
    return 0


def cmd_export_pairs(args) -> int:
    config = _load_config(args)
    profile = deg.load_profile(_pick(args.profile, config.profile))
    mode = {"pos": "positive_only", "posneg": "positive_and_negative"}[args.mode]
    groups = agg.read_jsonl(args.groups)
    finals = agg.finalize(read_records(args.records))
    entries = agg.export_pairs(
        groups, finals, profile, mode=mode, seed=args.seed,
        lr_dir=args.lr_dir, base_dir=Path(args.groups).parent,
    )
    agg.write_jsonl(args.out, [e.to_obj() for e in entries])
    n_pos = sum(1 for e in entries if e.polarity == "positive")
    print(f"exported {n_pos} positive and {len(entries) - n_pos} negative pairs -> {args.out}")
    return 0


def cmd_build_testset(args) -> int:
    config = _load_config(args)
    profile = deg.load_profile(_pick(args.profile, config.profile))
    groups = agg.read_jsonl(args.groups)
    finals = agg.finalize(read_records(args.records))
    items = agg.build_testset(
        groups, finals, profile, seed=args.seed, lr_dir=args.lr_dir,
        base_dir=Path(args.groups).parent, min_positive=args.min_positive,
        count=args.count,
    )
    agg.write_jsonl(args.out, [item.to_obj() for item in items])
    print(f"built test set with {len(items)} items -> {args.out}")
    return 0


def cmd_loss_check(args) -> int:
    config = _load_config(args)
    a = _pick(args.a, config.exponent_a)
    if args.weights is not None:
        parts = [float(x) for x in args.weights.split(",")]
        if len(parts) != 4:
            raise ValueError("--weights expects alpha,beta,gamma,delta")
        weights = losskernel.LossWeights(*parts)
    else:
        weights = config.loss_weights
    i_pos = load_image(args.pos)
    i_neg = load_image(args.neg)
    i_hr = load_image(args.hr)
    i_sr = load_image(args.sr)
    m_pos = losskernel.residual_variance_map(i_pos, i_hr, a)
    m_neg = losskernel.residual_variance_map(i_neg, i_hr, a)
    m_ind = losskernel.indication_map(m_neg, m_pos)
    l1 = losskernel.l1_loss(i_sr, i_pos)
    neg = losskernel.negative_loss(i_neg, i_sr, m_ind)
    breakdown = losskernel.total_loss(l1.value, 0.0, 0.0, neg.value, weights)
    if args.dump:
        dump = Path(args.dump)
        for name, values in (("m_pos", m_pos.values), ("m_neg", m_neg.values),
                             ("m_ind", m_ind.values)):
            peak = values.max()
            save_png(dump / f"{name}.png", values / peak if peak > 0 else values)
    print(json.dumps({
        "l1": breakdown.l1,
        "perceptual": breakdown.perceptual,
        "adversarial": breakdown.adversarial,
        "negative": breakdown.negative,
        "total": breakdown.total,
    }, sort_keys=True, indent=2))
    return 0


def cmd_eval(args) -> int:
    items = agg.read_jsonl(args.testset)
    metric_names = [m.strip() for m in args.metrics.split(",") if m.strip()]
    for name in metric_names:
        if name not in BUILTIN_METRICS:
            raise ValueError(f"unknown metric {name!r}; available: {sorted(BUILTIN_METRICS)}")
    sr_dir = Path(args.sr)
    rows = []
    means: dict[str, list[float]] = {name: [] for name in metric_names}
    for item in items:
        sr_path = sr_dir / f"{item['item_id']}.png"
        sr = load_image(sr_path)
        gts = [load_image(p) for p in item["positive_gt_paths"]]
        scores = {}
        for name in metric_names:
            score = multi_gt_score(sr, gts, BUILTIN_METRICS[name], name=name)
            scores[name] = {"mean": score.value, "per_gt": score.per_gt}
            means[name].append(score.value)
        rows.append({"item_id": item["item_id"], "group_id": item["group_id"],
                     "scores": scores})
    agg.write_jsonl(args.report, rows)
    for name in metric_names:
        overall = sum(means[name]) / len(means[name]) if means[name] else float("nan")
        print(f"{name}: {overall:.4f} over {len(means[name])} items")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="srcurate",
        description="Ground-truth curation pipeline for realistic super-resolution training data.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("degrade", help="degrade HR images into LR counterparts")
    p.add_argument("--profile", default=None, help="severity profile name or JSON path")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--scale", type=int, default=4,
                   help="SR factor; 1 keeps the recipe's sampled scale")
    p.add_argument("--in", dest="in_dir", required=True)
    p.add_argument("--out", dest="out_dir", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--back-resize", action="store_true",
                   help="bicubic-upsample outputs back to source dims")
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_degrade)

    p = sub.add_parser("make-groups", help="extract and score annotation patch groups")
    p.add_argument("--orig", required=True)
    p.add_argument("--enhanced", nargs=4, required=True, metavar="DIR")
    p.add_argument("--out", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--size", type=int, default=patchsel.DEFAULT_PATCH_SIZE)
    p.add_argument("--want", type=int, default=8, help="patch candidates per image")
    p.add_argument("--min-std-image", type=float, default=None)
    p.add_argument("--min-std-highfreq", type=float, default=None)
    p.add_argument("--min-diff", type=float, default=None)
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_make_groups)

    p = sub.add_parser("serve-annotation", help="run the annotation HTTP service")
    p.add_argument("--config", required=True, help="campaign config JSON")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8700)
    p.add_argument("--ui-dir", default=None, help="serve a built web client from /ui")
    p.set_defaults(func=cmd_serve_annotation)

    p = sub.add_parser("simulate-campaign", help="run a scripted campaign end to end")
    p.add_argument("--groups", type=int, default=None, help="synthetic group count")
    p.add_argument("--manifest", default=None, help="simulate over a real groups manifest")
    p.add_argument("--annotators", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--policy", choices=("random", "all-positive"), default="random")
    p.add_argument("--out", default="records.jsonl")
    p.set_defaults(func=cmd_simulate_campaign)

    p = sub.add_parser("aggregate", help="aggregate records into reports")
    p.add_argument("--records", required=True)
    p.add_argument("--report", required=True)
    p.add_argument("--allow-partial", action="store_true")
    p.set_defaults(func=cmd_aggregate)

    p = sub.add_parser("export-pairs", help="export LR-GT training pair manifests")
    p.add_argument("--groups", required=True, help="groups manifest JSONL")
    p.add_argument("--records", required=True)
    p.add_argument("--mode", choices=("pos", "posneg"), required=True)
    p.add_argument("--profile", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--lr-dir", required=True)
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_export_pairs)

    p = sub.add_parser("build-testset", help="sample a multi-GT evaluation set")
    p.add_argument("--groups", required=True)
    p.add_argument("--records", required=True)
    p.add_argument("--profile", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--min-positive", type=int, default=2)
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--out", required=True)
    p.add_argument("--lr-dir", required=True)
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_build_testset)

    p = sub.add_parser("loss-check", help="compute gating maps and the loss breakdown")
    p.add_argument("--pos", required=True)
    p.add_argument("--neg", required=True)
    p.add_argument("--hr", required=True)
    p.add_argument("--sr", required=True)
    p.add_argument("--a", type=float, default=None)
    p.add_argument("--weights", default=None, help="alpha,beta,gamma,delta")
    p.add_argument("--dump", default=None, help="directory for normalized map PNGs")
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_loss_check)

    p = sub.add_parser("eval", help="score SR outputs against multi-GT test items")
    p.add_argument("--testset", required=True)
    p.add_argument("--sr", required=True, help="directory with <item_id>.png outputs")
    p.add_argument("--metrics", default="psnr,ssim")
    p.add_argument("--report", required=True)
    p.set_defaults(func=cmd_eval)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (CampaignError, ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
