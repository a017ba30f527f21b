"""Label aggregation, campaign statistics and training-pair export.

Raw annotation records become final per-patch labels by majority vote
(three-way splits resolve to Similar). Final labels drive the export of
positive/negative LR-GT pair manifests and of the held-out test set.
"""

from __future__ import annotations

import json
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path

from .campaign import LABELS, AnnotationRecord
from .degrade import DegradationRecipe, SeverityProfile, degrade_to_lr, sample_recipe
from .imgcore import load_image, save_png
from .seeding import derive_seed, spawn_rng

EXPORT_MODES = ("positive_only", "positive_and_negative")


@dataclass(frozen=True)
class FinalLabel:
    group_id: str
    variant_id: int
    label: str
    n_pos: int
    n_sim: int
    n_neg: int


def final_label(votes: list[str]) -> str:
    """Majority of exactly three votes; a 1/1/1 split is Similar."""
    if len(votes) != 3:
        raise ValueError(f"expected exactly 3 votes, got {len(votes)}")
    for v in votes:
        if v not in LABELS:
            raise ValueError(f"invalid label: {v!r}")
    counts = Counter(votes)
    label, top = counts.most_common(1)[0]
    return label if top >= 2 else "Similar"


def finalize(records: list[AnnotationRecord],
             allow_partial: bool = False) -> dict[tuple[str, int], FinalLabel]:
    """Reduce records to one final label per (group, variant)."""
    votes: dict[tuple[str, int], list[str]] = defaultdict(list)
    for rec in records:
        votes[(rec.group_id, rec.variant_id)].append(rec.label)
    finals = {}
    for (gid, vid), vs in votes.items():
        if len(vs) != 3:
            if allow_partial:
                continue
            raise ValueError(
                f"group {gid} variant {vid} has {len(vs)} votes; campaign incomplete"
            )
        counts = Counter(vs)
        finals[(gid, vid)] = FinalLabel(
            group_id=gid, variant_id=vid, label=final_label(vs),
            n_pos=counts["Positive"], n_sim=counts["Similar"], n_neg=counts["Negative"],
        )
    return finals


@dataclass
class CampaignReport:
    """Distribution tables over raw annotations and final labels."""

    annotation_counts: dict[str, dict[int, int]]   # label -> model -> raw votes
    final_counts: dict[str, dict[int, int]]        # label -> model -> final labels
    positive_histogram: dict[int, int]             # positives per group -> group count
    total_records: int
    total_patches: int
    total_groups: int
    mean_elapsed_ms: float
    model_ids: list[int] = field(default_factory=list)

    def annotation_total(self, label: str) -> int:
        return sum(self.annotation_counts[label].values())

    def final_total(self, label: str) -> int:
        return sum(self.final_counts[label].values())

    def total_positive_finals(self) -> int:
        return sum(k * n for k, n in self.positive_histogram.items())

    def to_obj(self) -> dict:
        return {
            "annotation_counts": {l: dict(sorted(m.items())) for l, m in self.annotation_counts.items()},
            "final_counts": {l: dict(sorted(m.items())) for l, m in self.final_counts.items()},
            "positive_histogram": dict(sorted(self.positive_histogram.items())),
            "total_records": self.total_records,
            "total_patches": self.total_patches,
            "total_groups": self.total_groups,
            "mean_elapsed_ms": self.mean_elapsed_ms,
            "model_ids": self.model_ids,
        }

    def to_rows(self) -> list[dict]:
        """Line-delimited form: one record per table cell plus a summary."""
        rows: list[dict] = []
        for label in LABELS:
            for m in self.model_ids:
                rows.append({"kind": "annotation_counts", "label": label,
                             "model": m, "count": self.annotation_counts[label][m]})
        for label in LABELS:
            for m in self.model_ids:
                rows.append({"kind": "final_counts", "label": label,
                             "model": m, "count": self.final_counts[label][m]})
        for k in sorted(self.positive_histogram):
            rows.append({"kind": "positive_histogram", "positives": k,
                         "groups": self.positive_histogram[k]})
        rows.append({"kind": "summary", "total_records": self.total_records,
                     "total_patches": self.total_patches,
                     "total_groups": self.total_groups,
                     "mean_elapsed_ms": self.mean_elapsed_ms})
        return rows

    def render_text(self) -> str:
        lines = []
        models = self.model_ids
        header = "label".ljust(10) + "".join(f"model {m}".rjust(10) for m in models) + "total".rjust(12)
        lines.append("Raw annotation distribution")
        lines.append(header)
        for label in LABELS:
            row = self.annotation_counts[label]
            lines.append(label.ljust(10)
                         + "".join(str(row.get(m, 0)).rjust(10) for m in models)
                         + str(self.annotation_total(label)).rjust(12))
        lines.append("total".ljust(10)
                     + "".join(str(sum(self.annotation_counts[l].get(m, 0) for l in LABELS)).rjust(10)
                               for m in models)
                     + str(self.total_records).rjust(12))
        lines.append("")
        lines.append("Final label distribution")
        lines.append(header)
        for label in LABELS:
            row = self.final_counts[label]
            lines.append(label.ljust(10)
                         + "".join(str(row.get(m, 0)).rjust(10) for m in models)
                         + str(self.final_total(label)).rjust(12))
        lines.append("")
        lines.append("Positive finals per group")
        lines.append("".join(str(k).rjust(8) for k in sorted(self.positive_histogram)))
        lines.append("".join(str(self.positive_histogram[k]).rjust(8)
                             for k in sorted(self.positive_histogram)))
        lines.append("")
        lines.append(f"groups: {self.total_groups}  patches: {self.total_patches}  "
                     f"records: {self.total_records}")
        lines.append(f"mean annotation time per group: {self.mean_elapsed_ms / 1000.0:.2f}s")
        return "\n".join(lines)


def build_reports(records: list[AnnotationRecord],
                  allow_partial: bool = False) -> CampaignReport:
    """Aggregate raw records into the campaign statistics tables."""
    model_ids = sorted({rec.variant_id for rec in records})
    annotation_counts = {label: {m: 0 for m in model_ids} for label in LABELS}
    for rec in records:
        annotation_counts[rec.label][rec.variant_id] += 1
    finals = finalize(records, allow_partial=allow_partial)
    final_counts = {label: {m: 0 for m in model_ids} for label in LABELS}
    positives_per_group: dict[str, int] = defaultdict(int)
    group_ids = set()
    for fl in finals.values():
        final_counts[fl.label][fl.variant_id] += 1
        group_ids.add(fl.group_id)
        if fl.label == "Positive":
            positives_per_group[fl.group_id] += 1
    histogram = {k: 0 for k in range(len(model_ids) + 1)}
    for gid in group_ids:
        histogram[positives_per_group.get(gid, 0)] += 1
    elapsed = []
    seen = set()
    for rec in records:
        key = (rec.annotator_id, rec.group_id)
        if key not in seen:
            seen.add(key)
            elapsed.append(rec.elapsed_ms)
    mean_elapsed = float(sum(elapsed)) / len(elapsed) if elapsed else 0.0
    return CampaignReport(
        annotation_counts=annotation_counts,
        final_counts=final_counts,
        positive_histogram=histogram,
        total_records=len(records),
        total_patches=len(finals),
        total_groups=len(group_ids),
        mean_elapsed_ms=mean_elapsed,
        model_ids=model_ids,
    )


# ---------------------------------------------------------------------------
# Training pair and test set export
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PairEntry:
    group_id: str
    variant_id: int
    polarity: str  # positive | negative
    lr_path: str
    gt_path: str
    hr_path: str
    recipe: DegradationRecipe

    def to_obj(self) -> dict:
        return {
            "group_id": self.group_id,
            "gt_path": self.gt_path,
            "hr_path": self.hr_path,
            "lr_path": self.lr_path,
            "polarity": self.polarity,
            "recipe": self.recipe.to_dict(),
            "variant_id": self.variant_id,
        }


def _group_finals(finals: dict[tuple[str, int], FinalLabel]) -> dict[str, dict[int, str]]:
    per_group: dict[str, dict[int, str]] = defaultdict(dict)
    for (gid, vid), fl in finals.items():
        per_group[gid][vid] = fl.label
    return per_group


def _generate_lr(group: dict, profile: SeverityProfile, seed: int, lr_dir: Path,
                 base_dir: Path, sr_scale: int) -> tuple[str, DegradationRecipe]:
    gid = group["group_id"]
    hr_path = base_dir / group["original_path"]
    if not hr_path.exists():
        raise FileNotFoundError(f"missing original patch for group {gid}: {hr_path}")
    recipe = sample_recipe(profile, derive_seed(seed, "lr", gid))
    lr = degrade_to_lr(load_image(hr_path), recipe, sr_scale=sr_scale)
    lr_path = lr_dir / f"{gid}.png"
    save_png(lr_path, lr)
    return str(lr_path), recipe


def export_pairs(groups: list[dict], finals: dict[tuple[str, int], FinalLabel],
                 profile: SeverityProfile, mode: str, seed: int,
                 lr_dir: str | Path, base_dir: str | Path = ".",
                 sr_scale: int = 4) -> list[PairEntry]:
    """Emit LR-GT training pairs according to the final labels.

    ``positive_only`` keeps groups with at least one Positive variant and
    exports only positive pairs; ``positive_and_negative`` keeps groups
    with at least one Positive or Negative variant and exports both
    polarities. Similar variants are never exported. One LR image is
    generated per exported group with a per-group recipe.
    """
    if mode not in EXPORT_MODES:
        raise ValueError(f"mode must be one of {EXPORT_MODES}, got {mode!r}")
    lr_dir = Path(lr_dir)
    base_dir = Path(base_dir)
    per_group = _group_finals(finals)
    entries: list[PairEntry] = []
    for group in groups:
        gid = group["group_id"]
        labels = per_group.get(gid, {})
        n_pos = sum(1 for v in labels.values() if v == "Positive")
        n_neg = sum(1 for v in labels.values() if v == "Negative")
        if mode == "positive_only" and n_pos == 0:
            continue
        if mode == "positive_and_negative" and n_pos == 0 and n_neg == 0:
            continue
        lr_path, recipe = _generate_lr(group, profile, seed, lr_dir, base_dir, sr_scale)
        hr_path = str(base_dir / group["original_path"])
        variant_paths = {int(v["model_id"]): str(base_dir / v["path"])
                         for v in group["variants"]}
        for vid in sorted(labels):
            label = labels[vid]
            if label == "Positive":
                polarity = "positive"
            elif label == "Negative" and mode == "positive_and_negative":
                polarity = "negative"
            else:
                continue
            entries.append(PairEntry(
                group_id=gid, variant_id=vid, polarity=polarity,
                lr_path=lr_path, gt_path=variant_paths[vid], hr_path=hr_path,
                recipe=recipe,
            ))
    return entries


@dataclass(frozen=True)
class TestItem:
    item_id: str
    group_id: str
    lr_path: str
    hr_path: str
    positive_gt_paths: list[str]
    recipe: DegradationRecipe

    def to_obj(self) -> dict:
        return {
            "group_id": self.group_id,
            "hr_path": self.hr_path,
            "item_id": self.item_id,
            "lr_path": self.lr_path,
            "positive_gt_paths": list(self.positive_gt_paths),
            "recipe": self.recipe.to_dict(),
        }


def build_testset(groups: list[dict], finals: dict[tuple[str, int], FinalLabel],
                  profile: SeverityProfile, seed: int, lr_dir: str | Path,
                  base_dir: str | Path = ".", min_positive: int = 2,
                  count: int = 100, sr_scale: int = 4) -> list[TestItem]:
    """Seeded sample of groups with at least ``min_positive`` Positive GTs.

    Each item carries the degraded LR input plus every positive GT of
    its group.
    """
    lr_dir = Path(lr_dir)
    base_dir = Path(base_dir)
    per_group = _group_finals(finals)
    group_by_id = {g["group_id"]: g for g in groups}
    qualifying = sorted(
        gid for gid, labels in per_group.items()
        if sum(1 for v in labels.values() if v == "Positive") >= min_positive
        and gid in group_by_id
    )
    if len(qualifying) < count:
        raise ValueError(
            f"only {len(qualifying)} groups have >= {min_positive} positive GTs; "
            f"cannot build a {count}-item test set"
        )
    rng = spawn_rng(seed, "testset")
    chosen = sorted(rng.choice(len(qualifying), size=count, replace=False).tolist())
    items: list[TestItem] = []
    for idx, qi in enumerate(chosen):
        gid = qualifying[qi]
        group = group_by_id[gid]
        lr_path, recipe = _generate_lr(group, profile, seed, lr_dir, base_dir, sr_scale)
        positives = [
            str(base_dir / v["path"]) for v in group["variants"]
            if per_group[gid].get(int(v["model_id"])) == "Positive"
        ]
        items.append(TestItem(
            item_id=f"t{idx:04d}", group_id=gid, lr_path=lr_path,
            hr_path=str(base_dir / group["original_path"]),
            positive_gt_paths=positives, recipe=recipe,
        ))
    return items


def write_jsonl(path, objs) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        for obj in objs:
            fh.write(json.dumps(obj, sort_keys=True) + "\n")


def read_jsonl(path) -> list[dict]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(json.loads(line))
    return out
