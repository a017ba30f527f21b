"""Candidate patch extraction, informativeness scoring and group assembly.

Patches are selected so that annotators only ever see regions with real
texture and a visible difference between the original and at least one
enhanced variant. All randomness is seeded.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .imgcore import as_image, laplacian_pyramid, to_luma

DEFAULT_PATCH_SIZE = 512


@dataclass(frozen=True)
class PatchSpec:
    image_id: str
    x: int
    y: int
    size: int


@dataclass(frozen=True)
class InformativenessScore:
    std_image: float
    std_highfreq: float


@dataclass
class PatchGroup:
    """One original patch plus its four enhanced variants, same crop."""

    group_id: str
    spec: PatchSpec
    original: np.ndarray
    variants: dict[int, np.ndarray]  # model id (1..4) -> patch
    score: InformativenessScore
    max_diff: float


@dataclass(frozen=True)
class SelectionThresholds:
    min_std_image: float = 0.04
    min_std_highfreq: float = 0.01
    min_diff: float = 0.005


def overlap_area(a: PatchSpec, b: PatchSpec) -> int:
    iw = min(a.x + a.size, b.x + b.size) - max(a.x, b.x)
    ih = min(a.y + a.size, b.y + b.size) - max(a.y, b.y)
    return max(0, iw) * max(0, ih)


def propose_patches(height: int, width: int, size: int = DEFAULT_PATCH_SIZE,
                    max_overlap_fraction: float = 0.5, want: int = 8,
                    seed: int = 0, image_id: str = "img",
                    max_attempts: int | None = None) -> list[PatchSpec]:
    """Seeded rejection sampling of patch positions.

    Every returned pair overlaps strictly less than
    ``max_overlap_fraction * size**2`` pixels. May return fewer than
    ``want`` when the attempt budget runs out.
    """
    if height < size or width < size:
        raise ValueError(f"image {height}x{width} smaller than patch size {size}")
    if max_attempts is None:
        max_attempts = max(64 * want, 256)
    limit = max_overlap_fraction * size * size
    rng = np.random.default_rng(seed)
    accepted: list[PatchSpec] = []
    for _ in range(max_attempts):
        if len(accepted) >= want:
            break
        x = int(rng.integers(0, width - size + 1))
        y = int(rng.integers(0, height - size + 1))
        candidate = PatchSpec(image_id=image_id, x=x, y=y, size=size)
        if all(overlap_area(candidate, other) < limit for other in accepted):
            accepted.append(candidate)
    return accepted


def crop(img: np.ndarray, spec: PatchSpec) -> np.ndarray:
    img = as_image(img)
    if spec.x < 0 or spec.y < 0 or spec.y + spec.size > img.shape[0] \
            or spec.x + spec.size > img.shape[1]:
        raise ValueError(f"patch {spec} outside image {img.shape[:2]}")
    return img[spec.y:spec.y + spec.size, spec.x:spec.x + spec.size].copy()


def informativeness(patch: np.ndarray, pyramid_levels: int = 3) -> InformativenessScore:
    """Texture richness of a patch.

    ``std_image`` is the population std of the luminance samples;
    ``std_highfreq`` pools every band-pass sample of a Laplacian pyramid
    of the luminance and takes their std.
    """
    luma = to_luma(patch)
    pyramid = laplacian_pyramid(luma, pyramid_levels)
    bands = np.concatenate([band.ravel() for band in pyramid.levels])
    return InformativenessScore(std_image=float(luma.std()),
                                std_highfreq=float(bands.std()))


def enhancement_difference(orig: np.ndarray, enhanced: np.ndarray) -> float:
    """Mean absolute per-sample difference between two same-size images."""
    orig = as_image(orig)
    enhanced = as_image(enhanced)
    if orig.shape != enhanced.shape:
        raise ValueError(f"shape mismatch: {orig.shape} vs {enhanced.shape}")
    return float(np.mean(np.abs(orig - enhanced)))


def select_groups(orig: np.ndarray, enhanced: dict[int, np.ndarray],
                  thresholds: SelectionThresholds = SelectionThresholds(),
                  want: int = 8, seed: int = 0, size: int = DEFAULT_PATCH_SIZE,
                  image_id: str = "img",
                  pyramid_levels: int = 3) -> list[PatchGroup]:
    """Propose patches, score them and keep annotation-worthy groups.

    A patch survives when both informativeness components meet their
    thresholds (inclusive) and the largest per-variant mean absolute
    difference meets ``min_diff``. All five crops share coordinates.
    """
    orig = as_image(orig)
    if sorted(enhanced) != [1, 2, 3, 4]:
        raise ValueError(f"expected variant model ids 1..4, got {sorted(enhanced)}")
    variants = {m: as_image(img, f"variant {m}") for m, img in enhanced.items()}
    for m, img in variants.items():
        if img.shape != orig.shape:
            raise ValueError(f"variant {m} shape {img.shape} != original {orig.shape}")
    specs = propose_patches(orig.shape[0], orig.shape[1], size=size, want=want,
                            seed=seed, image_id=image_id)
    groups: list[PatchGroup] = []
    for spec in specs:
        opatch = crop(orig, spec)
        score = informativeness(opatch, pyramid_levels)
        vpatches = {m: crop(v, spec) for m, v in variants.items()}
        max_diff = max(enhancement_difference(opatch, vp) for vp in vpatches.values())
        if score.std_image < thresholds.min_std_image:
            continue
        if score.std_highfreq < thresholds.min_std_highfreq:
            continue
        if max_diff < thresholds.min_diff:
            continue
        groups.append(PatchGroup(
            group_id=f"{image_id}-{spec.x}-{spec.y}",
            spec=spec,
            original=opatch,
            variants=vpatches,
            score=score,
            max_diff=max_diff,
        ))
    return groups
