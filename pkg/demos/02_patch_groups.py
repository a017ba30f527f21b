"""Patch selection walkthrough: overlap control, scoring, group assembly.

Synthesizes an image that is half flat sky and half texture, fakes four
"enhanced" variants, and shows how informativeness and enhancement-
difference filtering keep only annotation-worthy patch groups.

Run: python3 demos/02_patch_groups.py
"""

from pathlib import Path

import numpy as np

from srcurate.imgcore import save_png
from srcurate.patchsel import (
    SelectionThresholds,
    enhancement_difference,
    informativeness,
    propose_patches,
    select_groups,
)

OUT = Path(__file__).parent / "output" / "patch_groups"


def main():
    rng = np.random.default_rng(3)
    # Top half: flat sky. Bottom half: textured ground.
    img = np.full((512, 512), 0.75)
    img[256:] = rng.random((256, 512)) * 0.6 + 0.2
    save_png(OUT / "scene.png", img)

    variants = {}
    for m in (1, 2, 3, 4):
        bump = rng.normal(0.0, 0.015 * m, img.shape)
        bump[:256] *= 0.1  # enhancers barely change the flat sky
        variants[m] = np.clip(img + bump, 0, 1)

    specs = propose_patches(512, 512, size=128, want=12, seed=5)
    print(f"proposed {len(specs)} candidate patches (pairwise overlap < half area)")
    print(f"{'x':>5} {'y':>5} {'std_img':>9} {'std_hf':>9} {'max_diff':>9}")
    for spec in specs:
        patch = img[spec.y:spec.y + 128, spec.x:spec.x + 128]
        score = informativeness(patch)
        diff = max(enhancement_difference(patch,
                                          v[spec.y:spec.y + 128, spec.x:spec.x + 128])
                   for v in variants.values())
        print(f"{spec.x:>5} {spec.y:>5} {score.std_image:>9.4f} "
              f"{score.std_highfreq:>9.4f} {diff:>9.4f}")
    print()

    thresholds = SelectionThresholds(min_std_image=0.04, min_std_highfreq=0.01,
                                     min_diff=0.005)
    groups = select_groups(img, variants, thresholds, want=12, seed=5, size=128,
                           image_id="scene")
    print(f"selected {len(groups)} groups after filtering "
          f"(std_image >= {thresholds.min_std_image}, "
          f"std_highfreq >= {thresholds.min_std_highfreq}, "
          f"max diff >= {thresholds.min_diff})")
    for group in groups:
        in_sky = group.spec.y + group.spec.size <= 256
        print(f"  {group.group_id}: std={group.score.std_image:.3f} "
              f"diff={group.max_diff:.4f} {'SKY (unexpected!)' if in_sky else 'texture'}")
        save_png(OUT / f"{group.group_id}.png", group.original)
    print()
    print("Every group keeps its four variants cropped at identical coordinates;")
    print(f"patch PNGs written to {OUT}/")


if __name__ == "__main__":
    main()
