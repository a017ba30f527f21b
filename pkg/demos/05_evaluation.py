"""Evaluation walkthrough: PSNR/SSIM with multi-GT averaging.

A test item carries one LR input and every positive GT of its group;
an SR output is scored against each GT separately and the scores are
averaged. Shown here with two mock "reconstructions" of different
quality.

Run: python3 demos/05_evaluation.py
"""

import numpy as np

from srcurate.evalmetrics import multi_gt_score, psnr, ssim
from srcurate.imgcore import clamp01


def main():
    rng = np.random.default_rng(23)
    base = rng.random((64, 64))

    # Three positive GTs of one group: same content, slightly different
    # enhancement character.
    gts = [clamp01(base + rng.normal(0, s, base.shape)) for s in (0.01, 0.02, 0.03)]

    sharp = clamp01(base + rng.normal(0, 0.02, base.shape))   # decent output
    blurry = clamp01(0.5 * base + 0.25)                       # washed out

    print("single-GT scores (against the first GT only):")
    print(f"  decent: psnr {psnr(sharp, gts[0]):.2f} dB, ssim {ssim(sharp, gts[0]):.4f}")
    print(f"  washed: psnr {psnr(blurry, gts[0]):.2f} dB, ssim {ssim(blurry, gts[0]):.4f}")
    print()

    for name, output in (("decent", sharp), ("washed", blurry)):
        p = multi_gt_score(output, gts, psnr, name="psnr")
        s = multi_gt_score(output, gts, ssim, name="ssim")
        per = ", ".join(f"{v:.2f}" for v in p.per_gt)
        print(f"{name}: psnr per-GT [{per}] -> mean {p.value:.2f} dB, "
              f"ssim mean {s.value:.4f}")
    print()
    print("the mean over all positive GTs is the reported score for a test item")


if __name__ == "__main__":
    main()
