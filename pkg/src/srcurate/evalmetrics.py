"""Full-reference quality metrics and multi-GT averaging.

PSNR runs over all samples; SSIM follows the standard convention
(11x11 Gaussian window, sigma 1.5, K1 = 0.01, K2 = 0.03) on luminance.
Learned metrics stay out of the core: :func:`external_metric` wraps any
executable speaking the paths-in / score-out protocol.
"""

from __future__ import annotations

import math
import subprocess
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.signal import convolve2d as _convolve2d_valid

from .imgcore import as_image, to_luma

PSNR_CAP_DB = 100.0

Metric = Callable[[np.ndarray, np.ndarray], float]


def psnr(a: np.ndarray, b: np.ndarray, peak: float = 1.0, on: str = "rgb") -> float:
    """Peak signal-to-noise ratio in dB.

    ``on="rgb"`` (default) runs over all samples; ``on="luma"``
    collapses to luminance first. Identical images report the finite
    100 dB cap instead of infinity.
    """
    a = as_image(a, "a")
    b = as_image(b, "b")
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    if on == "luma":
        a, b = to_luma(a), to_luma(b)
    elif on != "rgb":
        raise ValueError(f"on must be 'rgb' or 'luma', got {on!r}")
    mse = float(np.mean((a - b) ** 2))
    if mse == 0.0:
        return PSNR_CAP_DB
    return min(PSNR_CAP_DB, 10.0 * math.log10(peak * peak / mse))


def _gaussian_window(size: int, sigma: float) -> np.ndarray:
    half = (size - 1) / 2.0
    coords = np.arange(size) - half
    g = np.exp(-(coords ** 2) / (2.0 * sigma ** 2))
    window = np.outer(g, g)
    return window / window.sum()


def ssim(a: np.ndarray, b: np.ndarray, window: int = 11, sigma: float = 1.5,
         k1: float = 0.01, k2: float = 0.03, peak: float = 1.0) -> float:
    """Mean local structural similarity on luminance."""
    a = to_luma(as_image(a, "a"))
    b = to_luma(as_image(b, "b"))
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    if min(a.shape) < window:
        raise ValueError(f"image {a.shape} smaller than SSIM window {window}")
    win = _gaussian_window(window, sigma)
    c1 = (k1 * peak) ** 2
    c2 = (k2 * peak) ** 2
    mu_a = _convolve2d_valid(a, win, mode="valid")
    mu_b = _convolve2d_valid(b, win, mode="valid")
    var_a = _convolve2d_valid(a * a, win, mode="valid") - mu_a * mu_a
    var_b = _convolve2d_valid(b * b, win, mode="valid") - mu_b * mu_b
    cov = _convolve2d_valid(a * b, win, mode="valid") - mu_a * mu_b
    index = ((2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)) / (
        (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2)
    )
    return float(index.mean())


@dataclass(frozen=True)
class MetricScore:
    name: str
    value: float
    per_gt: list[float]


def multi_gt_score(sr: np.ndarray, gts: Sequence[np.ndarray], metric: Metric,
                   name: str = "metric") -> MetricScore:
    """Apply a metric against every GT and average the scores."""
    if len(gts) == 0:
        raise ValueError("at least one GT is required")
    per_gt = [float(metric(sr, gt)) for gt in gts]
    return MetricScore(name=name, value=float(sum(per_gt)) / len(per_gt), per_gt=per_gt)


def external_metric(command: Sequence[str]) -> Metric:
    """Adapt an external scorer process to the metric interface.

    The process receives one line ``<sr_path> <gt_path>`` on stdin and
    must print the score as a decimal number. Used for learned metrics
    that need their own runtime.
    """

    def run(sr_path, gt_path) -> float:
        result = subprocess.run(
            list(command), input=f"{sr_path} {gt_path}\n", capture_output=True,
            text=True, check=True,
        )
        return float(result.stdout.strip().splitlines()[-1])

    return run


BUILTIN_METRICS: dict[str, Metric] = {"psnr": psnr, "ssim": ssim}
