"""Core image primitives shared by the dataset pipeline.

Images are numpy ``float64`` arrays with samples in ``[0, 1]``:
shape ``(h, w)`` for single-channel images and ``(h, w, 3)`` for RGB
(row-major, channel-interleaved, the numpy default). 8-bit I/O converts
with ``value / 255`` on read and ``round(value * 255)`` (ties to even)
on write.

All operations here are pure functions of their inputs and safe to call
concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import cv2
import numpy as np
from scipy import ndimage

__all__ = [
    "LUMA_WEIGHTS",
    "LaplacianPyramid",
    "clamp01",
    "convolve2d",
    "from_uint8",
    "laplacian_pyramid",
    "load_image",
    "local_variance_map",
    "reconstruct_pyramid",
    "resize",
    "save_png",
    "to_luma",
    "to_uint8",
]

LUMA_WEIGHTS = (0.299, 0.587, 0.114)

# Classic binomial smoothing tap for pyramid construction: outer product
# of [1, 4, 6, 4, 1] / 16 gives the 5x5 kernel (sums to 1 exactly).
PYRAMID_TAP = np.array([1.0, 4.0, 6.0, 4.0, 1.0]) / 16.0

_BORDER_TO_NDIMAGE = {"replicate": "nearest", "reflect": "reflect"}


def as_image(a, name: str = "image") -> np.ndarray:
    """Validate and return ``a`` as a float64 image array.

    Accepts ``(h, w)`` or ``(h, w, 3)`` arrays. Raises ``ValueError`` for
    anything else. Does not check the [0, 1] range; that is enforced by
    the operations that declare clamping and by the 8-bit converters.
    """
    arr = np.asarray(a, dtype=np.float64)
    if arr.ndim == 2:
        h, w = arr.shape
    elif arr.ndim == 3 and arr.shape[2] == 3:
        h, w = arr.shape[:2]
    else:
        raise ValueError(f"{name} must have shape (h, w) or (h, w, 3), got {arr.shape}")
    if h < 1 or w < 1:
        raise ValueError(f"{name} must be at least 1x1, got {arr.shape}")
    return arr


def channel_count(img: np.ndarray) -> int:
    return 1 if img.ndim == 2 else img.shape[2]


def clamp01(img: np.ndarray) -> np.ndarray:
    return np.clip(img, 0.0, 1.0)


def to_uint8(img: np.ndarray) -> np.ndarray:
    """Quantize a [0, 1] image to uint8 (round half to even)."""
    return np.rint(clamp01(img) * 255.0).astype(np.uint8)


def from_uint8(img: np.ndarray) -> np.ndarray:
    return np.asarray(img, dtype=np.float64) / 255.0


def load_image(path) -> np.ndarray:
    """Read a PNG or JPEG file into a [0, 1] image (RGB or grayscale)."""
    raw = cv2.imread(str(path), cv2.IMREAD_UNCHANGED)
    if raw is None:
        raise FileNotFoundError(f"cannot read image: {path}")
    if raw.ndim == 3:
        if raw.shape[2] == 4:
            raw = cv2.cvtColor(raw, cv2.COLOR_BGRA2BGR)
        raw = cv2.cvtColor(raw, cv2.COLOR_BGR2RGB)
    if raw.dtype != np.uint8:
        raise ValueError(f"only 8-bit images are supported, got {raw.dtype}: {path}")
    return from_uint8(raw)


def save_png(path, img: np.ndarray) -> None:
    """Write a [0, 1] image as an 8-bit PNG."""
    img = as_image(img)
    u8 = to_uint8(img)
    if u8.ndim == 3:
        u8 = cv2.cvtColor(u8, cv2.COLOR_RGB2BGR)
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    if not cv2.imwrite(str(path), u8):
        raise OSError(f"failed to write PNG: {path}")


def to_luma(img: np.ndarray) -> np.ndarray:
    """Collapse an image to a single luminance channel.

    3-channel input uses the fixed 0.299 / 0.587 / 0.114 weights;
    single-channel input is returned as a copy.
    """
    img = as_image(img)
    if img.ndim == 2:
        return img.copy()
    r, g, b = LUMA_WEIGHTS
    return r * img[:, :, 0] + g * img[:, :, 1] + b * img[:, :, 2]


def convolve2d(img: np.ndarray, kernel: np.ndarray, border: str = "replicate") -> np.ndarray:
    """Per-channel 2D convolution (kernel flipped), same output size.

    ``border`` is one of ``replicate`` or ``reflect``. The kernel must be
    square with odd side length no larger than the image.
    """
    img = as_image(img)
    kernel = np.asarray(kernel, dtype=np.float64)
    if kernel.ndim != 2 or kernel.shape[0] != kernel.shape[1]:
        raise ValueError(f"kernel must be square, got {kernel.shape}")
    if kernel.shape[0] % 2 == 0:
        raise ValueError(f"kernel side must be odd, got {kernel.shape[0]}")
    if kernel.shape[0] > min(img.shape[0], img.shape[1]):
        raise ValueError(f"kernel {kernel.shape[0]} larger than image {img.shape[:2]}")
    try:
        mode = _BORDER_TO_NDIMAGE[border]
    except KeyError:
        raise ValueError(f"unknown border policy: {border!r}") from None
    if img.ndim == 2:
        return ndimage.convolve(img, kernel, mode=mode)
    return np.stack(
        [ndimage.convolve(img[:, :, c], kernel, mode=mode) for c in range(img.shape[2])],
        axis=2,
    )


# ---------------------------------------------------------------------------
# Resampling
# ---------------------------------------------------------------------------

_FILTER_SUPPORT = {"nearest": 0.5, "bilinear": 1.0, "bicubic": 2.0}


def _filter_taps(name: str, x: np.ndarray) -> np.ndarray:
    ax = np.abs(x)
    if name == "nearest":
        # Half-open interval: ties go to the higher source index.
        return ((x >= -0.5) & (x < 0.5)).astype(np.float64)
    if name == "bilinear":
        return np.maximum(0.0, 1.0 - ax)
    if name == "bicubic":
        # Keys cubic, a = -0.5.
        a = -0.5
        ax2 = ax * ax
        ax3 = ax2 * ax
        near = (a + 2.0) * ax3 - (a + 3.0) * ax2 + 1.0
        far = a * ax3 - 5.0 * a * ax2 + 8.0 * a * ax - 4.0 * a
        return np.where(ax <= 1.0, near, np.where(ax < 2.0, far, 0.0))
    raise ValueError(f"unknown filter: {name!r}")


def _resample_matrix(n_src: int, n_dst: int, filt: str) -> np.ndarray:
    """Dense (n_dst, n_src) row-stochastic resampling matrix.

    Half-pixel-center coordinate mapping with replicate border. When
    shrinking, bilinear/bicubic kernels are widened by the scale factor
    (antialiasing); nearest never is.
    """
    scale = n_dst / n_src
    support = _FILTER_SUPPORT[filt]
    kscale = scale if (scale < 1.0 and filt != "nearest") else 1.0
    width = support / kscale
    centers = (np.arange(n_dst) + 0.5) / scale - 0.5
    first = np.floor(centers - width).astype(int) + 1
    ntaps = int(np.ceil(2.0 * width)) + 2
    idx = first[:, None] + np.arange(ntaps)[None, :]
    w = _filter_taps(filt, (centers[:, None] - idx) * kscale)
    w /= w.sum(axis=1, keepdims=True)
    idx = np.clip(idx, 0, n_src - 1)
    mat = np.zeros((n_dst, n_src))
    np.add.at(mat, (np.repeat(np.arange(n_dst), ntaps), idx.ravel()), w.ravel())
    return mat


def _resample(img: np.ndarray, target_h: int, target_w: int, filt: str) -> np.ndarray:
    """Unclamped separable resampling; values may leave [0, 1]."""
    h, w = img.shape[:2]
    if (target_h, target_w) == (h, w):
        return img.copy()
    mat_r = _resample_matrix(h, target_h, filt)
    mat_c = _resample_matrix(w, target_w, filt)
    if img.ndim == 2:
        return mat_r @ img @ mat_c.T
    return np.stack([mat_r @ img[:, :, c] @ mat_c.T for c in range(img.shape[2])], axis=2)


def resize(img: np.ndarray, target_h: int, target_w: int, filter: str = "bicubic") -> np.ndarray:
    """Resample to (target_h, target_w) and clamp to [0, 1].

    Filters: ``nearest``, ``bilinear``, ``bicubic`` (Keys a = -0.5).
    Bicubic may overshoot before the clamp. Resizing to the current
    dimensions returns a bit-identical copy for every filter.
    """
    img = as_image(img)
    if filter not in _FILTER_SUPPORT:
        raise ValueError(f"unknown filter: {filter!r}")
    if target_h < 1 or target_w < 1:
        raise ValueError(f"target dims must be >= 1, got {target_h}x{target_w}")
    if (target_h, target_w) == img.shape[:2]:
        return img.copy()
    return clamp01(_resample(img, target_h, target_w, filter))


# ---------------------------------------------------------------------------
# Laplacian pyramid
# ---------------------------------------------------------------------------


@dataclass
class LaplacianPyramid:
    """Band-pass levels (finest first) plus the low-pass residual."""

    levels: list[np.ndarray]
    residual: np.ndarray


def _pyr_down(img: np.ndarray) -> np.ndarray:
    kernel = np.outer(PYRAMID_TAP, PYRAMID_TAP)
    return convolve2d(img, kernel, border="replicate")[::2, ::2]


def _pyr_up(img: np.ndarray, target_h: int, target_w: int) -> np.ndarray:
    # Unclamped: band-pass images are legitimately signed.
    return _resample(img, target_h, target_w, "bilinear")


def laplacian_pyramid(img: np.ndarray, levels: int) -> LaplacianPyramid:
    """Decompose into ``levels`` band-pass images plus a residual.

    Each step blurs with the 5x5 binomial kernel, subsamples by 2
    (ceiling division on odd dims), upsamples back bilinearly and
    subtracts. ``reconstruct_pyramid`` inverts the decomposition exactly
    up to floating-point round-off.
    """
    img = as_image(img)
    if levels < 1:
        raise ValueError(f"levels must be >= 1, got {levels}")
    if min(img.shape[0], img.shape[1]) < 2 ** levels:
        raise ValueError(
            f"image {img.shape[:2]} too small for {levels} pyramid levels"
        )
    bands: list[np.ndarray] = []
    current = img
    for _ in range(levels):
        down = _pyr_down(current)
        up = _pyr_up(down, current.shape[0], current.shape[1])
        bands.append(current - up)
        current = down
    return LaplacianPyramid(levels=bands, residual=current)


def reconstruct_pyramid(pyramid: LaplacianPyramid) -> np.ndarray:
    """Invert :func:`laplacian_pyramid`."""
    if not pyramid.levels:
        raise ValueError("pyramid has no band-pass levels")
    expected = pyramid.residual.shape[:2]
    for band in reversed(pyramid.levels):
        h, w = band.shape[:2]
        if ((h + 1) // 2, (w + 1) // 2) != expected:
            raise ValueError(
                f"inconsistent pyramid: band {band.shape[:2]} does not reduce to {expected}"
            )
        expected = (h, w)
    current = pyramid.residual
    for band in reversed(pyramid.levels):
        current = _pyr_up(current, band.shape[0], band.shape[1]) + band
    return current


def local_variance_map(img: np.ndarray, window: int = 3) -> np.ndarray:
    """Population variance over an odd square window around each pixel.

    Single-channel input only; replicate border. The divide-by-N
    (population) convention is used so a 3x3 window averages over
    exactly nine samples.
    """
    img = as_image(img)
    if img.ndim != 2:
        raise ValueError("local_variance_map expects a single-channel image")
    if window % 2 == 0:
        raise ValueError(f"window must be odd, got {window}")
    if window > min(img.shape):
        raise ValueError(f"window {window} larger than image {img.shape}")
    mean = ndimage.uniform_filter(img, size=window, mode="nearest")
    mean_sq = ndimage.uniform_filter(img * img, size=window, mode="nearest")
    return np.maximum(mean_sq - mean * mean, 0.0)
