"""Seeded single-stage degradation: blur, resize, noise, JPEG.

A :class:`DegradationRecipe` fully parameterizes one degradation run,
including its noise seed, so the same recipe always produces the same
output bytes. Recipes are drawn from named :class:`SeverityProfile`
range files (shipped as JSON data, editable without touching code).
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace
from importlib import resources
from pathlib import Path

import cv2
import numpy as np

from .imgcore import as_image, clamp01, convolve2d, from_uint8, resize, to_luma, to_uint8
from .seeding import spawn_rng

BUILTIN_PROFILES = ("noise-heavy", "blur-heavy", "single-stage-moderate")


@dataclass
class BlurParams:
    mode: str = "iso"  # iso | aniso
    sigma_x: float = 1.0
    sigma_y: float = 1.0
    theta: float = 0.0
    ksize: int = 21


@dataclass
class ResizeParams:
    scale: float = 1.0
    filter: str = "bicubic"


@dataclass
class NoiseParams:
    kind: str = "gaussian"  # gaussian | poisson
    sigma: float = 0.0      # gaussian std in [0, 1] sample units
    level: float = 0.0      # poisson photon scale; lambda = 255 * level
    gray: bool = False


@dataclass
class JpegParams:
    quality: int = 90
    enabled: bool = False


@dataclass
class DegradationRecipe:
    blur: BlurParams = field(default_factory=BlurParams)
    resize: ResizeParams = field(default_factory=ResizeParams)
    noise: NoiseParams = field(default_factory=NoiseParams)
    jpeg: JpegParams = field(default_factory=JpegParams)
    seed: int = 0

    def validate(self) -> None:
        if self.blur.mode not in ("iso", "aniso"):
            raise ValueError(f"blur mode must be iso or aniso, got {self.blur.mode!r}")
        if self.blur.sigma_x <= 0 or self.blur.sigma_y <= 0:
            raise ValueError("blur sigmas must be positive")
        if self.blur.ksize % 2 == 0 or self.blur.ksize < 1:
            raise ValueError(f"blur ksize must be odd and >= 1, got {self.blur.ksize}")
        if not 0.0 < self.resize.scale <= 1.0:
            raise ValueError(f"resize scale must be in (0, 1], got {self.resize.scale}")
        if self.noise.kind not in ("gaussian", "poisson"):
            raise ValueError(f"noise kind must be gaussian or poisson, got {self.noise.kind!r}")
        if self.noise.sigma < 0 or self.noise.level < 0:
            raise ValueError("noise sigma/level must be non-negative")
        if not 1 <= self.jpeg.quality <= 100:
            raise ValueError(f"jpeg quality must be in [1, 100], got {self.jpeg.quality}")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "DegradationRecipe":
        return cls(
            blur=BlurParams(**d["blur"]),
            resize=ResizeParams(**d["resize"]),
            noise=NoiseParams(**d["noise"]),
            jpeg=JpegParams(**d["jpeg"]),
            seed=int(d["seed"]),
        )


def identity_recipe(seed: int = 0) -> DegradationRecipe:
    """A recipe whose degradation output equals its input bit-exactly."""
    return DegradationRecipe(
        blur=BlurParams(mode="iso", sigma_x=0.5, sigma_y=0.5, theta=0.0, ksize=1),
        resize=ResizeParams(scale=1.0),
        noise=NoiseParams(kind="gaussian", sigma=0.0),
        jpeg=JpegParams(quality=100, enabled=False),
        seed=seed,
    )


@dataclass
class SeverityProfile:
    """Named parameter ranges bounding recipe sampling.

    All two-element lists are inclusive [min, max] ranges. Probabilities
    select between blur modes, noise kinds and JPEG on/off.
    """

    name: str
    blur_sigma: tuple[float, float] = (0.2, 2.0)
    theta: tuple[float, float] = (0.0, math.pi)
    ksize: tuple[int, int] = (7, 21)
    p_aniso: float = 0.5
    scale: tuple[float, float] = (0.5, 1.0)
    resize_filter: str = "bicubic"
    p_poisson: float = 0.3
    gauss_sigma: tuple[float, float] = (1.0 / 255.0, 10.0 / 255.0)
    poisson_level: tuple[float, float] = (1.0, 4.0)
    p_gray: float = 0.25
    p_jpeg: float = 0.75
    jpeg_quality: tuple[int, int] = (60, 95)

    def validate(self) -> None:
        for rng_name in ("blur_sigma", "theta", "ksize", "scale", "gauss_sigma",
                         "poisson_level", "jpeg_quality"):
            lo, hi = getattr(self, rng_name)
            if lo > hi:
                raise ValueError(f"{self.name}: range {rng_name} has min > max")
        for p_name in ("p_aniso", "p_poisson", "p_gray", "p_jpeg"):
            p = getattr(self, p_name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{self.name}: probability {p_name} outside [0, 1]")
        if any(k % 2 == 0 for k in self.ksize):
            raise ValueError(f"{self.name}: ksize bounds must be odd")

    @classmethod
    def from_dict(cls, d: dict) -> "SeverityProfile":
        kwargs = dict(d)
        for key in ("blur_sigma", "theta", "ksize", "scale", "gauss_sigma",
                    "poisson_level", "jpeg_quality"):
            if key in kwargs:
                kwargs[key] = tuple(kwargs[key])
        profile = cls(**kwargs)
        profile.validate()
        return profile


def load_profile(name_or_path: str) -> SeverityProfile:
    """Load a built-in profile by name or any profile from a JSON path."""
    if name_or_path in BUILTIN_PROFILES:
        text = resources.files("srcurate.profiles").joinpath(f"{name_or_path}.json").read_text()
    else:
        path = Path(name_or_path)
        if not path.exists():
            raise FileNotFoundError(
                f"unknown profile {name_or_path!r}; built-ins are {', '.join(BUILTIN_PROFILES)}"
            )
        text = path.read_text()
    return SeverityProfile.from_dict(json.loads(text))


def make_blur_kernel(mode: str, sigma_x: float, sigma_y: float, theta: float,
                     ksize: int) -> np.ndarray:
    """Discretized (rotated) bivariate Gaussian, normalized to sum 1.

    ``iso`` mode forces sigma_y = sigma_x and theta = 0 regardless of the
    passed values.
    """
    if sigma_x <= 0 or sigma_y <= 0:
        raise ValueError("sigmas must be positive")
    if ksize % 2 == 0 or ksize < 1:
        raise ValueError(f"ksize must be odd and >= 1, got {ksize}")
    if mode not in ("iso", "aniso"):
        raise ValueError(f"mode must be iso or aniso, got {mode!r}")
    if mode == "iso":
        sigma_y = sigma_x
        theta = 0.0
    half = (ksize - 1) / 2.0
    coords = np.arange(ksize) - half
    xx, yy = np.meshgrid(coords, coords)
    cos_t, sin_t = math.cos(theta), math.sin(theta)
    a = cos_t ** 2 / (2.0 * sigma_x ** 2) + sin_t ** 2 / (2.0 * sigma_y ** 2)
    b = -math.sin(2.0 * theta) / (4.0 * sigma_x ** 2) + math.sin(2.0 * theta) / (4.0 * sigma_y ** 2)
    c = sin_t ** 2 / (2.0 * sigma_x ** 2) + cos_t ** 2 / (2.0 * sigma_y ** 2)
    kernel = np.exp(-(a * xx * xx + 2.0 * b * xx * yy + c * yy * yy))
    return kernel / kernel.sum()


def sample_recipe(profile: SeverityProfile, seed: int) -> DegradationRecipe:
    """Draw one recipe uniformly within the profile's ranges.

    Every field is drawn unconditionally, in a fixed order, from a
    generator seeded by ``seed``; the recipe records the seed.
    """
    profile.validate()
    rng = np.random.default_rng(seed)
    mode = "aniso" if rng.random() < profile.p_aniso else "iso"
    sigma_x = float(rng.uniform(*profile.blur_sigma))
    sigma_y = float(rng.uniform(*profile.blur_sigma))
    theta = float(rng.uniform(*profile.theta))
    klo, khi = profile.ksize
    ksize = int(rng.integers(klo // 2, khi // 2 + 1)) * 2 + 1
    scale = float(rng.uniform(*profile.scale))
    kind = "poisson" if rng.random() < profile.p_poisson else "gaussian"
    sigma = float(rng.uniform(*profile.gauss_sigma))
    level = float(rng.uniform(*profile.poisson_level))
    gray = bool(rng.random() < profile.p_gray)
    jpeg_on = bool(rng.random() < profile.p_jpeg)
    quality = int(rng.integers(profile.jpeg_quality[0], profile.jpeg_quality[1] + 1))
    if mode == "iso":
        sigma_y = sigma_x
        theta = 0.0
    return DegradationRecipe(
        blur=BlurParams(mode=mode, sigma_x=sigma_x, sigma_y=sigma_y, theta=theta, ksize=ksize),
        resize=ResizeParams(scale=scale, filter=profile.resize_filter),
        noise=NoiseParams(kind=kind, sigma=sigma, level=level, gray=gray),
        jpeg=JpegParams(quality=quality, enabled=jpeg_on),
        seed=int(seed),
    )


def _apply_noise(img: np.ndarray, noise: NoiseParams, rng: np.random.Generator) -> np.ndarray:
    if noise.kind == "gaussian":
        if noise.sigma <= 0:
            return img
        if noise.gray and img.ndim == 3:
            n = rng.normal(0.0, noise.sigma, size=img.shape[:2])[:, :, None]
        else:
            n = rng.normal(0.0, noise.sigma, size=img.shape)
        return clamp01(img + n)
    if noise.level <= 0:
        return img
    lam = 255.0 * noise.level
    if noise.gray and img.ndim == 3:
        luma = to_luma(img)
        shot = rng.poisson(np.maximum(luma, 0.0) * lam) / lam
        return clamp01(img + (shot - luma)[:, :, None])
    shot = rng.poisson(np.maximum(img, 0.0) * lam) / lam
    return clamp01(shot)


def jpeg_roundtrip(img: np.ndarray, quality: int) -> np.ndarray:
    """Encode to baseline JPEG at ``quality`` and decode back to [0, 1]."""
    img = as_image(img)
    u8 = to_uint8(img)
    color = u8.ndim == 3
    if color:
        u8 = cv2.cvtColor(u8, cv2.COLOR_RGB2BGR)
    ok, buf = cv2.imencode(".jpg", u8, [int(cv2.IMWRITE_JPEG_QUALITY), int(quality)])
    if not ok:
        raise RuntimeError("JPEG encoding failed")
    dec = cv2.imdecode(buf, cv2.IMREAD_COLOR if color else cv2.IMREAD_GRAYSCALE)
    if color:
        dec = cv2.cvtColor(dec, cv2.COLOR_BGR2RGB)
    return from_uint8(dec)


def scaled_dims(height: int, width: int, scale: float) -> tuple[int, int]:
    """Output dims under round-half-up."""
    return int(math.floor(height * scale + 0.5)), int(math.floor(width * scale + 0.5))


def degrade(hr: np.ndarray, recipe: DegradationRecipe) -> np.ndarray:
    """Apply blur, resize, noise and JPEG, in exactly that order.

    A pure function of (image, recipe): the noise stream is seeded from
    the recipe seed, so the same recipe gives bit-identical output.
    """
    hr = as_image(hr)
    recipe.validate()
    out_h, out_w = scaled_dims(hr.shape[0], hr.shape[1], recipe.resize.scale)
    if out_h < 8 or out_w < 8:
        raise ValueError(
            f"degraded dims {out_h}x{out_w} below the 8x8 JPEG block minimum"
        )
    kernel = make_blur_kernel(recipe.blur.mode, recipe.blur.sigma_x, recipe.blur.sigma_y,
                              recipe.blur.theta, recipe.blur.ksize)
    x = convolve2d(hr, kernel, border="replicate")
    if (out_h, out_w) != x.shape[:2]:
        x = resize(x, out_h, out_w, recipe.resize.filter)
    noisy_kind_active = (recipe.noise.kind == "gaussian" and recipe.noise.sigma > 0) or (
        recipe.noise.kind == "poisson" and recipe.noise.level > 0
    )
    if noisy_kind_active:
        x = _apply_noise(x, recipe.noise, spawn_rng(recipe.seed, "noise"))
    if recipe.jpeg.enabled:
        x = jpeg_roundtrip(x, recipe.jpeg.quality)
    return clamp01(x)


def degrade_to_lr(hr: np.ndarray, recipe: DegradationRecipe, sr_scale: int = 4) -> np.ndarray:
    """Degrade with the resize scale forced to 1/sr_scale."""
    hr = as_image(hr)
    if hr.shape[0] % sr_scale or hr.shape[1] % sr_scale:
        raise ValueError(
            f"image dims {hr.shape[:2]} not divisible by sr_scale {sr_scale}"
        )
    forced = replace(recipe, resize=replace(recipe.resize, scale=1.0 / sr_scale))
    return degrade(hr, forced)


def upsample_back(lq: np.ndarray, target_h: int, target_w: int) -> np.ndarray:
    """Bicubic upsample to the original dims (enhancer-style pairs)."""
    lq = as_image(lq)
    if target_h < lq.shape[0] or target_w < lq.shape[1]:
        raise ValueError("target dims must be >= current dims")
    return resize(lq, target_h, target_w, "bicubic")
