"""Training-loss kernels for negative-sample supervision.

The negative loss penalizes similarity between a reconstruction and a
bad ground truth, but only at pixels where the bad variant's local
residual variation exceeds the good variant's. Residual variance maps,
the indication map that gates the loss, and the composed total loss all
live here, together with a pixel-space gradient-descent demo that lets
the whole mechanism be verified without any network.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .imgcore import as_image, clamp01, local_variance_map, to_luma

DEFAULT_EXPONENT = 0.75


@dataclass(frozen=True)
class ResidualVarianceMap:
    """Per-pixel local variance of an absolute residual, raised to ``exponent``."""

    values: np.ndarray
    exponent: float


@dataclass(frozen=True)
class IndicationMap:
    values: np.ndarray


class LossValue(NamedTuple):
    value: float
    gradient: np.ndarray


@dataclass(frozen=True)
class LossWeights:
    alpha: float = 1.0
    beta: float = 1.0
    gamma: float = 0.1
    delta: float = 300.0

    def validate(self) -> None:
        for name in ("alpha", "beta", "gamma", "delta"):
            v = getattr(self, name)
            if not np.isfinite(v) or v < 0:
                raise ValueError(f"weight {name} must be finite and >= 0, got {v}")


@dataclass(frozen=True)
class LossBreakdown:
    l1: float
    perceptual: float
    adversarial: float
    negative: float
    total: float


def residual_variance_map(variant: np.ndarray, original_hr: np.ndarray,
                          a: float = DEFAULT_EXPONENT, window: int = 3,
                          on: str = "luma") -> ResidualVarianceMap:
    """Local residual variation of a variant against the original.

    The absolute residual is passed through a windowed population
    variance and raised pointwise to ``a``. Depends only on the
    magnitude of the difference, so swapping the two images leaves the
    map unchanged. ``on="luma"`` (default) collapses to luminance so a
    single map gates all channels; ``on="channels"`` keeps one map per
    channel instead.
    """
    variant = as_image(variant, "variant")
    original_hr = as_image(original_hr, "original_hr")
    if variant.shape != original_hr.shape:
        raise ValueError(f"shape mismatch: {variant.shape} vs {original_hr.shape}")
    if on == "luma":
        residual = np.abs(to_luma(variant) - to_luma(original_hr))
        values = local_variance_map(residual, window) ** a
    elif on == "channels":
        residual = np.abs(variant - original_hr)
        if residual.ndim == 2:
            values = local_variance_map(residual, window) ** a
        else:
            values = np.stack(
                [local_variance_map(residual[:, :, c], window)
                 for c in range(residual.shape[2])], axis=2,
            ) ** a
    else:
        raise ValueError(f"on must be 'luma' or 'channels', got {on!r}")
    return ResidualVarianceMap(values=values, exponent=a)


def indication_map(m_neg: ResidualVarianceMap, m_pos: ResidualVarianceMap) -> IndicationMap:
    """Gate that keeps the negative map only where it exceeds the positive.

    Equality counts as not-negative: the gate is zero wherever
    ``m_neg <= m_pos``.
    """
    if m_neg.values.shape != m_pos.values.shape:
        raise ValueError(
            f"map shape mismatch: {m_neg.values.shape} vs {m_pos.values.shape}"
        )
    if m_neg.exponent != m_pos.exponent:
        raise ValueError(
            f"exponent mismatch: {m_neg.exponent} vs {m_pos.exponent}"
        )
    values = np.where(m_neg.values > m_pos.values, m_neg.values, 0.0)
    return IndicationMap(values=values)


def _gate_array(m_ind) -> np.ndarray:
    return m_ind.values if isinstance(m_ind, IndicationMap) else np.asarray(m_ind)


def negative_loss(i_neg: np.ndarray, i_sr: np.ndarray, m_ind) -> LossValue:
    """Gated L1 distance between a reconstruction and a negative GT.

    ``value = mean(M . |i_neg - i_sr|)`` over all samples (the single
    gate map broadcasts over color channels). The gradient with respect
    to ``i_sr`` is ``M . sign(i_sr - i_neg) / N`` with subgradient 0 at
    ties; the gate is treated as a constant.
    """
    i_neg = as_image(i_neg, "i_neg")
    i_sr = as_image(i_sr, "i_sr")
    gate = _gate_array(m_ind)
    if i_neg.shape != i_sr.shape:
        raise ValueError(f"shape mismatch: {i_neg.shape} vs {i_sr.shape}")
    if gate.shape == i_sr.shape[:2]:
        if i_sr.ndim == 3:
            gate = gate[:, :, None]
    elif gate.shape != i_sr.shape:  # per-channel gate must match exactly
        raise ValueError(f"gate shape {gate.shape} does not match image {i_sr.shape}")
    n = i_sr.size
    value = float(np.sum(gate * np.abs(i_neg - i_sr)) / n)
    gradient = gate * np.sign(i_sr - i_neg) / n
    if i_sr.ndim == 3 and gradient.shape != i_sr.shape:
        gradient = np.broadcast_to(gradient, i_sr.shape).copy()
    return LossValue(value=value, gradient=gradient)


def l1_loss(i_sr: np.ndarray, target: np.ndarray) -> LossValue:
    """Mean absolute error and its subgradient with respect to ``i_sr``."""
    i_sr = as_image(i_sr, "i_sr")
    target = as_image(target, "target")
    if i_sr.shape != target.shape:
        raise ValueError(f"shape mismatch: {i_sr.shape} vs {target.shape}")
    n = i_sr.size
    value = float(np.mean(np.abs(i_sr - target)))
    gradient = np.sign(i_sr - target) / n
    return LossValue(value=value, gradient=gradient)


def total_loss(l1_term: float, perceptual_term: float, adversarial_term: float,
               negative_term: float, w: LossWeights) -> LossBreakdown:
    """Weighted composition; note the minus sign on the negative term."""
    w.validate()
    terms = (l1_term, perceptual_term, adversarial_term, negative_term)
    if not all(np.isfinite(t) for t in terms):
        raise ValueError(f"loss terms must be finite, got {terms}")
    total = (w.alpha * l1_term + w.beta * perceptual_term
             + w.gamma * adversarial_term - w.delta * negative_term)
    return LossBreakdown(l1=l1_term, perceptual=perceptual_term,
                         adversarial=adversarial_term, negative=negative_term,
                         total=total)


def pick_positive_gt(positives: Sequence, rng: np.random.Generator):
    """Uniform seeded choice among a group's positive GTs."""
    if len(positives) == 0:
        raise ValueError("no positive GTs to choose from")
    return positives[int(rng.integers(0, len(positives)))]


# External terms (perceptual, adversarial) plug in as callables that map
# the current image to (value, gradient). They stay outside this
# package; the zero stub stands in for them during testing.
ExternalTerm = Callable[[np.ndarray], LossValue]


def zero_term(i_sr: np.ndarray) -> LossValue:
    return LossValue(value=0.0, gradient=np.zeros_like(i_sr))


@dataclass
class TrajectoryPoint:
    image: np.ndarray
    losses: LossBreakdown


def optimize_patch_demo(i_init: np.ndarray, i_pos: np.ndarray, i_neg: np.ndarray,
                        i_hr: np.ndarray, w: LossWeights, steps: int,
                        step_size: float, a: float = DEFAULT_EXPONENT,
                        perceptual_term: ExternalTerm = zero_term,
                        adversarial_term: ExternalTerm = zero_term) -> list[TrajectoryPoint]:
    """Gradient descent directly on pixel values under the composed loss.

    The indication map is computed once from (i_pos, i_neg, i_hr) and
    held fixed. Returns the evaluation at every step including the
    initial image (``steps + 1`` points); aborts early, returning the
    trajectory so far, if the loss stops being finite.
    """
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    images = [as_image(x, name) for x, name in
              ((i_init, "i_init"), (i_pos, "i_pos"), (i_neg, "i_neg"), (i_hr, "i_hr"))]
    i_init, i_pos, i_neg, i_hr = images
    if len({img.shape for img in images}) != 1:
        raise ValueError("all images must share dimensions")
    w.validate()
    m_ind = indication_map(residual_variance_map(i_neg, i_hr, a),
                           residual_variance_map(i_pos, i_hr, a))
    current = i_init.copy()
    trajectory: list[TrajectoryPoint] = []
    for _ in range(steps + 1):
        l1 = l1_loss(current, i_pos)
        per = perceptual_term(current)
        adv = adversarial_term(current)
        neg = negative_loss(i_neg, current, m_ind)
        try:
            breakdown = total_loss(l1.value, per.value, adv.value, neg.value, w)
        except ValueError:
            break
        trajectory.append(TrajectoryPoint(image=current.copy(), losses=breakdown))
        if len(trajectory) == steps + 1:
            break
        gradient = (w.alpha * l1.gradient + w.beta * per.gradient
                    + w.gamma * adv.gradient - w.delta * neg.gradient)
        current = clamp01(current - step_size * gradient)
    return trajectory
