from __future__ import annotations

import numpy as np
import pytest

from srcurate import losskernel as lk
from srcurate.imgcore import local_variance_map


def finite_difference_grad(f, x, h=1e-4):
    """Central differences of a scalar function over every sample of x."""
    grad = np.zeros_like(x)
    it = np.nditer(x, flags=["multi_index"])
    while not it.finished:
        idx = it.multi_index
        xp = x.copy()
        xp[idx] += h
        xm = x.copy()
        xm[idx] -= h
        grad[idx] = (f(xp) - f(xm)) / (2.0 * h)
        it.iternext()
    return grad


def check_grad(analytic, numeric, mask, rel_tol=1e-3):
    scale = np.maximum(np.abs(analytic), np.abs(numeric))
    ok = scale < 1e-12
    rel = np.where(ok, 0.0, np.abs(analytic - numeric) / np.where(ok, 1.0, scale))
    assert rel[mask].max() <= rel_tol if mask.any() else True


# --- residual_variance_map ---------------------------------------------------


def test_map_zero_for_identical_images(rng):
    img = rng.random((16, 16, 3))
    m = lk.residual_variance_map(img, img)
    assert np.all(m.values == 0.0)
    assert m.exponent == 0.75


def test_map_power_law_hand_value():
    # A window with known population variance v maps to v ** 0.75;
    # e.g. variance 16 would map to 8. Check on an attainable variance.
    img = np.zeros((5, 5))
    img[2, 2] = 0.9
    hr = np.zeros((5, 5))
    v = local_variance_map(np.abs(img - hr), 3)[2, 2]
    expected_center = v ** 0.75
    m = lk.residual_variance_map(img, hr)
    assert m.values[2, 2] == pytest.approx(expected_center, rel=1e-12)
    assert (16.0 ** 0.75) == pytest.approx(8.0)  # the exponent arithmetic itself


def test_map_depends_only_on_absolute_residual(rng):
    hr = np.full((12, 12), 0.5)
    delta = rng.random((12, 12)) * 0.3
    above = np.clip(hr + delta, 0, 1)
    below = np.clip(hr - delta, 0, 1)
    a = lk.residual_variance_map(above, hr)
    b = lk.residual_variance_map(below, hr)
    np.testing.assert_allclose(a.values, b.values, atol=1e-12)


def test_map_swap_symmetric(rng):
    x = rng.random((10, 10))
    y = rng.random((10, 10))
    np.testing.assert_allclose(lk.residual_variance_map(x, y).values,
                               lk.residual_variance_map(y, x).values, atol=1e-12)


def test_map_exponent_monotonicity(rng):
    variances = rng.random((8, 8)) * 0.5 + 1e-4  # all in (0, 1)
    small = variances ** 0.5
    large = variances ** 0.9
    assert np.all(large < small)
    big_vars = variances + 1.0  # all > 1
    assert np.all(big_vars ** 0.9 > big_vars ** 0.5)


def test_map_dim_mismatch_errors(rng):
    with pytest.raises(ValueError):
        lk.residual_variance_map(rng.random((8, 8)), rng.random((8, 9)))


def test_map_per_channel_switch(rng):
    variant = rng.random((10, 10, 3))
    hr = rng.random((10, 10, 3))
    per_channel = lk.residual_variance_map(variant, hr, on="channels")
    assert per_channel.values.shape == (10, 10, 3)
    for c in range(3):
        single = lk.residual_variance_map(variant[:, :, c], hr[:, :, c],
                                          on="channels")
        np.testing.assert_allclose(per_channel.values[:, :, c], single.values,
                                   atol=1e-12)
    # Per-channel gates flow through the loss with exact-shape matching.
    gate = lk.indication_map(per_channel,
                             lk.residual_variance_map(hr, hr, on="channels"))
    value, grad = lk.negative_loss(variant, rng.random((10, 10, 3)), gate)
    assert grad.shape == (10, 10, 3)
    assert np.isfinite(value)


# --- indication_map ----------------------------------------------------------


def make_map(values, a=0.75):
    return lk.ResidualVarianceMap(values=np.asarray(values, dtype=float), exponent=a)


def test_indication_equal_maps_all_zero(rng):
    v = rng.random((6, 6))
    m = lk.indication_map(make_map(v), make_map(v.copy()))
    assert np.all(m.values == 0.0)


def test_indication_zero_positive_passes_negative(rng):
    v = rng.random((6, 6)) + 0.1
    m = lk.indication_map(make_map(v), make_map(np.zeros((6, 6))))
    np.testing.assert_array_equal(m.values, v)


def test_indication_matches_elementwise_oracle(rng):
    neg = rng.random((7, 9))
    pos = rng.random((7, 9))
    got = lk.indication_map(make_map(neg), make_map(pos)).values
    for i in range(7):
        for j in range(9):
            want = neg[i, j] if neg[i, j] > pos[i, j] else 0.0
            assert got[i, j] == want


def test_indication_exponent_mismatch_errors(rng):
    v = rng.random((4, 4))
    with pytest.raises(ValueError):
        lk.indication_map(make_map(v, 0.75), make_map(v, 0.5))


# --- negative_loss -----------------------------------------------------------


def test_negative_loss_zero_when_equal(rng):
    img = rng.random((8, 8))
    gate = make_gate(rng, (8, 8))
    value, grad = lk.negative_loss(img, img.copy(), gate)
    assert value == 0.0
    assert np.all(grad == 0.0)


def make_gate(rng, shape):
    return lk.IndicationMap(values=rng.random(shape))


def test_negative_loss_closed_gate(rng):
    value, grad = lk.negative_loss(rng.random((8, 8)), rng.random((8, 8)),
                                   lk.IndicationMap(values=np.zeros((8, 8))))
    assert value == 0.0
    assert np.all(grad == 0.0)


def test_negative_loss_gradient_matches_finite_differences(rng):
    h = 1e-4
    for _ in range(5):
        i_neg = rng.random((16, 16))
        i_sr = rng.random((16, 16))
        gate = make_gate(rng, (16, 16))
        value, grad = lk.negative_loss(i_neg, i_sr, gate)
        numeric = finite_difference_grad(
            lambda x: lk.negative_loss(i_neg, x, gate).value, i_sr, h)
        mask = np.abs(i_neg - i_sr) > 2 * h  # exclude sign ties
        check_grad(grad, numeric, mask)


def test_negative_loss_color_broadcast(rng):
    i_neg = rng.random((6, 6, 3))
    i_sr = rng.random((6, 6, 3))
    gate = make_gate(rng, (6, 6))
    value, grad = lk.negative_loss(i_neg, i_sr, gate)
    assert grad.shape == (6, 6, 3)
    want = float(np.sum(gate.values[:, :, None] * np.abs(i_neg - i_sr)) / i_sr.size)
    assert value == pytest.approx(want, rel=1e-12)


def test_negative_loss_dim_mismatch_errors(rng):
    with pytest.raises(ValueError):
        lk.negative_loss(rng.random((8, 8)), rng.random((8, 7)),
                         lk.IndicationMap(values=np.zeros((8, 8))))


# --- gating soundness (end to end) -------------------------------------------


def test_gating_soundness_property(rng):
    for _ in range(100):
        m_pos = rng.random((8, 8))
        m_neg = m_pos - rng.random((8, 8)) * 0.5  # everywhere <= m_pos
        gate = lk.indication_map(make_map(np.maximum(m_neg, 0.0)), make_map(m_pos))
        value, grad = lk.negative_loss(rng.random((8, 8)), rng.random((8, 8)), gate)
        assert value == 0.0
        assert np.all(grad == 0.0)


# --- total_loss --------------------------------------------------------------


def test_total_loss_reference_weights():
    w = lk.LossWeights(1.0, 1.0, 0.1, 300.0)
    out = lk.total_loss(0.5, 0.2, 0.1, 0.001, w)
    assert out.total == pytest.approx(0.5 + 0.2 + 0.01 - 0.3, abs=1e-12)
    assert out.total == pytest.approx(0.41, abs=1e-12)


def test_total_loss_zero_delta_drops_negative_term(rng):
    w = lk.LossWeights(1.0, 0.5, 0.2, 0.0)
    terms = rng.random(4)
    out = lk.total_loss(*terms, w)
    assert out.total == pytest.approx(terms[0] + 0.5 * terms[1] + 0.2 * terms[2],
                                      abs=1e-12)


def test_total_loss_all_zero():
    assert lk.total_loss(0, 0, 0, 0, lk.LossWeights()).total == 0.0


def test_total_loss_linear_in_each_term(rng):
    w = lk.LossWeights(1.3, 0.7, 0.2, 5.0)
    base = (0.3, 0.1, 0.05, 0.02)
    coeffs = (w.alpha, w.beta, w.gamma, -w.delta)
    for k in range(4):
        bumped = list(base)
        bumped[k] += 0.01
        delta = lk.total_loss(*bumped, w).total - lk.total_loss(*base, w).total
        assert delta == pytest.approx(coeffs[k] * 0.01, rel=1e-9)


def test_total_loss_rejects_non_finite():
    with pytest.raises(ValueError):
        lk.total_loss(float("nan"), 0, 0, 0, lk.LossWeights())
    with pytest.raises(ValueError):
        lk.total_loss(float("inf"), 0, 0, 0, lk.LossWeights())


def test_breakdown_composition_invariant(rng):
    w = lk.LossWeights(1.0, 1.0, 0.1, 300.0)
    terms = rng.random(4) * 0.1
    out = lk.total_loss(*terms, w)
    recomputed = w.alpha * out.l1 + w.beta * out.perceptual \
        + w.gamma * out.adversarial - w.delta * out.negative
    assert abs(out.total - recomputed) <= 1e-9


# --- pick_positive_gt --------------------------------------------------------


def test_pick_single_positive():
    rng = np.random.default_rng(0)
    for _ in range(10):
        assert lk.pick_positive_gt(["only"], rng) == "only"


def test_pick_uniform_frequencies():
    rng = np.random.default_rng(42)
    counts = {k: 0 for k in range(4)}
    n = 40_000
    for _ in range(n):
        counts[lk.pick_positive_gt([0, 1, 2, 3], rng)] += 1
    for k in range(4):
        assert 0.24 <= counts[k] / n <= 0.26


def test_pick_deterministic_stream():
    a = [lk.pick_positive_gt([0, 1, 2], np.random.default_rng(7)) for _ in range(1)]
    b = [lk.pick_positive_gt([0, 1, 2], np.random.default_rng(7)) for _ in range(1)]
    assert a == b


def test_pick_empty_errors():
    with pytest.raises(ValueError):
        lk.pick_positive_gt([], np.random.default_rng(0))


# --- demo L1 term ------------------------------------------------------------


def test_l1_gradient_matches_finite_differences(rng):
    h = 1e-4
    i_sr = rng.random((16, 16))
    target = rng.random((16, 16))
    value, grad = lk.l1_loss(i_sr, target)
    numeric = finite_difference_grad(lambda x: lk.l1_loss(x, target).value, i_sr, h)
    mask = np.abs(i_sr - target) > 2 * h
    check_grad(grad, numeric, mask)


# --- optimize_patch_demo -----------------------------------------------------


def repulsion_fixture(rng, n=24, region=slice(8, 16)):
    """i_neg noisy above i_hr inside a block; i_pos equals i_hr."""
    i_hr = np.full((n, n), 0.5)
    i_pos = i_hr.copy()
    i_neg = i_hr.copy()
    noise = 0.05 + 0.35 * rng.random((region.stop - region.start,
                                      region.stop - region.start))
    i_neg[region, region] += noise
    i_init = i_hr + 0.1
    i_init[region, region] = i_hr[region, region] + noise / 2.0
    return i_init, i_pos, i_neg, i_hr


def test_demo_at_global_minimum_stays_put(rng):
    img = rng.random((12, 12))
    w = lk.LossWeights(1.0, 0.0, 0.0, 0.0)
    traj = lk.optimize_patch_demo(img, img.copy(), rng.random((12, 12)), img.copy(),
                                  w, steps=3, step_size=1e-2)
    assert traj[0].losses.l1 == 0.0
    assert traj[0].losses.total == 0.0
    for point in traj:
        np.testing.assert_array_equal(point.image, img)


def test_demo_l1_descent_is_monotone(rng):
    i_init, i_pos, i_neg, i_hr = repulsion_fixture(rng)
    w = lk.LossWeights(1.0, 0.0, 0.0, 0.0)
    traj = lk.optimize_patch_demo(i_init, i_pos, i_neg, i_hr, w,
                                  steps=50, step_size=1e-3)
    l1_values = [p.losses.l1 for p in traj]
    for before, after in zip(l1_values, l1_values[1:]):
        assert after <= before + 1e-9


def test_demo_negative_term_repels(rng):
    i_init, i_pos, i_neg, i_hr = repulsion_fixture(rng)
    w = lk.LossWeights(1.0, 0.0, 0.0, 300.0)
    traj = lk.optimize_patch_demo(i_init, i_pos, i_neg, i_hr, w,
                                  steps=50, step_size=0.02)
    m_ind = lk.indication_map(lk.residual_variance_map(i_neg, i_hr),
                              lk.residual_variance_map(i_pos, i_hr))
    mask = m_ind.values > 0
    assert mask.any()
    first, last = traj[0].image, traj[-1].image
    dist_neg_before = np.abs(first - i_neg)[mask].mean()
    dist_neg_after = np.abs(last - i_neg)[mask].mean()
    assert dist_neg_after > dist_neg_before
    assert np.abs(last - i_pos).mean() < np.abs(first - i_pos).mean()


def test_demo_trajectory_length_and_finiteness(rng):
    i_init, i_pos, i_neg, i_hr = repulsion_fixture(rng)
    traj = lk.optimize_patch_demo(i_init, i_pos, i_neg, i_hr,
                                  lk.LossWeights(1, 0, 0, 10), steps=5,
                                  step_size=1e-2)
    assert len(traj) == 6
    assert all(np.isfinite(p.losses.total) for p in traj)
