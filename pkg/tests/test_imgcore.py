from __future__ import annotations

import numpy as np
import pytest

from srcurate import imgcore as ic


# --- independent oracles -----------------------------------------------------


def naive_convolve(img: np.ndarray, kernel: np.ndarray, border: str) -> np.ndarray:
    """Loop convolution (kernel flipped) with explicit border handling."""
    kh = kernel.shape[0] // 2
    h, w = img.shape
    out = np.zeros_like(img)
    for i in range(h):
        for j in range(w):
            acc = 0.0
            for di in range(-kh, kh + 1):
                for dj in range(-kh, kh + 1):
                    ii, jj = i - di, j - dj
                    if border == "replicate":
                        ii = min(max(ii, 0), h - 1)
                        jj = min(max(jj, 0), w - 1)
                    else:  # reflect (half-sample symmetric)
                        if ii < 0:
                            ii = -ii - 1
                        if ii >= h:
                            ii = 2 * h - ii - 1
                        if jj < 0:
                            jj = -jj - 1
                        if jj >= w:
                            jj = 2 * w - jj - 1
                    acc += img[ii, jj] * kernel[di + kh, dj + kh]
            out[i, j] = acc
    return out


def naive_bilinear_upsample(img: np.ndarray, th: int, tw: int) -> np.ndarray:
    """Loop bilinear resampling, half-pixel centers, replicate border."""
    h, w = img.shape
    out = np.zeros((th, tw))
    for i in range(th):
        for j in range(tw):
            u = (i + 0.5) * h / th - 0.5
            v = (j + 0.5) * w / tw - 0.5
            i0, j0 = int(np.floor(u)), int(np.floor(v))
            fu, fv = u - i0, v - j0
            acc = 0.0
            for di, wu in ((0, 1 - fu), (1, fu)):
                for dj, wv in ((0, 1 - fv), (1, fv)):
                    ii = min(max(i0 + di, 0), h - 1)
                    jj = min(max(j0 + dj, 0), w - 1)
                    acc += wu * wv * img[ii, jj]
            out[i, j] = acc
    return out


def naive_variance_map(img: np.ndarray, window: int) -> np.ndarray:
    half = window // 2
    h, w = img.shape
    out = np.zeros_like(img)
    for i in range(h):
        for j in range(w):
            vals = []
            for di in range(-half, half + 1):
                for dj in range(-half, half + 1):
                    ii = min(max(i + di, 0), h - 1)
                    jj = min(max(j + dj, 0), w - 1)
                    vals.append(img[ii, jj])
            vals = np.array(vals)
            out[i, j] = np.mean(vals * vals) - np.mean(vals) ** 2
    return out


# --- to_luma -----------------------------------------------------------------


def test_luma_identity_for_single_channel(gray_image):
    out = ic.to_luma(gray_image)
    assert np.array_equal(out, gray_image)


def test_luma_constant_gray():
    img = np.full((8, 9, 3), 0.42)
    out = ic.to_luma(img)
    np.testing.assert_allclose(out, 0.42, atol=1e-12)


def test_luma_pure_red():
    img = np.zeros((5, 6, 3))
    img[:, :, 0] = 1.0
    np.testing.assert_allclose(ic.to_luma(img), 0.299, atol=1e-12)


# --- convolve2d --------------------------------------------------------------


def test_convolve_identity_kernel_bit_exact(gray_image):
    out = ic.convolve2d(gray_image, np.array([[1.0]]))
    assert np.array_equal(out, gray_image)


def test_convolve_constant_with_normalized_kernel():
    img = np.full((10, 10), 0.6)
    k = np.full((3, 3), 1.0 / 9.0)
    np.testing.assert_allclose(ic.convolve2d(img, k), 0.6, atol=1e-12)


def test_convolve_impulse_box_hand_value():
    img = np.zeros((3, 3))
    img[1, 1] = 1.0
    k = np.full((3, 3), 1.0 / 9.0)
    # With replicate padding every 3x3 window of the 3x3 image still sees
    # the single center impulse exactly once.
    np.testing.assert_allclose(ic.convolve2d(img, k, "replicate"), 1.0 / 9.0, atol=1e-15)


@pytest.mark.parametrize("border", ["replicate", "reflect"])
def test_convolve_matches_naive_oracle(rng, border):
    img = rng.random((12, 14))
    kernel = rng.random((5, 5))
    got = ic.convolve2d(img, kernel, border)
    want = naive_convolve(img, kernel, border)
    np.testing.assert_allclose(got, want, atol=1e-12)


def test_convolve_kernel_larger_than_image_errors():
    with pytest.raises(ValueError):
        ic.convolve2d(np.zeros((3, 3)), np.full((5, 5), 0.04))


def test_convolve_even_kernel_errors():
    with pytest.raises(ValueError):
        ic.convolve2d(np.zeros((8, 8)), np.full((4, 4), 1.0 / 16))


# --- resize ------------------------------------------------------------------


@pytest.mark.parametrize("filt", ["nearest", "bilinear", "bicubic"])
def test_resize_identity_bit_exact(rgb_image, filt):
    out = ic.resize(rgb_image, rgb_image.shape[0], rgb_image.shape[1], filt)
    assert np.array_equal(out, rgb_image)


@pytest.mark.parametrize("filt", ["nearest", "bilinear", "bicubic"])
def test_resize_constant_stays_constant(filt):
    img = np.full((6, 8), 0.37)
    out = ic.resize(img, 11, 5, filt)
    np.testing.assert_allclose(out, 0.37, atol=1e-12)


def test_resize_checkerboard_bilinear_center():
    cb = np.array([[0.0, 1.0], [1.0, 0.0]])
    up = ic.resize(cb, 3, 3, "bilinear")
    assert up[1, 1] == pytest.approx(0.5, abs=1e-12)


def test_resize_bilinear_matches_naive_oracle(rng):
    img = rng.random((7, 9))
    got = ic.resize(img, 13, 20, "bilinear")
    want = naive_bilinear_upsample(img, 13, 20)
    np.testing.assert_allclose(got, want, atol=1e-12)


def test_resize_clamps_bicubic_overshoot():
    img = np.zeros((8, 8))
    img[4:, :] = 1.0
    out = ic.resize(img, 16, 16, "bicubic")
    assert out.min() >= 0.0 and out.max() <= 1.0


def test_resize_zero_target_errors(gray_image):
    with pytest.raises(ValueError):
        ic.resize(gray_image, 0, 10)


# --- Laplacian pyramid -------------------------------------------------------


def test_pyramid_constant_has_zero_bands():
    pyr = ic.laplacian_pyramid(np.full((64, 64), 0.5), 3)
    for band in pyr.levels:
        assert np.abs(band).max() == 0.0
    np.testing.assert_allclose(pyr.residual, 0.5)


@pytest.mark.parametrize("levels", [1, 2, 3, 4])
def test_pyramid_round_trip(rng, levels):
    img = rng.random((64, 64))
    rec = ic.reconstruct_pyramid(ic.laplacian_pyramid(img, levels))
    assert np.abs(rec - img).max() <= 1e-6


def test_pyramid_round_trip_odd_dims(rng):
    img = rng.random((67, 53, 3))
    rec = ic.reconstruct_pyramid(ic.laplacian_pyramid(img, 3))
    assert np.abs(rec - img).max() <= 1e-6


def test_pyramid_level_dims_halve(rng):
    pyr = ic.laplacian_pyramid(rng.random((67, 53)), 3)
    dims = [band.shape[:2] for band in pyr.levels] + [pyr.residual.shape[:2]]
    assert dims == [(67, 53), (34, 27), (17, 14), (9, 7)]


def test_pyramid_noise_band_std_decreases(rng):
    img = rng.random((64, 64))
    pyr = ic.laplacian_pyramid(img, 2)
    assert pyr.levels[0].std() > pyr.levels[1].std()


def test_pyramid_too_many_levels_errors():
    with pytest.raises(ValueError):
        ic.laplacian_pyramid(np.zeros((16, 16)), 5)


def test_reconstruct_inconsistent_dims_errors(rng):
    pyr = ic.laplacian_pyramid(rng.random((32, 32)), 2)
    broken = ic.LaplacianPyramid(levels=[pyr.levels[0]], residual=pyr.residual)
    with pytest.raises(ValueError):
        ic.reconstruct_pyramid(broken)


# --- local variance map ------------------------------------------------------


def test_variance_constant_is_zero():
    out = ic.local_variance_map(np.full((9, 9), 0.8), 3)
    assert np.all(out == 0.0)


def test_variance_hand_value_center_impulse():
    img = np.zeros((3, 3))
    img[1, 1] = 1.0
    out = ic.local_variance_map(img, 3)
    assert out[1, 1] == pytest.approx(8.0 / 81.0, abs=1e-15)


def test_variance_matches_naive_oracle(rng):
    img = rng.random((10, 11))
    np.testing.assert_allclose(ic.local_variance_map(img, 3),
                               naive_variance_map(img, 3), atol=1e-12)


def test_variance_negation_invariant(rng):
    img = rng.random((12, 12))
    a = ic.local_variance_map(img, 3)
    b = ic.local_variance_map(1.0 - img, 3)
    np.testing.assert_allclose(a, b, atol=1e-12)


def test_variance_shift_invariant(rng):
    img = rng.random((12, 12)) * 0.5
    a = ic.local_variance_map(img, 3)
    b = ic.local_variance_map(img + 0.25, 3)
    np.testing.assert_allclose(a, b, atol=1e-12)


def test_variance_even_window_errors(gray_image):
    with pytest.raises(ValueError):
        ic.local_variance_map(gray_image, 4)


def test_variance_rejects_color_input(rgb_image):
    with pytest.raises(ValueError):
        ic.local_variance_map(rgb_image, 3)


# --- 8-bit I/O ---------------------------------------------------------------


def test_png_round_trip(tmp_path, rng):
    img = rng.random((16, 20, 3))
    path = tmp_path / "x.png"
    ic.save_png(path, img)
    back = ic.load_image(path)
    assert back.shape == img.shape
    assert np.abs(back - img).max() <= 0.5 / 255.0 + 1e-12


def test_png_gray_round_trip(tmp_path, rng):
    img = rng.random((16, 20))
    path = tmp_path / "g.png"
    ic.save_png(path, img)
    back = ic.load_image(path)
    assert back.shape == img.shape
    assert np.abs(back - img).max() <= 0.5 / 255.0 + 1e-12


def test_load_missing_file_errors(tmp_path):
    with pytest.raises(FileNotFoundError):
        ic.load_image(tmp_path / "nope.png")


def test_deterministic_ops(rng):
    img = rng.random((32, 32))
    k = np.full((3, 3), 1.0 / 9.0)
    assert np.array_equal(ic.convolve2d(img, k), ic.convolve2d(img, k))
    assert np.array_equal(ic.resize(img, 21, 19), ic.resize(img, 21, 19))
    a = ic.laplacian_pyramid(img, 3)
    b = ic.laplacian_pyramid(img, 3)
    assert all(np.array_equal(x, y) for x, y in zip(a.levels, b.levels))
    assert np.array_equal(a.residual, b.residual)
