import numpy as np
import pytest

from lerf import (
    ConfigError,
    Flow,
    Homography,
    ImageBuffer,
    ParameterError,
    Scale,
    ShapeError,
    PreprocessConfig,
    ResampleJob,
    downsample_lerf,
    make_constant_bank,
    preprocess,
    resample,
    resample_fixed,
    resample_lerf,
    save_image,
)
from lerf.kernels import (
    amplified_linear,
    aniso_gaussian,
    keys_cubic,
    lanczos,
    linear,
    nearest,
)
from lerf.resample import antialias_preproc, enhancer_preproc, external_preproc, identity_preproc

from conftest import five_transforms as transforms_for
from conftest import random_image, smooth_image


def test_nearest_duplicates_2x2():
    src = ImageBuffer(np.array([[0.1, 0.2], [0.3, 0.4]])[:, :, None])
    res = resample_fixed(ResampleJob(src, Scale(2, 2), nearest(), (4, 4)))
    expected = np.array([
        [0.1, 0.1, 0.2, 0.2],
        [0.1, 0.1, 0.2, 0.2],
        [0.3, 0.3, 0.4, 0.4],
        [0.3, 0.3, 0.4, 0.4],
    ])
    np.testing.assert_array_equal(res.image.plane(), expected)


def test_constant_image_preserved_all_kernels():
    src = ImageBuffer(np.full((10, 12, 3), 0.375))
    bank = make_constant_bank(aniso_gaussian(), [0.3, 2.0, 1.0])
    bank_l = make_constant_bank(amplified_linear(), [1.7])
    for tf in transforms_for((10, 12), (13, 17)):
        for kern, b in [(nearest(), None), (linear(), None), (keys_cubic(), None),
                        (lanczos(2), None), (lanczos(3), None),
                        (aniso_gaussian(), bank), (amplified_linear(), bank_l)]:
            res = resample(ResampleJob(src, tf, kern, (13, 17), bank=b))
            out = res.image.data[res.valid]
            np.testing.assert_allclose(out, 0.375, rtol=0, atol=1e-15)
            np.testing.assert_array_equal(res.image.data[~res.valid], 0.0)


def test_alpha_one_equals_bilinear_exactly():
    for seed in range(3):
        src = random_image(seed, 9, 11)
        amap = np.ones((9, 11, 1))
        for tf in transforms_for((9, 11), (14, 10)):
            lin = resample_fixed(ResampleJob(src, tf, linear(), (14, 10)))
            ada = resample_lerf(
                ResampleJob(src, tf, amplified_linear(), (14, 10), hyper_map=amap)
            )
            np.testing.assert_allclose(ada.image.data, lin.image.data, atol=1e-9)
            np.testing.assert_array_equal(ada.valid, lin.valid)


def brute_force_gauss(src: ImageBuffer, theta: np.ndarray, r_h, r_w, tgt_hw):
    """Slow per-pixel reference for the adaptive Gaussian path."""
    h, w = src.height, src.width
    out = np.zeros(tgt_hw + (src.channels,))
    for ty in range(tgt_hw[0]):
        for tx in range(tgt_hw[1]):
            sy = (ty + 0.5) / r_h - 0.5
            sx = (tx + 0.5) / r_w - 0.5
            by, bx = int(np.floor(sy)), int(np.floor(sx))
            ws, vals = [], []
            for dy in (0, 1):
                for dx in (0, 1):
                    yy = min(max(by + dy, 0), h - 1)
                    xx = min(max(bx + dx, 0), w - 1)
                    rho, isx, isy = theta[yy, xx]
                    u = sx - (bx + dx)
                    v = sy - (by + dy)
                    q = (u * u * isx**2 - 2 * rho * isx * isy * u * v + v * v * isy**2)
                    q /= 1 - rho * rho
                    ws.append(np.exp(-0.5 * q))
                    vals.append(src.data[yy, xx])
            ws = np.array(ws)
            ws /= ws.sum()
            out[ty, tx] = (ws[:, None] * np.array(vals)).sum(axis=0)
    return out


def test_adaptive_gaussian_matches_brute_force(rng):
    src = random_image(11, 6, 7)
    theta = np.stack([
        rng.uniform(-0.9, 0.9, (6, 7)),
        rng.uniform(0.2, 3.5, (6, 7)),
        rng.uniform(0.2, 3.5, (6, 7)),
    ], axis=-1)
    job = ResampleJob(src, Scale(1.8, 1.3), aniso_gaussian(), (10, 9), hyper_map=theta)
    res = resample_lerf(job)
    ref = brute_force_gauss(src, theta, 1.8, 1.3, (10, 9))
    np.testing.assert_allclose(res.image.data, ref, atol=1e-12)


def test_frozen_bank_equals_explicit_constant_map():
    src = random_image(2, 8, 8)
    bank = make_constant_bank(aniso_gaussian(), [0.0, 1.0, 1.0])
    amap = np.zeros((8, 8, 3))
    amap[..., 1:] = 1.0
    r_bank = resample_lerf(ResampleJob(src, Scale(2, 2), aniso_gaussian(), (16, 16), bank=bank))
    r_map = resample_lerf(ResampleJob(src, Scale(2, 2), aniso_gaussian(), (16, 16), hyper_map=amap))
    np.testing.assert_array_equal(r_bank.image.data, r_map.image.data)


def test_determinism_bitwise():
    src = random_image(5, 16, 16)
    bank = make_constant_bank(aniso_gaussian(), [0.2, 1.5, 0.8])
    job = ResampleJob(src, Scale(1.7, 2.3), aniso_gaussian(), (27, 36), bank=bank)
    a = resample(job).image.data
    b = resample(job).image.data
    np.testing.assert_array_equal(a, b)


def test_invalid_pixels_zeroed_and_masked():
    src = smooth_image(3, 12, 12)
    m = np.array([[1.0, 0, 6.0], [0, 1.0, 4.0], [0, 0, 1.0]])  # shift off the raster
    res = resample_fixed(ResampleJob(src, Homography(m), keys_cubic(), (12, 12)))
    assert not res.valid.all() and res.valid.any()
    np.testing.assert_array_equal(res.image.data[~res.valid], 0.0)
    assert np.all(res.image.data[res.valid] > 0)


def test_fixed_rejects_adaptive_and_vice_versa():
    src = random_image(1, 4, 4)
    with pytest.raises(ConfigError):
        resample_fixed(ResampleJob(src, Scale(2, 2), aniso_gaussian(), (8, 8)))
    with pytest.raises(ConfigError):
        resample_lerf(ResampleJob(src, Scale(2, 2), linear(), (8, 8)))


def test_lerf_requires_bank_or_map_and_matching_family():
    src = random_image(1, 4, 4)
    with pytest.raises(ConfigError):
        resample_lerf(ResampleJob(src, Scale(2, 2), aniso_gaussian(), (8, 8)))
    bank = make_constant_bank(amplified_linear(), [1.0])
    with pytest.raises(ConfigError):
        resample_lerf(ResampleJob(src, Scale(2, 2), aniso_gaussian(), (8, 8), bank=bank))
    with pytest.raises(ShapeError):
        resample_lerf(ResampleJob(src, Scale(2, 2), aniso_gaussian(), (8, 8),
                                  hyper_map=np.ones((3, 3, 3))))


def test_bad_target_dims():
    src = random_image(1, 4, 4)
    with pytest.raises(ParameterError):
        resample_fixed(ResampleJob(src, Scale(2, 2), linear(), (0, 8)))


def test_preprocess_identity_and_aa_constant():
    img = ImageBuffer(np.full((8, 8, 1), 0.5))
    assert preprocess(img, identity_preproc()) is img
    out = preprocess(img, antialias_preproc(0.7))
    np.testing.assert_allclose(out.data, 0.5, atol=1e-15)


def test_preprocess_enhancer_and_external(tmp_path):
    img = random_image(9, 6, 6)
    bank = make_constant_bank(aniso_gaussian(), [0.0, 1.0, 1.0], enhancer_residual=0.0)
    out = preprocess(img, enhancer_preproc(), bank)
    np.testing.assert_array_equal(out.data, img.data)
    with pytest.raises(ConfigError):
        preprocess(img, enhancer_preproc(), make_constant_bank(aniso_gaussian(), [0, 1, 1]))

    p = tmp_path / "ext.png"
    save_image(img, p)
    out = preprocess(img, external_preproc(str(p)))
    np.testing.assert_array_equal(out.data, img.data)
    save_image(random_image(1, 3, 3), p)
    with pytest.raises(ShapeError):
        preprocess(img, external_preproc(str(p)))


def test_preprocess_config_validation():
    with pytest.raises(ConfigError):
        PreprocessConfig("antialias", sigma=0.0)
    with pytest.raises(ConfigError):
        PreprocessConfig("warp9000")
    with pytest.raises(ConfigError):
        PreprocessConfig("external")


def test_downsample_constant_and_dims():
    src = ImageBuffer(np.full((16, 20, 3), 0.25))
    bank = make_constant_bank(aniso_gaussian(), [0.0, 1.0, 1.0])
    job = ResampleJob(src, Scale(0.5, 0.5), aniso_gaussian(), (8, 10), bank=bank)
    res = downsample_lerf(job)
    assert res.image.data.shape == (8, 10, 3)
    np.testing.assert_allclose(res.image.data, 0.25, atol=1e-12)
    with pytest.raises(ParameterError):
        downsample_lerf(ResampleJob(src, Scale(0.5, 2.0), aniso_gaussian(), (8, 40), bank=bank))
    with pytest.raises(ConfigError):
        downsample_lerf(ResampleJob(src, Homography(np.eye(3)), aniso_gaussian(), (8, 10), bank=bank))


def _high_band_energy(img: np.ndarray) -> float:
    """Row-FFT energy above half band, summed over rows."""
    spec = np.abs(np.fft.rfft(img[:, :, 0], axis=1)) ** 2
    cut = spec.shape[1] // 2
    return float(spec[:, cut:].sum())


def test_aa_downsampling_damps_high_band():
    # aliasing-prone vertical stripes: period 3 in the source folds above the
    # output half band at r = 0.5
    w = 96
    stripes = ((np.arange(w)[None, :] % 3) < 1).astype(np.float64)
    src = ImageBuffer(np.repeat(stripes, 32, axis=0)[:, :, None])
    bank = make_constant_bank(aniso_gaussian(), [0.0, 1.0, 1.0])
    tgt = (16, 48)
    no_aa = resample_lerf(
        ResampleJob(src, Scale(0.5, 0.5), aniso_gaussian(), tgt, bank=bank)
    )
    with_aa = downsample_lerf(
        ResampleJob(src, Scale(0.5, 0.5), aniso_gaussian(), tgt, bank=bank)
    )
    e_no = _high_band_energy(no_aa.image.data - no_aa.image.data.mean())
    e_aa = _high_band_energy(with_aa.image.data - with_aa.image.data.mean())
    assert e_aa <= 0.5 * e_no
