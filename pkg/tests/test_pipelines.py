"""Pipeline tests: Bayer packing, sRGB/raw/video/cube flows, identities."""

import numpy as np
import pytest

from greenprior import (
    BAYER_LAYOUTS,
    DenoiseConfig,
    HsiConfig,
    VideoConfig,
    add_awgn,
    denoise_hsi,
    denoise_plane,
    denoise_raw,
    denoise_srgb,
    denoise_video,
    pack_bayer,
    psnr,
    unpack_bayer,
)
from greenprior.charts import cfa_mosaic, piecewise_chart, spectral_cube, video_pan

FAST = DenoiseConfig(stride=6)


class TestBayerPacking:
    def test_rggb_cell_packs_to_rggb_tube(self):
        cell = np.array([[10.0, 20.0], [21.0, 30.0]])
        assert list(pack_bayer(cell, "RGGB").ravel()) == [10.0, 20.0, 21.0, 30.0]

    def test_every_layout_normalizes_to_rggb_order(self):
        # one 2x2 cell per layout, sites labeled by channel value
        values = {"R": 100.0, "G1": 50.0, "G2": 60.0, "B": 200.0}
        cells = {
            "RGGB": [[values["R"], values["G1"]], [values["G2"], values["B"]]],
            "BGGR": [[values["B"], values["G1"]], [values["G2"], values["R"]]],
            "GRBG": [[values["G1"], values["R"]], [values["B"], values["G2"]]],
            "GBRG": [[values["G1"], values["B"]], [values["R"], values["G2"]]],
        }
        for layout, cell in cells.items():
            packed = pack_bayer(np.array(cell, dtype=float), layout).ravel()
            assert packed[0] == values["R"], layout
            assert packed[3] == values["B"], layout
            assert {packed[1], packed[2]} == {values["G1"], values["G2"]}, layout

    def test_constant_mosaic_gives_constant_channels(self):
        packed = pack_bayer(np.full((8, 8), 42.0), "GRBG")
        assert np.all(packed == 42.0)

    def test_round_trip_exact_for_all_layouts(self):
        mosaic = np.random.default_rng(0).uniform(0, 255, (64, 64))
        for layout in BAYER_LAYOUTS:
            assert np.array_equal(unpack_bayer(pack_bayer(mosaic, layout), layout), mosaic)

    def test_odd_dimensions_rejected(self):
        with pytest.raises(ValueError):
            pack_bayer(np.zeros((7, 8)))

    def test_unknown_layout_rejected(self):
        with pytest.raises(ValueError):
            pack_bayer(np.zeros((8, 8)), "RGBO")


class TestSrgbPipeline:
    def test_sigma_zero_identity(self):
        img = piecewise_chart(48, 48, seed=1)
        assert np.abs(denoise_srgb(img, FAST, sigma=0.0) - img).max() < 1e-6

    def test_awgn_gain_of_five_db(self):
        clean = piecewise_chart(96, 96, seed=2)
        noisy = add_awgn(clean, 25.0, seed=3)
        out = denoise_srgb(noisy, DenoiseConfig(), sigma=25.0)
        assert psnr(clean, out) - psnr(clean, noisy) >= 5.0

    def test_wrong_channel_count_rejected(self):
        with pytest.raises(ValueError):
            denoise_srgb(np.zeros((32, 32, 4)), FAST)


class TestRawPipeline:
    def test_sigma_zero_identity(self):
        mosaic = cfa_mosaic(piecewise_chart(64, 64, seed=4), "BGGR")
        out = denoise_raw(mosaic, "BGGR", FAST, sigma=0.0)
        assert np.abs(out - mosaic).max() < 1e-6

    def test_heteroscedastic_noise_gain(self):
        mosaic = cfa_mosaic(piecewise_chart(128, 128, seed=5), "RGGB")
        level = 4.0 + 12.0 * mosaic / 255.0  # intensity-dependent noise
        noisy = mosaic + np.random.default_rng(6).standard_normal(mosaic.shape) * level
        out = denoise_raw(noisy, "RGGB", DenoiseConfig(), sigma=10.0)
        assert psnr(mosaic, out) - psnr(mosaic, noisy) >= 3.0

    def test_odd_mosaic_rejected(self):
        with pytest.raises(ValueError):
            denoise_raw(np.zeros((33, 32)), "RGGB", FAST)


class TestVideoPipeline:
    def test_single_frame_window_matches_image_path_bitwise(self):
        frames = video_pan(3, 48, 48, seed=7)
        noisy = np.stack([add_awgn(f, 15.0, seed=8 + i) for i, f in enumerate(frames)])
        video_out = denoise_video(noisy, VideoConfig(base=FAST, temporal_window=1), sigma=15.0)
        frame_out = np.stack([denoise_srgb(noisy[i], FAST, sigma=15.0) for i in range(3)])
        assert np.array_equal(video_out, frame_out)

    def test_static_scene_beats_single_frame(self):
        clean = piecewise_chart(96, 96, seed=9)
        stack = np.stack([add_awgn(clean, 25.0, seed=10 + i) for i in range(3)])
        multi = denoise_video(stack, VideoConfig(base=DenoiseConfig(), temporal_window=3), 25.0)
        single = denoise_srgb(stack[1], DenoiseConfig(), sigma=25.0)
        assert psnr(clean, multi[1]) > psnr(clean, single)

    def test_sigma_zero_identity(self):
        frames = video_pan(3, 48, 48, seed=11)
        out = denoise_video(frames, VideoConfig(base=FAST, temporal_window=3), sigma=0.0)
        assert np.abs(out - frames).max() < 1e-6

    def test_even_window_rejected(self):
        with pytest.raises(ValueError):
            VideoConfig(temporal_window=2)


class TestHsiPipeline:
    def test_four_band_cube_equals_plane_denoiser(self):
        cube = np.stack(
            [piecewise_chart(48, 48, seed=12)[:, :, i % 3] for i in range(4)], axis=2
        )
        noisy = add_awgn(cube, 10.0, seed=13)
        assert np.array_equal(
            denoise_hsi(noisy, HsiConfig(base=FAST), sigma=10.0),
            denoise_plane(noisy, FAST, sigma=10.0),
        )

    def test_sigma_zero_identity_with_band_padding(self):
        cube = spectral_cube(48, 48, 6, seed=14)  # 6 bands: padded to 8
        out = denoise_hsi(cube, HsiConfig(base=FAST), sigma=0.0)
        assert out.shape == cube.shape
        assert np.abs(out - cube).max() < 1e-6

    def test_member_origins_propagate_to_every_band_group(self):
        cube = spectral_cube(48, 48, 8, seed=15)
        noisy = add_awgn(cube, 10.0, seed=16)
        trace = []
        denoise_hsi(noisy, HsiConfig(base=FAST), sigma=10.0, origin_trace=trace)
        per_ref = {}
        for group_index, ref, origins in trace:
            per_ref.setdefault(ref, {})[group_index] = origins
        assert per_ref
        for groups in per_ref.values():
            assert len(groups) == 2
            assert len(set(groups.values())) == 1

    def test_denoising_actually_helps_on_a_noisy_cube(self):
        cube = spectral_cube(64, 64, 8, seed=17)
        noisy = add_awgn(cube, 20.0, seed=18)
        out = denoise_hsi(noisy, HsiConfig(base=DenoiseConfig()), sigma=20.0)
        assert psnr(cube, out) > psnr(cube, noisy) + 3.0
