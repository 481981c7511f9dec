"""Dataset assembly: tiles, synthetic labeling, manifests, scene splits."""

import json

import numpy as np
import pytest

import noise_trainer as nt


def chart(seed, size=256):
    rng = np.random.default_rng(seed)
    base = rng.uniform(40, 200, size=3)
    img = np.empty((size, size, 3))
    ramp = np.linspace(0, 55, size)
    for c in range(3):
        img[:, :, c] = base[c] + ramp[None, :]
    return img


class TestTiles:
    def test_green_plane_variants(self):
        img3 = np.random.default_rng(0).uniform(0, 255, (130, 130, 3))
        assert np.array_equal(nt.green_plane(img3), img3[:, :, 1])
        img4 = np.random.default_rng(1).uniform(0, 255, (130, 130, 4))
        assert np.allclose(nt.green_plane(img4), 0.5 * (img4[:, :, 1] + img4[:, :, 2]))

    def test_cut_tiles_scales_to_unit_range(self):
        tiles = nt.cut_tiles(chart(2, 300))
        assert len(tiles) == 9  # 3 x 3 tile grid with flush edges
        for tile in tiles:
            assert tile.shape == (128, 128)
            assert 0.0 <= tile.min() and tile.max() <= 1.0

    def test_too_small_image_raises(self):
        with pytest.raises(ValueError):
            nt.cut_tiles(np.zeros((100, 100, 3)))


class TestSynthesis:
    def test_labels_span_the_grid(self):
        grid = (5.0, 20.0, 60.0)
        samples = nt.synthesize_samples([chart(3)], grid, seed=0)
        labels = {s.label for s in samples}
        assert labels == {0, 1, 2}
        assert all(s.label < len(grid) for s in samples)
        assert len(samples) == 4 * 3  # 2x2 tiles, 3 noise levels

    def test_clean_clean_augmentation_adds_small_sigma_labels(self):
        grid = (1.25, 5.0, 10.0, 40.0)
        plain = nt.synthesize_samples([chart(4)], grid, seed=0)
        augmented = nt.synthesize_samples(
            [chart(4)], grid, seed=0, clean_clean_labels=(0, 1, 2)
        )
        extra = len(augmented) - len(plain)
        assert extra == 4 * 3  # one noise-free tile set per injected label
        clean_tiles = [s for s in augmented[len(plain):]]
        assert {s.label for s in clean_tiles} == {0, 1, 2}

    def test_out_of_grid_augmentation_label_rejected(self):
        with pytest.raises(ValueError):
            nt.synthesize_samples([chart(5)], (5.0, 10.0), clean_clean_labels=(7,))

    def test_synthesis_is_seeded(self):
        a = nt.synthesize_samples([chart(6)], (10.0,), seed=3)
        b = nt.synthesize_samples([chart(6)], (10.0,), seed=3)
        assert all(np.array_equal(x.tile, y.tile) for x, y in zip(a, b))


class TestManifest:
    def test_round_trip_with_relative_paths(self, tmp_path):
        img_path = tmp_path / "scene0.npy"
        np.save(img_path, chart(7))
        manifest = {
            "images": ["scene0.npy"],
            "sigmas": [1.25, 5.0, 10.0],
            "seed": 4,
            "space": "srgb",
            "clean_clean_labels": [0],
        }
        path = tmp_path / "manifest.json"
        path.write_text(json.dumps(manifest))
        spec = nt.load_manifest(path)
        assert spec["images"] == [str(img_path.resolve())]
        assert spec["sigmas"] == [1.25, 5.0, 10.0]

    def test_missing_keys_rejected(self, tmp_path):
        path = tmp_path / "manifest.json"
        path.write_text(json.dumps({"images": []}))
        with pytest.raises(ValueError):
            nt.load_manifest(path)


class TestPairFolder:
    def test_pairs_discovered(self, tmp_path):
        for scene in ("a", "b"):
            (tmp_path / f"{scene}_clean.png").write_bytes(b"x")
            (tmp_path / f"{scene}_noisy.png").write_bytes(b"x")
        pairs = nt.pair_folder(tmp_path)
        assert [p[0] for p in pairs] == ["a", "b"]

    def test_missing_mate_rejected(self, tmp_path):
        (tmp_path / "a_clean.png").write_bytes(b"x")
        with pytest.raises(ValueError):
            nt.pair_folder(tmp_path)


class TestSplit:
    def test_split_never_mixes_scenes(self):
        samples = nt.synthesize_samples(
            [chart(s) for s in range(6)], (5.0, 40.0), seed=0
        )
        train, val = nt.split_by_scene(samples, val_fraction=0.34, seed=1)
        train_scenes = {s.scene for s in train}
        val_scenes = {s.scene for s in val}
        assert train_scenes.isdisjoint(val_scenes)
        assert len(val_scenes) == 2
        assert len(train) + len(val) == len(samples)
