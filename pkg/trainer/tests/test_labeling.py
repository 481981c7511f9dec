"""Label generation through the engine subprocess (slow: real denoise sweeps)."""

import os
import sys

import numpy as np
import pytest

import greenprior as gp
import noise_trainer as nt


@pytest.fixture(autouse=True)
def engine_via_module(monkeypatch):
    # invoke the installed engine through the current interpreter
    monkeypatch.setenv("GREENPRIOR_ENGINE", f"{sys.executable} -m greenprior.cli")


SMALL_GRID = (1.25, 5.0, 10.0, 20.0, 30.0)


class TestScoreTile:
    def test_engine_report_parses(self):
        clean = gp.piecewise_chart(128, 128, seed=0)
        noisy = gp.add_awgn(clean, 10.0, seed=1)
        score = nt.score_tile(clean, noisy, 10.0)
        assert 20.0 < score < 50.0

    def test_engine_failure_surfaces(self, monkeypatch):
        monkeypatch.setenv("GREENPRIOR_ENGINE", f"{sys.executable} -c 'raise SystemExit(3)'")
        with pytest.raises(nt.EngineError):
            nt.score_tile(np.zeros((128, 128, 3)), np.zeros((128, 128, 3)), 5.0)


class TestLabelTile:
    def test_clean_pair_labels_lowest_sigma(self):
        clean = gp.piecewise_chart(128, 128, seed=2)
        label = nt.label_tile(clean, clean.copy(), SMALL_GRID)
        assert label == 0

    def test_awgn_tile_labels_near_its_true_sigma(self):
        clean = gp.piecewise_chart(128, 128, seed=3)
        noisy = gp.add_awgn(clean, 10.0, seed=4)
        label = nt.label_tile(clean, noisy, SMALL_GRID)
        true_index = SMALL_GRID.index(10.0)
        assert abs(label - true_index) <= 1


class TestGenerateLabels:
    def test_tile_grid_covered_and_parallel_matches_serial(self):
        clean = gp.piecewise_chart(128, 256, seed=5)
        noisy = gp.add_awgn(clean, 20.0, seed=6)
        grid = (5.0, 20.0)
        serial = nt.generate_labels(clean, noisy, grid, workers=1)
        parallel = nt.generate_labels(clean, noisy, grid, workers=4)
        assert serial == parallel
        assert [origin for origin, _ in serial] == [(0, 0), (0, 128)]
        assert all(label == 1 for _, label in serial)

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValueError):
            nt.generate_labels(
                np.zeros((128, 128, 3)), np.zeros((128, 130, 3)), (5.0, 10.0)
            )
