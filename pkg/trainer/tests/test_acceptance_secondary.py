"""Cross-component acceptance: the two criteria that need trained weights.

Run with ``pytest tests/test_acceptance_secondary.py -v -s``.  One training
run (synthetic green tiles spanning the sRGB grid) feeds both criteria:

* weight-file parity -- the engine must reproduce trainer logits to 1e-4 on
  a fixture tile;
* learned-estimator efficacy -- held-out within-one-class accuracy >= 90 %,
  and engine denoising driven by the trained weights lands within 0.5 dB of
  the best fixed-sigma run for each test image.
"""

import json
import subprocess
import sys

import numpy as np
import pytest
import torch

import greenprior as gp
import noise_trainer as nt


def report(name: str, ok: bool, detail: str) -> None:
    print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    assert ok, f"{name}: {detail}"


@pytest.fixture(scope="module")
def trained(tmp_path_factory):
    """One real training run shared by both criteria."""
    images = [gp.piecewise_chart(384, 384, seed=s) for s in range(8)]
    samples = nt.synthesize_samples(
        images, nt.SRGB_SIGMA_GRID, seed=0, clean_clean_labels=(0,)
    )
    train_set, val_set = nt.split_by_scene(samples, seed=0)
    model, history = nt.train_classifier(
        train_set, val_set, classes=len(nt.SRGB_SIGMA_GRID), epochs=40, seed=0
    )
    path = tmp_path_factory.mktemp("weights") / "trained.gcpw"
    fixture_tile = nt.export_weights(model, nt.SRGB_SIGMA_GRID, "srgb", path)
    return model, path, fixture_tile, val_set, history


def run_engine(args: list[str]) -> dict:
    proc = subprocess.run(
        [sys.executable, "-m", "greenprior.cli"] + args,
        capture_output=True,
        text=True,
        check=True,
    )
    return json.loads(proc.stdout)


def test_cross_component_parity(trained):
    """Trainer-exported weights load in the engine and reproduce fixture-tile
    logits to 1e-4."""
    model, path, fixture_tile, _, _ = trained
    clf = gp.load_weights(path)
    _, engine_logits = gp.classify_tile(clf, fixture_tile)
    with torch.no_grad():
        torch_logits = (
            model.double()(
                torch.from_numpy((fixture_tile / 255.0)[None, None]).double()
            )
            .numpy()
            .ravel()
        )
    model.float()
    worst = float(np.abs(engine_logits - torch_logits).max())
    report("cross-component parity", worst < 1e-4, f"max logit diff {worst:.2e}")


def test_learned_estimator_efficacy(trained, tmp_path):
    """Held-out within-one-class accuracy >= 90 %, and CLI denoising with the
    trained weights within 0.5 dB of the best fixed-sigma run per image."""
    model, weights_path, _, val_set, history = trained
    _, approx = nt.evaluate(model, val_set)
    accuracy_ok = approx >= 0.90

    gaps = {}
    for sigma_true, img_seed in ((10.0, 20), (40.0, 21)):
        clean = gp.piecewise_chart(320, 320, seed=img_seed)
        noisy = gp.add_awgn(clean, sigma_true, seed=img_seed + 5)
        clean_path = tmp_path / f"clean{img_seed}.gcpt"
        noisy_path = tmp_path / f"noisy{img_seed}.gcpt"
        out_path = tmp_path / f"out{img_seed}.gcpt"
        gp.save_container(clean_path, clean, "image")
        gp.save_container(noisy_path, noisy, "image")
        common = ["--ref", str(clean_path), "--report", "json", "--stride", "8"]
        rep = run_engine(
            ["denoise", "image", str(noisy_path), str(out_path),
             "--weights", str(weights_path)] + common
        )
        cnn_psnr = rep["metrics"]["psnr"]
        best = -np.inf
        for sigma in nt.SRGB_SIGMA_GRID:
            rep = run_engine(
                ["denoise", "image", str(noisy_path), str(out_path),
                 "--sigma", str(sigma)] + common
            )
            best = max(best, rep["metrics"]["psnr"])
        gaps[sigma_true] = best - cnn_psnr
    efficacy_ok = all(gap <= 0.5 for gap in gaps.values())

    ok = accuracy_ok and efficacy_ok
    report(
        "learned-estimator efficacy",
        ok,
        f"held-out within-one-class {approx:.3f} (>= 0.90); "
        f"oracle gaps {{10: {gaps[10.0]:.3f}, 40: {gaps[40.0]:.3f}}} dB (<= 0.5)",
    )
