"""Trainer command line.

    greenprior-trainer synth MANIFEST OUT.gcpw [--epochs N] [--seed N] ...
    greenprior-trainer label CLEAN NOISY [--space srgb|raw] [--metric psnr|ssim]

`synth` builds a synthetic dataset from a manifest, trains, and exports a
verified weight file (plus a CSV training log next to it).  `label` sweeps
the engine over one clean/noisy pair and prints per-tile labels as JSON.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np
from PIL import Image

from . import RAW_SIGMA_GRID, SRGB_SIGMA_GRID
from .dataset import load_manifest, split_by_scene, synthesize_samples
from .export import export_weights
from .labeling import generate_labels
from .train import train_classifier


def _load_image(path) -> np.ndarray:
    with Image.open(path) as im:
        im.load()
        if im.mode not in ("L", "RGB"):
            im = im.convert("RGB")
        return np.asarray(im, dtype=float)


def _cmd_synth(args) -> int:
    manifest = load_manifest(args.manifest)
    grid = tuple(float(v) for v in manifest["sigmas"])
    images = [_load_image(p) for p in manifest["images"]]
    samples = synthesize_samples(
        images,
        grid,
        seed=int(manifest["seed"]),
        clean_clean_labels=tuple(manifest["clean_clean_labels"]),
    )
    train_set, val_set = split_by_scene(samples, seed=args.seed)
    log_path = Path(args.output).with_suffix(".log.csv")
    model, history = train_classifier(
        train_set,
        val_set,
        classes=len(grid),
        epochs=args.epochs,
        seed=args.seed,
        log_path=log_path,
    )
    export_weights(model, grid, manifest["space"], args.output)
    last = history[-1]
    print(
        json.dumps(
            {
                "output": str(args.output),
                "log": str(log_path),
                "samples": len(samples),
                "final_loss": last.loss,
                "val_accuracy": last.val_accuracy,
                "val_approximate": last.val_approximate,
            },
            indent=2,
        )
    )
    return 0


def _cmd_label(args) -> int:
    grid = SRGB_SIGMA_GRID if args.space == "srgb" else RAW_SIGMA_GRID
    labels = generate_labels(
        _load_image(args.clean),
        _load_image(args.noisy),
        grid,
        metric=args.metric,
        workers=args.workers,
    )
    print(
        json.dumps(
            {
                "space": args.space,
                "metric": args.metric,
                "labels": [
                    {"row": r, "col": c, "label": label, "sigma": grid[label]}
                    for (r, c), label in labels
                ],
            },
            indent=2,
        )
    )
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="greenprior-trainer", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    synth = sub.add_parser("synth", help="train on a synthetic manifest and export weights")
    synth.add_argument("manifest")
    synth.add_argument("output")
    synth.add_argument("--epochs", type=int, default=90)
    synth.add_argument("--seed", type=int, default=0)

    label = sub.add_parser("label", help="sweep the engine to label a clean/noisy pair")
    label.add_argument("clean")
    label.add_argument("noisy")
    label.add_argument("--space", choices=("srgb", "raw"), default="srgb")
    label.add_argument("--metric", choices=("psnr", "ssim"), default="psnr")
    label.add_argument("--workers", type=int, default=4)

    args = parser.parse_args(argv)
    if args.command == "synth":
        return _cmd_synth(args)
    return _cmd_label(args)


if __name__ == "__main__":
    sys.exit(main())
