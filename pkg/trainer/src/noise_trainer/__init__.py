"""Offline trainer for the greenprior noise-level classifier.

Builds labeled 128x128 green-tile datasets (synthetic manifests or
clean/noisy pair folders labeled by sweeping the denoising engine), trains
the pinned CNN, and exports portable GCPW weight files the engine loads
directly.  The engine itself is only ever touched through its command line
and the weight-file format.
"""

from .dataset import (
    TrainingSample,
    cut_tiles,
    green_plane,
    load_manifest,
    pair_folder,
    split_by_scene,
    synthesize_samples,
)
from .export import ExportError, export_weights, numpy_logits, read_weights, write_weights
from .labeling import EngineError, generate_labels, label_tile, score_tile
from .model import ARCHITECTURE, INPUT_SCALING, SigmaClassifier, new_model
from .train import EpochStats, evaluate, train_classifier, write_log

RAW_SIGMA_GRID = (1.25, 2.5, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 40.0, 50.0)
SRGB_SIGMA_GRID = (1.25, 5.0, 10.0, 20.0, 30.0, 40.0, 50.0, 60.0, 80.0, 100.0, 120.0, 140.0)

__version__ = "0.1.0"
