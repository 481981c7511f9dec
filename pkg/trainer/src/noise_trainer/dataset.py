"""Training data assembly: synthetic manifests and clean/noisy pair folders.

Two sources feed the trainer:

* a synthesis manifest -- clean images plus a sigma list and seed; tiles are
  cut from the green channel and labeled by the sigma injected into them.
  Clean-clean augmentation assigns small-sigma labels to noise-free tiles,
  which counters the heavy-noise skew of real captures.
* a pair folder -- files named ``<scene>_clean.<ext>`` / ``<scene>_noisy.<ext>``;
  labels come from sweeping the engine (see `labeling`).

Tiles are 128x128 green planes scaled to [0, 1].  Splits are by scene so no
scene leaks between train and validation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

TILE = 128


@dataclass(frozen=True)
class TrainingSample:
    """One green tile in [0, 1], its sigma-grid label, and where it came from."""

    tile: np.ndarray
    label: int
    scene: str


def green_plane(img: np.ndarray) -> np.ndarray:
    img = np.asarray(img, dtype=float)
    if img.ndim == 2:
        return img
    if img.ndim == 3 and img.shape[2] == 3:
        return img[:, :, 1]
    if img.ndim == 3 and img.shape[2] == 4:
        return 0.5 * (img[:, :, 1] + img[:, :, 2])
    raise ValueError(f"cannot take a green plane of shape {img.shape}")


def tile_origins(length: int, tile: int = TILE) -> list[int]:
    if length < tile:
        raise ValueError(f"image extent {length} is smaller than one {tile} tile")
    xs = list(range(0, length - tile + 1, tile))
    if xs[-1] != length - tile:
        xs.append(length - tile)
    return xs


def cut_tiles(img: np.ndarray) -> list[np.ndarray]:
    """All 128x128 green tiles of an image, scaled to [0, 1]."""
    plane = green_plane(img) / 255.0
    return [
        plane[r : r + TILE, c : c + TILE]
        for r in tile_origins(plane.shape[0])
        for c in tile_origins(plane.shape[1])
    ]


def synthesize_samples(
    images: list[np.ndarray],
    grid: tuple[float, ...],
    seed: int = 0,
    scenes: list[str] | None = None,
    clean_clean_labels: tuple[int, ...] = (),
) -> list[TrainingSample]:
    """Tiles with noise injected at every grid level, labeled by that level.

    `clean_clean_labels` additionally emits noise-free tiles carrying the
    given small-sigma labels (class-imbalance augmentation).
    """
    if scenes is None:
        scenes = [f"scene{i}" for i in range(len(images))]
    rng = np.random.default_rng(seed)
    samples: list[TrainingSample] = []
    for img, scene in zip(images, scenes):
        plane = green_plane(img)
        for label, sigma in enumerate(grid):
            noisy = plane + sigma * rng.standard_normal(plane.shape)
            for r in tile_origins(plane.shape[0]):
                for c in tile_origins(plane.shape[1]):
                    samples.append(
                        TrainingSample(
                            tile=(noisy[r : r + TILE, c : c + TILE] / 255.0).astype(
                                np.float32
                            ),
                            label=label,
                            scene=scene,
                        )
                    )
        for label in clean_clean_labels:
            if not 0 <= label < len(grid):
                raise ValueError(f"clean-clean label {label} outside the grid")
            for r in tile_origins(plane.shape[0]):
                for c in tile_origins(plane.shape[1]):
                    samples.append(
                        TrainingSample(
                            tile=(plane[r : r + TILE, c : c + TILE] / 255.0).astype(
                                np.float32
                            ),
                            label=label,
                            scene=scene,
                        )
                    )
    return samples


def load_manifest(path) -> dict:
    """Read a synthesis manifest: {images: [paths], sigmas: [...], seed: n,
    space: raw|srgb, clean_clean_labels: [...]} with paths relative to it."""
    path = Path(path)
    spec = json.loads(path.read_text())
    for key in ("images", "sigmas"):
        if key not in spec:
            raise ValueError(f"manifest missing {key!r}")
    spec.setdefault("seed", 0)
    spec.setdefault("space", "srgb")
    spec.setdefault("clean_clean_labels", [])
    spec["images"] = [str((path.parent / p).resolve()) for p in spec["images"]]
    return spec


def pair_folder(path) -> list[tuple[str, Path, Path]]:
    """(scene, clean path, noisy path) triples from a pair folder."""
    path = Path(path)
    pairs = []
    for clean in sorted(path.glob("*_clean.*")):
        scene = clean.name.rsplit("_clean.", 1)[0]
        matches = sorted(path.glob(f"{scene}_noisy.*"))
        if not matches:
            raise ValueError(f"no noisy mate for {clean.name}")
        pairs.append((scene, clean, matches[0]))
    if not pairs:
        raise ValueError(f"no *_clean.* files under {path}")
    return pairs


def split_by_scene(
    samples: list[TrainingSample], val_fraction: float = 0.1, seed: int = 0
) -> tuple[list[TrainingSample], list[TrainingSample]]:
    """Train/validation split on whole scenes, never on tiles."""
    scenes = sorted({s.scene for s in samples})
    rng = np.random.default_rng(seed)
    rng.shuffle(scenes)
    n_val = max(1, int(round(val_fraction * len(scenes)))) if len(scenes) > 1 else 0
    val_scenes = set(scenes[:n_val])
    train = [s for s in samples if s.scene not in val_scenes]
    val = [s for s in samples if s.scene in val_scenes]
    return train, val
