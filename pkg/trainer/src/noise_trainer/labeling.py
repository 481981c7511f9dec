"""Label generation by sweeping the denoising engine over the sigma grid.

For each 128x128 tile of a clean/noisy pair, the engine (the `greenprior`
CLI, invoked as a subprocess so there is exactly one implementation of the
denoiser) runs at every grid sigma; the label is the sigma that scores best
against the clean tile under PSNR or SSIM, ties resolving to the lower
sigma.  A clean pair therefore labels as the lowest class: extra smoothing
can only hurt a noise-free tile.
"""

from __future__ import annotations

import json
import os
import subprocess
import tempfile
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .dataset import TILE, tile_origins

ENGINE_ENV = "GREENPRIOR_ENGINE"


class EngineError(RuntimeError):
    """The denoising engine could not be run or returned garbage."""


def engine_command() -> list[str]:
    """The engine invocation, overridable via GREENPRIOR_ENGINE."""
    override = os.environ.get(ENGINE_ENV)
    if override:
        return override.split()
    return ["greenprior"]


def _save_tile_container(path: Path, tile_rgb: np.ndarray) -> None:
    # minimal GCPT writer (image semantics) so labeling needs no engine import
    import struct

    data = np.ascontiguousarray(tile_rgb, dtype=np.float32)
    with open(path, "wb") as fh:
        fh.write(b"GCPT")
        fh.write(struct.pack("<I", 1))
        fh.write(struct.pack("<I", 5))
        fh.write(b"image")
        fh.write(struct.pack("<I", data.ndim))
        fh.write(struct.pack(f"<{data.ndim}I", *data.shape))
        fh.write(data.tobytes())


def score_tile(
    clean_tile: np.ndarray,
    noisy_tile: np.ndarray,
    sigma: float,
    metric: str = "psnr",
    workdir: Path | None = None,
) -> float:
    """Denoise one RGB tile at `sigma` via the engine; return the metric."""
    if metric not in ("psnr", "ssim"):
        raise ValueError(f"unknown metric {metric!r}")
    with tempfile.TemporaryDirectory(dir=workdir) as tmp:
        tmp = Path(tmp)
        noisy_path = tmp / "noisy.gcpt"
        clean_path = tmp / "clean.gcpt"
        out_path = tmp / "out.gcpt"
        _save_tile_container(noisy_path, noisy_tile)
        _save_tile_container(clean_path, clean_tile)
        cmd = engine_command() + [
            "denoise", "image", str(noisy_path), str(out_path),
            "--sigma", str(sigma), "--ref", str(clean_path), "--report", "json",
        ]
        proc = subprocess.run(cmd, capture_output=True, text=True)
        if proc.returncode != 0:
            raise EngineError(
                f"engine failed (exit {proc.returncode}): {proc.stderr.strip()[:500]}"
            )
        try:
            report = json.loads(proc.stdout)
            return float(report["metrics"][metric])
        except (json.JSONDecodeError, KeyError) as exc:
            raise EngineError(f"unparseable engine report: {exc}") from exc


def label_tile(
    clean_tile: np.ndarray,
    noisy_tile: np.ndarray,
    grid: tuple[float, ...],
    metric: str = "psnr",
) -> int:
    """Best grid index for one tile; ties go to the lower sigma."""
    best_label, best_score = 0, -np.inf
    for label, sigma in enumerate(grid):
        score = score_tile(clean_tile, noisy_tile, sigma, metric)
        if score > best_score:
            best_label, best_score = label, score
    return best_label


def generate_labels(
    clean: np.ndarray,
    noisy: np.ndarray,
    grid: tuple[float, ...],
    metric: str = "psnr",
    workers: int = 4,
) -> list[tuple[tuple[int, int], int]]:
    """Per-tile labels for an aligned clean/noisy image pair.

    Returns ``[((row, col), label), ...]`` over the 128-tile grid.  Tiles
    sweep in parallel; each sweep is its own sequence of engine calls.
    """
    clean = np.asarray(clean, dtype=float)
    noisy = np.asarray(noisy, dtype=float)
    if clean.shape != noisy.shape:
        raise ValueError(f"shape mismatch: {clean.shape} vs {noisy.shape}")
    origins = [
        (r, c)
        for r in tile_origins(clean.shape[0])
        for c in tile_origins(clean.shape[1])
    ]

    def work(origin):
        r, c = origin
        return origin, label_tile(
            clean[r : r + TILE, c : c + TILE],
            noisy[r : r + TILE, c : c + TILE],
            grid,
            metric,
        )

    if workers <= 1:
        return [work(o) for o in origins]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(work, origins))
