"""Weight export: serialize a trained model to the GCPW file and verify it.

The writer emits the byte-exact format the engine reads (see the engine
repo's docs/formats.md).  Export always ends with a verification pass: the
file is re-read by this module's own parser, a fixture tile is pushed
through an independent float64 numpy forward pass, and the logits are
compared against the torch model's (in float64) to 1e-4 per logit.  That
catches layout drift between trainer and engine without importing the
engine.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np
import torch

from .model import ARCHITECTURE, INPUT_SCALING, TILE, SigmaClassifier

_MAGIC = b"GCPW"
_VERSION = 1
_LAYERS = ("conv1", "conv2", "fc1", "fc2", "fc3")


class ExportError(RuntimeError):
    pass


def _write_str(fh, text: str) -> None:
    raw = text.encode("utf-8")
    fh.write(struct.pack("<I", len(raw)))
    fh.write(raw)


def write_weights(
    model: SigmaClassifier, grid: tuple[float, ...], space: str, path
) -> None:
    """Serialize model weights plus the sigma grid to a GCPW file."""
    if len(grid) != model.classes:
        raise ExportError(
            f"model has {model.classes} classes but the grid {len(grid)} levels"
        )
    if space not in ("raw", "srgb"):
        raise ExportError(f"unknown grid space {space!r}")
    state = {k: v.detach().cpu().numpy() for k, v in model.state_dict().items()}
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<I", _VERSION))
        _write_str(fh, ARCHITECTURE)
        fh.write(struct.pack("<I", len(grid)))
        fh.write(struct.pack("<I", len(grid)))
        fh.write(struct.pack(f"<{len(grid)}d", *[float(v) for v in grid]))
        _write_str(fh, space)
        _write_str(fh, INPUT_SCALING)
        for name in _LAYERS:
            weight = np.ascontiguousarray(state[f"{name}.weight"], dtype="<f4")
            bias = np.ascontiguousarray(state[f"{name}.bias"], dtype="<f4")
            _write_str(fh, name)
            fh.write(struct.pack("<I", weight.ndim))
            fh.write(struct.pack(f"<{weight.ndim}I", *weight.shape))
            fh.write(weight.tobytes())
            fh.write(bias.tobytes())


def read_weights(path) -> dict:
    """Parse a GCPW file back into {layer: (weights, bias)}, grid, space."""
    raw = Path(path).read_bytes()
    cur = 0

    def take(n: int) -> bytes:
        nonlocal cur
        if cur + n > len(raw):
            raise ExportError(f"{path}: truncated weight file")
        chunk = raw[cur : cur + n]
        cur += n
        return chunk

    def take_str() -> str:
        (n,) = struct.unpack("<I", take(4))
        return take(n).decode("utf-8")

    if take(4) != _MAGIC:
        raise ExportError(f"{path}: bad magic")
    (version,) = struct.unpack("<I", take(4))
    if version != _VERSION:
        raise ExportError(f"{path}: unsupported version {version}")
    arch = take_str()
    if arch != ARCHITECTURE:
        raise ExportError(f"{path}: architecture mismatch")
    (classes,) = struct.unpack("<I", take(4))
    (grid_len,) = struct.unpack("<I", take(4))
    grid = struct.unpack(f"<{grid_len}d", take(8 * grid_len))
    space = take_str()
    scaling = take_str()
    if scaling != INPUT_SCALING:
        raise ExportError(f"{path}: input scaling mismatch")
    layers = {}
    for name in _LAYERS:
        if take_str() != name:
            raise ExportError(f"{path}: layer order mismatch at {name}")
        (rank,) = struct.unpack("<I", take(4))
        dims = struct.unpack(f"<{rank}I", take(4 * rank))
        count = int(np.prod(dims))
        weight = np.frombuffer(take(4 * count), dtype="<f4").reshape(dims)
        bias = np.frombuffer(take(4 * dims[0]), dtype="<f4")
        layers[name] = (weight, bias)
    if cur != len(raw):
        raise ExportError(f"{path}: trailing bytes")
    if classes != grid_len or layers["fc3"][0].shape[0] != classes:
        raise ExportError(f"{path}: class-count disagreement")
    return {"layers": layers, "grid": grid, "space": space}


def numpy_logits(parsed: dict, tile: np.ndarray) -> np.ndarray:
    """Float64 forward pass from parsed file contents; the verification side."""
    if tile.shape != (TILE, TILE):
        raise ValueError(f"expected a {TILE}x{TILE} tile")
    from numpy.lib.stride_tricks import sliding_window_view

    def conv(x, w, b):
        win = sliding_window_view(x, (w.shape[2], w.shape[3]), axis=(1, 2))
        return np.einsum("oiab,ijkab->ojk", w, win) + b[:, None, None]

    def pool(x):
        c, h, w = x.shape
        return x.reshape(c, h // 2, 2, w // 2, 2).max(axis=(2, 4))

    layers = {k: (w.astype(np.float64), b.astype(np.float64)) for k, (w, b) in parsed["layers"].items()}
    x = (np.asarray(tile, dtype=np.float64) / 255.0)[None]
    x = pool(np.maximum(conv(x, *layers["conv1"]), 0.0))
    x = pool(np.maximum(conv(x, *layers["conv2"]), 0.0))
    h = np.maximum(layers["fc1"][0] @ x.reshape(-1) + layers["fc1"][1], 0.0)
    h = np.maximum(layers["fc2"][0] @ h + layers["fc2"][1], 0.0)
    return layers["fc3"][0] @ h + layers["fc3"][1]


def export_weights(
    model: SigmaClassifier,
    grid: tuple[float, ...],
    space: str,
    path,
    fixture_seed: int = 0,
    tolerance: float = 1e-4,
) -> np.ndarray:
    """Write the weight file and verify it against the in-framework model.

    Returns the fixture tile used for verification, for reuse as a
    cross-component parity fixture.  Raises ExportError when the re-read
    logits disagree with torch's beyond `tolerance`.
    """
    write_weights(model, grid, space, path)
    parsed = read_weights(path)
    rng = np.random.default_rng(fixture_seed)
    tile = rng.uniform(0.0, 255.0, size=(TILE, TILE))
    file_logits = numpy_logits(parsed, tile)
    model_double = model.double()
    with torch.no_grad():
        torch_logits = (
            model_double(torch.from_numpy((tile / 255.0)[None, None]).double())
            .numpy()
            .ravel()
        )
    model.float()
    worst = float(np.abs(file_logits - torch_logits).max())
    if worst > tolerance:
        raise ExportError(
            f"verification failed: logits differ by {worst:.2e} > {tolerance:.0e}"
        )
    return tile
