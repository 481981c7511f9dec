"""Noise-level classification: native CNN inference, tiling, and sigma maps.

The noise level of each 128x128 subimage is predicted by a small
convolutional classifier that sees only the green plane (scaled to [0, 1]),
then smoothed by averaging over the 3x3 tile neighborhood.  Classes index a
fixed grid of sigma values; separate grids exist for raw and sRGB pixels.

The network is pinned so weight files are portable:

    conv(1->6, 5x5, valid, cross-correlation) - relu - maxpool 2
    conv(6->16, 5x5, valid, cross-correlation) - relu - maxpool 2
    flatten (16*29*29, channel-major) - dense 120 - relu - dense 84 -
    relu - dense n_classes

Weight file ("GCPW"), little-endian:

    bytes 0..3   magic ``GCPW``
    u32          version (1)
    u32 + bytes  architecture string (must equal ARCHITECTURE)
    u32          class count
    u32 + f64*n  sigma grid values
    u32 + bytes  grid space tag (``raw`` or ``srgb``)
    u32 + bytes  input scaling tag (must equal INPUT_SCALING)
    5 x layer    in order conv1, conv2, fc1, fc2, fc3, each:
                     u32 + bytes   layer name
                     u32           weight rank
                     u32 * rank    weight dims (conv [out][in][kh][kw],
                                   dense [out][in])
                     f32 * prod    weight data, C row-major
                     f32 * out     bias data

Loaders verify magic, version, architecture, grid/class agreement, every
tensor shape, and exact payload length.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .fileio import FormatError

__all__ = [
    "TILE_SIZE",
    "ARCHITECTURE",
    "INPUT_SCALING",
    "RAW_SIGMA_GRID",
    "SRGB_SIGMA_GRID",
    "SigmaGrid",
    "NoiseClassifier",
    "SigmaMap",
    "random_classifier",
    "save_weights",
    "load_weights",
    "classify_tile",
    "green_plane",
    "tile_origins",
    "estimate_sigma_map",
    "approximate_accuracy",
]

TILE_SIZE = 128

ARCHITECTURE = (
    "in:1x128x128;conv:6x1x5x5,valid,xcorr;relu;maxpool:2;"
    "conv:16x6x5x5,valid,xcorr;relu;maxpool:2;flatten:chw;"
    "dense:120;relu;dense:84;relu;dense:classes"
)
INPUT_SCALING = "green/255"

_MAGIC = b"GCPW"
_VERSION = 1
_FLAT_FEATURES = 16 * 29 * 29


@dataclass(frozen=True)
class SigmaGrid:
    """Ordered noise levels a classifier can predict, tagged by pixel space."""

    values: tuple[float, ...]
    space: str  # "raw" | "srgb"

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        object.__setattr__(self, "values", vals)
        if len(vals) < 2:
            raise ValueError("sigma grid needs at least two levels")
        if any(v <= 0 for v in vals) or any(b <= a for a, b in zip(vals, vals[1:])):
            raise ValueError("sigma grid must be strictly increasing and positive")
        if self.space not in ("raw", "srgb"):
            raise ValueError(f"unknown grid space {self.space!r}")

    def __len__(self) -> int:
        return len(self.values)


RAW_SIGMA_GRID = SigmaGrid((1.25, 2.5, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 40.0, 50.0), "raw")
SRGB_SIGMA_GRID = SigmaGrid(
    (1.25, 5.0, 10.0, 20.0, 30.0, 40.0, 50.0, 60.0, 80.0, 100.0, 120.0, 140.0), "srgb"
)


def _expected_shapes(classes: int) -> dict[str, tuple[tuple[int, ...], tuple[int, ...]]]:
    return {
        "conv1": ((6, 1, 5, 5), (6,)),
        "conv2": ((16, 6, 5, 5), (16,)),
        "fc1": ((120, _FLAT_FEATURES), (120,)),
        "fc2": ((84, 120), (84,)),
        "fc3": ((classes, 84), (classes,)),
    }


_LAYER_ORDER = ("conv1", "conv2", "fc1", "fc2", "fc3")


@dataclass(frozen=True)
class NoiseClassifier:
    """Weights of the pinned architecture plus the sigma grid they predict."""

    grid: SigmaGrid
    conv1_w: np.ndarray
    conv1_b: np.ndarray
    conv2_w: np.ndarray
    conv2_b: np.ndarray
    fc1_w: np.ndarray
    fc1_b: np.ndarray
    fc2_w: np.ndarray
    fc2_b: np.ndarray
    fc3_w: np.ndarray
    fc3_b: np.ndarray

    def __post_init__(self):
        expected = _expected_shapes(len(self.grid))
        for name in _LAYER_ORDER:
            w, b = self.layer(name)
            w_shape, b_shape = expected[name]
            if w.shape != w_shape or b.shape != b_shape:
                raise ValueError(
                    f"{name}: got {w.shape}/{b.shape}, expected {w_shape}/{b_shape}"
                )

    def layer(self, name: str) -> tuple[np.ndarray, np.ndarray]:
        return getattr(self, f"{name}_w"), getattr(self, f"{name}_b")


def random_classifier(grid: SigmaGrid, seed: int = 0, scale: float = 0.05) -> NoiseClassifier:
    """Classifier with seeded Gaussian weights; for fixtures and mechanics tests."""
    rng = np.random.default_rng(seed)
    tensors = {}
    for name, (w_shape, b_shape) in _expected_shapes(len(grid)).items():
        tensors[f"{name}_w"] = (scale * rng.standard_normal(w_shape)).astype(np.float32)
        tensors[f"{name}_b"] = (scale * rng.standard_normal(b_shape)).astype(np.float32)
    return NoiseClassifier(grid=grid, **tensors)


def save_weights(classifier: NoiseClassifier, path) -> None:
    """Serialize a classifier to the GCPW weight file."""
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<I", _VERSION))
        _write_str(fh, ARCHITECTURE)
        classes = len(classifier.grid)
        fh.write(struct.pack("<I", classes))  # class count
        fh.write(struct.pack("<I", classes))  # grid length (must agree)
        fh.write(struct.pack(f"<{classes}d", *classifier.grid.values))
        _write_str(fh, classifier.grid.space)
        _write_str(fh, INPUT_SCALING)
        for name in _LAYER_ORDER:
            w, b = classifier.layer(name)
            _write_str(fh, name)
            fh.write(struct.pack("<I", w.ndim))
            fh.write(struct.pack(f"<{w.ndim}I", *w.shape))
            fh.write(np.ascontiguousarray(w, dtype="<f4").tobytes())
            fh.write(np.ascontiguousarray(b, dtype="<f4").tobytes())


def _write_str(fh, text: str) -> None:
    raw = text.encode("utf-8")
    fh.write(struct.pack("<I", len(raw)))
    fh.write(raw)


def load_weights(path) -> NoiseClassifier:
    """Read and validate a GCPW weight file."""
    raw = Path(path).read_bytes()
    cur = 0

    def take(n: int) -> bytes:
        nonlocal cur
        if cur + n > len(raw):
            raise FormatError(f"{path}: truncated weight file")
        chunk = raw[cur : cur + n]
        cur += n
        return chunk

    def take_str() -> str:
        (n,) = struct.unpack("<I", take(4))
        if n > 65536:
            raise FormatError(f"{path}: implausible string length {n}")
        return take(n).decode("utf-8")

    if take(4) != _MAGIC:
        raise FormatError(f"{path}: bad magic, not a GCPW weight file")
    (version,) = struct.unpack("<I", take(4))
    if version != _VERSION:
        raise FormatError(f"{path}: unsupported weight file version {version}")
    arch = take_str()
    if arch != ARCHITECTURE:
        raise FormatError(f"{path}: architecture mismatch: {arch!r}")
    (classes,) = struct.unpack("<I", take(4))
    (grid_len,) = struct.unpack("<I", take(4))
    if classes != grid_len:
        raise FormatError(f"{path}: class count {classes} != grid length {grid_len}")
    grid_values = struct.unpack(f"<{grid_len}d", take(8 * grid_len))
    space = take_str()
    scaling = take_str()
    if scaling != INPUT_SCALING:
        raise FormatError(f"{path}: unsupported input scaling {scaling!r}")
    try:
        grid = SigmaGrid(grid_values, space)
    except ValueError as exc:
        raise FormatError(f"{path}: bad sigma grid: {exc}") from exc
    expected = _expected_shapes(classes)
    tensors = {}
    for name in _LAYER_ORDER:
        got_name = take_str()
        if got_name != name:
            raise FormatError(f"{path}: expected layer {name!r}, found {got_name!r}")
        (rank,) = struct.unpack("<I", take(4))
        if rank > 4:
            raise FormatError(f"{path}: implausible tensor rank {rank}")
        dims = struct.unpack(f"<{rank}I", take(4 * rank))
        w_shape, b_shape = expected[name]
        if dims != w_shape:
            raise FormatError(f"{path}: {name} weight shape {dims}, expected {w_shape}")
        count = int(np.prod(dims))
        tensors[f"{name}_w"] = np.frombuffer(take(4 * count), dtype="<f4").reshape(dims).copy()
        tensors[f"{name}_b"] = np.frombuffer(take(4 * b_shape[0]), dtype="<f4").copy()
    if cur != len(raw):
        raise FormatError(f"{path}: trailing bytes after last layer")
    return NoiseClassifier(grid=grid, **tensors)


def _conv_valid(x: np.ndarray, w: np.ndarray, b: np.ndarray) -> np.ndarray:
    # x: (Cin, H, W); w: (Cout, Cin, kh, kw); cross-correlation, no padding
    win = sliding_window_view(x, (w.shape[2], w.shape[3]), axis=(1, 2))
    return np.einsum("oiab,ijkab->ojk", w, win) + b[:, None, None]


def _maxpool2(x: np.ndarray) -> np.ndarray:
    c, h, w = x.shape
    x = x[:, : h // 2 * 2, : w // 2 * 2]
    return x.reshape(c, h // 2, 2, w // 2, 2).max(axis=(2, 4))


def classify_tile(classifier: NoiseClassifier, tile: np.ndarray) -> tuple[int, np.ndarray]:
    """Forward pass on one green tile; returns (argmax class, raw scores).

    The tile must be exactly 128x128 on the [0, 255] pixel scale.  Ties pick
    the lowest class index (the least aggressive smoothing).
    """
    tile = np.asarray(tile, dtype=np.float64)
    if tile.shape != (TILE_SIZE, TILE_SIZE):
        raise ValueError(f"expected a {TILE_SIZE}x{TILE_SIZE} tile, got {tile.shape}")
    x = (tile / 255.0)[None, :, :]
    x = np.maximum(_conv_valid(x, classifier.conv1_w.astype(np.float64), classifier.conv1_b.astype(np.float64)), 0.0)
    x = _maxpool2(x)
    x = np.maximum(_conv_valid(x, classifier.conv2_w.astype(np.float64), classifier.conv2_b.astype(np.float64)), 0.0)
    x = _maxpool2(x)
    flat = x.reshape(-1)
    h = np.maximum(classifier.fc1_w.astype(np.float64) @ flat + classifier.fc1_b, 0.0)
    h = np.maximum(classifier.fc2_w.astype(np.float64) @ h + classifier.fc2_b, 0.0)
    scores = classifier.fc3_w.astype(np.float64) @ h + classifier.fc3_b
    return int(np.argmax(scores)), scores


def green_plane(img: np.ndarray) -> np.ndarray:
    """Green plane of an image: channel 1 of RGB, the mean of the two green
    channels of packed RGGB, or the plane itself when single-channel."""
    img = np.asarray(img, dtype=float)
    if img.ndim == 2:
        return img
    if img.ndim == 3 and img.shape[2] == 3:
        return img[:, :, 1]
    if img.ndim == 3 and img.shape[2] == 4:
        return 0.5 * (img[:, :, 1] + img[:, :, 2])
    raise ValueError(f"cannot take a green plane of shape {img.shape}")


def tile_origins(length: int, tile: int = TILE_SIZE) -> list[int]:
    """Tile origins along one axis: stride `tile`, last origin flush with the
    border (overlapping its neighbor when the extent is not a multiple)."""
    if length <= tile:
        return [0]
    xs = list(range(0, length - tile + 1, tile))
    if xs[-1] != length - tile:
        xs.append(length - tile)
    return xs


@dataclass(frozen=True)
class SigmaMap:
    """Per-tile noise levels: raw predictions and their 3x3-smoothed values."""

    tile_rows: tuple[int, ...]
    tile_cols: tuple[int, ...]
    raw_class: np.ndarray  # (n_rows, n_cols) int
    raw_sigma: np.ndarray  # (n_rows, n_cols)
    smoothed_sigma: np.ndarray  # (n_rows, n_cols)
    grid: SigmaGrid
    tile_size: int = TILE_SIZE

    def tile_index(self, row: int, col: int) -> tuple[int, int]:
        """Owning tile of a pixel: the regular-grid quotient, clamped so the
        flush border tile owns the remainder."""
        i = min(row // self.tile_size, len(self.tile_rows) - 1)
        j = min(col // self.tile_size, len(self.tile_cols) - 1)
        return i, j

    def sigma_at(self, row: int, col: int) -> float:
        i, j = self.tile_index(row, col)
        return float(self.smoothed_sigma[i, j])

    def to_dict(self) -> dict:
        return {
            "tile_size": self.tile_size,
            "tile_rows": list(self.tile_rows),
            "tile_cols": list(self.tile_cols),
            "grid": {"space": self.grid.space, "values": list(self.grid.values)},
            "raw_class": self.raw_class.tolist(),
            "raw_sigma": self.raw_sigma.tolist(),
            "smoothed_sigma": self.smoothed_sigma.tolist(),
        }


def _extract_tile(plane: np.ndarray, r: int, c: int, tile: int) -> np.ndarray:
    """Tile at (r, c); images smaller than one tile are edge-replicated up."""
    h, w = plane.shape
    out = plane[r : min(r + tile, h), c : min(c + tile, w)]
    if out.shape == (tile, tile):
        return out
    pad_r = tile - out.shape[0]
    pad_c = tile - out.shape[1]
    return np.pad(out, ((0, pad_r), (0, pad_c)), mode="edge")


def smooth_sigma(raw_sigma: np.ndarray) -> np.ndarray:
    """Average each tile's sigma with its available 3x3 neighbors (borders
    simply have fewer neighbors)."""
    nr, nc = raw_sigma.shape
    out = np.empty_like(raw_sigma, dtype=float)
    for i in range(nr):
        for j in range(nc):
            block = raw_sigma[max(0, i - 1) : min(nr, i + 2), max(0, j - 1) : min(nc, j + 2)]
            out[i, j] = block.mean()
    return out


def estimate_sigma_map(
    img: np.ndarray, classifier: NoiseClassifier, tile: int = TILE_SIZE
) -> SigmaMap:
    """Classify every tile of the image's green plane and smooth the result."""
    plane = green_plane(img)
    rows = tile_origins(plane.shape[0], tile)
    cols = tile_origins(plane.shape[1], tile)
    raw_class = np.empty((len(rows), len(cols)), dtype=int)
    raw_sigma = np.empty((len(rows), len(cols)), dtype=float)
    for i, r in enumerate(rows):
        for j, c in enumerate(cols):
            idx, _ = classify_tile(classifier, _extract_tile(plane, r, c, tile))
            raw_class[i, j] = idx
            raw_sigma[i, j] = classifier.grid.values[idx]
    return SigmaMap(
        tile_rows=tuple(rows),
        tile_cols=tuple(cols),
        raw_class=raw_class,
        raw_sigma=raw_sigma,
        smoothed_sigma=smooth_sigma(raw_sigma),
        grid=classifier.grid,
        tile_size=tile,
    )


def approximate_accuracy(pred_labels, true_labels) -> tuple[float, float]:
    """(exact, within-one-class) agreement rates between two label vectors."""
    pred = np.asarray(pred_labels, dtype=int)
    true = np.asarray(true_labels, dtype=int)
    if pred.shape != true.shape or pred.ndim != 1:
        raise ValueError("label vectors must be 1-D and the same length")
    if pred.size == 0:
        raise ValueError("empty label vectors")
    exact = float(np.mean(pred == true))
    approx = float(np.mean(np.abs(pred - true) <= 1))
    return exact, approx
