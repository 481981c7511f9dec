"""Image, mosaic, frame-stack, and cube ingestion/export.

Two on-disk families:

* PNG (8/16-bit via Pillow) and binary PGM for conventional images and
  single-plane mosaics.  Pixels are mapped to float on the [0, 255] scale;
  16-bit data is scaled by black/white levels (defaults 0/65535).
* The "GCPT" planar container for anything float and multi-dimensional:
  packed RGGB planes, video frame stacks, and spectral cubes.

GCPT layout, little-endian throughout:

    bytes 0..3   magic ``GCPT``
    u32          version (1)
    u32 + bytes  semantics tag, utf-8 (``image``, ``packed_rggb``,
                 ``frames``, ``hsi``)
    u32          rank
    u32 * rank   dims
    f32 * prod   payload, C row-major order

Loaders reject wrong magic, bad versions, and truncated or oversized
payloads instead of guessing.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np
from PIL import Image

__all__ = [
    "FormatError",
    "load_image",
    "save_image",
    "save_container",
    "load_container",
    "CONTAINER_SEMANTICS",
]

CONTAINER_MAGIC = b"GCPT"
CONTAINER_VERSION = 1
CONTAINER_SEMANTICS = ("image", "packed_rggb", "frames", "hsi")


class FormatError(ValueError):
    """Raised for malformed or unsupported on-disk data."""


def load_image(path, black: float = 0.0, white: float | None = None) -> np.ndarray:
    """Read a PNG or PGM as float on [0, 255].

    8-bit data maps 1:1; 16-bit data maps ``(v - black) / (white - black) * 255``
    with ``white`` defaulting to 65535.  Returns (H, W) for grayscale and
    (H, W, 3) for RGB.
    """
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix in (".pgm", ".pnm"):
        arr, maxval = _read_pgm(path)
        if maxval <= 255:
            return arr.astype(float)
        w = float(maxval if white is None else white)
        return (arr.astype(float) - black) / (w - black) * 255.0
    try:
        with Image.open(path) as im:
            im.load()
            mode = im.mode
            if mode in ("L", "RGB"):
                return np.asarray(im, dtype=float)
            if mode in ("I", "I;16"):
                arr = np.asarray(im, dtype=np.int64)
                w = float(65535 if white is None else white)
                return (arr.astype(float) - black) / (w - black) * 255.0
            if mode == "RGBA":
                return np.asarray(im.convert("RGB"), dtype=float)
            raise FormatError(f"unsupported image mode {mode!r} in {path}")
    except FormatError:
        raise
    except FileNotFoundError:
        raise
    except Exception as exc:
        raise FormatError(f"cannot read image {path}: {exc}") from exc


def save_image(path, img: np.ndarray, bit_depth: int = 8) -> None:
    """Write a PNG or PGM; values are clamped to [0, 255] and quantized."""
    path = Path(path)
    img = np.asarray(img, dtype=float)
    clipped = np.clip(img, 0.0, 255.0)
    suffix = path.suffix.lower()
    if bit_depth == 8:
        data = np.rint(clipped).astype(np.uint8)
    elif bit_depth == 16:
        data = np.rint(clipped / 255.0 * 65535.0).astype(np.uint16)
    else:
        raise ValueError("bit_depth must be 8 or 16")
    if suffix in (".pgm", ".pnm"):
        if data.ndim != 2:
            raise ValueError("PGM output is single-plane only")
        _write_pgm(path, data)
        return
    if data.ndim == 3 and bit_depth == 16:
        raise ValueError("16-bit RGB PNG is not supported; use the GCPT container")
    if data.ndim == 2:
        im = Image.fromarray(data)  # uint8 -> "L", uint16 -> "I;16"
    elif data.ndim == 3 and data.shape[2] == 3:
        im = Image.fromarray(data)
    else:
        raise ValueError(f"cannot save array of shape {img.shape} as an image")
    im.save(path)


def _read_pgm(path: Path) -> tuple[np.ndarray, int]:
    raw = path.read_bytes()
    if not raw.startswith(b"P5"):
        raise FormatError(f"{path}: not a binary PGM (P5) file")
    fields: list[int] = []
    pos = 2
    while len(fields) < 3:
        while pos < len(raw) and raw[pos : pos + 1].isspace():
            pos += 1
        if pos < len(raw) and raw[pos : pos + 1] == b"#":
            while pos < len(raw) and raw[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(raw) and not raw[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise FormatError(f"{path}: malformed PGM header")
        fields.append(int(raw[start:pos]))
    pos += 1  # single whitespace after maxval
    width, height, maxval = fields
    if maxval <= 0 or maxval > 65535:
        raise FormatError(f"{path}: unsupported PGM maxval {maxval}")
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype(np.uint8)
    count = width * height
    payload = raw[pos : pos + count * dtype.itemsize]
    if len(payload) != count * dtype.itemsize:
        raise FormatError(f"{path}: truncated PGM payload")
    arr = np.frombuffer(payload, dtype=dtype).reshape(height, width)
    return arr.astype(np.int64), maxval


def _write_pgm(path: Path, data: np.ndarray) -> None:
    maxval = 255 if data.dtype == np.uint8 else 65535
    header = f"P5\n{data.shape[1]} {data.shape[0]}\n{maxval}\n".encode("ascii")
    if maxval > 255:
        payload = data.astype(">u2").tobytes()
    else:
        payload = data.astype(np.uint8).tobytes()
    path.write_bytes(header + payload)


def save_container(path, array: np.ndarray, semantics: str) -> None:
    """Write a float array to the GCPT planar container (f32 payload)."""
    if semantics not in CONTAINER_SEMANTICS:
        raise ValueError(f"unknown container semantics {semantics!r}")
    array = np.ascontiguousarray(array, dtype=np.float32)
    tag = semantics.encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(CONTAINER_MAGIC)
        fh.write(struct.pack("<I", CONTAINER_VERSION))
        fh.write(struct.pack("<I", len(tag)))
        fh.write(tag)
        fh.write(struct.pack("<I", array.ndim))
        fh.write(struct.pack(f"<{array.ndim}I", *array.shape))
        fh.write(array.tobytes())


def load_container(path) -> tuple[np.ndarray, str]:
    """Read a GCPT container; returns (float64 array, semantics tag)."""
    raw = Path(path).read_bytes()
    cur = 0

    def take(n: int) -> bytes:
        nonlocal cur
        if cur + n > len(raw):
            raise FormatError(f"{path}: truncated container")
        chunk = raw[cur : cur + n]
        cur += n
        return chunk

    if take(4) != CONTAINER_MAGIC:
        raise FormatError(f"{path}: bad magic, not a GCPT container")
    (version,) = struct.unpack("<I", take(4))
    if version != CONTAINER_VERSION:
        raise FormatError(f"{path}: unsupported container version {version}")
    (tag_len,) = struct.unpack("<I", take(4))
    semantics = take(tag_len).decode("utf-8")
    if semantics not in CONTAINER_SEMANTICS:
        raise FormatError(f"{path}: unknown semantics tag {semantics!r}")
    (rank,) = struct.unpack("<I", take(4))
    if rank == 0 or rank > 8:
        raise FormatError(f"{path}: implausible rank {rank}")
    dims = struct.unpack(f"<{rank}I", take(4 * rank))
    count = int(np.prod(dims))
    payload = take(4 * count)
    if cur != len(raw):
        raise FormatError(f"{path}: trailing bytes after payload")
    arr = np.frombuffer(payload, dtype="<f4").reshape(dims)
    return arr.astype(np.float64), semantics
