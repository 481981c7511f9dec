"""Synthetic test content: piecewise-smooth charts, video pans, spectral cubes.

All generators are deterministic given their seed and return float arrays on
the [0, 255] scale, the pixel domain the denoiser works in.
"""

from __future__ import annotations

import numpy as np

__all__ = ["piecewise_chart", "video_pan", "spectral_cube", "cfa_mosaic"]


def piecewise_chart(height: int = 256, width: int = 256, seed: int = 0) -> np.ndarray:
    """Piecewise-smooth RGB chart: gradients, flat rectangles, disks, an edge fan.

    Flat and smoothly varying regions carry strong nonlocal self-similarity,
    which is what patch-grouping denoisers exploit; seeded placement keeps
    fixtures reproducible.
    """
    rng = np.random.default_rng(seed)
    y, x = np.mgrid[0:height, 0:width].astype(float)
    img = np.empty((height, width, 3))
    img[:, :, 0] = 40.0 + 120.0 * x / max(width - 1, 1)
    img[:, :, 1] = 60.0 + 100.0 * y / max(height - 1, 1)
    img[:, :, 2] = 90.0 + 80.0 * (x + y) / max(height + width - 2, 1)

    for i in range(8):
        r0 = int(rng.integers(0, height * 3 // 4))
        c0 = int(rng.integers(0, width * 3 // 4))
        rh = int(rng.integers(height // 8, height // 3))
        cw = int(rng.integers(width // 8, width // 3))
        color = rng.uniform(20.0, 235.0, size=3)
        if i % 3 == 0:
            # green-deficient region: structure lives in red/blue only
            color[1] = rng.uniform(2.0, 18.0)
        tex = 20.0 * np.sin(2 * np.pi * rng.uniform(0.02, 0.08) * x[r0 : r0 + rh, c0 : c0 + cw])
        for ch in range(3):
            amp = 0.1 if color[1] < 20.0 and ch == 1 else 1.0
            img[r0 : r0 + rh, c0 : c0 + cw, ch] = np.clip(color[ch] + amp * tex, 0.0, 255.0)

    for _ in range(3):
        cy = rng.uniform(0.2, 0.8) * height
        cx = rng.uniform(0.2, 0.8) * width
        rad = rng.uniform(0.08, 0.2) * min(height, width)
        mask = (y - cy) ** 2 + (x - cx) ** 2 <= rad**2
        color = rng.uniform(20.0, 235.0, size=3)
        shade = 1.0 - 0.4 * np.sqrt(((y - cy) ** 2 + (x - cx) ** 2)) / rad
        for ch in range(3):
            img[:, :, ch] = np.where(mask, color[ch] * np.clip(shade, 0.0, 1.0), img[:, :, ch])

    # diagonal edge fan in one corner: repeated oriented edges
    fan = ((x * 3 + y * 5) % 40 < 20).astype(float)
    h8, w8 = height // 4, width // 4
    img[:h8, -w8:, 0] = 50 + 150 * fan[:h8, -w8:]
    img[:h8, -w8:, 1] = 70 + 120 * fan[:h8, -w8:]
    img[:h8, -w8:, 2] = 40 + 100 * fan[:h8, -w8:]

    return np.clip(img, 0.0, 255.0)


def video_pan(
    frames: int,
    height: int = 128,
    width: int = 128,
    shift: int = 2,
    seed: int = 0,
) -> np.ndarray:
    """Frame stack panning across a larger chart by `shift` pixels per frame."""
    big = piecewise_chart(height + 16, width + frames * shift + 16, seed=seed)
    out = np.empty((frames, height, width, 3))
    for f in range(frames):
        out[f] = big[8 : 8 + height, 8 + f * shift : 8 + f * shift + width, :]
    return out


def cfa_mosaic(rgb: np.ndarray, layout: str = "RGGB") -> np.ndarray:
    """Sample an RGB image through a Bayer color filter array.

    Each pixel keeps only the channel its CFA site measures, producing a
    single-plane mosaic whose packed planes share the scene's structure.
    """
    from .pipelines import BAYER_LAYOUTS

    rgb = np.asarray(rgb, dtype=float)
    if rgb.ndim != 3 or rgb.shape[2] != 3:
        raise ValueError("cfa_mosaic expects an (H, W, 3) image")
    if rgb.shape[0] % 2 or rgb.shape[1] % 2:
        raise ValueError("mosaic dimensions must be even")
    offsets = BAYER_LAYOUTS[layout.upper()]
    mosaic = np.empty(rgb.shape[:2])
    for site, channel in zip(offsets, (0, 1, 1, 2)):
        dr, dc = site
        mosaic[dr::2, dc::2] = rgb[dr::2, dc::2, channel]
    return mosaic


def spectral_cube(height: int = 64, width: int = 64, bands: int = 8, seed: int = 0) -> np.ndarray:
    """Band stack mixing two smooth spatial patterns with band-dependent weights."""
    rng = np.random.default_rng(seed)
    y, x = np.mgrid[0:height, 0:width].astype(float)
    a = 120.0 + 80.0 * np.sin(2 * np.pi * x / width) * np.cos(2 * np.pi * y / height)
    b = piecewise_chart(height, width, seed=seed + 1)[:, :, 1]
    out = np.empty((height, width, bands))
    phases = rng.uniform(0.0, np.pi, size=bands)
    for l in range(bands):
        w = 0.5 + 0.5 * np.cos(np.pi * l / max(bands - 1, 1) + phases[l] * 0.1)
        out[:, :, l] = w * a + (1.0 - w) * b + 10.0 * l / max(bands - 1, 1)
    return np.clip(out, 0.0, 255.0)
