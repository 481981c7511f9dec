"""Denoising pipelines: sRGB images, packed-Bayer raw, video, and spectral cubes.

All pipelines share the same engine (group, filter, aggregate) on 4-channel
stacks; they differ only in how the input is mapped to that representation:

* sRGB: the green channel is duplicated into an (R, G, G, B) stack and the
  two green estimates averaged on output.
* raw: the mosaic is packed into half-resolution (R, G, G, B) planes,
  normalized to the same channel order for any of the four Bayer layouts.
* video: one stack of frames; candidates are drawn from a window of
  neighboring frames and the threshold accounts for the larger search space.
* cubes: bands are split into groups of four; the group holding the middle
  band is searched and its transforms learned, then member origins and
  transforms are reused for every other band group.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .filtering import (
    denoise_frames,
    forward_group_transform,
    hard_threshold,
    inverse_group_transform,
    learn_group_transforms,
    threshold_value,
    AggregationBuffer,
    _as_sigma_fn,
    _ordered_map,
)
from .patches import DenoiseConfig, SearchContext, reference_grid

__all__ = [
    "BAYER_LAYOUTS",
    "VideoConfig",
    "HsiConfig",
    "pack_bayer",
    "unpack_bayer",
    "denoise_srgb",
    "denoise_raw",
    "denoise_video",
    "denoise_hsi",
]

# (row, col) offsets of the R, first G, second G, and B sites in the 2x2 cell.
# The first G is always the green on row 0, the second the green on row 1, so
# packing normalizes every layout to the same (R, G, G, B) channel order.
BAYER_LAYOUTS: dict[str, tuple[tuple[int, int], ...]] = {
    "RGGB": ((0, 0), (0, 1), (1, 0), (1, 1)),
    "BGGR": ((1, 1), (0, 1), (1, 0), (0, 0)),
    "GRBG": ((0, 1), (0, 0), (1, 1), (1, 0)),
    "GBRG": ((1, 0), (0, 0), (1, 1), (0, 1)),
}


@dataclass(frozen=True)
class VideoConfig:
    """Video knobs: the spatial config plus an odd temporal search window."""

    base: DenoiseConfig = DenoiseConfig()
    temporal_window: int = 3

    def __post_init__(self):
        if self.temporal_window < 1 or self.temporal_window % 2 == 0:
            raise ValueError("temporal_window must be odd and >= 1")


@dataclass(frozen=True)
class HsiConfig:
    """Cube knobs: the spatial config plus the spectral band-group width."""

    base: DenoiseConfig = DenoiseConfig()
    band_group: int = 4

    def __post_init__(self):
        if self.band_group != 4:
            raise ValueError("band groups of 4 are required (the channel FFT is length 4)")


def pack_bayer(mosaic: np.ndarray, layout: str = "RGGB") -> np.ndarray:
    """Split an even-sized mosaic into half-resolution (R, G, G, B) planes."""
    mosaic = np.asarray(mosaic, dtype=float)
    if mosaic.ndim != 2:
        raise ValueError("expected a single-plane mosaic")
    if mosaic.shape[0] % 2 or mosaic.shape[1] % 2:
        raise ValueError(f"mosaic dimensions must be even, got {mosaic.shape}")
    try:
        offsets = BAYER_LAYOUTS[layout.upper()]
    except KeyError:
        raise ValueError(f"unknown Bayer layout {layout!r}") from None
    return np.stack([mosaic[dr::2, dc::2] for dr, dc in offsets], axis=2)


def unpack_bayer(packed: np.ndarray, layout: str = "RGGB") -> np.ndarray:
    """Inverse of `pack_bayer`: reassemble the full-resolution mosaic."""
    packed = np.asarray(packed, dtype=float)
    if packed.ndim != 3 or packed.shape[2] != 4:
        raise ValueError("expected (H/2, W/2, 4) packed planes")
    try:
        offsets = BAYER_LAYOUTS[layout.upper()]
    except KeyError:
        raise ValueError(f"unknown Bayer layout {layout!r}") from None
    out = np.empty((packed.shape[0] * 2, packed.shape[1] * 2), dtype=float)
    for ch, (dr, dc) in enumerate(offsets):
        out[dr::2, dc::2] = packed[:, :, ch]
    return out


def denoise_srgb(img: np.ndarray, cfg: DenoiseConfig | None = None, sigma=0.0) -> np.ndarray:
    """Denoise one (H, W, 3) sRGB image."""
    img = np.asarray(img, dtype=float)
    if img.ndim != 3 or img.shape[2] != 3:
        raise ValueError(f"expected an (H, W, 3) image, got {img.shape}")
    return denoise_frames(img[None], cfg=cfg, sigma=sigma, temporal_window=1)[0]


def denoise_raw(
    mosaic: np.ndarray,
    layout: str = "RGGB",
    cfg: DenoiseConfig | None = None,
    sigma=0.0,
) -> np.ndarray:
    """Denoise a Bayer mosaic in packed (R, G, G, B) space; returns a mosaic."""
    packed = pack_bayer(mosaic, layout)
    out = denoise_frames(packed[None], cfg=cfg, sigma=sigma, temporal_window=1)[0]
    return unpack_bayer(out, layout)


def denoise_video(
    frames: np.ndarray,
    vcfg: VideoConfig | None = None,
    sigma=0.0,
) -> np.ndarray:
    """Denoise a frame stack with spatiotemporal grouping.

    With a temporal window of 1 this is exactly frame-by-frame image
    denoising (same code path, same threshold)."""
    vcfg = vcfg or VideoConfig()
    return denoise_frames(
        frames, cfg=vcfg.base, sigma=sigma, temporal_window=vcfg.temporal_window
    )


def _band_groups(bands: int, width: int) -> list[tuple[int, int]]:
    """(start, stop) of each band group over the padded band axis."""
    padded = (bands + width - 1) // width * width
    return [(s, s + width) for s in range(0, padded, width)]


def denoise_hsi(
    cube: np.ndarray,
    hcfg: HsiConfig | None = None,
    sigma=0.0,
    origin_trace: list | None = None,
) -> np.ndarray:
    """Denoise an (H, W, L) cube by band groups with shared search and transforms.

    Bands are split into contiguous groups of four (the last group padded by
    repeating the final band; padding is stripped on output).  Similar-patch
    search and transform learning run only on the medium group -- the one
    containing band L // 2 -- and every other group reuses those member
    origins and transforms, computing just its own coefficients and
    threshold.  `origin_trace`, when given, collects
    ``(group_index, reference, member_origins)`` for instrumentation.
    """
    cube = np.asarray(cube, dtype=float)
    if cube.ndim != 3 or cube.shape[2] < 1:
        raise ValueError(f"expected an (H, W, L) cube, got {cube.shape}")
    hcfg = hcfg or HsiConfig()
    cfg = hcfg.base
    height, width, bands = cube.shape
    groups = _band_groups(bands, hcfg.band_group)
    padded = groups[-1][1]
    if padded != bands:
        cube_p = np.concatenate(
            [cube, np.repeat(cube[:, :, -1:], padded - bands, axis=2)], axis=2
        )
    else:
        cube_p = cube
    stacks = [cube_p[:, :, s:e][None] for s, e in groups]
    medium = (bands // 2) // hcfg.band_group
    ctx = SearchContext(stacks[medium], cfg)
    sigma_fn = _as_sigma_fn(sigma)
    ps = cfg.patch_size
    refs = [
        (0, r, c)
        for r in reference_grid(height, ps, cfg.strides[0])
        for c in reference_grid(width, ps, cfg.strides[1])
    ]

    def gather_from(stack, origins):
        out = np.empty((ps, ps, 4, len(origins)))
        for j, (f, r, c) in enumerate(origins):
            out[..., j] = stack[f, r : r + ps, c : c + ps, :]
        return out

    def work(ref):
        origins, _ = ctx.search_origins(ref)
        transforms = learn_group_transforms(ctx.gather(origins))
        tau = threshold_value(sigma_fn(ref), len(origins), ps, 1, cfg.tau_mult)
        cleaned = []
        for stack in stacks:
            group = gather_from(stack, origins)
            coeff = forward_group_transform(group, transforms)
            coeff, _ = hard_threshold(coeff, tau)
            cleaned.append(inverse_group_transform(coeff, transforms))
        return origins, cleaned

    buffers = [AggregationBuffer(1, height, width, 4) for _ in groups]
    for origins, cleaned in _ordered_map(work, refs, cfg.threads):
        for gi, clean in enumerate(cleaned):
            buffers[gi].add(clean, origins)
            if origin_trace is not None:
                origin_trace.append((gi, origins[0], tuple(origins)))
    out = np.concatenate([buf.finalize()[0] for buf in buffers], axis=2)
    return out[:, :, :bands]
