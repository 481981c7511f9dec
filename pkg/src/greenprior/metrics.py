"""Quality metrics (PSNR, SSIM, per-channel SNR) and seeded Gaussian noise."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import convolve2d

__all__ = ["MetricReport", "psnr", "ssim", "channel_snr", "add_awgn"]

_SSIM_C1 = (0.01 * 255.0) ** 2
_SSIM_C2 = (0.03 * 255.0) ** 2


@dataclass(frozen=True)
class MetricReport:
    """PSNR/SSIM pair plus optional per-channel SNR, all in dB except SSIM."""

    psnr: float
    ssim: float
    channel_snr: tuple[float, float, float] | None = None

    def to_dict(self) -> dict:
        d = {"psnr": self.psnr, "ssim": self.ssim}
        if self.channel_snr is not None:
            d["channel_snr"] = {
                "R": self.channel_snr[0],
                "G": self.channel_snr[1],
                "B": self.channel_snr[2],
            }
        return d


def _check_same_shape(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")


def psnr(ref: np.ndarray, test: np.ndarray, peak: float = 255.0) -> float:
    """10*log10(peak^2 / MSE) over all pixels and channels; inf for identical inputs."""
    ref = np.asarray(ref, dtype=float)
    test = np.asarray(test, dtype=float)
    _check_same_shape(ref, test)
    mse = float(np.mean((ref - test) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(peak * peak / mse)


def _gaussian_window(size: int = 11, sigma: float = 1.5) -> np.ndarray:
    half = (size - 1) / 2.0
    g = np.exp(-((np.arange(size) - half) ** 2) / (2.0 * sigma * sigma))
    k = np.outer(g, g)
    return k / k.sum()


def _ssim_plane(x: np.ndarray, y: np.ndarray, window: np.ndarray) -> float:
    mu_x = convolve2d(x, window, mode="valid")
    mu_y = convolve2d(y, window, mode="valid")
    xx = convolve2d(x * x, window, mode="valid") - mu_x * mu_x
    yy = convolve2d(y * y, window, mode="valid") - mu_y * mu_y
    xy = convolve2d(x * y, window, mode="valid") - mu_x * mu_y
    num = (2 * mu_x * mu_y + _SSIM_C1) * (2 * xy + _SSIM_C2)
    den = (mu_x * mu_x + mu_y * mu_y + _SSIM_C1) * (xx + yy + _SSIM_C2)
    return float(np.mean(num / den))


def ssim(ref: np.ndarray, test: np.ndarray) -> float:
    """Mean structural similarity, 11x11 Gaussian window (sigma 1.5), standard
    8-bit stabilizers; multi-channel inputs are scored per channel and averaged."""
    ref = np.asarray(ref, dtype=float)
    test = np.asarray(test, dtype=float)
    _check_same_shape(ref, test)
    if ref.ndim == 2:
        ref = ref[:, :, None]
        test = test[:, :, None]
    if ref.shape[0] < 11 or ref.shape[1] < 11:
        raise ValueError("ssim needs at least an 11x11 image")
    window = _gaussian_window()
    scores = [_ssim_plane(ref[:, :, c], test[:, :, c], window) for c in range(ref.shape[2])]
    return float(np.mean(scores))


def channel_snr(clean: np.ndarray, noisy: np.ndarray) -> tuple[float, float, float]:
    """Per-channel 10*log10(sum(clean^2) / sum((clean - noisy)^2)) for an RGB pair."""
    clean = np.asarray(clean, dtype=float)
    noisy = np.asarray(noisy, dtype=float)
    _check_same_shape(clean, noisy)
    if clean.ndim != 3 or clean.shape[2] != 3:
        raise ValueError("channel_snr expects 3-channel images")
    out = []
    for c in range(3):
        signal = float(np.sum(clean[:, :, c] ** 2))
        err = float(np.sum((clean[:, :, c] - noisy[:, :, c]) ** 2))
        out.append(math.inf if err == 0.0 else 10.0 * math.log10(signal / err))
    return tuple(out)


def add_awgn(img: np.ndarray, sigma: float, seed: int = 0) -> np.ndarray:
    """Add seeded white Gaussian noise; float output, not clamped.

    The generator is numpy's PCG64 via ``default_rng(seed)`` with
    ``standard_normal`` draws, so fixtures are reproducible by name.
    """
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    img = np.asarray(img, dtype=float)
    if sigma == 0.0:
        return img.copy()
    rng = np.random.default_rng(seed)
    return img + sigma * rng.standard_normal(img.shape)
