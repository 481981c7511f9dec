"""Denoise a noisy chart and a Bayer mosaic; write before/after PNGs.

Outputs land in demos/out/.  The second half sweeps the filter's sigma
parameter across the sRGB grid on one noisy image, printing the PSNR curve
whose single interior peak shows why a per-image noise estimate matters.
"""

from pathlib import Path

import numpy as np

import greenprior as gp
from greenprior.charts import cfa_mosaic

out_dir = Path(__file__).parent / "out"
out_dir.mkdir(exist_ok=True)

print("== sRGB image ==")
clean = gp.piecewise_chart(256, 256, seed=7)
noisy = gp.add_awgn(clean, 25.0, seed=11)
denoised = gp.denoise_srgb(noisy, gp.DenoiseConfig(), sigma=25.0)
print(f"noisy:    PSNR {gp.psnr(clean, noisy):6.2f} dB, SSIM {gp.ssim(clean, noisy):.3f}")
print(f"denoised: PSNR {gp.psnr(clean, denoised):6.2f} dB, SSIM {gp.ssim(clean, denoised):.3f}")
print(f"channel SNR after: {[round(s, 1) for s in gp.channel_snr(clean, denoised)]}")
gp.save_image(out_dir / "srgb_clean.png", clean)
gp.save_image(out_dir / "srgb_noisy.png", noisy)
gp.save_image(out_dir / "srgb_denoised.png", denoised)

print()
print("== packed-Bayer mosaic ==")
mosaic = cfa_mosaic(gp.piecewise_chart(128, 128, seed=5), "RGGB")
level = 4.0 + 12.0 * mosaic / 255.0  # intensity-dependent, like shot noise
noisy_mosaic = mosaic + np.random.default_rng(6).standard_normal(mosaic.shape) * level
denoised_mosaic = gp.denoise_raw(noisy_mosaic, "RGGB", gp.DenoiseConfig(), sigma=10.0)
print(f"noisy:    PSNR {gp.psnr(mosaic, noisy_mosaic):6.2f} dB")
print(f"denoised: PSNR {gp.psnr(mosaic, denoised_mosaic):6.2f} dB")
gp.save_image(out_dir / "mosaic_noisy.png", noisy_mosaic)
gp.save_image(out_dir / "mosaic_denoised.png", denoised_mosaic)

print()
print("== sigma sweep on the sRGB image (true sigma = 25) ==")
for sigma in gp.SRGB_SIGMA_GRID.values:
    out = gp.denoise_srgb(noisy, gp.DenoiseConfig(stride=8), sigma=sigma)
    bar = "#" * int(max(0.0, gp.psnr(clean, out) - 20.0) * 2)
    print(f"  sigma {sigma:6.2f}: PSNR {gp.psnr(clean, out):6.2f} dB {bar}")
print("undershooting leaves noise, overshooting smears structure;")
print("the peak sits by the true level.")
