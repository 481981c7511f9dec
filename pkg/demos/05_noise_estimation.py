"""The per-tile noise classifier: tiling, smoothing, and the weight file.

Runs with an untrained (random) classifier by default, which is enough to
show the mechanics: the 128x128 tile grid, the nine-neighbor smoothing, the
green-only input, and the weight-file round trip.  Point GREENPRIOR_WEIGHTS
at a trained file (see the trainer project) to watch the predictions line up
with the injected noise.
"""

import os

import numpy as np

import greenprior as gp

weights = os.environ.get("GREENPRIOR_WEIGHTS")
if weights:
    clf = gp.load_weights(weights)
    print(f"loaded trained weights: {weights} (grid: {clf.grid.space})")
else:
    clf = gp.random_classifier(gp.SRGB_SIGMA_GRID, seed=0)
    print("no GREENPRIOR_WEIGHTS set: using random weights (mechanics only)")

print()
print("== a mixed-noise image, 384 x 256: a 3 x 2 tile grid ==")
clean = gp.piecewise_chart(384, 256, seed=3)
noisy = clean.copy()
noisy[:128] = gp.add_awgn(clean[:128], 10.0, seed=1)   # top band: light noise
noisy[128:256] = gp.add_awgn(clean[128:256], 40.0, seed=2)
noisy[256:] = gp.add_awgn(clean[256:], 80.0, seed=3)   # bottom band: heavy

sigma_map = gp.estimate_sigma_map(noisy, clf)
print(f"tile rows {list(sigma_map.tile_rows)}, cols {list(sigma_map.tile_cols)}")
print("raw per-tile sigma:")
print(sigma_map.raw_sigma)
print("after nine-neighbor smoothing:")
print(np.round(sigma_map.smoothed_sigma, 2))

print()
print("== green-only input ==")
recolored = noisy.copy()
recolored[:, :, 0] = np.random.default_rng(9).uniform(0, 255, noisy.shape[:2])
same = np.array_equal(
    gp.estimate_sigma_map(recolored, clf).raw_sigma, sigma_map.raw_sigma
)
print(f"scrambling the red channel changes nothing: {same}")

print()
print("== weight file round trip ==")
path = "demo_weights.gcpw"
gp.save_weights(clf, path)
back = gp.load_weights(path)
print(f"saved and reloaded: grids equal: {back.grid == clf.grid}")
idx, scores = gp.classify_tile(back, gp.green_plane(noisy)[:128, :128])
print(f"top-left tile -> class {idx} (sigma {back.grid.values[idx]}), score span "
      f"{scores.max() - scores.min():.3f}")
os.remove(path)
