"""Green-channel-prior patch-based denoising.

The green channel of color images is sampled twice as densely as red/blue
under a Bayer filter and typically has the highest SNR, so it makes a good
guide for finding similar patches and a natural axis to emphasize in the
patch representation.  This package groups similar patches under a
green-guided distance, stacks them as (R, G, G, B) tensors, filters each
group with learned Fourier-slice transforms plus hard thresholding, and
averages the overlapping results -- for sRGB images, packed Bayer raw,
video, and spectral cubes.  A small CNN classifier (inference only here;
training lives in the companion trainer project) predicts a per-tile noise
level when none is given.
"""

from .charts import piecewise_chart, spectral_cube, video_pan
from .estimator import (
    ARCHITECTURE,
    INPUT_SCALING,
    RAW_SIGMA_GRID,
    SRGB_SIGMA_GRID,
    NoiseClassifier,
    SigmaGrid,
    SigmaMap,
    approximate_accuracy,
    classify_tile,
    estimate_sigma_map,
    green_plane,
    load_weights,
    random_classifier,
    save_weights,
    tile_origins,
)
from .fileio import FormatError, load_container, load_image, save_container, save_image
from .filtering import (
    AggregationBuffer,
    TransformSet,
    denoise_frames,
    denoise_plane,
    forward_group_transform,
    hard_threshold,
    inverse_group_transform,
    learn_group_transforms,
    threshold_value,
)
from .metrics import MetricReport, add_awgn, channel_snr, psnr, ssim
from .patches import (
    GREEN_BRANCH,
    MEAN_BRANCH,
    DenoiseConfig,
    PatchGroup,
    SearchContext,
    extract_rggb,
    gcp_distance,
    reference_grid,
    search_group,
    success_rate_experiment,
    to_rggb_stack,
)
from .pipelines import (
    BAYER_LAYOUTS,
    HsiConfig,
    VideoConfig,
    denoise_hsi,
    denoise_raw,
    denoise_srgb,
    denoise_video,
    pack_bayer,
    unpack_bayer,
)
from .tensor_ops import (
    bcirc,
    fft_mode3,
    fold,
    ifft_mode3,
    t_identity,
    tprod,
    tsvd,
    ttranspose,
    unfold,
)

__version__ = "0.1.0"
