"""Collaborative filtering: learned group transforms, hard thresholding, aggregation.

A group of K similar RGGB patches (ps, ps, 4, K) is taken to the Fourier
domain along the channel mode, rotated by per-slice row/column bases learned
from that group's slice covariances, and rotated along the stacking mode by
the PCA basis of the group's Gram matrix.  Every factor is unitary or
orthogonal and the channel FFT is unitary, so the coefficient tensor has the
same Frobenius norm as the group and one magnitude threshold applies across
the whole of it.  Small coefficients are zeroed, the rotations are undone,
and each patch is written back to its origin with uniform weight.

Fourier slices of a real group come in conjugate pairs, so bases are learned
for the first ``n3 // 2 + 1`` slices and mirrored; thresholding on complex
magnitude treats mirrored slices identically, keeping the spectrum conjugate
symmetric and the reconstruction real.

Internally slices are handled in (slice, k, row, col) batched-matrix layout
so the hot path runs on BLAS; the public tensors keep the (row, col, slice,
k) layout of the group itself.
"""

from __future__ import annotations

import math
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .patches import DenoiseConfig, SearchContext, reference_grid, to_rggb_stack

__all__ = [
    "TransformSet",
    "AggregationBuffer",
    "learn_group_transforms",
    "forward_group_transform",
    "hard_threshold",
    "inverse_group_transform",
    "threshold_value",
    "denoise_frames",
    "denoise_plane",
]


@dataclass(frozen=True)
class TransformSet:
    """Per-slice unitary row/column bases plus the orthogonal stack basis.

    u_row, u_col: complex (ps, ps, n3); slice f holds one unitary matrix,
    with slice n3-f the conjugate of slice f.
    u_group: real (K, K) orthogonal.
    """

    u_row: np.ndarray
    u_col: np.ndarray
    u_group: np.ndarray


def _fix_phases(vecs: np.ndarray) -> np.ndarray:
    """Rotate each column of a (..., n, m) stack of bases so its first
    non-negligible entry is real nonnegative (deterministic sign/phase)."""
    absv = np.abs(vecs)
    first = (absv > 1e-12).argmax(axis=-2)
    lead = np.take_along_axis(vecs, first[..., None, :], axis=-2)[..., 0, :]
    mag = np.abs(lead)
    phase = np.where(mag > 0, lead / np.where(mag > 0, mag, 1.0), 1.0)
    return vecs * np.conj(phase)[..., None, :]


def _descending_eig_basis(mats: np.ndarray) -> np.ndarray:
    """Eigenvector bases of a (..., n, n) Hermitian stack, eigenvalues
    descending, phases fixed."""
    _, vecs = np.linalg.eigh(mats)
    return _fix_phases(vecs[..., ::-1])


def _slice_major(group_like: np.ndarray) -> np.ndarray:
    """(ps, ps, n3, K) -> (n3, K, ps, ps) batched-matrix layout."""
    return np.moveaxis(group_like, (2, 3), (0, 1))


def _slice_minor(stacked: np.ndarray) -> np.ndarray:
    """Inverse of `_slice_major`."""
    return np.moveaxis(stacked, (0, 1), (2, 3))


def _learn_bases(gf_slices: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Row/column bases per Fourier slice from summed slice outer products.

    gf_slices: (n3, K, ps_r, ps_c).  Returns (n3, ps_r, ps_r) and
    (n3, ps_c, ps_c) stacks; only the non-redundant slices are decomposed,
    the rest mirrored by conjugation.
    """
    n3, k, ps_r, ps_c = gf_slices.shape
    upper = n3 // 2 + 1
    head = gf_slices[:upper]
    rows = head.transpose(0, 2, 1, 3).reshape(upper, ps_r, k * ps_c)
    cov_row = rows @ rows.conj().transpose(0, 2, 1)
    cols = head.reshape(upper, k * ps_r, ps_c)
    cov_col = cols.conj().transpose(0, 2, 1) @ cols
    basis = _descending_eig_basis(np.concatenate([cov_row, cov_col], axis=0))
    u_row = np.empty((n3, ps_r, ps_r), dtype=complex)
    u_col = np.empty((n3, ps_c, ps_c), dtype=complex)
    u_row[:upper] = basis[:upper]
    u_col[:upper] = basis[upper:]
    for f in range(upper, n3):
        u_row[f] = np.conj(u_row[n3 - f])
        u_col[f] = np.conj(u_col[n3 - f])
    return u_row, u_col


def _learn_stack_basis(group: np.ndarray) -> np.ndarray:
    """PCA basis of the K x K Gram matrix of the spatial-domain patch vectors."""
    k = group.shape[-1]
    flat = group.reshape(-1, k)
    return _descending_eig_basis(flat.T @ flat).real


def learn_group_transforms(group: np.ndarray) -> TransformSet:
    """Learn the three bases of a (ps, ps, n3, K) group.

    Row/column bases per Fourier slice come from the eigenvectors of the
    summed outer products of that slice across the stack; the stack basis is
    the PCA of the K x K Gram matrix of the spatial-domain patch vectors.
    """
    group = np.asarray(group, dtype=float)
    if group.ndim != 4:
        raise ValueError(f"expected (ps, ps, channels, K), got {group.shape}")
    gf = _slice_major(np.fft.fft(group, axis=2, norm="ortho"))
    u_row, u_col = _learn_bases(gf)
    return TransformSet(
        u_row=np.moveaxis(u_row, 0, 2),
        u_col=np.moveaxis(u_col, 0, 2),
        u_group=_learn_stack_basis(group),
    )


def _forward_stacked(gf_slices, u_row, u_col, u_group):
    # (n3, K, ps, ps) -> coefficients in the same layout
    coeff = u_row.conj().transpose(0, 2, 1)[:, None] @ gf_slices @ u_col[:, None]
    mixed = np.moveaxis(coeff, 1, -1) @ u_group  # mode-4 rotation by u_group^T
    return np.moveaxis(mixed, -1, 1)


def _inverse_stacked(coeff_slices, u_row, u_col, u_group):
    unmixed = np.moveaxis(coeff_slices, 1, -1) @ u_group.T
    back = np.moveaxis(unmixed, -1, 1)
    return u_row[:, None] @ back @ u_col.conj().transpose(0, 2, 1)[:, None]


def forward_group_transform(group: np.ndarray, transforms: TransformSet) -> np.ndarray:
    """Coefficients of a group: unitary channel FFT, per-slice basis rotation,
    then the stack-basis rotation.  Norm-preserving."""
    group = np.asarray(group)
    _check_shapes(group.shape, transforms)
    gf = _slice_major(np.fft.fft(group, axis=2, norm="ortho"))
    coeff = _forward_stacked(
        gf,
        np.moveaxis(transforms.u_row, 2, 0),
        np.moveaxis(transforms.u_col, 2, 0),
        transforms.u_group,
    )
    return _slice_minor(coeff)


def hard_threshold(coeffs: np.ndarray, tau: float, keep_dc: bool = True) -> tuple[np.ndarray, int]:
    """Zero every coefficient with magnitude below tau; entries at exactly tau
    survive.  The leading component (0, 0, 0, 0) is always kept so the group
    mean is never discarded.  Returns (truncated, retained count)."""
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    coeffs = np.asarray(coeffs)
    mask = np.abs(coeffs) >= tau
    if keep_dc and coeffs.ndim == 4:
        mask[0, 0, 0, 0] = True
    return np.where(mask, coeffs, 0), int(mask.sum())


def inverse_group_transform(coeffs: np.ndarray, transforms: TransformSet) -> np.ndarray:
    """Undo the stack rotation, the per-slice rotations, and the channel FFT.

    The imaginary residue of the final inverse FFT (conjugate-symmetry
    round-off) is discarded."""
    coeffs = np.asarray(coeffs)
    _check_shapes(coeffs.shape, transforms)
    gf = _inverse_stacked(
        _slice_major(coeffs),
        np.moveaxis(transforms.u_row, 2, 0),
        np.moveaxis(transforms.u_col, 2, 0),
        transforms.u_group,
    )
    return np.fft.ifft(_slice_minor(gf), axis=2, norm="ortho").real


def _check_shapes(shape, transforms: TransformSet) -> None:
    if len(shape) != 4:
        raise ValueError(f"expected a 4-way group/coefficient tensor, got {shape}")
    ps_r, ps_c, n3, k = shape
    if transforms.u_row.shape != (ps_r, ps_r, n3):
        raise ValueError(
            f"row basis {transforms.u_row.shape} does not match group shape {shape}"
        )
    if transforms.u_col.shape != (ps_c, ps_c, n3):
        raise ValueError(
            f"column basis {transforms.u_col.shape} does not match group shape {shape}"
        )
    if transforms.u_group.shape != (k, k):
        raise ValueError(
            f"stack basis {transforms.u_group.shape} does not match group size {k}"
        )


def threshold_value(
    sigma: float,
    group_size: int,
    patch_size: int,
    frames: int = 1,
    multiplier: float = 1.1,
) -> float:
    """Universal hard threshold: multiplier * sigma * sqrt(2 ln(4 ps^2 frames K)).

    `frames` enters only for spatiotemporal grouping; with one frame this is
    the still-image rule.
    """
    return multiplier * sigma * math.sqrt(
        2.0 * math.log(4.0 * group_size * frames * patch_size**2)
    )


class AggregationBuffer:
    """Accumulates overlapping patch writes; the image is value_sum / weight_sum.

    With 3 output channels each RGGB patch collapses to (R, (G1+G2)/2, B)
    before the write; with 4 channels it is written verbatim.  Every write
    uses uniform weight 1.
    """

    def __init__(self, frames: int, height: int, width: int, channels: int):
        if channels not in (3, 4):
            raise ValueError("aggregation supports 3- or 4-channel output")
        self.value_sum = np.zeros((frames, height, width, channels))
        self.weight_sum = np.zeros((frames, height, width))
        self.channels = channels

    def add(self, group: np.ndarray, origins) -> None:
        ps = group.shape[0]
        if self.channels == 3:
            group = np.stack(
                [
                    group[:, :, 0, :],
                    0.5 * (group[:, :, 1, :] + group[:, :, 2, :]),
                    group[:, :, 3, :],
                ],
                axis=2,
            )
        for j, (f, r, c) in enumerate(origins):
            self.value_sum[f, r : r + ps, c : c + ps, :] += group[:, :, :, j]
            self.weight_sum[f, r : r + ps, c : c + ps] += 1.0

    def finalize(self) -> np.ndarray:
        if np.any(self.weight_sum == 0.0):
            raise ValueError("aggregation left uncovered pixels; reference grid too sparse")
        return self.value_sum / self.weight_sum[..., None]


def _as_sigma_fn(sigma):
    """Normalize a sigma argument (scalar, SigmaMap, or per-frame sequence of
    maps) into a callable of the reference origin (frame, row, col)."""
    if np.isscalar(sigma):
        value = float(sigma)
        if value < 0:
            raise ValueError("sigma must be nonnegative")
        return lambda ref: value
    if hasattr(sigma, "sigma_at"):
        return lambda ref: float(sigma.sigma_at(ref[1], ref[2]))
    if isinstance(sigma, (list, tuple)) and all(hasattr(s, "sigma_at") for s in sigma):
        maps = list(sigma)
        return lambda ref: float(maps[ref[0]].sigma_at(ref[1], ref[2]))
    raise TypeError("sigma must be a scalar, a SigmaMap, or a sequence of SigmaMaps")


def _ordered_map(fn, items, threads: int):
    """Apply fn over items, yielding results in submission order.

    The thread pool path drains a bounded deque, so memory stays flat while
    the output order (and therefore every floating-point accumulation order
    downstream) is identical to the sequential path.
    """
    if threads <= 1:
        for item in items:
            yield fn(item)
        return
    with ThreadPoolExecutor(max_workers=threads) as pool:
        pending = deque()
        for item in items:
            pending.append(pool.submit(fn, item))
            if len(pending) >= 4 * threads:
                yield pending.popleft().result()
        while pending:
            yield pending.popleft().result()


def _filter_group(group: np.ndarray, tau: float) -> np.ndarray:
    """Learn transforms, threshold, and reconstruct one group: the fused hot
    path, equal to composing the public transform operations."""
    gf = _slice_major(np.fft.fft(group, axis=2, norm="ortho"))
    u_row, u_col = _learn_bases(gf)
    u_group = _learn_stack_basis(group)
    coeff = _forward_stacked(gf, u_row, u_col, u_group)
    mask = np.abs(coeff) >= tau
    mask[0, 0, 0, 0] = True  # (slice 0, reference component, top-left): group mean
    coeff = np.where(mask, coeff, 0)
    back = _inverse_stacked(coeff, u_row, u_col, u_group)
    return np.fft.ifft(_slice_minor(back), axis=2, norm="ortho").real


def denoise_frames(
    frames: np.ndarray,
    cfg: DenoiseConfig | None = None,
    sigma=0.0,
    temporal_window: int = 1,
) -> np.ndarray:
    """Run grouping, collaborative filtering, and aggregation over a frame stack.

    frames: (F, H, W, C) with C = 3 (RGB; green duplicated internally) or 4
        (packed RGGB or any 4-plane group).
    sigma: scalar noise level, a SigmaMap, or one SigmaMap per frame.
    temporal_window: frames searched around each reference (odd; 1 = spatial
        only).  It also enters the threshold formula.

    Reference patches are visited frame by frame in scan order and results
    aggregated in that same order regardless of thread count, so output is
    bit-reproducible for any `threads` setting.
    """
    frames = np.asarray(frames, dtype=float)
    if frames.ndim != 4:
        raise ValueError(f"expected (frames, H, W, C), got {frames.shape}")
    if frames.shape[-1] not in (3, 4):
        raise ValueError("expected 3- or 4-channel frames")
    if frames.size == 0:
        raise ValueError("empty input")
    if temporal_window < 1 or temporal_window % 2 == 0:
        raise ValueError("temporal_window must be odd and >= 1")
    cfg = cfg or DenoiseConfig()
    sigma_fn = _as_sigma_fn(sigma)
    stack = to_rggb_stack(frames)
    ctx = SearchContext(stack, cfg)
    nframes, height, width = stack.shape[:3]
    ps = cfg.patch_size
    refs = [
        (f, r, c)
        for f in range(nframes)
        for r in reference_grid(height, ps, cfg.strides[0])
        for c in reference_grid(width, ps, cfg.strides[1])
    ]
    half = temporal_window // 2

    def work(ref):
        origins, _ = ctx.search_origins(ref, temporal_half=half)
        group = ctx.gather(origins)
        tau = threshold_value(
            sigma_fn(ref), len(origins), ps, temporal_window, cfg.tau_mult
        )
        return origins, _filter_group(group, tau)

    buf = AggregationBuffer(nframes, height, width, frames.shape[-1])
    for origins, clean in _ordered_map(work, refs, cfg.threads):
        buf.add(clean, origins)
    return buf.finalize()


def denoise_plane(img: np.ndarray, cfg: DenoiseConfig | None = None, sigma=0.0) -> np.ndarray:
    """Single-image entry point over `denoise_frames` (3- or 4-channel input)."""
    img = np.asarray(img, dtype=float)
    if img.ndim != 3:
        raise ValueError(f"expected (H, W, C), got {img.shape}")
    return denoise_frames(img[None], cfg=cfg, sigma=sigma)[0]
