"""Command-line interface.

Subcommands:

    denoise {image|raw|video|hsi} INPUT OUTPUT [--sigma S | --weights W] ...
    estimate INPUT [--weights W]
    experiment {identity|success-rate|tau-sweep|scaling} [--seed N] ...
    metrics REF TEST

Exit codes: 0 ok, 1 usage error, 2 I/O or format error, 3 numeric failure.
Outputs are written to a temp file and renamed into place, so a failing run
never leaves a partial file behind.  ``GREENPRIOR_WEIGHTS`` supplies a
default weight-file path.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import experiments
from .estimator import estimate_sigma_map, load_weights
from .fileio import FormatError, load_container, load_image, save_container, save_image
from .metrics import MetricReport, channel_snr, psnr, ssim
from .patches import DenoiseConfig
from .pipelines import (
    HsiConfig,
    VideoConfig,
    denoise_hsi,
    denoise_raw,
    denoise_srgb,
    denoise_video,
    pack_bayer,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_NUMERIC = 3

WEIGHTS_ENV = "GREENPRIOR_WEIGHTS"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); we reserve 2 for I/O
        raise UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="greenprior", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    den = sub.add_parser("denoise", help="denoise an image, mosaic, frame stack, or cube")
    den.add_argument("kind", choices=("image", "raw", "video", "hsi"))
    den.add_argument("input")
    den.add_argument("output")
    den.add_argument("--sigma", type=float, default=None, help="fixed noise level")
    den.add_argument("--weights", default=None, help="GCPW classifier for estimated noise")
    den.add_argument("--ref", default=None, help="reference input for a metric report")
    den.add_argument("--layout", default="RGGB", help="Bayer layout for raw inputs")
    _add_config_flags(den)
    den.add_argument("--report", choices=("text", "json"), default="text")

    est = sub.add_parser("estimate", help="print the per-tile sigma map of an input")
    est.add_argument("input")
    est.add_argument("--weights", default=None)
    est.add_argument("--report", choices=("text", "json"), default="json")

    exp = sub.add_parser("experiment", help="run a desk-scale experiment")
    exp.add_argument("name", choices=sorted(experiments.EXPERIMENTS))
    exp.add_argument("--seed", type=int, default=0)
    exp.add_argument("--threads", type=int, default=1)
    exp.add_argument("--refs", type=int, default=None, help="references for success-rate")
    exp.add_argument("--sigma", type=float, default=None, help="noise level override")

    met = sub.add_parser("metrics", help="PSNR/SSIM/per-channel SNR of a pair")
    met.add_argument("ref")
    met.add_argument("test")
    met.add_argument("--report", choices=("text", "json"), default="text")

    return parser


def _add_config_flags(p) -> None:
    p.add_argument("--ps", type=int, default=8, help="patch size")
    p.add_argument("--window", type=int, default=20, help="search window side")
    p.add_argument("--group-size", type=int, default=30, help="patches per group")
    p.add_argument("--search-weight", type=float, default=1.2, help="green-dominance margin")
    p.add_argument("--tau-mult", type=float, default=1.1, help="threshold multiplier")
    p.add_argument("--stride", type=int, default=4, help="reference-grid step")
    p.add_argument("--frames-window", type=int, default=3, help="temporal search window (video)")
    p.add_argument("--threads", type=int, default=1)


def _config_from(args) -> DenoiseConfig:
    return DenoiseConfig(
        patch_size=args.ps,
        window=args.window,
        group_size=args.group_size,
        search_weight=args.search_weight,
        tau_mult=args.tau_mult,
        stride=args.stride,
        threads=args.threads,
    )


def _load_any(path: str, kind: str):
    """Read input for a denoise kind; returns (array, container_semantics|None)."""
    p = Path(path)
    if p.suffix.lower() == ".gcpt":
        arr, semantics = load_container(p)
        return arr, semantics
    if kind == "video" and p.is_dir():
        frames = sorted(
            q for q in p.iterdir() if q.suffix.lower() in (".png", ".pgm", ".pnm")
        )
        if not frames:
            raise FormatError(f"{path}: no frames found")
        return np.stack([load_image(q) for q in frames]), None
    return load_image(p), None


def _save_like(path: str, arr: np.ndarray, semantics: str) -> None:
    """Write output atomically, as a container for .gcpt paths, image otherwise."""
    p = Path(path)
    tmp = p.with_name(f".{p.stem}.tmp{p.suffix}")  # keep the suffix: it selects the format
    try:
        if p.suffix.lower() == ".gcpt":
            save_container(tmp, arr, semantics)
        else:
            save_image(tmp, arr)
        os.replace(tmp, p)
    except Exception:
        tmp.unlink(missing_ok=True)
        raise


def _resolve_weights(path_arg):
    path = path_arg or os.environ.get(WEIGHTS_ENV)
    if not path:
        raise UsageError("no --weights given and GREENPRIOR_WEIGHTS is not set")
    return load_weights(path)


def _cmd_denoise(args) -> int:
    if args.sigma is not None and args.weights is not None:
        raise UsageError("--sigma and --weights are mutually exclusive")
    cfg = _config_from(args)
    arr, semantics = _load_any(args.input, args.kind)
    sigma_map = None

    if args.kind == "image":
        if arr.ndim == 2:
            arr = np.stack([arr] * 3, axis=2)
        if arr.ndim != 3 or arr.shape[2] != 3:
            raise FormatError(f"{args.input}: expected a 3-channel image")
        sigma = _sigma_for(args, arr)
        if not np.isscalar(sigma):
            sigma_map = sigma
        out = denoise_srgb(arr, cfg, sigma=sigma)
        out_sem = "image"
    elif args.kind == "raw":
        if arr.ndim != 2:
            raise FormatError(f"{args.input}: expected a single-plane mosaic")
        sigma = _sigma_for(args, pack_bayer(arr, args.layout))
        if not np.isscalar(sigma):
            sigma_map = sigma
        out = denoise_raw(arr, args.layout, cfg, sigma=sigma)
        out_sem = "image"
    elif args.kind == "video":
        if arr.ndim == 3 and arr.shape[-1] in (3, 4):
            arr = arr[None]  # a single frame
        if arr.ndim != 4 or arr.shape[-1] not in (3, 4):
            raise FormatError(f"{args.input}: expected a frame stack")
        if args.sigma is None:
            clf = _resolve_weights(args.weights)
            sigma = [estimate_sigma_map(frame, clf) for frame in arr]
            sigma_map = sigma[0]
        else:
            sigma = args.sigma
        out = denoise_video(arr, VideoConfig(base=cfg, temporal_window=args.frames_window), sigma)
        out_sem = "frames"
    else:  # hsi
        if arr.ndim != 3:
            raise FormatError(f"{args.input}: expected an (H, W, L) cube")
        if args.weights is not None or args.sigma is None:
            raise UsageError("cubes need a fixed --sigma (estimated noise is unsupported)")
        out = denoise_hsi(arr, HsiConfig(base=cfg), sigma=args.sigma)
        out_sem = "hsi"

    _save_like(args.output, out, out_sem)

    report: dict = {"schema_version": 1, "command": "denoise", "kind": args.kind,
                    "input": args.input, "output": args.output}
    if sigma_map is not None:
        report["sigma_map"] = sigma_map.to_dict()
    elif args.sigma is not None:
        report["sigma"] = args.sigma
    if args.ref is not None:
        ref_arr, _ = _load_any(args.ref, args.kind)
        if args.kind == "image" and ref_arr.ndim == 2:
            ref_arr = np.stack([ref_arr] * 3, axis=2)
        report["metrics"] = _metric_report(ref_arr, out).to_dict()
    _emit(report, args.report)
    return EXIT_OK


def _sigma_for(args, arr):
    """Fixed sigma when given; otherwise an estimated map (``--weights`` or
    the GREENPRIOR_WEIGHTS fallback)."""
    if args.sigma is not None:
        return args.sigma
    clf = _resolve_weights(args.weights)
    return estimate_sigma_map(arr, clf)


def _metric_report(ref: np.ndarray, test: np.ndarray) -> MetricReport:
    if ref.shape != test.shape:
        raise FormatError(f"reference shape {ref.shape} does not match output {test.shape}")
    snr = None
    if ref.ndim == 3 and ref.shape[2] == 3:
        snr = channel_snr(ref, test)
        s = ssim(ref, test)
    elif ref.ndim == 2:
        s = ssim(ref, test)
    elif ref.ndim == 3:
        s = float(np.mean([ssim(ref[:, :, c], test[:, :, c]) for c in range(ref.shape[2])]))
    else:  # frame stacks: average per frame
        s = float(np.mean([ssim(ref[f], test[f]) for f in range(ref.shape[0])]))
    return MetricReport(psnr=psnr(ref, test), ssim=s, channel_snr=snr)


def _cmd_estimate(args) -> int:
    clf = _resolve_weights(args.weights)
    arr, _ = _load_any(args.input, "image")
    sigma_map = estimate_sigma_map(arr, clf)
    report = {
        "schema_version": 1,
        "command": "estimate",
        "input": args.input,
        "sigma_map": sigma_map.to_dict(),
    }
    _emit(report, args.report)
    return EXIT_OK


def _cmd_experiment(args) -> int:
    kwargs: dict = {"seed": args.seed}
    if args.name in ("identity", "tau-sweep"):
        kwargs["threads"] = args.threads
    if args.name == "success-rate" and args.refs is not None:
        kwargs["n_refs"] = args.refs
    if args.sigma is not None and args.name in ("success-rate", "scaling"):
        kwargs["sigma"] = args.sigma
    if args.sigma is not None and args.name == "tau-sweep":
        kwargs["sigma_true"] = args.sigma
    report = experiments.run_experiment(args.name, **kwargs)
    report["schema_version"] = 1
    print(json.dumps(report, indent=2, sort_keys=True))
    return EXIT_OK


def _cmd_metrics(args) -> int:
    ref, _ = _load_any(args.ref, "image")
    test, _ = _load_any(args.test, "image")
    report = {
        "schema_version": 1,
        "command": "metrics",
        "metrics": _metric_report(ref, test).to_dict(),
    }
    _emit(report, args.report)
    return EXIT_OK


def _emit(report: dict, mode: str) -> None:
    if mode == "json":
        print(json.dumps(report, indent=2, sort_keys=True))
        return
    for key, value in report.items():
        if key == "schema_version":
            continue
        if isinstance(value, dict):
            print(f"{key}:")
            for k, v in value.items():
                print(f"  {k}: {v}")
        else:
            print(f"{key}: {value}")


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "denoise":
            return _cmd_denoise(args)
        if args.command == "estimate":
            return _cmd_estimate(args)
        if args.command == "experiment":
            return _cmd_experiment(args)
        return _cmd_metrics(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FileNotFoundError, IsADirectoryError, PermissionError, FormatError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
