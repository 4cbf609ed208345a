"""Command line pipeline around the library.

Subcommands cover sinogram simulation, grid reconstruction by the kernel
or the truncated singular expansion, decomposition self-checks, error
reports against reference phantoms, and stability diagnostics.  Every
output file is accompanied by a JSON manifest recording the tool
version, the exact command, input hashes, the geometry, timing, and
error metrics when a reference is available.  Exit codes: 0 on success,
1 for input/output problems, 2 for validation failures, 3 for numerical
failures.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import math
import os
import sys
import time

import numpy as np

from . import __version__, kernels
from .errors import NumericsError, ValidationError
from .phantom import (
    ImageGrid,
    Phantom,
    eval_phantom,
    get_preset,
    preset_names,
    load_phantom,
)
from .radon import GEOMETRY_3D, read_sinogram, sample_sinogram, write_sinogram
from .reconstruct import (
    ReconstructionConfig,
    lebesgue_function,
    oped2d,
    oped3d,
    reconstruct_points,
)
from .svd import certified_truncation, truncated_svd_reconstruct, verification_report

_SCAN_FLAGS = {"I": "type-I", "II": "type-II", "3d": GEOMETRY_3D}


def _sha256_file(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()


def _resolve_phantom(spec: str):
    """A phantom argument is a JSON file path or a preset name."""
    if os.path.exists(spec):
        return load_phantom(spec), {os.path.basename(spec): _sha256_file(spec)}
    if spec in preset_names():
        phantom = get_preset(spec)
        blob = json.dumps(dataclasses.asdict(phantom), sort_keys=True).encode("utf-8")
        return phantom, {f"preset:{spec}": hashlib.sha256(blob).hexdigest()}
    raise ValidationError(f"'{spec}' is neither a phantom file nor one of the presets {preset_names()}")


def _geometry_summary(sinogram) -> dict:
    return {
        "d": sinogram.d,
        "geometry": sinogram.geometry,
        "order": sinogram.order,
        "directions": int(len(sinogram.directions)),
        "nodes": int(len(sinogram.nodes)),
    }


def _write_manifest(output: str, args, inputs: dict, geometry: dict, seconds: float, metrics=None) -> None:
    manifest = {
        "version": __version__,
        "command": [sys.argv[0]] + list(args.raw_argv),
        "inputs": inputs,
        "geometry": geometry,
        "timing": {"seconds": seconds},
        "metrics": metrics,
    }
    with open(str(output) + ".manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _grid_metrics(grid: ImageGrid, phantom) -> dict:
    if getattr(phantom, "d", None) != grid.d:
        raise ValidationError("reference phantom dimension disagrees with the grid")
    mask = grid.mask()
    points = grid.points()[mask]
    got = grid.values.reshape(-1)[mask]
    want = eval_phantom(phantom, points)
    diff = got - want
    l2 = math.sqrt(float(np.mean(diff * diff)))
    reference_l2 = math.sqrt(float(np.mean(want * want)))
    metrics = {
        "l2_masked": l2,
        "l2_relative": l2 / reference_l2 if reference_l2 > 0.0 else None,
        "max_masked": float(np.max(np.abs(diff))),
        "component_mean_error": [],
    }
    for component in getattr(phantom, "components", ()):  # per-ellipsoid means
        indicator = Phantom(phantom.d, (dataclasses.replace(component, density=1.0),))
        inside = eval_phantom(indicator, points) > 0.5
        mean = float(np.mean(np.abs(diff[inside]))) if np.any(inside) else 0.0
        metrics["component_mean_error"].append(mean)
    return metrics


def _check_finite(grid: ImageGrid) -> ImageGrid:
    if not np.all(np.isfinite(grid.values)):
        raise NumericsError("reconstruction produced non-finite grid values")
    return grid


def _expected_scan(flag: str | None):
    if flag is None:
        return None, None
    scan = _SCAN_FLAGS[flag]
    return scan, 3 if scan == GEOMETRY_3D else 2


def cmd_simulate(args) -> int:
    phantom, inputs = _resolve_phantom(args.phantom or args.preset)
    scan, d = _expected_scan(args.type)
    if args.d is not None:
        if d is not None and d != args.d:
            raise ValidationError("--type and --d disagree")
        d = args.d
    if d is not None and d != phantom.d:
        raise ValidationError(f"phantom is {phantom.d}-dimensional but the scan asks for d={d}")
    kind = scan if phantom.d == 2 else None
    start = time.perf_counter()
    sinogram = sample_sinogram(
        phantom,
        args.order,
        kind=kind,
        analytic=False if args.numeric else None,
        refinement=args.refinement,
        noise_sigma=args.noise,
        seed=args.seed,
    )
    write_sinogram(sinogram, args.output)
    _write_manifest(args.output, args, inputs, _geometry_summary(sinogram), time.perf_counter() - start)
    return 0


def _reconstruct_grid(sinogram, args, truncation):
    resolution = args.resolution
    if truncation is not None and args.filter == "eta":
        raise ValidationError("an explicit truncation cannot be combined with the eta filter")
    if args.algorithm == "svd":
        if args.filter == "eta":
            raise ValidationError("the eta filter applies to the kernel algorithm only")
        level = certified_truncation(sinogram) if truncation is None else truncation
        return truncated_svd_reconstruct(sinogram, level, resolution), level
    if truncation is not None:
        grid = ImageGrid(sinogram.d, resolution, np.zeros(resolution**sinogram.d))
        mask = grid.mask()
        flat = np.zeros(resolution**sinogram.d)
        flat[mask] = reconstruct_points(sinogram, grid.points()[mask], degree=truncation, summation=args.summation)
        return ImageGrid(sinogram.d, resolution, flat), truncation
    scan = sinogram.geometry if sinogram.d == 2 else GEOMETRY_3D
    config = ReconstructionConfig(
        order=sinogram.order,
        scan=scan,
        filter=args.filter,
        resolution=resolution,
        summation=args.summation,
    )
    grid = oped2d(sinogram, config) if sinogram.d == 2 else oped3d(sinogram, config)
    return grid, sinogram.kernel_degree


def cmd_reconstruct(args) -> int:
    sinogram = read_sinogram(args.input)
    inputs = {os.path.basename(args.input): _sha256_file(args.input)}
    if args.order is not None and args.order != sinogram.order:
        raise ValidationError(f"--order {args.order} disagrees with the sinogram order {sinogram.order}")
    scan, d = _expected_scan(args.type)
    if scan is not None and (d != sinogram.d or (sinogram.d == 2 and scan != sinogram.geometry)):
        raise ValidationError(f"--type {args.type} disagrees with the sinogram geometry {sinogram.geometry}")
    start = time.perf_counter()
    grid, degree = _reconstruct_grid(sinogram, args, args.truncation)
    _check_finite(grid)
    seconds = time.perf_counter() - start
    grid.save(args.output)
    if args.pgm:
        grid.to_pgm(args.pgm)
    metrics = None
    if args.reference:
        phantom, reference_inputs = _resolve_phantom(args.reference)
        inputs.update(reference_inputs)
        metrics = _grid_metrics(grid, phantom)
    geometry = _geometry_summary(sinogram)
    geometry.update({"resolution": args.resolution, "algorithm": args.algorithm, "degree": degree})
    _write_manifest(args.output, args, inputs, geometry, seconds, metrics)
    if args.diagnostics:
        scan = sinogram.geometry if sinogram.d == 2 else GEOMETRY_3D
        config = ReconstructionConfig(order=sinogram.order, scan=scan, resolution=args.resolution)
        mask = grid.mask()
        lam = lebesgue_function(config, grid.points()[mask], degree=degree)
        json.dump({"max_lebesgue": float(np.max(lam)), "runtime_seconds": seconds}, sys.stdout)
        sys.stdout.write("\n")
    return 0


def cmd_svd_verify(args) -> int:
    start = time.perf_counter()
    report = verification_report(args.d, args.n_max, refinement=args.refinement)
    seconds = time.perf_counter() - start
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
        geometry = {"d": args.d, "n_max": args.n_max}
        _write_manifest(args.output, args, {}, geometry, seconds)
    else:
        sys.stdout.write(text)
    return 0


def cmd_report(args) -> int:
    grid = ImageGrid.load(args.grid)
    phantom, _ = _resolve_phantom(args.reference)
    metrics = _grid_metrics(grid, phantom)
    json.dump(metrics, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")
    return 0


def cmd_diagnose(args) -> int:
    sinogram = read_sinogram(args.input)
    resolution = args.resolution if args.resolution else (64 if sinogram.d == 2 else 16)
    scan = sinogram.geometry if sinogram.d == 2 else GEOMETRY_3D
    config = ReconstructionConfig(order=sinogram.order, scan=scan, resolution=resolution)
    grid = ImageGrid(sinogram.d, resolution, np.zeros(resolution**sinogram.d))
    start = time.perf_counter()
    lam = lebesgue_function(config, grid.points()[grid.mask()], degree=args.degree)
    report = _geometry_summary(sinogram)
    report.update(
        {
            "kernel_degree": sinogram.kernel_degree,
            "degree": sinogram.kernel_degree if args.degree is None else args.degree,
            "resolution": resolution,
            "max_lebesgue": float(np.max(lam)),
            "backend": kernels.active_backend(),
            "threads": kernels.thread_count(),
            "runtime_seconds": time.perf_counter() - start,
        }
    )
    json.dump(report, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")
    return 0


def _add_reconstruct_flags(sub, svd_only: bool) -> None:
    sub.add_argument("--input", required=True, help="sinogram container")
    sub.add_argument("--output", required=True, help="output grid (raw + JSON sidecar)")
    sub.add_argument("--order", type=int, help="expected scan order; checked against the file")
    sub.add_argument("--type", choices=sorted(_SCAN_FLAGS), help="expected scan kind; checked against the file")
    sub.add_argument("--filter", choices=("none", "eta"), default="none", help="degree-domain taper")
    sub.add_argument("--resolution", type=int, default=128)
    if svd_only:
        sub.add_argument("--truncation", type=int, required=True, help="expansion cut-off degree")
        sub.set_defaults(algorithm="svd")
    else:
        sub.add_argument("--truncation", type=int, help="kernel degree cap (certified maximum for svd)")
        sub.add_argument("--algorithm", choices=("oped", "svd"), default="oped")
    sub.add_argument("--summation", choices=("pairwise", "sequential"), default="pairwise")
    sub.add_argument("--pgm", help="also export an 8-bit preview image")
    sub.add_argument("--reference", help="phantom file or preset for error metrics")
    sub.add_argument("--diagnostics", action="store_true", help="print max Lebesgue value and runtime as JSON")
    sub.add_argument("--threads", type=int, help="worker cap, overrides OPED_THREADS")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="oped", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"oped {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    simulate = commands.add_parser("simulate", help="sample projections of a phantom")
    source = simulate.add_mutually_exclusive_group(required=True)
    source.add_argument("--phantom", help="phantom JSON file")
    source.add_argument("--preset", help=f"one of {preset_names()}")
    simulate.add_argument("--type", choices=sorted(_SCAN_FLAGS), help="scan kind (I, II, or 3d)")
    simulate.add_argument("--d", type=int, choices=(2, 3), help="dimension when --type is not given")
    simulate.add_argument("--order", type=int, required=True)
    simulate.add_argument("--output", required=True)
    simulate.add_argument("--noise", type=float, default=0.0, help="additive Gaussian sigma")
    simulate.add_argument("--seed", type=int, help="PRNG seed, required when --noise > 0")
    simulate.add_argument("--refinement", type=int, default=8, help="numeric-oracle panel count")
    simulate.add_argument("--numeric", action="store_true", help="force the numeric oracle")
    simulate.set_defaults(func=cmd_simulate)

    reconstruct = commands.add_parser("reconstruct", help="kernel or truncated-expansion reconstruction")
    _add_reconstruct_flags(reconstruct, svd_only=False)
    reconstruct.set_defaults(func=cmd_reconstruct)

    svd_reconstruct = commands.add_parser("svd-reconstruct", help="truncated singular-expansion reconstruction")
    _add_reconstruct_flags(svd_reconstruct, svd_only=True)
    svd_reconstruct.set_defaults(func=cmd_reconstruct)

    svd_verify = commands.add_parser("svd-verify", help="numeric self-checks of the decomposition")
    svd_verify.add_argument("--d", type=int, choices=(2, 3), required=True)
    svd_verify.add_argument("--n-max", type=int, default=6)
    svd_verify.add_argument("--refinement", type=int, default=3)
    svd_verify.add_argument("--output", help="write the JSON report here instead of stdout")
    svd_verify.set_defaults(func=cmd_svd_verify)

    report = commands.add_parser("report", help="error metrics of a grid against a reference phantom")
    report.add_argument("--grid", required=True)
    report.add_argument("--reference", required=True)
    report.set_defaults(func=cmd_report)

    diagnose = commands.add_parser("diagnose", help="stability diagnostics of a scan geometry")
    diagnose.add_argument("--input", required=True)
    diagnose.add_argument("--resolution", type=int)
    diagnose.add_argument("--degree", type=int, help="kernel degree for the Lebesgue values")
    diagnose.add_argument("--threads", type=int, help="worker cap, overrides OPED_THREADS")
    diagnose.set_defaults(func=cmd_diagnose)
    return parser


def main(argv=None) -> int:
    raw = list(sys.argv[1:]) if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(raw)
        args.raw_argv = raw
        if getattr(args, "threads", None):
            os.environ["OPED_THREADS"] = str(args.threads)
        return args.func(args)
    except SystemExit as exc:
        return int(exc.code or 0)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericsError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
