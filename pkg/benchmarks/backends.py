"""Compare the compiled and the pure-numpy evaluation backends.

Times the reconstruction hot paths (kernel back-projection and the
Lebesgue diagnostic) on a head-phantom scan under both values of
OPED_BACKEND and prints a small table plus the speedup.  The two
backends are asserted to agree bitwise on every run.

Usage: python3 benchmarks/backends.py [--order 32] [--resolution 128]
       [--repeats 3]
"""

from __future__ import annotations

import argparse
import os
import time

import numpy as np

from oped.kernels import active_backend
from oped.phantom import get_preset
from oped.radon import sample_sinogram
from oped.reconstruct import ReconstructionConfig, lebesgue_function, oped2d


def run_backend(backend: str, sinogram, resolution: int, repeats: int):
    os.environ["OPED_BACKEND"] = backend
    assert active_backend() == backend
    config = ReconstructionConfig(order=sinogram.order, resolution=resolution)
    grid = oped2d(sinogram, config)  # warm-up (and jit compile)
    points = grid.points()[grid.mask()]
    times = {"reconstruct": [], "lebesgue": []}
    lam = None
    for _ in range(repeats):
        start = time.perf_counter()
        grid = oped2d(sinogram, config)
        times["reconstruct"].append(time.perf_counter() - start)
        start = time.perf_counter()
        lam = lebesgue_function(config, points)
        times["lebesgue"].append(time.perf_counter() - start)
    return {name: min(vals) for name, vals in times.items()}, grid.values, lam


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--order", type=int, default=32)
    parser.add_argument("--resolution", type=int, default=128)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    sinogram = sample_sinogram(get_preset("shepp_logan_2d"), args.order)
    print(f"scan: head phantom, order {args.order}, "
          f"{len(sinogram.directions)} directions x {len(sinogram.nodes)} nodes, "
          f"grid {args.resolution}^2, best of {args.repeats}")

    results = {}
    values = {}
    for backend in ("numpy", "numba"):
        best, grid_values, lam = run_backend(backend, sinogram, args.resolution, args.repeats)
        results[backend] = best
        values[backend] = (grid_values, lam)
        print(f"  {backend:>6}: reconstruct {best['reconstruct'] * 1e3:8.1f} ms   "
              f"lebesgue {best['lebesgue'] * 1e3:8.1f} ms")

    if not np.array_equal(values["numpy"][0], values["numba"][0]):
        raise AssertionError("backends disagree on the reconstruction grid")
    if not np.array_equal(values["numpy"][1], values["numba"][1]):
        raise AssertionError("backends disagree on the Lebesgue values")

    for name in ("reconstruct", "lebesgue"):
        ratio = results["numpy"][name] / results["numba"][name]
        print(f"  numba speedup, {name}: {ratio:.1f}x")
    print("  bitwise agreement: ok")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
