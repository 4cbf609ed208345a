"""Reconstruction operators on the unit ball from Radon projection data.

The discrete operator evaluated here forms, for each direction, the
quadrature moments of the measured profile against Gegenbauer polynomials
and backprojects them through the summed kernel

    Phi_n(t, u) = sum_k ((k + d/2) / (d/2)) C_k^(d/2)(t) C_k^(d/2)(u),

optionally tapered by a smooth degree filter.  With geometries whose
cubature and quadrature rules are exact to the matching degrees, the
operator reproduces polynomials up to the supported degree.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ValidationError
from .phantom import ImageGrid
from .radon import GEOMETRIES_2D, GEOMETRY_3D, Sinogram, sinogram_geometry
from .specfun import ball_volume, gauss_gegenbauer_rule, gegenbauer_table

SCAN_KINDS = GEOMETRIES_2D + (GEOMETRY_3D,)
FILTER_KINDS = ("none", "eta")
SUMMATION_MODES = ("pairwise", "sequential")


def smoothing_weight(s):
    """C-infinity taper equal to 1 on [0, 1] and 0 from 2 on.

    The bridge on (1, 2) is g(2-s) / (g(2-s) + g(s-1)) with g(u) = exp(-1/u),
    smooth to all orders and parameter free.
    """
    arr = np.asarray(s, dtype=float)
    out = np.zeros(arr.shape)
    out[arr <= 1.0] = 1.0
    mid = (arr > 1.0) & (arr < 2.0)
    if np.any(mid):
        lo = np.exp(-1.0 / (2.0 - arr[mid]))
        hi = np.exp(-1.0 / (arr[mid] - 1.0))
        out[mid] = lo / (lo + hi)
    return float(out) if arr.ndim == 0 else out


def phi_kernel(d, n, t, u, eta=None):
    """Summed Gegenbauer kernel Phi_n(t, u), optionally degree-tapered.

    Returns sum_{k<=n} eta_k ((k + d/2) / (d/2)) C_k^(d/2)(t) C_k^(d/2)(u);
    eta defaults to all ones.
    """
    _check_dimension(d)
    if n < 0:
        raise ValidationError("kernel degree must be nonnegative")
    lam = d / 2.0
    t_arr, u_arr = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(u, dtype=float))
    factors = _degree_factors(d, n, eta)
    table = gegenbauer_table(n, lam, t_arr) * gegenbauer_table(n, lam, u_arr)
    out = np.tensordot(factors, table, axes=(0, 0))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class ReconstructionConfig:
    """Validated settings shared by the grid reconstruction entry points."""

    order: int
    scan: str = "type-II"
    filter: str = "none"
    resolution: int = 128
    summation: str = "pairwise"

    def __post_init__(self):
        if int(self.order) != self.order or self.order < 1:
            raise ValidationError("order must be an integer of at least 1")
        if int(self.resolution) != self.resolution or self.resolution < 2:
            raise ValidationError("resolution must be an integer of at least 2")
        if self.scan not in SCAN_KINDS:
            raise ValidationError(f"scan must be one of {SCAN_KINDS}, got {self.scan!r}")
        if self.filter not in FILTER_KINDS:
            raise ValidationError(f"filter must be one of {FILTER_KINDS}, got {self.filter!r}")
        if self.summation not in SUMMATION_MODES:
            raise ValidationError(f"summation must be one of {SUMMATION_MODES}, got {self.summation!r}")

    @property
    def d(self) -> int:
        return 2 if self.scan in GEOMETRIES_2D else 3

    @property
    def kernel_degree(self) -> int:
        return 2 * self.order if self.d == 2 else self.order


def reconstruct_points(sinogram: Sinogram, points, degree=None, eta_weights=None, summation="pairwise"):
    """Evaluate the discrete reconstruction operator at arbitrary points.

    degree truncates the kernel (default: the sinogram's full kernel
    degree); eta_weights, when given, taper the kernel degree by degree.
    """
    if summation not in SUMMATION_MODES:
        raise ValidationError(f"summation must be one of {SUMMATION_MODES}, got {summation!r}")
    degree = _resolve_degree(sinogram.kernel_degree, degree)
    table = _coefficient_table(
        sinogram.values, sinogram.nodes, sinogram.node_weights, sinogram.direction_weights, sinogram.d, degree, eta_weights
    )
    pts, single = _as_points(points, sinogram.d)
    out = kernels.backproject(pts, sinogram.directions, table, sinogram.d / 2.0, summation == "pairwise")
    return float(out[0]) if single else out


def oped2d(sinogram: Sinogram, config: ReconstructionConfig) -> ImageGrid:
    """Grid reconstruction from a type-I or type-II sinogram on [-1, 1]^2."""
    if config.d != 2:
        raise ValidationError("oped2d needs a two dimensional scan configuration")
    _check_match(sinogram, config, 2)
    return _reconstruct_grid(sinogram, config)


def oped3d(sinogram: Sinogram, config: ReconstructionConfig) -> ImageGrid:
    """Grid reconstruction from a Gegenbauer-Gauss sinogram on [-1, 1]^3."""
    if config.d != 3:
        raise ValidationError("oped3d needs a three dimensional scan configuration")
    _check_match(sinogram, config, 3)
    return _reconstruct_grid(sinogram, config)


def smoothed_reconstruct(sinogram: Sinogram, eta=None, resolution=128, summation="pairwise") -> ImageGrid:
    """Grid reconstruction with the degree-tapered kernel.

    The sinogram's kernel degree 2n must be even; the taper weights are
    eta(k/n) for k = 0..2n, so every component up to degree n passes
    unchanged and the top of the kernel is damped to zero.
    """
    weights = _filter_weights(sinogram.kernel_degree, eta)
    return _grid_values(sinogram, resolution, sinogram.kernel_degree, weights, summation)


def semi_discrete_partial_sum(profile, cubature, d, n, x, npoints=None):
    """Partial sum with discrete directions but quadrature-resolved offsets.

    profile(xi, t) must return the Radon projections along direction xi at
    the offset array t.  The direction cubature must be exact to degree 2n;
    the offset integral uses a Gauss rule for the weight (1-t^2)^((d-1)/2)
    with npoints nodes (default: enough for degree-n data and then some).
    """
    _check_dimension(d)
    if n < 0:
        raise ValidationError("partial sum degree must be nonnegative")
    if cubature.d != d:
        raise ValidationError("cubature dimension disagrees with d")
    if cubature.degree < 2 * n:
        raise ValidationError(f"cubature degree {cubature.degree} is too low for partial sums of degree {n}")
    rule = gauss_gegenbauer_rule((d - 1) / 2.0, int(npoints) if npoints else max(n + 1, 64))
    values = np.stack([np.asarray(profile(xi, rule.nodes), dtype=float) for xi in cubature.points])
    table = _coefficient_table(values, rule.nodes, rule.weights, cubature.weights, d, n, None)
    pts, single = _as_points(x, d)
    out = kernels.backproject(pts, cubature.points, table, d / 2.0, True)
    return float(out[0]) if single else out


def lebesgue_function(config: ReconstructionConfig, x, degree=None):
    """Pointwise operator-norm diagnostic of the scan geometry.

    Returns sum_nu lambda_nu sum_j w_j (1-t_j^2)^((d-1)/2) |Phi(t_j, <x, xi_nu>)|,
    the worst-case amplification of bounded projection data at x.
    """
    d = config.d
    cubature, rule = sinogram_geometry(d, config.order, config.scan if d == 2 else None)
    degree = _resolve_degree(config.kernel_degree, degree)
    eta = _filter_weights(degree, None) if config.filter == "eta" else None
    rows = (gegenbauer_table(degree, d / 2.0, rule.nodes) * _degree_factors(d, degree, eta)[:, None]).T
    factors = rule.weights * (1.0 - rule.nodes * rule.nodes) ** ((d - 1) / 2.0)
    pts, single = _as_points(x, d)
    out = kernels.lebesgue_values(pts, cubature.points, cubature.weights, factors, rows, d / 2.0)
    return float(out[0]) if single else out


def _check_dimension(d) -> None:
    if d not in (2, 3):
        raise ValidationError("only d = 2 and d = 3 are supported")


def _check_match(sinogram: Sinogram, config: ReconstructionConfig, d: int) -> None:
    if sinogram.d != d:
        raise ValidationError(f"expected a {d}-dimensional sinogram, got d={sinogram.d}")
    if sinogram.geometry != config.scan:
        raise ValidationError(f"scan geometry mismatch: sinogram {sinogram.geometry!r}, configuration {config.scan!r}")
    if sinogram.order != config.order:
        raise ValidationError(f"order mismatch: sinogram {sinogram.order}, configuration {config.order}")


def _resolve_degree(kernel_degree: int, degree) -> int:
    if degree is None:
        return kernel_degree
    degree = int(degree)
    if not 0 <= degree <= kernel_degree:
        raise ValidationError(f"truncation degree must lie in [0, {kernel_degree}], got {degree}")
    return degree


def _degree_factors(d: int, degree: int, eta_weights) -> np.ndarray:
    lam = d / 2.0
    factors = (np.arange(degree + 1) + lam) / lam
    if eta_weights is not None:
        eta_weights = np.asarray(eta_weights, dtype=float)
        if eta_weights.ndim != 1 or eta_weights.size < degree + 1:
            raise ValidationError("need one filter weight per kernel degree")
        if np.any(eta_weights < 0.0) or np.any(eta_weights > 1.0):
            raise ValidationError("filter weights must lie in [0, 1]")
        factors = factors * eta_weights[: degree + 1]
    return factors


def _filter_weights(kernel_degree: int, eta) -> np.ndarray:
    if kernel_degree % 2 or kernel_degree == 0:
        raise ValidationError("the eta filter needs a positive even kernel degree")
    eta_fn = smoothing_weight if eta is None else eta
    return np.asarray(eta_fn(np.arange(kernel_degree + 1) / (kernel_degree // 2)), dtype=float)


def _coefficient_table(values, nodes, node_weights, direction_weights, d, degree, eta_weights) -> np.ndarray:
    profile = values * (1.0 - nodes * nodes) ** (-(d - 1) / 2.0)
    moments = np.einsum("nj,j,kj->nk", profile, node_weights, gegenbauer_table(degree, d / 2.0, nodes))
    scaled = _degree_factors(d, degree, eta_weights)[None, :] * moments
    return (direction_weights / ball_volume(d - 1))[:, None] * scaled


def _reconstruct_grid(sinogram: Sinogram, config: ReconstructionConfig) -> ImageGrid:
    eta = _filter_weights(sinogram.kernel_degree, None) if config.filter == "eta" else None
    return _grid_values(sinogram, config.resolution, sinogram.kernel_degree, eta, config.summation)


def _grid_values(sinogram: Sinogram, resolution: int, degree, eta_weights, summation) -> ImageGrid:
    resolution = int(resolution)
    if resolution < 2:
        raise ValidationError("resolution must be an integer of at least 2")
    grid = ImageGrid(sinogram.d, resolution, np.zeros(resolution**sinogram.d))
    mask = grid.mask()
    flat = np.zeros(resolution**sinogram.d)
    flat[mask] = reconstruct_points(sinogram, grid.points()[mask], degree, eta_weights, summation)
    return ImageGrid(sinogram.d, resolution, flat)


def _as_points(x, d: int):
    pts = np.asarray(x, dtype=float)
    single = pts.ndim == 1
    pts = np.atleast_2d(pts)
    if pts.ndim != 2 or pts.shape[1] != d:
        raise ValidationError(f"points must have {d} coordinates")
    return pts, single
