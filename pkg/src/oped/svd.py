"""Singular value decomposition of the Radon transform on the unit ball.

The transform maps L2 of the unit ball B^d into L2 of the cylinder
Z = S^{d-1} x [-1, 1] taken with the weight (1 - t^2)^((1-d)/2).  Its
right singular vectors are radial Jacobi polynomials times solid
spherical harmonics, the left singular vectors are weighted Gegenbauer
polynomials times the same harmonics, and the singular value depends on
the polynomial degree alone.  This module evaluates both bases, computes
expansion coefficients from projection data, reconstructs by hard
truncation of the expansion, and cross-checks the pieces against numeric
projection integrals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Dict, Tuple

import numpy as np

from .errors import ValidationError
from .geometry import ball_rule, circle_directions, sphere_product_cubature
from .phantom import ImageGrid
from .radon import Sinogram, radon_numeric
from .specfun import (
    ball_volume,
    gauss_gegenbauer_rule,
    gegenbauer,
    gegenbauer_at_one,
    gegenbauer_norm,
    gegenbauer_table,
    jacobi,
)

__all__ = [
    "BasisIndex",
    "SingularTriple",
    "basis_indices",
    "ball_basis",
    "certified_truncation",
    "cylinder_basis",
    "cylinder_coefficients",
    "harmonic_dim",
    "radon_expansion_term",
    "radon_of_orthogonal_polynomial",
    "singular_triple",
    "singular_value",
    "solid_harmonic",
    "spherical_harmonic",
    "svd_forward",
    "truncated_svd_points",
    "truncated_svd_reconstruct",
    "verification_report",
]


def _check_dimension(d: int) -> None:
    if d not in (2, 3):
        raise ValidationError("dimension must be 2 or 3")


def harmonic_dim(d: int, m: int) -> int:
    """Dimension of the space of degree-m spherical harmonics on S^{d-1}."""
    _check_dimension(d)
    if m < 0:
        raise ValidationError("harmonic degree must be nonnegative")
    homogeneous = math.comb(m + d - 1, d - 1)
    lower = math.comb(m + d - 3, d - 1) if m >= 2 else 0
    return homogeneous - lower


@dataclass(frozen=True, order=True)
class BasisIndex:
    """Index (n, k, j) of one singular-vector pair.

    n is the total polynomial degree, k the radial index with 2k <= n,
    and j enumerates the degree-(n - 2k) spherical harmonics starting
    from 1.  The upper bound on j depends on the dimension and is checked
    by the evaluators.
    """

    n: int
    k: int
    j: int

    def __post_init__(self):
        if self.n < 0 or self.k < 0 or 2 * self.k > self.n:
            raise ValidationError("basis index needs n >= 0 and 0 <= 2k <= n")
        if self.j < 1:
            raise ValidationError("harmonic counter j starts at 1")


def _check_index(d: int, index: BasisIndex) -> int:
    _check_dimension(d)
    m = index.n - 2 * index.k
    if index.j > harmonic_dim(d, m):
        raise ValidationError(f"harmonic counter {index.j} exceeds the dimension {harmonic_dim(d, m)}")
    return m


def basis_indices(d: int, n: int) -> Tuple[BasisIndex, ...]:
    """All indices of exact degree n, ordered by radial index then counter."""
    _check_dimension(d)
    if n < 0:
        raise ValidationError("degree must be nonnegative")
    out = []
    for k in range(n // 2 + 1):
        for j in range(1, harmonic_dim(d, n - 2 * k) + 1):
            out.append(BasisIndex(n, k, j))
    return tuple(out)


def _assoc_legendre(degree: int, order: int, x: np.ndarray) -> np.ndarray:
    # unsigned associated Legendre function by the stable upward recurrence
    # (l - m) P_l^m = (2l - 1) x P_{l-1}^m - (l + m - 1) P_{l-2}^m
    s = np.sqrt(np.maximum(0.0, 1.0 - x * x))
    prev = np.ones_like(x)
    for i in range(1, order + 1):
        prev = prev * (2.0 * i - 1.0) * s
    if degree == order:
        return prev
    curr = (2.0 * order + 1.0) * x * prev
    for ell in range(order + 2, degree + 1):
        prev, curr = curr, ((2.0 * ell - 1.0) * x * curr - (ell + order - 1.0) * prev) / (ell - order)
    return curr


def spherical_harmonic(d: int, m: int, j: int, xi) -> np.ndarray:
    """Real spherical harmonic Y_{j,m} on S^{d-1}, orthonormal in the mean.

    The basis is orthonormal against the normalized surface measure.  For
    d = 2 the degree-m pair is (sqrt(2) cos(m theta), sqrt(2) sin(m theta))
    with the constant 1 at m = 0.  For d = 3 the counter j walks the
    Fourier orders as 0, 1 cosine, 1 sine, ..., m cosine, m sine.
    """
    pts = np.asarray(xi, dtype=float)
    _check_dimension(d)
    if pts.shape[-1] != d:
        raise ValidationError(f"directions must have {d} coordinates")
    if m < 0 or not 1 <= j <= harmonic_dim(d, m):
        raise ValidationError("harmonic index out of range")
    if d == 2:
        if m == 0:
            out = np.ones(pts.shape[:-1])
        else:
            theta = np.arctan2(pts[..., 1], pts[..., 0])
            out = math.sqrt(2.0) * (np.cos(m * theta) if j == 1 else np.sin(m * theta))
    else:
        polar = np.clip(pts[..., 2], -1.0, 1.0)
        if j == 1:
            out = math.sqrt(2.0 * m + 1.0) * _assoc_legendre(m, 0, polar)
        else:
            order = j // 2
            azimuth = order * np.arctan2(pts[..., 1], pts[..., 0])
            scale = math.sqrt(2.0 * (2.0 * m + 1.0) * math.factorial(m - order) / math.factorial(m + order))
            trig = np.cos(azimuth) if j % 2 == 0 else np.sin(azimuth)
            out = scale * _assoc_legendre(m, order, polar) * trig
    return float(out) if np.ndim(out) == 0 else out


def solid_harmonic(d: int, m: int, j: int, x) -> np.ndarray:
    """Homogeneous harmonic polynomial |x|^m Y_{j,m}(x/|x|) on R^d."""
    pts = np.asarray(x, dtype=float)
    if m == 0:
        value = spherical_harmonic(d, 0, j, pts)
        return np.broadcast_to(np.asarray(value), pts.shape[:-1]).copy() if np.ndim(pts) > 1 else value
    radius = np.sqrt(np.sum(pts * pts, axis=-1))
    safe = np.where(radius > 0.0, radius, 1.0)
    out = radius**m * spherical_harmonic(d, m, j, pts / safe[..., None])
    return float(out) if np.ndim(out) == 0 else out


def ball_basis(index: BasisIndex, x) -> np.ndarray:
    """Orthonormal polynomial f_{k,j}^n on the unit ball.

    sqrt((n + d/2)/(d/2)) P_k^(0, n-2k+(d-2)/2)(2|x|^2 - 1) times the solid
    harmonic of degree n - 2k; orthonormal against the ball mean b_d^{-1}
    times the Lebesgue integral.  The dimension is read off the points.
    """
    pts = np.asarray(x, dtype=float)
    d = pts.shape[-1]
    m = _check_index(d, index)
    r2 = np.sum(pts * pts, axis=-1)
    radial = jacobi(index.k, 0.0, m + (d - 2) / 2.0, 2.0 * r2 - 1.0)
    norm = math.sqrt((index.n + d / 2.0) / (d / 2.0))
    out = norm * radial * solid_harmonic(d, m, index.j, pts)
    return float(out) if np.ndim(out) == 0 else out


def cylinder_basis(index: BasisIndex, xi, t) -> np.ndarray:
    """Orthonormal function g_{k,j}^n on the projection cylinder.

    (1 - t^2)^((d-1)/2) C_n^{d/2}(t) Y_{j,n-2k}(xi) scaled to unit norm in
    the weighted cylinder inner product; xi and t broadcast against each
    other.
    """
    pts = np.asarray(xi, dtype=float)
    d = pts.shape[-1]
    m = _check_index(d, index)
    tt = np.asarray(t, dtype=float)
    radial = (1.0 - tt * tt) ** ((d - 1) / 2.0) * gegenbauer(index.n, d / 2.0, tt)
    out = radial / math.sqrt(gegenbauer_norm(index.n, d / 2.0)) * spherical_harmonic(d, m, index.j, pts)
    return float(out) if np.ndim(out) == 0 else out


def singular_value(d: int, n: int) -> float:
    """Singular value at degree n: b_{d-1} sqrt(n!/(d)_n), decreasing in n."""
    _check_dimension(d)
    if n < 0:
        raise ValidationError("degree must be nonnegative")
    ratio = 1.0
    for i in range(n):
        ratio *= (i + 1.0) / (d + i)
    return ball_volume(d - 1) * math.sqrt(ratio)


@dataclass(frozen=True)
class SingularTriple:
    """One singular value with its ball-side and cylinder-side vectors."""

    index: BasisIndex
    gamma: float
    ball_side: Callable
    cylinder_side: Callable


def singular_triple(d: int, index: BasisIndex) -> SingularTriple:
    """Bundle the singular value and both basis evaluators for one index."""
    _check_index(d, index)
    return SingularTriple(
        index,
        singular_value(d, index.n),
        lambda x: ball_basis(index, x),
        lambda xi, t: cylinder_basis(index, xi, t),
    )


def radon_of_orthogonal_polynomial(p: Callable, n: int, xi, t) -> np.ndarray:
    """Projections of a degree-n orthogonal polynomial from sphere values.

    For P in the degree-n orthogonal space the projection along direction
    xi at offset t is b_{d-1} (1 - t^2)^((d-1)/2) C_n^{d/2}(t) /
    C_n^{d/2}(1) times P(xi); only the restriction of P to the sphere is
    needed.  xi may be one direction or a batch; t broadcasts.
    """
    pts = np.asarray(xi, dtype=float)
    d = pts.shape[-1]
    _check_dimension(d)
    if n < 0:
        raise ValidationError("degree must be nonnegative")
    tt = np.asarray(t, dtype=float)
    shape = (1.0 - tt * tt) ** ((d - 1) / 2.0) * gegenbauer(n, d / 2.0, tt) / gegenbauer_at_one(n, d / 2.0)
    out = ball_volume(d - 1) * shape * np.asarray(p(pts), dtype=float)
    return float(out) if np.ndim(out) == 0 else out


def _geometry_degrees(sinogram: Sinogram) -> Tuple[int, int]:
    # exactness degrees (directions, offsets) certified by the stock scans
    if sinogram.geometry in ("type-I", "type-II"):
        return 4 * sinogram.order, 4 * sinogram.order - 1
    if sinogram.geometry == "gegenbauer-gauss":
        return 2 * sinogram.order, 2 * sinogram.order + 1
    raise ValidationError("coefficient quadrature needs a stock scan geometry with known exactness degrees")


def certified_truncation(sinogram: Sinogram) -> int:
    """Largest truncation degree the sinogram's own rules integrate exactly."""
    direction_degree, node_degree = _geometry_degrees(sinogram)
    return min(direction_degree, node_degree) // 2


def cylinder_coefficients(sinogram: Sinogram, truncation: int) -> Dict[BasisIndex, float]:
    """Inner products of the data with every cylinder basis function.

    The cylinder weight cancels the two (1 - t^2)^((d-1)/2) factors
    carried by the data and the basis, so the offsets integrate a plain
    polynomial; the sinogram's own rules are reused and must be exact to
    degree 2*truncation in both directions and offsets.
    """
    order = int(truncation)
    if order < 0:
        raise ValidationError("truncation degree must be nonnegative")
    direction_degree, node_degree = _geometry_degrees(sinogram)
    if direction_degree < 2 * order or node_degree < 2 * order:
        raise ValidationError(
            f"scan geometry is exact to degree ({direction_degree}, {node_degree}) in "
            f"(directions, offsets) but truncation {order} needs {2 * order} in both"
        )
    d = sinogram.d
    profile = sinogram.values * (1.0 - sinogram.nodes * sinogram.nodes) ** (-(d - 1) / 2.0)
    table = gegenbauer_table(order, d / 2.0, sinogram.nodes)
    moments = np.einsum("vj,j,kj->kv", profile, sinogram.node_weights, table)
    out: Dict[BasisIndex, float] = {}
    for n in range(order + 1):
        scale = gegenbauer_norm(n, d / 2.0) ** -0.5
        weighted = sinogram.direction_weights * moments[n]
        for index in basis_indices(d, n):
            harmonics = spherical_harmonic(d, n - 2 * index.k, index.j, sinogram.directions)
            out[index] = float(scale * np.dot(weighted, harmonics))
    return out


def truncated_svd_points(sinogram: Sinogram, truncation: int, x) -> np.ndarray:
    """Truncated singular-expansion inverse evaluated at points."""
    pts = np.asarray(x, dtype=float)
    single = pts.ndim == 1
    pts = np.atleast_2d(pts)
    if pts.ndim != 2 or pts.shape[1] != sinogram.d:
        raise ValidationError(f"points must have {sinogram.d} coordinates")
    coefficients = cylinder_coefficients(sinogram, truncation)
    total = np.zeros(len(pts))
    for index, value in coefficients.items():
        total += value / singular_value(sinogram.d, index.n) * ball_basis(index, pts)
    return float(total[0]) if single else total


def truncated_svd_reconstruct(sinogram: Sinogram, truncation: int, resolution: int = 128) -> ImageGrid:
    """Grid reconstruction by hard truncation of the singular expansion."""
    resolution = int(resolution)
    if resolution < 2:
        raise ValidationError("resolution must be an integer of at least 2")
    grid = ImageGrid(sinogram.d, resolution, np.zeros(resolution**sinogram.d))
    mask = grid.mask()
    flat = np.zeros(resolution**sinogram.d)
    flat[mask] = truncated_svd_points(sinogram, truncation, grid.points()[mask])
    return ImageGrid(sinogram.d, resolution, flat)


def svd_forward(f: Callable, d: int, truncation: int, quadrature_degree: int = None) -> Dict[BasisIndex, float]:
    """Coefficients of the projections of f in the cylinder basis.

    The coefficient at index (n, k, j) is the singular value at n times
    the ball-mean inner product of f with the matching ball basis
    function.  The ball rule is exact to quadrature_degree (default
    2*truncation, enough for polynomial f of degree <= truncation).
    """
    _check_dimension(d)
    order = int(truncation)
    if order < 0:
        raise ValidationError("truncation degree must be nonnegative")
    degree = 2 * order if quadrature_degree is None else int(quadrature_degree)
    points, weights = ball_rule(d, max(degree, 1))
    values = np.asarray(f(points), dtype=float)
    out: Dict[BasisIndex, float] = {}
    for n in range(order + 1):
        gamma = singular_value(d, n)
        for index in basis_indices(d, n):
            out[index] = float(gamma * np.dot(weights, values * ball_basis(index, points)))
    return out


def radon_expansion_term(f: Callable, d: int, n: int, xi, t, quadrature_degree: int = None) -> np.ndarray:
    """Degree-n term of the projection expansion from one aggregate integral.

    Computes a_n(xi) = ball mean of f(y) C_n^{d/2}(<y, xi>) and returns
    b_{d-1} (1 - t^2)^((d-1)/2) C_n^{d/2}(t) a_n(xi) / h_n, the degree-n
    part of the projections along the single direction xi.  Summing the
    per-index coefficients against the cylinder basis gives the same
    value.
    """
    _check_dimension(d)
    if n < 0:
        raise ValidationError("degree must be nonnegative")
    direction = np.asarray(xi, dtype=float)
    if direction.shape != (d,):
        raise ValidationError(f"expected a single direction with {d} coordinates")
    degree = 2 * n if quadrature_degree is None else int(quadrature_degree)
    points, weights = ball_rule(d, max(degree, 1))
    aggregate = float(np.dot(weights, np.asarray(f(points), dtype=float) * gegenbauer(n, d / 2.0, points @ direction)))
    tt = np.asarray(t, dtype=float)
    shape = (1.0 - tt * tt) ** ((d - 1) / 2.0) * gegenbauer(n, d / 2.0, tt)
    out = ball_volume(d - 1) * shape * aggregate / gegenbauer_norm(n, d / 2.0)
    return float(out) if np.ndim(out) == 0 else out


def _lattice_directions(d: int, count: int) -> np.ndarray:
    if d == 2:
        angles = np.arange(count) * (2.0 * math.pi / count) + 0.05
        return np.stack([np.cos(angles), np.sin(angles)], axis=1)
    polar = np.linspace(-0.9, 0.9, 4)
    azimuth = np.arange(count // 4) * (2.0 * math.pi / (count // 4)) + 0.2
    sin_polar = np.sqrt(1.0 - polar * polar)
    grid = [
        (sp * math.cos(a), sp * math.sin(a), cp)
        for cp, sp in zip(polar, sin_polar)
        for a in azimuth
    ]
    return np.asarray(grid)


def _gram_residual(vectors: np.ndarray, weights: np.ndarray) -> float:
    gram = (vectors * weights) @ vectors.T
    return float(np.max(np.abs(gram - np.eye(len(vectors)))))


def _full_sphere(cubature) -> Tuple[np.ndarray, np.ndarray]:
    # a symmetric cubature stands for the antipodally averaged sum; writing
    # out both half-point images makes it exact for odd integrands too
    if cubature.d == 2:
        return cubature.points, cubature.weights
    points = np.concatenate([cubature.points, -cubature.points])
    weights = np.concatenate([cubature.weights, cubature.weights]) * 0.5
    return points, weights


def verification_report(d: int, n_max: int, refinement: int = 3) -> dict:
    """Numeric cross-checks of the decomposition at degrees <= n_max.

    Returns a JSON-ready dict with the maximal residual of the closed-form
    projection/basis pairing over a 20x20 direction-offset lattice against
    numeric projection integrals, the Gram residuals of the sphere, ball,
    and cylinder bases under exact rules, and the singular value table.
    """
    _check_dimension(d)
    nmax = int(n_max)
    if nmax < 0:
        raise ValidationError("degree must be nonnegative")
    directions = _lattice_directions(d, 20)
    offsets = np.linspace(-0.95, 0.95, 20)
    pair_residual = 0.0
    for n in range(nmax + 1):
        gamma = singular_value(d, n)
        for index in basis_indices(d, n):
            for direction in directions:
                numeric = radon_numeric(lambda pts: ball_basis(index, pts), direction, offsets, refinement=refinement)
                closed = gamma * cylinder_basis(index, direction, offsets)
                pair_residual = max(pair_residual, float(np.max(np.abs(numeric - closed))))

    cubature = circle_directions(max(nmax, 1)) if d == 2 else sphere_product_cubature(max(nmax, 1))
    sphere_points, sphere_weights = _full_sphere(cubature)
    harmonics = [
        spherical_harmonic(d, m, j, sphere_points)
        for m in range(nmax + 1)
        for j in range(1, harmonic_dim(d, m) + 1)
    ]
    sphere_residual = _gram_residual(np.asarray(harmonics), sphere_weights)

    indices = [index for n in range(nmax + 1) for index in basis_indices(d, n)]
    ball_points, ball_weights = ball_rule(d, 2 * nmax + 1)
    ball_residual = _gram_residual(np.asarray([ball_basis(i, ball_points) for i in indices]), ball_weights)

    rule = gauss_gegenbauer_rule((d - 1) / 2.0, nmax + 1)
    cyl_vectors = []
    for index in indices:
        m = index.n - 2 * index.k
        # the weighted inner product cancels the data-side decay, so the
        # plain polynomial factors are what the product rule integrates
        radial = gegenbauer(index.n, d / 2.0, rule.nodes) / math.sqrt(gegenbauer_norm(index.n, d / 2.0))
        angular = spherical_harmonic(d, m, index.j, sphere_points)
        cyl_vectors.append(np.outer(angular, radial).reshape(-1))
    cyl_weights = np.outer(sphere_weights, rule.weights).reshape(-1)
    cylinder_residual = _gram_residual(np.asarray(cyl_vectors), cyl_weights)

    return {
        "d": d,
        "n_max": nmax,
        "max_pair_residual": pair_residual,
        "gram_residuals": {
            "sphere": sphere_residual,
            "ball": ball_residual,
            "cylinder": cylinder_residual,
        },
        "gamma_table": [[n, singular_value(d, n)] for n in range(nmax + 1)],
    }
