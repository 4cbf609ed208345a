"""Direction sets, sphere cubatures and orthogonal frames.

Cubatures over the sphere S^(d-1) are stored with weights summing to one,
i.e. they approximate the mean value of the integrand.  The direction sets
used for Radon sampling exploit evenness of the projections, so their
stated degree refers to even integrands only.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .specfun import gauss_legendre_rule

__all__ = [
    "SphericalCubature",
    "ball_rule",
    "circle_directions",
    "half_circle_directions",
    "orthogonal_frame",
    "sphere_product_cubature",
    "sphere_tensor_rule",
]


@dataclass(frozen=True)
class SphericalCubature:
    """Unit directions with positive weights summing to one.

    degree is the largest total degree of even polynomials on the sphere
    integrated exactly (the sampling schemes here all identify antipodes).
    """

    points: np.ndarray
    weights: np.ndarray
    degree: int

    def __post_init__(self):
        points = np.atleast_2d(np.asarray(self.points, dtype=float))
        weights = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "weights", weights)
        if points.shape[0] != weights.shape[0]:
            raise ValueError("points and weights disagree in length")
        norms = np.linalg.norm(points, axis=1)
        if np.max(np.abs(norms - 1.0)) > 1e-12:
            raise ValueError("cubature points must be unit vectors")
        if np.any(weights <= 0.0):
            raise ValueError("cubature weights must be positive")
        if abs(weights.sum() - 1.0) > 1e-12:
            raise ValueError("cubature weights must sum to one")

    @property
    def d(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.points.shape[0]

    def integrate(self, f) -> float:
        vals = f(self.points) if callable(f) else np.asarray(f, dtype=float)
        return float(np.dot(self.weights, vals))

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "points": self.points.tolist(),
            "weights": self.weights.tolist(),
            "degree": self.degree,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "SphericalCubature":
        return cls(np.asarray(data["points"], dtype=float), np.asarray(data["weights"], dtype=float), int(data["degree"]))

    @classmethod
    def from_json(cls, text: str) -> "SphericalCubature":
        return cls.from_dict(json.loads(text))


def circle_directions(m: int) -> SphericalCubature:
    """2m+1 equispaced unit vectors on the full circle, angles 2 nu pi / (2m+1).

    Exact for even trigonometric polynomials of degree up to 4m.
    """
    if m < 0:
        raise ValueError("m must be nonnegative")
    count = 2 * m + 1
    phi = 2.0 * np.arange(count) * math.pi / count
    points = np.stack([np.cos(phi), np.sin(phi)], axis=1)
    weights = np.full(count, 1.0 / count)
    return SphericalCubature(points, weights, 4 * m)


def half_circle_directions(n: int) -> SphericalCubature:
    """n+1 equispaced unit vectors with angles nu pi / (n+1) on the half circle.

    Exact for even trigonometric polynomials of degree up to 2n.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    phi = np.arange(n + 1) * math.pi / (n + 1)
    points = np.stack([np.cos(phi), np.sin(phi)], axis=1)
    weights = np.full(n + 1, 1.0 / (n + 1))
    return SphericalCubature(points, weights, 2 * n)


def sphere_product_cubature(n: int) -> SphericalCubature:
    """(n+1)^2 points on S^2: Gauss-Legendre polar nodes times half-circle azimuths.

    Point (k, nu) is (sin(nu pi/(n+1)) sin(theta_k), cos(nu pi/(n+1)) sin(theta_k),
    cos(theta_k)) with cos(theta_k) the n+1 Legendre nodes; weight lambda_k/(n+1).
    Symmetric cubature of degree 2n (even integrands).
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    polar = gauss_legendre_rule(n + 1)
    cos_t = polar.nodes
    sin_t = np.sqrt(np.maximum(0.0, 1.0 - cos_t * cos_t))
    phi = np.arange(n + 1) * math.pi / (n + 1)
    points = np.empty(((n + 1) * (n + 1), 3))
    weights = np.empty((n + 1) * (n + 1))
    idx = 0
    for k in range(n + 1):
        for nu in range(n + 1):
            points[idx] = (math.sin(phi[nu]) * sin_t[k], math.cos(phi[nu]) * sin_t[k], cos_t[k])
            weights[idx] = polar.weights[k] / (n + 1)
            idx += 1
    return SphericalCubature(points, weights, 2 * n)


def sphere_tensor_rule(degree: int) -> SphericalCubature:
    """Full product rule on S^2 exact for all spherical polynomials up to degree.

    Gauss-Legendre in the polar cosine and a full equispaced azimuth circle;
    unlike sphere_product_cubature this does not rely on evenness.
    """
    if degree < 0:
        raise ValueError("degree must be nonnegative")
    n_polar = degree // 2 + 1
    n_azim = degree + 1
    polar = gauss_legendre_rule(n_polar)
    cos_t = polar.nodes
    sin_t = np.sqrt(np.maximum(0.0, 1.0 - cos_t * cos_t))
    phi = 2.0 * np.arange(n_azim) * math.pi / n_azim
    cp, sp = np.cos(phi), np.sin(phi)
    points = np.empty((n_polar * n_azim, 3))
    weights = np.empty(n_polar * n_azim)
    idx = 0
    for k in range(n_polar):
        for nu in range(n_azim):
            points[idx] = (sin_t[k] * cp[nu], sin_t[k] * sp[nu], cos_t[k])
            weights[idx] = polar.weights[k] / n_azim
            idx += 1
    return SphericalCubature(points, weights, degree)


def ball_rule(d: int, degree: int):
    """Points and weights integrating polynomials up to degree over the unit
    ball in R^d, normalized so the weights sum to one (ball mean value).

    Returns (points, weights) as plain arrays.
    """
    if d not in (2, 3):
        raise ValueError("ball_rule supports d = 2 and d = 3")
    n_r = degree // 2 + 2
    radial = gauss_legendre_rule(n_r)
    r = 0.5 * (radial.nodes + 1.0)  # map to (0, 1)
    if d == 2:
        n_ang = degree + 1
        theta = 2.0 * np.arange(n_ang) * math.pi / n_ang
        dirs = np.stack([np.cos(theta), np.sin(theta)], axis=1)
        ang_w = np.full(n_ang, 1.0 / n_ang)
        rad_w = radial.weights * 2.0 * r  # mean over the disk: 2 r dr
    else:
        sphere = sphere_tensor_rule(degree)
        dirs, ang_w = sphere.points, sphere.weights
        rad_w = radial.weights * 3.0 * r * r  # mean over the ball: 3 r^2 dr
    points = (r[:, None, None] * dirs[None, :, :]).reshape(-1, d)
    weights = (rad_w[:, None] * ang_w[None, :]).reshape(-1)
    weights = weights / weights.sum()
    return points, weights


def orthogonal_frame(xi: np.ndarray) -> np.ndarray:
    """Orthogonal matrix whose first row is the unit vector xi.

    Built from the Householder reflection through e1 +- xi (sign chosen to
    avoid cancellation), then deterministically sign-normalized: rows past
    the first flip to make their diagonal entry nonnegative, and the last
    row flips once more if needed to make the determinant +1.  In
    particular xi = e1 maps to the identity, and in d = 2 the second row
    is always the counterclockwise perpendicular.
    """
    xi = np.asarray(xi, dtype=float)
    d = xi.shape[0]
    norm = np.linalg.norm(xi)
    if not math.isclose(norm, 1.0, rel_tol=0.0, abs_tol=1e-10):
        raise ValueError("xi must be a unit vector")
    v = xi.copy()
    if xi[0] >= 0.0:
        v[0] += 1.0
        frame = 2.0 * np.outer(v, v) / np.dot(v, v) - np.eye(d)
    else:
        v[0] -= 1.0
        frame = np.eye(d) - 2.0 * np.outer(v, v) / np.dot(v, v)
    for i in range(1, d):
        if frame[i, i] < 0.0:
            frame[i] = -frame[i]
    if np.linalg.det(frame) < 0.0:
        frame[d - 1] = -frame[d - 1]
    return frame
