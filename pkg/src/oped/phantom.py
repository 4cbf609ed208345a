"""Phantoms on the unit ball and the sampled-image container.

Two phantom kinds are supported: sums of constant-density ellipses or
ellipsoids (with a closed-form Radon transform) and fixed polynomial
densities (used for exactness tests).  Every phantom is supported inside
the closed unit ball; ellipsoid phantoms enforce containment on
construction.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import ValidationError
from .specfun import ball_volume

__all__ = [
    "EllipsoidComponent",
    "ImageGrid",
    "Phantom",
    "PolynomialPhantom",
    "eval_phantom",
    "get_preset",
    "load_phantom",
    "phantom_from_dict",
    "preset_names",
    "radon_phantom",
    "rotation_matrix",
    "save_phantom",
    "shepp_logan_2d",
]

CONTAINMENT_SLACK = 1e-9


def rotation_matrix(d: int, rotation) -> np.ndarray:
    """Rotation matrix for a component: an angle in d=2, Z-Y-Z Euler angles in d=3."""
    if d == 2:
        theta = float(np.asarray(rotation).reshape(()))
        c, s = math.cos(theta), math.sin(theta)
        return np.array([[c, -s], [s, c]])
    if d == 3:
        angles = np.asarray(rotation, dtype=float).reshape(-1)
        if angles.size == 1:
            angles = np.array([angles[0], 0.0, 0.0])
        if angles.size != 3:
            raise ValidationError("d=3 rotation takes Z-Y-Z Euler angles (alpha, beta, gamma)")
        a, b, g = angles

        def rz(t):
            return np.array([[math.cos(t), -math.sin(t), 0.0], [math.sin(t), math.cos(t), 0.0], [0.0, 0.0, 1.0]])

        def ry(t):
            return np.array([[math.cos(t), 0.0, math.sin(t)], [0.0, 1.0, 0.0], [-math.sin(t), 0.0, math.cos(t)]])

        return rz(a) @ ry(b) @ rz(g)
    raise ValidationError("only d = 2 and d = 3 are supported")


@dataclass(frozen=True)
class EllipsoidComponent:
    """Constant-density ellipse (d=2) or ellipsoid (d=3).

    The component occupies center + R @ (axes * y) for y in the unit ball,
    with R the rotation_matrix of `rotation` (radians).
    """

    center: tuple
    axes: tuple
    rotation: tuple
    density: float

    def __post_init__(self):
        center = tuple(float(v) for v in np.atleast_1d(self.center))
        axes = tuple(float(v) for v in np.atleast_1d(self.axes))
        rotation = tuple(float(v) for v in np.atleast_1d(self.rotation))
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "rotation", rotation)
        object.__setattr__(self, "density", float(self.density))
        if len(center) != len(axes):
            raise ValidationError("center and axes must have the same dimension")
        if any(a <= 0.0 for a in axes):
            raise ValidationError("semi-axes must be positive")

    @property
    def d(self) -> int:
        return len(self.center)

    def matrix(self) -> np.ndarray:
        """Body-to-world linear part R @ diag(axes)."""
        rot = self.rotation[0] if self.d == 2 else self.rotation
        return rotation_matrix(self.d, rot) * np.asarray(self.axes)[None, :]


@dataclass(frozen=True)
class Phantom:
    """Sum of constant-density ellipsoid components inside the unit ball."""

    d: int
    components: tuple

    def __post_init__(self):
        comps = tuple(self.components)
        object.__setattr__(self, "components", comps)
        for comp in comps:
            if comp.d != self.d:
                raise ValidationError("component dimension disagrees with phantom dimension")
            reach = float(np.linalg.norm(comp.center)) + max(comp.axes)
            if reach > 1.0 + CONTAINMENT_SLACK:
                raise ValidationError(f"component extends outside the unit ball (reach {reach:.6f})")

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "components": [
                {
                    "center": list(c.center),
                    "axes": list(c.axes),
                    "rotation": list(c.rotation) if self.d == 3 else c.rotation[0],
                    "density": c.density,
                }
                for c in self.components
            ],
        }


@dataclass(frozen=True)
class PolynomialPhantom:
    """Polynomial density given as (coefficient, exponent-tuple) terms."""

    d: int
    terms: tuple

    def __post_init__(self):
        terms = tuple((float(c), tuple(int(p) for p in powers)) for c, powers in self.terms)
        object.__setattr__(self, "terms", terms)
        for _, powers in terms:
            if len(powers) != self.d:
                raise ValidationError("polynomial exponents must match the dimension")
            if any(p < 0 for p in powers):
                raise ValidationError("polynomial exponents must be nonnegative")

    @property
    def degree(self) -> int:
        return max((sum(p) for _, p in self.terms), default=0)

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "polynomial": {"terms": [{"coeff": c, "powers": list(p)} for c, p in self.terms]},
        }


def eval_phantom(phantom, points: np.ndarray) -> np.ndarray:
    """Density of the phantom at an (n, d) array of points."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.shape[1] != phantom.d:
        raise ValidationError("points dimension disagrees with phantom")
    out = np.zeros(points.shape[0])
    if isinstance(phantom, PolynomialPhantom):
        # dense coefficient box evaluated by nested Horner passes; far
        # fewer python-level steps than looping the terms
        shape = tuple(1 + max((p[axis] for _, p in phantom.terms), default=0) for axis in range(phantom.d))
        coeffs = np.zeros(shape)
        for coeff, powers in phantom.terms:
            coeffs[powers] += coeff
        if phantom.d == 2:
            return npoly.polyval2d(points[:, 0], points[:, 1], coeffs)
        return npoly.polyval3d(points[:, 0], points[:, 1], points[:, 2], coeffs)
    for comp in phantom.components:
        rot = comp.rotation[0] if phantom.d == 2 else comp.rotation
        rmat = rotation_matrix(phantom.d, rot)
        body = (points - np.asarray(comp.center)[None, :]) @ rmat
        radii2 = np.sum((body / np.asarray(comp.axes)[None, :]) ** 2, axis=1)
        out[radii2 <= 1.0] += comp.density
    return out


def radon_phantom(phantom: Phantom, xi: np.ndarray, t) -> np.ndarray:
    """Closed-form Radon projection of an ellipsoid phantom.

    For each component with body-to-world matrix M = R diag(axes) the slab
    profile is density * |det M| / |M^T xi| * b_(d-1) * (1 - s^2)^((d-1)/2)
    at the rescaled offset s = (t - <xi, center>) / |M^T xi|.
    """
    if not isinstance(phantom, Phantom):
        raise ValidationError("radon_phantom needs an ellipsoid phantom; use radon_numeric instead")
    xi = np.asarray(xi, dtype=float)
    t = np.asarray(t, dtype=float)
    scalar = t.ndim == 0
    t = np.atleast_1d(t)
    out = np.zeros_like(t)
    d = phantom.d
    slab = ball_volume(d - 1)
    half_power = 0.5 * (d - 1)
    for comp in phantom.components:
        mat = comp.matrix()
        v = mat.T @ xi
        rho = float(np.linalg.norm(v))
        det = float(np.prod(comp.axes))
        s = (t - float(np.dot(xi, comp.center))) / rho
        inside = np.abs(s) < 1.0
        profile = np.zeros_like(t)
        profile[inside] = (1.0 - s[inside] ** 2) ** half_power
        out += comp.density * det / rho * slab * profile
    return float(out[0]) if scalar else out


def phantom_from_dict(data: dict):
    """Build a Phantom or PolynomialPhantom from its dictionary form."""
    d = int(data["d"])
    if "polynomial" in data:
        terms = [(term["coeff"], tuple(term["powers"])) for term in data["polynomial"]["terms"]]
        return PolynomialPhantom(d, tuple(terms))
    comps = []
    for raw in data["components"]:
        if "rotation_degrees" in raw:
            rotation = np.deg2rad(np.atleast_1d(raw["rotation_degrees"]))
        else:
            rotation = np.atleast_1d(raw.get("rotation", 0.0))
        comps.append(EllipsoidComponent(tuple(raw["center"]), tuple(raw["axes"]), tuple(rotation), raw["density"]))
    return Phantom(d, tuple(comps))


def load_phantom(path):
    with open(path, "r", encoding="utf-8") as fh:
        return phantom_from_dict(json.load(fh))


def save_phantom(phantom, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(phantom.to_dict(), fh, indent=2)
        fh.write("\n")


def shepp_logan_2d() -> Phantom:
    """The conventional ten-ellipse head phantom."""
    text = resources.files("oped.data").joinpath("shepp_logan_2d.json").read_text(encoding="utf-8")
    return phantom_from_dict(json.loads(text))


def _preset_disk() -> Phantom:
    return Phantom(2, (EllipsoidComponent((0.0, 0.0), (1.0, 1.0), (0.0,), 1.0),))


def _preset_disk_half() -> Phantom:
    return Phantom(2, (EllipsoidComponent((0.0, 0.0), (0.5, 0.5), (0.0,), 1.0),))


def _preset_ball() -> Phantom:
    return Phantom(3, (EllipsoidComponent((0.0, 0.0, 0.0), (1.0, 1.0, 1.0), (0.0, 0.0, 0.0), 1.0),))


def _preset_ball_half() -> Phantom:
    return Phantom(3, (EllipsoidComponent((0.0, 0.0, 0.0), (0.5, 0.5, 0.5), (0.0, 0.0, 0.0), 1.0),))


PRESETS = {
    "disk": _preset_disk,
    "disk_half": _preset_disk_half,
    "ball": _preset_ball,
    "ball_half": _preset_ball_half,
    "shepp_logan_2d": shepp_logan_2d,
    "poly_1": lambda: PolynomialPhantom(2, ((0.5, (0, 0)), (0.25, (1, 0)), (-0.5, (0, 1)))),
    "poly_2": lambda: PolynomialPhantom(2, ((1.0, (0, 0)), (1.0, (1, 0)), (-1.0, (0, 2)))),
    "poly_3": lambda: PolynomialPhantom(2, ((0.2, (0, 0)), (1.0, (3, 0)), (-0.3, (1, 1)))),
    "poly_4": lambda: PolynomialPhantom(2, ((0.5, (0, 0)), (1.0, (2, 2)), (-0.5, (4, 0)), (0.25, (0, 3)))),
    "poly_2_3d": lambda: PolynomialPhantom(3, ((1.0, (0, 0, 0)), (1.0, (0, 0, 1)), (-1.0, (2, 0, 0)))),
}


def preset_names():
    return sorted(PRESETS)


def get_preset(name: str):
    try:
        factory = PRESETS[name]
    except KeyError:
        raise ValidationError(f"unknown preset {name!r}; choose from {', '.join(preset_names())}") from None
    return factory()


@dataclass
class ImageGrid:
    """Sampled scalar field on the regular grid of [-1, 1]^d.

    values has shape (resolution,) * d in C order: the first index walks
    the first coordinate axis.  Stored on disk as little-endian float32
    raw data plus a JSON sidecar describing the layout.
    """

    d: int
    resolution: int
    values: np.ndarray
    extent: tuple = (-1.0, 1.0)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float).reshape((self.resolution,) * self.d)
        self.extent = (float(self.extent[0]), float(self.extent[1]))

    def axis_coords(self) -> np.ndarray:
        return np.linspace(self.extent[0], self.extent[1], self.resolution)

    def points(self) -> np.ndarray:
        """All grid points as an (resolution^d, d) array in C order."""
        coords = self.axis_coords()
        mesh = np.meshgrid(*([coords] * self.d), indexing="ij")
        return np.stack([m.reshape(-1) for m in mesh], axis=1)

    def mask(self) -> np.ndarray:
        """Flat boolean mask of points inside the closed unit ball."""
        pts = self.points()
        return np.sum(pts * pts, axis=1) <= 1.0

    def save(self, path) -> None:
        path = str(path)
        self.values.astype("<f4").tofile(path)
        sidecar = {
            "d": self.d,
            "resolution": self.resolution,
            "extent": list(self.extent),
            "order": "row-major",
            "dtype": "<f4",
        }
        with open(path + ".json", "w", encoding="utf-8") as fh:
            json.dump(sidecar, fh, indent=2)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "ImageGrid":
        path = str(path)
        with open(path + ".json", "r", encoding="utf-8") as fh:
            sidecar = json.load(fh)
        if sidecar.get("order", "row-major") != "row-major":
            raise ValidationError("only row-major grids are supported")
        raw = np.fromfile(path, dtype=sidecar.get("dtype", "<f4"))
        d, res = int(sidecar["d"]), int(sidecar["resolution"])
        if raw.size != res**d:
            raise ValidationError("raw grid size disagrees with its sidecar")
        return cls(d, res, raw.astype(float), tuple(sidecar.get("extent", (-1.0, 1.0))))

    def to_pgm(self, path) -> None:
        """8-bit PGM export (middle slice of the last axis when d = 3)."""
        img = self.values if self.d == 2 else self.values[:, :, self.resolution // 2]
        lo, hi = float(img.min()), float(img.max())
        scale = 255.0 / (hi - lo) if hi > lo else 0.0
        data = np.round((img - lo) * scale).astype(np.uint8)
        with open(str(path), "wb") as fh:
            fh.write(f"P5\n{data.shape[1]} {data.shape[0]}\n255\n".encode("ascii"))
            fh.write(data.tobytes())
