"""Radon projections: numeric oracle, sinogram sampling and container I/O.

A projection is parameterized by a unit direction xi and offset t in
(-1, 1); its value is the integral of the density over the hyperplane
<x, xi> = t intersected with the unit ball.  Sinograms store raw
projection values on the scanning geometries used by the reconstruction
operators: 2m+1 circle directions with 2m Gauss-Chebyshev offsets
(type II) or 2m+1 offset-angle Chebyshev nodes (type I) in 2D, and an
(n+1)^2 sphere product cubature with n+1 Gauss-Gegenbauer offsets in 3D.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass

import numpy as np

from .errors import NumericsError, ValidationError
from .geometry import circle_directions, orthogonal_frame, sphere_product_cubature
from .phantom import Phantom, PolynomialPhantom, eval_phantom, radon_phantom
from .specfun import gauss_gegenbauer_rule, gauss_legendre_rule, offset_chebyshev_rule

__all__ = [
    "MAGIC",
    "Sinogram",
    "radon_numeric",
    "read_sinogram",
    "sample_sinogram",
    "sinogram_geometry",
    "write_sinogram",
]

MAGIC = b"OPEDSINO" + bytes(7) + b"\x01"

GEOMETRIES_2D = ("type-I", "type-II")
GEOMETRY_3D = "gegenbauer-gauss"
GEOMETRY_CUSTOM = "custom"


def _panel_rule(panels: int, per_panel: int = 16):
    # composite Gauss-Legendre rule on [-1, 1] with `panels` equal panels
    base = gauss_legendre_rule(per_panel)
    edges = np.linspace(-1.0, 1.0, panels + 1)
    width = edges[1] - edges[0]
    nodes = (edges[:-1, None] + 0.5 * width * (base.nodes[None, :] + 1.0)).reshape(-1)
    # base weights sum to 1 on a length-2 interval, so width * base gives the
    # unnormalized panel integral; the full rule integrates over [-1, 1]
    weights = np.tile(base.weights * width, panels)
    return nodes, weights


def radon_numeric(f, xi: np.ndarray, t, refinement: int = 8):
    """Brute-force projection of a callable density by composite Gauss panels.

    f maps an (n, d) point array to n values.  refinement is the panel
    count of the in-plane composite rule (16-point Gauss each); in d=3 the
    azimuth uses 16*refinement equispaced points.  Converges to the true
    plane integral as refinement grows; exact for moderate-degree
    polynomial densities already at refinement 1.
    """
    xi = np.asarray(xi, dtype=float)
    d = xi.shape[0]
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    scalar = np.asarray(t).ndim == 0
    frame = orthogonal_frame(xi)
    if d == 2:
        y, w = _panel_rule(refinement)
        plane = y[:, None] * frame[1][None, :]  # (Q, 2)
    elif d == 3:
        ry, rw = _panel_rule(refinement)
        r = 0.5 * (ry + 1.0)  # radial nodes on (0, 1)
        rw = 0.5 * rw * r  # dr times the polar Jacobian r
        n_az = 16 * refinement
        az = 2.0 * np.pi * np.arange(n_az) / n_az
        ww = (rw[:, None] * np.full(n_az, 2.0 * np.pi / n_az)[None, :]).reshape(-1)
        yy = np.stack(
            [(r[:, None] * np.cos(az)[None, :]).reshape(-1), (r[:, None] * np.sin(az)[None, :]).reshape(-1)],
            axis=1,
        )
        plane = yy @ frame[1:]  # (Q, 3)
        w = ww
    else:
        raise ValidationError("radon_numeric supports d = 2 and d = 3")
    out = np.empty_like(t_arr)
    inside = np.abs(t_arr) < 1.0
    out[~inside] = 0.0
    live = np.flatnonzero(inside)
    q = plane.shape[0]
    # batch offsets into each density call, bounding the working set so
    # high refinements stay in fixed memory
    block = max(1, (1 << 20) // q)
    for start in range(0, live.size, block):
        sel = live[start : start + block]
        ts = t_arr[sel]
        shrink = np.sqrt(1.0 - ts * ts)
        pts = ts[:, None, None] * xi[None, None, :] + shrink[:, None, None] * plane[None, :, :]
        vals = np.asarray(f(pts.reshape(-1, d)), dtype=float)
        if not np.all(np.isfinite(vals)):
            bad = pts.reshape(-1, d)[np.flatnonzero(~np.isfinite(vals))[0]]
            raise NumericsError(f"non-finite density sample at {bad.tolist()}")
        out[sel] = shrink ** (d - 1) * (vals.reshape(sel.size, q) @ w)
    return float(out[0]) if scalar else out


@dataclass(frozen=True)
class Sinogram:
    """Projection values on a named scanning geometry.

    values[nu, j] is the projection along directions[nu] at offset
    nodes[j].  direction_weights and node_weights are the cubature and
    quadrature weights the reconstruction operators expect (each summing
    to one).
    """

    d: int
    geometry: str
    order: int
    directions: np.ndarray
    direction_weights: np.ndarray
    nodes: np.ndarray
    node_weights: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        directions = np.atleast_2d(np.asarray(self.directions, dtype=float))
        values = np.atleast_2d(np.asarray(self.values, dtype=float))
        object.__setattr__(self, "directions", directions)
        object.__setattr__(self, "direction_weights", np.asarray(self.direction_weights, dtype=float))
        object.__setattr__(self, "nodes", np.asarray(self.nodes, dtype=float))
        object.__setattr__(self, "node_weights", np.asarray(self.node_weights, dtype=float))
        object.__setattr__(self, "values", values)
        if self.d == 2 and self.geometry not in GEOMETRIES_2D + (GEOMETRY_CUSTOM,):
            raise ValidationError(f"unknown 2D geometry {self.geometry!r}")
        if self.d == 3 and self.geometry not in (GEOMETRY_3D, GEOMETRY_CUSTOM):
            raise ValidationError(f"unknown 3D geometry {self.geometry!r}")
        if self.d not in (2, 3):
            raise ValidationError("only d = 2 and d = 3 are supported")
        if directions.shape[1] != self.d:
            raise ValidationError("direction dimension disagrees with d")
        if values.shape != (directions.shape[0], self.nodes.shape[0]):
            raise ValidationError("values must have shape (directions, nodes)")
        if not np.all(np.isfinite(values)):
            raise NumericsError("sinogram contains non-finite values")

    @property
    def kernel_degree(self) -> int:
        """Highest expansion degree the geometry supports (2m in 2D, n in 3D)."""
        return 2 * self.order if self.d == 2 else self.order


def sinogram_geometry(d: int, order: int, kind: str | None = None):
    """Directions and offset rule for a scanning geometry.

    Returns (cubature, rule).  In 2D, kind picks the offset nodes:
    "type-II" uses the 2m Gauss-Chebyshev (second kind) nodes, "type-I"
    the 2m+1 offset-angle Chebyshev nodes.  In 3D (kind ignored) the
    directions are the (order+1)^2 sphere product cubature and the
    offsets the order+1 Gauss nodes for the weight (1-t^2).
    """
    if order < 1:
        raise ValidationError("order must be at least 1")
    if d == 2:
        kind = "type-II" if kind is None else kind
        if kind not in GEOMETRIES_2D:
            raise ValidationError(f"2D geometry must be one of {GEOMETRIES_2D}, got {kind!r}")
        cubature = circle_directions(order)
        if kind == "type-II":
            rule = gauss_gegenbauer_rule(0.5, 2 * order)
        else:
            rule = offset_chebyshev_rule(2 * order + 1)
        return cubature, rule
    if d == 3:
        if kind not in (None, GEOMETRY_3D):
            raise ValidationError("3D sinograms use the product geometry")
        cubature = sphere_product_cubature(order)
        rule = gauss_gegenbauer_rule(1.0, order + 1)
        return cubature, rule
    raise ValidationError("only d = 2 and d = 3 are supported")


def sample_sinogram(
    source,
    order: int,
    kind: str | None = None,
    d: int | None = None,
    analytic: bool | None = None,
    refinement: int = 8,
    noise_sigma: float = 0.0,
    seed: int | None = None,
) -> Sinogram:
    """Sample projections of a phantom or callable on a scanning geometry.

    Ellipsoid phantoms default to their closed-form projections,
    everything else to the numeric oracle.  Gaussian noise of standard
    deviation noise_sigma is added when requested; this requires an
    explicit seed so runs stay reproducible.
    """
    if isinstance(source, (Phantom, PolynomialPhantom)):
        d = source.d
    elif d is None:
        raise ValidationError("d is required when sampling a bare callable")
    if analytic is None:
        analytic = isinstance(source, Phantom)
    if analytic and not isinstance(source, Phantom):
        raise ValidationError("analytic sampling needs an ellipsoid phantom")
    cubature, rule = sinogram_geometry(d, order, kind)
    if d == 2:
        kind = "type-II" if kind is None else kind
        geometry = kind
    else:
        geometry = GEOMETRY_3D
    values = np.empty((len(cubature), len(rule)))
    if analytic:
        for nu, xi in enumerate(cubature.points):
            values[nu] = radon_phantom(source, xi, rule.nodes)
    else:
        f = (lambda pts: eval_phantom(source, pts)) if isinstance(source, (Phantom, PolynomialPhantom)) else source
        for nu, xi in enumerate(cubature.points):
            values[nu] = radon_numeric(f, xi, rule.nodes, refinement=refinement)
    if noise_sigma < 0.0:
        raise ValidationError("noise_sigma must be nonnegative")
    if noise_sigma > 0.0:
        if seed is None:
            raise ValidationError("noisy sampling requires an explicit seed")
        rng = np.random.default_rng(seed)
        values = values + noise_sigma * rng.standard_normal(values.shape)
    return Sinogram(
        d=d,
        geometry=geometry,
        order=order,
        directions=cubature.points,
        direction_weights=cubature.weights,
        nodes=rule.nodes,
        node_weights=rule.weights,
        values=values,
    )


def write_sinogram(sino: Sinogram, path) -> None:
    """Write the single-file container: magic, header length, JSON header,
    then the float64 value block in [direction][node] order."""
    header = {
        "d": sino.d,
        "geometry": sino.geometry,
        "m_or_n": sino.order,
        "directions": sino.directions.tolist(),
        "direction_weights": sino.direction_weights.tolist(),
        "nodes": sino.nodes.tolist(),
        "weights": sino.node_weights.tolist(),
        "shape": list(sino.values.shape),
    }
    blob = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    with open(str(path), "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<Q", len(blob)))
        fh.write(blob)
        fh.write(np.ascontiguousarray(sino.values, dtype="<f8").tobytes())


def read_sinogram(path) -> Sinogram:
    with open(str(path), "rb") as fh:
        magic = fh.read(16)
        if magic != MAGIC:
            raise ValidationError("not a sinogram container (bad magic)")
        lenfield = fh.read(8)
        if len(lenfield) != 8:
            raise ValidationError("sinogram container is truncated")
        (hlen,) = struct.unpack("<Q", lenfield)
        blob = fh.read(hlen)
        if len(blob) != hlen:
            raise ValidationError("sinogram container is truncated")
        try:
            header = json.loads(blob.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise ValidationError(f"corrupt sinogram header: {exc}") from exc
        shape = tuple(header["shape"])
        raw = fh.read(8 * shape[0] * shape[1])
        if len(raw) != 8 * shape[0] * shape[1]:
            raise ValidationError("sinogram container is truncated")
        values = np.frombuffer(raw, dtype="<f8").reshape(shape)
    return Sinogram(
        d=int(header["d"]),
        geometry=header["geometry"],
        order=int(header["m_or_n"]),
        directions=np.asarray(header["directions"], dtype=float),
        direction_weights=np.asarray(header["direction_weights"], dtype=float),
        nodes=np.asarray(header["nodes"], dtype=float),
        node_weights=np.asarray(header["weights"], dtype=float),
        values=values.copy(),
    )
