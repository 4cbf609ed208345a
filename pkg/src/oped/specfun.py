"""Gegenbauer, Chebyshev and Jacobi polynomials and their Gauss rules.

All weights on [-1, 1] are kept in normalized form: the weight function
(1 - t^2)^alpha is scaled so it integrates to one, and every quadrature
rule returned here has positive weights that sum to one.  Polynomial
norms below are squared L2 norms against those normalized weights.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "QuadratureRule",
    "ball_volume",
    "chebyshev_t",
    "chebyshev_u",
    "gauss_gegenbauer_rule",
    "gauss_legendre_rule",
    "gegenbauer",
    "gegenbauer_at_one",
    "gegenbauer_norm",
    "gegenbauer_table",
    "jacobi",
    "jacobi_norm",
    "jacobi_table",
    "offset_chebyshev_rule",
    "orthonormal_jacobi",
    "pochhammer",
    "sphere_surface",
    "weight_norm_constant",
]


def pochhammer(a: float, n: int) -> float:
    """Rising factorial (a)_n = a (a+1) ... (a+n-1)."""
    out = 1.0
    for i in range(n):
        out *= a + i
    return out


def sphere_surface(d: int) -> float:
    """Surface measure of the unit sphere in R^d: 2 pi^(d/2) / Gamma(d/2)."""
    return 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)


def ball_volume(d: int) -> float:
    """Volume of the unit ball in R^d."""
    return sphere_surface(d) / d


def weight_norm_constant(lam: float) -> float:
    """Constant c with c * integral of (1-t^2)^(lam-1/2) over [-1,1] equal to 1."""
    return math.gamma(lam + 1.0) / (math.gamma(0.5) * math.gamma(lam + 0.5))


def gegenbauer_table(kmax: int, lam: float, t):
    """Gegenbauer values C_k^lam(t) for k = 0..kmax, stacked on axis 0."""
    t = np.asarray(t, dtype=float)
    out = np.empty((kmax + 1,) + t.shape, dtype=float)
    out[0] = 1.0
    if kmax >= 1:
        out[1] = 2.0 * lam * t
    for k in range(2, kmax + 1):
        out[k] = (2.0 * (k - 1 + lam) * t * out[k - 1] - (k - 2 + 2.0 * lam) * out[k - 2]) / k
    return out


def gegenbauer(k: int, lam: float, t):
    """Gegenbauer polynomial C_k^lam evaluated at t."""
    return gegenbauer_table(k, lam, t)[k]


def chebyshev_u(k: int, t):
    """Chebyshev polynomial of the second kind U_k = C_k^1."""
    return gegenbauer(k, 1.0, t)


def chebyshev_t(k: int, t):
    """Chebyshev polynomial of the first kind T_k."""
    t = np.asarray(t, dtype=float)
    if k == 0:
        return np.ones_like(t)
    prev, cur = np.ones_like(t), t.copy()
    for _ in range(k - 1):
        prev, cur = cur, 2.0 * t * cur - prev
    return cur


def gegenbauer_at_one(k: int, lam: float) -> float:
    """C_k^lam(1) = (2 lam)_k / k!."""
    out = 1.0
    for i in range(1, k + 1):
        out *= (2.0 * lam + i - 1) / i
    return out


def gegenbauer_norm(k: int, lam: float) -> float:
    """Squared norm of C_k^lam under the normalized weight (1-t^2)^(lam-1/2).

    Equals lam (2 lam)_k / ((k + lam) k!); in particular 1.0 for all k
    when lam = 1 (the U_k are orthonormal as-is).
    """
    out = lam / (k + lam)
    for i in range(1, k + 1):
        out *= (2.0 * lam + i - 1) / i
    return out


def jacobi_table(kmax: int, alpha: float, beta: float, t):
    """Jacobi values P_k^(alpha,beta)(t) for k = 0..kmax, stacked on axis 0."""
    t = np.asarray(t, dtype=float)
    out = np.empty((kmax + 1,) + t.shape, dtype=float)
    out[0] = 1.0
    if kmax >= 1:
        out[1] = 0.5 * (alpha - beta) + 0.5 * (alpha + beta + 2.0) * t
    for n in range(2, kmax + 1):
        c1 = 2.0 * n * (n + alpha + beta) * (2.0 * n + alpha + beta - 2.0)
        c2 = (2.0 * n + alpha + beta - 1.0) * (alpha * alpha - beta * beta)
        c3 = (2.0 * n + alpha + beta - 2.0) * (2.0 * n + alpha + beta - 1.0) * (2.0 * n + alpha + beta)
        c4 = 2.0 * (n + alpha - 1.0) * (n + beta - 1.0) * (2.0 * n + alpha + beta)
        out[n] = ((c2 + c3 * t) * out[n - 1] - c4 * out[n - 2]) / c1
    return out


def jacobi(k: int, alpha: float, beta: float, t):
    """Jacobi polynomial P_k^(alpha,beta) evaluated at t."""
    return jacobi_table(k, alpha, beta, t)[k]


def jacobi_norm(k: int, alpha: float, beta: float) -> float:
    """Squared norm of P_k^(alpha,beta) under the normalized Jacobi weight.

    (alpha+1)_k (beta+1)_k (alpha+beta+k+1) / (k! (alpha+beta+2)_k (alpha+beta+2k+1)).
    """
    out = (alpha + beta + k + 1.0) / (alpha + beta + 2.0 * k + 1.0)
    for i in range(1, k + 1):
        out *= (alpha + i) * (beta + i) / (i * (alpha + beta + 1.0 + i))
    return out


def orthonormal_jacobi(k: int, alpha: float, beta: float, t):
    """Jacobi polynomial scaled to unit norm under the normalized weight."""
    return jacobi(k, alpha, beta, t) / math.sqrt(jacobi_norm(k, alpha, beta))


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and weights for c (1-t^2)^weight_exponent dt on [-1, 1].

    The rule is stored normalized: weights are positive and sum to one,
    matching the normalized weight function.  exact_degree is the largest
    polynomial degree integrated exactly.
    """

    nodes: np.ndarray
    weights: np.ndarray
    weight_exponent: float
    exact_degree: int

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)
        if nodes.ndim != 1 or weights.shape != nodes.shape:
            raise ValueError("nodes and weights must be 1-d arrays of equal length")
        if nodes.size and (nodes[0] <= -1.0 or nodes[-1] >= 1.0):
            raise ValueError("nodes must lie strictly inside (-1, 1)")
        if np.any(np.diff(nodes) <= 0.0):
            raise ValueError("nodes must be strictly increasing")
        if np.any(weights <= 0.0):
            raise ValueError("weights must be positive")
        if abs(weights.sum() - 1.0) > 1e-12:
            raise ValueError("weights must sum to one")

    def __len__(self) -> int:
        return self.nodes.size

    def integrate(self, f) -> float:
        """Apply the rule to a callable or to an array of node values."""
        vals = f(self.nodes) if callable(f) else np.asarray(f, dtype=float)
        return float(np.dot(self.weights, vals))


def _gegenbauer_and_derivative(n: int, lam: float, t: np.ndarray):
    """C_n^lam(t) and its t-derivative, one recurrence pass."""
    c_prev = np.ones_like(t)
    d_prev = np.zeros_like(t)
    if n == 0:
        return c_prev, d_prev
    c_cur = 2.0 * lam * t
    d_cur = np.full_like(t, 2.0 * lam)
    for k in range(2, n + 1):
        a = 2.0 * (k - 1 + lam)
        b = k - 2 + 2.0 * lam
        c_next = (a * t * c_cur - b * c_prev) / k
        d_next = (a * (c_cur + t * d_cur) - b * d_prev) / k
        c_prev, c_cur = c_cur, c_next
        d_prev, d_cur = d_cur, d_next
    return c_cur, d_cur


def _gegenbauer_gauss_general(alpha: float, npoints: int) -> QuadratureRule:
    # Bracket the zeros of C_N^lam on a fine theta grid, then polish with
    # Newton; weights come from the Christoffel function of the
    # orthonormalized family, which makes them sum to one by construction.
    lam = alpha + 0.5
    n = npoints
    theta = np.linspace(0.0, math.pi, 8 * n + 1)[1:-1]
    grid = np.cos(theta)[::-1]
    vals = _gegenbauer_and_derivative(n, lam, grid)[0]
    sign_flip = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]
    if sign_flip.size != n:
        raise ValueError(f"failed to bracket {n} quadrature nodes (found {sign_flip.size})")
    lo, hi = grid[sign_flip], grid[sign_flip + 1]
    flo = vals[sign_flip]
    for _ in range(6):  # a few bisection steps to make Newton safe
        mid = 0.5 * (lo + hi)
        fmid = _gegenbauer_and_derivative(n, lam, mid)[0]
        take_lo = np.sign(fmid) == np.sign(flo)
        lo = np.where(take_lo, mid, lo)
        flo = np.where(take_lo, fmid, flo)
        hi = np.where(take_lo, hi, mid)
    x = 0.5 * (lo + hi)
    for _ in range(100):
        c, dc = _gegenbauer_and_derivative(n, lam, x)
        step = c / dc
        x = x - step
        if np.max(np.abs(step)) < 1e-14:
            break
    else:
        raise ValueError("quadrature node iteration did not converge")
    x = np.sort(x)
    x = 0.5 * (x - x[::-1])  # enforce exact symmetry about 0
    table = gegenbauer_table(n - 1, lam, x)
    norms = np.array([gegenbauer_norm(k, lam) for k in range(n)])
    w = 1.0 / np.sum(table * table / norms[:, None], axis=0)
    w /= w.sum()
    return QuadratureRule(x, w, alpha, 2 * n - 1)


def gauss_gegenbauer_rule(alpha: float, npoints: int) -> QuadratureRule:
    """Gauss rule for the normalized weight (1-t^2)^alpha on [-1, 1].

    Nodes are the zeros of C_npoints^(alpha+1/2); the rule is exact
    through degree 2*npoints - 1.  The Chebyshev cases alpha = +-1/2 use
    their closed forms, everything else is computed by bracketed Newton
    iteration on the recurrence.
    """
    if npoints < 1:
        raise ValueError("npoints must be at least 1")
    if alpha <= -1.0:
        raise ValueError("alpha must exceed -1")
    if alpha == -0.5:
        psi = (np.arange(npoints) + 0.5) * math.pi / npoints
        nodes = np.cos(psi)[::-1].copy()
        weights = np.full(npoints, 1.0 / npoints)
        return QuadratureRule(nodes, weights, alpha, 2 * npoints - 1)
    if alpha == 0.5:
        theta = np.arange(1, npoints + 1) * math.pi / (npoints + 1)
        nodes = np.cos(theta)[::-1].copy()
        weights = 2.0 * np.sin(theta)[::-1] ** 2 / (npoints + 1)
        weights /= weights.sum()
        return QuadratureRule(nodes, weights, alpha, 2 * npoints - 1)
    return _gegenbauer_gauss_general(alpha, npoints)


def gauss_legendre_rule(npoints: int) -> QuadratureRule:
    """Gauss-Legendre rule normalized to total weight one."""
    return gauss_gegenbauer_rule(0.0, npoints)


def offset_chebyshev_rule(npoints: int) -> QuadratureRule:
    """Rule for the normalized weight (1-t^2)^(1/2) at first-kind Chebyshev angles.

    Nodes cos((j+1/2) pi / npoints) avoid the zeros of U_(npoints-1); the
    sin^2-proportional weights make the rule exact through degree
    2*npoints - 3, one short of Gaussian, in exchange for the offset nodes.
    """
    if npoints < 2:
        raise ValueError("npoints must be at least 2")
    psi = (np.arange(npoints) + 0.5) * math.pi / npoints
    nodes = np.cos(psi)[::-1].copy()
    weights = 2.0 * np.sin(psi)[::-1] ** 2 / npoints
    weights /= weights.sum()
    return QuadratureRule(nodes, weights, 0.5, 2 * npoints - 3)
