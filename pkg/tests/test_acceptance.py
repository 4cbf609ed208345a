"""Acceptance gate: nine end-to-end property checks at desk scale.

Each check prints one "criterion N: PASS/FAIL" line carrying the
measured quantities (visible with pytest -s, and embedded in the
assertion message on failure) and then asserts its stated tolerance.
"""

import math
import time

import numpy as np

from oped.geometry import (
    ball_rule,
    circle_directions,
    half_circle_directions,
    sphere_product_cubature,
    sphere_tensor_rule,
)
from oped.phantom import ImageGrid, PolynomialPhantom, eval_phantom, get_preset
from oped.radon import radon_numeric, sample_sinogram
from oped.reconstruct import (
    ReconstructionConfig,
    lebesgue_function,
    oped2d,
    oped3d,
    reconstruct_points,
    smoothed_reconstruct,
)
from oped.specfun import gauss_gegenbauer_rule, gegenbauer, offset_chebyshev_rule
from oped.svd import (
    ball_basis,
    basis_indices,
    singular_value,
    truncated_svd_reconstruct,
    verification_report,
)


def verdict(number, ok: bool, detail: str) -> None:
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'} - {detail}"
    print(line)
    assert ok, line


def random_polynomial(rng, d: int, degree: int) -> PolynomialPhantom:
    terms = []
    for total in range(degree + 1):
        for i in range(total + 1):
            if d == 2:
                terms.append((float(rng.uniform(-1.0, 1.0)), (total - i, i)))
            else:
                for j in range(total - i + 1):
                    terms.append((float(rng.uniform(-1.0, 1.0)), (total - i - j, j, i)))
    return PolynomialPhantom(d, tuple(terms))


def masked_points(d: int, resolution: int):
    grid = ImageGrid(d, resolution, np.zeros(resolution**d))
    return grid.points()[grid.mask()]


def double_factorial(n: int) -> int:
    return 1 if n <= 0 else n * double_factorial(n - 2)


def sphere_mean_moment(exponents) -> float:
    # mean of the monomial over the unit sphere (0 for odd factors)
    if any(e % 2 for e in exponents):
        return 0.0
    d = len(exponents)
    num = 1
    for e in exponents:
        num *= double_factorial(e - 1)
    return num / double_factorial(sum(exponents) + d - 2)


def ball_mean_moment(exponents) -> float:
    d = len(exponents)
    return sphere_mean_moment(exponents) * d / (d + sum(exponents))


def interval_moment(k: int, alpha: float) -> float:
    # moment of t^k under the normalized weight (1 - t^2)^alpha
    if k % 2:
        return 0.0
    num = math.gamma((k + 1) / 2.0) * math.gamma(alpha + 1.5)
    return num / (math.gamma((k + 1) / 2.0 + alpha + 1.0) * math.gamma(0.5))


def monomials_up_to(d: int, degree: int):
    if d == 2:
        return [(a, total - a) for total in range(degree + 1) for a in range(total + 1)]
    return [
        (a, b, total - a - b)
        for total in range(degree + 1)
        for a in range(total + 1)
        for b in range(total + 1 - a)
    ]


class TestAcceptance:
    def test_criterion_1_polynomial_preservation_2d(self):
        # both scan types, random polynomials up to the full kernel degree
        rng = np.random.default_rng(101)
        start = time.perf_counter()
        worst, where = 0.0, None
        for m in (2, 4, 8, 16):
            pts = masked_points(2, 128)
            for trial in range(20):
                poly = random_polynomial(rng, 2, 2 * m)
                truth = eval_phantom(poly, pts)
                for kind in ("type-I", "type-II"):
                    sino = sample_sinogram(poly, m, kind, refinement=2)
                    err = float(np.max(np.abs(reconstruct_points(sino, pts) - truth)))
                    if err > worst:
                        worst, where = err, (2 * m, trial, kind)
        elapsed = time.perf_counter() - start
        verdict(
            1,
            worst < 1e-8 and elapsed < 60.0,
            f"max grid error {worst:.3e} (tol 1e-8, worst at degree/trial/kind {where}), "
            f"runtime {elapsed:.1f}s (limit 60s); at the top kernel degree 2m the offset "
            f"rules are one degree short, so the degree-2m component is annihilated "
            f"(type II) or doubled (type I) and exact preservation stops at 2m-1",
        )

    def test_criterion_1_companion_below_top_degree(self):
        # identical protocol one degree down: every component is preserved
        rng = np.random.default_rng(102)
        start = time.perf_counter()
        worst = 0.0
        for m in (2, 4, 8, 16):
            pts = masked_points(2, 128)
            for _ in range(20):
                poly = random_polynomial(rng, 2, 2 * m - 1)
                truth = eval_phantom(poly, pts)
                for kind in ("type-I", "type-II"):
                    sino = sample_sinogram(poly, m, kind, refinement=2)
                    err = float(np.max(np.abs(reconstruct_points(sino, pts) - truth)))
                    worst = max(worst, err)
        elapsed = time.perf_counter() - start
        verdict(
            "1 companion",
            worst < 1e-8 and elapsed < 60.0,
            f"degree <= 2m-1: max grid error {worst:.3e} (tol 1e-8), runtime {elapsed:.1f}s",
        )

    def test_criterion_2_polynomial_preservation_3d(self):
        rng = np.random.default_rng(202)
        start = time.perf_counter()
        worst = 0.0
        grid = ImageGrid(3, 48, np.zeros(48**3))
        mask = grid.mask()
        pts = grid.points()[mask]
        for n in (2, 4, 6):
            for _ in range(10):
                poly = random_polynomial(rng, 3, n)
                sino = sample_sinogram(poly, n, d=3, refinement=2)
                out = oped3d(sino, ReconstructionConfig(order=n, scan="gegenbauer-gauss", resolution=48))
                err = out.values.reshape(-1)[mask] - eval_phantom(poly, pts)
                worst = max(worst, float(np.max(np.abs(err))))
        elapsed = time.perf_counter() - start
        verdict(
            2,
            worst < 1e-7 and elapsed < 300.0,
            f"max 48^3 grid error {worst:.3e} (tol 1e-7), runtime {elapsed:.1f}s (limit 300s)",
        )

    def test_criterion_3_singular_pairs(self):
        residuals = {}
        for d in (2, 3):
            residuals[d] = verification_report(d, 6, refinement=3)["max_pair_residual"]
        verdict(
            3,
            all(r < 1e-7 for r in residuals.values()),
            f"projection of each ball basis function vs gamma_n times its cylinder pair, "
            f"n <= 6 on a 20x20 lattice: residual {residuals[2]:.3e} (d=2), "
            f"{residuals[3]:.3e} (d=3), tol 1e-7",
        )

    def test_criterion_4_singular_value_closed_form(self):
        dirs = circle_directions(10)
        rule = gauss_gegenbauer_rule(0.5, 12)
        strip = 1.0 - rule.nodes**2
        worst = 0.0
        for n in range(9):
            pts, wts = ball_rule(2, max(2 * n, 1))
            image_norms, source_norms = [], []
            for index in basis_indices(2, n):
                f = lambda p: ball_basis(index, p)
                samples = np.stack([radon_numeric(f, xi, rule.nodes, refinement=2) for xi in dirs.points])
                z_sq = float(np.einsum("i,j,ij->", dirs.weights, rule.weights / strip, samples * samples))
                b_sq = float(np.dot(wts, ball_basis(index, pts) ** 2))
                image_norms.append(math.sqrt(z_sq))
                source_norms.append(math.sqrt(b_sq))
            image_norms, source_norms = np.array(image_norms), np.array(source_norms)
            fitted = float(np.dot(image_norms, source_norms) / np.dot(source_norms, source_norms))
            worst = max(worst, abs(fitted - singular_value(2, n)))
        verdict(
            4,
            worst < 1e-6,
            f"fitted projection/source norm ratio vs closed form, n <= 8, d=2: "
            f"max deviation {worst:.3e}, tol 1e-6",
        )

    def test_criterion_5_reproducing_kernel_identity(self):
        rng = np.random.default_rng(505)
        worst = 0.0
        for d in (2, 3):
            lam = d / 2.0
            cut = 0.9 if d == 2 else 0.8
            x = rng.uniform(-cut, cut, (10, d)) / math.sqrt(d)
            y = rng.uniform(-cut, cut, (10, d)) / math.sqrt(d)
            for n in range(5):
                cub = circle_directions(max(n, 1)) if d == 2 else sphere_product_cubature(max(n, 1))
                for a, b in zip(x, y):
                    basis_sum = sum(
                        float(ball_basis(index, a)) * float(ball_basis(index, b)) for index in basis_indices(d, n)
                    )
                    integrand = gegenbauer(n, lam, cub.points @ a) * gegenbauer(n, lam, cub.points @ b)
                    integral = (n + lam) / lam * float(np.dot(cub.weights, integrand))
                    worst = max(worst, abs(basis_sum - integral))
        verdict(
            5,
            worst < 1e-8,
            f"degree-n basis sum vs cubature sphere integral, n <= 4, d in (2, 3), "
            f"10 point pairs: max deviation {worst:.3e}, tol 1e-8",
        )

    def test_criterion_6_truncated_expansion_matches_kernel_sum(self):
        sino = sample_sinogram(get_preset("shepp_logan_2d"), 16)
        svd_grid = truncated_svd_reconstruct(sino, 16, 128)
        mask = svd_grid.mask()
        pts = svd_grid.points()[mask]
        kernel_vals = reconstruct_points(sino, pts, degree=16)
        delta = float(np.max(np.abs(svd_grid.values.reshape(-1)[mask] - kernel_vals)))
        verdict(
            6,
            delta < 1e-6,
            f"head phantom, truncation 16 vs degree-16 kernel sum on a 128^2 masked grid: "
            f"max difference {delta:.3e}, tol 1e-6",
        )

    def test_criterion_7_smoothed_operator_exactness(self):
        rng = np.random.default_rng(707)
        worst = 0.0
        for n in (4, 8):
            pts = masked_points(2, 64)
            for _ in range(10):
                poly = random_polynomial(rng, 2, n)
                sino = sample_sinogram(poly, 2 * n, "type-II", refinement=2)
                grid = smoothed_reconstruct(sino, resolution=64)
                err = grid.values.reshape(-1)[grid.mask()] - eval_phantom(poly, pts)
                worst = max(worst, float(np.max(np.abs(err))))
        verdict(
            7,
            worst < 1e-8,
            f"tapered kernel at order 2n on degree <= n polynomials, n in (4, 8): "
            f"max grid error {worst:.3e}, tol 1e-8",
        )

    def test_criterion_8_rule_moment_suites(self):
        worst = 0.0

        def check(got: float, want: float):
            nonlocal worst
            worst = max(worst, abs(got - want))

        for alpha in (-0.5, 0.0, 0.5, 1.0, 1.5):
            for npoints in (1, 4, 9, 16):
                rule = gauss_gegenbauer_rule(alpha, npoints)
                for k in range(rule.exact_degree + 1):
                    check(rule.integrate(rule.nodes**k), interval_moment(k, alpha))
        for npoints in (2, 5, 16, 33):
            rule = offset_chebyshev_rule(npoints)
            for k in range(rule.exact_degree + 1):
                check(rule.integrate(rule.nodes**k), interval_moment(k, 0.5))
        for m in (1, 2, 4, 8):
            cub = circle_directions(m)
            for beta in monomials_up_to(2, cub.degree):
                if sum(beta) % 2 == 0:
                    check(cub.integrate(cub.points[:, 0] ** beta[0] * cub.points[:, 1] ** beta[1]),
                          sphere_mean_moment(beta))
            for beta in monomials_up_to(2, 2 * m):
                check(cub.integrate(cub.points[:, 0] ** beta[0] * cub.points[:, 1] ** beta[1]),
                      sphere_mean_moment(beta))
        for n in (1, 3, 6):
            cub = half_circle_directions(n)
            for beta in monomials_up_to(2, cub.degree):
                if sum(beta) % 2 == 0:
                    check(cub.integrate(cub.points[:, 0] ** beta[0] * cub.points[:, 1] ** beta[1]),
                          sphere_mean_moment(beta))
        for n in (1, 2, 4, 6):
            cub = sphere_product_cubature(n)
            for beta in monomials_up_to(3, cub.degree):
                if sum(beta) % 2 == 0:
                    vals = cub.points[:, 0] ** beta[0] * cub.points[:, 1] ** beta[1] * cub.points[:, 2] ** beta[2]
                    check(cub.integrate(vals), sphere_mean_moment(beta))
        for degree in (3, 7):
            cub = sphere_tensor_rule(degree)
            for beta in monomials_up_to(3, degree):
                vals = cub.points[:, 0] ** beta[0] * cub.points[:, 1] ** beta[1] * cub.points[:, 2] ** beta[2]
                check(cub.integrate(vals), sphere_mean_moment(beta))
        for d in (2, 3):
            for degree in (2, 5, 8):
                pts, wts = ball_rule(d, degree)
                for beta in monomials_up_to(d, degree):
                    vals = np.prod(pts ** np.asarray(beta)[None, :], axis=1)
                    check(float(np.dot(wts, vals)), ball_mean_moment(beta))
        verdict(
            8,
            worst < 1e-10,
            f"monomial moments of every quadrature and cubature rule up to its stated "
            f"degree: max deviation {worst:.3e}, tol 1e-10",
        )

    def test_criterion_9_convergence_and_lebesgue_trend(self):
        truth_phantom = get_preset("shepp_logan_2d")
        pts = masked_points(2, 128)
        truth = eval_phantom(truth_phantom, pts)
        scale = math.sqrt(float(np.mean(truth * truth)))
        errors, amplifications = [], []
        for m in (16, 32, 64):
            sino = sample_sinogram(truth_phantom, m)
            grid = oped2d(sino, ReconstructionConfig(order=m, resolution=128))
            diff = grid.values.reshape(-1)[grid.mask()] - truth
            errors.append(math.sqrt(float(np.mean(diff * diff))) / scale)
            config = ReconstructionConfig(order=m, resolution=128)
            amplifications.append(float(np.max(lebesgue_function(config, pts))))
        decreasing = errors[0] > errors[1] > errors[2]
        increasing = amplifications[0] < amplifications[1] < amplifications[2]
        verdict(
            9,
            decreasing and increasing,
            f"head phantom orders (16, 32, 64): relative masked-L2 errors "
            f"({errors[0]:.4f}, {errors[1]:.4f}, {errors[2]:.4f}) strictly decreasing: {decreasing}; "
            f"max Lebesgue values ({amplifications[0]:.1f}, {amplifications[1]:.1f}, "
            f"{amplifications[2]:.1f}) strictly increasing: {increasing}",
        )
