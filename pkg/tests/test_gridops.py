"""Tests for the sphere-grid derivative operators.

Oracle: closed-form derivatives of trigonometric polynomial fields; the
Brioschi curvature is checked against the round metric (K = 1/r^2) where no
differentiation error survives the algebra, and against a non-round metric
whose curvature is computed independently below via the Gauss-equation-free
formula for surfaces of revolution.
"""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from nullgeom.gridops import MeshCalculus, brioschi_curvature, fornberg_weights
from nullgeom.quadrature import QuadratureRule


def make_calc(n_theta, n_phi):
    rule = QuadratureRule(n_theta, n_phi)
    calc = MeshCalculus(rule.theta, rule.phi)
    TH, PH = np.meshgrid(rule.theta, rule.phi, indexing="ij")
    return rule, calc, TH, PH


class TestFornberg:
    def test_central_difference_weights(self):
        # classical 5-point central first/second derivative weights
        c = fornberg_weights(0.0, [-2.0, -1.0, 0.0, 1.0, 2.0], 2)
        assert_allclose(c[:, 1], [1 / 12, -2 / 3, 0, 2 / 3, -1 / 12], atol=1e-14)
        assert_allclose(c[:, 2], [-1 / 12, 4 / 3, -5 / 2, 4 / 3, -1 / 12], atol=1e-13)

    def test_interpolation_row(self):
        c = fornberg_weights(0.3, [0.0, 1.0], 1)
        assert_allclose(c[:, 0], [0.7, 0.3], atol=1e-15)
        assert_allclose(c[:, 1], [-1.0, 1.0], atol=1e-15)

    def test_exact_on_polynomials(self):
        rng = np.random.default_rng(7)
        xs = np.sort(rng.uniform(-1, 1, 7))
        z = 0.1
        c = fornberg_weights(z, xs, 2)
        for p in range(7):
            vals = xs**p
            assert_allclose(c[:, 1] @ vals, p * z ** (p - 1) if p else 0.0,
                            atol=1e-10)


class TestDerivatives:
    def test_even_field_theta(self):
        _, calc, TH, PH = make_calc(32, 64)
        F = np.sin(TH) ** 3 * np.cos(3 * PH) + np.cos(TH)
        dF = 3 * np.sin(TH) ** 2 * np.cos(TH) * np.cos(3 * PH) - np.sin(TH)
        assert np.max(np.abs(calc.dtheta(F) - dF)) < 1e-5

    def test_odd_field_theta(self):
        # an odd-parity field is the theta-derivative of an even one
        _, calc, TH, PH = make_calc(32, 64)
        G = np.sin(2 * TH) * np.cos(2 * PH)
        dG = 2 * np.cos(2 * TH) * np.cos(2 * PH)
        assert np.max(np.abs(calc.dtheta(G, parity=-1) - dG)) < 1e-5

    def test_wrong_parity_is_detected(self):
        # treating the odd field as even destroys accuracy near the poles
        _, calc, TH, PH = make_calc(32, 64)
        G = np.sin(2 * TH) * np.cos(2 * PH)
        dG = 2 * np.cos(2 * TH) * np.cos(2 * PH)
        assert np.max(np.abs(calc.dtheta(G, parity=1) - dG)) > 1e-2

    def test_phi_spectral(self):
        _, calc, TH, PH = make_calc(16, 64)
        F = np.sin(TH) ** 2 * np.sin(5 * PH)
        assert np.max(np.abs(calc.dphi(F) - 5 * np.sin(TH) ** 2 * np.cos(5 * PH))) \
            < 1e-12
        assert np.max(np.abs(calc.d2phi(F) + 25 * F)) < 1e-10

    def test_second_theta(self):
        _, calc, TH, _ = make_calc(40, 16)
        assert np.max(np.abs(calc.d2theta(np.cos(TH)) + np.cos(TH))) < 1e-8

    def test_theta_convergence_order(self):
        errs = []
        for n in (16, 24, 32):
            _, calc, TH, PH = make_calc(n, 32)
            F = np.sin(TH) ** 3 * np.cos(3 * PH) + np.sin(TH) * np.cos(PH)
            dF = 3 * np.sin(TH) ** 2 * np.cos(TH) * np.cos(3 * PH) \
                + np.cos(TH) * np.cos(PH)
            errs.append(np.max(np.abs(calc.dtheta(F) - dF)))
        order = np.log(errs[0] / errs[-1]) / np.log(32 / 16)
        assert order > 4.5

    def test_batched_shapes(self):
        _, calc, TH, PH = make_calc(12, 16)
        F = np.stack([np.cos(TH), np.sin(TH) * np.cos(PH)], axis=-1)
        out = calc.dtheta(F)
        assert out.shape == F.shape
        assert_allclose(out[..., 0], calc.dtheta(np.cos(TH)), atol=1e-14)

    def test_gradient_matrix_matches_operators(self):
        _, calc, TH, PH = make_calc(16, 32)
        F = np.sin(TH) ** 2 * np.cos(2 * PH) + np.cos(TH)
        v = calc.gradient_matrix() @ F.ravel()
        N = F.size
        assert_allclose(v[:N].reshape(F.shape), calc.dtheta(F), atol=1e-13)
        assert_allclose(v[N:].reshape(F.shape), calc.dphi(F), atol=1e-12)

    def test_odd_n_phi_rejected(self):
        rule = QuadratureRule(8, 16)
        with pytest.raises(ValueError):
            MeshCalculus(rule.theta, rule.phi[:15])


class TestBrioschi:
    # error is amplified by 1/sin^2(theta_0) at the rows next to the poles
    # (exact cancellations in the formula are only met to FD accuracy); with
    # theta_0 ~ 1/n_theta this still converges, at reduced order

    def test_round_sphere(self):
        r0 = 2.5
        errs = []
        for n in (24, 48):
            _, calc, TH, PH = make_calc(n, 16)
            sigma = np.zeros(TH.shape + (2, 2))
            sigma[..., 0, 0] = r0**2
            sigma[..., 1, 1] = r0**2 * np.sin(TH) ** 2
            K = brioschi_curvature(calc, sigma)
            errs.append(np.max(np.abs(K - 1.0 / r0**2)))
        assert errs[0] < 5e-4 and errs[1] < 2e-5
        assert np.log(errs[0] / errs[1]) / np.log(2.0) > 3.5

    def test_surface_of_revolution(self):
        # sigma = dtheta^2 + h(theta)^2 dphi^2 with h = sin + 0.1 sin^3;
        # K = -h''/h
        errs = []
        for n in (24, 96):
            _, calc, TH, PH = make_calc(n, 32)
            h = np.sin(TH) * (1 + 0.1 * np.sin(TH) ** 2)
            hpp = -np.sin(TH) + 0.1 * (6 * np.sin(TH) * np.cos(TH) ** 2
                                       - 3 * np.sin(TH) ** 3)
            sigma = np.zeros(TH.shape + (2, 2))
            sigma[..., 0, 0] = 1.0
            sigma[..., 1, 1] = h**2
            K = brioschi_curvature(calc, sigma)
            errs.append(np.max(np.abs(K + hpp / h)))
        assert errs[-1] < 5e-5
        assert np.log(errs[0] / errs[-1]) / np.log(4.0) > 3.3


class TestQuadratureRule:
    def test_weights_positive(self):
        rule = QuadratureRule(16, 32)
        assert np.all(rule.weights > 0)
        assert rule.resolution == (16, 32)

    def test_sphere_measure(self):
        # sum of weights against the round area element = 4 pi r^2
        rule = QuadratureRule(12, 24)
        TH = rule.theta[:, None] * np.ones(24)[None, :]
        area_el = 4.0 * np.sin(TH)          # r = 2
        total = np.sum(rule.weights * area_el)
        assert_allclose(total, 16.0 * np.pi, rtol=1e-13)

    def test_polynomial_exactness(self):
        # integrand polynomial in cos(theta) of degree < 2 n_theta is exact
        rule = QuadratureRule(6, 8)
        ct = np.cos(rule.theta)[:, None] * np.ones(8)[None, :]
        TH = rule.theta[:, None] * np.ones(8)[None, :]
        val = np.sum(rule.weights * np.sin(TH) * ct**10)
        assert_allclose(val, 2 * np.pi * 2.0 / 11.0, rtol=1e-12)

    def test_resolution_guards(self):
        with pytest.raises(ValueError):
            QuadratureRule(2, 8)
        with pytest.raises(ValueError):
            QuadratureRule(8, 9)
