"""Weighted Chebyshev transforms and singular Galerkin assembly against
adaptive-quadrature oracles."""

import numpy as np
import pytest
from scipy.integrate import dblquad, quad

from arcrom import spectral as sp


def _cheb_t(n, x):
    return np.cos(n * np.arccos(np.clip(x, -1.0, 1.0)))


def smooth_oracle(kernel, l, m, tol=1e-11):
    """<kernel, T~_l x T~_m> with the 1/w weights, by adaptive quadrature."""
    cc = sp.norm_constants(max(l, m))
    val = dblquad(
        lambda s, t: kernel(t, s) * _cheb_t(l, t) * _cheb_t(m, s)
        / np.sqrt((1 - t * t) * (1 - s * s)),
        -1, 1, -1, 1, epsabs=tol,
    )[0]
    return val / (cc[l] * cc[m])


def log_galerkin_oracle(kernel, l, m, eps=1e-11):
    """<log|t-s| kernel, T~_l x T~_m>/w/w via the angular substitution.

    Substituting t = cos(theta), s = cos(phi) removes the endpoint weights;
    the inner quadrature splits at the logarithmic singularity.
    """
    cc = sp.norm_constants(max(l, m))

    def inner(th):
        t = np.cos(th)

        def f(ph):
            return (np.log(abs(t - np.cos(ph)) + 1e-300)
                    * kernel(t, np.cos(ph)) * np.cos(m * ph))

        return quad(f, 0, np.pi, points=[th], limit=200,
                    epsabs=eps, epsrel=eps)[0]

    out = quad(lambda th: inner(th) * np.cos(l * th), 0, np.pi,
               limit=200, epsabs=1e-9, epsrel=1e-9)[0]
    return out / (cc[l] * cc[m])


class TestNodesAndEval:
    def test_nodes_ascending_with_endpoints(self):
        nodes = sp.cheb_nodes(20)
        assert nodes[0] == -1.0 and nodes[-1] == 1.0
        assert np.all(np.diff(nodes) > 0)

    def test_cheb_eval_reproduces_polynomial(self):
        coeffs = np.array([1.0, -2.0, 0.5, 3.0])
        x = np.linspace(-1, 1, 31)
        expect = sum(c * _cheb_t(n, x) for n, c in enumerate(coeffs))
        assert np.allclose(sp.cheb_eval(coeffs, x), expect, atol=1e-14)

    def test_default_resolutions(self):
        assert sp.default_node_count(40) == 2 * 41 + 16
        assert sp.default_log_terms(40) == 4 * 41


class TestVectorTransform:
    def test_constant(self):
        nodes = sp.cheb_nodes(40)
        v = sp.vector_transform(np.ones(40), 5)
        assert v[0] == pytest.approx(np.sqrt(np.pi), abs=1e-14)
        assert np.max(np.abs(v[1:])) < 1e-14

    def test_linear(self):
        nodes = sp.cheb_nodes(40)
        v = sp.vector_transform(nodes.astype(float), 5)
        assert v[1] == pytest.approx(np.sqrt(np.pi / 2), abs=1e-14)
        v[1] = 0.0
        assert np.max(np.abs(v)) < 1e-14

    def test_normalized_basis_is_orthonormal(self):
        nodes = sp.cheb_nodes(64)
        cc = sp.norm_constants(6)
        for k in range(7):
            f = _cheb_t(k, nodes) / cc[k]
            v = sp.vector_transform(f, 6)
            assert np.max(np.abs(v - np.eye(7)[k])) < 1e-13

    def test_exponential_against_quadrature(self):
        nodes = sp.cheb_nodes(60)
        v = sp.vector_transform(np.exp(nodes), 4)
        cc = sp.norm_constants(4)
        for l in range(5):
            ref = quad(
                lambda t: np.exp(t) * _cheb_t(l, t) / np.sqrt(1 - t * t),
                -1, 1, epsabs=1e-12, limit=200,
            )[0] / cc[l]
            assert v[l] == pytest.approx(ref, abs=1e-10)


class TestMatrixTransform:
    def test_separable_polynomial_entry(self):
        nodes = sp.cheb_nodes(40)
        grid = np.outer(_cheb_t(2, nodes), _cheb_t(3, nodes))
        a = sp.matrix_transform(grid, 5)
        cc = sp.norm_constants(5)
        # T_2(t) T_3(s) = c2 c3 T~_2(t) T~_3(s), so the (2,3) entry is c2 c3
        expect = np.zeros((6, 6))
        expect[2, 3] = cc[2] * cc[3]
        assert np.allclose(a, expect, atol=1e-13)

    def test_exponential_against_quadrature(self):
        nodes = sp.cheb_nodes(60)
        grid = np.exp(nodes[:, None] + nodes[None, :])
        a = sp.matrix_transform(grid, 3)
        for (l, m) in [(0, 0), (1, 2), (3, 3), (2, 0)]:
            ref = smooth_oracle(lambda t, s: np.exp(t + s), l, m)
            assert a[l, m] == pytest.approx(ref, abs=1e-9)

    def test_rejects_singular_grid_kind(self, bench_family, elastic_params):
        from arcrom.geometry import ArcInstance, SegmentMeta, bound_arc
        from arcrom.kernel import kernel_grid

        arc = bound_arc(
            ArcInstance(SegmentMeta((0.0, 0.0), 0.7, 1.0), np.zeros(12)),
            bench_family.basis,
        )
        grid = kernel_grid(elastic_params, arc, sp.cheb_nodes(30), "self_j")
        with pytest.raises(ValueError):
            sp.matrix_transform(grid, 8)


class TestLogCoeffs:
    def test_closed_form(self):
        lc = sp.log_coeffs(8)
        assert lc.d[0] == pytest.approx(-np.pi * np.log(2.0), abs=1e-15)
        n = np.arange(1, 9)
        assert np.allclose(lc.d[1:], -np.pi / n, atol=1e-15)

    def test_against_quadrature(self):
        lc = sp.log_coeffs(8)
        for n in [0, 1, 4]:
            ref = log_galerkin_oracle(lambda t, s: 1.0, n, n)
            assert lc.classical[n] * sp.norm_constants(n)[n] ** 2 == pytest.approx(
                lc.d[n], abs=1e-15
            )
            assert lc.d[n] == pytest.approx(ref, abs=1e-9)


class TestSingularAssemble:
    def test_exponential_kernel_against_nested_quadrature(self):
        nodes = sp.cheb_nodes(40)
        grid = np.exp(nodes[:, None] + nodes[None, :])
        jc = sp.cheb2d_coeffs(grid)
        mat = sp.singular_assemble(jc, sp.log_coeffs(160), 3)
        for (l, m) in [(0, 0), (0, 1), (1, 1), (2, 3)]:
            ref = log_galerkin_oracle(lambda t, s: np.exp(t + s), l, m)
            assert mat[l, m] == pytest.approx(ref, abs=5e-9)

    def test_constant_kernel_is_diagonal(self):
        nodes = sp.cheb_nodes(40)
        jc = sp.cheb2d_coeffs(np.ones((40, 40)))
        mat = sp.singular_assemble(jc, sp.log_coeffs(64), 5)
        lc = sp.log_coeffs(5)
        assert np.allclose(np.diag(mat), lc.d[:6], atol=1e-12)
        off = mat - np.diag(np.diag(mat))
        assert np.max(np.abs(off)) < 1e-12

    def test_linearity(self):
        rng = np.random.default_rng(0)
        nodes = sp.cheb_nodes(30)
        g1 = np.exp(nodes[:, None] * nodes[None, :])
        g2 = np.cos(nodes)[:, None] * np.sin(nodes)[None, :] + 2.0
        logc = sp.log_coeffs(80)
        a1 = sp.singular_assemble(sp.cheb2d_coeffs(g1), logc, 6)
        a2 = sp.singular_assemble(sp.cheb2d_coeffs(g2), logc, 6)
        a12 = sp.singular_assemble(sp.cheb2d_coeffs(g1 + g2), logc, 6)
        assert np.allclose(a12, a1 + a2, atol=1e-12)


class TestFarFieldQuadrature:
    def test_single_layer_value_against_quadrature(self, bench_family,
                                                   elastic_params):
        from arcrom.geometry import ArcInstance, SegmentMeta, bound_arc
        from arcrom.kernel import green_pointwise

        arc = bound_arc(
            ArcInstance(SegmentMeta((0.0, 0.0), 0.8, 0.5), np.zeros(12)),
            bench_family.basis,
        )
        n = 6
        rng = np.random.default_rng(3)
        coeffs = rng.standard_normal(2 * (n + 1)) + 1j * rng.standard_normal(2 * (n + 1))
        x = np.array([4.0, -2.0])
        val = sp.far_field_quadrature(coeffs, arc, elastic_params, x)

        cc = sp.norm_constants(n)

        def dens(t):
            out = np.zeros((np.size(t), 2), dtype=complex)
            for p in range(2):
                for k in range(n + 1):
                    out[:, p] += coeffs[p * (n + 1) + k] * _cheb_t(k, t) / cc[k]
            return out

        th = np.linspace(0, np.pi, 4001)
        t = np.cos(th)
        g = green_pointwise(elastic_params, x[None, :], arc.point(t))
        integrand = np.einsum("npq,nq->np", g, dens(t))
        ref = np.trapezoid(integrand, th, axis=0)
        assert np.allclose(val, ref, atol=1e-8)

    def test_rejects_points_on_the_arc(self, bench_family, elastic_params):
        from arcrom.geometry import ArcInstance, SegmentMeta, bound_arc

        arc = bound_arc(
            ArcInstance(SegmentMeta((0.0, 0.0), 0.8, 0.5), np.zeros(12)),
            bench_family.basis,
        )
        on_arc = arc.point(sp.gauss_cheb_nodes(64)[10:11])[0]
        with pytest.raises(ValueError):
            sp.far_field_quadrature(np.ones(14, dtype=complex), arc,
                                    elastic_params, on_arc)
