"""Chebyshev-weighted spectral machinery.

The Galerkin basis consists of weighted normalized Chebyshev polynomials
``T̃_n / w`` with ``w(t) = sqrt(1 - t**2)`` and ``T̃_n = T_n / c_n``,
``c_0 = sqrt(pi)``, ``c_n = sqrt(pi/2)`` for ``n >= 1``, so that
``∫ T̃_m T̃_l w⁻¹ dt = δ_ml``.

This module provides the Chebyshev-Lobatto evaluation nodes, DCT-based
analysis realizing the linear maps from kernel/data evaluations to Galerkin
coefficients, the expansion coefficients of ``log|t-τ|`` in the weighted
basis, the summation formula assembling weakly singular Galerkin blocks
from smooth-factor coefficients, and the far-field quadrature.

Internally all 2D analysis uses classical (unnormalized) Chebyshev
conventions; normalization scalings are applied at the boundaries.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.fft import dct

__all__ = [
    "ChebBasis",
    "LogCoeffs",
    "cheb_nodes",
    "cheb_eval",
    "norm_constants",
    "vector_transform",
    "cheb2d_coeffs",
    "matrix_transform",
    "log_coeffs",
    "singular_assemble",
    "gauss_cheb_nodes",
    "far_field_quadrature",
    "default_node_count",
    "default_log_terms",
]


def norm_constants(n: int) -> np.ndarray:
    """Normalization constants c_0..c_n relating T_n to T̃_n = T_n/c_n."""
    c = np.full(n + 1, np.sqrt(np.pi / 2.0))
    c[0] = np.sqrt(np.pi)
    return c


@dataclass(frozen=True)
class ChebBasis:
    """Normalized Chebyshev basis of maximal degree `order`."""

    order: int
    constants: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.order < 0:
            raise ValueError("order must be non-negative")
        object.__setattr__(self, "constants", norm_constants(self.order))


@dataclass(frozen=True)
class LogCoeffs:
    """Coefficients d_n of log|t-τ| = Σ d_n T̃_n(t) T̃_n(τ)."""

    d: np.ndarray

    @property
    def classical(self) -> np.ndarray:
        """Coefficients in the classical T_n ⊗ T_n convention."""
        c2 = norm_constants(len(self.d) - 1) ** 2
        return self.d / c2


def default_node_count(n: int) -> int:
    """Default evaluation-grid size for Galerkin order `n`."""
    return 2 * (n + 1) + 16


def default_log_terms(n: int) -> int:
    """Default truncation of the log-kernel expansion for order `n`."""
    return 4 * (n + 1)


def cheb_nodes(n_c: int) -> np.ndarray:
    """Chebyshev-Lobatto nodes, ascending: x_j = cos(pi (n_c-1-j)/(n_c-1))."""
    if n_c < 2:
        raise ValueError("need at least two nodes")
    j = np.arange(n_c)
    return np.cos(np.pi * (n_c - 1 - j) / (n_c - 1))


def cheb_eval(coeffs: np.ndarray, t) -> np.ndarray:
    """Evaluate a classical Chebyshev series at points t (Clenshaw)."""
    t = np.asarray(t, dtype=float)
    b1 = np.zeros(t.shape, dtype=np.result_type(coeffs.dtype, float))
    b2 = np.zeros_like(b1)
    for c in coeffs[:0:-1]:
        b1, b2 = 2.0 * t * b1 - b2 + c, b1
    return t * b1 - b2 + coeffs[0]


def _cheb1d_coeffs(vals: np.ndarray, axis: int = -1) -> np.ndarray:
    """Classical interpolation coefficients from Lobatto-node samples.

    Exact for polynomials of degree <= n_c - 1.  Nodes are assumed in the
    ascending order of :func:`cheb_nodes`.
    """
    m = vals.shape[axis] - 1
    rev = np.flip(vals, axis=axis)  # DCT-I expects samples at cos(pi m / M)
    a = dct(rev, type=1, axis=axis) / m
    sl0 = [slice(None)] * vals.ndim
    sl0[axis] = 0
    slm = [slice(None)] * vals.ndim
    slm[axis] = m
    a[tuple(sl0)] *= 0.5
    a[tuple(slm)] *= 0.5
    return a


def _cheb1d_complex(vals: np.ndarray, axis: int = -1) -> np.ndarray:
    if np.iscomplexobj(vals):
        return _cheb1d_coeffs(vals.real, axis) + 1j * _cheb1d_coeffs(vals.imag, axis)
    return _cheb1d_coeffs(vals, axis)


def vector_transform(f_evals: np.ndarray, n: int) -> np.ndarray:
    """Galerkin pairings ⟨f, T̃_l / w⟩ for l = 0..n from node samples.

    `f_evals` holds f at ``cheb_nodes(n_c)`` along the last axis; the
    result is exact for polynomial f of degree <= n_c - 1.
    """
    n_c = f_evals.shape[-1]
    if n_c < n + 1:
        raise ValueError(f"{n_c} nodes cannot resolve order {n}")
    a = _cheb1d_complex(np.asarray(f_evals), axis=-1)
    return a[..., : n + 1] * norm_constants(n)


def cheb2d_coeffs(grid: np.ndarray) -> np.ndarray:
    """Classical tensor Chebyshev coefficients of a Lobatto-grid sample.

    ``grid[i, j] = f(x_i, x_j)`` with ascending Lobatto nodes in both
    variables; returns j_pq with f ≈ Σ j_pq T_p(t) T_q(τ).
    """
    grid = np.asarray(grid)
    if grid.shape[0] != grid.shape[1]:
        raise ValueError("grid must be square")
    return _cheb1d_complex(_cheb1d_complex(grid, axis=0), axis=1)


def _scalar_matrix_transform(values: np.ndarray, n: int) -> np.ndarray:
    j = cheb2d_coeffs(values)
    if j.shape[0] < n + 1:
        raise ValueError("grid too small for requested order")
    c = norm_constants(n)
    return j[: n + 1, : n + 1] * np.outer(c, c)


def matrix_transform(grid, n: int) -> np.ndarray:
    """Galerkin matrix of a smooth kernel from its Lobatto-grid samples.

    Accepts either a plain ``(n_c, n_c)`` scalar array (entries
    ``⟨∫K(t,τ)T̃_m(τ)w(τ)⁻¹dτ, T̃_l/w⟩``) or a kernel grid object with
    ``values`` shaped ``(n_c, n_c, 2, 2)`` and a ``kind`` attribute, in
    which case the four scalar entries are mapped to the component blocks
    of a ``2(n+1) x 2(n+1)`` matrix.
    """
    values = getattr(grid, "values", grid)
    kind = getattr(grid, "kind", None)
    if kind == "self_j":
        raise ValueError("self_j grids are singular; use singular_assemble")
    values = np.asarray(values)
    if values.ndim == 2:
        return _scalar_matrix_transform(values, n)
    if values.ndim != 4 or values.shape[2:] != (2, 2):
        raise ValueError("expected scalar grid or (n_c, n_c, 2, 2) grid")
    size = n + 1
    out = np.empty((2 * size, 2 * size), dtype=complex)
    for p in range(2):
        for q in range(2):
            out[p * size:(p + 1) * size, q * size:(q + 1) * size] = (
                _scalar_matrix_transform(values[:, :, p, q], n)
            )
    return out


def log_coeffs(n_log: int) -> LogCoeffs:
    """Expansion coefficients of log|t-τ| in the normalized basis."""
    if n_log < 0:
        raise ValueError("n_log must be non-negative")
    d = np.empty(n_log + 1)
    d[0] = -np.pi * np.log(2.0)
    if n_log >= 1:
        d[1:] = -np.pi / np.arange(1, n_log + 1)
    return LogCoeffs(d=d)


def _row_combine(j: np.ndarray, n: int, order: int) -> np.ndarray:
    """Apply the product-to-sum row gather for log-series index n.

    Returns the (order+1, ...) array S with
    S_l = 1/2 ( j[n+l] + [n>=l, l>0] j[n-l] + [l>=n] j[l-n] ),
    indices beyond the available coefficients treated as zero.
    """
    q_max = j.shape[0] - 1
    ls = np.arange(order + 1)
    out = np.zeros((order + 1,) + j.shape[1:], dtype=j.dtype)

    idx = n + ls
    ok = idx <= q_max
    out[ok] += j[idx[ok]]

    idx = n - ls
    ok = (ls > 0) & (idx >= 0) & (idx <= q_max)
    out[ok] += j[idx[ok]]

    idx = ls - n
    ok = (idx >= 0) & (idx <= q_max)
    out[ok] += j[idx[ok]]

    return 0.5 * out


def singular_assemble(j_coeffs: np.ndarray, log: LogCoeffs, n: int) -> np.ndarray:
    """Galerkin block of the kernel log|t-τ| J(t,τ) from J's coefficients.

    `j_coeffs` are classical 2D Chebyshev coefficients of the smooth factor
    J (from :func:`cheb2d_coeffs`).  Returns I with
    I_lm = ∬ log|t-τ| J(t,τ) T̃_l(t) T̃_m(τ) w(t)⁻¹ w(τ)⁻¹ dt dτ,
    computed by the product-to-sum reduction of triple Chebyshev products.
    """
    j_coeffs = np.asarray(j_coeffs)
    if j_coeffs.ndim != 2 or j_coeffs.shape[0] != j_coeffs.shape[1]:
        raise ValueError("j_coeffs must be a square 2D coefficient array")
    if j_coeffs.shape[0] < n + 1:
        raise ValueError("coefficient array too small for requested order")
    d_classical = log.classical
    out = np.zeros((n + 1, n + 1), dtype=complex)
    for k, dk in enumerate(d_classical):
        rows = _row_combine(j_coeffs.astype(complex), k, n)
        both = _row_combine(rows.T, k, n).T  # same gather on columns
        out += dk * both
    c = norm_constants(n)
    return out * np.outer(c, c)


def gauss_cheb_nodes(n: int) -> np.ndarray:
    """First-kind Gauss-Chebyshev nodes (the rule absorbs the weight w⁻¹)."""
    i = np.arange(1, n + 1)
    return np.cos((2 * i - 1) * np.pi / (2 * n))


def far_field_quadrature(
    coeffs: np.ndarray,
    arc,
    params,
    x,
    n_quad: int | None = None,
    kernel_override=None,
    min_distance_factor: float = 1e-3,
) -> np.ndarray:
    """Scattered-field contribution ∫ G(x, r(τ)) u(τ) dτ of one arc.

    `coeffs` stacks the two component coefficient vectors of the density
    u = Σ_m a_m T̃_m / w.  Gauss-Chebyshev quadrature absorbs the endpoint
    weight.  `kernel_override` replaces G by a constant 2x2 matrix (test
    hook).
    """
    from .kernel import green_pointwise  # local import to avoid a cycle

    coeffs = np.asarray(coeffs, dtype=complex)
    if coeffs.size % 2:
        raise ValueError("expected stacked two-component coefficients")
    size = coeffs.size // 2
    n = size - 1
    if n_quad is None:
        n_quad = max(4 * max(n, 1), 64)
    tau = gauss_cheb_nodes(n_quad)
    pts = arc.point(tau)  # (n_quad, 2)
    x = np.asarray(x, dtype=float)

    dists = np.linalg.norm(pts - x, axis=-1)
    scale = max(np.ptp(pts[:, 0]), np.ptp(pts[:, 1]), 1e-30)
    if kernel_override is None and dists.min() <= min_distance_factor * scale:
        raise ValueError(
            "observation point too close to the arc for far-field quadrature"
        )

    c = norm_constants(n)
    u = np.stack(
        [cheb_eval(coeffs[:size] / c, tau), cheb_eval(coeffs[size:] / c, tau)],
        axis=-1,
    )  # (n_quad, 2)
    if kernel_override is not None:
        g = np.broadcast_to(np.asarray(kernel_override), (n_quad, 2, 2))
    else:
        g = green_pointwise(params, x[None, :], pts)  # (n_quad, 2, 2)
    return (np.pi / n_quad) * np.einsum("ipq,iq->p", g, u)
