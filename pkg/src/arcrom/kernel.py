"""Time-harmonic 2D elastodynamic fundamental solution and its splitting.

The fundamental solution of the Navier operator is

    G(x, y) = G1(d) I + G2(d) D(x - y),   d = |x - y|,
    D(v) = v v^T / |v|^2,

with G1, G2 built from Hankel functions of the compressional and shear
wavenumbers k_p = omega/sqrt(lambda + 2 mu), k_s = omega/sqrt(mu).  For
self-interaction of an arc the kernel is decomposed as

    G = log(d^2) J + R

where J = J1(d) I + J2(d) D and R are entire in d**2; J carries the
logarithmic singularity used by the weighted-Chebyshev singular assembly.
The Galerkin assembly further rewrites log(d^2) = 2 log|t-tau| +
log(d^2/(t-tau)^2); the second (smooth) term is folded into the regular
grid kind ``self_reg``, so a self block is
``matrix_transform(self_reg) + 2 * singular_assemble(cheb2d(self_j))``.

All evaluators are vectorized over leading axes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import special

__all__ = [
    "ElasticParams",
    "KernelEvalGrid",
    "SelfKernelSplit",
    "green",
    "green_pointwise",
    "self_kernel_split",
    "self_split_values",
    "plane_wave",
    "dirichlet_data",
    "kernel_grid",
    "cross_values",
]

_SMALL_KD = 0.5  # below this k_s * d, green() switches to the split form
_DIAG_DT = 1e-6  # |t - tau| below which the tangent-based D limit is used


@dataclass(frozen=True)
class ElasticParams:
    """Material/frequency parameters with derived wavenumbers."""

    omega: float
    lame_lambda: float
    lame_mu: float

    def __post_init__(self):
        if self.omega <= 0:
            raise ValueError("omega must be positive")
        if self.lame_mu <= 0:
            raise ValueError("mu must be positive")
        if self.lame_lambda + 2.0 * self.lame_mu <= 0:
            raise ValueError("lambda + 2 mu must be positive")

    @property
    def kp(self) -> float:
        return self.omega / np.sqrt(self.lame_lambda + 2.0 * self.lame_mu)

    @property
    def ks(self) -> float:
        return self.omega / np.sqrt(self.lame_mu)


@dataclass(frozen=True)
class KernelEvalGrid:
    """Kernel samples on the tensor Chebyshev-Lobatto grid."""

    values: np.ndarray  # (n_c, n_c, 2, 2) complex
    node_count: int
    kind: str  # "cross" | "self_j" | "self_reg"

    def __post_init__(self):
        if self.kind not in ("cross", "self_j", "self_reg"):
            raise ValueError(f"unknown grid kind {self.kind!r}")
        if self.values.shape != (self.node_count, self.node_count, 2, 2):
            raise ValueError("grid shape mismatch")


@dataclass(frozen=True)
class SelfKernelSplit:
    """Pointwise splitting G = log(d^2) j_part + reg_part."""

    j_part: np.ndarray
    reg_part: np.ndarray


# ---------------------------------------------------------------------------
# Scalar radial factors
# ---------------------------------------------------------------------------


def _j_factors(params: ElasticParams, d: np.ndarray):
    """Entire log-factors J1(d), J2(d)."""
    kp, ks = params.kp, params.ks
    om2 = params.omega ** 2
    mu = params.lame_mu
    j1s = special.j1_over_x(ks * d)
    j1p = special.j1_over_x(kp * d)
    j0s = special.bessel_j0(ks * d)
    j0p = special.bessel_j0(kp * d)
    j1 = -j0s / (4.0 * np.pi * mu) + (ks**2 * j1s - kp**2 * j1p) / (4.0 * np.pi * om2)
    j2 = -(2.0 * ks**2 * j1s - 2.0 * kp**2 * j1p + kp**2 * j0p - ks**2 * j0s) / (
        4.0 * np.pi * om2
    )
    return j1, j2


def _r_factors(params: ElasticParams, d: np.ndarray):
    """Regular remainders R1(d), R2(d) with G^i = log(d^2) J^i + R^i.

    Uses the entire auxiliary series of :mod:`special`; valid for every
    d >= 0 (no cancellation at small d).
    """
    kp, ks = params.kp, params.ks
    om2 = params.omega ** 2
    mu = params.lame_mu
    cs = 1.0 + 2j / np.pi * np.log(ks / 2.0)
    cp = 1.0 + 2j / np.pi * np.log(kp / 2.0)

    def a_term(k, c):
        return k**2 * (
            c * special.j1_over_x(k * d) + 1j * special.y1_regular_over_x(k * d)
        )

    def h0_reg(k, c):
        return c * special.bessel_j0(k * d) + 1j * special.y0_regular(k * d)

    a_s = a_term(ks, cs)
    a_p = a_term(kp, cp)
    r1 = 1j / (4.0 * mu) * h0_reg(ks, cs) - 1j / (4.0 * om2) * (a_s - a_p)
    r2 = (
        1j
        / (4.0 * om2)
        * (2.0 * a_s - 2.0 * a_p + kp**2 * h0_reg(kp, cp) - ks**2 * h0_reg(ks, cs))
    )
    return r1, r2


def _g_factors_direct(params: ElasticParams, d: np.ndarray):
    """G1(d), G2(d) from Hankel functions (d > 0)."""
    kp, ks = params.kp, params.ks
    om2 = params.omega ** 2
    mu = params.lame_mu
    h0s = special.hankel1_0(ks * d)
    h0p = special.hankel1_0(kp * d)
    h1s = special.hankel1_1(ks * d)
    h1p = special.hankel1_1(kp * d)
    g1 = 1j / (4.0 * mu) * h0s - 1j / (4.0 * om2 * d) * (ks * h1s - kp * h1p)
    g2 = (
        1j
        / (4.0 * om2)
        * ((2.0 * ks * h1s - 2.0 * kp * h1p) / d + kp**2 * h0p - ks**2 * h0s)
    )
    return g1, g2


def _g_factors(params: ElasticParams, d: np.ndarray):
    """G1(d), G2(d), cancellation-safe for small k_s d via the split form."""
    d = np.asarray(d, dtype=float)
    small = params.ks * d < _SMALL_KD
    g1 = np.empty(d.shape, dtype=complex)
    g2 = np.empty(d.shape, dtype=complex)
    if np.any(~small):
        a, b = _g_factors_direct(params, d[~small])
        g1[~small], g2[~small] = a, b
    if np.any(small):
        ds = d[small]
        j1, j2 = _j_factors(params, ds)
        r1, r2 = _r_factors(params, ds)
        logd2 = 2.0 * np.log(ds)
        g1[small] = logd2 * j1 + r1
        g2[small] = logd2 * j2 + r2
    return g1, g2


def _d_matrix(diff: np.ndarray) -> np.ndarray:
    """Projector v v^T / |v|^2 along the leading axes of diff (..., 2)."""
    nrm2 = np.einsum("...i,...i->...", diff, diff)
    return diff[..., :, None] * diff[..., None, :] / nrm2[..., None, None]


# ---------------------------------------------------------------------------
# Public kernel evaluators
# ---------------------------------------------------------------------------


def green_pointwise(params: ElasticParams, x, y) -> np.ndarray:
    """Fundamental solution at broadcastable point arrays (..., 2)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    diff = x - y
    d = np.linalg.norm(diff, axis=-1)
    if np.any(d == 0):
        raise ValueError("fundamental solution is singular at coincident points")
    g1, g2 = _g_factors(params, d)
    eye = np.eye(2)
    return g1[..., None, None] * eye + g2[..., None, None] * _d_matrix(diff)


def green(params: ElasticParams, x, y) -> np.ndarray:
    """Fundamental solution G(x, y) as a 2x2 complex matrix."""
    return green_pointwise(params, np.asarray(x, float), np.asarray(y, float))


def self_split_values(params: ElasticParams, arc, t, tau):
    """Splitting factors of the self-interaction kernel at (t, tau) arrays.

    Returns (j_part, reg_part, assembly_reg) with shapes t.shape + (2, 2):
    G = log(d^2) j_part + reg_part off the diagonal, and
    assembly_reg = reg_part + log(d^2/(t-tau)^2) j_part, the smooth factor
    paired with 2 log|t-tau| in Galerkin assembly.  All three are total on
    the closed square (diagonal limits applied).
    """
    t = np.asarray(t, dtype=float)
    tau = np.asarray(tau, dtype=float)
    t, tau = np.broadcast_arrays(t, tau)
    pt = arc.point(t)
    ptau = arc.point(tau)
    diff = pt - ptau
    d = np.linalg.norm(diff, axis=-1)
    dt = t - tau
    near = np.abs(dt) < _DIAG_DT

    # D matrix: tangent-based limit near the diagonal.
    dmat = np.empty(t.shape + (2, 2))
    if np.any(~near):
        dmat[~near] = _d_matrix(diff[~near])
    if np.any(near):
        tan = arc.tangent(t[near])
        dmat[near] = _d_matrix(tan)

    j1, j2 = _j_factors(params, d)
    r1, r2 = _r_factors(params, d)
    eye = np.eye(2)
    j_part = j1[..., None, None] * eye + j2[..., None, None] * dmat
    reg_part = r1[..., None, None] * eye + r2[..., None, None] * dmat

    # Smooth log-ratio log(d^2 / (t-tau)^2); limit log ||r'(t)||^2.
    ratio = np.empty(t.shape)
    if np.any(~near):
        ratio[~near] = 2.0 * (np.log(d[~near]) - np.log(np.abs(dt[~near])))
    if np.any(near):
        tan = arc.tangent(t[near])
        ratio[near] = np.log(np.einsum("...i,...i->...", tan, tan))
    assembly_reg = reg_part + ratio[..., None, None] * j_part
    return j_part, reg_part, assembly_reg


def self_kernel_split(params: ElasticParams, arc, t, tau) -> SelfKernelSplit:
    """Pointwise G = log(d^2) J + R splitting; total on the closed square."""
    j_part, reg_part, _ = self_split_values(params, arc, t, tau)
    return SelfKernelSplit(j_part=j_part, reg_part=reg_part)


def plane_wave(theta: float, kappa: float, x) -> np.ndarray:
    """Scalar plane wave exp(i kappa e_theta . x); x has shape (..., 2)."""
    x = np.asarray(x, dtype=float)
    e = np.array([np.cos(theta), np.sin(theta)])
    return np.exp(1j * kappa * (x @ e))


def dirichlet_data(theta0: float, params: ElasticParams, arc, t) -> np.ndarray:
    """Boundary trace e_theta0 g_{theta0, k_p}(r(t)); shape t.shape + (2,)."""
    pts = arc.point(np.asarray(t, dtype=float))
    e = np.array([np.cos(theta0), np.sin(theta0)])
    return plane_wave(theta0, params.kp, pts)[..., None] * e


def incident_trace(theta_pol: float, theta_prop: float, params: ElasticParams,
                   arc, t) -> np.ndarray:
    """Trace e_{theta_pol} g_{theta_prop, k_p}(r(t)) with independent
    polarization and propagation angles (snapshot generation uses the
    pair theta and theta + pi/2)."""
    pts = arc.point(np.asarray(t, dtype=float))
    e = np.array([np.cos(theta_pol), np.sin(theta_pol)])
    return plane_wave(theta_prop, params.kp, pts)[..., None] * e


def cross_values(params: ElasticParams, arc_a, arc_b, t, tau) -> np.ndarray:
    """G(r_a(t), r_b(tau)) at paired parameter arrays."""
    return green_pointwise(params, arc_a.point(np.asarray(t, float)),
                           arc_b.point(np.asarray(tau, float)))


def kernel_grid(params: ElasticParams, arc_or_pair, nodes: np.ndarray,
                kind: str) -> KernelEvalGrid:
    """Kernel samples on the tensor grid of the given Chebyshev nodes.

    `kind`="cross" takes a pair (arc_a, arc_b) of distinct arcs and
    samples the fundamental solution; "self_j"/"self_reg" take a single
    arc and sample the singular factor J resp. the smooth assembly factor
    R + log(d^2/(t-tau)^2) J.
    """
    nodes = np.asarray(nodes, dtype=float)
    n_c = len(nodes)
    tt, ss = np.meshgrid(nodes, nodes, indexing="ij")
    if kind == "cross":
        try:
            arc_a, arc_b = arc_or_pair
        except TypeError:
            raise ValueError("cross grids require a pair of arcs") from None
        pa = arc_a.point(nodes)
        pb = arc_b.point(nodes)
        if np.allclose(pa, pb, atol=1e-14):
            raise ValueError(
                "cross grid requested for coincident arcs; use self kinds"
            )
        values = green_pointwise(params, pa[:, None, :], pb[None, :, :])
    elif kind in ("self_j", "self_reg"):
        j_part, _, assembly_reg = self_split_values(params, arc_or_pair, tt, ss)
        values = j_part if kind == "self_j" else assembly_reg
    else:
        raise ValueError(f"unknown grid kind {kind!r}")
    return KernelEvalGrid(values=values, node_count=n_c, kind=kind)
