"""High-fidelity spectral Galerkin solver for multi-arc scattering.

Assembles the dense block system of the weakly singular boundary integral
equation over all arcs (self blocks via the singular log-expansion path,
cross blocks via smooth tensor transforms), solves it by LU (default) or
preconditioned GMRES, and provides density norms and scattered-field
evaluation.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse.linalg as spla

from . import spectral
from .geometry import ArcFamily, ArcInstance, bound_arc
from .kernel import ElasticParams, dirichlet_data, kernel_grid

__all__ = [
    "MultiArcConfig",
    "BlockSystem",
    "DensitySet",
    "SolveReport",
    "assemble_block",
    "assemble_rhs",
    "assemble_system",
    "solve_hf",
    "t_norm",
    "t_norm_error",
    "eval_scattered_field",
]


@dataclass(frozen=True)
class MultiArcConfig:
    """A concrete scattering problem: arcs, material, incidence, order."""

    family: ArcFamily
    arcs: tuple
    params: ElasticParams
    theta0: float
    n: int
    n_c: int = 0

    def __post_init__(self):
        if len(self.arcs) < 1:
            raise ValueError("need at least one arc")
        if self.n < 1:
            raise ValueError("discretization order must be positive")
        object.__setattr__(self, "arcs", tuple(self.arcs))
        if self.n_c <= 0:
            object.__setattr__(self, "n_c", spectral.default_node_count(self.n))
        if self.n_c < self.n + 1:
            raise ValueError("n_c must be at least n + 1")

    @property
    def m(self) -> int:
        return len(self.arcs)

    @property
    def block_size(self) -> int:
        return 2 * (self.n + 1)

    def evaluator(self, k: int):
        arc = self.arcs[k]
        if isinstance(arc, ArcInstance):
            return bound_arc(arc, self.family.basis)
        return arc  # already an evaluator (generalized arcs)


@dataclass
class BlockSystem:
    """Dense Galerkin blocks A_{k,j} and right-hand sides g_k."""

    blocks: list
    rhs: list

    def dense(self) -> tuple[np.ndarray, np.ndarray]:
        m = len(self.rhs)
        b = self.blocks[0][0].shape[0]
        a = np.empty((m * b, m * b), dtype=complex)
        g = np.empty(m * b, dtype=complex)
        for k in range(m):
            g[k * b:(k + 1) * b] = self.rhs[k]
            for j in range(m):
                a[k * b:(k + 1) * b, j * b:(j + 1) * b] = self.blocks[k][j]
        return a, g


@dataclass
class DensitySet:
    """Per-arc stacked coefficient vectors [a^{j,1}; a^{j,2}]."""

    coeffs: np.ndarray  # (M, 2(N+1)) complex

    @property
    def m(self) -> int:
        return self.coeffs.shape[0]

    @property
    def order(self) -> int:
        return self.coeffs.shape[1] // 2 - 1


@dataclass
class SolveReport:
    m: int = 0
    n: int = 0
    n_unknowns: int = 0
    residual: float = np.nan
    cond_estimate: float = np.nan
    wall_ms_assembly: float = 0.0
    wall_ms_solve: float = 0.0
    method: str = "lu"
    gmres_iterations: int = 0

    def as_row(self) -> dict:
        return {
            "M": self.m,
            "N": self.n,
            "n_unknowns": self.n_unknowns,
            "residual": self.residual,
            "cond_estimate": self.cond_estimate,
            "wall_ms_assembly": self.wall_ms_assembly,
            "wall_ms_solve": self.wall_ms_solve,
            "method": self.method,
        }


def _self_block(params: ElasticParams, arc, nodes: np.ndarray, n: int,
                logc: spectral.LogCoeffs) -> np.ndarray:
    """Self-interaction Galerkin block.

    G = 2 log|t-tau| J + [R + log(d^2/(t-tau)^2) J]; the smooth bracket is
    the self_reg grid, the weighted-log term goes through the singular
    summation with a factor 2.
    """
    reg = kernel_grid(params, arc, nodes, "self_reg")
    jgr = kernel_grid(params, arc, nodes, "self_j")
    block = spectral.matrix_transform(reg, n)
    size = n + 1
    for p in range(2):
        for q in range(2):
            jc = spectral.cheb2d_coeffs(jgr.values[:, :, p, q])
            block[p * size:(p + 1) * size, q * size:(q + 1) * size] += (
                2.0 * spectral.singular_assemble(jc, logc, n)
            )
    return block


def assemble_block(config: MultiArcConfig, k: int, j: int,
                   logc: spectral.LogCoeffs | None = None) -> np.ndarray:
    """Galerkin block A_{k,j} (0-based arc indices)."""
    nodes = spectral.cheb_nodes(config.n_c)
    if k == j:
        if logc is None:
            logc = spectral.log_coeffs(spectral.default_log_terms(config.n))
        return _self_block(config.params, config.evaluator(k), nodes,
                           config.n, logc)
    grid = kernel_grid(config.params,
                       (config.evaluator(k), config.evaluator(j)),
                       nodes, "cross")
    return spectral.matrix_transform(grid, config.n)


def assemble_rhs(config: MultiArcConfig, k: int) -> np.ndarray:
    """Right-hand side pairings of the incident-wave trace on arc k."""
    nodes = spectral.cheb_nodes(config.n_c)
    data = dirichlet_data(config.theta0, config.params, config.evaluator(k),
                          nodes)  # (n_c, 2)
    return np.concatenate([
        spectral.vector_transform(data[:, 0], config.n),
        spectral.vector_transform(data[:, 1], config.n),
    ])


def assemble_system(config: MultiArcConfig) -> BlockSystem:
    """All blocks and right-hand sides.

    Cross blocks are computed once per unordered pair; the reverse block
    is the plain transpose (kernel reciprocity G(x,y) = G(y,x)^T).
    """
    m = config.m
    logc = spectral.log_coeffs(spectral.default_log_terms(config.n))
    blocks = [[None] * m for _ in range(m)]
    for k in range(m):
        blocks[k][k] = assemble_block(config, k, k, logc)
        for j in range(k + 1, m):
            b = assemble_block(config, k, j)
            blocks[k][j] = b
            blocks[j][k] = b.T.copy()
    rhs = [assemble_rhs(config, k) for k in range(m)]
    return BlockSystem(blocks=blocks, rhs=rhs)


def _gmres(a: np.ndarray, g: np.ndarray, precond, rtol: float = 1e-10,
           restart: int = 50, maxiter: int = 500):
    counter = {"it": 0}

    def cb(_):
        counter["it"] += 1

    try:
        x, info = spla.gmres(a, g, M=precond, rtol=rtol, restart=restart,
                             maxiter=maxiter, callback=cb,
                             callback_type="pr_norm")
    except TypeError:  # older scipy uses `tol`
        x, info = spla.gmres(a, g, M=precond, tol=rtol, restart=restart,
                             maxiter=maxiter, callback=cb,
                             callback_type="pr_norm")
    return x, info, counter["it"]


def solve_hf(config: MultiArcConfig, method: str = "lu",
             system: BlockSystem | None = None) -> tuple[DensitySet, SolveReport]:
    """Assemble and solve the high-fidelity system."""
    report = SolveReport(m=config.m, n=config.n, method=method)
    t0 = time.perf_counter()
    if system is None:
        system = assemble_system(config)
    a, g = system.dense()
    report.wall_ms_assembly = 1e3 * (time.perf_counter() - t0)
    report.n_unknowns = len(g)

    t1 = time.perf_counter()
    if method == "lu":
        lu, piv = sla.lu_factor(a)
        x = sla.lu_solve((lu, piv), g)
        gecon = sla.get_lapack_funcs("gecon", (a,))
        rcond = gecon(lu, np.linalg.norm(a, 1), norm="1")[0]
        report.cond_estimate = np.inf if rcond == 0 else 1.0 / rcond
    elif method == "gmres":
        b = config.block_size
        diag_fact = [sla.lu_factor(system.blocks[k][k]) for k in range(config.m)]

        def apply_pc(v):
            out = np.empty_like(v)
            for k in range(config.m):
                out[k * b:(k + 1) * b] = sla.lu_solve(diag_fact[k],
                                                      v[k * b:(k + 1) * b])
            return out

        pc = spla.LinearOperator(a.shape, matvec=apply_pc, dtype=complex)
        x, info, iters = _gmres(a, g, pc)
        report.gmres_iterations = iters
        if info != 0:
            lu, piv = sla.lu_factor(a)
            x = sla.lu_solve((lu, piv), g)
            report.method = "gmres->lu"
    else:
        raise ValueError(f"unknown solve method {method!r}")
    report.wall_ms_solve = 1e3 * (time.perf_counter() - t1)
    report.residual = float(np.linalg.norm(a @ x - g) / np.linalg.norm(g))
    if not np.all(np.isfinite(x)):
        raise ArithmeticError(
            f"linear solve failed (condition estimate {report.cond_estimate:.3g})"
        )
    return DensitySet(coeffs=x.reshape(config.m, config.block_size)), report


def _sobolev_weights(size: int, s: float) -> np.ndarray:
    n = np.arange(size, dtype=float)
    return (1.0 + n * n) ** s


def t_norm(a: DensitySet, s: float = 0.0) -> float:
    """Sobolev-type T^s norm of a density set."""
    size = a.order + 1
    wgt = _sobolev_weights(size, s)
    c = a.coeffs.reshape(a.m, 2, size)
    return float(np.sqrt(np.sum(wgt * np.abs(c) ** 2)))


def t_norm_error(a: DensitySet, b: DensitySet, s: float = 0.0) -> float:
    """T^s distance between density sets; shorter vectors are zero-padded."""
    if a.m != b.m:
        raise ValueError("density sets must cover the same arcs")
    size = max(a.order, b.order) + 1
    wgt = _sobolev_weights(size, s)
    ca = np.zeros((a.m, 2, size), dtype=complex)
    cb = np.zeros_like(ca)
    ca[:, :, : a.order + 1] = a.coeffs.reshape(a.m, 2, a.order + 1)
    cb[:, :, : b.order + 1] = b.coeffs.reshape(b.m, 2, b.order + 1)
    return float(np.sqrt(np.sum(wgt * np.abs(ca - cb) ** 2)))


def eval_scattered_field(config: MultiArcConfig, densities: DensitySet,
                         points) -> np.ndarray:
    """Scattered field at observation points away from the arcs."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    out = np.zeros((len(points), 2), dtype=complex)
    for k in range(config.m):
        arc = config.evaluator(k)
        for i, x in enumerate(points):
            out[i] += spectral.far_field_quadrature(
                densities.coeffs[k], arc, config.params, x
            )
    return out
