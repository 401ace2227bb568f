"""Reduced-order model: POD snapshots, EIM surrogates, reduced solves.

Offline, a reduced basis is extracted (POD) from high-fidelity solutions
of a generalized single-arc problem sampled over the family's parameter
box, and the parameter-to-Galerkin-block maps are compressed by the
empirical interpolation method (EIM), one scalar interpolation per 2x2
kernel entry and per grid kind (cross / self_j / self_reg).  Online, any
multi-arc configuration of the family is assembled in the reduced space
from a handful of kernel evaluations at the EIM magic points and solved
by preconditioned GMRES.
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse.linalg as spla

from . import spectral
from .geometry import (
    ArcFamily,
    ArcInstance,
    LiftedParam,
    canonical_pair_order,
    eval_h1,
    eval_h2,
    generalized_arc,
    lift_pair,
    lift_self,
    self_arc_from_params,
)
from .hf import DensitySet, MultiArcConfig, assemble_block, assemble_rhs, solve_hf
from .kernel import (
    ElasticParams,
    green_pointwise,
    incident_trace,
    self_split_values,
)
from .sampling import halton_unit_box

__all__ = [
    "SnapshotMatrix",
    "ReducedBasis",
    "ReducedAssembler",
    "EimModel",
    "EimTraining",
    "ReducedSystem",
    "sample_snapshots",
    "pod_basis",
    "reduce_map",
    "eim_offline",
    "eim_train",
    "eim_online",
    "assemble_reduced",
    "rb_solve",
    "aposteriori_residual",
    "ENTRY_PAIRS",
]

ENTRY_PAIRS = ((0, 0), (0, 1), (1, 0), (1, 1))


# ---------------------------------------------------------------------------
# Snapshots and POD
# ---------------------------------------------------------------------------


@dataclass
class SnapshotMatrix:
    """HF single-arc solution coefficients, two columns per sample."""

    columns: np.ndarray  # (2(N+1), N_t) complex
    sample_params: np.ndarray  # (n_geo, s+4)
    rhs_kinds: list
    failures: list = field(default_factory=list)
    n: int = 0


def sample_snapshots(family: ArcFamily, params: ElasticParams, n: int,
                     n_geo_samples: int, theta: float = 0.0,
                     seed: int = 0, n_c: int | None = None) -> SnapshotMatrix:
    """Solve the generalized single-arc problem over a Halton sample set.

    Each geometry sample contributes two columns: the incident traces with
    propagation angles theta and theta + pi/2 (fixed polarization e_theta).
    """
    if n_geo_samples < 1:
        raise ValueError("need at least one geometry sample")
    geom = family.geom
    ys = halton_unit_box(geom.s + 4, n_geo_samples, start=seed)
    n_c = n_c or spectral.default_node_count(n)
    nodes = spectral.cheb_nodes(n_c)
    logc = spectral.log_coeffs(spectral.default_log_terms(n))
    cols = []
    kinds = []
    failures = []
    kept = []
    for i, y in enumerate(ys):
        arc = generalized_arc(y, geom, family.basis)
        cfg = MultiArcConfig(family, (arc,), params, theta0=theta, n=n, n_c=n_c)
        try:
            a = assemble_block(cfg, 0, 0, logc)
            lu = sla.lu_factor(a)
            for prop in (theta, theta + np.pi / 2):
                data = incident_trace(theta, prop, params, arc, nodes)
                rhs = np.concatenate([
                    spectral.vector_transform(data[:, 0], n),
                    spectral.vector_transform(data[:, 1], n),
                ])
                cols.append(sla.lu_solve(lu, rhs))
                kinds.append("theta" if prop == theta else "theta+pi/2")
            kept.append(y)
        except Exception as exc:  # noqa: BLE001 - record and skip
            failures.append((i, repr(exc)))
    if not cols:
        raise ArithmeticError("all snapshot solves failed")
    return SnapshotMatrix(
        columns=np.stack(cols, axis=1),
        sample_params=np.array(kept),
        rhs_kinds=kinds,
        failures=failures,
        n=n,
    )


@dataclass(frozen=True)
class ReducedBasis:
    """Orthonormal POD basis with its singular spectrum."""

    v: np.ndarray  # (2(N+1), R)
    singular_values: np.ndarray
    eps_svd: float
    r: int

    @property
    def n(self) -> int:
        return self.v.shape[0] // 2 - 1


def pod_basis(snapshots: SnapshotMatrix, eps_svd: float) -> ReducedBasis:
    """Thin SVD of the snapshot matrix, truncated by the energy criterion:
    R is the smallest rank with sum_{n<=R} s_n^2 / sum_n s_n^2 > 1 - eps_svd^2."""
    if not (0 < eps_svd < 1):
        raise ValueError("eps_svd must lie in (0, 1)")
    u, s, _ = np.linalg.svd(snapshots.columns, full_matrices=False)
    energy = np.cumsum(s**2) / np.sum(s**2)
    r = int(np.searchsorted(energy, 1.0 - eps_svd**2, side="right")) + 1
    r = min(r, int(np.sum(s > s[0] * 1e-14)))  # cap at numerical rank
    return ReducedBasis(v=u[:, :r].copy(), singular_values=s, eps_svd=eps_svd, r=r)


# ---------------------------------------------------------------------------
# Reduced assembly maps
# ---------------------------------------------------------------------------


class ReducedAssembler:
    """The reduced linear maps L^R = V† L(·) V per kernel entry.

    Wraps the grid-to-Galerkin maps of :mod:`spectral` with the basis
    projection; `entry` selects the scalar 2x2 kernel component (p, q)
    mapped to component blocks of the Galerkin matrix.
    """

    def __init__(self, basis: ReducedBasis, n: int,
                 logc: spectral.LogCoeffs | None = None):
        self.basis = basis
        self.n = n
        self.logc = logc or spectral.log_coeffs(spectral.default_log_terms(n))
        size = n + 1
        self.vp = [basis.v[:size], basis.v[size:]]  # component blocks
        self.vph = [vb.conj().T for vb in self.vp]

    def full_entry(self, kind: str, grid: np.ndarray) -> np.ndarray:
        """Unreduced (N+1)x(N+1) Galerkin matrix of one scalar entry."""
        if kind in ("cross", "self_reg"):
            return spectral.matrix_transform(grid, self.n)
        if kind == "self_j":
            return 2.0 * spectral.singular_assemble(
                spectral.cheb2d_coeffs(grid), self.logc, self.n
            )
        raise ValueError(f"unknown kind {kind!r}")

    def reduce_entry(self, kind: str, entry: tuple, grid: np.ndarray):
        """(forward, reverse) reduced matrices of one scalar-entry grid.

        forward = V_p† L(grid) V_q lands at component block (p, q);
        reverse = V_q† L(grid)ᵀ V_p lands at block (q, p) of the
        opposite-orientation pair block (kernel reciprocity).
        """
        p, q = entry
        m = self.full_entry(kind, grid)
        fwd = self.vph[p] @ m @ self.vp[q]
        rev = self.vph[q] @ m.T @ self.vp[p]
        return fwd, rev


def reduce_map(basis: ReducedBasis, n: int) -> ReducedAssembler:
    """Reduced assembly map for the given basis and Galerkin order."""
    return ReducedAssembler(basis, n)


# ---------------------------------------------------------------------------
# EIM offline
# ---------------------------------------------------------------------------


@dataclass
class EimTraining:
    """Greedy EIM trajectory for one (kind, entry) scalar kernel family.

    Keeps the selected basis grids so reduced matrices can be produced for
    any reduced basis / tolerance truncation without re-running the greedy
    scan.
    """

    kind: str
    entry: tuple
    magic_indices: np.ndarray  # (q_total,) flattened grid indices
    interp_square: np.ndarray  # (q_total, q_total) unit lower triangular
    basis_grids: np.ndarray  # (q_total, n_c, n_c)
    error_trajectory: np.ndarray  # (q_total,) relative error before each pick
    final_error: float
    n_c: int
    sample_meta: dict
    stagnated: bool = False

    def q_for(self, eps_eim: float) -> int:
        """Terms needed to reach eps_eim (magic points are nested)."""
        below = np.nonzero(self.error_trajectory <= eps_eim)[0]
        if len(below):
            return int(below[0])
        return len(self.magic_indices)

    def model(self, eps_eim: float, reducer: ReducedAssembler) -> "EimModel":
        q = max(self.q_for(eps_eim), 1)
        mats_f = np.empty((q, reducer.basis.r, reducer.basis.r), dtype=complex)
        mats_r = np.empty_like(mats_f)
        for i in range(q):
            mats_f[i], mats_r[i] = reducer.reduce_entry(
                self.kind, self.entry, self.basis_grids[i]
            )
        return EimModel(
            kind=self.kind,
            entry=self.entry,
            magic_indices=self.magic_indices[:q].copy(),
            interp_square=self.interp_square[:q, :q].copy(),
            reduced_mats=mats_f,
            reduced_mats_rev=mats_r,
            q=q,
            eps_eim=eps_eim,
            n_c=self.n_c,
            error_trajectory=self.error_trajectory[: q + 1].copy()
            if len(self.error_trajectory) > q
            else self.error_trajectory.copy(),
            sample_set_meta=dict(self.sample_meta),
        )


@dataclass
class EimModel:
    """Trained EIM surrogate for one scalar kernel-entry family."""

    kind: str
    entry: tuple
    magic_indices: np.ndarray
    interp_square: np.ndarray
    reduced_mats: np.ndarray  # (q, R, R): forward blocks
    reduced_mats_rev: np.ndarray  # (q, R, R): reverse (transposed-pair) blocks
    q: int
    eps_eim: float
    n_c: int
    error_trajectory: np.ndarray
    sample_set_meta: dict


def _entry_grid_evaluator(kind: str, entry: tuple, family: ArcFamily,
                          params: ElasticParams, nodes: np.ndarray):
    """Scalar-entry kernel grid as a function of the lifted parameters."""
    p, q = entry
    geom = family.geom

    if kind == "cross":
        def evaluate(z):
            lp = LiftedParam(z=z)
            a = eval_h1(lp, geom, family.basis)
            b = eval_h2(lp, geom, family.basis)
            pa = a.point(nodes)
            pb = b.point(nodes)
            return green_pointwise(params, pa[:, None, :], pb[None, :, :])[..., p, q]
        return evaluate

    which = 0 if kind == "self_j" else 2

    def evaluate(z):
        arc = self_arc_from_params(z, geom, family.basis)
        tt, ss = np.meshgrid(nodes, nodes, indexing="ij")
        return self_split_values(params, arc, tt, ss)[which][..., p, q]

    return evaluate


def eim_train(kind: str, entry: tuple, candidate_zs: np.ndarray,
              family: ArcFamily, params: ElasticParams, nodes: np.ndarray,
              eps_target: float, q_max: int = 400,
              sample_meta: dict | None = None) -> EimTraining:
    """Greedy magic-point selection for one scalar kernel-entry family.

    Pre-evaluates the kernel grids of all candidates, then repeatedly
    selects the candidate with the worst relative interpolation error and
    its maximal-residual grid point.  The residual update exploits that
    each new basis function vanishes at all previously selected points, so
    the interpolant update is a rank-one correction.
    """
    candidate_zs = np.asarray(candidate_zs, dtype=float)
    if len(candidate_zs) == 0:
        raise ValueError("candidate set must be non-empty")
    n_c = len(nodes)
    evaluate = _entry_grid_evaluator(kind, entry, family, params, nodes)

    h = np.empty((len(candidate_zs), n_c * n_c), dtype=complex)
    for i, z in enumerate(candidate_zs):
        h[i] = evaluate(z).ravel()

    scale = np.abs(h).max(axis=1)
    scale[scale == 0] = 1.0

    resid = h  # updated in place; the original rows are not needed again
    magic: list[int] = []
    basis_rows: list[np.ndarray] = []
    traj: list[float] = []
    stagnated = False

    for _ in range(q_max):
        rel = np.abs(resid).max(axis=1) / scale
        l_star = int(np.argmax(rel))
        err = float(rel[l_star])
        traj.append(err)
        if err <= eps_target:
            break
        if (len(traj) > 60 and min(traj) < 1e-10
                and min(traj[-60:]) >= 0.999 * min(traj[:-60])):
            warnings.warn("EIM greedy stagnated; stopping early")
            stagnated = True
            break
        x_star = int(np.argmax(np.abs(resid[l_star])))
        b = resid[l_star] / resid[l_star, x_star]
        magic.append(x_star)
        basis_rows.append(b.copy())
        resid -= resid[:, x_star][:, None] * b[None, :]

    q_total = len(basis_rows)
    if q_total == 0:  # candidate set already below tolerance: keep one term
        # (resid is still the raw evaluation matrix here)
        l_star = int(np.argmax(np.abs(resid).max(axis=1) / scale))
        x_star = int(np.argmax(np.abs(resid[l_star])))
        magic = [x_star]
        basis_rows = [resid[l_star] / resid[l_star, x_star]]
        q_total = 1

    magic_arr = np.array(magic, dtype=np.int64)
    bmat = np.stack(basis_rows)  # (q, n_flat)
    interp = bmat[:, magic_arr].T.copy()  # B[i, j] = b_j(x_i), unit lower tri
    final_rel = float((np.abs(resid).max(axis=1) / scale).max())
    meta = dict(sample_meta or {})
    meta.setdefault("n_candidates", len(candidate_zs))
    return EimTraining(
        kind=kind,
        entry=entry,
        magic_indices=magic_arr,
        interp_square=interp,
        basis_grids=bmat.reshape(q_total, n_c, n_c),
        error_trajectory=np.array(traj),
        final_error=final_rel,
        n_c=n_c,
        sample_meta=meta,
        stagnated=stagnated,
    )


def eim_offline(kind: str, entry: tuple, candidate_zs: np.ndarray,
                eps_eim: float, q_max: int, family: ArcFamily,
                params: ElasticParams, nodes: np.ndarray,
                reducer: ReducedAssembler,
                sample_meta: dict | None = None) -> EimModel:
    """Train an EIM surrogate to tolerance eps_eim and attach reduced
    matrices for the given basis."""
    training = eim_train(kind, entry, candidate_zs, family, params, nodes,
                         eps_target=eps_eim, q_max=q_max,
                         sample_meta=sample_meta)
    return training.model(eps_eim, reducer)


# ---------------------------------------------------------------------------
# EIM online
# ---------------------------------------------------------------------------


def _magic_values(model: EimModel, z: np.ndarray, family: ArcFamily,
                  params: ElasticParams, nodes: np.ndarray) -> np.ndarray:
    """Kernel-entry values at the model's magic grid points."""
    rows, cols = np.unravel_index(model.magic_indices, (model.n_c, model.n_c))
    p, q = model.entry
    geom = family.geom
    if model.kind == "cross":
        lp = LiftedParam(z=z)
        a = eval_h1(lp, geom, family.basis)
        b = eval_h2(lp, geom, family.basis)
        return green_pointwise(params, a.point(nodes[rows]),
                               b.point(nodes[cols]))[..., p, q]
    which = 0 if model.kind == "self_j" else 2
    arc = self_arc_from_params(z, geom, family.basis)
    return self_split_values(params, arc, nodes[rows], nodes[cols])[which][..., p, q]


def eim_online(model: EimModel, z: np.ndarray, family: ArcFamily,
               params: ElasticParams, nodes: np.ndarray,
               with_reverse: bool = False):
    """Reduced block contribution of one kernel entry at parameters z.

    Evaluates the kernel only at the q magic points, solves the unit
    lower-triangular interpolation system, and combines the stored
    reduced matrices.  With `with_reverse` also returns the block of the
    opposite pair orientation from the same coefficients.
    """
    z = np.asarray(z, dtype=float)
    if np.any(np.abs(z) > 0.5 + 1e-12):
        warnings.warn("EIM evaluated outside the training box (extrapolation)")
    vals = _magic_values(model, z, family, params, nodes)
    c = sla.solve_triangular(model.interp_square, vals, lower=True,
                             unit_diagonal=True)
    fwd = np.tensordot(c, model.reduced_mats, axes=1)
    if not with_reverse:
        return fwd
    rev = np.tensordot(c, model.reduced_mats_rev, axes=1)
    return fwd, rev


# ---------------------------------------------------------------------------
# Reduced system assembly and solve
# ---------------------------------------------------------------------------


@dataclass
class ReducedSystem:
    """Reduced blocks and right-hand sides (one shared basis)."""

    blocks: np.ndarray  # (M, M, R, R)
    rhs: np.ndarray  # (M, R)


def _model_map(models) -> dict:
    out = {}
    for m in models:
        out[(m.kind, tuple(m.entry))] = m
    return out


def assemble_reduced(config: MultiArcConfig, basis: ReducedBasis,
                     models, exact: bool = False) -> ReducedSystem:
    """Assemble the reduced multi-arc system.

    Self blocks come from the self_j/self_reg EIM surrogates, pair blocks
    from the cross surrogates at the lifted pair parameters.  Pairs are
    oriented so the lift reconstructs the true center offset; the opposite
    block is produced from the same interpolation coefficients via the
    reversed reduced matrices.  With `exact=True` the full Galerkin blocks
    are assembled and projected instead (oracle path for testing).
    """
    m = config.m
    r = basis.r
    family = config.family
    geom = family.geom
    nodes = spectral.cheb_nodes(config.n_c)
    blocks = np.zeros((m, m, r, r), dtype=complex)
    vh = basis.v.conj().T

    if exact:
        logc = spectral.log_coeffs(spectral.default_log_terms(config.n))
        for k in range(m):
            blocks[k, k] = vh @ assemble_block(config, k, k, logc) @ basis.v
            for j in range(k + 1, m):
                a = assemble_block(config, k, j)
                blocks[k, j] = vh @ a @ basis.v
                blocks[j, k] = vh @ a.T @ basis.v
    else:
        mm = _model_map(models)
        for k in range(m):
            z_self = lift_self(config.arcs[k], geom)
            for entry in ENTRY_PAIRS:
                p, q = entry
                for kind in ("self_reg", "self_j"):
                    blocks[k, k] += eim_online(mm[(kind, entry)], z_self,
                                               family, config.params, nodes)
        for k in range(m):
            for j in range(k + 1, m):
                if canonical_pair_order(config.arcs[k], config.arcs[j]):
                    a_idx, b_idx = k, j
                else:
                    a_idx, b_idx = j, k
                z = lift_pair(config.arcs[a_idx], config.arcs[b_idx], geom)
                for entry in ENTRY_PAIRS:
                    fwd, rev = eim_online(mm[("cross", entry)], z.z, family,
                                          config.params, nodes,
                                          with_reverse=True)
                    blocks[a_idx, b_idx] += fwd
                    blocks[b_idx, a_idx] += rev

    rhs = np.stack([vh @ assemble_rhs(config, k) for k in range(m)])
    return ReducedSystem(blocks=blocks, rhs=rhs)


@dataclass
class RbReport:
    m: int = 0
    r: int = 0
    method: str = "gmres"
    gmres_iterations: int = 0
    wall_ms_assembly: float = 0.0
    wall_ms_solve: float = 0.0
    residual: float = np.nan


def rb_solve(system: ReducedSystem, basis: ReducedBasis,
             rtol: float = 1e-10, restart: int = 50,
             maxiter: int = 500) -> tuple[np.ndarray, DensitySet, RbReport]:
    """Solve the reduced system; returns (reduced coeffs, lifted densities,
    report).  GMRES preconditioned by the reduced self blocks, with a
    dense-LU fallback on non-convergence."""
    m, _, r, _ = system.blocks.shape
    report = RbReport(m=m, r=r)
    if r == 0:
        coeffs = np.zeros((m, 0), dtype=complex)
        lifted = DensitySet(coeffs=np.zeros((m, basis.v.shape[0]), dtype=complex))
        report.method = "empty"
        report.residual = 0.0
        return coeffs, lifted, report

    a = system.blocks.transpose(0, 2, 1, 3).reshape(m * r, m * r)
    g = system.rhs.reshape(m * r)
    t0 = time.perf_counter()
    diag_fact = [sla.lu_factor(system.blocks[k, k]) for k in range(m)]

    def apply_pc(v):
        out = np.empty_like(v)
        for k in range(m):
            out[k * r:(k + 1) * r] = sla.lu_solve(diag_fact[k], v[k * r:(k + 1) * r])
        return out

    pc = spla.LinearOperator((m * r, m * r), matvec=apply_pc, dtype=complex)
    counter = {"it": 0}

    def cb(_):
        counter["it"] += 1

    try:
        x, info = spla.gmres(a, g, M=pc, rtol=rtol, restart=restart,
                             maxiter=maxiter, callback=cb,
                             callback_type="pr_norm")
    except TypeError:
        x, info = spla.gmres(a, g, M=pc, tol=rtol, restart=restart,
                             maxiter=maxiter, callback=cb,
                             callback_type="pr_norm")
    report.gmres_iterations = counter["it"]
    if info != 0:
        warnings.warn("reduced GMRES did not converge; falling back to LU")
        x = np.linalg.solve(a, g)
        report.method = "gmres->lu"
    report.wall_ms_solve = 1e3 * (time.perf_counter() - t0)
    report.residual = float(np.linalg.norm(a @ x - g) / np.linalg.norm(g))
    coeffs = x.reshape(m, r)
    lifted = DensitySet(coeffs=(basis.v @ coeffs.T).T.copy())
    return coeffs, lifted, report


def aposteriori_residual(config: MultiArcConfig, basis: ReducedBasis,
                         reduced_coeffs: np.ndarray) -> float:
    """Relative HF residual of the lifted reduced solution.

    res = sum_k ||sum_j A_{k,j} V a^{rb,j} - g_k||^2 / ||g_k||^2,
    streamed one block row at a time so the full system is never stored.
    """
    m = config.m
    lifted = (basis.v @ np.asarray(reduced_coeffs).T).T  # (M, 2(N+1))
    logc = spectral.log_coeffs(spectral.default_log_terms(config.n))
    total = 0.0
    for k in range(m):
        gk = assemble_rhs(config, k)
        row = -gk
        for j in range(m):
            row = row + assemble_block(config, k, j, logc) @ lifted[j]
        total += float(np.vdot(row, row).real / np.vdot(gk, gk).real)
    return total
