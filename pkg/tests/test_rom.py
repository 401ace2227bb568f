"""Reduced-order pipeline: snapshots, POD, EIM, reduced assembly/solve."""

import warnings

import numpy as np
import pytest

from arcrom import geometry as g
from arcrom import hf, rom
from arcrom import spectral as sp
from arcrom.sampling import halton_unit_box

N_SMALL = 12


@pytest.fixture(scope="module")
def snapshots(bench_family, elastic_params):
    return rom.sample_snapshots(bench_family, elastic_params, N_SMALL,
                                n_geo_samples=20, seed=0)


@pytest.fixture(scope="module")
def basis(snapshots):
    return rom.pod_basis(snapshots, 1e-6)


@pytest.fixture(scope="module")
def nodes():
    return sp.cheb_nodes(sp.default_node_count(N_SMALL))


@pytest.fixture(scope="module")
def trained_models(bench_family, elastic_params, basis, nodes):
    """Small-scale EIM surrogates for all kinds/entries (eps 1e-2)."""
    reducer = rom.reduce_map(basis, N_SMALL)
    models = {}
    geom = bench_family.geom
    for kind, count, dim in [("cross", 600, 2 * geom.s + 6),
                             ("self_j", 150, geom.s + 2),
                             ("self_reg", 150, geom.s + 2)]:
        zs = halton_unit_box(dim, count, start=1000)
        for entry in rom.ENTRY_PAIRS:
            models[(kind, entry)] = rom.eim_offline(
                kind, entry, zs, 1e-2, 400, bench_family, elastic_params,
                nodes, reducer)
    return models


@pytest.fixture
def two_arc_config(bench_family, elastic_params):
    rng = np.random.default_rng(5)
    arcs = (
        g.ArcInstance(g.SegmentMeta((0.0, 0.0), 0.7, 0.3),
                      rng.uniform(-0.5, 0.5, 12)),
        g.ArcInstance(g.SegmentMeta((4.0, 4.0), 0.8, 2.0),
                      rng.uniform(-0.5, 0.5, 12)),
    )
    return hf.MultiArcConfig(bench_family, arcs, elastic_params, 0.0, N_SMALL)


class TestSnapshots:
    def test_two_columns_per_sample(self, bench_family, elastic_params):
        snap = rom.sample_snapshots(bench_family, elastic_params, N_SMALL,
                                    n_geo_samples=1, seed=0)
        assert snap.columns.shape == (2 * (N_SMALL + 1), 2)
        assert snap.rhs_kinds == ["theta", "theta+pi/2"]

    def test_column_count_and_determinism(self, snapshots, bench_family,
                                          elastic_params):
        assert snapshots.columns.shape[1] == 2 * len(snapshots.sample_params)
        again = rom.sample_snapshots(bench_family, elastic_params, N_SMALL,
                                     n_geo_samples=20, seed=0)
        assert np.array_equal(again.sample_params, snapshots.sample_params)
        assert np.array_equal(again.columns, snapshots.columns)

    def test_each_column_solves_its_system(self, snapshots, bench_family,
                                           elastic_params):
        from arcrom.kernel import incident_trace

        y = snapshots.sample_params[3]
        arc = g.generalized_arc(y, bench_family.geom, bench_family.basis)
        cfg = hf.MultiArcConfig(bench_family, (arc,), elastic_params, 0.0,
                                N_SMALL)
        a = hf.assemble_block(cfg, 0, 0)
        nodes = sp.cheb_nodes(cfg.n_c)
        data = incident_trace(0.0, 0.0, elastic_params, arc, nodes)
        rhs = np.concatenate([sp.vector_transform(data[:, 0], N_SMALL),
                              sp.vector_transform(data[:, 1], N_SMALL)])
        col = snapshots.columns[:, 6]  # sample 3, first RHS
        assert np.linalg.norm(a @ col - rhs) / np.linalg.norm(rhs) < 1e-10

    def test_requires_at_least_one_sample(self, bench_family, elastic_params):
        with pytest.raises(ValueError):
            rom.sample_snapshots(bench_family, elastic_params, N_SMALL, 0)


class TestPod:
    def test_orthonormal_columns(self, basis):
        gram = basis.v.conj().T @ basis.v
        assert np.abs(gram - np.eye(basis.r)).max() < 1e-12

    def test_energy_criterion_is_minimal(self, snapshots, basis):
        s = basis.singular_values
        energy = np.cumsum(s ** 2) / np.sum(s ** 2)
        eps2 = basis.eps_svd ** 2
        assert energy[basis.r - 1] > 1 - eps2
        if basis.r > 1:
            assert energy[basis.r - 2] <= 1 - eps2

    def test_projection_error_matches_discarded_energy(self, snapshots, basis):
        cols = snapshots.columns
        proj = basis.v @ (basis.v.conj().T @ cols)
        err = np.sum(np.abs(cols - proj) ** 2)
        tail = np.sum(basis.singular_values[basis.r:] ** 2)
        assert err == pytest.approx(tail, rel=1e-9, abs=1e-18)

    def test_rank_one_snapshots(self, snapshots):
        col = snapshots.columns[:, :1]
        rep = rom.SnapshotMatrix(columns=np.repeat(col, 7, axis=1),
                                 sample_params=np.zeros((7, 16)),
                                 rhs_kinds=["theta"] * 7, n=N_SMALL)
        rb = rom.pod_basis(rep, 1e-12)
        assert rb.r == 1

    def test_rejects_bad_tolerance(self, snapshots):
        with pytest.raises(ValueError):
            rom.pod_basis(snapshots, 0.0)
        with pytest.raises(ValueError):
            rom.pod_basis(snapshots, 1.0)


class TestReduceMap:
    def test_zero_grid_maps_to_zero(self, basis, nodes):
        reducer = rom.reduce_map(basis, N_SMALL)
        zero = np.zeros((len(nodes), len(nodes)))
        fwd, rev = reducer.reduce_entry("cross", (0, 1), zero)
        assert np.abs(fwd).max() == 0 and np.abs(rev).max() == 0

    def test_linearity(self, basis, nodes):
        reducer = rom.reduce_map(basis, N_SMALL)
        rng = np.random.default_rng(0)
        g1 = rng.standard_normal((len(nodes), len(nodes)))
        g2 = rng.standard_normal((len(nodes), len(nodes)))
        f1, _ = reducer.reduce_entry("self_reg", (1, 0), g1)
        f2, _ = reducer.reduce_entry("self_reg", (1, 0), g2)
        f12, _ = reducer.reduce_entry("self_reg", (1, 0), g1 + g2)
        assert np.abs(f12 - (f1 + f2)).max() < 1e-13 * max(1, np.abs(f12).max())

    def test_complete_basis_reproduces_full_map(self, nodes):
        size = 2 * (N_SMALL + 1)
        eye_basis = rom.ReducedBasis(v=np.eye(size, dtype=complex),
                                     singular_values=np.ones(size),
                                     eps_svd=1e-12, r=size)
        reducer = rom.reduce_map(eye_basis, N_SMALL)
        rng = np.random.default_rng(1)
        grid = rng.standard_normal((len(nodes), len(nodes)))
        full = reducer.full_entry("cross", grid)
        fwd, _ = reducer.reduce_entry("cross", (0, 0), grid)
        block = fwd[: N_SMALL + 1, : N_SMALL + 1]
        assert np.abs(block - full).max() < 1e-12


class TestEimOffline:
    def test_single_candidate_is_reproduced_exactly(self, bench_family,
                                                    elastic_params, nodes,
                                                    basis):
        zs = halton_unit_box(2 * 12 + 6, 1, start=5)
        tr = rom.eim_train("cross", (0, 0), zs, bench_family, elastic_params,
                           nodes, eps_target=1e-12, q_max=400)
        assert len(tr.magic_indices) == 1
        assert tr.final_error < 1e-14

    def test_interp_square_is_unit_lower_triangular(self, trained_models):
        for m in trained_models.values():
            s = m.interp_square
            assert np.allclose(np.diag(s), 1.0, atol=1e-14)
            assert np.abs(np.triu(s, 1)).max() < 1e-12

    def test_tolerance_reached_or_capped(self, trained_models):
        for m in trained_models.values():
            assert m.error_trajectory[-1] <= m.eps_eim or m.q == 400
            assert m.q <= 400

    def test_trajectory_truncation_is_nested(self, bench_family,
                                             elastic_params, nodes, basis):
        reducer = rom.reduce_map(basis, N_SMALL)
        zs = halton_unit_box(14, 120, start=1000)
        tr = rom.eim_train("self_reg", (0, 0), zs, bench_family,
                           elastic_params, nodes, eps_target=1e-4, q_max=400)
        loose = tr.model(1e-1, reducer)
        tight = tr.model(1e-3, reducer)
        assert loose.q < tight.q
        assert np.array_equal(tight.magic_indices[: loose.q],
                              loose.magic_indices)


class TestEimOnline:
    def test_exact_at_training_candidates(self, bench_family, elastic_params,
                                          nodes, basis, trained_models):
        reducer = rom.reduce_map(basis, N_SMALL)
        zs = halton_unit_box(14, 150, start=1000)
        tr = rom.eim_train("self_reg", (0, 0), zs, bench_family,
                           elastic_params, nodes, eps_target=1e-13, q_max=400)
        model = tr.model(1e-13, reducer)
        # a candidate picked by the greedy loop is interpolated exactly
        evaluate = rom._entry_grid_evaluator("self_reg", (0, 0), bench_family,
                                             elastic_params, nodes)
        z0 = zs[7]
        online = rom.eim_online(model, z0, bench_family, elastic_params, nodes)
        exact, _ = reducer.reduce_entry("self_reg", (0, 0), evaluate(z0))
        scale = np.abs(exact).max()
        assert np.abs(online - exact).max() / scale < 1e-9

    def test_interpolation_property_at_magic_points(self, bench_family,
                                                    elastic_params, nodes,
                                                    trained_models):
        import scipy.linalg as sla

        model = trained_models[("cross", (0, 1))]
        rng = np.random.default_rng(11)
        z = rng.uniform(-0.5, 0.5, 2 * 12 + 6)
        vals = rom._magic_values(model, z, bench_family, elastic_params, nodes)
        c = sla.solve_triangular(model.interp_square, vals, lower=True,
                                 unit_diagonal=True)
        # interpolant at magic points = B c = vals by construction
        assert np.abs(model.interp_square @ c - vals).max() < 1e-12 * max(
            1.0, np.abs(vals).max())

    def test_online_matches_exact_reduction_in_box(self, bench_family,
                                                   elastic_params, nodes,
                                                   basis, trained_models):
        reducer = rom.reduce_map(basis, N_SMALL)
        evaluate = rom._entry_grid_evaluator("cross", (0, 0), bench_family,
                                             elastic_params, nodes)
        model = trained_models[("cross", (0, 0))]
        rng = np.random.default_rng(4)
        worst = 0.0
        for _ in range(20):
            z = rng.uniform(-0.5, 0.5, 2 * 12 + 6)
            online = rom.eim_online(model, z, bench_family, elastic_params,
                                    nodes)
            exact, _ = reducer.reduce_entry("cross", (0, 0), evaluate(z))
            worst = max(worst, np.abs(online - exact).max()
                        / max(np.abs(exact).max(), 1e-30))
        assert worst <= 10 * model.eps_eim

    def test_extrapolation_warns(self, bench_family, elastic_params, nodes,
                                 trained_models):
        model = trained_models[("self_j", (0, 0))]
        z = np.zeros(14)
        z[0] = 0.7
        with pytest.warns(UserWarning, match="extrapolation"):
            rom.eim_online(model, z, bench_family, elastic_params, nodes)


class TestAssembleReduced:
    def test_single_arc_matches_projected_block(self, bench_family,
                                                elastic_params, basis,
                                                trained_models):
        arc = g.ArcInstance(g.SegmentMeta((1.0, -2.0), 0.8, 2.4),
                            np.linspace(-0.4, 0.4, 12))
        cfg = hf.MultiArcConfig(bench_family, (arc,), elastic_params, 0.0,
                                N_SMALL)
        system = rom.assemble_reduced(cfg, basis, list(trained_models.values()))
        full = hf.assemble_block(cfg, 0, 0)
        exact = basis.v.conj().T @ full @ basis.v
        dev = np.abs(system.blocks[0, 0] - exact).max() / np.abs(exact).max()
        assert dev <= 10 * 1e-2

    def test_pair_blocks_match_exact_oracle(self, two_arc_config, basis,
                                            trained_models):
        eim = rom.assemble_reduced(two_arc_config, basis,
                                   list(trained_models.values()))
        exact = rom.assemble_reduced(two_arc_config, basis, None, exact=True)
        scale = np.abs(exact.blocks).max()
        assert np.abs(eim.blocks - exact.blocks).max() / scale <= 10 * 1e-2
        assert np.abs(eim.rhs - exact.rhs).max() == 0.0

    def test_anticanonical_orientation_consistency(self, bench_family,
                                                   elastic_params, basis,
                                                   trained_models):
        # reversing the arc order must transpose the pair blocks' roles
        rng = np.random.default_rng(9)
        arcs = (
            g.ArcInstance(g.SegmentMeta((0.0, 0.0), 0.7, 0.3),
                          rng.uniform(-0.5, 0.5, 12)),
            g.ArcInstance(g.SegmentMeta((-6.0, 0.0), 0.8, 2.0),
                          rng.uniform(-0.5, 0.5, 12)),
        )
        models = list(trained_models.values())
        fwd_cfg = hf.MultiArcConfig(bench_family, arcs, elastic_params, 0.0,
                                    N_SMALL)
        rev_cfg = hf.MultiArcConfig(bench_family, arcs[::-1], elastic_params,
                                    0.0, N_SMALL)
        a = rom.assemble_reduced(fwd_cfg, basis, models)
        b = rom.assemble_reduced(rev_cfg, basis, models)
        assert np.abs(a.blocks[0, 1] - b.blocks[1, 0]).max() < 1e-12
        assert np.abs(a.blocks[1, 0] - b.blocks[0, 1]).max() < 1e-12

    def test_zero_rank_basis_handled(self, two_arc_config, basis):
        empty = rom.ReducedBasis(v=basis.v[:, :0], singular_values=basis.
                                 singular_values, eps_svd=1e-6, r=0)
        system = rom.assemble_reduced(two_arc_config, empty, None, exact=True)
        coeffs, lifted, report = rom.rb_solve(system, empty)
        assert coeffs.shape == (2, 0)
        assert np.abs(lifted.coeffs).max() == 0.0
        assert report.method == "empty"


class TestRbSolve:
    def test_complete_basis_exact_assembly_reproduces_hf(self,
                                                         two_arc_config):
        size = 2 * (N_SMALL + 1)
        complete = rom.ReducedBasis(v=np.eye(size, dtype=complex),
                                    singular_values=np.ones(size),
                                    eps_svd=1e-12, r=size)
        system = rom.assemble_reduced(two_arc_config, complete, None,
                                      exact=True)
        _, lifted, _ = rom.rb_solve(system, complete)
        ref, _ = hf.solve_hf(two_arc_config)
        err = hf.t_norm_error(lifted, ref, 0.0) / hf.t_norm(ref, 0.0)
        assert err < 1e-10

    def test_end_to_end_error_within_surrogate_tolerance(self, two_arc_config,
                                                         basis,
                                                         trained_models):
        system = rom.assemble_reduced(two_arc_config, basis,
                                      list(trained_models.values()))
        coeffs, lifted, report = rom.rb_solve(system, basis)
        ref, _ = hf.solve_hf(two_arc_config)
        err = hf.t_norm_error(lifted, ref, 0.0) / hf.t_norm(ref, 0.0)
        assert err < 0.1
        assert report.residual < 1e-9


class TestAposterioriResidual:
    def test_zero_solution_gives_arc_count(self, two_arc_config, basis):
        res = rom.aposteriori_residual(two_arc_config, basis,
                                       np.zeros((2, basis.r)))
        assert res == pytest.approx(2.0, rel=1e-12)

    def test_exact_hf_solution_gives_zero(self, two_arc_config):
        size = 2 * (N_SMALL + 1)
        complete = rom.ReducedBasis(v=np.eye(size, dtype=complex),
                                    singular_values=np.ones(size),
                                    eps_svd=1e-12, r=size)
        ref, _ = hf.solve_hf(two_arc_config)
        res = rom.aposteriori_residual(two_arc_config, complete, ref.coeffs)
        assert res < 1e-18

    def test_residual_improves_with_tighter_tolerances(self, snapshots,
                                                       two_arc_config,
                                                       bench_family,
                                                       elastic_params, nodes):
        residuals = []
        for eps in (1e-1, 1e-3):
            rb = rom.pod_basis(snapshots, eps)
            system = rom.assemble_reduced(two_arc_config, rb, None, exact=True)
            coeffs, _, _ = rom.rb_solve(system, rb)
            residuals.append(rom.aposteriori_residual(two_arc_config, rb,
                                                      coeffs))
        assert residuals[1] < residuals[0]
