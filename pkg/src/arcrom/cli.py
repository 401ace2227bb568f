"""Experiment driver: offline/online pipelines, benchmarks, CSV emission.

Subcommands
-----------
``validate``  geometry family checks only
``hf-solve``  high-fidelity solves over sampled configurations
``offline``   snapshots + reduced basis + kernel surrogates, persisted
``rb-solve``  reduced solves against a persisted container
``sweep``     tolerance-grid benchmark (one row per tolerance pair)

Exit codes: 0 success, 2 configuration/artifact error, 3 numerical
failure.  All CSV output is UTF-8, comma-separated, ``.`` decimal, with
a header row; rows are deterministic under fixed seeds except for the
``wall_ms_*`` timing columns.
"""

from __future__ import annotations

import csv
import sys
import time
from pathlib import Path

import click
import numpy as np

from . import hf, rom, spectral
from .config import ConfigError, ExperimentConfig, load_config
from .geometry import sample_arcs, validate_family
from .persist import family_hash, read_container, write_container
from .sampling import halton_unit_box

__all__ = ["main"]

_CONTAINER_NAME = "arcrom-offline.bin"

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _load(config_path: str, out_override: str | None,
          threads: int | None) -> ExperimentConfig:
    try:
        cfg = load_config(config_path)
    except ConfigError as exc:
        _fail(EXIT_CONFIG, str(exc))
    if out_override:
        cfg.out_dir = Path(out_override)
    if threads:
        cfg.threads = threads
    _apply_threads(cfg.threads)
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    return cfg


def _apply_threads(threads: int):
    try:
        import threadpoolctl

        threadpoolctl.threadpool_limits(limits=threads)
    except ImportError:
        pass  # single-threaded BLAS fallback; the flag is advisory


def _write_csv(path: Path, fieldnames, rows):
    with path.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fieldnames)
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
    click.echo(f"wrote {path} ({len(rows)} rows)")


def _numerical_guard(fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        _fail(EXIT_NUMERICAL, f"numerical failure: {exc}")


def _config_option(fn):
    fn = click.option("--config", "config_path", required=True,
                      type=click.Path(exists=False),
                      help="Experiment configuration file.")(fn)
    fn = click.option("--out", "out_override", default=None,
                      help="Output directory (overrides run.out).")(fn)
    fn = click.option("--threads", default=None, type=int,
                      help="BLAS thread cap (overrides run.threads).")(fn)
    return fn


@click.group()
def main():
    """Reduced-order solver for elastic scattering by arc configurations."""


# ---------------------------------------------------------------------------
# validate
# ---------------------------------------------------------------------------


@main.command()
@_config_option
def validate(config_path, out_override, threads):
    """Run the geometry-family admissibility checks."""
    cfg = _load(config_path, out_override, threads)
    report = validate_family(cfg.family.geom, cfg.family.basis, cfg.segments)
    click.echo(str(report))
    if not report.passed:
        _fail(EXIT_NUMERICAL, "family validation failed")


# ---------------------------------------------------------------------------
# hf-solve
# ---------------------------------------------------------------------------


@main.command("hf-solve")
@_config_option
@click.option("--samples", default=1, type=int, help="Configurations to solve.")
@click.option("--seed", default=0, type=int, help="Configuration sampling seed.")
@click.option("--reference-n", default=0, type=int,
              help="Overkill order for error columns (0 = skip).")
def hf_solve(config_path, out_override, threads, samples, seed, reference_n):
    """Solve sampled configurations with the high-fidelity method."""
    cfg = _load(config_path, out_override, threads)
    if reference_n and reference_n <= cfg.n:
        _fail(EXIT_CONFIG, "--reference-n must exceed discretization.n")
    rng = np.random.default_rng(seed)
    rows = []
    for i in range(samples):
        arcs = sample_arcs(cfg.segments, cfg.family, rng)
        problem = hf.MultiArcConfig(cfg.family, arcs, cfg.params,
                                    cfg.theta0, cfg.n, cfg.n_c)
        dens, report = _numerical_guard(hf.solve_hf, problem)
        row = {"sample": i, **report.as_row()}
        if reference_n:
            ref_problem = hf.MultiArcConfig(cfg.family, arcs, cfg.params,
                                            cfg.theta0, reference_n)
            ref, _ = _numerical_guard(hf.solve_hf, ref_problem)
            row["rel_t0_error"] = (
                hf.t_norm_error(dens, ref, 0.0) / hf.t_norm(ref, 0.0)
            )
        else:
            row["rel_t0_error"] = ""
        rows.append(row)
    fieldnames = list(rows[0].keys())
    _write_csv(cfg.out_dir / "hf-convergence.csv", fieldnames, rows)


# ---------------------------------------------------------------------------
# offline
# ---------------------------------------------------------------------------


def _train_all(cfg: ExperimentConfig, eps_eim: float):
    """EIM trainings for all kernel kinds and entries."""
    geom = cfg.family.geom
    n_c = cfg.n_c or spectral.default_node_count(cfg.n)
    nodes = spectral.cheb_nodes(n_c)
    trainings = []
    specs = [
        ("cross", 2 * geom.s + 6, cfg.rom.n_candidates_cross),
        ("self_j", geom.s + 2, cfg.rom.n_candidates_self),
        ("self_reg", geom.s + 2, cfg.rom.n_candidates_self),
    ]
    for kind, dim, count in specs:
        zs = halton_unit_box(dim, count, start=cfg.rom.candidate_seed)
        for entry in rom.ENTRY_PAIRS:
            click.echo(f"training {kind} entry {entry} "
                       f"({count} candidates) ...", nl=False)
            t0 = time.perf_counter()
            tr = rom.eim_train(kind, entry, zs, cfg.family, cfg.params,
                               nodes, eps_target=eps_eim,
                               q_max=cfg.rom.q_max,
                               sample_meta={"candidate_seed":
                                            cfg.rom.candidate_seed})
            click.echo(f" q={len(tr.magic_indices)} "
                       f"err={tr.final_error:.2e} "
                       f"[{time.perf_counter() - t0:.1f}s]")
            trainings.append(tr)
    return trainings, n_c


def _offline_meta(cfg: ExperimentConfig, snap, basis, models, n_c) -> dict:
    return {
        "family_hash": family_hash(cfg.family, cfg.params, cfg.n),
        "n": cfg.n,
        "n_c": n_c,
        "eps_svd": basis.eps_svd,
        "eps_eim": models[0].eps_eim if models else None,
        "r": basis.r,
        "theta0": cfg.theta0,
        "n_geo_samples": len(snap.sample_params),
        "snapshot_failures": len(snap.failures),
        "snapshot_seed": cfg.rom.snapshot_seed,
        "candidate_seed": cfg.rom.candidate_seed,
        "n_candidates_cross": cfg.rom.n_candidates_cross,
        "n_candidates_self": cfg.rom.n_candidates_self,
        "q_max": cfg.rom.q_max,
    }


@main.command()
@_config_option
@click.option("--seed", default=None, type=int,
              help="Snapshot sampling seed (overrides rom.snapshot_seed).")
def offline(config_path, out_override, threads, seed):
    """Build and persist the reduced basis and kernel surrogates."""
    cfg = _load(config_path, out_override, threads)
    if seed is not None:
        cfg.rom.snapshot_seed = seed
    click.echo(f"sampling {cfg.rom.n_geo_samples} snapshot geometries ...")
    snap = _numerical_guard(
        rom.sample_snapshots, cfg.family, cfg.params, cfg.n,
        cfg.rom.n_geo_samples, theta=cfg.theta0, seed=cfg.rom.snapshot_seed,
    )
    if snap.failures:
        click.echo(f"warning: {len(snap.failures)} snapshot solves failed "
                   "and were skipped", err=True)
    basis = rom.pod_basis(snap, cfg.rom.eps_svd)
    click.echo(f"reduced basis: R={basis.r} of {snap.columns.shape[1]} snapshots")
    trainings, n_c = _train_all(cfg, cfg.rom.eps_eim)
    reducer = rom.reduce_map(basis, cfg.n)
    models = [tr.model(cfg.rom.eps_eim, reducer) for tr in trainings]

    container = cfg.out_dir / _CONTAINER_NAME
    write_container(container, basis, models,
                    _offline_meta(cfg, snap, basis, models, n_c))
    click.echo(f"wrote {container}")

    sigma = basis.singular_values
    _write_csv(cfg.out_dir / "singular-values.csv",
               ["index", "sigma", "sigma_rel"],
               [{"index": i, "sigma": s, "sigma_rel": s / sigma[0]}
                for i, s in enumerate(sigma)])
    rows = []
    for tr in trainings:
        for step, err in enumerate(tr.error_trajectory):
            rows.append({"kind": tr.kind, "entry_row": tr.entry[0],
                         "entry_col": tr.entry[1], "step": step, "error": err})
    _write_csv(cfg.out_dir / "eim-errors.csv",
               ["kind", "entry_row", "entry_col", "step", "error"], rows)


# ---------------------------------------------------------------------------
# rb-solve
# ---------------------------------------------------------------------------


def _load_container(cfg: ExperimentConfig, container_path: str | None):
    path = Path(container_path) if container_path else (
        cfg.out_dir / _CONTAINER_NAME
    )
    if not path.exists():
        _fail(EXIT_CONFIG, f"container {path} not found (run 'offline' first)")
    try:
        basis, models, meta = read_container(path)
    except ValueError as exc:
        _fail(EXIT_CONFIG, f"cannot read container {path}: {exc}")
    expected = family_hash(cfg.family, cfg.params, cfg.n)
    found = meta.get("family_hash")
    if found != expected:
        _fail(EXIT_CONFIG,
              f"container {path} was built for a different family/"
              f"discretization (hash {found} != {expected}); "
              "re-run 'offline' with this config")
    return basis, models, meta


def _rb_row(cfg, basis, models, arcs, mean_q, skip_hf):
    problem = hf.MultiArcConfig(cfg.family, arcs, cfg.params, cfg.theta0,
                                cfg.n, cfg.n_c)
    t0 = time.perf_counter()
    system = _numerical_guard(rom.assemble_reduced, problem, basis, models)
    wall_assembly = 1e3 * (time.perf_counter() - t0)
    coeffs, lifted, report = _numerical_guard(rom.rb_solve, system, basis)
    res = _numerical_guard(rom.aposteriori_residual, problem, basis, coeffs)
    row = {
        "M": problem.m,
        "N": cfg.n,
        "R": basis.r,
        "mean_q": mean_q,
        "pct_residual": 100.0 * res,
        "rel_t0_error_pct": "",
        "gmres_iterations": report.gmres_iterations,
        "method": report.method,
        "wall_ms_rb_assembly": wall_assembly,
        "wall_ms_rb_solve": report.wall_ms_solve,
        "wall_ms_hf": "",
    }
    if not skip_hf:
        t1 = time.perf_counter()
        ref, _ = _numerical_guard(hf.solve_hf, problem)
        row["wall_ms_hf"] = 1e3 * (time.perf_counter() - t1)
        row["rel_t0_error_pct"] = 100.0 * (
            hf.t_norm_error(lifted, ref, 0.0) / hf.t_norm(ref, 0.0)
        )
    return row


_RB_FIELDS = ["sample", "M", "N", "R", "mean_q", "pct_residual",
              "rel_t0_error_pct", "gmres_iterations", "method",
              "wall_ms_rb_assembly", "wall_ms_rb_solve", "wall_ms_hf"]


@main.command("rb-solve")
@_config_option
@click.option("--container", "container_path", default=None,
              type=click.Path(), help="Offline artifact container.")
@click.option("--samples", default=1, type=int, help="Configurations to solve.")
@click.option("--seed", default=0, type=int, help="Configuration sampling seed.")
@click.option("--skip-hf", is_flag=True,
              help="Skip high-fidelity reference solves (residual only).")
def rb_solve(config_path, out_override, threads, container_path, samples,
             seed, skip_hf):
    """Reduced solves of sampled configurations, with error/residual report."""
    cfg = _load(config_path, out_override, threads)
    basis, models, _ = _load_container(cfg, container_path)
    mean_q = float(np.mean([m.q for m in models]))
    rng = np.random.default_rng(seed)
    rows = []
    for i in range(samples):
        arcs = sample_arcs(cfg.segments, cfg.family, rng)
        row = _rb_row(cfg, basis, models, arcs, mean_q, skip_hf)
        rows.append({"sample": i, **row})
    _write_csv(cfg.out_dir / "rb-errors.csv", _RB_FIELDS, rows)


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------


@main.command()
@_config_option
@click.option("--eps-svd", "eps_svd_list", multiple=True, type=float,
              help="Basis tolerances (repeatable; default rom.eps_svd).")
@click.option("--eps-eim", "eps_eim_list", multiple=True, type=float,
              help="Surrogate tolerances (repeatable; default rom.eps_eim).")
@click.option("--samples", default=4, type=int,
              help="Test configurations per tolerance pair.")
@click.option("--seed", default=0, type=int, help="Configuration sampling seed.")
@click.option("--skip-hf", is_flag=True,
              help="Skip high-fidelity references (residual only).")
def sweep(config_path, out_override, threads, eps_svd_list, eps_eim_list,
          samples, seed, skip_hf):
    """Benchmark a tolerance grid; one CSV row per (eps_svd, eps_eim)."""
    cfg = _load(config_path, out_override, threads)
    eps_svd_list = list(eps_svd_list) or [cfg.rom.eps_svd]
    eps_eim_list = list(eps_eim_list) or [cfg.rom.eps_eim]
    for eps in (*eps_svd_list, *eps_eim_list):
        if not (0 < eps < 1):
            _fail(EXIT_CONFIG, f"tolerance {eps} outside (0, 1)")

    click.echo(f"sampling {cfg.rom.n_geo_samples} snapshot geometries ...")
    snap = _numerical_guard(
        rom.sample_snapshots, cfg.family, cfg.params, cfg.n,
        cfg.rom.n_geo_samples, theta=cfg.theta0, seed=cfg.rom.snapshot_seed,
    )
    trainings, _ = _train_all(cfg, min(eps_eim_list))

    rng = np.random.default_rng(seed)
    test_arcs = [sample_arcs(cfg.segments, cfg.family, rng)
                 for _ in range(samples)]
    problems = [hf.MultiArcConfig(cfg.family, arcs, cfg.params, cfg.theta0,
                                  cfg.n, cfg.n_c) for arcs in test_arcs]
    refs = []
    hf_ms = []
    if not skip_hf:
        for problem in problems:
            t0 = time.perf_counter()
            ref, _ = _numerical_guard(hf.solve_hf, problem)
            hf_ms.append(1e3 * (time.perf_counter() - t0))
            refs.append(ref)

    rows = []
    for eps_svd in eps_svd_list:
        basis = rom.pod_basis(snap, eps_svd)
        reducer = rom.reduce_map(basis, cfg.n)
        for eps_eim in eps_eim_list:
            models = [tr.model(eps_eim, reducer) for tr in trainings]
            mean_q = float(np.mean([m.q for m in models]))
            errors = []
            residuals = []
            rb_ms = []
            for idx, problem in enumerate(problems):
                t0 = time.perf_counter()
                system = _numerical_guard(rom.assemble_reduced, problem,
                                          basis, models)
                coeffs, lifted, _ = _numerical_guard(rom.rb_solve, system,
                                                     basis)
                rb_ms.append(1e3 * (time.perf_counter() - t0))
                res = _numerical_guard(rom.aposteriori_residual, problem,
                                       basis, coeffs)
                residuals.append(100.0 * res)
                if refs:
                    errors.append(100.0 * hf.t_norm_error(lifted, refs[idx], 0.0)
                                  / hf.t_norm(refs[idx], 0.0))
            row = {
                "eps_svd": eps_svd,
                "eps_eim": eps_eim,
                "R": basis.r,
                "mean_q": mean_q,
                "mean_pct_error": float(np.mean(errors)) if errors else "",
                "mean_pct_residual": float(np.mean(residuals)),
                "wall_ms_rb": float(np.mean(rb_ms)),
                "wall_ms_hf": float(np.mean(hf_ms)) if hf_ms else "",
            }
            rows.append(row)
            click.echo(f"eps_svd={eps_svd:g} eps_eim={eps_eim:g} R={basis.r} "
                       f"mean_q={mean_q:.0f} "
                       f"err={row['mean_pct_error'] or float('nan'):.3g}% "
                       f"res={row['mean_pct_residual']:.3g}%")
    _write_csv(cfg.out_dir / "sweep.csv",
               ["eps_svd", "eps_eim", "R", "mean_q", "mean_pct_error",
                "mean_pct_residual", "wall_ms_rb", "wall_ms_hf"], rows)


if __name__ == "__main__":
    main()
