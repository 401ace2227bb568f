"""Reduced-order modeling of elastic wave scattering by open arcs.

A spectral Galerkin boundary-element solver for time-harmonic
elastodynamic scattering by collections of open arcs in the plane,
together with an offline/online reduced-order pipeline: proper
orthogonal decomposition of single-arc solution snapshots and empirical
interpolation of the parametric kernel blocks, so that large multi-arc
configurations are assembled and solved in a reduced space.
"""

from .config import ConfigError, ExperimentConfig, load_config, parse_config
from .geometry import (
    ArcFamily,
    ArcInstance,
    GlobalGeometry,
    PerturbationBasis,
    SegmentMeta,
    cheb_table_basis,
    generalized_arc,
    grid_segments,
    ring_segments,
    sample_arcs,
    trig_basis,
    validate_family,
)
from .hf import (
    DensitySet,
    MultiArcConfig,
    SolveReport,
    assemble_system,
    eval_scattered_field,
    solve_hf,
    t_norm,
    t_norm_error,
)
from .kernel import ElasticParams, dirichlet_data, green, plane_wave
from .persist import family_hash, read_container, write_container
from .rom import (
    ENTRY_PAIRS,
    EimModel,
    ReducedBasis,
    ReducedSystem,
    aposteriori_residual,
    assemble_reduced,
    eim_offline,
    eim_online,
    eim_train,
    pod_basis,
    rb_solve,
    reduce_map,
    sample_snapshots,
)

__version__ = "0.1.0"

__all__ = [
    "ArcFamily",
    "ArcInstance",
    "ConfigError",
    "DensitySet",
    "ENTRY_PAIRS",
    "EimModel",
    "ElasticParams",
    "ExperimentConfig",
    "GlobalGeometry",
    "MultiArcConfig",
    "PerturbationBasis",
    "ReducedBasis",
    "ReducedSystem",
    "SegmentMeta",
    "SolveReport",
    "aposteriori_residual",
    "assemble_reduced",
    "assemble_system",
    "cheb_table_basis",
    "dirichlet_data",
    "eim_offline",
    "eim_online",
    "eim_train",
    "eval_scattered_field",
    "family_hash",
    "generalized_arc",
    "green",
    "grid_segments",
    "load_config",
    "parse_config",
    "plane_wave",
    "pod_basis",
    "rb_solve",
    "read_container",
    "reduce_map",
    "ring_segments",
    "sample_arcs",
    "sample_snapshots",
    "solve_hf",
    "t_norm",
    "t_norm_error",
    "trig_basis",
    "validate_family",
    "write_container",
    "__version__",
]
