"""Experiment configuration: YAML parsing, validation, object construction.

A configuration file has five sections (``geometry``, ``physics``,
``discretization``, ``rom``, ``run``); unknown keys anywhere are errors
so that a benchmark run is fully described by its config file.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .geometry import (
    ArcFamily,
    GlobalGeometry,
    SegmentMeta,
    grid_segments,
    ring_segments,
    trig_basis,
)
from .kernel import ElasticParams

__all__ = ["ConfigError", "ExperimentConfig", "load_config", "parse_config"]


class ConfigError(ValueError):
    """Invalid experiment configuration (bad key, type, or value)."""


_SCHEMA = {
    "geometry": {
        "box_half_width", "r_min", "r_max", "d_min", "d_max", "s",
        "perturbation", "segments", "layout", "grid_side",
    },
    "physics": {"omega", "lambda", "mu", "theta0"},
    "discretization": {"n", "n_c"},
    "rom": {
        "eps_svd", "eps_eim", "n_geo_samples", "n_candidates_cross",
        "n_candidates_self", "q_max", "snapshot_seed", "candidate_seed",
    },
    "run": {"out", "threads"},
}
_PERTURBATION_KEYS = {"family", "n_modes", "decay_exponent", "amplitude"}
_SEGMENT_KEYS = {"center", "half_length", "orientation"}


@dataclass
class RomSettings:
    eps_svd: float = 1e-6
    eps_eim: float = 1e-3
    n_geo_samples: int = 200
    n_candidates_cross: int = 2000
    n_candidates_self: int = 500
    q_max: int = 400
    snapshot_seed: int = 0
    candidate_seed: int = 1000


@dataclass
class ExperimentConfig:
    """Validated experiment description with constructed domain objects."""

    family: ArcFamily
    segments: list
    params: ElasticParams
    theta0: float
    n: int
    n_c: int  # 0 = derive from n
    rom: RomSettings
    out_dir: Path
    threads: int
    layout: str = "explicit"
    grid_side: int = 0
    raw: dict = field(default_factory=dict)


def _require(section: dict, key: str, path: str):
    if key not in section:
        raise ConfigError(f"missing required key {path}.{key}")
    return section[key]


def _check_keys(section: dict, allowed: set, path: str):
    for key in section:
        if key not in allowed:
            raise ConfigError(f"unknown key {path}.{key}")


def _as_number(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path} must be a number, got {value!r}")
    return float(value)


def _as_int(value, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{path} must be an integer, got {value!r}")
    return value


def _tolerance(value, path: str) -> float:
    x = _as_number(value, path)
    if not (0.0 < x < 1.0):
        raise ConfigError(f"{path} must lie in (0, 1), got {x}")
    return x


def _build_geometry(section: dict) -> tuple[ArcFamily, list, str, int]:
    _check_keys(section, _SCHEMA["geometry"], "geometry")
    try:
        geom = GlobalGeometry(
            box_half_width=_as_number(_require(section, "box_half_width", "geometry"),
                                      "geometry.box_half_width"),
            r_min=_as_number(_require(section, "r_min", "geometry"), "geometry.r_min"),
            r_max=_as_number(_require(section, "r_max", "geometry"), "geometry.r_max"),
            d_min=_as_number(_require(section, "d_min", "geometry"), "geometry.d_min"),
            d_max=_as_number(_require(section, "d_max", "geometry"), "geometry.d_max"),
            s=_as_int(_require(section, "s", "geometry"), "geometry.s"),
        )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"geometry: {exc}") from exc
    pert = section.get("perturbation", {"family": "trig"})
    if not isinstance(pert, dict):
        raise ConfigError("geometry.perturbation must be a mapping")
    _check_keys(pert, _PERTURBATION_KEYS, "geometry.perturbation")
    family_name = pert.get("family", "trig")
    if family_name != "trig":
        raise ConfigError(
            f"unknown perturbation family {family_name!r} (available: trig)"
        )
    basis = trig_basis(
        n_modes=_as_int(pert.get("n_modes", 3), "geometry.perturbation.n_modes"),
        decay_exponent=_as_number(pert.get("decay_exponent", 2.5),
                                  "geometry.perturbation.decay_exponent"),
        amplitude=_as_number(pert.get("amplitude", 1.0),
                             "geometry.perturbation.amplitude"),
    )
    family = ArcFamily(geom, basis)

    layout = section.get("layout")
    segments_spec = section.get("segments")
    grid_side = _as_int(section.get("grid_side", 0), "geometry.grid_side")
    if (layout is None) == (segments_spec is None):
        raise ConfigError(
            "geometry needs exactly one of 'layout' or an explicit 'segments' list"
        )
    if layout is not None:
        if layout == "rings":
            segments = ring_segments(geom)
        elif layout == "grid":
            if grid_side < 2:
                raise ConfigError("geometry.grid_side must be >= 2 for layout grid")
            segments = grid_segments(geom, grid_side)
        else:
            raise ConfigError(f"unknown layout {layout!r} (available: rings, grid)")
        return family, segments, layout, grid_side
    if not isinstance(segments_spec, list) or not segments_spec:
        raise ConfigError("geometry.segments must be a non-empty list")
    segments = []
    for i, item in enumerate(segments_spec):
        path = f"geometry.segments[{i}]"
        if not isinstance(item, dict):
            raise ConfigError(f"{path} must be a mapping")
        _check_keys(item, _SEGMENT_KEYS, path)
        center = _require(item, "center", path)
        if (not isinstance(center, list) or len(center) != 2):
            raise ConfigError(f"{path}.center must be a [x, y] pair")
        try:
            segments.append(SegmentMeta(
                center=np.array([_as_number(c, f"{path}.center") for c in center]),
                half_length=_as_number(_require(item, "half_length", path),
                                       f"{path}.half_length"),
                orientation=_as_number(_require(item, "orientation", path),
                                       f"{path}.orientation"),
            ))
        except ValueError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    return family, segments, "explicit", 0


def parse_config(data: dict, base_dir: Path | None = None) -> ExperimentConfig:
    """Validate a parsed YAML mapping and construct the domain objects."""
    if not isinstance(data, dict):
        raise ConfigError("config root must be a mapping")
    _check_keys(data, set(_SCHEMA), "(root)")
    for name in ("geometry", "physics", "discretization"):
        if name not in data:
            raise ConfigError(f"missing required section {name!r}")
        if not isinstance(data[name], dict):
            raise ConfigError(f"section {name!r} must be a mapping")

    family, segments, layout, grid_side = _build_geometry(data["geometry"])

    phys = data["physics"]
    _check_keys(phys, _SCHEMA["physics"], "physics")
    try:
        params = ElasticParams(
            omega=_as_number(_require(phys, "omega", "physics"), "physics.omega"),
            lame_lambda=_as_number(_require(phys, "lambda", "physics"),
                                   "physics.lambda"),
            lame_mu=_as_number(_require(phys, "mu", "physics"), "physics.mu"),
        )
    except ValueError as exc:
        raise ConfigError(f"physics: {exc}") from exc
    theta0 = _as_number(phys.get("theta0", 0.0), "physics.theta0")

    disc = data["discretization"]
    _check_keys(disc, _SCHEMA["discretization"], "discretization")
    n = _as_int(_require(disc, "n", "discretization"), "discretization.n")
    if n < 4:
        raise ConfigError(f"discretization.n must be >= 4, got {n}")
    n_c = _as_int(disc.get("n_c", 0), "discretization.n_c")
    if n_c and n_c < n + 1:
        raise ConfigError("discretization.n_c must be 0 (auto) or >= n + 1")

    rom_section = data.get("rom", {})
    if not isinstance(rom_section, dict):
        raise ConfigError("section 'rom' must be a mapping")
    _check_keys(rom_section, _SCHEMA["rom"], "rom")
    rom = RomSettings()
    if "eps_svd" in rom_section:
        rom.eps_svd = _tolerance(rom_section["eps_svd"], "rom.eps_svd")
    if "eps_eim" in rom_section:
        rom.eps_eim = _tolerance(rom_section["eps_eim"], "rom.eps_eim")
    for key in ("n_geo_samples", "n_candidates_cross", "n_candidates_self",
                "q_max", "snapshot_seed", "candidate_seed"):
        if key in rom_section:
            value = _as_int(rom_section[key], f"rom.{key}")
            if key not in ("snapshot_seed", "candidate_seed") and value < 1:
                raise ConfigError(f"rom.{key} must be >= 1")
            setattr(rom, key, value)

    run_section = data.get("run", {})
    if not isinstance(run_section, dict):
        raise ConfigError("section 'run' must be a mapping")
    _check_keys(run_section, _SCHEMA["run"], "run")
    out = Path(run_section.get("out", "out"))
    if base_dir is not None and not out.is_absolute():
        out = base_dir / out
    threads = _as_int(run_section.get("threads", 1), "run.threads")
    if threads < 1:
        raise ConfigError("run.threads must be >= 1")

    return ExperimentConfig(
        family=family, segments=segments, params=params, theta0=theta0,
        n=n, n_c=n_c, rom=rom, out_dir=out, threads=threads,
        layout=layout, grid_side=grid_side, raw=data,
    )


def load_config(path) -> ExperimentConfig:
    """Load and validate an experiment configuration file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML in {path}: {exc}") from exc
    return parse_config(data, base_dir=path.parent)
