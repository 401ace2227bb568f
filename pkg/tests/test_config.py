"""Experiment configuration parsing and validation."""

import numpy as np
import pytest

from arcrom.config import ConfigError, load_config, parse_config


def _base(**overrides):
    data = {
        "geometry": {
            "box_half_width": 10.0, "r_min": 0.56, "r_max": 0.93,
            "d_min": 5.0, "d_max": 21.0, "s": 12, "layout": "rings",
        },
        "physics": {"omega": 10.0, "lambda": 2.0, "mu": 1.0, "theta0": 0.0},
        "discretization": {"n": 16},
    }
    data.update(overrides)
    return data


def test_minimal_config_builds_objects():
    cfg = parse_config(_base())
    assert cfg.family.geom.s == 12
    assert len(cfg.segments) == 16
    assert cfg.params.kp == pytest.approx(5.0)
    assert cfg.n == 16 and cfg.n_c == 0
    assert cfg.rom.eps_svd == 1e-6  # defaults applied


def test_grid_layout():
    geo = _base()["geometry"]
    geo.update({"layout": "grid", "grid_side": 3, "d_max": 15.0})
    cfg = parse_config(_base(geometry=geo))
    assert len(cfg.segments) == 9


def test_explicit_segments():
    geo = _base()["geometry"]
    del geo["layout"]
    geo["segments"] = [
        {"center": [0.0, 0.0], "half_length": 0.7, "orientation": 1.0},
        {"center": [6.0, 0.0], "half_length": 0.8, "orientation": 2.0},
    ]
    cfg = parse_config(_base(geometry=geo))
    assert len(cfg.segments) == 2
    assert np.allclose(cfg.segments[1].center, [6.0, 0.0])


@pytest.mark.parametrize("mutate,match", [
    (lambda d: d["geometry"].update(bogus=1), "geometry.bogus"),
    (lambda d: d.update(extra_section={}), "extra_section"),
    (lambda d: d["physics"].pop("omega"), "physics.omega"),
    (lambda d: d["discretization"].update(n=2), "n must be >= 4"),
    (lambda d: d["discretization"].update(n="ten"), "integer"),
    (lambda d: d.update(rom={"eps_svd": 2.0}), r"\(0, 1\)"),
    (lambda d: d.update(rom={"eps_eim": 0.0}), r"\(0, 1\)"),
    (lambda d: d["geometry"].update(layout="spiral"), "unknown layout"),
    (lambda d: d["geometry"].pop("layout"), "segments"),
    (lambda d: d["geometry"].update(r_min=-1.0), "r_min"),
    (lambda d: d.update(run={"threads": 0}), "threads"),
])
def test_invalid_configs_fail_with_key_path(mutate, match):
    data = _base()
    mutate(data)
    with pytest.raises(ConfigError, match=match):
        parse_config(data)


def test_unknown_perturbation_family():
    geo = _base()["geometry"]
    geo["perturbation"] = {"family": "wavelet"}
    with pytest.raises(ConfigError, match="perturbation family"):
        parse_config(_base(geometry=geo))


def test_layout_and_segments_are_exclusive():
    geo = _base()["geometry"]
    geo["segments"] = [
        {"center": [0.0, 0.0], "half_length": 0.7, "orientation": 1.0}]
    with pytest.raises(ConfigError, match="exactly one"):
        parse_config(_base(geometry=geo))


def test_load_config_resolves_out_relative_to_file(tmp_path):
    text = """
geometry:
  box_half_width: 10
  r_min: 0.56
  r_max: 0.93
  d_min: 5
  d_max: 21
  s: 12
  layout: rings
physics:
  omega: 10
  lambda: 2
  mu: 1
discretization:
  n: 16
run:
  out: results
"""
    path = tmp_path / "exp.yaml"
    path.write_text(text)
    cfg = load_config(path)
    assert cfg.out_dir == tmp_path / "results"


def test_load_config_rejects_bad_yaml(tmp_path):
    path = tmp_path / "broken.yaml"
    path.write_text("geometry: [unclosed")
    with pytest.raises(ConfigError, match="YAML"):
        load_config(path)


def test_load_config_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "nope.yaml")
