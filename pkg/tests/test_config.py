"""Tests for config schema validation, loading and override merging."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from mpfilter.config import (
    DEFAULT_N_PARTICLES,
    BenchConfig,
    ConfigError,
    DataConfig,
    ExperimentConfig,
    FilterConfig,
    _deep_merge,
    load_config,
    patch_config,
    validate_config,
)

REPO_ROOT = Path(__file__).resolve().parents[1]


def test_defaults():
    cfg = ExperimentConfig()
    assert cfg.filter.n_particles == DEFAULT_N_PARTICLES
    assert cfg.filter.resample_threshold == 1.0
    assert cfg.filter.kernel_backend == "naive"
    assert cfg.model.proposal == "heavy"
    assert cfg.algorithms == ["sir", "mpf"]
    assert BenchConfig().filter.algorithm == "mpf"


def test_shipped_default_config_is_valid():
    cfg = load_config(REPO_ROOT / "config.default.json")
    assert cfg.n_seeds == 50
    assert cfg.model.ungm.sigma_x == pytest.approx(10**0.5)


@pytest.mark.parametrize(
    "data, field",
    [
        ({"filter": {"n_particles": 0}}, "filter.n_particles"),
        ({"filter": {"epsilon": 0}}, "filter.epsilon"),
        ({"filter": {"resample_threshold": 1.5}}, "filter.resample_threshold"),
        ({"filter": {"kernel_backend": "octree"}}, "filter.kernel_backend"),
        ({"algorithms": []}, "algorithms"),
        ({"algorithms": ["pf"]}, "algorithms.0"),
        ({"model": {"stochvol": {"phi": 1.0}}}, "model.stochvol.phi"),
        ({"model": {"proposal_scale": -1}}, "model.proposal_scale"),
        ({"data": {"t_max": 0}}, "data.t_max"),
        ({"n_seeds": 0}, "n_seeds"),
    ],
)
def test_validation_errors_name_the_field(data, field):
    with pytest.raises(ConfigError) as info:
        validate_config(data)
    assert field in info.value.fields
    assert field in str(info.value)


def test_file_source_requires_path():
    with pytest.raises(ValueError, match="data.path"):
        DataConfig(source="file")
    assert DataConfig(source="file", path="prices.csv").path == "prices.csv"


def test_duplicate_algorithms_are_collapsed():
    assert ExperimentConfig(algorithms=["mpf", "sir", "mpf"]).algorithms == ["mpf", "sir"]


def test_bench_lists_must_not_be_empty():
    with pytest.raises(ConfigError) as info:
        validate_config({"epsilons": []}, BenchConfig)
    assert "epsilons" in info.value.fields


def test_deep_merge_recurses_and_deletes():
    base = {"a": 1, "b": {"c": 2, "d": 3}, "e": 4}
    merged = _deep_merge(base, {"b": {"c": 20, "d": None}, "e": None, "f": 5})
    assert merged == {"a": 1, "b": {"c": 20}, "f": 5}
    assert base["b"] == {"c": 2, "d": 3}


def test_patch_config_keeps_untouched_fields():
    cfg = ExperimentConfig(filter=FilterConfig(n_particles=50, epsilon=1e-4))
    patched = patch_config(cfg, {"filter": {"kernel_backend": "fgt"}, "n_seeds": 3})
    assert patched.filter.kernel_backend == "fgt"
    assert patched.filter.n_particles == 50
    assert patched.filter.epsilon == 1e-4
    assert patched.n_seeds == 3
    assert patch_config(cfg, {}) is cfg


def test_patch_config_revalidates():
    with pytest.raises(ConfigError):
        patch_config(ExperimentConfig(), {"filter": {"n_particles": -5}})


def test_load_config_missing_path_gives_defaults():
    assert load_config(None) == ExperimentConfig()
    assert load_config(None, BenchConfig) == BenchConfig()


def test_load_config_from_file(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"model": {"name": "stochvol"}, "filter": {"n_particles": 64}}))
    cfg = load_config(path)
    assert cfg.model.name == "stochvol"
    assert cfg.filter.n_particles == 64
    assert cfg.filter.resampler == "stratified"


def test_load_config_empty_file_gives_defaults(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text("  \n")
    assert load_config(path) == ExperimentConfig()


@pytest.mark.parametrize("text, message", [("{not json", "not valid JSON"), ("[1, 2]", "object")])
def test_load_config_rejects_bad_files(tmp_path, text, message):
    path = tmp_path / "cfg.json"
    path.write_text(text)
    with pytest.raises(ConfigError, match=message):
        load_config(path)


def test_load_config_unreadable(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "missing.json")
