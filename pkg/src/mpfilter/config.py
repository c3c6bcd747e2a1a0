"""config.py: Experiment config schema, load/patch, override merging."""

from __future__ import annotations

import json
import logging
import math
from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, ValidationError, field_validator, model_validator

logger = logging.getLogger(__name__)

# ---------------------------------------------------------------------------
# Defaults
# ---------------------------------------------------------------------------

DEFAULT_N_PARTICLES = 500
DEFAULT_RESAMPLE_THRESHOLD = 1.0
DEFAULT_EPSILON = 1e-3
DEFAULT_LEAF_SIZE = 16
DEFAULT_PROPOSAL_SCALE = 2.0
DEFAULT_T_MAX = 100
DEFAULT_OUTPUT_DIR = "runs"
DEFAULT_BENCH_PARTICLES = [500, 1500, 5000]
DEFAULT_BENCH_EPSILONS = [1e-3]

Algorithm = Literal["sir", "asir", "mpf", "ampf"]
Resampler = Literal["multinomial", "stratified"]
KernelBackend = Literal["naive", "dualtree", "fgt"]
ALGORITHMS: tuple[str, ...] = ("sir", "asir", "mpf", "ampf")


class ConfigError(ValueError):
    """Invalid configuration; ``fields`` names the offending keys."""

    def __init__(self, message: str, fields: list[str] | None = None):
        self.fields = fields or []
        super().__init__(message)

    @classmethod
    def from_validation(cls, exc: ValidationError) -> "ConfigError":
        fields = [".".join(str(p) for p in err["loc"]) for err in exc.errors()]
        details = "; ".join(
            f"{'.'.join(str(p) for p in err['loc']) or '<root>'}: {err['msg']}"
            for err in exc.errors()
        )
        return cls(f"invalid config: {details}", fields)


# ---------------------------------------------------------------------------
# Pydantic models
# ---------------------------------------------------------------------------


class UngmParams(BaseModel):
    sigma_x: float = math.sqrt(10.0)
    sigma_y: float = 1.0
    initial_mean: float = 0.0
    initial_std: float | None = None  # None -> sigma_x

    @field_validator("sigma_x", "sigma_y")
    @classmethod
    def validate_sigma(cls, v: float) -> float:
        if v < 0:
            raise ValueError("must be non-negative")
        return v


class StochVolParams(BaseModel):
    phi: float = 0.9731
    sigma_eta: float = 0.1726
    beta: float = 0.6338

    @field_validator("phi")
    @classmethod
    def validate_phi(cls, v: float) -> float:
        if not abs(v) < 1:
            raise ValueError("|phi| must be < 1")
        return v

    @field_validator("sigma_eta", "beta")
    @classmethod
    def validate_positive(cls, v: float) -> float:
        if v <= 0:
            raise ValueError("must be positive")
        return v


class LinearGaussianParams(BaseModel):
    a: float = 0.9
    q: float = 1.0
    c: float = 1.0
    r: float = 0.5


class ModelConfig(BaseModel):
    """Which model to filter and with which proposal.

    proposal: "prior" is the transition prior; "heavy" inflates its standard
    deviation by ``proposal_scale``; "optimal" needs a closed-form model.
    """

    name: Literal["ungm", "stochvol", "linear_gaussian"] = "ungm"
    ungm: UngmParams = UngmParams()
    stochvol: StochVolParams = StochVolParams()
    linear_gaussian: LinearGaussianParams = LinearGaussianParams()
    proposal: Literal["prior", "heavy", "optimal"] = "heavy"
    proposal_scale: float = DEFAULT_PROPOSAL_SCALE

    @field_validator("proposal_scale")
    @classmethod
    def validate_scale(cls, v: float) -> float:
        if v <= 0:
            raise ValueError("must be positive")
        return v


class DataConfig(BaseModel):
    source: Literal["synthetic", "file"] = "synthetic"
    t_max: int = DEFAULT_T_MAX
    seed: int = 0
    path: str | None = None
    transform: Literal["none", "sv_returns"] = "none"
    limit: int | None = None  # keep only the first ``limit`` observations

    @field_validator("t_max")
    @classmethod
    def validate_t_max(cls, v: int) -> int:
        if v < 1:
            raise ValueError("must be >= 1")
        return v

    @model_validator(mode="after")
    def check_path(self) -> "DataConfig":
        if self.source == "file" and not self.path:
            raise ValueError("data.path is required when data.source is 'file'")
        return self


class FilterConfig(BaseModel):
    n_particles: int = DEFAULT_N_PARTICLES
    algorithm: Algorithm = "sir"
    resampler: Resampler = "stratified"
    resample_threshold: float = DEFAULT_RESAMPLE_THRESHOLD  # ESS/N; 1.0 = every step
    kernel_backend: KernelBackend = "naive"
    epsilon: float = DEFAULT_EPSILON
    leaf_size: int = DEFAULT_LEAF_SIZE
    seed: int = 0

    @field_validator("n_particles", "leaf_size")
    @classmethod
    def validate_count(cls, v: int) -> int:
        if v < 1:
            raise ValueError("must be >= 1")
        return v

    @field_validator("resample_threshold")
    @classmethod
    def validate_threshold(cls, v: float) -> float:
        if not 0.0 <= v <= 1.0:
            raise ValueError("must be in [0, 1]")
        return v

    @field_validator("epsilon")
    @classmethod
    def validate_epsilon(cls, v: float) -> float:
        if not v > 0:
            raise ValueError("must be > 0")
        return v


class ExperimentConfig(BaseModel):
    """Config for ``mpfilter run``. ``filter.algorithm`` is ignored in favour
    of ``algorithms``; each run r uses filter seed ``filter.seed + r``.
    """

    model: ModelConfig = ModelConfig()
    data: DataConfig = DataConfig()
    algorithms: list[Algorithm] = ["sir", "mpf"]
    filter: FilterConfig = FilterConfig()
    n_seeds: int = 1
    output_dir: str = DEFAULT_OUTPUT_DIR
    workers: int = 1

    @field_validator("algorithms")
    @classmethod
    def validate_algorithms(cls, v: list[str]) -> list[str]:
        if not v:
            raise ValueError("at least one algorithm is required")
        return list(dict.fromkeys(v))

    @field_validator("n_seeds", "workers")
    @classmethod
    def validate_positive(cls, v: int) -> int:
        if v < 1:
            raise ValueError("must be >= 1")
        return v


class BenchConfig(BaseModel):
    """Config for ``mpfilter bench``: MPF over every (N, epsilon, backend)."""

    model: ModelConfig = ModelConfig()
    data: DataConfig = DataConfig()
    n_particles: list[int] = DEFAULT_BENCH_PARTICLES
    epsilons: list[float] = DEFAULT_BENCH_EPSILONS
    backends: list[KernelBackend] = ["naive", "fgt"]
    filter: FilterConfig = FilterConfig(algorithm="mpf")
    n_seeds: int = 3
    output_dir: str = DEFAULT_OUTPUT_DIR

    @field_validator("n_particles", "epsilons", "backends")
    @classmethod
    def validate_nonempty(cls, v: list) -> list:
        if not v:
            raise ValueError("must not be empty")
        return v

    @field_validator("n_seeds")
    @classmethod
    def validate_seeds(cls, v: int) -> int:
        if v < 1:
            raise ValueError("must be >= 1")
        return v


# ---------------------------------------------------------------------------
# Load / patch
# ---------------------------------------------------------------------------


def _deep_merge(base: dict, patch: dict) -> dict:
    """RFC 7386-style merge patch: recursively merge dicts, null deletes keys."""
    result = dict(base)
    for key, value in patch.items():
        if value is None:
            result.pop(key, None)
        elif isinstance(value, dict) and isinstance(result.get(key), dict):
            result[key] = _deep_merge(result[key], value)
        else:
            result[key] = value
    return result


def validate_config(data: dict[str, Any], schema: type[BaseModel] = ExperimentConfig) -> Any:
    try:
        return schema.model_validate(data)
    except ValidationError as e:
        raise ConfigError.from_validation(e) from e


def load_config(path: str | Path | None, schema: type[BaseModel] = ExperimentConfig) -> Any:
    """Read a JSON config file; a missing path gives the schema defaults."""
    if path is None:
        return schema()
    path = Path(path)
    try:
        raw = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    try:
        data = json.loads(raw) if raw.strip() else {}
    except json.JSONDecodeError as e:
        raise ConfigError(f"config {path} is not valid JSON: {e}") from e
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must be a JSON object")
    config = validate_config(data, schema)
    logger.info("[Config] loaded %s from %s", schema.__name__, path)
    return config


def patch_config(config: BaseModel, patch: dict[str, Any]) -> Any:
    """Merge ``patch`` into ``config`` and re-validate."""
    if not patch:
        return config
    merged = _deep_merge(config.model_dump(exclude_none=True), patch)
    return validate_config(merged, type(config))
