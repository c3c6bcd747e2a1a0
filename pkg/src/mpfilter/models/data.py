"""data.py: Synthetic series, CSV ingestion and the SV returns transform."""

from __future__ import annotations

import csv
import hashlib
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Literal, Sequence

import numpy as np

from mpfilter.models.base import StateSpaceModel

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Errors
# ---------------------------------------------------------------------------


class SeriesError(ValueError):
    """Base class for observation-series errors."""


class EmptySeriesError(SeriesError):
    pass


class SeriesParseError(SeriesError):
    def __init__(self, row: int, value: str, path: str | Path | None = None):
        self.row = row
        self.value = value
        where = f" in {path}" if path else ""
        super().__init__(f"row {row}{where}: cannot parse {value!r} as a number")


class NonPositivePriceError(ValueError):
    def __init__(self, index: int, price: float):
        self.index = index
        super().__init__(f"price at position {index} is not positive: {price}")


# ---------------------------------------------------------------------------
# Series container
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ObservationSeries:
    """y_{1:T}, optionally with the true states x_{1:T}.

    Row ``t - 1`` of each array holds timestep ``t``.
    """

    observations: np.ndarray  # (T, dy)
    ground_truth: np.ndarray | None = None  # (T, d)

    def __post_init__(self) -> None:
        obs = np.asarray(self.observations, dtype=float)
        if obs.ndim == 1:
            obs = obs[:, None]
        if obs.shape[0] < 1:
            raise EmptySeriesError("observation series is empty")
        object.__setattr__(self, "observations", obs)
        if self.ground_truth is not None:
            truth = np.asarray(self.ground_truth, dtype=float)
            if truth.ndim == 1:
                truth = truth[:, None]
            if truth.shape[0] != obs.shape[0]:
                raise SeriesError(
                    f"ground truth has {truth.shape[0]} rows, observations {obs.shape[0]}"
                )
            object.__setattr__(self, "ground_truth", truth)

    @property
    def t_max(self) -> int:
        return int(self.observations.shape[0])

    @property
    def has_truth(self) -> bool:
        return self.ground_truth is not None

    def observation(self, t: int) -> np.ndarray:
        """y_t for 1-based ``t``."""
        return self.observations[t - 1]

    def content_hash(self) -> str:
        """Stable hash of the data, used to check that compared runs share a series."""
        h = hashlib.md5(np.ascontiguousarray(self.observations).tobytes())
        if self.ground_truth is not None:
            h.update(np.ascontiguousarray(self.ground_truth).tobytes())
        return h.hexdigest()


# ---------------------------------------------------------------------------
# Synthetic data
# ---------------------------------------------------------------------------

DATA_STREAM = 0
FILTER_STREAM = 1


def stream_rng(seed: int, stream: int) -> np.random.Generator:
    """Generator for one named stream of ``seed``; streams never share draws."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(stream,)))


def generate_synthetic(model: StateSpaceModel, t_max: int, seed: int) -> ObservationSeries:
    """Simulate x_{1:T} from the model's chain and y_t ~ p(y_t | x_t)."""
    if t_max < 1:
        raise ValueError(f"t_max must be >= 1, got {t_max}")
    rng = stream_rng(seed, DATA_STREAM)
    states = np.empty((t_max, model.state_dim))
    obs = np.empty((t_max, model.obs_dim))

    x = model.sample_initial(rng, 1)
    for t in range(1, t_max + 1):
        if t > 1:
            x = model.sample_transition(rng, x, t)
        states[t - 1] = x[0]
        obs[t - 1] = model.sample_observation(rng, x, t)[0]

    logger.debug("[Data] generated %d steps from %r (seed=%d)", t_max, model, seed)
    return ObservationSeries(observations=obs, ground_truth=states)


# ---------------------------------------------------------------------------
# CSV ingestion
# ---------------------------------------------------------------------------


def _is_number(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


def load_series(path: str | Path, format: Literal["csv"] = "csv") -> ObservationSeries:
    """Read one observation per row; a non-numeric first row is a header.

    Row numbers in errors are 1-based file rows, header included.
    """
    if format != "csv":
        raise SeriesError(f"unsupported series format: {format!r}")
    path = Path(path)
    rows: list[list[float]] = []
    with path.open(newline="", encoding="utf-8-sig") as f:
        for row_num, raw in enumerate(csv.reader(f), start=1):
            fields = [cell.strip() for cell in raw]
            if not fields or all(cell == "" for cell in fields):
                continue
            if row_num == 1 and not all(_is_number(cell) for cell in fields):
                logger.debug("[Data] %s: treating row 1 as header %s", path, fields)
                continue
            values = []
            for cell in fields:
                try:
                    values.append(float(cell))
                except ValueError:
                    raise SeriesParseError(row_num, cell, path) from None
            if rows and len(values) != len(rows[0]):
                raise SeriesParseError(row_num, ",".join(fields), path)
            rows.append(values)

    if not rows:
        raise EmptySeriesError(f"no observations in {path}")
    logger.info("[Data] loaded %d observations from %s", len(rows), path)
    return ObservationSeries(observations=np.array(rows))


def sv_returns_transform(prices: Sequence[float]) -> np.ndarray:
    """Mean-corrected percentage log returns: 100 (log p_t - log p_{t-1}) - mean."""
    p = np.asarray(prices, dtype=float).reshape(-1)
    if p.size < 2:
        raise ValueError("need at least two prices")
    bad = np.flatnonzero(~(p > 0))
    if bad.size:
        raise NonPositivePriceError(int(bad[0]), float(p[bad[0]]))
    returns = 100.0 * np.diff(np.log(p))
    return returns - returns.mean()
