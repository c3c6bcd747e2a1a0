"""State-space models, benchmark models, and observation series I/O."""

from mpfilter.models.base import GaussianForm, StateSpaceModel, gaussian_logpdf
from mpfilter.models.data import (
    EmptySeriesError,
    NonPositivePriceError,
    ObservationSeries,
    SeriesError,
    SeriesParseError,
    generate_synthetic,
    load_series,
    stream_rng,
    sv_returns_transform,
)
from mpfilter.models.linear_gaussian import LinearGaussianModel
from mpfilter.models.stochvol import StochVolModel
from mpfilter.models.ungm import UngmModel

__all__ = [
    "EmptySeriesError",
    "GaussianForm",
    "LinearGaussianModel",
    "NonPositivePriceError",
    "ObservationSeries",
    "SeriesError",
    "SeriesParseError",
    "StateSpaceModel",
    "StochVolModel",
    "UngmModel",
    "gaussian_logpdf",
    "generate_synthetic",
    "load_series",
    "stream_rng",
    "sv_returns_transform",
]
