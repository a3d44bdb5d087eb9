"""Time-series forecasting with reservoir motifs (Lin-RMM) and linear reservoir baselines."""

__version__ = "0.1.0"

from .forecaster import ForecastModel, fit, lrc_extractor, rmm_extractor  # noqa: E402
from .motifs import MotifBasis, extract_motifs  # noqa: E402
from .reservoir import ReservoirSpec, build_reservoir, metric_tensor, operator_A, reservoir_states  # noqa: E402

__all__ = ["ForecastModel", "MotifBasis", "ReservoirSpec", "build_reservoir", "extract_motifs", "fit",
           "lrc_extractor", "metric_tensor", "operator_A", "reservoir_states", "rmm_extractor"]
