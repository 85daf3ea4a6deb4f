"""Spectral-power scoring, ranking and filtering of robot demonstrations."""

__version__ = "0.1.0"

from .models import (  # noqa: E402
    CurationManifest,
    Dataset,
    ScoreRow,
    ScoreTable,
    Trajectory,
    ValidationError,
)
from .spectral import SpectralConfig, SpectralResult, Spectrum, dft, dft_direct, score_dataset, score_trajectory  # noqa: E402
from .kinematics import mean_jerk, path_length  # noqa: E402
from .curation import filter_table, materialize, rank  # noqa: E402

__all__ = [
    "CurationManifest",
    "Dataset",
    "ScoreRow",
    "ScoreTable",
    "SpectralConfig",
    "SpectralResult",
    "Spectrum",
    "Trajectory",
    "ValidationError",
    "dft",
    "dft_direct",
    "filter_table",
    "materialize",
    "mean_jerk",
    "path_length",
    "rank",
    "score_dataset",
    "score_trajectory",
]
