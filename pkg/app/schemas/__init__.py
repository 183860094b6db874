"""
Pydantic schemas shared by the CLI and the API.
"""
from app.schemas.experiments import (
    CouplingReport,
    DeviationStatistics,
    ExperimentConfig,
    MinProbabilityReport,
    SlopeEstimate,
    StationarityReport,
)

__all__ = [
    "CouplingReport",
    "DeviationStatistics",
    "ExperimentConfig",
    "MinProbabilityReport",
    "SlopeEstimate",
    "StationarityReport",
]
