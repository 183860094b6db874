"""
Experiment Schemas.

Pydantic models shared by the CLI and the API: the experiment configuration
(built from flags, a ``key=value`` file or a request body) and the reports
the experiment drivers return.
"""
from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, Field, field_validator, model_validator
from typing_extensions import Self

from app.core.config import settings
from app.core.errors import ConfigFormatError

ExperimentName = Literal[
    "sample",
    "concentration",
    "stationarity",
    "coupling",
    "minprob-test",
    "slope",
    "limit-shape",
]


class ExperimentConfig(BaseModel):
    """Parameters of one experiment run. The seed has no default."""

    experiment: ExperimentName = Field(description="Which driver to run")
    seed: int = Field(ge=0, description="Root seed; per-trial streams derive from it")
    m: int = Field(default=2, ge=1, le=3, description="Lattice dimension")
    n: int = Field(default=4, ge=2, description="Period (or region size for limit shapes)")
    n_values: list[int] | None = Field(default=None, description="Periods swept by concentration runs")
    d: int = Field(default=3, ge=2, description="Tree degree")
    slope: str = Field(default="0", description="Slope as comma-separated fractions, e.g. 1/2,0")
    steps: int = Field(default=1000, ge=0, description="Chain steps after burn-in")
    trials: int = Field(default=1, ge=1, description="Independent trials")
    burn_in: int | None = Field(default=None, ge=0, description="Burn-in steps (default factor * n^m)")
    dynamics: Literal["adapted", "glauber"] = Field(default="adapted")
    thresholds: list[float] = Field(
        default=[0.125, 0.25, 0.5], description="eps values of the tail table P(max >= eps * n)"
    )
    delta: float | None = Field(default=None, gt=0, description="Deviation tolerance")
    eps: float | None = Field(default=None, gt=0, le=1, description="Profile grid spacing")
    initial: Literal["identical", "raised"] = Field(
        default="raised", description="Coupling start: equal states or one raised minimum"
    )
    region: Literal["box", "diamond"] = Field(default="box")
    boundary: Literal["flat", "three-geodesic"] = Field(default="flat")
    site: list[int] | None = Field(default=None, description="Torus cell for minimum-probability tests")
    workers: int = Field(default=1, ge=1, description="Worker processes for independent trials")
    output: Path | None = Field(default=None, description="Primary output file (stdout when absent)")
    png: Path | None = Field(default=None, description="Optional PNG raster")

    model_config = {
        "json_schema_extra": {
            "examples": [
                {
                    "experiment": "concentration",
                    "seed": 7,
                    "m": 2,
                    "n_values": [8, 16],
                    "d": 3,
                    "slope": "1/2,0",
                    "steps": 2000,
                    "trials": 20,
                }
            ]
        }
    }

    @field_validator("n_values", "thresholds", "site", mode="before")
    @classmethod
    def _split_lists(cls, v: Any) -> Any:
        if isinstance(v, str):
            return [part.strip() for part in v.split(",") if part.strip()]
        return v

    @model_validator(mode="after")
    def _check_sizes(self) -> Self:
        if self.site is not None and len(self.site) != self.m:
            raise ValueError(f"site needs {self.m} coordinates")
        self.thresholds = sorted(self.thresholds)
        return self

    @property
    def periods(self) -> list[int]:
        return self.n_values or [self.n]

    def burn_in_for(self, n: int) -> int:
        if self.burn_in is not None:
            return self.burn_in
        return settings.BURN_IN_FACTOR * n**self.m

    def header(self) -> list[str]:
        """``# key=value`` lines echoing every parameter."""
        lines = []
        for key, value in self.model_dump(mode="json").items():
            if isinstance(value, list):
                value = ",".join(str(v) for v in value)
            lines.append(f"# {key}={'' if value is None else value}")
        return lines

    @classmethod
    def from_file(cls, text: str, overrides: dict[str, Any]) -> "ExperimentConfig":
        """
        Read ``key=value`` lines; non-None ``overrides`` win over file values.

        Raises:
            ConfigFormatError: On a line without ``=``
        """
        values: dict[str, Any] = {}
        for raw in text.splitlines():
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ConfigFormatError(f"expected key=value, got {line!r}")
            values[key.strip().replace("-", "_")] = value.strip()
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls.model_validate(values)


class DeviationStatistics(BaseModel):
    """Per-trial maximal deviations from the slope geodesic at one period."""

    n: int
    trials: int
    maxima: list[int] = Field(description="max_x d(h(x), g(floor(s.x))) per trial")
    thresholds: list[float]
    tails: list[float] = Field(description="P(max >= eps * n) per threshold")
    scaled_tail: float = Field(description="P(max >= 0.5 * n^0.8)")


class StationarityReport(BaseModel):
    states: int = Field(description="Size of the communicating class of the start")
    steps: int
    total_variation: float
    chi_square: float
    p_value: float
    kernel_residual: float = Field(description="max |uP - u| for the uniform row vector u")


class CouplingReport(BaseModel):
    steps: int
    initial_deviation: int
    max_deviation: int
    final_deviation: int


class SlopeEstimate(BaseModel):
    target: list[float]
    estimate: list[float]
    samples: int


class MinProbabilityReport(BaseModel):
    site: list[int]
    expected: float = Field(description="Closed-form probability of a true minimum")
    observed: float
    trials: int
