"""
Dynamics Routes.

Bounded runs of the adapted or heat-bath chain, and exact minimum
probabilities for uploaded configurations.
"""
from typing import Literal

from fastapi import APIRouter, HTTPException, Request, status
from pydantic import BaseModel, Field

from app.api.deps import MaxSteps, http_error
from app.core.config import settings
from app.core.errors import TreeHomError
from app.core.rate_limit import limiter
from app.schemas.experiments import ExperimentConfig
from app.services.experiments import max_deviation, sample_configuration
from app.services.glauber import classify, min_probability
from app.services.lattice import Slope, slope_of
from app.services.serialization import dump_config, load_config

router = APIRouter()


class SampleRequest(BaseModel):
    """Request schema for a bounded chain run."""

    seed: int = Field(ge=0, description="Root seed of the run")
    m: int = Field(default=2, ge=1, le=3, description="Lattice dimension")
    n: int = Field(default=4, ge=2, le=32, description="Period")
    d: int = Field(default=3, ge=2, le=8, description="Tree degree")
    slope: str = Field(default="0", description="Slope as comma-separated fractions")
    steps: int = Field(default=1000, ge=0, description="Chain steps (no burn-in)")
    dynamics: Literal["adapted", "glauber"] = Field(default="adapted")

    model_config = {
        "json_schema_extra": {
            "examples": [{"seed": 7, "m": 2, "n": 4, "d": 3, "slope": "1/2,0", "steps": 500}]
        }
    }


class SampleResponse(BaseModel):
    """Final configuration of the run."""

    config_text: str = Field(description="TREEHOM v1 text of the final configuration")
    slope: str = Field(description="Slope of the final configuration (conserved by the chain)")
    max_deviation: int = Field(description="max_x d(h(x), g(floor(s.x))) over the fundamental cell")
    steps: int


class MinProbabilityRequest(BaseModel):
    """Request schema for the exact minimum probability at one site."""

    config_text: str = Field(description="TREEHOM v1 configuration")
    site: list[int] = Field(min_length=1, max_length=3, description="Torus cell, reduced mod n")

    model_config = {
        "json_schema_extra": {
            "examples": [
                {
                    "config_text": "TREEHOM v1\nm=1 n=2 d=3\nslope=0/2\nanchor=e\nlabels k=1:\n1 1\n",
                    "site": [1],
                }
            ]
        }
    }


class MinProbabilityResponse(BaseModel):
    site: list[int]
    kind: str = Field(description="Extremum type of the site")
    probability: float
    fraction: str = Field(description="The probability as an exact fraction")


@router.post("/sample", response_model=SampleResponse)
@limiter.limit(settings.RATE_LIMIT_HEAVY)
async def sample(
    request: Request,
    body: SampleRequest,
    max_steps: MaxSteps,
) -> SampleResponse:
    """
    Run the chain from the slope's periodic configuration.

    - The run is reproducible from the seed
    - Step counts above the server limit are rejected with 413
    """
    if body.steps > max_steps:
        raise HTTPException(
            status_code=status.HTTP_413_REQUEST_ENTITY_TOO_LARGE,
            detail=f"At most {max_steps} steps per request",
        )
    try:
        cfg = ExperimentConfig(
            experiment="sample",
            seed=body.seed,
            m=body.m,
            n=body.n,
            d=body.d,
            slope=body.slope,
            steps=body.steps,
            burn_in=0,
            dynamics=body.dynamics,
        )
        state = sample_configuration(cfg)
        slope = Slope.parse(body.slope, body.n, body.m)
        deviation = max_deviation(state, slope)
    except TreeHomError as e:
        raise http_error(e)

    return SampleResponse(
        config_text=dump_config(state.cfg),
        slope=str(slope_of(state.cfg)),
        max_deviation=deviation,
        steps=body.steps,
    )


@router.post("/min-probability", response_model=MinProbabilityResponse)
@limiter.limit(settings.RATE_LIMIT_DEFAULT)
async def minimum_probability(
    request: Request,
    body: MinProbabilityRequest,
) -> MinProbabilityResponse:
    """
    Probability that resampling all excursions at a local minimum makes it a
    true minimum.

    Sites that are not local minima are rejected with 422.
    """
    try:
        cfg = load_config(body.config_text)
        if len(body.site) != cfg.m:
            raise HTTPException(
                status_code=status.HTTP_422_UNPROCESSABLE_ENTITY,
                detail=f"Site needs {cfg.m} coordinates",
            )
        site = tuple(c % cfg.n for c in body.site)
        kind = classify(cfg, site)
        probability = min_probability(cfg, site)
    except TreeHomError as e:
        raise http_error(e)

    return MinProbabilityResponse(
        site=list(site),
        kind=kind.value,
        probability=float(probability),
        fraction=str(probability),
    )
