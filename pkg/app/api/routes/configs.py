"""
Configuration Routes.

Validation of uploaded TREEHOM v1 files.
"""
from typing import Annotated

from fastapi import APIRouter, File, Request, UploadFile
from pydantic import BaseModel, Field

from app.api.deps import http_error, read_text_upload
from app.core.config import settings
from app.core.errors import TreeHomError, ValidationFailure
from app.core.rate_limit import limiter
from app.services.lattice import slope_of, supporting_geodesic
from app.services.serialization import load_config

router = APIRouter()


class GeodesicPublic(BaseModel):
    forward: str = Field(description="Forward end as prefix(period)")
    backward: str = Field(description="Backward end as prefix(period)")


class ConfigValidationResponse(BaseModel):
    """Structural report on an uploaded configuration."""

    valid: bool
    m: int
    n: int
    d: int
    violations: int = Field(description="Number of nontrivial torus plaquettes")
    slope: str | None = Field(default=None, description="Measured slope, for valid configurations")
    supporting_geodesic: GeodesicPublic | None = Field(
        default=None, description="Axis of the translations; absent for zero slope"
    )
    detail: str | None = None

    model_config = {
        "json_schema_extra": {
            "examples": [
                {
                    "valid": True,
                    "m": 2,
                    "n": 2,
                    "d": 3,
                    "violations": 0,
                    "slope": "2/2,0/2",
                    "supporting_geodesic": {"forward": "(1,2)", "backward": "(2,1)"},
                    "detail": None,
                }
            ]
        }
    }


@router.post("/validate", response_model=ConfigValidationResponse)
@limiter.limit(settings.RATE_LIMIT_DEFAULT)
async def validate_config(
    request: Request,
    file: Annotated[UploadFile, File(description="TREEHOM v1 configuration file")],
) -> ConfigValidationResponse:
    """
    Check an uploaded configuration.

    - Malformed files are rejected with 422
    - Plaquette failures are reported in the body, not as errors
    """
    text = await read_text_upload(file)
    try:
        cfg = load_config(text)
    except TreeHomError as e:
        raise http_error(e)

    violations = cfg.plaquette_violations()
    response = ConfigValidationResponse(
        valid=not violations,
        m=cfg.m,
        n=cfg.n,
        d=cfg.d,
        violations=len(violations),
    )
    if violations:
        u, i, j = violations[0]
        response.detail = f"first nontrivial plaquette at {list(u)} in directions {i + 1},{j + 1}"
        return response

    try:
        slope = slope_of(cfg)
        response.slope = str(slope)
        if not slope.is_zero:
            g = supporting_geodesic(cfg)
            response.supporting_geodesic = GeodesicPublic(forward=str(g.forward), backward=str(g.backward))
    except ValidationFailure as e:
        response.valid = False
        response.detail = str(e)
    return response
