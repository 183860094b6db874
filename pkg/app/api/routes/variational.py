"""
Variational Routes.

Minimizes the macroscopic entropy over profiles with a given boundary.
"""
from fastapi import APIRouter, HTTPException, Request, status
from pydantic import BaseModel, Field, model_validator
from typing_extensions import Self

from app.api.deps import http_error
from app.core.config import settings
from app.core.errors import TreeHomError
from app.core.rate_limit import limiter
from app.services.enumeration import SurfaceTensionTable
from app.services.profiles import (
    BoundaryProfile,
    QuadraticSurfaceTension,
    SurfaceTensionModel,
    TabulatedSurfaceTension,
    minimize_entropy,
)
from app.services.serialization import dump_profile, load_profile

router = APIRouter()


class SolveRequest(BaseModel):
    """Request schema for the variational solver. Give exactly one surface tension."""

    boundary_text: str = Field(description="PROFILE v1 text listing the boundary of a box")
    quadratic: list[float] | None = Field(
        default=None, description="Minimizer of a quadratic surface tension |s - s0|^2"
    )
    ent_csv: str | None = Field(default=None, description="Surface tension table as m,n,d,s1..,count,ent CSV")
    max_iterations: int | None = Field(default=None, ge=1, le=20_000)

    model_config = {
        "json_schema_extra": {
            "examples": [
                {
                    "boundary_text": "PROFILE v1\nk=1\na=0\neps=0.5\n0 0 1 1\n0 0.5 1 1\n0 1 1 1\n"
                    "0.5 0 1 1\n0.5 1 1 1\n1 0 1 1\n1 0.5 1 1\n1 1 1 1\n",
                    "quadratic": [0.0, 0.0],
                }
            ]
        }
    }

    @model_validator(mode="after")
    def _one_surface_tension(self) -> Self:
        if (self.quadratic is None) == (self.ent_csv is None):
            raise ValueError("give exactly one of quadratic or ent_csv")
        return self


class SolveResponse(BaseModel):
    profile_text: str = Field(description="PROFILE v1 text of the minimizer")
    objective: float
    iterations: int
    admissible: bool = Field(description="Whether the minimizer has the path property")


def _surface_tension(body: SolveRequest, m: int) -> SurfaceTensionModel:
    if body.ent_csv is not None:
        return TabulatedSurfaceTension(SurfaceTensionTable.from_csv(body.ent_csv))
    minimizer = tuple(body.quadratic or ())
    if len(minimizer) == 1:
        minimizer *= m
    if len(minimizer) != m:
        raise HTTPException(
            status_code=status.HTTP_422_UNPROCESSABLE_ENTITY,
            detail=f"Quadratic minimizer needs {m} components",
        )
    return QuadraticSurfaceTension(minimizer=minimizer)


@router.post("/solve", response_model=SolveResponse)
@limiter.limit(settings.RATE_LIMIT_HEAVY)
async def solve(
    request: Request,
    body: SolveRequest,
) -> SolveResponse:
    """
    Minimize the entropy functional with the boundary held fixed.

    - Infeasible or invalid boundaries are rejected with 422
    - The result may fail the path property; ``admissible`` reports it
    """
    try:
        boundary = load_profile(body.boundary_text)
        if not isinstance(boundary, BoundaryProfile):
            raise HTTPException(
                status_code=status.HTTP_422_UNPROCESSABLE_ENTITY,
                detail="Boundary must list exactly the boundary points of a box",
            )
        ent = _surface_tension(body, boundary.grid.m)
        solution = minimize_entropy(boundary, ent, max_iterations=body.max_iterations)
    except TreeHomError as e:
        raise http_error(e)

    return SolveResponse(
        profile_text=dump_profile(solution.profile),
        objective=solution.objective,
        iterations=solution.iterations,
        admissible=solution.admissible,
    )
