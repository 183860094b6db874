"""
Exact Enumeration Routes.

Counts of invariant homomorphisms of a given slope and small surface tension
tables.
"""
from fractions import Fraction

from fastapi import APIRouter, HTTPException, Request, status
from pydantic import BaseModel, Field, field_validator

from app.api.deps import NodeBudget, http_error
from app.core.config import settings
from app.core.errors import TreeHomError
from app.core.rate_limit import limiter
from app.services.enumeration import enumerate_invariant, surface_tension_table
from app.services.lattice import Slope

router = APIRouter()


def _finite(value: float) -> float | None:
    # JSON has no infinity; an empty class reports ent as null
    return value if value != float("inf") else None


class EnumerationRequest(BaseModel):
    """Request schema for counting one slope class."""

    m: int = Field(default=1, ge=1, le=3, description="Lattice dimension")
    n: int = Field(default=2, ge=1, le=12, description="Period")
    d: int = Field(default=3, ge=2, le=8, description="Tree degree")
    slope: str = Field(default="0", description="Comma-separated fractions; a lone 0 means the zero slope")

    model_config = {
        "json_schema_extra": {
            "examples": [
                {"m": 1, "n": 2, "d": 3, "slope": "0"},
                {"m": 2, "n": 2, "d": 3, "slope": "1,0"},
            ]
        }
    }


class EnumerationResponse(BaseModel):
    """Exact count of the pinned class and its entropy."""

    m: int
    n: int
    d: int
    slope: str = Field(description="Slope as numerators over n")
    count: int
    ent: float | None = Field(description="-(1/n^m) ln(count); null for an empty class")

    model_config = {
        "json_schema_extra": {
            "examples": [
                {"m": 1, "n": 2, "d": 3, "slope": "0/2", "count": 3, "ent": -0.549306144334}
            ]
        }
    }


class SurfaceTensionRequest(BaseModel):
    """Request schema for a surface tension table."""

    m: int = Field(default=1, ge=1, le=3)
    n_values: list[int] = Field(min_length=1, max_length=4, description="Periods to tabulate")
    d: int = Field(default=3, ge=2, le=8)
    slopes: list[list[str]] = Field(min_length=1, max_length=16, description="Slopes, one list of fractions each")

    model_config = {
        "json_schema_extra": {
            "examples": [{"m": 1, "n_values": [2, 4], "d": 3, "slopes": [["0"], ["1/2"], ["1"]]}]
        }
    }

    @field_validator("n_values")
    @classmethod
    def _positive_periods(cls, v: list[int]) -> list[int]:
        if any(n < 1 or n > 12 for n in v):
            raise ValueError("periods must lie in 1..12")
        return v


class SurfaceTensionRow(BaseModel):
    n: int
    slope: list[str]
    count: int
    ent: float | None


class SurfaceTensionResponse(BaseModel):
    m: int
    d: int
    rows: list[SurfaceTensionRow]
    csv: str = Field(description="The same table as m,n,d,s1..,count,ent CSV")


@router.post("", response_model=EnumerationResponse)
@limiter.limit(settings.RATE_LIMIT_HEAVY)
async def enumerate_slope_class(
    request: Request,
    body: EnumerationRequest,
    budget: NodeBudget,
) -> EnumerationResponse:
    """
    Count the n-invariant homomorphisms of one slope.

    - Empty classes (odd numerators or odd period) return count 0 and a null ent
    - Requests that exceed the node budget fail with 413
    """
    try:
        slope = Slope.parse(body.slope, body.n, body.m)
        result = enumerate_invariant(body.m, body.n, body.d, slope, budget=budget)
    except TreeHomError as e:
        raise http_error(e)

    return EnumerationResponse(
        m=body.m,
        n=body.n,
        d=body.d,
        slope=str(slope),
        count=result.count,
        ent=_finite(result.ent),
    )


@router.post("/surface-tension", response_model=SurfaceTensionResponse)
@limiter.limit(settings.RATE_LIMIT_HEAVY)
async def tabulate_surface_tension(
    request: Request,
    body: SurfaceTensionRequest,
    budget: NodeBudget,
) -> SurfaceTensionResponse:
    """Tabulate ent_n(s) for every requested period and slope."""
    try:
        slopes = [tuple(Fraction(c) for c in s) for s in body.slopes]
    except (ValueError, ZeroDivisionError) as e:
        raise HTTPException(
            status_code=status.HTTP_422_UNPROCESSABLE_ENTITY,
            detail=f"Bad slope: {e}",
        )
    try:
        table = surface_tension_table(body.m, body.n_values, body.d, slopes, budget=budget)
    except TreeHomError as e:
        raise http_error(e)

    rows = [
        SurfaceTensionRow(
            n=n,
            slope=[str(c) for c in s],
            count=result.count,
            ent=_finite(result.ent),
        )
        for (n, s), result in sorted(table.entries.items())
    ]
    return SurfaceTensionResponse(m=table.m, d=table.d, rows=rows, csv=table.to_csv())
