"""
Kirszbraun Extension Routes.

Extends values prescribed on a support inside a box to a full homomorphism.
"""
from fastapi import APIRouter, HTTPException, Request, status
from pydantic import BaseModel, Field

from app.api.deps import http_error
from app.core.config import settings
from app.core.errors import TreeHomError
from app.core.rate_limit import limiter
from app.services.kirszbraun import PartialHeight, kirszbraun_extend
from app.services.lattice import Region
from app.services.serialization import dump_height
from app.services.tree import TreeEnd, TreeVertex, validate_vertex

router = APIRouter()


class SupportPoint(BaseModel):
    cell: list[int] = Field(description="Lattice cell inside the box")
    vertex: str = Field(description="Tree vertex as comma-separated letters, 'e' for the root")


class ExtensionRequest(BaseModel):
    """Request schema for extending partial data."""

    box: list[int] = Field(min_length=1, max_length=3, description="Box side lengths (cells 0..size-1)")
    d: int = Field(default=3, ge=2, le=8, description="Tree degree")
    support: list[SupportPoint] = Field(min_length=1, description="Prescribed values, in tie-break order")
    end_prefix: list[int] = Field(default=[], description="Prefix of the reference end")
    end_period: list[int] = Field(default=[2, 1], description="Period of the reference end")

    model_config = {
        "json_schema_extra": {
            "examples": [
                {
                    "box": [3, 3],
                    "d": 3,
                    "support": [
                        {"cell": [0, 0], "vertex": "e"},
                        {"cell": [2, 2], "vertex": "1,2,1,2"},
                    ],
                }
            ]
        }
    }


class ExtensionResponse(BaseModel):
    """The extension as a list of values plus its HEIGHT v1 text."""

    values: list[SupportPoint]
    height_text: str

    model_config = {
        "json_schema_extra": {
            "examples": [
                {
                    "values": [{"cell": [0], "vertex": "e"}, {"cell": [1], "vertex": "1"}],
                    "height_text": "HEIGHT v1\nm=1 d=3\n0 e\n1 1\n",
                }
            ]
        }
    }


@router.post("", response_model=ExtensionResponse)
@limiter.limit(settings.RATE_LIMIT_DEFAULT)
async def extend_partial(
    request: Request,
    body: ExtensionRequest,
) -> ExtensionResponse:
    """
    Extend prescribed values to the whole box.

    - Fails with 422 when some pair of support points is farther apart in
      the tree than on the lattice
    - Ties between equally deep candidates go to the earliest support point
    """
    if any(size < 1 or size > 64 for size in body.box):
        raise HTTPException(
            status_code=status.HTTP_422_UNPROCESSABLE_ENTITY,
            detail="Box sides must lie in 1..64",
        )
    try:
        pairs = []
        for point in body.support:
            vertex = TreeVertex.parse(point.vertex)
            validate_vertex(vertex, body.d)
            pairs.append((tuple(point.cell), vertex))
        partial = PartialHeight.from_pairs(Region.box(tuple(body.box)), pairs)
        h = kirszbraun_extend(partial, TreeEnd(tuple(body.end_prefix), tuple(body.end_period)))
    except TreeHomError as e:
        raise http_error(e)

    values = [SupportPoint(cell=list(x), vertex=str(h[x])) for x in h.region.ordered]
    return ExtensionResponse(values=values, height_text=dump_height(h, body.d))
