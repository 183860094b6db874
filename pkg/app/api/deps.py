"""
API Dependencies - Dependency injection and error translation for routes.
"""
from typing import Annotated

from fastapi import Depends, HTTPException, UploadFile, status

from app.core.config import settings
from app.core.errors import TreeHomError


def get_node_budget() -> int:
    """DFS node cap applied to enumeration requests."""
    return settings.API_NODE_BUDGET


def get_max_steps() -> int:
    """Largest number of chain steps a request may ask for."""
    return settings.API_MAX_STEPS


NodeBudget = Annotated[int, Depends(get_node_budget)]
MaxSteps = Annotated[int, Depends(get_max_steps)]


def http_error(e: TreeHomError) -> HTTPException:
    """Map a domain error onto the status code its class carries."""
    return HTTPException(status_code=e.status_code, detail=str(e))


async def read_text_upload(file: UploadFile) -> str:
    """Read an uploaded text file; non-UTF-8 content is a bad request."""
    content = await file.read()
    try:
        return content.decode("utf-8")
    except UnicodeDecodeError:
        raise HTTPException(
            status_code=status.HTTP_400_BAD_REQUEST,
            detail="File must be UTF-8 text",
        )
