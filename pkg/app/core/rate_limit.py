"""
Rate Limiting Configuration.

Uses SlowAPI with two tiers:
- Heavy endpoints (enumeration, sampling, solver): strict limits
- Everything else: the default limit
"""
from slowapi import Limiter
from slowapi.util import get_remote_address
from starlette.requests import Request

from app.core.config import settings


def get_identifier(request: Request) -> str:
    """
    Get rate limit identifier.

    Uses the first address of X-Forwarded-For when a proxy sets it, otherwise
    the client address.
    """
    forwarded = request.headers.get("x-forwarded-for")
    if forwarded:
        return forwarded.split(",")[0].strip()
    return get_remote_address(request)


limiter = Limiter(
    key_func=get_identifier,
    default_limits=[settings.RATE_LIMIT_DEFAULT],
    storage_uri=settings.RATE_LIMIT_STORAGE_URI,
    strategy="fixed-window",
    enabled=settings.RATE_LIMIT_ENABLED,
)
