"""
HTTP Middleware.

Request tracking with timing logs, security headers and host checks.
"""
import logging
import time
import uuid
from collections.abc import Callable

from starlette.middleware.base import BaseHTTPMiddleware
from starlette.requests import Request
from starlette.responses import Response

from app.core.config import settings

logger = logging.getLogger(__name__)


class SecurityHeadersMiddleware(BaseHTTPMiddleware):
    """
    Add security headers and a request ID to every response.

    A client-supplied X-Request-ID is kept so calls can be traced across
    services; otherwise a fresh one is generated. Each request is logged
    with its status and duration.
    """

    async def dispatch(self, request: Request, call_next: Callable) -> Response:
        request_id = request.headers.get("x-request-id") or str(uuid.uuid4())
        request.state.request_id = request_id

        started = time.perf_counter()
        response = await call_next(request)
        elapsed_ms = (time.perf_counter() - started) * 1000
        logger.info(
            "%s %s -> %d (%.1f ms) id=%s",
            request.method,
            request.url.path,
            response.status_code,
            elapsed_ms,
            request_id,
        )

        response.headers["X-Content-Type-Options"] = "nosniff"
        response.headers["X-Frame-Options"] = "DENY"
        response.headers["Referrer-Policy"] = "strict-origin-when-cross-origin"
        response.headers["X-Request-ID"] = request_id
        response.headers["X-Process-Time-Ms"] = f"{elapsed_ms:.1f}"

        # HSTS needs HTTPS
        if settings.ENVIRONMENT == "production":
            response.headers["Strict-Transport-Security"] = "max-age=31536000; includeSubDomains"

        return response


class TrustedHostMiddleware(BaseHTTPMiddleware):
    """Reject requests whose Host header is not in ``allowed_hosts``."""

    def __init__(self, app, allowed_hosts: list[str] | None = None):
        super().__init__(app)
        self.allowed_hosts = allowed_hosts or ["*"]

    async def dispatch(self, request: Request, call_next: Callable) -> Response:
        if "*" in self.allowed_hosts:
            return await call_next(request)
        host = request.headers.get("host", "").split(":")[0]
        if host not in self.allowed_hosts:
            logger.warning("rejected host %r", host)
            return Response(content="Invalid host header", status_code=400, media_type="text/plain")
        return await call_next(request)
