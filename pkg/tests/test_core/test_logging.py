"""
Tests for logging setup and the rate limit key.
"""
import logging

from starlette.requests import Request

from app.core.logging import setup_logging
from app.core.rate_limit import get_identifier


def _request(headers: dict[str, str]) -> Request:
    scope = {
        "type": "http",
        "method": "GET",
        "path": "/",
        "headers": [(k.lower().encode(), v.encode()) for k, v in headers.items()],
        "client": ("10.0.0.5", 1234),
    }
    return Request(scope)


class TestSetupLogging:
    """Tests for the dictConfig setup."""

    def test_level_applied(self):
        """Test that the app loggers take the requested level."""
        setup_logging("debug")
        try:
            app_logger = logging.getLogger("app")
            assert app_logger.level == logging.DEBUG
            assert app_logger.propagate is False
            assert logging.getLogger("app.services.glauber").getEffectiveLevel() == logging.DEBUG
        finally:
            setup_logging("INFO")

    def test_existing_loggers_kept(self):
        """Test that module loggers created before setup stay enabled."""
        module_logger = logging.getLogger("app.services.enumeration")
        setup_logging("INFO")
        assert module_logger.disabled is False


class TestRateLimitKey:
    """Tests for the limiter identifier."""

    def test_forwarded_for(self):
        """Test that the first forwarded address wins."""
        request = _request({"X-Forwarded-For": "203.0.113.7, 10.0.0.1"})
        assert get_identifier(request) == "203.0.113.7"

    def test_client_address(self):
        """Test the fallback to the client address."""
        assert get_identifier(_request({})) == "10.0.0.5"
