"""
Tests for the application shell: root, health and middleware.
"""
from fastapi.testclient import TestClient


class TestRoot:
    """Tests for the info endpoints."""

    def test_root(self, client: TestClient):
        """Test the API info payload."""
        response = client.get("/")

        assert response.status_code == 200
        data = response.json()
        assert data["name"] == "Tree Homomorphisms"
        assert data["version"] == "0.1.0"
        assert data["endpoints"]["enumeration"] == "/api/v1/enumerate"

    def test_health(self, client: TestClient):
        """Test the health check."""
        response = client.get("/health")

        assert response.status_code == 200
        assert response.json() == {"status": "healthy"}


class TestMiddleware:
    """Tests for the response headers."""

    def test_security_headers(self, client: TestClient):
        """Test that every response carries the security headers."""
        response = client.get("/health")

        assert response.headers["X-Content-Type-Options"] == "nosniff"
        assert response.headers["X-Frame-Options"] == "DENY"
        assert "X-Process-Time-Ms" in response.headers
        assert response.headers["X-Request-ID"]

    def test_request_id_echoed(self, client: TestClient):
        """Test that a client-supplied request ID is kept."""
        response = client.get("/health", headers={"X-Request-ID": "trace-42"})
        assert response.headers["X-Request-ID"] == "trace-42"
