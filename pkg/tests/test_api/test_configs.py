"""
Tests for configuration upload and validation.
"""
from fastapi.testclient import TestClient

from app.services.lattice import PeriodicConfig
from app.services.serialization import dump_config

FLAT_TEXT = "TREEHOM v1\nm=1 n=2 d=3\nslope=0/2\nanchor=e\nlabels k=1:\n1 1\n"

INCONSISTENT_TEXT = (
    "TREEHOM v1\nm=2 n=2 d=3\nslope=0/2,0/2\nanchor=e\n"
    "labels k=1:\n1 1 1 1\nlabels k=2:\n2 2 2 2\n"
)


def _upload(client: TestClient, text: str | bytes):
    content = text.encode("utf-8") if isinstance(text, str) else text
    return client.post(
        "/api/v1/configs/validate",
        files={"file": ("config.txt", content, "text/plain")},
    )


class TestValidateConfig:
    """Tests for POST /configs/validate."""

    def test_flat_config(self, client: TestClient):
        """Test that a zero-slope configuration has no supporting geodesic."""
        response = _upload(client, FLAT_TEXT)

        assert response.status_code == 200
        data = response.json()
        assert data["valid"] is True
        assert (data["m"], data["n"], data["d"]) == (1, 2, 3)
        assert data["violations"] == 0
        assert data["slope"] == "0/2"
        assert data["supporting_geodesic"] is None

    def test_geodesic_config(self, client: TestClient, geodesic_plane: PeriodicConfig):
        """Test that a sloped configuration reports its axis."""
        response = _upload(client, dump_config(geodesic_plane))

        assert response.status_code == 200
        data = response.json()
        assert data["valid"] is True
        assert data["slope"] == "2/2,0/2"
        assert set(data["supporting_geodesic"]) == {"forward", "backward"}

    def test_plaquette_failure(self, client: TestClient):
        """Test that inconsistent labels are reported, not raised."""
        response = _upload(client, INCONSISTENT_TEXT)

        assert response.status_code == 200
        data = response.json()
        assert data["valid"] is False
        assert data["violations"] == 4
        assert data["detail"].startswith("first nontrivial plaquette")

    def test_malformed_file(self, client: TestClient):
        """Test that a bad header is rejected."""
        response = _upload(client, "HELLO\n")
        assert response.status_code == 422

    def test_binary_file(self, client: TestClient):
        """Test that non-UTF-8 uploads are a bad request."""
        response = _upload(client, b"\xff\xfe\x00")
        assert response.status_code == 400
