"""
Tests for the exact enumeration routes.

Counts of one slope class and surface tension tables.
"""
import math

from fastapi.testclient import TestClient

from app.api.deps import get_node_budget
from app.main import app


class TestEnumerateSlopeClass:
    """Tests for POST /enumerate."""

    def test_zero_slope_count(self, client: TestClient):
        """Test the period-2 line on the 3-regular tree."""
        response = client.post(
            "/api/v1/enumerate",
            json={"m": 1, "n": 2, "d": 3, "slope": "0"},
        )

        assert response.status_code == 200
        data = response.json()
        assert data["count"] == 3
        assert data["slope"] == "0/2"
        assert math.isclose(data["ent"], -math.log(3) / 2)

    def test_wrong_parity_is_empty(self, client: TestClient):
        """Test that an odd numerator gives an empty class with a null ent."""
        response = client.post(
            "/api/v1/enumerate",
            json={"m": 1, "n": 2, "d": 3, "slope": "1/2"},
        )

        assert response.status_code == 200
        assert response.json()["count"] == 0
        assert response.json()["ent"] is None

    def test_garbage_slope(self, client: TestClient):
        """Test that an unparseable slope is rejected."""
        response = client.post(
            "/api/v1/enumerate",
            json={"m": 1, "n": 2, "d": 3, "slope": "half"},
        )
        assert response.status_code == 422

    def test_period_limit(self, client: TestClient):
        """Test that periods above 12 fail request validation."""
        response = client.post(
            "/api/v1/enumerate",
            json={"m": 1, "n": 14, "d": 3, "slope": "0"},
        )
        assert response.status_code == 422

    def test_node_budget(self, client: TestClient):
        """Test that a search over the node budget answers 413."""
        app.dependency_overrides[get_node_budget] = lambda: 10

        response = client.post(
            "/api/v1/enumerate",
            json={"m": 2, "n": 4, "d": 3, "slope": "0"},
        )

        assert response.status_code == 413


class TestSurfaceTension:
    """Tests for POST /enumerate/surface-tension."""

    def test_table_rows(self, client: TestClient):
        """Test that every (n, slope) pair gets a row and a CSV line."""
        response = client.post(
            "/api/v1/enumerate/surface-tension",
            json={"m": 1, "n_values": [2], "d": 3, "slopes": [["0"], ["1/2"]]},
        )

        assert response.status_code == 200
        data = response.json()
        assert len(data["rows"]) == 2
        zero = next(row for row in data["rows"] if row["slope"] == ["0"])
        assert zero["count"] == 3
        half = next(row for row in data["rows"] if row["slope"] == ["1/2"])
        assert half["ent"] is None
        assert data["csv"].startswith("m,n,d,s1,count,ent\n")
        assert len(data["csv"].strip().splitlines()) == 3

    def test_bad_fraction(self, client: TestClient):
        """Test that a slope component that is not a fraction is rejected."""
        response = client.post(
            "/api/v1/enumerate/surface-tension",
            json={"m": 1, "n_values": [2], "d": 3, "slopes": [["one"]]},
        )
        assert response.status_code == 422

    def test_period_out_of_range(self, client: TestClient):
        """Test the period validator."""
        response = client.post(
            "/api/v1/enumerate/surface-tension",
            json={"m": 1, "n_values": [2, 20], "d": 3, "slopes": [["0"]]},
        )
        assert response.status_code == 422

    def test_wrong_component_count(self, client: TestClient):
        """Test that a slope with the wrong number of components is rejected."""
        response = client.post(
            "/api/v1/enumerate/surface-tension",
            json={"m": 2, "n_values": [2], "d": 3, "slopes": [["0"]]},
        )
        assert response.status_code == 422
