"""
Tests for the variational solver route.
"""
import math

from fastapi.testclient import TestClient

CONSTANT_BOUNDARY = (
    "PROFILE v1\nk=1\na=0\neps=0.5\n"
    "0 0 1 1\n0 0.5 1 1\n0 1 1 1\n"
    "0.5 0 1 1\n0.5 1 1 1\n"
    "1 0 1 1\n1 0.5 1 1\n1 1 1 1\n"
)

FULL_PROFILE = CONSTANT_BOUNDARY + "0.5 0.5 1 1\n"


class TestSolve:
    """Tests for POST /variational/solve."""

    def test_constant_boundary(self, client: TestClient):
        """Test that a flat boundary with a zero-slope minimizer costs nothing."""
        response = client.post(
            "/api/v1/variational/solve",
            json={"boundary_text": CONSTANT_BOUNDARY, "quadratic": [0.0, 0.0]},
        )

        assert response.status_code == 200
        data = response.json()
        assert math.isclose(data["objective"], 0.0, abs_tol=1e-9)
        assert data["admissible"] is True
        assert data["profile_text"].startswith("PROFILE v1\n")
        assert "0.5 0.5" in data["profile_text"]

    def test_scalar_minimizer_broadcast(self, client: TestClient):
        """Test that a one-component quadratic minimizer is broadcast."""
        response = client.post(
            "/api/v1/variational/solve",
            json={"boundary_text": CONSTANT_BOUNDARY, "quadratic": [0.0]},
        )
        assert response.status_code == 200

    def test_wrong_minimizer_length(self, client: TestClient):
        """Test that a three-component minimizer is rejected on a square."""
        response = client.post(
            "/api/v1/variational/solve",
            json={"boundary_text": CONSTANT_BOUNDARY, "quadratic": [0.0, 0.0, 0.0]},
        )
        assert response.status_code == 422

    def test_exactly_one_surface_tension(self, client: TestClient):
        """Test that neither and both surface tensions are rejected."""
        neither = client.post(
            "/api/v1/variational/solve",
            json={"boundary_text": CONSTANT_BOUNDARY},
        )
        both = client.post(
            "/api/v1/variational/solve",
            json={
                "boundary_text": CONSTANT_BOUNDARY,
                "quadratic": [0.0, 0.0],
                "ent_csv": "m,n,d,s1,s2,count,ent\n",
            },
        )

        assert neither.status_code == 422
        assert both.status_code == 422

    def test_interior_points_rejected(self, client: TestClient):
        """Test that a profile with interior values is not a boundary."""
        response = client.post(
            "/api/v1/variational/solve",
            json={"boundary_text": FULL_PROFILE, "quadratic": [0.0, 0.0]},
        )
        assert response.status_code == 422

    def test_bad_table(self, client: TestClient):
        """Test that a surface tension CSV without a header is rejected."""
        response = client.post(
            "/api/v1/variational/solve",
            json={"boundary_text": CONSTANT_BOUNDARY, "ent_csv": "1,2,3\n"},
        )
        assert response.status_code == 422
