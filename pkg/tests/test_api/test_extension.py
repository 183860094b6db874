"""
Tests for the Kirszbraun extension route.
"""
from fastapi.testclient import TestClient


def _support(*points: tuple[list[int], str]) -> list[dict]:
    return [{"cell": cell, "vertex": vertex} for cell, vertex in points]


class TestExtendPartial:
    """Tests for POST /extend."""

    def test_corner_to_corner(self, client: TestClient):
        """Test the diagonal of a 3x3 box between two prescribed corners."""
        response = client.post(
            "/api/v1/extend",
            json={
                "box": [3, 3],
                "d": 3,
                "support": _support(([0, 0], "e"), ([2, 2], "1,2,1,2")),
            },
        )

        assert response.status_code == 200
        data = response.json()
        values = {tuple(v["cell"]): v["vertex"] for v in data["values"]}
        assert len(values) == 9
        assert values[(0, 0)] == "e"
        assert values[(2, 2)] == "1,2,1,2"
        assert data["height_text"].startswith("HEIGHT v1\nm=2 d=3\n")

    def test_single_point(self, client: TestClient):
        """Test that one prescribed value extends to the whole line."""
        response = client.post(
            "/api/v1/extend",
            json={"box": [4], "d": 3, "support": _support(([0], "e"))},
        )

        assert response.status_code == 200
        values = {tuple(v["cell"]): v["vertex"] for v in response.json()["values"]}
        assert values[(0,)] == "e"
        assert len(values) == 4

    def test_lipschitz_violation(self, client: TestClient):
        """Test that neighbors two tree steps apart cannot be extended."""
        response = client.post(
            "/api/v1/extend",
            json={"box": [2, 2], "d": 3, "support": _support(([0, 0], "e"), ([1, 0], "1,2"))},
        )
        assert response.status_code == 422

    def test_vertex_outside_tree(self, client: TestClient):
        """Test that a letter above d is rejected."""
        response = client.post(
            "/api/v1/extend",
            json={"box": [2], "d": 3, "support": _support(([0], "5"))},
        )
        assert response.status_code == 422

    def test_box_too_large(self, client: TestClient):
        """Test the box side limit."""
        response = client.post(
            "/api/v1/extend",
            json={"box": [65], "d": 3, "support": _support(([0], "e"))},
        )
        assert response.status_code == 422
