"""
Tests for the settings model.
"""
import pytest
from pydantic import ValidationError

from app.core.config import Settings, parse_cors


class TestSettings:
    """Tests for defaults and numeric checks."""

    def test_defaults(self):
        """Test the budget and solver defaults."""
        s = Settings(_env_file=None)

        assert s.API_NODE_BUDGET == 200_000
        assert s.API_MAX_STEPS == 20_000
        assert s.ENUMERATION_NODE_BUDGET == 5_000_000
        assert s.BURN_IN_FACTOR == 50
        assert s.SOLVER_TOLERANCE == 1e-4

    @pytest.mark.parametrize(
        "name", ["API_NODE_BUDGET", "API_MAX_STEPS", "BURN_IN_FACTOR", "SOLVER_MAX_ITERATIONS"]
    )
    def test_non_positive_rejected(self, name: str):
        """Test that work limits must be positive."""
        with pytest.raises(ValidationError):
            Settings(_env_file=None, **{name: 0})

    @pytest.mark.parametrize("tolerance", [0.0, 1.0, -0.5])
    def test_tolerance_range(self, tolerance: float):
        """Test that the solver tolerance lies strictly between 0 and 1."""
        with pytest.raises(ValidationError):
            Settings(_env_file=None, SOLVER_TOLERANCE=tolerance)

    def test_step_scale_positive(self):
        """Test that the solver step scale must be positive."""
        with pytest.raises(ValidationError):
            Settings(_env_file=None, SOLVER_STEP_SCALE=0.0)

    def test_cors_origins(self):
        """Test that trailing slashes are stripped from CORS origins."""
        s = Settings(_env_file=None, BACKEND_CORS_ORIGINS="http://localhost:3000/,https://example.org")
        assert s.all_cors_origins == ["http://localhost:3000", "https://example.org"]


class TestParseCors:
    """Tests for the CORS list parser."""

    def test_comma_separated(self):
        """Test that a comma-separated string is split."""
        assert parse_cors("a, b,") == ["a", "b"]

    def test_list_passthrough(self):
        """Test that lists pass through."""
        assert parse_cors(["a"]) == ["a"]

    def test_other_types(self):
        """Test that other types are rejected."""
        with pytest.raises(ValueError):
            parse_cors(3)
