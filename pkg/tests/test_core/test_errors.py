"""
Tests for the error hierarchy and its HTTP mapping.
"""
import pytest

from app.api.deps import http_error
from app.core.errors import (
    BudgetExceeded,
    ConditionViolated,
    ConfigFormatError,
    Infeasible,
    NotMinimum,
    TreeHomError,
    ValidationFailure,
)


class TestErrorCodes:
    """Tests for the exit and status codes carried by each class."""

    @pytest.mark.parametrize(
        "error", [ValidationFailure, ConditionViolated, ConfigFormatError, NotMinimum, Infeasible]
    )
    def test_validation_failures(self, error: type[TreeHomError]):
        """Test that validation failures exit with 2 and answer 422."""
        assert issubclass(error, ValidationFailure)
        assert error.exit_code == 2
        assert error.status_code == 422

    def test_budget_exceeded(self):
        """Test that running out of budget exits with 3 and answers 413."""
        assert BudgetExceeded.exit_code == 3
        assert BudgetExceeded.status_code == 413
        assert not issubclass(BudgetExceeded, ValidationFailure)


class TestHttpError:
    """Tests for the route-level translation."""

    def test_status_and_detail(self):
        """Test that the message becomes the detail."""
        exc = http_error(BudgetExceeded("node budget 10 exhausted"))

        assert exc.status_code == 413
        assert exc.detail == "node budget 10 exhausted"

    def test_subclass_status(self):
        """Test that subclasses keep the inherited status."""
        assert http_error(NotMinimum("site (1,) is a local maximum")).status_code == 422
