"""
Error hierarchy for the tree homomorphism toolkit.

Services raise these; the CLI turns them into exit codes and the API turns
them into HTTP errors. Keep the two codes on the class so both front ends
agree.
"""
from fastapi import status


class TreeHomError(Exception):
    """Base class for all domain errors."""

    exit_code: int = 2
    status_code: int = status.HTTP_422_UNPROCESSABLE_ENTITY


class ValidationFailure(TreeHomError):
    """Input or state failed a structural check (exit code 2)."""

    pass


class BudgetExceeded(TreeHomError):
    """A work budget (DFS nodes, state count) ran out before completion."""

    exit_code = 3
    status_code = status.HTTP_413_REQUEST_ENTITY_TOO_LARGE


# =============================================================================
# tree / lattice
# =============================================================================


class EqualEnds(ValidationFailure):
    """Two ends coincide, so their meeting height is infinite."""

    pass


class PlaquetteInconsistent(ValidationFailure):
    """A unit plaquette word does not reduce to the identity."""

    pass


class Unreachable(ValidationFailure):
    """Two cells lie in different components of a region."""

    pass


class ZeroSlope(ValidationFailure):
    """A supporting geodesic was requested for a zero-slope configuration."""

    pass


class ConfigFormatError(ValidationFailure):
    """A configuration, profile or height file could not be parsed."""

    pass


# =============================================================================
# Kirszbraun
# =============================================================================


class ConditionViolated(ValidationFailure):
    """Partial data violates the Lipschitz/parity extension condition."""

    pass


class UnrealizableSlope(ValidationFailure):
    """No n-invariant configuration with this slope exists."""

    pass


# =============================================================================
# Dynamics
# =============================================================================


class NotExtremum(ValidationFailure):
    """Pivot requested at a site whose neighbors do not share one value."""

    pass


class FixedSite(ValidationFailure):
    """Pivot requested at a site whose depth is frozen."""

    pass


class NotAnExcursion(ValidationFailure):
    """Resampling requested for a component that is not an excursion."""

    pass


class NotMinimum(ValidationFailure):
    """Minimum probability requested at a site that is not a local minimum."""

    pass


class InvariantViolated(ValidationFailure):
    """A coupled trajectory exceeded its depth deviation bound."""

    pass


# =============================================================================
# Enumeration / profiles
# =============================================================================


class EmptyBoundaryClass(ValidationFailure):
    """No boundary data exists within the requested distance of the geodesic."""

    pass


class EmptyConditionClass(ValidationFailure):
    """No configuration matches the conditioning constraints."""

    pass


class InvalidBoundary(ValidationFailure):
    """A boundary profile violates its Lipschitz or extendability conditions."""

    pass


class Infeasible(ValidationFailure):
    """The variational solver could not produce a valid profile."""

    pass
