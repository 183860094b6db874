"""
Pytest configuration and fixtures for the tree homomorphism tests.

Provides:
- Test client with rate limiting switched off
- Small periodic configurations and chain states with hand-checked values
"""
from collections.abc import Generator

import numpy as np
import pytest
from fastapi.testclient import TestClient

from app.core.rate_limit import limiter
from app.main import app
from app.services.glauber import ChainState
from app.services.lattice import PeriodicConfig, flat_config, geodesic_config
from app.services.profiles import BoundaryProfile, ProfileGrid
from app.services.tree import ROOT


# =============================================================================
# API Fixtures
# =============================================================================


@pytest.fixture(name="client")
def client_fixture() -> Generator[TestClient, None, None]:
    """Create a test client; the in-memory limiter would trip on heavy routes."""
    enabled = limiter.enabled
    limiter.enabled = False
    with TestClient(app) as client:
        yield client
    limiter.enabled = enabled
    app.dependency_overrides.clear()


# =============================================================================
# Configuration Fixtures
# =============================================================================


@pytest.fixture(name="flat_line")
def flat_line_fixture() -> PeriodicConfig:
    """m=1, n=2, d=3 with both labels 1: values r, a_1."""
    return flat_config(1, 2, 3)


@pytest.fixture(name="step_line")
def step_line_fixture() -> PeriodicConfig:
    """m=1, n=4, d=3 with labels 1,1,2,2: values r, a_1, r, a_2."""
    return PeriodicConfig(1, 4, 3, np.array([[1, 1, 2, 2]]), ROOT)


@pytest.fixture(name="valley_line")
def valley_line_fixture() -> PeriodicConfig:
    """m=1, n=4, d=3 with all labels 2: site 1 is a minimum with two excursions."""
    return PeriodicConfig(1, 4, 3, np.full((1, 4), 2), ROOT)


@pytest.fixture(name="loose_line")
def loose_line_fixture() -> PeriodicConfig:
    """m=1, n=4, d=3 with labels 3,3,1,2 and slope 2/4: site 2 has one excursion and one loose edge."""
    return PeriodicConfig(1, 4, 3, np.array([[3, 3, 1, 2]]), ROOT)


@pytest.fixture(name="geodesic_plane")
def geodesic_plane_fixture() -> PeriodicConfig:
    """The slope (1, 0) zigzag on the 2-torus of period 2."""
    return geodesic_config(2, 2, 3)


@pytest.fixture(name="step_state")
def step_state_fixture(step_line: PeriodicConfig) -> ChainState:
    return ChainState.from_config(step_line, seed=11)


# =============================================================================
# Profile Fixtures
# =============================================================================


@pytest.fixture(name="unit_grid")
def unit_grid_fixture() -> ProfileGrid:
    """Unit square with eps = 1/4 (25 points, 9 interior)."""
    return ProfileGrid.unit_box(2, 0.25)


@pytest.fixture(name="half_slope_boundary")
def half_slope_boundary_fixture(unit_grid: ProfileGrid) -> BoundaryProfile:
    """h1(x) = x1 / 2 on the boundary of the unit square."""
    return BoundaryProfile.from_function(unit_grid, lambda x: x[0] / 2)

