"""
Tests for continuum profiles and the variational solver.
"""
import math
from fractions import Fraction

import numpy as np
import pytest

from app.core.errors import Infeasible, InvalidBoundary, ValidationFailure
from app.services.enumeration import CountResult, SurfaceTensionTable
from app.services.lattice import HeightFunction, Region
from app.services.profiles import (
    AsymptoticProfile,
    BoundaryProfile,
    MeetingHeights,
    ProfileGrid,
    QuadraticSurfaceTension,
    TabulatedSurfaceTension,
    boundary_convergence_check,
    extend_boundary_profile,
    hp_ball_membership,
    macroscopic_entropy,
    minimize_entropy,
    minimize_entropy_reference,
    path_property_check,
    validate_meeting_heights,
)
from app.services.tree import ROOT, TreeEnd, TreeVertex


def _line_grid() -> ProfileGrid:
    return ProfileGrid.from_blocks(1, 0.25, [[0], [1], [2], [3]])


def _two_labels() -> MeetingHeights:
    return MeetingHeights(k=2, a=np.array([[0.0, 0.2], [0.2, 0.0]]))


class TestMeetingHeights:
    """Tests for meeting height matrices."""

    def test_equal_heights(self):
        """Test that a constant off-diagonal is ultrametric."""
        heights = MeetingHeights(k=3, a=np.array([[0, 1, 1], [1, 0, 1], [1, 1, 0]]))
        assert validate_meeting_heights(heights)

    def test_implication_broken(self):
        """Test a_ij < a_ik without a_jk = a_ik."""
        heights = MeetingHeights(k=3, a=np.array([[0, 1, 2], [1, 0, 1], [2, 1, 0]]))
        assert not validate_meeting_heights(heights)

    def test_asymmetric(self):
        """Test that an asymmetric matrix is rejected."""
        heights = MeetingHeights(k=2, a=np.array([[0, 1], [2, 0]]))
        assert not validate_meeting_heights(heights)

    def test_shape_checked(self):
        """Test that k must match the matrix."""
        with pytest.raises(ValidationFailure):
            MeetingHeights(k=2, a=np.zeros((3, 3)))


class TestProfileGrid:
    """Tests for eps-grids."""

    def test_unit_box(self, unit_grid: ProfileGrid):
        """Test point, boundary and block counts."""
        assert len(unit_grid) == 25
        assert len(unit_grid.boundary) == 16
        assert len(unit_grid.interior) == 9
        assert unit_grid.volume == pytest.approx(1.0)

    def test_eps_must_divide(self):
        """Test that eps = 0.3 is rejected."""
        with pytest.raises(ValidationFailure):
            ProfileGrid.unit_box(2, 0.3)

    def test_from_points(self):
        """Test recovering blocks from their corners."""
        grid = ProfileGrid.from_points(1, 0.5, [(0,), (1,), (2,)])
        assert sorted(grid.block_cells) == [(0,), (1,)]


class TestAsymptoticProfile:
    """Tests for profile validation and the path property."""

    def test_labels_split_by_valley(self):
        """Test that labels may switch where h1 dips below the meeting height."""
        profile = AsymptoticProfile(
            grid=_line_grid(),
            h1=np.array([0.5, 0.25, 0.0, 0.25, 0.5]),
            h2=np.array([1, 1, 1, 2, 2]),
            heights=_two_labels(),
        )

        assert path_property_check(profile)
        assert profile.is_valid()

    def test_labels_joined_above_meeting_height(self):
        """Test that two labels in one high component fail."""
        profile = AsymptoticProfile(
            grid=_line_grid(),
            h1=np.full(5, 0.5),
            h2=np.array([1, 1, 1, 2, 2]),
            heights=_two_labels(),
        )

        assert not path_property_check(profile)
        assert not profile.is_valid()

    def test_lipschitz_violation(self):
        """Test that a jump above eps is reported."""
        profile = AsymptoticProfile(
            grid=_line_grid(),
            h1=np.array([0.0, 0.5, 0.5, 0.5, 0.5]),
            h2=np.ones(5),
            heights=MeetingHeights.single(),
        )

        assert profile.lipschitz_excess() == pytest.approx(0.25)
        with pytest.raises(ValidationFailure):
            profile.validate()


class TestBoundaryProfile:
    """Tests for boundary data and its extension."""

    def test_extension(self, unit_grid: ProfileGrid, half_slope_boundary: BoundaryProfile):
        """Test that the lower envelope keeps the boundary and is valid."""
        profile = extend_boundary_profile(half_slope_boundary)

        assert profile.is_valid()
        assert np.allclose(profile.h1[unit_grid.boundary], half_slope_boundary.h1)

    def test_too_steep(self, unit_grid: ProfileGrid):
        """Test that boundary data steeper than 1 is rejected."""
        boundary = BoundaryProfile.from_function(unit_grid, lambda x: 3 * x[0])

        assert not boundary.is_valid()
        with pytest.raises(InvalidBoundary):
            extend_boundary_profile(boundary)

    def test_size_checked(self, unit_grid: ProfileGrid):
        """Test that boundary arrays must match the boundary points."""
        with pytest.raises(ValidationFailure):
            BoundaryProfile(unit_grid, np.zeros(3), np.ones(3), MeetingHeights.single())


class TestSurfaceTension:
    """Tests for surface tension models."""

    def test_quadratic(self):
        """Test value and gradient of |s - s0|^2."""
        ent = QuadraticSurfaceTension(minimizer=(0.5, 0.0))

        assert ent.value(np.array([[0.5, 0.0], [1.0, 1.0]])) == pytest.approx([0.0, 1.25])
        assert np.allclose(ent.gradient(np.array([1.0, 1.0])), [1.0, 2.0])

    def test_tabulated(self):
        """Test linear interpolation between table slopes."""
        table = SurfaceTensionTable(
            m=1,
            d=3,
            entries={
                (4, (Fraction(0),)): CountResult(count=15, size=4),
                (4, (Fraction(1, 2),)): CountResult(count=8, size=4),
                (4, (Fraction(1),)): CountResult(count=1, size=4),
            },
        )
        ent = TabulatedSurfaceTension(table)
        expected = (-math.log(15) / 4 - math.log(8) / 4) / 2

        assert ent.value(np.array([[0.25]]))[0] == pytest.approx(expected)
        assert ent.value(np.array([[-0.25]]))[0] == pytest.approx(expected)

    def test_tabulated_needs_two_slopes(self):
        """Test that a one-point table cannot be interpolated."""
        table = SurfaceTensionTable(m=1, d=3, entries={(4, (Fraction(0),)): CountResult(15, 4)})
        with pytest.raises(ValidationFailure):
            TabulatedSurfaceTension(table)


class TestMinimizeEntropy:
    """Tests for the variational solver."""

    def test_linear_boundary(self, unit_grid: ProfileGrid, half_slope_boundary: BoundaryProfile):
        """Test that a planar boundary gives the plane."""
        solution = minimize_entropy(half_slope_boundary, QuadraticSurfaceTension((0.0, 0.0)))

        assert solution.objective == pytest.approx(0.25, abs=1e-6)
        assert np.allclose(solution.profile.h1, unit_grid.points[:, 0] / 2, atol=1e-6)
        assert solution.admissible

    def test_matching_minimizer(self, half_slope_boundary: BoundaryProfile):
        """Test zero entropy when the boundary slope is the minimizer."""
        solution = minimize_entropy(half_slope_boundary, QuadraticSurfaceTension((0.5, 0.0)))
        assert solution.objective == pytest.approx(0.0, abs=1e-9)

    def test_constant_boundary(self):
        """Test that a constant boundary stays flat."""
        grid = ProfileGrid.unit_box(2, 0.5)
        boundary = BoundaryProfile.from_function(grid, lambda x: 1.0)
        solution = minimize_entropy(boundary, QuadraticSurfaceTension((0.0, 0.0)))

        assert np.allclose(solution.profile.h1, 1.0)
        assert solution.objective == pytest.approx(0.0)

    def test_descent_properties(self, unit_grid: ProfileGrid):
        """Test monotone history, the Lipschitz cone and fixed boundary values."""
        boundary = BoundaryProfile.from_function(unit_grid, lambda x: abs(x[0] - 0.5) + 0.25)
        solution = minimize_entropy(boundary, QuadraticSurfaceTension((0.0, 0.0)))

        assert all(b <= a + 1e-12 for a, b in zip(solution.history, solution.history[1:]))
        assert solution.profile.lipschitz_excess() <= 1e-9
        assert np.allclose(solution.profile.h1[unit_grid.boundary], boundary.h1)
        assert macroscopic_entropy(solution.profile, QuadraticSurfaceTension((0.0, 0.0))) == pytest.approx(
            solution.objective
        )

    def test_reference_agrees(self, half_slope_boundary: BoundaryProfile):
        """Test the descent result against the SLSQP reference."""
        ent = QuadraticSurfaceTension((0.0, 0.0))
        descent = minimize_entropy(half_slope_boundary, ent)
        reference = minimize_entropy_reference(half_slope_boundary, ent)

        assert reference.objective == pytest.approx(descent.objective, abs=1e-3)

    def test_infeasible_boundary(self, unit_grid: ProfileGrid):
        """Test that an invalid boundary is infeasible."""
        boundary = BoundaryProfile.from_function(unit_grid, lambda x: 3 * x[0])
        with pytest.raises(Infeasible):
            minimize_entropy(boundary, QuadraticSurfaceTension((0.0, 0.0)))


class TestDiscreteComparison:
    """Tests against discrete height functions."""

    def test_hp_ball(self):
        """Test the normalized height distance on a zigzag."""
        profile = AsymptoticProfile(_line_grid(), np.zeros(5), np.ones(5), MeetingHeights.single())
        values = {(x,): ROOT if x % 2 == 0 else TreeVertex((1,)) for x in range(5)}
        h_n = HeightFunction(region=Region.box((5,)), values=values)

        assert hp_ball_membership(h_n, profile, 0.25, 0.25)
        assert not hp_ball_membership(h_n, profile, 0.1, 0.25)

    def test_hp_ball_coarse_grid(self):
        """Test that a coarser eps-grid only looks at its own points."""
        profile = AsymptoticProfile(_line_grid(), np.zeros(5), np.ones(5), MeetingHeights.single())
        values = {(x,): ROOT if x % 2 == 0 else TreeVertex((1,)) for x in range(5)}
        h_n = HeightFunction(region=Region.box((5,)), values=values)

        assert hp_ball_membership(h_n, profile, 0.1, 0.5)
        with pytest.raises(ValidationFailure):
            hp_ball_membership(h_n, profile, 0.1, 0.3)

    def test_boundary_convergence(self):
        """Test that matching discrete data has zero distances."""
        boundary = BoundaryProfile(_line_grid(), np.array([0.0, 0.5]), np.array([1, 1]), MeetingHeights.single())
        values = {(0,): ROOT, (1,): TreeVertex((1,)), (2,): ROOT, (3,): TreeVertex((1,)), (4,): TreeVertex((1, 2))}
        h_n = HeightFunction(region=Region.box((5,)), values=values)
        report = boundary_convergence_check([(4, h_n, [TreeEnd((), (1, 2))])], boundary)

        assert report.rows[0].height_sup == pytest.approx(0.0)
        assert report.rows[0].ray_sup == pytest.approx(0.0)
        assert report.to_csv().startswith("n,height_sup,ray_sup,meeting_deviation\n")

    def test_wrong_number_of_ends(self):
        """Test that one end per label is required."""
        boundary = BoundaryProfile(_line_grid(), np.zeros(2), np.ones(2), MeetingHeights.single())
        h_n = HeightFunction(region=Region.box((5,)), values={(x,): ROOT for x in range(5)})
        with pytest.raises(ValidationFailure):
            boundary_convergence_check([(4, h_n, [])], boundary)
