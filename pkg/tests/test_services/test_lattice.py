"""
Tests for regions, height functions, dual labels and periodic configurations.
"""
import numpy as np
import pytest

from app.core.errors import PlaquetteInconsistent, Unreachable, ValidationFailure, ZeroSlope
from app.services.lattice import (
    HeightFunction,
    PeriodicConfig,
    Region,
    Slope,
    class_orientation,
    dual_of,
    geodesic_config,
    inner_boundary,
    lattice_distance,
    plaquette_is_trivial,
    reconstruct,
    slope_of,
    supporting_geodesic,
    validate_homomorphism,
)
from app.services.tree import ROOT, STANDARD_GEODESIC, TreeVertex


def _square() -> HeightFunction:
    values = {
        (0, 0): ROOT,
        (0, 1): TreeVertex((1,)),
        (1, 0): TreeVertex((1,)),
        (1, 1): TreeVertex((1, 2)),
    }
    return HeightFunction(region=Region.box((2, 2)), values=values)


class TestRegion:
    """Tests for finite lattice regions."""

    def test_box(self):
        """Test box size and row-major order."""
        region = Region.box((2, 3))

        assert len(region) == 6
        assert region.ordered[:3] == [(0, 0), (0, 1), (0, 2)]
        assert region.index[(1, 0)] == 3

    def test_box_with_origin(self):
        """Test that a box can start away from the origin."""
        region = Region.box((2,), origin=(5,))
        assert region.ordered == [(5,), (6,)]

    def test_empty_region_rejected(self):
        """Test that a region needs at least one cell."""
        with pytest.raises(ValidationFailure):
            Region.from_cells([])

    def test_inner_boundary(self):
        """Test that the inner boundary of a 3x3 box is its ring."""
        boundary = inner_boundary(Region.box((3, 3)))

        assert len(boundary) == 8
        assert (1, 1) not in boundary

    def test_lattice_distance(self):
        """Test BFS distance inside a box."""
        assert lattice_distance(Region.box((3, 3)), (0, 0), (2, 1)) == 3

    def test_lattice_distance_unreachable(self):
        """Test that separate components raise Unreachable."""
        region = Region.from_cells([(0,), (2,)])

        assert not region.is_connected
        with pytest.raises(Unreachable):
            lattice_distance(region, (0,), (2,))


class TestHeightFunction:
    """Tests for homomorphism checks and dual labels."""

    def test_valid_homomorphism(self):
        """Test that adjacent values at distance 1 pass."""
        assert validate_homomorphism(_square())

    def test_repeated_value_fails(self):
        """Test that equal adjacent values fail."""
        h = HeightFunction(
            region=Region.box((3,)),
            values={(0,): ROOT, (1,): TreeVertex((1,)), (2,): TreeVertex((1,))},
        )
        assert not validate_homomorphism(h)

    def test_missing_value_fails(self):
        """Test that a region cell without a value fails."""
        h = HeightFunction(region=Region.box((2,)), values={(0,): ROOT})
        assert not validate_homomorphism(h)

    def test_dual_labels(self):
        """Test the generator read off each edge."""
        labels = dual_of(_square())

        assert labels[((0, 0), 0)] == 1
        assert labels[((0, 0), 1)] == 1
        assert labels[((0, 1), 0)] == 2
        assert labels[((1, 0), 1)] == 2

    def test_reconstruct_inverts_dual(self):
        """Test that labels plus h(base) give back the height function."""
        h = _square()
        rebuilt = reconstruct(dual_of(h), ROOT, (0, 0))

        assert rebuilt.values == h.values

    def test_reconstruct_rejects_bad_plaquette(self):
        """Test that a nontrivial plaquette word raises."""
        labels = {((0, 0), 0): 1, ((1, 0), 1): 2, ((0, 1), 0): 3, ((0, 0), 1): 1}
        with pytest.raises(PlaquetteInconsistent):
            reconstruct(labels, ROOT, (0, 0))

    def test_plaquette_words(self):
        """Test the two trivial plaquette patterns."""
        assert plaquette_is_trivial(1, 1, 2, 2)
        assert plaquette_is_trivial(1, 2, 2, 1)
        assert not plaquette_is_trivial(1, 2, 1, 2)
        assert not plaquette_is_trivial(1, 2, 3, 1)


class TestSlope:
    """Tests for slopes p/n."""

    def test_text_form(self):
        """Test numerators over n."""
        assert str(Slope((2, 0), 4)) == "2/4,0/4"

    def test_parse(self):
        """Test fraction parsing with floor(s n)."""
        assert Slope.parse("1/2,0", 4, 2) == Slope((2, 0), 4)
        assert Slope.parse("-1/2", 4) == Slope((-2,), 4)

    def test_parse_broadcasts_zero(self):
        """Test that a lone 0 means the zero slope in every direction."""
        assert Slope.parse("0", 4, 3) == Slope((0, 0, 0), 4)

    def test_parse_wrong_length(self):
        """Test that a component count other than m is rejected."""
        with pytest.raises(ValidationFailure):
            Slope.parse("1/2", 4, 2)

    def test_parse_garbage(self):
        """Test that non-fractions are rejected."""
        with pytest.raises(ValidationFailure):
            Slope.parse("half", 4, 1)

    def test_steeper_than_one_rejected(self):
        """Test that |s_k| <= 1 is enforced."""
        with pytest.raises(ValidationFailure):
            Slope((5,), 4)

    def test_realizability(self):
        """Test the parity condition p_k = n mod 2 and the even-shift rule."""
        assert Slope((2, 0), 4).is_realizable()
        assert not Slope((1,), 2).satisfies_parity()
        assert not Slope((1,), 2).is_realizable()
        assert Slope((1, 3), 3).satisfies_parity()
        assert not Slope((1, 3), 3).is_realizable()
        assert not Slope((0,), 3).satisfies_parity()

    def test_canonical_sign(self):
        """Test that the first nonzero component becomes positive."""
        assert Slope((0, -2, 2), 4).canonical() == Slope((0, 2, -2), 4)
        assert Slope((2, -2), 4).canonical() == Slope((2, -2), 4)


class TestPeriodicConfig:
    """Tests for n-invariant configurations."""

    def test_shape_checked(self):
        """Test that label arrays of the wrong shape are rejected."""
        with pytest.raises(ValidationFailure):
            PeriodicConfig(2, 2, 3, np.ones((1, 2)))

    def test_label_range_checked(self):
        """Test that labels above d are rejected."""
        with pytest.raises(ValidationFailure):
            PeriodicConfig(1, 2, 3, np.array([[1, 4]]))

    def test_period_at_least_two(self):
        """Test that n = 1 is rejected."""
        with pytest.raises(ValidationFailure):
            PeriodicConfig(1, 1, 3, np.array([[1]]))

    def test_flat_values(self, flat_line: PeriodicConfig):
        """Test that the flat line alternates between r and a_1."""
        assert flat_line.value((0,)) == ROOT
        assert flat_line.value((1,)) == TreeVertex((1,))
        assert flat_line.value((2,)) == ROOT
        assert flat_line.value((-1,)) == TreeVertex((1,))

    def test_geodesic_values(self):
        """Test that values outside the fundamental cell follow the translation."""
        cfg = geodesic_config(1, 2, 3)

        assert cfg.labels.tolist() == [[1, 2]]
        assert cfg.monodromy(0) == (1, 2)
        assert cfg.value((2,)) == TreeVertex((1, 2))
        assert cfg.value((-1,)) == TreeVertex((2,))

    def test_bad_plaquettes_found(self):
        """Test that crossing labels 1 and 2 break every plaquette."""
        cfg = PeriodicConfig(2, 2, 3, np.stack([np.ones((2, 2)), 2 * np.ones((2, 2))]))

        assert len(cfg.plaquette_violations()) == 4
        assert not cfg.is_valid()
        with pytest.raises(PlaquetteInconsistent):
            cfg.validate()

    def test_zigzag_is_valid(self, geodesic_plane: PeriodicConfig):
        """Test that the geodesic configuration passes validation."""
        geodesic_plane.validate()
        assert geodesic_plane.translations() == [TreeVertex((1, 2)), ROOT]


class TestSlopeAndGeodesic:
    """Tests for measured slopes and supporting geodesics."""

    def test_flat_slope_is_zero(self, flat_line: PeriodicConfig):
        """Test the flat configuration's slope."""
        assert slope_of(flat_line) == Slope((0,), 2)

    def test_geodesic_slope(self, geodesic_plane: PeriodicConfig):
        """Test the slope of the zigzag."""
        assert str(slope_of(geodesic_plane)) == "2/2,0/2"

    def test_supporting_geodesic(self):
        """Test that the zigzag's axis is the standard geodesic."""
        assert supporting_geodesic(geodesic_config(1, 2, 3)) == STANDARD_GEODESIC

    def test_zero_slope_has_no_supporting_geodesic(self, flat_line: PeriodicConfig):
        """Test that zero slope raises ZeroSlope."""
        with pytest.raises(ZeroSlope):
            supporting_geodesic(flat_line)

    def test_canonical_anchor(self):
        """Test that re-pinning moves the anchor back onto the axis."""
        cfg = PeriodicConfig(1, 2, 3, np.array([[1, 2]]), TreeVertex((3,)))

        assert cfg.canonical().anchor == ROOT
        assert slope_of(cfg.canonical()) == slope_of(cfg)

    def test_class_orientation(self, flat_line: PeriodicConfig):
        """Test orientation against the standard geodesic."""
        forward = geodesic_config(1, 2, 3)
        backward = PeriodicConfig(1, 2, 3, np.array([[2, 1]]))

        assert class_orientation(forward, Slope((2,), 2)) == 1
        assert class_orientation(backward, Slope((2,), 2)) == -1
        assert class_orientation(flat_line, Slope((0,), 2)) == 1
        assert class_orientation(forward, Slope((0,), 2)) is None
