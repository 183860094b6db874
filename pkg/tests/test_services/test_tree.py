"""
Tests for word arithmetic on the d-regular tree.

Tests vertices, ends, geodesics, depth and translations.
"""
import pytest

from app.core.errors import EqualEnds, ValidationFailure
from app.services.tree import (
    ROOT,
    STANDARD_GEODESIC,
    Geodesic,
    TreeEnd,
    TreeVertex,
    apply_generator,
    axis_geodesic,
    busemann_depth,
    cyclic_length,
    cyclic_reduction,
    depth,
    down_generator,
    inverse,
    meeting_height,
    multiply,
    neighbors,
    reduce_word,
    toward_end,
    translation,
    tree_distance,
    validate_vertex,
)


def _ball(d: int, radius: int) -> list[TreeVertex]:
    out, frontier = [ROOT], [ROOT]
    for _ in range(radius):
        frontier = [w for v in frontier for w in neighbors(v, d) if len(w) > len(v)]
        out += frontier
    return out


class TestTreeVertex:
    """Tests for vertices as reduced words."""

    def test_root_prints_as_e(self):
        """Test that the root prints as 'e' and parses back."""
        assert str(ROOT) == "e"
        assert TreeVertex.parse("e") == ROOT

    def test_parse_comma_separated(self):
        """Test that comma-separated letters parse to a word."""
        v = TreeVertex.parse("1,2,3")

        assert v.word == (1, 2, 3)
        assert str(v) == "1,2,3"

    def test_unreduced_word_rejected(self):
        """Test that a word with a repeated letter is rejected."""
        with pytest.raises(ValidationFailure):
            TreeVertex((1, 1))

    def test_zero_letter_rejected(self):
        """Test that generator indices start at 1."""
        with pytest.raises(ValidationFailure):
            TreeVertex((0,))

    def test_garbage_text_rejected(self):
        """Test that non-numeric text is not a vertex."""
        with pytest.raises(ValidationFailure):
            TreeVertex.parse("a,b")

    def test_validate_vertex_degree(self):
        """Test that letters above d are rejected."""
        validate_vertex(TreeVertex((1, 3)), 3)
        with pytest.raises(ValidationFailure):
            validate_vertex(TreeVertex((1, 4)), 3)


class TestWordArithmetic:
    """Tests for products, inverses and distances."""

    def test_reduce_word(self):
        """Test that adjacent equal letters cancel repeatedly."""
        assert reduce_word((1, 2, 2, 1, 3)) == (3,)
        assert reduce_word(()) == ()

    def test_apply_generator_cancels(self):
        """Test that right multiplication cancels a trailing letter."""
        assert apply_generator(TreeVertex((1, 2)), 2) == TreeVertex((1,))
        assert apply_generator(TreeVertex((1, 2)), 3) == TreeVertex((1, 2, 3))

    def test_neighbors_count(self):
        """Test that every vertex has exactly d neighbors at distance 1."""
        for v in _ball(3, 2):
            around = neighbors(v, 3)
            assert len(set(around)) == 3
            assert all(tree_distance(v, w) == 1 for w in around)

    def test_multiply_inverse(self):
        """Test that v * v^-1 is the root."""
        v = TreeVertex((1, 2, 3, 1))
        assert multiply(v, inverse(v)) == ROOT

    def test_distance(self):
        """Test the distance through the common prefix."""
        assert tree_distance(TreeVertex((1, 2)), TreeVertex((1, 3))) == 2
        assert tree_distance(TreeVertex((1, 2)), TreeVertex((2,))) == 3
        assert tree_distance(ROOT, ROOT) == 0

    def test_distance_is_left_invariant(self):
        """Test that d(g v, g w) = d(v, w)."""
        g = TreeVertex((3, 1))
        for v in _ball(3, 2):
            for w in _ball(3, 1):
                assert tree_distance(multiply(g, v), multiply(g, w)) == tree_distance(v, w)

    def test_cyclic_reduction(self):
        """Test the split into conjugator and core."""
        assert cyclic_reduction((1, 2, 3, 1)) == ((1,), (2, 3))
        assert cyclic_reduction((1, 2, 1)) == ((1,), (2,))
        assert cyclic_reduction((1, 2)) == ((), (1, 2))

    def test_cyclic_length(self):
        """Test that conjugation does not change the translation length."""
        assert cyclic_length((3, 1, 2, 3)) == 2
        assert cyclic_length(()) == 0


class TestTreeEnd:
    """Tests for eventually periodic rays."""

    def test_normalizes_prefix(self):
        """Test that a prefix absorbed by the period is dropped."""
        assert TreeEnd((2,), (1, 2)) == TreeEnd((), (2, 1))

    def test_normalizes_period(self):
        """Test that a repeated period is shortened."""
        assert TreeEnd((), (1, 2, 1, 2)) == TreeEnd((), (1, 2))

    def test_unreduced_ray_rejected(self):
        """Test that a period closing up on itself is rejected."""
        with pytest.raises(ValidationFailure):
            TreeEnd((), (1, 2, 1))

    def test_letters_and_text(self):
        """Test letter access and the text form."""
        end = TreeEnd((3,), (1, 2))

        assert end.ray_prefix(5) == (3, 1, 2, 1, 2)
        assert str(end) == "3(1,2)"
        assert str(TreeEnd((), (1, 2))) == "(1,2)"

    def test_meeting_height(self):
        """Test the common prefix length of two ends."""
        assert meeting_height(TreeEnd((), (1, 2)), TreeEnd((), (1, 3))) == 1
        assert meeting_height(TreeEnd((), (1, 2)), TreeEnd((), (2, 1))) == 0
        assert meeting_height(TreeEnd((1, 2, 3), (1, 2)), TreeEnd((1, 2, 3), (2, 1))) == 3

    def test_equal_ends_have_no_meeting_height(self):
        """Test that equal ends raise EqualEnds."""
        with pytest.raises(EqualEnds):
            meeting_height(TreeEnd((2,), (1, 2)), TreeEnd((), (2, 1)))


class TestGeodesic:
    """Tests for geodesics and depth."""

    def test_standard_points(self):
        """Test points on both sides of the standard geodesic."""
        g = STANDARD_GEODESIC

        assert g.point(0) == ROOT
        assert g.point(2) == TreeVertex((1, 2))
        assert g.point(-1) == TreeVertex((2,))

    def test_rays_must_differ_at_root(self):
        """Test that both rays leaving through one letter are rejected."""
        with pytest.raises(ValidationFailure):
            Geodesic(forward=TreeEnd((), (1, 2)), backward=TreeEnd((), (1, 3)))

    def test_depth_along_geodesic(self):
        """Test that depth on the geodesic equals the position."""
        for k in range(-4, 5):
            assert depth(STANDARD_GEODESIC.point(k), STANDARD_GEODESIC) == k

    def test_depth_off_geodesic(self):
        """Test that leaving the geodesic adds the distance to it."""
        assert depth(TreeVertex((3,)), STANDARD_GEODESIC) == 1
        assert depth(TreeVertex((1, 3, 1)), STANDARD_GEODESIC) == 3

    def test_depth_is_busemann_from_backward_end(self):
        """Test that depth equals the Busemann function of the backward end."""
        for v in _ball(3, 3):
            assert busemann_depth(v, STANDARD_GEODESIC.backward) == depth(v, STANDARD_GEODESIC)

    def test_down_generator(self):
        """Test that exactly one neighbor lies one level lower."""
        assert down_generator(ROOT, STANDARD_GEODESIC) == 2
        for v in _ball(3, 3):
            down = down_generator(v, STANDARD_GEODESIC)
            level = depth(v, STANDARD_GEODESIC)
            for i in range(1, 4):
                expected = level - 1 if i == down else level + 1
                assert depth(apply_generator(v, i), STANDARD_GEODESIC) == expected

    def test_toward_end(self):
        """Test walking from a vertex toward an end."""
        omega = STANDARD_GEODESIC.backward

        assert toward_end(TreeVertex((1, 2)), omega, 1) == TreeVertex((1,))
        assert toward_end(TreeVertex((1, 2)), omega, 3) == TreeVertex((2,))
        assert toward_end(ROOT, omega, 2) == TreeVertex((2, 1))

    def test_axis_geodesic(self):
        """Test the axis of a cyclically reduced word."""
        g = axis_geodesic((1, 2))

        assert g == STANDARD_GEODESIC
        with pytest.raises(ValidationFailure):
            axis_geodesic((1, 2, 1))


class TestTranslation:
    """Tests for translations along the standard geodesic."""

    def test_forward_and_backward(self):
        """Test even shifts in both directions."""
        assert translation(STANDARD_GEODESIC, 4) == TreeVertex((1, 2, 1, 2))
        assert translation(STANDARD_GEODESIC, -2) == TreeVertex((2, 1))
        assert translation(STANDARD_GEODESIC, 0) == ROOT

    def test_odd_shift_rejected(self):
        """Test that an odd shift is not a translation."""
        with pytest.raises(ValidationFailure):
            translation(STANDARD_GEODESIC, 1)

    def test_translation_moves_points(self):
        """Test that T g(j) = g(j + p)."""
        t = translation(STANDARD_GEODESIC, 2)
        for j in range(-3, 4):
            assert multiply(t, STANDARD_GEODESIC.point(j)) == STANDARD_GEODESIC.point(j + 2)
