import numpy as np
import pytest

from core.errors import NotHyperbolic, TrivialWord
from core.fuchsian import CIRCUMRADIUS, RELATOR, GroupWord, OctagonPresentation
from core.geometry import Isometry, hyperbolic_distance


class TestGroupWord:
    """
    Testing free reduction and word operations
    """

    @pytest.mark.parametrize("text, expected", [("aA", "1"), ("abBc", "ac"), ("1", "1"), ("dDcC", "1")])
    def test_free_reduction(self, text: str, expected: str):
        assert str(GroupWord.parse(text)) == expected

    def test_unknown_letter(self):
        with pytest.raises(ValueError):
            GroupWord.parse("abx")

    def test_inverse_power_conjugate(self):
        w = GroupWord("ab")
        assert str(w.inverse()) == "BA"
        assert str(w.power(-2)) == "BABA"
        assert str(w.conjugate_by(GroupWord("c"))) == "cabC"
        assert w.conjugate_by(GroupWord("c")).is_conjugate_to(w)

    def test_abelianization(self):
        assert list(RELATOR.abelianization()) == [0, 0, 0, 0]
        assert list(GroupWord("aabD").abelianization()) == [2, 1, 0, -1]


class TestRepresentation:
    """
    Testing the octagon side-pairing representation
    """

    def test_relator_is_identity(self, group: OctagonPresentation):
        assert group.evaluate(RELATOR).distance_to(Isometry.identity()) < 1e-9

    def test_homomorphism(self, group: OctagonPresentation):
        rng = np.random.default_rng(3)
        words = [w for w, _ in group.ball(3)]
        for i, j in rng.integers(0, len(words), size=(100, 2)):
            u, v = words[i], words[j]
            assert (group.evaluate(u) @ group.evaluate(v)).residual_to(group.evaluate(u * v)) < 1e-8

    def test_homomorphism_on_long_words(self, group: OctagonPresentation):
        """
        Coefficients of ball(4) elements reach the thousands; the residual must not scale with them
        """

        words = [w for w, _ in group.ball(4) if len(w) == 4]
        assert max(abs(group.evaluate(w).alpha) for w in words) > 100.0
        rng = np.random.default_rng(11)
        for i, j in rng.integers(0, len(words), size=(200, 2)):
            u, v = words[i], words[j]
            assert (group.evaluate(u) @ group.evaluate(v)).residual_to(group.evaluate(u * v)) < 1e-8

    @pytest.mark.parametrize("radius, size", [(0, 1), (1, 9), (2, 65), (3, 457)])
    def test_ball_sizes(self, group: OctagonPresentation, radius: int, size: int):
        assert group.ball_size(radius) == size

    def test_ball_is_shortlex(self, group: OctagonPresentation):
        assert [str(w) for w, _ in group.ball(1)] == ["1", "a", "A", "b", "B", "c", "C", "d", "D"]

    def test_ball_cap(self, group: OctagonPresentation):
        with pytest.raises(ValueError):
            group.ball(group.ball_cap + 1)

    def test_generators_are_hyperbolic(self, group: OctagonPresentation):
        for letter in "abcd":
            _, length = group.closed_geodesic(letter)
            assert length > 0
        with pytest.raises(TrivialWord):
            group.closed_geodesic("")

    def test_words_matching(self, group: OctagonPresentation):
        targets = [group.evaluate("ab"), group.evaluate("abc"), Isometry.rotation(0.1)]
        found = group.words_matching(targets, 2)
        assert str(found[0]) == "ab"
        assert found[1] is None
        assert found[2] is None


class TestReduction:
    """
    Testing point reduction into the octagon
    """

    @pytest.mark.parametrize("z", [0.9 + 0.1j, -0.5 - 0.8j, 0.05j, 0.999 * np.exp(2.0j)])
    def test_reduce_to_domain(self, group: OctagonPresentation, z: complex):
        reduced, word = group.reduce_to_domain(z)
        assert group.domain.contains(reduced, 1e-9)
        assert hyperbolic_distance(0.0, reduced) <= CIRCUMRADIUS + 1e-9
        assert abs(complex(group.evaluate(word).apply(z)) - reduced) < 1e-8

    def test_reduce_points_matches_scalar(self, group: OctagonPresentation):
        z = np.array([0.9 + 0.1j, -0.5 - 0.8j, 0.3])
        reduced, derivative = group.reduce_points(z)
        for k, point in enumerate(z):
            single, word = group.reduce_to_domain(point)
            assert abs(reduced[k] - single) < 1e-10
            assert abs(derivative[k] - complex(group.evaluate(word).derivative(point))) < 1e-8

    def test_outside_disk(self, group: OctagonPresentation):
        with pytest.raises(ValueError):
            group.reduce_to_domain(1.5)

    def test_relator_has_no_axis(self, group: OctagonPresentation):
        """
        The relator evaluates to the identity, which has no closed geodesic
        """

        with pytest.raises(NotHyperbolic):
            group.closed_geodesic(RELATOR)


class TestClosedGeodesics:
    """
    Testing axes of words whose axis passes near the center
    """

    @pytest.mark.parametrize("word", ["a", "aB", "Ab", "cD", "abcD"])
    def test_axis_is_invariant(self, group: OctagonPresentation, word: str):
        line, length = group.closed_geodesic(word)
        M = group.evaluate(word)
        repelling, attracting = M.fixed_points()
        assert line.start.close_to(repelling, 1e-10)
        assert line.end.close_to(attracting, 1e-10)
        moved = complex(M.apply(line.point(0.0)))
        assert line.distance_to_point(moved) < 1e-9
        assert abs(moved - complex(line.point(length))) < 1e-9
