import numpy as np
import pytest

from core.errors import NotSymplectic, RelatorViolation
from core.fuchsian import GENERATORS, RELATOR, GroupWord, OctagonPresentation
from lab.boundary_maps import Earthquake, FixedPointBoundaryMap
from lab.cocycles import orientation_cocycle, sample_boundary_tuples
from lab.harness import twist_rows
from lab.mcg import (
    J,
    TwistAutomorphism,
    abelianization_rank,
    act_on_cocycle,
    boundary_map_fixed_point,
    cocycle_agreement,
    cross_validate,
    equivariance_ratio,
    h1_matrix,
    three_region_experiment,
    transvection,
    twist_direction,
    twist_images,
    twist_word,
)
from models.experiment import ExperimentConfig

WORDS = ["1", "a", "B", "cd", "aB", "dcba", "abcd", "Dc"]


@pytest.fixture(scope="module")
def tau_a() -> TwistAutomorphism:
    return twist_images("a")


@pytest.fixture(scope="module")
def tau_a_map(group: OctagonPresentation, tau_a: TwistAutomorphism) -> FixedPointBoundaryMap:
    return boundary_map_fixed_point(group, tau_a, 6)


@pytest.fixture(scope="module")
def quake(group: OctagonPresentation, tau_a: TwistAutomorphism) -> Earthquake:
    E = Earthquake(group, "a")
    if twist_direction(E, tau_a) < 0:
        E = Earthquake(group, "a", direction=-1)
    return E


class TestTwistAutomorphisms:
    """
    Testing Dehn twists as automorphisms of the group
    """

    def test_images(self, tau_a: TwistAutomorphism):
        assert str(tau_a.apply("b")) == "bA"
        assert str(tau_a.apply("a")) == "a"
        assert str(tau_a.inverse().apply("b")) == "ba"

    @pytest.mark.parametrize("curve", list(GENERATORS))
    def test_relator_is_preserved(self, curve: str):
        phi = twist_images(curve)
        assert phi.apply(RELATOR).is_conjugate_to(RELATOR)

    def test_unknown_curve(self):
        with pytest.raises(ValueError):
            twist_images("x")
        with pytest.raises(ValueError):
            twist_word("ax")

    @pytest.mark.parametrize("text", ["", "1", "e"])
    def test_identity_word(self, text: str):
        phi = twist_word(text)
        assert all(str(phi.apply(x)) == x for x in GENERATORS)

    def test_inverse(self, tau_a: TwistAutomorphism, group: OctagonPresentation):
        both = tau_a @ tau_a.inverse()
        assert all(str(both.apply(x)) == x for x in GENERATORS)
        assert tau_a.inverse_residual(group) < 1e-9
        assert twist_word("aBc").inverse_residual(group) < 1e-9

    def test_broken_automorphism(self):
        images = {x: GroupWord(x) for x in GENERATORS}
        images["a"] = GroupWord("aa")
        phi = TwistAutomorphism(images, dict(images), "broken")
        with pytest.raises(RelatorViolation):
            phi.check_relator()


class TestHomologyAction:
    """
    Testing the integer action on H1
    """

    def test_twist_is_transvection(self):
        for k, curve in enumerate(GENERATORS):
            v = np.zeros(4, dtype=np.int64)
            v[k] = 1
            assert np.array_equal(h1_matrix(twist_images(curve)), transvection(v))

    def test_b_goes_to_b_minus_a(self, tau_a: TwistAutomorphism):
        assert list(h1_matrix(tau_a)[:, 1]) == [-1, 1, 0, 0]

    @pytest.mark.parametrize("word", WORDS)
    def test_symplectic(self, word: str):
        M = h1_matrix(twist_word(word))
        assert np.array_equal(M.T @ J @ M, J)

    def test_identity(self):
        assert np.array_equal(h1_matrix(twist_word("1")), np.eye(4, dtype=np.int64))

    def test_homomorphism(self, tau_a: TwistAutomorphism):
        tau_b = twist_images("b")
        assert np.array_equal(h1_matrix(tau_a @ tau_b), h1_matrix(tau_a) @ h1_matrix(tau_b))
        assert np.array_equal(h1_matrix(tau_a.power(3)), np.linalg.matrix_power(h1_matrix(tau_a), 3))
        assert np.array_equal(h1_matrix(tau_a.power(-1)), h1_matrix(tau_a.inverse()))

    def test_not_symplectic(self):
        images = {x: GroupWord(x) for x in GENERATORS}
        images["a"] = GroupWord("aa")
        with pytest.raises(NotSymplectic):
            h1_matrix(TwistAutomorphism(images, dict(images), "doubling"))

    def test_abelianization_rank(self, group: OctagonPresentation):
        assert abelianization_rank(group) == 4


class TestBoundaryAction:
    """
    Testing twists acting on the boundary circle and on cocycles
    """

    def test_identity_fixed_point_map(self, group: OctagonPresentation):
        F = boundary_map_fixed_point(group, TwistAutomorphism.identity(), 3)
        theta = np.linspace(0.1, 6.0, 20)
        assert np.max(np.abs(F(theta) - theta)) < 1e-12

    @pytest.mark.parametrize("curve", list(GENERATORS))
    def test_long_word_tables(self, group: OctagonPresentation, curve: str):
        F = boundary_map_fixed_point(group, twist_images(curve), 6)
        assert F.accuracy < 1e-2
        assert F.preserves_order(sample_boundary_tuples(3, 50, seed=3, min_separation=0.05))

    def test_equivariance(self, group: OctagonPresentation, tau_a: TwistAutomorphism, tau_a_map: FixedPointBoundaryMap):
        points = sample_boundary_tuples(1, 20, seed=2)[:, 0]
        assert equivariance_ratio(tau_a_map, tau_a, group, points) <= 1.0

    def test_wrong_automorphism_breaks_equivariance(self, group: OctagonPresentation, tau_a_map: FixedPointBoundaryMap):
        points = sample_boundary_tuples(1, 20, seed=2)[:, 0]
        assert equivariance_ratio(tau_a_map, twist_images("b"), group, points) > 1.0

    def test_orientation_is_fixed(self, group: OctagonPresentation, tau_a: TwistAutomorphism):
        F = boundary_map_fixed_point(group, tau_a, 4)
        Or = orientation_cocycle()
        triples = sample_boundary_tuples(3, 50, seed=4, min_separation=0.05)
        assert np.array_equal(act_on_cocycle(F, Or)(triples), Or(triples))


class TestEarthquakeRealizesTwist:
    """
    Testing the earthquake against the fixed-point construction
    """

    def test_direction_is_pinned(self, quake: Earthquake, tau_a: TwistAutomorphism):
        assert twist_direction(quake, tau_a) == 1

    def test_cross_validation(self, quake: Earthquake, tau_a_map: FixedPointBoundaryMap):
        points = sample_boundary_tuples(1, 10, seed=5)[:, 0]
        report = cross_validate(quake, tau_a_map, points)
        assert report.passed
        assert report.bound < 1e-2

    def test_orientation_agreement(self, quake: Earthquake, tau_a: TwistAutomorphism, group: OctagonPresentation):
        F = boundary_map_fixed_point(group, tau_a, 4)
        triples = sample_boundary_tuples(3, 10, seed=6, min_separation=0.05)
        assert cocycle_agreement(orientation_cocycle(), quake.boundary_map(), F, triples) == 0.0

    def test_three_regions(self, quake: Earthquake):
        f = orientation_cocycle().scaled(np.pi)
        report = three_region_experiment(f, quake, (0, 1, 2), grid=3, steps=4)
        assert report.spread == 0.0
        assert report.verdict == "constant"
        assert report.monotone
        assert report.converging
        residuals = report.endpoint_residuals
        assert all(b < a for a, b in zip(residuals, residuals[1:]))

    @pytest.mark.parametrize("regions", [(0, 0, 1), (0, 1, 99)])
    def test_three_regions_bad_indices(self, quake: Earthquake, regions: tuple):
        with pytest.raises(ValueError):
            three_region_experiment(orientation_cocycle(), quake, regions)


class TestTwistRows:
    """
    Testing the twist property rows against the samples they claim
    """

    def test_counts_and_angles(
        self,
        quake: Earthquake,
        tau_a: TwistAutomorphism,
        tau_a_map: FixedPointBoundaryMap,
        small_config: ExperimentConfig,
    ):
        rows = {row.name: row for row in twist_rows(quake, tau_a_map, tau_a, small_config)}
        regions = min(small_config.samples.twist_points, len(quake.regions))
        endpoints = rows["lift endpoints fixed"]
        assert endpoints.sample_size == 2 * regions
        assert endpoints.max_residual < np.pi
        assert endpoints.passed
        assert f"{regions} of {len(quake.regions)}" in endpoints.note
        for name in ("earthquake keeps cyclic order", "fixed-point map keeps cyclic order"):
            assert rows[name].sample_size == small_config.samples.action_triples
