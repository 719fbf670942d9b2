import numpy as np
import pytest

from core.errors import DepthExceeded, MonotonicityViolation
from core.fuchsian import GroupWord, LETTERS, OctagonPresentation
from core.geometry import Isometry, angular_distance
from lab.boundary_maps import (
    BisectionInverse,
    BoundaryMap,
    Earthquake,
    FixedPointBoundaryMap,
    attracting_angles,
)
from lab.cocycles import sample_boundary_tuples


class IsometryMap(BoundaryMap):
    method = "isometry"

    def __init__(self, g: Isometry) -> None:
        self.g = g

    def __call__(self, theta):
        return self.g.apply_boundary(theta)


@pytest.fixture(scope="module")
def quake(group: OctagonPresentation) -> Earthquake:
    return Earthquake(group, "a")


class TestCircleMaps:
    """
    Testing monotone circle maps and their inverses
    """

    def test_attracting_angles(self, group: OctagonPresentation):
        elements = [g for w, g in group.ball(2) if not w.is_identity()]
        alpha = np.array([g.alpha for g in elements])
        beta = np.array([g.beta for g in elements])
        angles = attracting_angles(alpha, beta)
        expected = np.array([g.fixed_points()[1].angle for g in elements])
        assert np.all(angular_distance(angles, expected) < 1e-12)

    def test_bisection_inverse(self):
        g = Isometry.translation(1.1, 0.4)
        inverse = BisectionInverse(IsometryMap(g))
        theta = np.linspace(0.0, 6.0, 13)
        assert np.all(angular_distance(inverse(theta), g.inverse().apply_boundary(theta)) < 1e-9)
        assert isinstance(IsometryMap(g).inverse(), BisectionInverse)

    def test_identity_table(self, group: OctagonPresentation):
        F = FixedPointBoundaryMap.from_automorphism(group, {x: GroupWord(x) for x in LETTERS}, 3)
        theta = np.linspace(0.05, 6.2, 40)
        assert np.all(angular_distance(F(theta), theta) < 1e-12)
        assert np.all(angular_distance(F.inverse()(theta), theta) < 1e-12)
        assert F.accuracy > 0.0
        assert F.preserves_order(sample_boundary_tuples(3, 100, seed=1))

    def test_short_words_rejected(self, group: OctagonPresentation):
        with pytest.raises(ValueError):
            FixedPointBoundaryMap.from_automorphism(group, {x: GroupWord(x) for x in LETTERS}, 2)

    def test_winding_table_rejected(self):
        with pytest.raises(MonotonicityViolation):
            FixedPointBoundaryMap(np.array([0.0, 1.0, 2.0, 3.0]), np.array([0.0, 2.0, 1.0, 3.0]))

    def test_rounding_reversal_dropped(self):
        F = FixedPointBoundaryMap(np.array([0.0, 1.0, 2.0, 3.0, 4.0]), np.array([0.0, 1.0, 1.0 - 1e-12, 3.0, 4.0]))
        assert F.source.size == 4
        assert F(3.0) == pytest.approx(3.0)


class TestEarthquake:
    """
    Testing the earthquake along the lifts of the a-curve
    """

    def test_basepoint_on_a_lift(self, group: OctagonPresentation):
        with pytest.raises(ValueError):
            Earthquake(group, "a", basepoint=0j)

    def test_direction(self, group: OctagonPresentation):
        with pytest.raises(ValueError):
            Earthquake(group, "a", direction=2)

    def test_regions(self, quake: Earthquake):
        assert len(quake.regions) >= 3
        for region in quake.regions:
            assert region.lift.side(quake.basepoint) == 1
            assert 0.0 < region.width < 2.0 * np.pi

    def test_lift_endpoints_fixed(self, quake: Earthquake):
        widest = sorted(quake.regions, key=lambda r: r.width, reverse=True)[:10]
        endpoints = np.array([a for r in widest for a in (r.start, r.end)])
        images = quake.boundary_map()(endpoints)
        assert np.all(angular_distance(images, endpoints) <= 1e-10)

    def test_endpoint_rays_do_not_cross_their_lift(self, quake: Earthquake):
        for region in quake.regions[:6]:
            for xi in (region.start, region.end):
                crossings, _ = quake.chain(xi)
                assert all(
                    angular_distance(c.start, xi) > 1e-9 and angular_distance(c.end, xi) > 1e-9 for c in crossings
                )

    def test_depth_one_translation(self, quake: Earthquake):
        """
        Endpoints of lifts bounding the next plate are moved by the one translation
        """

        regions = [r for r in quake.regions if r.plate_points]
        assert regions
        for region in regions[:3]:
            xi = region.plate_points[0]
            crossings, extra = quake.chain(xi)
            assert len(crossings) == 1 and extra is None
            expected = quake.translation(region.lift).apply_boundary(xi)
            value, _ = quake.image(xi)
            assert angular_distance(value, expected) < 1e-12
            assert region.contains(value)

    def test_orbit_converges(self, quake: Earthquake):
        region = max(quake.regions, key=lambda r: r.width)
        for xi in region.interior_grid(3):
            residuals = region.residual(quake.orbit(float(xi), 8))
            assert all(b < a for a, b in zip(residuals, residuals[1:]))
            assert residuals[-1] < 1e-6

    def test_iterate_matches_image(self, quake: Earthquake):
        region = max(quake.regions, key=lambda r: r.width)
        for xi in region.interior_grid(2):
            value, _ = quake.image(float(xi))
            assert angular_distance(quake.iterate(float(xi), 1), value) < 1e-12
            assert quake.iterate(float(xi), 0) == pytest.approx(float(xi))
            assert angular_distance(quake.iterate(float(xi), 3), quake.orbit(float(xi), 3)[-1]) < 1e-12
        with pytest.raises(ValueError):
            quake.iterate(1.0, -1)

    def test_strict_depth(self, group: OctagonPresentation):
        strict = Earthquake(group, "a", depth=1, strict=True)
        with pytest.raises(DepthExceeded):
            for xi in np.linspace(0.0, 2.0 * np.pi, 40, endpoint=False):
                strict.image(float(xi))

    def test_preserves_order(self, quake: Earthquake):
        triples = sample_boundary_tuples(3, 15, seed=3, min_separation=1e-2)
        assert quake.boundary_map().preserves_order(triples)

    def test_truncation_bound(self, quake: Earthquake):
        region = next(r for r in quake.regions if r.plate_points)
        _, bound = quake.image(region.plate_points[0])
        assert 0.0 <= bound < 1e-3
        E = quake.boundary_map()
        E(np.linspace(0.1, 6.0, 12))
        assert np.isfinite(E.last_bound)
