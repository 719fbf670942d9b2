import numpy as np
import pytest

from core.errors import DegenerateTriple, NotHyperbolic
from core.geometry import (
    BoundaryPoint,
    CompactTriangle,
    Geodesic,
    IdealTriangle,
    Isometry,
    IsometryKind,
    angle_defect_area,
    angular_distance,
    axis,
    ccw_offset,
    classify,
    hyperbolic_distance,
    orientation,
    orientation_array,
    translate_boundary,
    translation_length,
)


class TestIsometry:
    """
    Testing Mobius maps of the disk
    """

    def test_canonical_sign(self):
        """
        -M and M are one map with one representative
        """

        M = Isometry(-2.0, 1.0j)
        assert M.alpha.real > 0
        assert M.close_to(Isometry(2.0, -1.0j))

    def test_inverse_and_composition(self):
        M = Isometry.translation(1.3, 0.4) @ Isometry.rotation(0.9)
        assert (M @ M.inverse()).close_to(Isometry.identity())
        z = 0.2 - 0.3j
        assert abs(complex(M.apply(z)) - complex(Isometry.translation(1.3, 0.4).apply(np.exp(0.9j) * z))) < 1e-12

    def test_not_an_isometry(self):
        with pytest.raises(ValueError):
            Isometry(1.0, 2.0)

    @pytest.mark.parametrize("length", [0.5, 2.0, 7.0])
    def test_translation_length(self, length: float):
        assert translation_length(Isometry.translation(length, 1.1)) == pytest.approx(length, rel=1e-12)

    def test_long_products_stay_valid(self):
        """
        |alpha|^2 - |beta|^2 is pure rounding noise at this size, yet the map is fine
        """

        M = Isometry.translation(1.0, 0.3).power(40)
        assert abs(M.alpha) > 1e8
        assert translation_length(M) == pytest.approx(40.0, rel=1e-9)

    def test_hyperbolic_from_fixed_points(self):
        M = Isometry.hyperbolic(0.3, 2.0, 1.5)
        repelling, attracting = M.fixed_points()
        assert repelling.close_to(BoundaryPoint(0.3), 1e-10)
        assert attracting.close_to(BoundaryPoint(2.0), 1e-10)
        assert translation_length(M) == pytest.approx(1.5, rel=1e-10)
        theta = np.linspace(2.5, 6.0, 7)
        assert np.all(angular_distance(translate_boundary(theta, 0.3, 2.0, 1.5), M.apply_boundary(theta)) < 1e-12)

    def test_translate_along_tiny_axis(self):
        """
        An axis 1e-7 wide: the midpoint lands at 1 / (1 + e^3) of the way back from the attracting end
        """

        value = translate_boundary(1.0 + 5e-8, 1.0, 1.0 + 1e-7, 3.0)
        assert float(ccw_offset(1.0 + 1e-7, value)) == pytest.approx(1e-7 / (1.0 + np.exp(3.0)), rel=1e-4)

    def test_classification(self):
        assert classify(Isometry.rotation(1.0)) is IsometryKind.ELLIPTIC
        assert classify(Isometry.identity()) is IsometryKind.PARABOLIC
        assert Isometry.translation(1.0).kind is IsometryKind.HYPERBOLIC
        with pytest.raises(NotHyperbolic):
            translation_length(Isometry.rotation(0.3))

    def test_fixed_points(self):
        """
        Translation toward angle 0 repels from pi and attracts to 0
        """

        repelling, attracting = Isometry.translation(1.0, 0.0).fixed_points()
        assert repelling.close_to(BoundaryPoint(np.pi), 1e-12)
        assert attracting.close_to(BoundaryPoint(0.0), 1e-12)

    def test_boundary_triples(self):
        source, target = (0.1, 2.0, 4.0), (1.0, 1.5, 5.0)
        M = Isometry.from_boundary_triples(source, target)
        assert np.all(angular_distance(M.apply_boundary(np.array(source)), np.array(target)) < 1e-10)

    def test_distance_invariance(self):
        M = Isometry.translation(0.7, 2.0)
        z, w = 0.1 + 0.5j, -0.3j
        assert hyperbolic_distance(M.apply(z), M.apply(w)) == pytest.approx(hyperbolic_distance(z, w), rel=1e-10)
        assert hyperbolic_distance(0.0, np.tanh(0.5)) == pytest.approx(1.0, rel=1e-12)


class TestGeodesic:
    """
    Testing oriented geodesics
    """

    def test_endpoints(self):
        g = Geodesic.from_endpoints(BoundaryPoint(0.3), BoundaryPoint(2.1))
        assert g.start.close_to(BoundaryPoint(0.3), 1e-12)
        assert g.end.close_to(BoundaryPoint(2.1), 1e-12)
        assert g.parameter(g.point(1.7)) == pytest.approx(1.7, abs=1e-10)

    @pytest.mark.parametrize("offset", [0.0, 2e-15, 1e-9, 1e-6, 0.3])
    def test_nearly_antipodal_endpoints(self, offset: float):
        start, end = BoundaryPoint(0.4), BoundaryPoint(0.4 + np.pi + offset)
        g = Geodesic.from_endpoints(start, end)
        assert g.start.close_to(start, 1e-12)
        assert g.end.close_to(end, 1e-12)
        assert g.parameter(g.point(-2.3)) == pytest.approx(-2.3, abs=1e-10)

    def test_side(self):
        """
        Left of the diameter from -1 to 1 is the upper half
        """

        g = Geodesic.from_endpoints(BoundaryPoint(np.pi), BoundaryPoint(0.0))
        assert g.side(0.5j) == 1
        assert g.side(-0.5j) == -1
        assert g.reversed().side(0.5j) == -1

    def test_crossing(self):
        real = Geodesic.from_endpoints(BoundaryPoint(np.pi), BoundaryPoint(0.0))
        imaginary = Geodesic.from_endpoints(BoundaryPoint(-np.pi / 2.0), BoundaryPoint(np.pi / 2.0))
        assert real.crossing_parameter(imaginary) == pytest.approx(0.0, abs=1e-12)
        disjoint = Geodesic.from_endpoints(BoundaryPoint(0.1), BoundaryPoint(0.5))
        assert not real.crosses(disjoint)

    def test_axis_is_invariant(self):
        h = Isometry.moving(0.3 + 0.2j)
        M = h @ Isometry.translation(2.0, 0.5) @ h.inverse()
        line = axis(M)
        assert line.transformed(M).same_line(line)
        assert line.distance_to_point(0.3 + 0.2j) == pytest.approx(0.0, abs=1e-10)


class TestTriangles:
    """
    Testing orientation and areas
    """

    @pytest.mark.parametrize(
        "angles, expected",
        [((0.0, 1.0, 2.0), 1), ((0.0, 2.0, 1.0), -1), ((5.0, 0.5, 1.0), 1), ((0.0, 0.0, 1.0), 0)],
    )
    def test_orientation_array(self, angles: tuple, expected: int):
        assert int(orientation_array(*angles)) == expected

    def test_degenerate_triple(self):
        with pytest.raises(DegenerateTriple):
            orientation(IdealTriangle.from_angles(1.0, 1.0, 2.0))

    def test_area_is_invariant(self):
        t = CompactTriangle(0.0, 0.4, 0.3j)
        area = angle_defect_area(t)
        assert 0.0 < area < np.pi
        moved = t.moved_by(Isometry.translation(1.5, 2.0))
        assert angle_defect_area(moved) == pytest.approx(area, rel=1e-10)
