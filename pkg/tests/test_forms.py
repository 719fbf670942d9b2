import numpy as np
import pytest

from core.errors import ConfigError
from core.forms import (
    Bump,
    OneForm,
    TwoForm,
    boundary_integral,
    exact_part,
    forms_from_specs,
    line_integral,
    total_mass,
    triangle_integral,
    volume_coefficient,
)
from core.fuchsian import OctagonPresentation
from core.geometry import CompactTriangle, Geodesic
from models.experiment import BumpSpec


@pytest.fixture(scope="module")
def bump_form(group: OctagonPresentation) -> TwoForm:
    return TwoForm(group, [Bump(0.2 + 0.1j, 0.5, 1.5)], name="bump")


@pytest.fixture(scope="module")
def alpha(group: OctagonPresentation) -> OneForm:
    return OneForm(group, [("oneform-x", Bump(0.0j, 0.6, 1.0)), ("oneform-y", Bump(0.15 - 0.1j, 0.4, 0.5))])


class TestTwoForm:
    """
    Testing 2-forms and their masses
    """

    def test_volume_mass_is_area(self, group: OctagonPresentation):
        volume = TwoForm.volume_form(group)
        assert total_mass(volume) == pytest.approx(4.0 * np.pi, abs=1e-6)
        assert volume_coefficient(volume) == pytest.approx(1.0, abs=1e-7)

    def test_bump_mass(self, bump_form: TwoForm):
        bump = bump_form.bumps[0]
        assert total_mass(bump_form) == pytest.approx(bump.amplitude * bump.profile_mass(), abs=1e-7)

    def test_exact_part_has_no_mass(self, bump_form: TwoForm):
        assert total_mass(exact_part(bump_form)) == pytest.approx(0.0, abs=1e-7)

    def test_lift_is_invariant(self, group: OctagonPresentation, bump_form: TwoForm):
        z = np.array([0.2 + 0.1j, 0.3 - 0.2j, -0.1 + 0.05j])
        for _, g in group.ball(2):
            assert np.allclose(bump_form.lift(g.apply(z)), bump_form.lift(z), atol=1e-10)

    def test_sup_norm_bounds_density(self, bump_form: TwoForm):
        assert bump_form.validate_bound()
        assert bump_form.sup_norm == pytest.approx(1.5)

    def test_support_must_stay_inside(self, group: OctagonPresentation):
        with pytest.raises(ValueError):
            TwoForm(group, [Bump(0.6 + 0.0j, 0.5, 1.0)])

    def test_linearity(self, group: OctagonPresentation, bump_form: TwoForm):
        doubled = bump_form + bump_form.scaled(1.0)
        assert total_mass(doubled) == pytest.approx(2.0 * total_mass(bump_form), abs=1e-7)


class TestOneForm:
    """
    Testing 1-forms, line integrals and Stokes
    """

    def test_lift_is_invariant(self, group: OctagonPresentation, alpha: OneForm):
        z = np.array([0.1 + 0.1j, -0.2j])
        v = np.array([1.0 + 0.5j, -0.3 + 1.0j])
        for _, g in group.ball(2):
            moved = alpha.lift(g.apply(z), g.derivative(z) * v)
            assert np.allclose(moved, alpha.lift(z, v), atol=1e-10)

    def test_derivative_has_no_mass(self, alpha: OneForm):
        assert total_mass(alpha.exterior_derivative()) == pytest.approx(0.0, abs=1e-7)

    def test_stokes(self, alpha: OneForm):
        t = CompactTriangle(-0.3 - 0.2j, 0.35 - 0.1j, 0.05 + 0.4j)
        around = boundary_integral(alpha, t)
        inside = triangle_integral(alpha.exterior_derivative(), t)
        assert around == pytest.approx(inside, abs=1e-7)

    def test_exact_form(self, group: OctagonPresentation):
        """
        The integral of dF along a segment inside the octagon is F(end) - F(start)
        """

        bump = Bump(0.1 + 0.1j, 0.5, 2.0)
        exact = OneForm(group, [("exact", bump)])
        assert exact.is_exact()
        assert exact.derivative_bound == 0.0
        z0, z1 = -0.1 + 0.0j, 0.3 + 0.2j
        side = Geodesic.through(z0, z1)
        value = line_integral(exact, side, side.parameter(z0), side.parameter(z1))
        assert value == pytest.approx(float(bump.value(z1) - bump.value(z0)), abs=1e-8)

    def test_empty_form(self, group: OctagonPresentation):
        empty = OneForm(group)
        assert line_integral(empty, Geodesic.through(0j, 0.5), 0.0, 1.0) == 0.0


class TestFormsFromSpecs:
    """
    Testing form construction from config bumps
    """

    def test_volume_always_present(self, group: OctagonPresentation):
        forms = forms_from_specs(group, {"alpha": [BumpSpec(center=(0.0, 0.0), radius=0.5, kind="oneform-x")]})
        assert set(forms) == {"volume", "alpha"}
        assert isinstance(forms["alpha"], OneForm)

    @pytest.mark.parametrize(
        "specs",
        [
            {"volume": [BumpSpec(center=(0.0, 0.0), radius=0.5)]},
            {"mixed": [BumpSpec(center=(0.0, 0.0), radius=0.5), BumpSpec(center=(0.1, 0.0), radius=0.3, kind="exact")]},
            {"outside": [BumpSpec(center=(0.6, 0.0), radius=0.5)]},
        ],
    )
    def test_bad_specs(self, group: OctagonPresentation, specs: dict):
        with pytest.raises(ConfigError):
            forms_from_specs(group, specs)
