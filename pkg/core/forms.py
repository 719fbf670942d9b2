"""
Differential forms on the genus-2 surface, stored on the octagon and lifted to the disk.

A form is a finite sum of smooth bumps supported inside the open octagon.
Lifts are evaluated by reducing the point into the octagon; 1-forms are
transported by the complex derivative of the reducing isometry.
"""

import logging
from dataclasses import dataclass, replace
from functools import cached_property
from typing import Iterable, Union

import numpy as np
from scipy import integrate

from core.errors import ConfigError
from core.fuchsian import OctagonPresentation
from core.geometry import CompactTriangle, Geodesic, IdealTriangle
from core.quadrature import (
    DEFAULT_TOLERANCE,
    adaptive_interval,
    compact_triangle_quadrature,
    ideal_triangle_quadrature,
)

logger = logging.getLogger(__name__)

DEFAULT_MARGIN = 0.05
ONE_FORM_KINDS = ("oneform-x", "oneform-y", "exact")
VOLUME_NAME = "volume"


@dataclass(frozen=True)
class Bump:
    """
    Smooth bump exp(1 - 1/(1 - u/s^2)) in the variable u = tanh^2(rho/2),
    rho the hyperbolic distance to the center, supported on rho < radius.
    """

    center: complex
    radius: float
    amplitude: float

    @property
    def euclidean_scale(self) -> float:
        return float(np.tanh(self.radius / 2.0))

    def _chart(self, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        c = self.center
        phi = (z - c) / (1.0 - np.conj(c) * z)
        dphi = (1.0 - abs(c) ** 2) / (1.0 - np.conj(c) * z) ** 2
        return phi, dphi

    def _profile_and_slope(self, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        s2 = self.euclidean_scale**2
        inside = u < s2
        gap = np.where(inside, 1.0 - u / s2, 1.0)
        profile = np.where(inside, np.exp(1.0 - 1.0 / gap), 0.0)
        slope = np.where(inside, -profile / (s2 * gap**2), 0.0)
        return profile, slope

    def value(self, z) -> np.ndarray:
        phi, _ = self._chart(np.asarray(z, dtype=complex))
        profile, _ = self._profile_and_slope(np.abs(phi) ** 2)
        return self.amplitude * profile

    def gradient(self, z) -> tuple[np.ndarray, np.ndarray]:
        """Euclidean partial derivatives (d/dx, d/dy) of amplitude * profile."""
        phi, dphi = self._chart(np.asarray(z, dtype=complex))
        _, slope = self._profile_and_slope(np.abs(phi) ** 2)
        product = np.conj(phi) * dphi
        return (
            self.amplitude * slope * 2.0 * product.real,
            self.amplitude * slope * -2.0 * product.imag,
        )

    def scaled(self, factor: float) -> "Bump":
        return replace(self, amplitude=self.amplitude * factor)

    def profile_mass(self) -> float:
        """Integral of the profile against hyperbolic area, by radial quadrature."""
        s2 = self.euclidean_scale**2

        def radial(rho: float) -> float:
            u = np.tanh(rho / 2.0) ** 2
            if u >= s2:
                return 0.0
            return float(np.exp(1.0 - 1.0 / (1.0 - u / s2)) * np.sinh(rho))

        value, _ = integrate.quad(radial, 0.0, self.radius, epsabs=1e-13, epsrel=1e-12, limit=200)
        return 2.0 * np.pi * value

    def sample_points(self, rings: int = 24, spokes: int = 48) -> np.ndarray:
        """Polar grid of points covering the support."""
        rho = np.linspace(0.0, self.radius, rings)
        theta = np.linspace(0.0, 2.0 * np.pi, spokes, endpoint=False)
        local = np.tanh(rho[:, None] / 2.0) * np.exp(1j * theta[None, :])
        c = self.center
        return ((local + c) / (1.0 + np.conj(c) * local)).ravel()


def _check_support(group: OctagonPresentation, bump: Bump, margin: float) -> None:
    room = group.domain.distance_to_boundary(bump.center)
    if not group.domain.contains(bump.center) or room < bump.radius + margin:
        raise ValueError(
            f"Bump at {bump.center} with radius {bump.radius} leaves the octagon margin "
            f"(room {room:.4f}, margin {margin})"
        )


class OneForm:
    """
    A 1-form P dx + Q dy on the octagon, compactly supported, with its Gamma-invariant lift.

    Attributes:
        terms (tuple[tuple[str, Bump], ...]): (kind, bump) with kind in
            oneform-x (F dx), oneform-y (F dy) or exact (dF).
    """

    def __init__(
        self,
        group: OctagonPresentation,
        terms: Iterable[tuple[str, Bump]] = (),
        margin: float = DEFAULT_MARGIN,
        name: str = "",
    ) -> None:
        self.group = group
        self.terms = tuple(terms)
        self.margin = margin
        self.name = name
        for kind, bump in self.terms:
            if kind not in ONE_FORM_KINDS:
                raise ValueError(f"Unknown 1-form kind {kind!r}")
            _check_support(group, bump, margin)

    def __add__(self, other: "OneForm") -> "OneForm":
        return OneForm(self.group, self.terms + other.terms, self.margin)

    def scaled(self, factor: float) -> "OneForm":
        return OneForm(
            self.group, [(k, b.scaled(factor)) for k, b in self.terms], self.margin, self.name
        )

    def is_exact(self) -> bool:
        return all(kind == "exact" for kind, _ in self.terms)

    def components(self, z) -> tuple[np.ndarray, np.ndarray]:
        """(P, Q) at points of the octagon."""
        z = np.asarray(z, dtype=complex)
        p = np.zeros(z.shape)
        q = np.zeros(z.shape)
        for kind, bump in self.terms:
            if kind == "oneform-x":
                p = p + bump.value(z)
            elif kind == "oneform-y":
                q = q + bump.value(z)
            else:
                fx, fy = bump.gradient(z)
                p, q = p + fx, q + fy
        return p, q

    def curl_density(self, z) -> np.ndarray:
        """d(alpha)/dVol at points of the octagon: (Q_x - P_y) (1 - |z|^2)^2 / 4."""
        z = np.asarray(z, dtype=complex)
        curl = np.zeros(z.shape)
        for kind, bump in self.terms:
            if kind == "oneform-x":
                curl = curl - bump.gradient(z)[1]
            elif kind == "oneform-y":
                curl = curl + bump.gradient(z)[0]
        return curl * (1.0 - np.abs(z) ** 2) ** 2 / 4.0

    def lift(self, z, v) -> np.ndarray:
        """Value of the lifted form at z on the tangent vector v (complex)."""
        if not self.terms:
            return np.zeros(np.shape(z))
        reduced, derivative = self.group.reduce_points(z)
        moved = derivative * np.asarray(v, dtype=complex)
        p, q = self.components(reduced)
        return p * moved.real + q * moved.imag

    def _sample(self) -> np.ndarray:
        if not self.terms:
            return np.zeros(1, dtype=complex)
        return np.concatenate([bump.sample_points() for _, bump in self.terms])

    @cached_property
    def sup_norm(self) -> float:
        """Sampled sup of the hyperbolic norm |alpha| = |(P, Q)| (1 - |z|^2) / 2."""
        z = self._sample()
        p, q = self.components(z)
        return float(1.02 * np.max(np.hypot(p, q) * (1.0 - np.abs(z) ** 2) / 2.0))

    @cached_property
    def derivative_bound(self) -> float:
        """Sampled sup of |d(alpha)/dVol|."""
        return float(1.02 * np.max(np.abs(self.curl_density(self._sample()))))

    def exterior_derivative(self) -> "TwoForm":
        return TwoForm(self.group, curls=(self,), margin=self.margin, name=f"d({self.name})")


class TwoForm:
    """
    A 2-form on the surface given by its density against hyperbolic area.

    The density is a constant multiple of the volume form plus compactly
    supported bumps plus exterior derivatives of 1-forms.
    """

    def __init__(
        self,
        group: OctagonPresentation,
        bumps: Iterable[Bump] = (),
        volume: float = 0.0,
        curls: Iterable[OneForm] = (),
        margin: float = DEFAULT_MARGIN,
        name: str = "",
    ) -> None:
        self.group = group
        self.bumps = tuple(bumps)
        self.volume = float(volume)
        self.curls = tuple(curls)
        self.margin = margin
        self.name = name
        for bump in self.bumps:
            _check_support(group, bump, margin)

    @classmethod
    def volume_form(cls, group: OctagonPresentation) -> "TwoForm":
        """The hyperbolic area form, density 1 everywhere."""
        return cls(group, volume=1.0, name=VOLUME_NAME)

    def __add__(self, other: "TwoForm") -> "TwoForm":
        return TwoForm(
            self.group,
            self.bumps + other.bumps,
            self.volume + other.volume,
            self.curls + other.curls,
            self.margin,
        )

    def scaled(self, factor: float) -> "TwoForm":
        return TwoForm(
            self.group,
            [b.scaled(factor) for b in self.bumps],
            self.volume * factor,
            [c.scaled(factor) for c in self.curls],
            self.margin,
            self.name,
        )

    @property
    def has_compact_part(self) -> bool:
        return bool(self.bumps) or any(c.terms for c in self.curls)

    def density_on_domain(self, z) -> np.ndarray:
        """Density of the compactly supported part at points of the octagon."""
        z = np.asarray(z, dtype=complex)
        total = np.zeros(z.shape)
        for bump in self.bumps:
            total = total + bump.value(z)
        for one_form in self.curls:
            total = total + one_form.curl_density(z)
        return total

    def lift(self, z) -> np.ndarray:
        """Density of the Gamma-invariant lift at points of the disk."""
        z = np.asarray(z, dtype=complex)
        total = np.full(z.shape, self.volume)
        if self.has_compact_part:
            reduced, _ = self.group.reduce_points(z)
            total = total + self.density_on_domain(reduced)
        return total

    @cached_property
    def sup_norm(self) -> float:
        """Upper bound for |density|."""
        bound = abs(self.volume) + sum(abs(b.amplitude) for b in self.bumps)
        return float(bound + sum(c.derivative_bound for c in self.curls))

    def validate_bound(self, samples: int = 2000, seed: int = 0) -> bool:
        """Check the declared sup-norm against random points of the octagon."""
        rng = np.random.default_rng(seed)
        radius = np.sqrt(rng.uniform(0.0, 0.84**2, samples))
        z = radius * np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, samples))
        return bool(np.all(np.abs(self.lift(z)) <= self.sup_norm + 1e-12))


AnyTriangle = Union[IdealTriangle, CompactTriangle]


def eval_two_form_lift(omega: TwoForm, z: complex) -> float:
    return float(omega.lift(np.array([z]))[0])


def eval_one_form_lift(alpha: OneForm, z: complex, v: complex) -> float:
    return float(alpha.lift(np.array([z]), np.array([v]))[0])


def line_integral(
    alpha: OneForm,
    g: Geodesic,
    s0: float,
    s1: float,
    tol: float = DEFAULT_TOLERANCE,
) -> float:
    """Integral of the lifted 1-form along the unit-speed arc g([s0, s1])."""
    if not alpha.terms or s0 == s1:
        return 0.0

    def integrand(s: np.ndarray) -> np.ndarray:
        return alpha.lift(g.point(s), g.velocity(s))

    return adaptive_interval(integrand, s0, s1, tol).value


def triangle_integral(omega: TwoForm, t: AnyTriangle, tol: float = DEFAULT_TOLERANCE) -> float:
    """Signed integral of the lifted 2-form over an ideal or compact triangle."""
    if isinstance(t, IdealTriangle):
        return ideal_triangle_quadrature(t, omega.lift, omega.sup_norm, tol).value
    return compact_triangle_quadrature(t, omega.lift, tol).value


def boundary_integral(alpha: OneForm, t: CompactTriangle, tol: float = DEFAULT_TOLERANCE) -> float:
    """Integral of the lifted 1-form over the oriented boundary z0 -> z1 -> z2 -> z0."""
    total = 0.0
    vertices = t.vertices
    for k in range(3):
        start, end = vertices[k], vertices[(k + 1) % 3]
        if abs(start - end) < 1e-14:
            continue
        side = Geodesic.through(start, end)
        total += line_integral(alpha, side, side.parameter(start), side.parameter(end), tol)
    return total


def total_mass(omega: TwoForm, tol: float = DEFAULT_TOLERANCE) -> float:
    """Integral of the density over the octagon, split into eight triangles at the center."""
    vertices = omega.group.domain.vertices

    def density(z: np.ndarray) -> np.ndarray:
        return omega.volume + omega.density_on_domain(z)

    return float(
        sum(
            compact_triangle_quadrature(
                CompactTriangle(0j, vertices[k], vertices[(k + 1) % 8]), density, tol / 8.0
            ).value
            for k in range(8)
        )
    )


def volume_coefficient(omega: TwoForm, tol: float = DEFAULT_TOLERANCE) -> float:
    """Coefficient of the volume form: total mass over the area 4 pi of the surface."""
    return total_mass(omega, tol) / (4.0 * np.pi)


def exact_part(omega: TwoForm, tol: float = DEFAULT_TOLERANCE) -> TwoForm:
    """omega minus its volume-form component; its total mass vanishes."""
    return omega + TwoForm.volume_form(omega.group).scaled(-volume_coefficient(omega, tol))


def forms_from_specs(
    group: OctagonPresentation,
    named_specs: dict[str, list],
    margin: float = DEFAULT_MARGIN,
) -> dict[str, Union[OneForm, TwoForm]]:
    """
    Build named forms from bump specifications.

    Args:
        group: the octagon group.
        named_specs: form name -> list of objects with center, radius,
            amplitude and kind attributes.
        margin: compact-support margin from the octagon sides.

    Returns:
        dict[str, OneForm | TwoForm]: forms by name; "volume" is always present.
    """
    forms: dict[str, Union[OneForm, TwoForm]] = {VOLUME_NAME: TwoForm.volume_form(group)}
    for name, specs in named_specs.items():
        if name == VOLUME_NAME:
            raise ConfigError(f"Form name {VOLUME_NAME!r} is reserved")
        kinds = {spec.kind for spec in specs}
        bumps = [
            Bump(complex(spec.center[0], spec.center[1]), spec.radius, spec.amplitude)
            for spec in specs
        ]
        try:
            if kinds <= {"twoform"}:
                forms[name] = TwoForm(group, bumps, margin=margin, name=name)
            elif kinds <= set(ONE_FORM_KINDS):
                terms = [(spec.kind, bump) for spec, bump in zip(specs, bumps)]
                forms[name] = OneForm(group, terms, margin=margin, name=name)
            else:
                raise ConfigError(f"Form {name!r} mixes 1-form and 2-form bumps")
        except ValueError as error:
            raise ConfigError(f"Form {name!r}: {error}") from error
        logger.info(f"Built form {name!r} with {len(specs)} bumps")
    return forms
