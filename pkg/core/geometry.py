"""Poincare-disk geometry: isometries, boundary points, geodesics and triangles."""

import logging
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Optional, Union

import numpy as np

from core.errors import DegenerateTriple, NotHyperbolic

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * np.pi
ANGLE_TOL = 1e-12
TRACE_TOL = 1e-9
DET_NOISE = 1e-10

ArrayLike = Union[complex, np.ndarray]


class IsometryKind(str, Enum):
    ELLIPTIC = "Elliptic"
    PARABOLIC = "Parabolic"
    HYPERBOLIC = "Hyperbolic"


def reduce_angle(theta):
    """Reduce an angle (or an array of angles) into [0, 2pi)."""
    # np.mod can round a tiny negative angle up to exactly 2pi
    reduced = np.mod(theta, TWO_PI)
    reduced = np.where(reduced >= TWO_PI, 0.0, reduced)
    return float(reduced) if np.ndim(reduced) == 0 else reduced


def angular_distance(theta, phi):
    """Distance between two points of the circle measured along the circle."""
    diff = np.abs(np.mod(np.asarray(theta) - np.asarray(phi), TWO_PI))
    return np.minimum(diff, TWO_PI - diff)


def ccw_offset(theta, origin):
    """Counter-clockwise angle from `origin` to `theta`, in [0, 2pi)."""
    return np.mod(np.asarray(theta) - np.asarray(origin), TWO_PI)


def hyperbolic_distance(z: ArrayLike, w: ArrayLike):
    """Hyperbolic distance between points of the open unit disk (curvature -1)."""
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    ratio = np.abs(z - w) / np.abs(1.0 - np.conj(w) * z)
    return 2.0 * np.arctanh(np.minimum(ratio, 1.0 - 1e-16))


@dataclass(frozen=True)
class Isometry:
    """
    Orientation-preserving isometry of the disk, z -> (alpha z + beta) / (conj(beta) z + conj(alpha)).

    The coefficients are normalized to |alpha|^2 - |beta|^2 = 1 and to a
    canonical sign (Re alpha > 0, or Re alpha = 0 and Im alpha >= 0), so
    every map of PSU(1,1) has exactly one representative.
    """

    alpha: complex
    beta: complex

    def __post_init__(self) -> None:
        alpha, beta = complex(self.alpha), complex(self.beta)
        det = abs(alpha) ** 2 - abs(beta) ** 2
        size = abs(alpha) ** 2 + abs(beta) ** 2
        # products of normalized maps keep det = 1 only up to rounding in size
        if abs(det - 1.0) > DET_NOISE * size:
            if not det > 0:
                raise ValueError(f"Coefficients do not define a disk isometry: det={det}")
            scale = np.sqrt(det)
            alpha, beta = alpha / scale, beta / scale
        if alpha.real < 0 or (alpha.real == 0 and alpha.imag < 0):
            alpha, beta = -alpha, -beta
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)

    @classmethod
    def identity(cls) -> "Isometry":
        return cls(1.0, 0.0)

    @classmethod
    def rotation(cls, theta: float) -> "Isometry":
        """Rotation z -> e^{i theta} z about the center."""
        return cls(np.exp(0.5j * theta), 0.0)

    @classmethod
    def translation(cls, length: float, direction: float = 0.0) -> "Isometry":
        """Hyperbolic translation by `length` along the diameter pointing at `direction`."""
        return cls(np.cosh(length / 2.0), np.sinh(length / 2.0) * np.exp(1j * direction))

    @classmethod
    def moving(cls, w: complex) -> "Isometry":
        """The transvection along the diameter through w that sends 0 to w."""
        scale = 1.0 / np.sqrt(1.0 - abs(w) ** 2)
        return cls(scale, w * scale)

    @classmethod
    def hyperbolic(cls, repelling: float, attracting: float, length: float) -> "Isometry":
        """
        Translation by `length` along the geodesic between two boundary angles.

        Built from the fixed points rather than by composing frames, which
        loses precision on tiny far-away axes.
        """
        return cls.from_matrix(
            _fixed_point_matrix(repelling, attracting, length),
            det=np.exp(-length) * _chord(attracting, repelling) ** 2,
        )

    @classmethod
    def from_matrix(cls, matrix: np.ndarray, det: Optional[complex] = None) -> "Isometry":
        """Project a complex 2x2 matrix representing a disk automorphism onto SU(1,1)."""
        m = np.asarray(matrix, dtype=complex)
        m = m / np.sqrt(np.linalg.det(m) if det is None else det)
        alpha = 0.5 * (m[0, 0] + np.conj(m[1, 1]))
        beta = 0.5 * (m[0, 1] + np.conj(m[1, 0]))
        return cls(alpha, beta)

    @classmethod
    def from_boundary_triples(cls, source, target) -> "Isometry":
        """
        The unique isometry sending three boundary angles to three boundary angles.

        Args:
            source: three distinct angles in counter-clockwise order.
            target: three distinct angles with the same cyclic orientation.

        Returns:
            Isometry: the map with target[i] = M(source[i]).
        """

        def to_standard(points):
            z1, z2, z3 = (np.exp(1j * t) for t in points)
            # (z - z1)(z2 - z3) / ((z - z3)(z2 - z1)) sends z1, z2, z3 to 0, 1, inf
            return np.array(
                [[z2 - z3, -z1 * (z2 - z3)], [z2 - z1, -z3 * (z2 - z1)]], dtype=complex
            )

        forward = to_standard(source)
        backward = np.linalg.inv(to_standard(target))
        return cls.from_matrix(backward @ forward)

    @property
    def matrix(self) -> np.ndarray:
        return np.array(
            [[self.alpha, self.beta], [np.conj(self.beta), np.conj(self.alpha)]],
            dtype=complex,
        )

    @property
    def coordinates(self) -> tuple[float, float, float, float]:
        """The four real coefficients (Re alpha, Im alpha, Re beta, Im beta)."""
        return (self.alpha.real, self.alpha.imag, self.beta.real, self.beta.imag)

    def __matmul__(self, other: "Isometry") -> "Isometry":
        """Composition: (self @ other)(z) = self(other(z))."""
        a1, b1, a2, b2 = self.alpha, self.beta, other.alpha, other.beta
        return Isometry(a1 * a2 + b1 * np.conj(b2), a1 * b2 + b1 * np.conj(a2))

    def inverse(self) -> "Isometry":
        return Isometry(np.conj(self.alpha), -self.beta)

    def power(self, n: int) -> "Isometry":
        base = self if n >= 0 else self.inverse()
        result = Isometry.identity()
        for _ in range(abs(n)):
            result = result @ base
        return result

    def apply(self, z: ArrayLike):
        """Image of interior (or boundary) points given as complex numbers."""
        z = np.asarray(z, dtype=complex)
        return (self.alpha * z + self.beta) / (np.conj(self.beta) * z + np.conj(self.alpha))

    def derivative(self, z: ArrayLike):
        """Complex derivative of the Mobius map at z (unit determinant)."""
        z = np.asarray(z, dtype=complex)
        return 1.0 / (np.conj(self.beta) * z + np.conj(self.alpha)) ** 2

    def apply_boundary(self, theta):
        """Image of boundary angles, reduced into [0, 2pi)."""
        image = self.apply(np.exp(1j * np.asarray(theta, dtype=float)))
        return reduce_angle(np.angle(image))

    def boundary_derivative(self, theta):
        """d(image angle)/d(theta) along the circle."""
        return np.abs(self.derivative(np.exp(1j * np.asarray(theta, dtype=float))))

    def max_boundary_derivative(self) -> float:
        """Largest stretch factor of the map on the circle."""
        return float((abs(self.alpha) + abs(self.beta)) ** 2)

    def max_boundary_derivative_near(self, theta, radius: float):
        """Largest stretch factor on the arcs [theta - radius, theta + radius]."""
        theta = np.asarray(theta, dtype=float)
        edges = np.maximum.reduce(
            [self.boundary_derivative(theta + shift) for shift in (-radius, 0.0, radius)]
        )
        if abs(self.beta) == 0:
            return edges
        # |derivative| is unimodal on the circle, peaking where conj(beta) z + conj(alpha) is shortest
        peak = np.angle(-np.conj(self.alpha) / np.conj(self.beta))
        return np.where(angular_distance(theta, peak) <= radius, self.max_boundary_derivative(), edges)

    @property
    def trace(self) -> float:
        return float(2.0 * self.alpha.real)

    @cached_property
    def kind(self) -> IsometryKind:
        return classify(self)

    def distance_to(self, other: "Isometry") -> float:
        """Matrix proximity in PSU(1,1)."""
        plus = abs(self.alpha - other.alpha) + abs(self.beta - other.beta)
        minus = abs(self.alpha + other.alpha) + abs(self.beta + other.beta)
        return float(min(plus, minus))

    def residual_to(self, other: "Isometry") -> float:
        """Distance of self o other^-1 from the identity; scale-free for long words."""
        return (self @ other.inverse()).distance_to(Isometry.identity())

    def close_to(self, other: "Isometry", tol: float = 1e-10) -> bool:
        return self.distance_to(other) <= tol

    def fixed_points(self) -> tuple["BoundaryPoint", "BoundaryPoint"]:
        """Boundary fixed points of a hyperbolic map as (repelling, attracting)."""
        if classify(self) is not IsometryKind.HYPERBOLIC:
            raise NotHyperbolic(f"Map with trace {self.trace:.6g} has no axis")
        root = np.sqrt(self.alpha.real**2 - 1.0)
        conj_beta = np.conj(self.beta)
        first = (1j * self.alpha.imag + root) / conj_beta
        second = (1j * self.alpha.imag - root) / conj_beta
        if abs(conj_beta * first + np.conj(self.alpha)) > 1.0:
            attracting, repelling = first, second
        else:
            attracting, repelling = second, first
        return BoundaryPoint(np.angle(repelling)), BoundaryPoint(np.angle(attracting))


def _chord(theta, phi):
    """e^{i theta} - e^{i phi}, accurate relative to its own size."""
    d = np.mod(np.asarray(theta, dtype=float) - phi + np.pi, TWO_PI) - np.pi
    return 2j * np.sin(d / 2.0) * np.exp(1j * (phi + d / 2.0))


def _fixed_point_matrix(repelling, attracting, length) -> np.ndarray:
    # (w - q) / (w - p) = e^{-length} (z - q) / (z - p), determinant e^{-length} (q - p)^2
    p, q = np.exp(1j * repelling), np.exp(1j * attracting)
    k = np.exp(-length)
    return np.array([[q - k * p, -p * q * (1.0 - k)], [1.0 - k, -(p - k * q)]], dtype=complex)


def translate_boundary(theta, repelling: float, attracting: float, length: float):
    """
    Move boundary angles by the translation of `length` from `repelling` towards `attracting`.

    Works with the offset w - q = k (z - q)(q - p) / ((z - p) - k (z - q)),
    k = e^{-length}, so points of a tiny interval keep relative precision.
    """
    k = np.exp(-length)
    to_attracting = _chord(theta, attracting)
    to_repelling = _chord(theta, repelling)
    shift = k * to_attracting * _chord(attracting, repelling) / (to_repelling - k * to_attracting)
    return reduce_angle(attracting + np.angle(1.0 + shift * np.exp(-1j * attracting)))


def classify(M: Isometry) -> IsometryKind:
    """Trace trichotomy with threshold TRACE_TOL on |trace| - 2."""
    gap = abs(M.trace) - 2.0
    if gap > TRACE_TOL:
        return IsometryKind.HYPERBOLIC
    if gap >= -TRACE_TOL:
        return IsometryKind.PARABOLIC
    return IsometryKind.ELLIPTIC


def translation_length(M: Isometry) -> float:
    if classify(M) is not IsometryKind.HYPERBOLIC:
        raise NotHyperbolic(f"Map with trace {M.trace:.6g} is not hyperbolic")
    return float(2.0 * np.arccosh(abs(M.alpha.real)))


def axis(M: Isometry) -> "Geodesic":
    """Oriented axis of a hyperbolic map, from its repelling to its attracting fixed point."""
    repelling, attracting = M.fixed_points()
    return Geodesic.from_endpoints(repelling, attracting)


@dataclass(frozen=True)
class BoundaryPoint:
    """A point of the boundary circle, parametrized by its angle in [0, 2pi)."""

    angle: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "angle", reduce_angle(float(self.angle)))

    @property
    def point(self) -> complex:
        return complex(np.exp(1j * self.angle))

    def close_to(self, other: "BoundaryPoint", tol: float = ANGLE_TOL) -> bool:
        return bool(angular_distance(self.angle, other.angle) <= tol)

    def moved_by(self, M: Isometry) -> "BoundaryPoint":
        return BoundaryPoint(M.apply_boundary(self.angle))


@dataclass(frozen=True)
class Geodesic:
    """
    Oriented complete geodesic, stored through a frame isometry.

    The frame sends the real diameter onto the geodesic, -1 to the start and
    +1 to the end, so point(s) = frame(tanh(s/2)) is a unit-speed
    parametrization with s = 0 at the point closest to the frame's image of 0.
    """

    frame: Isometry

    @classmethod
    def from_endpoints(cls, start: BoundaryPoint, end: BoundaryPoint) -> "Geodesic":
        if start.close_to(end):
            raise ValueError("Geodesic endpoints must be distinct")
        p, q = start.point, end.point
        # the tangent at the closest point is parallel to the chord, which is
        # never small; (p + q) / (2 + |q - p|) is that point and is 0 for a diameter
        chord = q - p
        closest = (p + q) / (2.0 + abs(chord))
        return cls(Isometry.moving(closest) @ Isometry.rotation(np.angle(chord)))

    @classmethod
    def through(cls, z1: complex, z2: complex) -> "Geodesic":
        """The geodesic through two interior points, oriented from z1 to z2."""
        to_origin = Isometry.moving(z1).inverse()
        u = complex(to_origin.apply(z2))
        if abs(u) < 1e-15:
            raise ValueError("Points coincide; geodesic undefined")
        back = to_origin.inverse()
        start = BoundaryPoint(np.angle(back.apply(-u / abs(u))))
        end = BoundaryPoint(np.angle(back.apply(u / abs(u))))
        return cls.from_endpoints(start, end)

    @property
    def start(self) -> BoundaryPoint:
        return BoundaryPoint(np.angle(self.frame.apply(-1.0)))

    @property
    def end(self) -> BoundaryPoint:
        return BoundaryPoint(np.angle(self.frame.apply(1.0)))

    def point(self, s):
        return self.frame.apply(np.tanh(np.asarray(s, dtype=float) / 2.0))

    def velocity(self, s):
        """Euclidean velocity vector (as a complex number) of the unit-speed parametrization."""
        x = np.tanh(np.asarray(s, dtype=float) / 2.0)
        return self.frame.derivative(x) * (1.0 - x**2) / 2.0

    def parameter(self, z: complex) -> float:
        """Arc-length parameter of a point on the geodesic."""
        x = complex(self.frame.inverse().apply(z))
        return float(2.0 * np.arctanh(x.real))

    def reversed(self) -> "Geodesic":
        return Geodesic(self.frame @ Isometry.rotation(np.pi))

    def transformed(self, g: Isometry) -> "Geodesic":
        return Geodesic(g @ self.frame)

    def side(self, z: complex) -> int:
        """+1 if z lies to the left of the oriented geodesic, -1 to the right, 0 on it."""
        return int(np.sign(complex(self.frame.inverse().apply(z)).imag))

    def distance_to_point(self, z: ArrayLike):
        w = self.frame.inverse().apply(z)
        return np.arcsinh(2.0 * np.abs(w.imag) / (1.0 - np.abs(w) ** 2))

    def same_line(self, other: "Geodesic", tol: float = 1e-9) -> bool:
        """Equality as unoriented geodesics."""
        a, b = self.start, self.end
        c, d = other.start, other.end
        return (a.close_to(c, tol) and b.close_to(d, tol)) or (
            a.close_to(d, tol) and b.close_to(c, tol)
        )

    def crosses(self, other: "Geodesic", tol: float = 1e-12) -> bool:
        """True when the two geodesics meet in the open disk."""
        return self.crossing_parameter(other, tol) is not None

    def crossing_parameter(self, other: "Geodesic", tol: float = 1e-12):
        """
        Parameter on self of the intersection with `other`, or None.

        Geodesics sharing an endpoint (or disjoint ones) do not cross.
        """
        to_frame = self.frame.inverse()
        p = complex(to_frame.apply(other.start.point))
        q = complex(to_frame.apply(other.end.point))
        p, q = p / abs(p), q / abs(q)
        if p.imag * q.imag >= 0 or min(abs(p.imag), abs(q.imag)) < tol:
            return None
        mid = p + q
        if abs(mid) < 1e-15:
            x = 0.0
        else:
            center_real = (2.0 * mid / abs(mid) ** 2).real
            root = np.sqrt(max(center_real**2 - 1.0, 0.0))
            x = center_real - np.sign(center_real) * root
        if abs(x) >= 1.0:
            return None
        return float(2.0 * np.arctanh(x))


@dataclass(frozen=True)
class IdealTriangle:
    """Ordered triple of boundary points (xi0, xi1, xi2)."""

    xi0: BoundaryPoint
    xi1: BoundaryPoint
    xi2: BoundaryPoint

    @classmethod
    def from_angles(cls, a: float, b: float, c: float) -> "IdealTriangle":
        return cls(BoundaryPoint(a), BoundaryPoint(b), BoundaryPoint(c))

    @property
    def angles(self) -> tuple[float, float, float]:
        return (self.xi0.angle, self.xi1.angle, self.xi2.angle)

    def is_degenerate(self, tol: float = ANGLE_TOL) -> bool:
        a, b, c = self.angles
        return bool(
            min(angular_distance(a, b), angular_distance(b, c), angular_distance(a, c))
            <= tol
        )

    def moved_by(self, M: Isometry) -> "IdealTriangle":
        return IdealTriangle(*(xi.moved_by(M) for xi in (self.xi0, self.xi1, self.xi2)))


@dataclass(frozen=True)
class CompactTriangle:
    """Ordered triple of interior points of the disk."""

    z0: complex
    z1: complex
    z2: complex

    def __post_init__(self) -> None:
        for z in (self.z0, self.z1, self.z2):
            if not abs(z) < 1.0:
                raise ValueError(f"Vertex {z} is not inside the open disk")

    @property
    def vertices(self) -> tuple[complex, complex, complex]:
        return (complex(self.z0), complex(self.z1), complex(self.z2))

    def moved_by(self, M: Isometry) -> "CompactTriangle":
        return CompactTriangle(*(complex(M.apply(z)) for z in self.vertices))


def orientation_array(theta0, theta1, theta2, tol: float = ANGLE_TOL) -> np.ndarray:
    """
    Vectorized orientation cocycle: +1 counter-clockwise, -1 clockwise, 0 on the multidiagonal.
    """
    theta0, theta1, theta2 = np.broadcast_arrays(
        np.asarray(theta0, dtype=float),
        np.asarray(theta1, dtype=float),
        np.asarray(theta2, dtype=float),
    )
    first = ccw_offset(theta1, theta0)
    second = ccw_offset(theta2, theta0)
    sign = np.where(first < second, 1, -1)
    degenerate = (
        (angular_distance(theta0, theta1) <= tol)
        | (angular_distance(theta1, theta2) <= tol)
        | (angular_distance(theta0, theta2) <= tol)
    )
    return np.where(degenerate, 0, sign).astype(int)


def orientation(t: IdealTriangle) -> int:
    """+1 iff (xi0, xi1, xi2) is counter-clockwise on the circle."""
    if t.is_degenerate():
        raise DegenerateTriple(f"Triple {t.angles} lies on the multidiagonal")
    return int(orientation_array(*t.angles))


def interior_angles(t: CompactTriangle) -> tuple[float, float, float]:
    """Interior angles at z0, z1, z2 of a compact geodesic triangle."""
    angles = []
    vertices = t.vertices
    for k in range(3):
        to_origin = Isometry.moving(vertices[k]).inverse()
        u = complex(to_origin.apply(vertices[(k + 1) % 3]))
        v = complex(to_origin.apply(vertices[(k + 2) % 3]))
        angles.append(float(abs(np.angle(v / u))))
    return tuple(angles)


def angle_defect_area(t: CompactTriangle) -> float:
    """Hyperbolic area pi - (angle sum), the Gauss-Bonnet value."""
    return float(np.pi - sum(interior_angles(t)))
