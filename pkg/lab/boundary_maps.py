"""
Monotone circle maps induced by mapping classes.

Two independent constructions: the fixed-point correspondence of an
automorphism of the group, and the earthquake along the lifts of a simple
closed geodesic.
"""

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence

import numpy as np

from core.errors import DepthExceeded, InversionFailed, MonotonicityViolation
from core.fuchsian import CIRCUMRADIUS, GroupWord, OctagonPresentation
from core.geometry import (
    TWO_PI,
    BoundaryPoint,
    Geodesic,
    Isometry,
    angular_distance,
    ccw_offset,
    orientation_array,
    reduce_angle,
    translate_boundary,
)

logger = logging.getLogger(__name__)

BISECTION_STEPS = 60
ENDPOINT_TOL = 1e-9
DEFAULT_BASEPOINT = 0.3j


class BoundaryMap:
    """
    Orientation-preserving homeomorphism of the circle, evaluated on angles.

    Attributes:
        method (str): how the map is computed.
    """

    method = "abstract"

    def __call__(self, theta) -> np.ndarray:
        raise NotImplementedError

    @property
    def accuracy(self) -> float:
        """Declared bound on the angular error of every value."""
        return 0.0

    def inverse(self) -> "BoundaryMap":
        return BisectionInverse(self)

    def displacement(self, theta) -> np.ndarray:
        return angular_distance(np.asarray(self(theta)), theta)

    def preserves_order(self, triples: np.ndarray) -> bool:
        """True when every sampled triple keeps its cyclic orientation."""
        triples = np.atleast_2d(triples)
        images = np.asarray(self(triples.ravel())).reshape(triples.shape)
        before = orientation_array(triples[:, 0], triples[:, 1], triples[:, 2])
        after = orientation_array(images[:, 0], images[:, 1], images[:, 2])
        return bool(np.all(before == after))


class BisectionInverse(BoundaryMap):
    """Inverse of a monotone circle map by bisection on its lift."""

    def __init__(self, forward: BoundaryMap, tol: float = 1e-12) -> None:
        self.forward = forward
        self.tol = tol
        self.method = f"inverse({forward.method})"

    @property
    def accuracy(self) -> float:
        return self.forward.accuracy + self.tol

    def inverse(self) -> BoundaryMap:
        return self.forward

    def __call__(self, theta) -> np.ndarray:
        target = np.atleast_1d(np.asarray(theta, dtype=float))
        origin = float(np.asarray(self.forward(np.array([0.0])))[0])
        goal = ccw_offset(target, origin)
        lo = np.zeros_like(goal)
        hi = np.full_like(goal, TWO_PI)
        for _ in range(BISECTION_STEPS):
            mid = (lo + hi) / 2.0
            below = ccw_offset(np.asarray(self.forward(mid)), origin) < goal
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        solution = reduce_angle((lo + hi) / 2.0)
        miss = angular_distance(np.asarray(self.forward(solution)), target)
        if np.any(miss > max(1e-6, 10.0 * self.forward.accuracy)):
            raise InversionFailed(f"Bisection missed by {float(np.max(miss)):.3e}")
        return solution if np.ndim(theta) else float(solution[0])


def attracting_angles(alpha: np.ndarray, beta: np.ndarray) -> np.ndarray:
    """Attracting boundary fixed points of hyperbolic maps given by coefficient arrays."""
    root = np.sqrt(np.maximum(alpha.real**2 - 1.0, 0.0))
    conj_beta = np.conj(beta)
    first = (1j * alpha.imag + root) / conj_beta
    second = (1j * alpha.imag - root) / conj_beta
    pick_first = np.abs(conj_beta * first + np.conj(alpha)) > 1.0
    return reduce_angle(np.angle(np.where(pick_first, first, second)))


def _drop_rounding_reversals(source: np.ndarray, image: np.ndarray, tol: float) -> tuple[np.ndarray, np.ndarray]:
    """
    Drop samples whose image lies a hair behind the previous one.

    Powers and conjugates of one element share a fixed point; rounding can
    list their images in the wrong order, which reads as a full extra turn.
    """
    while source.size > 3:
        steps = ccw_offset(np.roll(image, -1), image)
        behind = np.flatnonzero(steps > TWO_PI - tol)
        if not behind.size:
            break
        keep = np.ones(source.size, dtype=bool)
        keep[(behind + 1) % source.size] = False
        logger.debug(f"Dropped {int((~keep).sum())} samples reversed by rounding")
        source, image = source[keep], image[keep]
    return source, image


class FixedPointBoundaryMap(BoundaryMap):
    """
    Circular piecewise-linear interpolation of a table of (source, image) angles.

    The table comes from the correspondence sending the attracting fixed point
    of g to that of phi(g), which is the boundary map of the lift inducing phi.
    Images that fall behind their predecessor by less than `rounding` are
    treated as coincident; any larger reversal is a genuine order violation.
    """

    def __init__(
        self,
        source: np.ndarray,
        image: np.ndarray,
        method: str = "fixed-point",
        rounding: float = 1e-9,
    ) -> None:
        order = np.argsort(source, kind="stable")
        source, image = np.asarray(source)[order], np.asarray(image)[order]
        keep = np.concatenate([[True], np.diff(source) > 1e-12])
        self.source, self.image = _drop_rounding_reversals(source[keep], image[keep], rounding)
        self.method = method
        self._source_steps = ccw_offset(np.roll(self.source, -1), self.source)
        self._image_steps = ccw_offset(np.roll(self.image, -1), self.image)
        turns = self._image_steps.sum() / TWO_PI
        if self.source.size < 3 or abs(turns - 1.0) > 1e-8:
            raise MonotonicityViolation(
                f"Sampled images wind {turns:.4f} times around the circle"
            )

    @classmethod
    def from_automorphism(
        cls,
        group: OctagonPresentation,
        images: dict[str, GroupWord],
        L: int,
    ) -> "FixedPointBoundaryMap":
        """
        Tabulate attracting fixed points over ball(L).

        Args:
            images: generator images of the automorphism, inverses included.
            L: word length, at least 3.
        """
        if L < 3:
            raise ValueError(f"Sample length must be at least 3, got {L}")
        letter_maps = {x: group.evaluate(w) for x, w in images.items()}
        cache: dict[str, Isometry] = {"": Isometry.identity()}
        source_coeffs, image_coeffs = [], []
        for word, M in group.ball(L):
            letters = word.letters
            if not letters:
                continue
            cache[letters] = cache[letters[:-1]] @ letter_maps[letters[-1]]
            source_coeffs.append((M.alpha, M.beta))
            image_coeffs.append((cache[letters].alpha, cache[letters].beta))
        src = np.array(source_coeffs)
        img = np.array(image_coeffs)
        table = cls(
            attracting_angles(src[:, 0], src[:, 1]),
            attracting_angles(img[:, 0], img[:, 1]),
            method=f"fixed-point(L={L})",
        )
        logger.info(f"Fixed-point map from {table.source.size} samples, gap {table.accuracy:.3e}")
        return table

    @cached_property
    def accuracy(self) -> float:
        """Largest gap between consecutive sampled images."""
        return float(self._image_steps.max())

    def __call__(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        flat = reduce_angle(np.atleast_1d(theta).ravel())
        index = np.searchsorted(self.source, flat, side="right") - 1
        index = np.where(index < 0, self.source.size - 1, index)
        fraction = ccw_offset(flat, self.source[index]) / self._source_steps[index]
        result = reduce_angle(self.image[index] + fraction * self._image_steps[index])
        return result.reshape(theta.shape) if theta.ndim else float(result[0])

    def inverse(self) -> "FixedPointBoundaryMap":
        return FixedPointBoundaryMap(self.image, self.source, method=f"inverse({self.method})")


@dataclass(frozen=True)
class Crossing:
    """A lift met by a ray at arc-length parameter s; start -> end keeps the basepoint on the left."""

    s: float
    start: float
    end: float

    @property
    def far_interval(self) -> tuple[float, float]:
        """(start, ccw width) of the boundary arc on the far side."""
        return self.start, float(ccw_offset(self.end, self.start))

    @property
    def lift(self) -> Geodesic:
        return Geodesic.from_endpoints(BoundaryPoint(self.start), BoundaryPoint(self.end))


@dataclass
class AffectedRegion:
    """
    Half-plane cut off from the central plate by a bounding lift.

    Attributes:
        start (float): where the bounding lift starts; it runs to `end` with
            the basepoint on its left, and the region's arc is start -> end.
        word (GroupWord): g with lift = g(axis of the core curve).
        plate_points (list[float]): endpoints of the lifts bounding the next
            plate; their chain is this lift alone.
    """

    start: float
    end: float
    word: GroupWord
    direction: int = 1
    plate_points: list[float] = field(default_factory=list)

    @cached_property
    def lift(self) -> Geodesic:
        return Geodesic.from_endpoints(BoundaryPoint(self.start), BoundaryPoint(self.end))

    @property
    def width(self) -> float:
        return float(ccw_offset(self.end, self.start))

    @property
    def attracting(self) -> float:
        return self.end if self.direction > 0 else self.start

    @property
    def repelling(self) -> float:
        return self.start if self.direction > 0 else self.end

    def contains(self, theta) -> np.ndarray:
        offset = ccw_offset(theta, self.start)
        return (offset > 0) & (offset < self.width)

    def interior_grid(self, count: int) -> np.ndarray:
        return reduce_angle(self.start + self.width * np.arange(1, count + 1) / (count + 1))

    def residual(self, theta):
        """Arc from theta to the attracting endpoint, measured inside the region."""
        if self.direction > 0:
            return ccw_offset(self.end, theta)
        return ccw_offset(theta, self.start)


def _lift_distance(starts: np.ndarray, ends: np.ndarray) -> np.ndarray:
    """Hyperbolic distance from the center to geodesics given by endpoint angles."""
    half = angular_distance(starts, ends) / 2.0
    closest = (1.0 - np.sin(half)) / np.maximum(np.cos(half), 1e-300)
    return 2.0 * np.arctanh(np.clip(closest, 0.0, 1.0 - 1e-16))


def _crossing_parameters(ray: Geodesic, starts: np.ndarray, ends: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Vectorized Geodesic.crossing_parameter; NaN where a lift does not cross."""
    to_frame = ray.frame.inverse()
    p = to_frame.apply(np.exp(1j * starts))
    q = to_frame.apply(np.exp(1j * ends))
    p, q = p / np.abs(p), q / np.abs(q)
    crossing = (p.imag * q.imag < 0) & (np.minimum(np.abs(p.imag), np.abs(q.imag)) >= tol)
    mid = p + q
    size = np.abs(mid)
    center = np.where(size > 1e-15, (2.0 * mid / np.maximum(size, 1e-300) ** 2).real, 0.0)
    x = center - np.sign(center) * np.sqrt(np.maximum(center**2 - 1.0, 0.0))
    crossing &= np.abs(x) < 1.0
    return np.where(crossing, 2.0 * np.arctanh(np.where(crossing, x, 0.0)), np.nan)


def _angle_key(theta: float) -> float:
    rounded = round(theta, 9)
    return 0.0 if rounded >= round(TWO_PI, 9) else rounded


def _lift_endpoints(elements: Sequence[tuple[GroupWord, Isometry]], core: Geodesic) -> tuple:
    """Endpoints of g(core) for every element, deduplicated as unoriented geodesics."""
    a, b = core.start.angle, core.end.angle
    words, starts, ends = [], [], []
    seen = set()
    for word, g in elements:
        s, e = float(g.apply_boundary(a)), float(g.apply_boundary(b))
        key = tuple(sorted((_angle_key(s), _angle_key(e))))
        if key in seen:
            continue
        seen.add(key)
        words.append(word)
        starts.append(s)
        ends.append(e)
    return words, np.array(starts), np.array(ends)


class Earthquake:
    """
    Left earthquake along the lifts of the closed geodesic of a generator.

    The map is the identity on the central plate containing the basepoint;
    on the plate reached after crossing lifts l1, ..., lk it is
    T1 o ... o Tk, Ti the translation by the curve length along li oriented
    with the basepoint on its left ("counter-clockwise around the plate").

    Chains are found by marching along the ray from the basepoint: each step
    reduces the current point into the octagon and tests the lifts that meet
    a neighborhood of the octagon. The march stops at `horizon` or once the
    ray comes within `boundary_cap` of the circle, past which lifts pulled
    back through long words are no longer resolved in double precision.
    """

    def __init__(
        self,
        group: OctagonPresentation,
        curve: str = "a",
        depth: int = 8,
        direction: int = 1,
        basepoint: complex = DEFAULT_BASEPOINT,
        step: float = 0.5,
        horizon: float = 20.0,
        local_ball: int = 3,
        region_ball: int = 4,
        strict: bool = False,
        boundary_cap: float = 1e-6,
    ) -> None:
        if direction not in (1, -1):
            raise ValueError("direction must be +1 or -1")
        self.group = group
        self.curve = GroupWord.parse(curve)
        self.depth = depth
        self.direction = direction
        self.basepoint = complex(basepoint)
        self.step = step
        self.horizon = horizon
        self.boundary_cap = boundary_cap
        self.strict = strict
        self.core, self.length = group.closed_geodesic(self.curve)

        words, starts, ends = _lift_endpoints(group.ball(local_ball), self.core)
        near = _lift_distance(starts, ends) <= CIRCUMRADIUS + step
        self._local_starts, self._local_ends = starts[near], ends[near]

        self.lift_words, self.lift_starts, self.lift_ends = _lift_endpoints(
            group.ball(region_ball), self.core
        )
        self._check_disjoint()
        clearance = min(
            Geodesic.from_endpoints(BoundaryPoint(s), BoundaryPoint(e)).distance_to_point(self.basepoint)
            for s, e in zip(self.lift_starts, self.lift_ends)
        )
        if clearance < 1e-6:
            raise ValueError(f"Basepoint {self.basepoint} lies on a lift of {self.curve}")
        self.regions = self._bounding_regions()
        logger.info(
            f"Earthquake along {self.curve}: length {self.length:.6f}, "
            f"{len(self.lift_words)} lifts, {len(self.regions)} depth-1 regions"
        )

    def _oriented(self, start: float, end: float) -> tuple[float, float]:
        """The two endpoints ordered so that the basepoint lies on the left."""
        to_origin = Isometry.moving(self.basepoint).inverse()
        u, v = float(to_origin.apply_boundary(start)), float(to_origin.apply_boundary(end))
        # seen from the basepoint, its own side is bounded by the longer arc
        return (start, end) if ccw_offset(u, v) > np.pi else (end, start)

    def _check_disjoint(self) -> None:
        s, e = self.lift_starts, self.lift_ends
        first = orientation_array(s[:, None], e[:, None], s[None, :])
        second = orientation_array(s[:, None], e[:, None], e[None, :])
        if np.any(first * second < 0):
            raise ValueError(f"Enumerated lifts of {self.curve} cross; the curve is not simple")

    def _bounding_regions(self) -> list[AffectedRegion]:
        lifts = [self._oriented(s, e) for s, e in zip(self.lift_starts, self.lift_ends)]
        starts = np.array([start for start, _ in lifts])
        widths = ccw_offset(np.array([end for _, end in lifts]), starts)
        # inside[i, j]: far interval of i lies within that of j
        offset = ccw_offset(starts[:, None], starts[None, :])
        inside = (offset + widths[:, None] <= widths[None, :] + 1e-12) & ~np.eye(len(lifts), dtype=bool)
        regions = []
        for i in np.flatnonzero(~inside.any(axis=1)):
            nested = np.flatnonzero(inside[:, i])
            children = [j for j in nested if not np.any(inside[j, nested])]
            points = sorted(float(angle) for j in children for angle in lifts[j])
            regions.append(AffectedRegion(*lifts[i], self.lift_words[i], self.direction, points))
        return sorted(regions, key=lambda r: r.start)

    def _ray(self, xi: float) -> Geodesic:
        to_origin = Isometry.moving(self.basepoint).inverse()
        u = float(to_origin.apply_boundary(xi))
        through_origin = Geodesic.from_endpoints(BoundaryPoint(u + np.pi), BoundaryPoint(u))
        return through_origin.transformed(Isometry.moving(self.basepoint))

    def _extent(self, ray: Geodesic) -> float:
        """Last marching parameter before the horizon or the boundary cap."""
        grid = np.arange(0.0, self.horizon + self.step / 2.0, self.step)
        near_circle = np.flatnonzero(1.0 - np.abs(ray.point(grid)) < self.boundary_cap)
        if not near_circle.size:
            return float(grid[-1])
        return float(grid[max(near_circle[0] - 1, 0)])

    def _march(self, xi: float, depth: int) -> tuple[list[Crossing], Optional[Crossing], float]:
        ray = self._ray(xi)
        extent = self._extent(ray)
        found: dict[float, tuple[float, float]] = {}
        checked = 0.0
        for s in np.arange(0.0, extent + self.step / 2.0, self.step):
            checked = float(s)
            z = complex(ray.point(s))
            _, word = self.group.reduce_to_domain(z)
            back = self.group.evaluate(word).inverse()
            starts = back.apply_boundary(self._local_starts)
            ends = back.apply_boundary(self._local_ends)
            # a ray aimed at a lift endpoint runs alongside that lift without crossing it
            aside = (angular_distance(starts, xi) > ENDPOINT_TOL) & (angular_distance(ends, xi) > ENDPOINT_TOL)
            params = _crossing_parameters(ray, starts, ends)
            for k in np.flatnonzero(aside & np.isfinite(params) & (params > 0)):
                if not any(abs(params[k] - t) < 1e-6 for t in found):
                    found[float(params[k])] = (float(starts[k]), float(ends[k]))
            if sum(1 for t in found if t <= s) > depth:
                break
        # crossings past the last marching point may have gaps before them
        params = sorted(t for t in found if t <= checked + self.step / 2.0)
        crossings = [Crossing(t, *self._oriented(*found[t])) for t in params]
        extra = crossings[depth] if len(crossings) > depth else None
        return crossings[:depth], extra, checked

    def chain(self, xi: float, depth: Optional[int] = None) -> tuple[list[Crossing], Optional[Crossing]]:
        """
        Lifts separating the basepoint from xi, nearest first.

        Returns:
            tuple: the first `depth` crossings, and the next crossing when
            the chain is longer than `depth` (None otherwise).
        """
        crossings, extra, _ = self._march(xi, self.depth if depth is None else depth)
        return crossings, extra

    def _axis(self, start: float, end: float) -> tuple[float, float]:
        """(repelling, attracting) of the translation along a lift running start -> end."""
        return (start, end) if self.direction > 0 else (end, start)

    def translation(self, lift: Geodesic) -> Isometry:
        return Isometry.hyperbolic(*self._axis(lift.start.angle, lift.end.angle), self.length)

    def _translate(self, theta, crossings: list[Crossing], power: int = 1):
        """T1^power o ... o Tk^power applied to boundary angles."""
        for c in reversed(crossings):
            theta = translate_boundary(theta, *self._axis(c.start, c.end), power * self.length)
        return theta

    def _horizon_interval(self, xi: float, extent: float) -> tuple[float, float]:
        """Shadow on the circle of the geodesic orthogonal to the ray at `extent`."""
        ray = self._ray(xi)
        # cos(spread) = tanh(extent)
        spread = 2.0 * float(np.arctan(np.exp(-extent)))
        a = float(np.angle(ray.frame.apply(np.exp(-1j * spread))))
        b = float(np.angle(ray.frame.apply(np.exp(1j * spread))))
        return reduce_angle(a), float(ccw_offset(b, a))

    def image(self, xi: float, depth: Optional[int] = None, strict: Optional[bool] = None) -> tuple[float, float]:
        """
        Earthquake image of one boundary angle with its truncation bound.

        Raises:
            DepthExceeded: in strict mode, when more than `depth` lifts separate xi.
        """
        depth = self.depth if depth is None else depth
        strict = self.strict if strict is None else strict
        crossings, extra, extent = self._march(xi, depth)
        if extra is not None and strict:
            logger.error(f"Chain of {xi:.6f} is longer than {depth}")
            raise DepthExceeded(f"More than {depth} lifts separate the basepoint from {xi}")
        value = float(self._translate(float(xi), crossings))
        if extra is not None:
            start, width = extra.far_interval
        else:
            start, width = self._horizon_interval(xi, extent)
        end = reduce_angle(start + width)
        bound = float(ccw_offset(self._translate(end, crossings), self._translate(start, crossings)))
        return value, bound

    def iterate(self, xi: float, n: int) -> float:
        """
        n-th iterate of the boundary map.

        The translation along a crossed lift is a deck transformation fixing
        the plates on both sides, so it commutes with the earthquake based
        beyond it; E^n is then T1^n o ... o Tk^n along the chain of xi.
        """
        if n < 0:
            raise ValueError(f"Iteration count must be non-negative, got {n}")
        crossings, _, _ = self._march(xi, self.depth)
        return float(self._translate(float(xi), crossings, n))

    def orbit(self, xi: float, steps: int) -> np.ndarray:
        """E(xi), ..., E^steps(xi) from a single chain search."""
        crossings, _, _ = self._march(xi, self.depth)
        return np.array([self._translate(float(xi), crossings, n) for n in range(1, steps + 1)])

    def boundary_map(self, depth: Optional[int] = None) -> "EarthquakeBoundaryMap":
        return EarthquakeBoundaryMap(self, self.depth if depth is None else depth)


class EarthquakeBoundaryMap(BoundaryMap):
    """Boundary values of an earthquake truncated at a fixed chain depth."""

    def __init__(self, earthquake: Earthquake, depth: int) -> None:
        self.earthquake = earthquake
        self.depth = depth
        self.method = f"earthquake(depth={depth})"
        self.last_bound = 0.0

    def __call__(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        values, bounds = [], []
        for xi in np.atleast_1d(theta).ravel():
            value, bound = self.earthquake.image(float(xi), self.depth, strict=False)
            values.append(value)
            bounds.append(bound)
        self.last_bound = max(bounds) if bounds else 0.0
        result = np.array(values)
        return result.reshape(theta.shape) if theta.ndim else float(result[0])

    @cached_property
    def accuracy(self) -> float:
        """Largest truncation bound over a uniform grid of 64 angles."""
        self(np.linspace(0.0, TWO_PI, 64, endpoint=False))
        return self.last_bound
