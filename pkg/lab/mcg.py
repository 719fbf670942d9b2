"""
Dehn twists acting on the group, on H1, on the boundary circle and on boundary cocycles.
"""

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from core.errors import LabError, NotSymplectic, RelatorViolation
from core.fuchsian import GENERATORS, RELATOR, GroupWord, OctagonPresentation, invert_letter
from core.geometry import Isometry, angular_distance
from lab.boundary_maps import AffectedRegion, BoundaryMap, Earthquake, FixedPointBoundaryMap
from lab.cocycles import BoundaryCocycle
from models.report import CrossValidation, ThreeRegionReport

logger = logging.getLogger(__name__)

# Intersection form on H1 in the basis (a, b, c, d) of the relator [a, b][c, d].
J = np.array([[0, 1, 0, 0], [-1, 0, 0, 0], [0, 0, 0, 1], [0, 0, -1, 0]], dtype=np.int64)

# Each twist moves one generator: x -> x + <x, v> v on H1 with v the core curve.
TWIST_IMAGES = {
    "a": ({"b": "bA"}, {"b": "ba"}),
    "b": ({"a": "ab"}, {"a": "aB"}),
    "c": ({"d": "dC"}, {"d": "dc"}),
    "d": ({"c": "cd"}, {"c": "cD"}),
}


def _full_images(images: dict[str, GroupWord]) -> dict[str, GroupWord]:
    full = dict(images)
    for letter in GENERATORS:
        full[letter.upper()] = images[letter].inverse()
    return full


@dataclass(frozen=True)
class TwistAutomorphism:
    """
    An automorphism of the group given by generator images, with its inverse.

    Attributes:
        images (dict[str, GroupWord]): images of a, b, c, d.
        inverse_images (dict[str, GroupWord]): images of the inverse automorphism.
        name (str): twist word, e.g. "aB" for tau_a o tau_b^-1.
    """

    images: dict[str, GroupWord]
    inverse_images: dict[str, GroupWord]
    name: str = "1"
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    @classmethod
    def identity(cls) -> "TwistAutomorphism":
        same = {x: GroupWord(x) for x in GENERATORS}
        return cls(same, dict(same), "1")

    def apply(self, w: GroupWord | str) -> GroupWord:
        word = w if isinstance(w, GroupWord) else GroupWord.parse(w)
        full = self.full_images
        return GroupWord("".join(full[x].letters for x in word.letters))

    @property
    def full_images(self) -> dict[str, GroupWord]:
        if "full" not in self._cache:
            self._cache["full"] = _full_images(self.images)
        return self._cache["full"]

    def inverse(self) -> "TwistAutomorphism":
        name = "".join(invert_letter(x) for x in reversed(self.name)) if self.name != "1" else "1"
        return TwistAutomorphism(dict(self.inverse_images), dict(self.images), name)

    def __matmul__(self, other: "TwistAutomorphism") -> "TwistAutomorphism":
        """(self @ other)(x) = self(other(x))."""
        images = {x: self.apply(other.images[x]) for x in GENERATORS}
        inverse = {x: other.inverse().apply(self.inverse_images[x]) for x in GENERATORS}
        name = "".join(n for n in (self.name, other.name) if n != "1") or "1"
        return TwistAutomorphism(images, inverse, name)

    def power(self, n: int) -> "TwistAutomorphism":
        base = self if n >= 0 else self.inverse()
        result = TwistAutomorphism.identity()
        for _ in range(abs(n)):
            result = result @ base
        return result

    def check_relator(self) -> None:
        image = self.apply(RELATOR)
        if not image.is_conjugate_to(RELATOR):
            logger.error(f"Relator goes to {image} under {self.name}")
            raise RelatorViolation(f"{self.name} sends the relator to {image}")

    def inverse_residual(self, group: OctagonPresentation) -> float:
        """Largest matrix distance between phi(phi^-1(x)) and x over the generators."""
        back = self.inverse()
        return max(
            group.evaluate(self.apply(back.images[x])).distance_to(group.evaluate(x))
            for x in GENERATORS
        )


def twist_images(curve: str) -> TwistAutomorphism:
    """The Dehn twist along the simple closed curve of a generator."""
    if curve not in TWIST_IMAGES:
        raise ValueError(f"Unknown twist curve {curve!r}; expected one of {GENERATORS}")
    moved, moved_back = TWIST_IMAGES[curve]
    images = {x: GroupWord(moved.get(x, x)) for x in GENERATORS}
    inverse = {x: GroupWord(moved_back.get(x, x)) for x in GENERATORS}
    phi = TwistAutomorphism(images, inverse, curve)
    phi.check_relator()
    return phi


def twist_word(text: str) -> TwistAutomorphism:
    """Compose twists from a word such as 'aB' = tau_a o tau_b^-1; '1' is the identity."""
    text = text.strip()
    result = TwistAutomorphism.identity()
    if text in ("", "1", "e"):
        return result
    for letter in text:
        if letter.lower() not in GENERATORS:
            raise ValueError(f"Unknown twist letter {letter!r} in {text!r}")
        phi = twist_images(letter.lower())
        result = result @ (phi if letter.islower() else phi.inverse())
    result.check_relator()
    return result


def transvection(v: Sequence[int]) -> np.ndarray:
    """x -> x + <x, v> v as an integer matrix acting on column vectors."""
    v = np.asarray(v, dtype=np.int64)
    return np.eye(4, dtype=np.int64) + np.outer(v, J @ v)


def h1_matrix(phi: TwistAutomorphism) -> np.ndarray:
    """Integer matrix of phi on H1; columns are images of a, b, c, d."""
    M = np.column_stack([phi.images[x].abelianization() for x in GENERATORS]).astype(np.int64)
    if not np.array_equal(M.T @ J @ M, J):
        logger.error(f"Matrix of {phi.name} is not symplectic:\n{M}")
        raise NotSymplectic(f"H1 matrix of {phi.name} fails M^T J M = J")
    return M


def abelianization_rank(group: OctagonPresentation, radius: int = 2) -> int:
    vectors = np.array([w.abelianization() for w, _ in group.ball(radius)])
    return int(np.linalg.matrix_rank(vectors))


def boundary_map_fixed_point(
    group: OctagonPresentation, phi: TwistAutomorphism, L: int
) -> FixedPointBoundaryMap:
    return FixedPointBoundaryMap.from_automorphism(group, phi.full_images, L)


def boundary_map_earthquake(E: Earthquake, xi: float, depth: Optional[int] = None) -> float:
    """Earthquake image of xi; raises DepthExceeded when E is strict and the chain is too long."""
    value, _ = E.image(xi, depth)
    return value


def act_on_cocycle(boundary_map: BoundaryMap, f: BoundaryCocycle) -> BoundaryCocycle:
    """(phi . f)(x0, x1, x2) = f(m^-1 x0, m^-1 x1, m^-1 x2)."""
    return f.pulled_back(boundary_map.inverse(), f"{boundary_map.method}.{f.name}")


def equivariance_ratio(
    F: BoundaryMap,
    phi: TwistAutomorphism,
    group: OctagonPresentation,
    points: np.ndarray,
    radius: int = 2,
) -> float:
    """
    Worst ratio of |F(g xi) - phi(g) F(xi)| to its declared bound over g in ball(radius).

    F(g xi) is off by at most F.accuracy, and phi(g) F(xi) by F.accuracy
    stretched by the largest derivative of phi(g) within that distance of F(xi).
    """
    base = np.asarray(F(points))
    worst = 0.0
    for word, g in group.ball(radius):
        h = group.evaluate(phi.apply(word))
        lhs = np.asarray(F(g.apply_boundary(points)))
        rhs = h.apply_boundary(base)
        bound = F.accuracy * (1.0 + h.max_boundary_derivative_near(base, F.accuracy)) + 1e-12
        worst = max(worst, float(np.max(angular_distance(lhs, rhs) / bound)))
    return worst


def induced_automorphism(E: Earthquake, radius: int = 5) -> dict[str, Optional[GroupWord]]:
    """
    Generator images of the automorphism realized by an earthquake.

    E commutes with the group up to phi_E: E(g xi) = phi_E(g) E(xi). Three
    endpoints of bounding lifts are fixed by E, so phi_E(g) is the isometry
    sending them to E(g xi_i), matched against ball(radius).
    """
    if len(E.regions) < 3:
        raise LabError("Need three bounding lifts to fit the induced automorphism")
    anchors = sorted(r.start for r in E.regions[:3])
    targets = []
    for letter in GENERATORS:
        g = E.group.evaluate(letter)
        moved = [float(g.apply_boundary(xi)) for xi in anchors]
        images = [E.image(xi, strict=False)[0] for xi in moved]
        targets.append(Isometry.from_boundary_triples(anchors, images))
    matches = E.group.words_matching(targets, radius, tol=1e-6)
    found = dict(zip(GENERATORS, matches))
    logger.info(f"Earthquake induces {', '.join(f'{x}->{w}' for x, w in found.items())}")
    return found


def twist_direction(E: Earthquake, phi: TwistAutomorphism, radius: int = 5) -> int:
    """+1 if E realizes phi on H1, -1 if it realizes phi^-1, 0 when undecided."""
    images = induced_automorphism(E, radius)
    if any(w is None for w in images.values()):
        logger.warning("Induced automorphism not found in the ball; twist direction undecided")
        return 0
    induced = np.column_stack([images[x].abelianization() for x in GENERATORS])
    if np.array_equal(induced, h1_matrix(phi)):
        return 1
    if np.array_equal(induced, h1_matrix(phi.inverse())):
        return -1
    logger.warning(f"Induced H1 action matches neither {phi.name} nor its inverse")
    return 0


def cross_validate(
    E: Earthquake,
    F: BoundaryMap,
    points: np.ndarray,
    radius: int = 3,
) -> CrossValidation:
    """
    Search g in ball(radius) minimizing max |E(xi) - g F(xi)| over the points.

    Lifts of one mapping class differ by the group, so the two algorithms
    agree only after this normalization.
    """
    quake = E.boundary_map()
    values = np.asarray(quake(points))
    truncation = quake.last_bound
    base = np.asarray(F(points))
    best_word, best_gap, best_g = None, np.inf, Isometry.identity()
    for word, g in E.group.ball(radius):
        gap = float(np.max(angular_distance(values, g.apply_boundary(base))))
        if gap < best_gap:
            best_word, best_gap, best_g = word, gap, g
    stretch = float(np.max(best_g.max_boundary_derivative_near(base, F.accuracy)))
    bound = max(F.accuracy * stretch, truncation)
    logger.info(f"Cross-validation: g = {best_word}, gap {best_gap:.3e}, bound {bound:.3e}")
    return CrossValidation(
        normalizer=str(best_word), max_discrepancy=best_gap, bound=bound, points=len(points)
    )


def cocycle_agreement(
    f: BoundaryCocycle, first: BoundaryMap, second: BoundaryMap, triples: np.ndarray
) -> float:
    """
    Max |f o m1 - f o m2| on triples.

    Boundary maps of two lifts differ by a group element, and f is invariant,
    so no normalization is needed.
    """
    return float(np.max(np.abs(f.pulled_back(first)(triples) - f.pulled_back(second)(triples))))


def three_region_experiment(
    f: BoundaryCocycle,
    E: Earthquake,
    regions: Sequence[int],
    grid: int = 5,
    steps: int = 8,
    noise: float = 1e-9,
) -> ThreeRegionReport:
    """
    Spread of f over the product of three affected-region intervals, and
    earthquake orbits of generic interior points.

    The k-th orbit starts from the k-th interior grid point of each region;
    every coordinate should approach its region's attracting endpoint with a
    strictly shrinking residual, and f along the orbit should approach its
    value on the attracting triple.
    """
    if len(set(regions)) != 3 or any(not 0 <= i < len(E.regions) for i in regions):
        raise ValueError(f"Need three distinct region indices below {len(E.regions)}, got {regions}")
    chosen: list[AffectedRegion] = [E.regions[i] for i in regions]
    axes = [r.interior_grid(grid) for r in chosen]
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 3)
    values = f(mesh)
    spread = float(values.max() - values.min())

    limit = float(f(np.array([[r.attracting for r in chosen]]))[0])
    # orbits[k, i, n - 1] = E^n of the i-th grid point of region k
    orbits = np.array([[E.orbit(float(xi), steps) for xi in axis] for axis in axes])
    distances = np.stack([r.residual(orbits[k]) for k, r in enumerate(chosen)])
    start = np.stack([r.residual(axis) for r, axis in zip(chosen, axes)])[:, :, None]
    history = np.concatenate([start, distances], axis=2)
    shrinking = (history[:, :, 1:] < history[:, :, :-1]) | (history[:, :, :-1] <= noise)
    converging = bool(np.all(shrinking))

    residuals = []
    for n in range(steps):
        triples = orbits[:, :, n].T
        residuals.append(float(np.max(np.abs(f(triples) - limit))))
    monotone = all(b <= a + noise for a, b in zip(residuals, residuals[1:]))
    verdict = "constant" if spread <= noise else "varies"
    logger.info(
        f"Three regions {tuple(regions)}: spread {spread:.3e}, orbit monotone {monotone}, "
        f"interior points converging {converging}"
    )
    return ThreeRegionReport(
        regions=tuple(regions),
        grid=grid,
        spread=spread,
        attracting_value=limit,
        orbit_residuals=residuals,
        endpoint_residuals=[float(d) for d in distances.max(axis=(0, 1))],
        monotone=monotone,
        converging=converging,
        verdict=verdict,
    )
