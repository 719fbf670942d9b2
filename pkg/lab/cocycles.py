"""
Bounded 2-cocycles on triples of boundary points and on triples of group elements.

Boundary cocycles are evaluators on arrays of angles with shape (n, 3);
nothing is tabulated.
"""

import itertools
import logging
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from core.forms import TwoForm, triangle_integral
from core.fuchsian import GroupWord, OctagonPresentation
from core.geometry import (
    CompactTriangle,
    IdealTriangle,
    Isometry,
    angular_distance,
    orientation_array,
)
from core.quadrature import DEFAULT_TOLERANCE

logger = logging.getLogger(__name__)

MC_CHUNK = 10000
MIN_MC_SAMPLES = 1000

TripleEvaluator = Callable[[np.ndarray], np.ndarray]
# Boundary 1-cochain h(x, y) on angle arrays.
Cochain1 = Callable[[np.ndarray, np.ndarray], np.ndarray]


class BoundaryCocycle:
    """
    Alternating bounded function on triples of boundary angles.

    Attributes:
        kind (str): integral, orientation, scaled, sum, coboundary or pulled-back.
        sup_norm (float): declared bound of |f|.
    """

    def __init__(self, evaluator: TripleEvaluator, sup_norm: float, kind: str, name: str = "") -> None:
        self._evaluator = evaluator
        self.sup_norm = float(sup_norm)
        self.kind = kind
        self.name = name or kind

    def __call__(self, triples) -> np.ndarray:
        triples = np.atleast_2d(np.asarray(triples, dtype=float))
        return np.asarray(self._evaluator(triples), dtype=float)

    def evaluate(self, t: IdealTriangle) -> float:
        return float(self(np.array([t.angles]))[0])

    def __add__(self, other: "BoundaryCocycle") -> "BoundaryCocycle":
        return BoundaryCocycle(
            lambda x: self(x) + other(x),
            self.sup_norm + other.sup_norm,
            "sum",
            f"{self.name}+{other.name}",
        )

    def scaled(self, factor: float) -> "BoundaryCocycle":
        return BoundaryCocycle(
            lambda x: factor * self(x), abs(factor) * self.sup_norm, "scaled", f"{factor:g}*{self.name}"
        )

    def pulled_back(self, circle_map: Callable[[np.ndarray], np.ndarray], name: str = "") -> "BoundaryCocycle":
        """(x0, x1, x2) -> f(m(x0), m(x1), m(x2)) for a circle map m on angles."""

        def evaluator(triples: np.ndarray) -> np.ndarray:
            moved = np.asarray(circle_map(triples.ravel()), dtype=float).reshape(triples.shape)
            return self(moved)

        return BoundaryCocycle(evaluator, self.sup_norm, "pulled-back", name or f"m*{self.name}")


def orientation_cocycle() -> BoundaryCocycle:
    """Or: +1 on counter-clockwise triples, -1 on clockwise ones, 0 on the multidiagonal."""
    return BoundaryCocycle(
        lambda x: orientation_array(x[:, 0], x[:, 1], x[:, 2]).astype(float), 1.0, "orientation", "Or"
    )


def integral_cocycle(omega: TwoForm, tol: float = DEFAULT_TOLERANCE) -> BoundaryCocycle:
    """f(xi0, xi1, xi2) = integral of the lifted form over the ideal triangle."""

    def evaluator(triples: np.ndarray) -> np.ndarray:
        return np.array(
            [triangle_integral(omega, IdealTriangle.from_angles(*row), tol) for row in triples]
        )

    return BoundaryCocycle(evaluator, np.pi * omega.sup_norm, "integral", f"f[{omega.name}]")


def coboundary_cocycle(h: Cochain1, sup_norm: float = 1.0, name: str = "h") -> BoundaryCocycle:
    """delta h(x0, x1, x2) = h(x1, x2) - h(x0, x2) + h(x0, x1)."""

    def evaluator(x: np.ndarray) -> np.ndarray:
        return h(x[:, 1], x[:, 2]) - h(x[:, 0], x[:, 2]) + h(x[:, 0], x[:, 1])

    return BoundaryCocycle(evaluator, 3.0 * sup_norm, "coboundary", f"d{name}")


def sine_cochain(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Alternating continuous boundary 1-cochain sin(y - x)."""
    return np.sin(np.asarray(y) - np.asarray(x))


def sample_boundary_tuples(
    k: int,
    count: int,
    seed: int = 0,
    min_separation: float = 1e-3,
) -> np.ndarray:
    """
    Uniform k-tuples of angles with pairwise angular separation >= min_separation.

    Returns:
        np.ndarray: shape (count, k), deterministic for a fixed seed.
    """
    rng = np.random.default_rng(seed)
    accepted: list[np.ndarray] = []
    have = 0
    while have < count:
        batch = rng.uniform(0.0, 2.0 * np.pi, size=(2 * (count - have) + 16, k))
        ok = np.ones(len(batch), dtype=bool)
        for i, j in itertools.combinations(range(k), 2):
            ok &= angular_distance(batch[:, i], batch[:, j]) >= min_separation
        accepted.append(batch[ok])
        have += int(ok.sum())
    return np.vstack(accepted)[:count]


def check_cocycle(f: BoundaryCocycle, quadruples: np.ndarray) -> float:
    """Max |delta f| over boundary 4-tuples."""
    q = np.atleast_2d(quadruples)
    residual = (
        f(q[:, [1, 2, 3]]) - f(q[:, [0, 2, 3]]) + f(q[:, [0, 1, 3]]) - f(q[:, [0, 1, 2]])
    )
    return float(np.max(np.abs(residual))) if residual.size else 0.0


def check_invariance(f: BoundaryCocycle, g: Isometry, triples: np.ndarray) -> float:
    """Max |f(g x0, g x1, g x2) - f(x0, x1, x2)|."""
    triples = np.atleast_2d(triples)
    moved = g.apply_boundary(triples)
    return float(np.max(np.abs(f(moved) - f(triples)))) if triples.size else 0.0


def check_alternation(f: BoundaryCocycle, triples: np.ndarray) -> float:
    """Max |f(sigma x) - sign(sigma) f(x)| over the six permutations."""
    triples = np.atleast_2d(triples)
    base = f(triples)
    worst = 0.0
    for perm in itertools.permutations(range(3)):
        inversions = sum(1 for i, j in itertools.combinations(range(3), 2) if perm[i] > perm[j])
        sign = -1.0 if inversions % 2 else 1.0
        worst = max(worst, float(np.max(np.abs(f(triples[:, list(perm)]) - sign * base))))
    return worst


def _stream(seed: int, chunk: int) -> np.random.Generator:
    """Counter-based stream for one chunk of Monte Carlo samples."""
    return np.random.Generator(np.random.Philox(key=seed).jumped(chunk))


def _uniform_angles(seed: int, count: int, width: int, offset: int = 0) -> np.ndarray:
    chunks = []
    for index, start in enumerate(range(0, count, MC_CHUNK)):
        size = min(MC_CHUNK, count - start)
        chunks.append(_stream(seed, offset + index).uniform(0.0, 2.0 * np.pi, size=(size, width)))
    return np.vstack(chunks)


def _mean_and_stderr(values: np.ndarray) -> tuple[float, float]:
    return float(values.mean()), float(values.std(ddof=1) / np.sqrt(values.size))


def _as_isometries(group: OctagonPresentation, words: Sequence) -> list[Isometry]:
    return [w if isinstance(w, Isometry) else group.evaluate(w) for w in words]


def psi(
    f: BoundaryCocycle,
    words: Sequence,
    group: OctagonPresentation,
    mc_samples: int = 100000,
    seed: int = 0,
    offset: int = 0,
) -> tuple[float, float]:
    """
    Monte Carlo estimate of the integral of f(g0 x0, g1 x1, g2 x2) over uniform x.

    Args:
        words: three GroupWords (or isometries) g0, g1, g2.
        offset: first chunk index of the random stream.

    Returns:
        tuple[float, float]: estimate and standard error.
    """
    if mc_samples < MIN_MC_SAMPLES:
        raise ValueError(f"psi needs at least {MIN_MC_SAMPLES} samples, got {mc_samples}")
    g = _as_isometries(group, words)
    x = _uniform_angles(seed, mc_samples, 3, offset)
    moved = np.column_stack([g[i].apply_boundary(x[:, i]) for i in range(3)])
    return _mean_and_stderr(f(moved))


def psi1(
    h: Cochain1,
    words: Sequence,
    group: OctagonPresentation,
    mc_samples: int = 100000,
    seed: int = 0,
    offset: int = 0,
) -> tuple[float, float]:
    """Monte Carlo estimate of the integral of h(g0 x0, g1 x1)."""
    if mc_samples < MIN_MC_SAMPLES:
        raise ValueError(f"psi1 needs at least {MIN_MC_SAMPLES} samples, got {mc_samples}")
    g = _as_isometries(group, words)
    x = _uniform_angles(seed, mc_samples, 2, offset)
    return _mean_and_stderr(h(g[0].apply_boundary(x[:, 0]), g[1].apply_boundary(x[:, 1])))


def chain_map_probe(
    h: Cochain1,
    words: Sequence,
    group: OctagonPresentation,
    mc_samples: int = 100000,
    seed: int = 0,
) -> tuple[float, float]:
    """
    psi(delta h)(g0, g1, g2) minus delta(psi1 h)(g0, g1, g2), with its standard error.

    Each of the four estimates draws from its own block of the stream, so the
    difference is a genuine statistical test rather than a pointwise identity.
    """
    g0, g1, g2 = words
    block = -(-mc_samples // MC_CHUNK)
    lhs, lhs_err = psi(coboundary_cocycle(h), (g0, g1, g2), group, mc_samples, seed, 0)
    terms = [((g1, g2), 1.0), ((g0, g2), -1.0), ((g0, g1), 1.0)]
    rhs, variance = 0.0, lhs_err**2
    for k, (pair, sign) in enumerate(terms, start=1):
        value, err = psi1(h, pair, group, mc_samples, seed, k * block)
        rhs += sign * value
        variance += err**2
    return lhs - rhs, float(np.sqrt(variance))


class GroupCochain2:
    """A bounded function on triples of group words, meant to be invariant under the diagonal left action."""

    def __init__(self, func: Callable[[GroupWord, GroupWord, GroupWord], float], name: str = "") -> None:
        self.func = func
        self.name = name

    def __call__(self, g0: GroupWord, g1: GroupWord, g2: GroupWord) -> float:
        return float(self.func(g0, g1, g2))


def theta_cochain(
    omega: TwoForm,
    words: Sequence[GroupWord],
    group: Optional[OctagonPresentation] = None,
    tol: float = DEFAULT_TOLERANCE,
) -> float:
    """Integral of the lifted form over the geodesic triangle on g0(0), g1(0), g2(0)."""
    group = group or omega.group
    vertices = [complex(group.evaluate(w).apply(0j)) for w in words]
    return triangle_integral(omega, CompactTriangle(*vertices), tol)


def theta_group_cochain(omega: TwoForm, tol: float = DEFAULT_TOLERANCE) -> GroupCochain2:
    return GroupCochain2(lambda *w: theta_cochain(omega, w, tol=tol), f"theta[{omega.name}]")


def boundary_group_cochain(
    f: BoundaryCocycle, xi: float, group: OctagonPresentation
) -> GroupCochain2:
    """(g0, g1, g2) -> f(g0 xi, g1 xi, g2 xi) for a boundary basepoint xi."""

    def func(*words: GroupWord) -> float:
        row = [group.evaluate(w).apply_boundary(xi) for w in words]
        return float(f(np.array([row]))[0])

    return GroupCochain2(func, f"{f.name}@{xi:.3f}")


def check_group_cocycle(c: GroupCochain2, quadruples: Iterable[Sequence[GroupWord]]) -> float:
    worst = 0.0
    for g0, g1, g2, g3 in quadruples:
        residual = c(g1, g2, g3) - c(g0, g2, g3) + c(g0, g1, g3) - c(g0, g1, g2)
        worst = max(worst, abs(residual))
    return worst


def check_group_invariance(
    c: GroupCochain2, g: GroupWord, triples: Iterable[Sequence[GroupWord]]
) -> float:
    worst = 0.0
    for g0, g1, g2 in triples:
        worst = max(worst, abs(c(g * g0, g * g1, g * g2) - c(g0, g1, g2)))
    return worst
