"""
The genus-2 surface group as the regular-octagon Fuchsian group.

The octagon is centered at 0 with vertex angle pi/4 and opposite sides
paired by the translations X_k along the diameters at angle k*pi/4. Walking
around a vertex gives X0 X3 X2^-1 X1 X0^-1 X3^-1 X2 X1^-1 = 1, which is the
relator [a,b][c,d] for

    a = X0,  b = X3 X2^-1 X1,  c = X3 X2^-1 X1 X3^-1,  d = X2 X3^-1.
"""

import logging
import threading
from dataclasses import dataclass
from typing import Iterable

import numpy as np
from scipy.spatial import cKDTree

from core.errors import NotHyperbolic, ReductionStalled, TrivialWord
from core.geometry import (
    BoundaryPoint,
    Geodesic,
    Isometry,
    IsometryKind,
    axis,
    classify,
    translation_length,
)

logger = logging.getLogger(__name__)

GENERATORS = "abcd"
LETTERS = "abcdABCD"
# shortlex order used to pick ball representatives
SHORTLEX = "aAbBcCdD"

COSH_INRADIUS = 1.0 + np.sqrt(2.0)  # cot(pi/8)
INRADIUS = float(np.arccosh(COSH_INRADIUS))
CIRCUMRADIUS = float(np.arccosh(COSH_INRADIUS**2))
SIDE_PAIRING_LENGTH = 2.0 * INRADIUS

# Side j of the octagon has its midpoint at angle j*pi/4; S_j maps the
# opposite side j+4 onto side j, so S_j(P) is the neighbour across side j.
SIDE_PAIRING_WORDS = ("a", "db", "dCb", "Cb", "A", "BD", "BcD", "Bc")

BALL_TOLERANCE = 1e-7
REDUCTION_CAP = 10000


def invert_letter(letter: str) -> str:
    return letter.swapcase()


def free_reduce(letters: str) -> str:
    stack: list[str] = []
    for letter in letters:
        if stack and stack[-1] == invert_letter(letter):
            stack.pop()
        else:
            stack.append(letter)
    return "".join(stack)


@dataclass(frozen=True)
class GroupWord:
    """
    A freely reduced word in a, b, c, d and their inverses (capitals).

    Attributes:
        letters (str): the reduced word, "" for the identity.
    """

    letters: str = ""

    def __post_init__(self) -> None:
        unknown = set(self.letters) - set(LETTERS)
        if unknown:
            raise ValueError(f"Unknown letters {sorted(unknown)} in word {self.letters!r}")
        object.__setattr__(self, "letters", free_reduce(self.letters))

    @classmethod
    def parse(cls, text: str) -> "GroupWord":
        """Parse a word such as 'abAB'; '1', 'e' and '' denote the identity."""
        text = text.strip()
        if text in ("", "1", "e"):
            return cls("")
        return cls(text)

    def __str__(self) -> str:
        return self.letters or "1"

    def __len__(self) -> int:
        return len(self.letters)

    def __mul__(self, other: "GroupWord") -> "GroupWord":
        return GroupWord(self.letters + other.letters)

    def inverse(self) -> "GroupWord":
        return GroupWord("".join(invert_letter(x) for x in reversed(self.letters)))

    def power(self, n: int) -> "GroupWord":
        base = self if n >= 0 else self.inverse()
        return GroupWord(base.letters * abs(n))

    def conjugate_by(self, u: "GroupWord") -> "GroupWord":
        """u w u^-1."""
        return u * self * u.inverse()

    def is_identity(self) -> bool:
        return not self.letters

    def cyclic_reduce(self) -> "GroupWord":
        letters = self.letters
        while len(letters) > 1 and letters[0] == invert_letter(letters[-1]):
            letters = letters[1:-1]
        return GroupWord(letters)

    def is_conjugate_to(self, other: "GroupWord") -> bool:
        """Cyclic-word test; exact for cyclically reduced words of a free group."""
        mine, theirs = self.cyclic_reduce().letters, other.cyclic_reduce().letters
        return len(mine) == len(theirs) and mine in theirs + theirs

    def abelianization(self) -> np.ndarray:
        """Integer image in H1 = Z^4 with basis (a, b, c, d)."""
        vector = np.zeros(4, dtype=np.int64)
        for letter in self.letters:
            index = GENERATORS.index(letter.lower())
            vector[index] += 1 if letter.islower() else -1
        return vector


RELATOR = GroupWord("abABcdCD")


@dataclass(frozen=True)
class FundamentalDomain:
    """The closed regular octagon, as its eight side geodesics and a point test."""

    sides: tuple[Geodesic, ...]
    pairings: tuple[Isometry, ...]
    vertices: tuple[complex, ...]

    def contains(self, z: complex, tol: float = 1e-12) -> bool:
        """Dirichlet test: no side pairing brings z closer to the center."""
        radius = abs(z)
        return all(abs(complex(s.apply(z))) >= radius - tol for s in self.pairings)

    def distance_to_boundary(self, z: complex) -> float:
        return float(min(side.distance_to_point(z) for side in self.sides))


class OctagonPresentation:
    """
    Concrete representation of the genus-2 group by octagon side pairings.

    Attributes:
        generators (dict[str, Isometry]): images of a, b, c, d and inverses.
        side_pairings (tuple[Isometry, ...]): the eight maps S_j.
        domain (FundamentalDomain): the octagon.
    """

    def __init__(self, ball_cap: int = 8, reduction_cap: int = REDUCTION_CAP) -> None:
        """
        Builds side pairings from octagon trigonometry.

        Args:
            ball_cap (int): largest word length accepted by ball().
            reduction_cap (int): iteration cap of reduce_to_domain().
        """
        self.ball_cap = ball_cap
        self.reduction_cap = reduction_cap
        translations = [
            Isometry.translation(SIDE_PAIRING_LENGTH, k * np.pi / 4.0) for k in range(4)
        ]
        x0, x1, x2, x3 = translations
        b = x3 @ x2.inverse() @ x1
        base = {"a": x0, "b": b, "c": b @ x3.inverse(), "d": x2 @ x3.inverse()}
        self.generators = dict(base)
        for letter, isometry in base.items():
            self.generators[letter.upper()] = isometry.inverse()

        self.side_pairings = tuple(translations + [t.inverse() for t in translations])
        self.side_words = tuple(GroupWord(w) for w in SIDE_PAIRING_WORDS)
        self._pairing_alpha = np.array([s.alpha for s in self.side_pairings])
        self._pairing_beta = np.array([s.beta for s in self.side_pairings])

        half_width = np.pi / 2.0 - 2.0 * np.arctan(np.tanh(INRADIUS / 2.0))
        sides = tuple(
            Geodesic.from_endpoints(
                BoundaryPoint(j * np.pi / 4.0 - half_width),
                BoundaryPoint(j * np.pi / 4.0 + half_width),
            )
            for j in range(8)
        )
        vertex_radius = float(np.tanh(CIRCUMRADIUS / 2.0))
        vertices = tuple(
            complex(vertex_radius * np.exp(1j * (k * np.pi / 4.0 + np.pi / 8.0)))
            for k in range(8)
        )
        self.domain = FundamentalDomain(sides, self.side_pairings, vertices)

        self._lock = threading.Lock()
        self._ball_words: list[list[str]] = [[""]]
        self._ball_coords: list[np.ndarray] = [np.array([[1.0, 0.0, 0.0, 0.0]])]

    def evaluate(self, w: GroupWord | str) -> Isometry:
        """The representation: evaluate(uv) = evaluate(u) @ evaluate(v)."""
        letters = w.letters if isinstance(w, GroupWord) else GroupWord.parse(w).letters
        result = Isometry.identity()
        for letter in letters:
            result = result @ self.generators[letter]
        return result

    def reduce_to_domain(self, z: complex) -> tuple[complex, GroupWord]:
        """
        Greedy Dirichlet reduction of an interior point into the octagon.

        Args:
            z (complex): point of the open disk.

        Returns:
            tuple[complex, GroupWord]: reduced point z' and g with evaluate(g)(z) = z'.
        """
        if not abs(z) < 1.0:
            raise ValueError(f"Point {z} is not inside the open disk")
        current = complex(z)
        word = GroupWord()
        for step in range(self.reduction_cap):
            images = [complex(s.apply(current)) for s in self.side_pairings]
            radii = np.abs(images)
            j = int(np.argmin(radii))
            if radii[j] >= abs(current) - 1e-13:
                logger.debug(f"Reduced {z} in {step} steps")
                return current, word
            current = images[j]
            word = self.side_words[j] * word
        raise ReductionStalled(f"Reduction of {z} did not finish in {self.reduction_cap} steps")

    def reduce_points(self, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """
        Vectorized reduction.

        Args:
            z (np.ndarray): complex points of the open disk.

        Returns:
            tuple[np.ndarray, np.ndarray]: reduced points and the complex
            derivative of the reducing isometry at each input point.
        """
        z = np.asarray(z, dtype=complex)
        shape = z.shape
        current = z.ravel().copy()
        alpha = np.ones_like(current)
        beta = np.zeros_like(current)
        active = np.arange(current.size)
        pa, pb = self._pairing_alpha[:, None], self._pairing_beta[:, None]
        for _ in range(self.reduction_cap):
            if not active.size:
                break
            point = current[active]
            images = (pa * point + pb) / (np.conj(pb) * point + np.conj(pa))
            radii = np.abs(images)
            best = np.argmin(radii, axis=0)
            best_radius = radii[best, np.arange(active.size)]
            moving = best_radius < np.abs(point) - 1e-13
            active = active[moving]
            if not active.size:
                break
            j = best[moving]
            current[active] = images[j, np.flatnonzero(moving)]
            sa, sb = self._pairing_alpha[j], self._pairing_beta[j]
            ga, gb = alpha[active], beta[active]
            alpha[active] = sa * ga + sb * np.conj(gb)
            beta[active] = sa * gb + sb * np.conj(ga)
        else:
            raise ReductionStalled(f"{active.size} points did not reduce in {self.reduction_cap} steps")
        derivative = 1.0 / (np.conj(beta) * z.ravel() + np.conj(alpha)) ** 2
        return current.reshape(shape), derivative.reshape(shape)

    def _canonical_coords(self, alpha: np.ndarray, beta: np.ndarray) -> np.ndarray:
        flip = (alpha.real < 0) | ((alpha.real == 0) & (alpha.imag < 0))
        sign = np.where(flip, -1.0, 1.0)
        alpha, beta = alpha * sign, beta * sign
        return np.column_stack([alpha.real, alpha.imag, beta.real, beta.imag])

    def _grow_ball(self) -> None:
        """Append the next word-length level, deduplicated by matrix proximity."""
        words = self._ball_words[-1]
        coords = self._ball_coords[-1]
        parent_alpha = coords[:, 0] + 1j * coords[:, 1]
        parent_beta = coords[:, 2] + 1j * coords[:, 3]
        letter_alpha = np.array([self.generators[x].alpha for x in SHORTLEX])
        letter_beta = np.array([self.generators[x].beta for x in SHORTLEX])

        alpha = parent_alpha[:, None] * letter_alpha[None, :] + parent_beta[:, None] * np.conj(
            letter_beta
        )[None, :]
        beta = parent_alpha[:, None] * letter_beta[None, :] + parent_beta[:, None] * np.conj(
            letter_alpha
        )[None, :]
        valid = np.array(
            [[not (w and w[-1] == invert_letter(x)) for x in SHORTLEX] for w in words]
        )
        parents, letters = np.nonzero(valid)
        candidates = self._canonical_coords(alpha[parents, letters], beta[parents, letters])

        tree = cKDTree(np.vstack(self._ball_coords))
        nearest, _ = tree.query(candidates, k=1, distance_upper_bound=BALL_TOLERANCE)
        keep = ~np.isfinite(nearest)
        for i, j in cKDTree(candidates).query_pairs(BALL_TOLERANCE):
            keep[max(i, j)] = False

        new_words = [words[p] + SHORTLEX[x] for p, x, k in zip(parents, letters, keep) if k]
        self._ball_words.append(new_words)
        self._ball_coords.append(candidates[keep])
        logger.info(
            f"Ball level {len(self._ball_words) - 1}: {len(new_words)} new elements "
            f"({int((~keep).sum())} merged)"
        )

    def ball(self, N: int) -> list[tuple[GroupWord, Isometry]]:
        """
        One representative per group element of word length <= N, shortlex-least.

        Args:
            N (int): word length, at most the configured cap.

        Returns:
            list[tuple[GroupWord, Isometry]]: elements in shortlex order.
        """
        if N < 0 or N > self.ball_cap:
            raise ValueError(f"Ball radius {N} outside [0, {self.ball_cap}]")
        with self._lock:
            while len(self._ball_words) <= N:
                self._grow_ball()
            levels = list(zip(self._ball_words[: N + 1], self._ball_coords[: N + 1]))
        elements = []
        for words, coords in levels:
            for word, (ar, ai, br, bi) in zip(words, coords):
                elements.append((GroupWord(word), Isometry(complex(ar, ai), complex(br, bi))))
        return elements

    def ball_size(self, N: int) -> int:
        self.ball(N)
        return sum(len(words) for words in self._ball_words[: N + 1])

    def closed_geodesic(self, w: GroupWord | str) -> tuple[Geodesic, float]:
        """Oriented axis and translation length of evaluate(w)."""
        word = w if isinstance(w, GroupWord) else GroupWord.parse(w)
        if word.is_identity():
            raise TrivialWord("The empty word has no closed geodesic")
        M = self.evaluate(word)
        if classify(M) is not IsometryKind.HYPERBOLIC:
            raise NotHyperbolic(f"Word {word} evaluates to a {classify(M).value} map")
        return axis(M), translation_length(M)

    def words_matching(
        self, targets: Iterable[Isometry], N: int, tol: float = 1e-6
    ) -> list[GroupWord | None]:
        """Shortlex-least word of ball(N) for each target isometry, or None."""
        self.ball(N)
        words = [w for level in self._ball_words[: N + 1] for w in level]
        tree = cKDTree(np.vstack(self._ball_coords[: N + 1]))
        found = []
        for target in targets:
            distance, index = tree.query(np.array(target.coordinates), k=1)
            found.append(GroupWord(words[index]) if distance <= tol else None)
        return found
