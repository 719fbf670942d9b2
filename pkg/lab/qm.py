"""De Rham quasimorphisms: integrals of a 1-form over closed geodesics."""

import logging
import threading
from typing import Iterable, Sequence

import numpy as np

from core.forms import OneForm, line_integral
from core.fuchsian import GroupWord, OctagonPresentation
from core.geometry import Isometry
from core.quadrature import DEFAULT_TOLERANCE
from models.report import TrivialityReport

logger = logging.getLogger(__name__)

WordPair = tuple[GroupWord, GroupWord]


class DeRhamQM:
    """
    The homogeneous quasimorphism w -> integral of alpha over the closed geodesic of w.

    Attributes:
        alpha (OneForm): the integrated form.
        group (OctagonPresentation): the fixed octagon metric.
        tol (float): quadrature tolerance per value.
    """

    def __init__(self, alpha: OneForm, tol: float = DEFAULT_TOLERANCE) -> None:
        self.alpha = alpha
        self.group = alpha.group
        self.tol = tol
        self._cache: dict[str, float] = {}
        self._lock = threading.Lock()

    def eval(self, w: GroupWord | str) -> float:
        word = w if isinstance(w, GroupWord) else GroupWord.parse(w)
        if word.is_identity():
            return 0.0
        key = str(word)
        with self._lock:
            if key in self._cache:
                return self._cache[key]
        value = self._compute(word)
        with self._lock:
            self._cache.setdefault(key, value)
        return value

    def _compute(self, word: GroupWord) -> float:
        # words trivial through the relator but not freely
        if self.group.evaluate(word).close_to(Isometry.identity(), 1e-8):
            return 0.0
        geodesic, length = self.group.closed_geodesic(word)
        value = line_integral(self.alpha, geodesic, 0.0, length, self.tol)
        logger.debug(f"q({word}) = {value:.3e} over period {length:.4f}")
        return value

    def homogeneity_residual(self, w: GroupWord | str, n: int) -> float:
        word = w if isinstance(w, GroupWord) else GroupWord.parse(w)
        if n == 1:
            return 0.0
        return abs(self.eval(word.power(n)) - n * self.eval(word))

    def pair_defects(self, pairs: Iterable[WordPair]) -> np.ndarray:
        return np.array([abs(self.eval(g) + self.eval(h) - self.eval(g * h)) for g, h in pairs])

    def defect_estimate(self, pairs: Iterable[WordPair]) -> float:
        """Empirical sup of |q(g) + q(h) - q(gh)| over the sample."""
        defects = self.pair_defects(pairs)
        return float(defects.max()) if defects.size else 0.0

    @property
    def defect_bound(self) -> float:
        """pi * sup|d(alpha)/dVol|: a geodesic triangle has area below pi."""
        return float(np.pi * self.alpha.derivative_bound)

    def is_trivial(
        self,
        pairs: Sequence[WordPair],
        threshold: float = 1e-5,
    ) -> TrivialityReport:
        """
        Sample-level triviality evidence.

        The defect sub-check compares the empirical defect with the threshold.
        The abelianization sub-check fits q on the sampled words by a linear
        function of the H1 class and reports the worst misfit.
        """
        words = {str(w): w for pair in pairs for w in (pair[0], pair[1], pair[0] * pair[1])}
        ordered = [words[key] for key in sorted(words)]
        values = np.array([self.eval(w) for w in ordered])
        defect = self.defect_estimate(pairs)
        if ordered:
            classes = np.array([w.abelianization() for w in ordered], dtype=float)
            periods, *_ = np.linalg.lstsq(classes, values, rcond=None)
            misfit = float(np.max(np.abs(classes @ periods - values)))
            period_norm = float(np.max(np.abs(periods)))
        else:
            misfit, period_norm = 0.0, 0.0

        if values.size == 0 or np.max(np.abs(values)) <= threshold:
            verdict = "zero"
        elif defect <= threshold and misfit <= threshold:
            verdict = "homomorphism-like"
        else:
            verdict = "nontrivial-evidence"
        logger.info(f"Triviality on {len(pairs)} pairs: defect {defect:.3e}, verdict {verdict}")
        return TrivialityReport(
            sample_size=len(pairs),
            defect=defect,
            defect_bound=self.defect_bound,
            abelianization_residual=misfit,
            period_norm=period_norm,
            verdict=verdict,
        )


def sample_pairs(
    group: OctagonPresentation,
    radius: int,
    budget: int,
    seed: int = 0,
) -> list[WordPair]:
    """All ordered pairs from ball(radius), subsampled to the budget with a fixed seed."""
    words = [w for w, _ in group.ball(radius)]
    total = len(words) ** 2
    if total <= budget:
        indices = np.arange(total)
    else:
        rng = np.random.default_rng(seed)
        indices = np.sort(rng.choice(total, size=budget, replace=False))
    return [(words[i // len(words)], words[i % len(words)]) for i in indices]
