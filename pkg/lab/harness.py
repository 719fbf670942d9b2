"""
Property rows for every command: each identity is checked on a sample and
reported with its worst residual and threshold.
"""

import logging

import numpy as np

from core.forms import TwoForm
from core.fuchsian import RELATOR, GroupWord, OctagonPresentation
from core.geometry import Isometry, angular_distance
from lab import cocycles
from lab.boundary_maps import Earthquake, FixedPointBoundaryMap
from lab.mcg import (
    TwistAutomorphism,
    abelianization_rank,
    act_on_cocycle,
    cross_validate,
    equivariance_ratio,
    h1_matrix,
    J,
    twist_word,
)
from lab.qm import DeRhamQM, sample_pairs
from models.experiment import ExperimentConfig
from models.report import PropertyRow

logger = logging.getLogger(__name__)

ORBIT_BASEPOINT = 0.7


def _subsample(items: list, count: int, seed: int) -> list:
    if len(items) <= count:
        return list(items)
    rng = np.random.default_rng(seed)
    return [items[i] for i in np.sort(rng.choice(len(items), size=count, replace=False))]


def representation_rows(group: OctagonPresentation, config: ExperimentConfig) -> list[PropertyRow]:
    tol = config.tolerances
    relator = group.evaluate(RELATOR).distance_to(Isometry.identity())
    words = [w for w, _ in group.ball(4)]
    rng = np.random.default_rng(config.seed)
    pairs = rng.integers(0, len(words), size=(config.samples.homomorphism_pairs, 2))
    worst = max(
        (group.evaluate(words[i]) @ group.evaluate(words[j])).residual_to(
            group.evaluate(words[i] * words[j])
        )
        for i, j in pairs
    )
    return [
        PropertyRow.check("relator evaluates to identity", 1, relator, tol.relator),
        PropertyRow.check("homomorphism on ball(4) pairs", len(pairs), worst, tol.homomorphism),
        PropertyRow.check("abelianization rank is 4", 1, abs(abelianization_rank(group) - 4), 0.0),
    ]


def qm_rows(q: DeRhamQM, words: list[GroupWord], config: ExperimentConfig) -> list[PropertyRow]:
    tol, samples = config.tolerances, config.samples
    words = [w for w in words if not w.is_identity()]
    rows = [PropertyRow.check("q(1) = 0", 1, abs(q.eval(GroupWord())), 0.0)]
    rows.append(
        PropertyRow.check(
            "q(w^-1) = -q(w)",
            len(words),
            max((abs(q.eval(w) + q.eval(w.inverse())) for w in words), default=0.0),
            tol.conjugacy,
        )
    )
    conjugators = [GroupWord(x) for x in "aBcD"]
    rows.append(
        PropertyRow.check(
            "q(u w u^-1) = q(w)",
            len(words) * len(conjugators),
            max(
                (abs(q.eval(w.conjugate_by(u)) - q.eval(w)) for w in words for u in conjugators),
                default=0.0,
            ),
            tol.conjugacy,
        )
    )
    powers = [n for k in range(1, samples.homogeneity_powers + 1) for n in (k, -k)]
    ratio = max(
        (q.homogeneity_residual(w, n) / abs(n) for w in words for n in powers), default=0.0
    )
    rows.append(
        PropertyRow.check("homogeneity |q(w^n) - n q(w)| / |n|", len(words) * len(powers), ratio, tol.homogeneity)
    )
    pairs = sample_pairs(q.group, samples.qm_ball, samples.qm_pairs, config.seed)
    defect = q.defect_estimate(pairs)
    rows.append(
        PropertyRow.check(
            "defect within pi * sup|d(alpha)/dVol|",
            len(pairs),
            defect,
            q.defect_bound + tol.defect_slack,
            note="derived bound",
        )
    )
    if q.alpha.is_exact():
        worst = max((abs(q.eval(w)) for w, _ in q.group.ball(samples.qm_ball)), default=0.0)
        rows.append(PropertyRow.check("exact form gives zero", len(words), worst, tol.exact_qm))
    return rows


def cocycle_rows(
    group: OctagonPresentation,
    two_forms: dict[str, TwoForm],
    config: ExperimentConfig,
) -> list[PropertyRow]:
    """Alternation, cocycle, invariance, Euler identity, group-cochain and psi rows."""
    tol, samples, seed = config.tolerances, config.samples, config.seed
    sep = samples.min_separation
    triples = cocycles.sample_boundary_tuples(3, samples.invariance_triples, seed, sep)
    quadruples = cocycles.sample_boundary_tuples(4, samples.cocycle_quadruples, seed + 1, sep)
    ball = [g for w, g in group.ball(samples.invariance_ball) if not w.is_identity()]
    # every quadrature-backed value is a triangle integral, so those sample fewer movers
    movers = _subsample(ball, samples.invariance_movers, seed)
    words = [w for w, _ in group.ball(2)]
    word_quads = [tuple(_subsample(words, 4, seed + k)) for k in range(8)]
    word_triples = [quad[:3] for quad in word_quads]
    shifts = [GroupWord(x) for x in "aBcD"]
    orientation = cocycles.orientation_cocycle()
    rows = [
        PropertyRow.check("Or alternating", len(triples), cocycles.check_alternation(orientation, triples), 0.0),
        PropertyRow.check("Or cocycle", len(quadruples), cocycles.check_cocycle(orientation, quadruples), 0.0),
        PropertyRow.check(
            "Or invariant",
            len(triples) * len(ball),
            max(cocycles.check_invariance(orientation, g, triples) for g in ball),
            0.0,
        ),
    ]
    for name, omega in two_forms.items():
        f = cocycles.integral_cocycle(omega, tol.quadrature)
        if omega.volume and not omega.has_compact_part:
            euler = cocycles.sample_boundary_tuples(3, samples.euler_triples, seed + 2, sep)
            gap = float(np.max(np.abs(f(euler) - omega.volume * np.pi * orientation(euler))))
            rows.append(PropertyRow.check(f"{name}: integral = pi * Or", len(euler), gap, tol.euler))
            continue
        rows.append(
            PropertyRow.check(f"{name}: alternating", len(triples), cocycles.check_alternation(f, triples), tol.alternation)
        )
        rows.append(
            PropertyRow.check(f"{name}: cocycle", len(quadruples), cocycles.check_cocycle(f, quadruples), tol.cocycle)
        )
        rows.append(
            PropertyRow.check(
                f"{name}: invariant",
                len(triples) * len(movers),
                max(cocycles.check_invariance(f, g, triples) for g in movers),
                tol.invariance,
                note=f"{len(movers)} of {len(ball)} movers",
            )
        )
        theta = cocycles.theta_group_cochain(omega, tol.quadrature)
        rows.append(
            PropertyRow.check(
                f"{name}: theta group cocycle",
                len(word_quads),
                cocycles.check_group_cocycle(theta, word_quads),
                tol.cocycle,
            )
        )
        orbit = cocycles.boundary_group_cochain(f, ORBIT_BASEPOINT, group)
        rows.append(
            PropertyRow.check(
                f"{name}: orbit cochain cocycle",
                len(word_quads),
                cocycles.check_group_cocycle(orbit, word_quads),
                tol.cocycle,
            )
        )
        rows.append(
            PropertyRow.check(
                f"{name}: orbit cochain invariant",
                len(word_triples) * len(shifts),
                max(cocycles.check_group_invariance(orbit, g, word_triples) for g in shifts),
                tol.invariance,
            )
        )
        value, stderr = cocycles.psi(f, (GroupWord("a"),) * 3, group, samples.psi_samples, seed)
        rows.append(
            PropertyRow.check(
                f"{name}: psi on a diagonal triple",
                samples.psi_samples,
                abs(value),
                tol.stderr_factor * stderr + 1e-15,
            )
        )

    for label, f in (("Or", orientation),):
        value, stderr = cocycles.psi(f, (GroupWord("a"),) * 3, group, samples.psi_samples, seed)
        rows.append(
            PropertyRow.check(
                f"{label}: psi on a diagonal triple", samples.psi_samples, abs(value), tol.stderr_factor * stderr + 1e-15
            )
        )
    gap, stderr = cocycles.chain_map_probe(
        cocycles.sine_cochain, tuple(GroupWord(w) for w in ("", "a", "ab")), group, samples.psi_samples, seed
    )
    rows.append(
        PropertyRow.check("psi commutes with delta", samples.psi_samples, abs(gap), tol.stderr_factor * stderr)
    )
    return rows


def twist_rows(
    E: Earthquake,
    F: FixedPointBoundaryMap,
    phi: TwistAutomorphism,
    config: ExperimentConfig,
) -> list[PropertyRow]:
    tol, samples, seed = config.tolerances, config.samples, config.seed
    group = E.group
    regions = _subsample(E.regions, samples.twist_points, seed)
    endpoints = np.array([angle for r in regions for angle in (r.start, r.end)])
    quake = E.boundary_map()
    fixed_gap = float(np.max(angular_distance(quake(endpoints), endpoints))) if endpoints.size else 0.0
    interior = np.concatenate([r.interior_grid(3) for r in regions])
    moved = float(np.min(quake.displacement(interior))) if interior.size else np.inf
    region_note = f"{len(regions)} of {len(E.regions)} depth-1 regions"

    points = cocycles.sample_boundary_tuples(1, samples.twist_points, seed, 0.0)[:, 0]
    triples = cocycles.sample_boundary_tuples(3, samples.action_triples, seed + 3, samples.min_separation)
    orientation = cocycles.orientation_cocycle()
    moved_or = act_on_cocycle(F, orientation)
    validation = cross_validate(E, F, points, config.words.normalization_ball)
    equivariance = equivariance_ratio(F, phi, group, points[: samples.equivariance_points])
    sup_after = float(np.max(np.abs(moved_or(triples))))
    return [
        PropertyRow.check("lift endpoints fixed", endpoints.size, fixed_gap, tol.fixed_point, note=region_note),
        PropertyRow.check(
            "affected interiors move", interior.size, max(0.0, tol.displacement - moved), 0.0,
            note=f"min displacement {moved:.3e}; {region_note}",
        ),
        PropertyRow.check(
            "earthquake keeps cyclic order", len(triples), 0.0 if quake.preserves_order(triples) else 1.0, 0.0
        ),
        PropertyRow.check("fixed-point map keeps cyclic order", len(triples), 0.0 if F.preserves_order(triples) else 1.0, 0.0),
        PropertyRow.check("phi . Or = Or", len(triples), float(np.max(np.abs(moved_or(triples) - orientation(triples)))), 0.0),
        PropertyRow.check("sup-norm does not grow", len(triples), max(0.0, sup_after - orientation.sup_norm), 0.0),
        PropertyRow.check(
            "equivariance / declared accuracy",
            min(samples.equivariance_points, len(points)),
            equivariance,
            1.0,
        ),
        PropertyRow.check(
            "earthquake vs fixed-point map",
            validation.points,
            validation.max_discrepancy,
            validation.bound,
            note=f"normalizer {validation.normalizer}, bound {validation.bound:.3e}",
        ),
        PropertyRow.check("reported bound below 1e-2", 1, validation.bound, tol.cross_validation),
    ]


def h1_rows(twists: list[str]) -> list[PropertyRow]:
    rows = []
    for text in twists:
        M = h1_matrix(twist_word(text))
        rows.append(PropertyRow.check(f"{text}: M^T J M = J", 1, float(np.abs(M.T @ J @ M - J).max()), 0.0))
    return rows
