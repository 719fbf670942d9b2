from typing import Literal, Optional

from pydantic import BaseModel, Field, PositiveFloat, PositiveInt, model_validator

BumpKind = Literal["oneform-x", "oneform-y", "twoform", "exact"]


class BumpSpec(BaseModel):
    """One smooth bump: center in the octagon, hyperbolic radius, amplitude."""

    center: tuple[float, float]
    radius: PositiveFloat
    amplitude: float = 1.0
    kind: BumpKind = "twoform"


class Tolerances(BaseModel):
    """Thresholds of every property row; --tolerance-scale multiplies them all."""

    quadrature: PositiveFloat = 1e-8
    relator: PositiveFloat = 1e-9
    homomorphism: PositiveFloat = 1e-8
    homogeneity: PositiveFloat = 1e-6
    conjugacy: PositiveFloat = 1e-8
    exact_qm: PositiveFloat = 1e-5
    defect_slack: PositiveFloat = 1e-4
    euler: PositiveFloat = 1e-5
    alternation: PositiveFloat = 1e-6
    cocycle: PositiveFloat = 4e-6
    invariance: PositiveFloat = 1e-6
    fixed_point: PositiveFloat = 1e-10
    displacement: PositiveFloat = 1e-6
    cross_validation: PositiveFloat = 1e-2
    orbit_noise: PositiveFloat = 1e-9
    stderr_factor: PositiveFloat = 3.0


class Samples(BaseModel):
    """Sample budgets."""

    qm_ball: PositiveInt = 3
    qm_pairs: PositiveInt = 10000
    homogeneity_powers: PositiveInt = 8
    homomorphism_pairs: PositiveInt = 1000
    euler_triples: PositiveInt = 500
    cocycle_quadruples: PositiveInt = 1000
    invariance_ball: PositiveInt = 3
    invariance_movers: PositiveInt = 64
    invariance_triples: PositiveInt = 1000
    psi_samples: PositiveInt = 100000
    twist_points: PositiveInt = 200
    equivariance_points: PositiveInt = 100
    action_triples: PositiveInt = 500
    region_grid: PositiveInt = 5
    orbit_steps: PositiveInt = 10
    min_separation: PositiveFloat = 1e-3


class Words(BaseModel):
    """Word-length caps."""

    ball_cap: PositiveInt = 8
    fixed_point_length: int = Field(default=6, ge=3)
    earthquake_depth: PositiveInt = 8
    normalization_ball: PositiveInt = 3


DEFAULT_FORMS = {"alpha": [BumpSpec(center=(0.0, 0.0), radius=0.6, kind="oneform-x")]}


class ExperimentConfig(BaseModel):
    """
    Validated contents of the experiment YAML file.

    Attributes:
        forms: named forms, each a list of bumps of one degree.
        qm_form: the 1-form used by the qm command.
        cocycle_forms: 2-forms checked by cocycle-check.
        region_form: 2-form used by three-region.
    """

    seed: int = Field(default=0, ge=0, lt=2**64)
    margin: PositiveFloat = 0.05
    forms: dict[str, list[BumpSpec]] = Field(default_factory=lambda: dict(DEFAULT_FORMS))
    qm_form: str = "alpha"
    cocycle_forms: list[str] = Field(default_factory=list)
    region_form: str = "volume"
    twist_curve: Literal["a", "b", "c", "d"] = "a"
    tolerances: Tolerances = Field(default_factory=Tolerances)
    samples: Samples = Field(default_factory=Samples)
    words: Words = Field(default_factory=Words)
    out_dir: Optional[str] = None

    @model_validator(mode="after")
    def check_names(self) -> "ExperimentConfig":
        known = set(self.forms) | {"volume"}
        for name in [self.qm_form, self.region_form, *self.cocycle_forms]:
            if name not in known:
                raise ValueError(f"Form {name!r} is not defined")
        if self.qm_form == "volume" or any(b.kind == "twoform" for b in self.forms[self.qm_form]):
            raise ValueError(f"qm_form {self.qm_form!r} must be a 1-form")
        for name in [self.region_form, *self.cocycle_forms]:
            if name != "volume" and any(b.kind != "twoform" for b in self.forms[name]):
                raise ValueError(f"Form {name!r} must be a 2-form")
        return self

    def scaled(self, factor: float) -> "ExperimentConfig":
        """Copy with every tolerance multiplied by factor."""
        if factor <= 0:
            raise ValueError("Tolerance scale must be positive")
        scaled = {k: v * factor for k, v in self.tolerances.model_dump().items()}
        scaled["stderr_factor"] = self.tolerances.stderr_factor
        return self.model_copy(update={"tolerances": Tolerances(**scaled)})
