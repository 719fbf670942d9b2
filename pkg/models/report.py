from typing import Literal, Optional

from pydantic import BaseModel


class PropertyRow(BaseModel):
    """One checked property: sample size, worst residual and the threshold it must stay under."""

    name: str
    sample_size: int
    max_residual: float
    threshold: float
    passed: bool = False
    note: str = ""

    @classmethod
    def check(
        cls, name: str, sample_size: int, residual: float, threshold: float, note: str = ""
    ) -> "PropertyRow":
        return cls(
            name=name,
            sample_size=sample_size,
            max_residual=float(residual),
            threshold=float(threshold),
            passed=bool(residual <= threshold),
            note=note,
        )


class TrivialityReport(BaseModel):
    """Sample-level evidence about a quasimorphism; never a proof."""

    sample_size: int
    defect: float
    defect_bound: float
    abelianization_residual: float
    period_norm: float
    verdict: Literal["zero", "homomorphism-like", "nontrivial-evidence"]
    note: str = "defect bound pi * sup|d(alpha)/dVol| is a derived bound"


class ThreeRegionReport(BaseModel):
    """Spread of a cocycle over a region-product grid and its orbit residuals."""

    regions: tuple[int, int, int]
    grid: int
    spread: float
    attracting_value: float
    orbit_residuals: list[float]
    endpoint_residuals: list[float]
    monotone: bool
    converging: bool
    verdict: str


class CrossValidation(BaseModel):
    """Best normalization between the two boundary-map algorithms."""

    normalizer: Optional[str]
    max_discrepancy: float
    bound: float
    points: int

    @property
    def passed(self) -> bool:
        return self.max_discrepancy <= self.bound
