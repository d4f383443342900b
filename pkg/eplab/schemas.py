import math
from enum import Enum
from pathlib import Path
from typing import Annotated, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from pydantic.functional_validators import AfterValidator


# Enums
class ClassTag(str, Enum):
    normal = "Normal"
    n_normal = "NNormal"
    quasi_normal = "QuasiNormal"
    hyponormal = "Hyponormal"
    partial_isometry = "PartialIsometry"
    ep = "EP"
    sd = "SD"
    hypo_ep = "HypoEP"
    n_ep = "NEP"
    n_hypo_ep = "NHypoEP"
    regular = "Regular"


PARAMETERIZED_TAGS = frozenset({ClassTag.n_normal, ClassTag.n_ep, ClassTag.n_hypo_ep})

# Short spellings accepted on the command line ("NHEP2", "PI", ...)
TAG_ALIASES = {
    "HEP": ClassTag.hypo_ep,
    "NHEP": ClassTag.n_hypo_ep,
    "PI": ClassTag.partial_isometry,
    "QN": ClassTag.quasi_normal,
}


class OutputFormat(str, Enum):
    json = "json"
    text = "text"


class Subcommand(str, Enum):
    classify = "classify"
    suite = "suite"
    witness = "witness"
    gen = "gen"


def validate_finite(v: float) -> float:
    if not math.isfinite(v):
        raise ValueError("Value must be finite")
    return v

FiniteFloat = Annotated[float, AfterValidator(validate_finite)]


# Tolerance Schemas
class ToleranceConfig(BaseModel):
    """Single source of truth for rank cutoffs, residual thresholds and PSD slack."""

    model_config = ConfigDict(frozen=True)

    rank_tol_factor: float = Field(1.0, ge=0.0)
    residual_tol: float = Field(1e-8, ge=0.0)
    psd_tol: float = Field(1e-8, ge=0.0)
    zero_tol: float = Field(1e-12, ge=0.0)


# Class Schemas
class ClassLabel(BaseModel):
    model_config = ConfigDict(frozen=True)

    tag: ClassTag
    n: Optional[int] = Field(None, ge=1)

    @model_validator(mode="after")
    def check_n(self):
        if (self.tag in PARAMETERIZED_TAGS) != (self.n is not None):
            raise ValueError(f"{self.tag.value} {'needs' if self.n is None else 'takes no'} n")
        return self

    @property
    def key(self) -> str:
        return self.tag.value if self.n is None else f"{self.tag.value}({self.n})"

    @classmethod
    def parse(cls, text: str) -> "ClassLabel":
        """Parse "NEP(2)", "NEP2", "EP", "NHEP1", "HEP", ... into a label."""
        raw = text.strip().replace("(", "").replace(")", "")
        head = raw.rstrip("0123456789")
        digits = raw[len(head):]
        tag = TAG_ALIASES.get(head.upper())
        if tag is None:
            matches = [t for t in ClassTag if t.value.lower() == head.lower()]
            if not matches:
                raise ValueError(f"Unknown class label: {text!r}")
            tag = matches[0]
        n = int(digits) if digits else None
        if tag is ClassTag.hypo_ep and n is not None:
            tag = ClassTag.n_hypo_ep
        if tag is ClassTag.ep and n is not None:
            tag = ClassTag.n_ep
        return cls(tag=tag, n=n)


class Membership(BaseModel):
    model_config = ConfigDict(frozen=True)

    member: bool
    residual: float
    routes: dict[str, Optional[float]] = Field(default_factory=dict)


class OperatorProfile(BaseModel):
    dim: int = Field(..., ge=1)
    n_max: int = Field(..., ge=1)
    memberships: dict[str, Membership]
    ascent: int = Field(..., ge=0)
    descent: int = Field(..., ge=0)

    def member(self, label: "ClassLabel | str") -> bool:
        key = label.key if isinstance(label, ClassLabel) else label
        return self.memberships[key].member

    def booleans(self) -> dict[str, bool]:
        return {key: m.member for key, m in sorted(self.memberships.items())}


# Ensemble Schemas
class EnsembleConfig(BaseModel):
    master_seed: int = Field(42, ge=0, lt=2**64)
    dims: list[int] = Field(default_factory=lambda: list(range(2, 11)), min_length=1)
    trials_per_family: int = Field(10, ge=0)
    # Floor on the total trials a claim gets when trials_per_family > 0
    min_trials_per_claim: int = Field(50, ge=0)
    # None selects every registered family
    families: Optional[list[str]] = None
    n_max: int = Field(4, ge=1)
    condition_cap: float = Field(1e6, gt=1.0)
    claim_condition_cap: float = Field(10.0, gt=1.0)

    @model_validator(mode="after")
    def check_dims(self):
        if any(d < 1 for d in self.dims):
            raise ValueError("dims must be positive")
        return self


class SeedTrace(BaseModel):
    family: str
    dim: int
    seed: int
    n: Optional[int] = None
    condition_cap: float = 10.0


class Spectrum(str, Enum):
    complex = "complex"
    real = "real"


class GenParams(BaseModel):
    """Parameters of the `gen` subcommand; each generator reads the ones it needs."""

    dim: int = Field(4, ge=1)
    rank: Optional[int] = Field(None, ge=0)
    n: Optional[int] = Field(None, ge=1)
    alpha: FiniteFloat = 1.0
    size: Optional[int] = Field(None, ge=1)
    x: Optional[list[complex]] = None
    y: Optional[list[complex]] = None
    weights: Optional[list[FiniteFloat]] = None
    spectrum: Spectrum = Spectrum.complex
    condition_cap: float = Field(1e6, gt=1.0)


# Matrix file
class MatrixFile(BaseModel):
    """JSON matrix: {"rows": m, "cols": n, "data": [[[re, im], ...], ...]}."""

    model_config = ConfigDict(extra="forbid", strict=True)

    rows: int = Field(..., ge=1)
    cols: int = Field(..., ge=1)
    data: list[list[tuple[FiniteFloat, FiniteFloat]]]

    @model_validator(mode="after")
    def check_shape(self):
        if len(self.data) != self.rows or any(len(row) != self.cols for row in self.data):
            raise ValueError(f"data does not match {self.rows}x{self.cols}")
        return self

    def to_array(self) -> np.ndarray:
        return np.array([[complex(re, im) for re, im in row] for row in self.data], dtype=np.complex128)

    @classmethod
    def from_array(cls, a: np.ndarray) -> "MatrixFile":
        a = np.asarray(a, dtype=np.complex128)
        # +0.0 folds negative zeros so identical matrices render identically
        data = [[(float(z.real) + 0.0, float(z.imag) + 0.0) for z in row] for row in a]
        return cls(rows=a.shape[0], cols=a.shape[1], data=data)


# Report Schemas
class Witness(BaseModel):
    claim: str
    n: Optional[int] = None
    matrix: MatrixFile
    partner: Optional[MatrixFile] = None
    residuals: dict[str, Optional[float]] = Field(default_factory=dict)
    seed_trace: list[SeedTrace] = Field(default_factory=list)
    note: Optional[str] = None


class ClaimReport(BaseModel):
    id: str
    description: str
    anchor: str
    trials: int = 0
    hypothesis_hits: int = 0
    passes: int = 0
    errors: int = 0
    worst_residual: float = 0.0
    weakly_exercised: bool = False
    witnesses: list[Witness] = Field(default_factory=list)
    tight_witnesses: list[Witness] = Field(default_factory=list)

    @property
    def failures(self) -> int:
        return self.hypothesis_hits - self.passes


class TheoremReport(BaseModel):
    suite_version: str
    config_echo: EnsembleConfig
    tolerance: ToleranceConfig
    claims: dict[str, ClaimReport]

    @property
    def all_passed(self) -> bool:
        return all(c.failures == 0 for c in self.claims.values())


# CLI Schemas
class CliConfig(BaseModel):
    subcommand: Subcommand
    tolerance: ToleranceConfig = Field(default_factory=ToleranceConfig)
    n_max: int = Field(4, ge=1)
    seed: int = Field(42, ge=0, lt=2**64)
    dims: list[int] = Field(default_factory=lambda: list(range(2, 7)), min_length=1)
    trials: int = Field(10, ge=0)
    families: Optional[list[str]] = None
    format: OutputFormat = OutputFormat.text
    out: Optional[Path] = None
    workers: int = Field(1, ge=1)
