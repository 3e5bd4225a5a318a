"""
Models module for harness-lab.
Contains the enums shared by the numerical core and all Pydantic models for
configuration, requests, responses and verification reports.
"""

from enum import Enum
from fractions import Fraction
from typing import Dict, List, Optional

from pydantic import BaseModel, Field, field_validator, model_validator


class Mode(str, Enum):
    EXACT = "exact"
    FLOAT = "float"


class Case(str, Enum):
    CASE1 = "Case1"
    CASE2 = "Case2"


class Branch6j(str, Enum):
    CASE_LOW = "CaseLow"
    CASE_HIGH = "CaseHigh"


class Branch(str, Enum):
    MAIN = "Main"
    DUAL = "Dual"


class CheckMode(str, Enum):
    EXACT = "Exact"
    FLOAT = "Float"
    MONTE_CARLO = "MonteCarlo"


class Suite(str, Enum):
    IDENTITIES = "identities"
    MOMENTS = "moments"
    HARNESS = "harness"
    STITCH = "stitch"
    MONTECARLO = "montecarlo"
    ALL = "all"


class OutputFormat(str, Enum):
    CSV = "csv"
    JSON = "json"


def _normalize_rational(value) -> str:
    """Parse an int or a "p/q" string and return its lowest-terms string form."""
    if isinstance(value, bool):
        raise ValueError("booleans are not rationals")
    try:
        return str(Fraction(str(value).strip()))
    except (ValueError, ZeroDivisionError) as e:
        raise ValueError(f"not a rational number: {value!r}") from e


class ParamPoint(BaseModel):
    """One (A, B, C, N) point of the parameter test matrix."""

    A: str = Field(default="0", description="Parameter A as a rational string")
    B: str = Field(default="1/2", description="Parameter B as a rational string")
    C: str = Field(default="-4", description="Parameter C as a rational string")
    N: int = Field(default=4, ge=0, description="Number of jumps of the main chain")

    @field_validator("A", "B", "C", mode="before")
    @classmethod
    def _rational(cls, value):
        return _normalize_rational(value)

    @classmethod
    def parse(cls, text: str) -> "ParamPoint":
        """Build a point from "A,B,C,N"."""
        parts = [part.strip() for part in text.split(",")]
        if len(parts) != 4:
            raise ValueError(f"expected 'A,B,C,N', got {text!r}")
        return cls(A=parts[0], B=parts[1], C=parts[2], N=int(parts[3]))

    def label(self) -> str:
        return f"A={self.A},B={self.B},C={self.C},N={self.N}"


class CliConfig(BaseModel):
    A: str = Field(default="0", description="Parameter A as a rational string")
    B: str = Field(default="1/2", description="Parameter B as a rational string")
    C: str = Field(default="-4", description="Parameter C as a rational string")
    N: int = Field(default=4, ge=0, description="Number of jumps of the main chain")
    t: str = Field(default="0", description="Chain time for law evaluation")
    mode: Mode = Field(default=Mode.EXACT, description="Scalar mode")
    grid: List[str] = Field(default_factory=lambda: ["1"], description="Strictly increasing times")
    seed: int = Field(default=0, ge=0, lt=2**64, description="64-bit RNG seed")
    paths: int = Field(default=1, ge=1, description="Number of simulated paths")
    output: Optional[str] = Field(default=None, description="Output path, stdout when omitted")
    format: OutputFormat = Field(default=OutputFormat.CSV, description="Output format")
    k_chain: Optional[int] = Field(default=None, ge=0, description="Use the K-chain with this K")
    stitched: bool = Field(default=False, description="Simulate the stitched process on (0,inf)")

    @field_validator("A", "B", "C", "t", mode="before")
    @classmethod
    def _rational(cls, value):
        return _normalize_rational(value)

    @field_validator("grid", mode="before")
    @classmethod
    def _grid(cls, value):
        if isinstance(value, str):
            value = [item for item in value.split(",") if item.strip()]
        return [_normalize_rational(item) for item in value]

    @model_validator(mode="after")
    def _increasing_grid(self):
        times = [Fraction(item) for item in self.grid]
        if not times:
            raise ValueError("grid must contain at least one time")
        if any(later <= earlier for earlier, later in zip(times, times[1:])):
            raise ValueError("grid must be strictly increasing")
        return self

    def point(self) -> ParamPoint:
        return ParamPoint(A=self.A, B=self.B, C=self.C, N=self.N)


def _default_case1() -> List[ParamPoint]:
    return [
        ParamPoint(A="0", B="1/2", C="-4", N=4),
        ParamPoint(A="1/4", B="1/2", C="-5", N=3),
        ParamPoint(A="1", B="-1/2", C="-8", N=5),
    ]


def _default_case2() -> List[ParamPoint]:
    return [
        ParamPoint(A="0", B="1/2", C="5", N=4),
        ParamPoint(A="1/4", B="1/2", C="6", N=3),
    ]


class VerificationConfig(BaseModel):
    """Parameter matrix, grids and tolerances of the verification suites."""

    case1_points: List[ParamPoint] = Field(default_factory=_default_case1)
    case2_points: List[ParamPoint] = Field(default_factory=_default_case2)
    minimal_points: List[ParamPoint] = Field(
        default_factory=lambda: [ParamPoint(A="0", B="1/2", C="-2", N=1)],
        description="Two-state chains checked by the moment suite",
    )
    k_values: List[int] = Field(default_factory=lambda: [0, 1, 2, 3])
    identity_n_max: int = Field(default=6, ge=0, le=8)
    identity_a: List[str] = Field(default_factory=lambda: ["1/4", "1", "3/2"])
    identity_b_offsets: List[str] = Field(
        default_factory=lambda: ["1/4", "3/4"],
        description="b = -a + offset, offsets in (0, 2a+1)",
    )
    identity_c: List[str] = Field(default_factory=lambda: ["-3", "-17/4", "9", "31/4"])
    identity_delta: List[str] = Field(default_factory=lambda: ["1/4", "1/2"])
    pi_a: List[str] = Field(default_factory=lambda: ["1/2", "1", "2"])
    pi_b: List[str] = Field(default_factory=lambda: ["1/4", "1/2"])
    pi_delta: List[str] = Field(default_factory=lambda: ["1/4", "1"])
    grid_unit: List[str] = Field(default_factory=lambda: ["1/4", "1/2", "3/4"])
    grid_half_line: List[str] = Field(default_factory=lambda: ["1/4", "1/2", "1", "2", "4"])
    grid_dual: List[str] = Field(default_factory=lambda: ["3/2", "2", "4"])
    stitched_grids: List[List[str]] = Field(
        default_factory=lambda: [
            ["1/2", "1", "2"],
            ["1/4", "3/4", "3/2", "4"],
            ["1/4", "1/2", "3/4", "1", "3/2", "2", "4"],
        ]
    )
    mean_square_times: List[str] = Field(default_factory=lambda: ["9/10", "99/100", "999/1000"])
    float_tolerance: float = Field(default=1e-10, gt=0)
    limit_c: float = Field(default=-1e6, lt=0)
    limit_pi_tolerance: float = Field(default=1e-6, gt=0)
    limit_harness_tolerance: float = Field(default=1e-4, gt=0)
    limit_offset: float = Field(default=1e-8, gt=0)
    limit_offset_tolerance: float = Field(default=1e-6, gt=0)
    limit_theta_time: float = Field(default=1e6, gt=0)
    limit_theta_tolerance: float = Field(default=1e-5, gt=0)
    limit_growth_time: float = Field(default=1e6, gt=0)
    limit_growth_tolerance: float = Field(default=1e-4, gt=0)
    mc_paths: int = Field(default=100_000, ge=10)
    mc_sigmas: float = Field(default=4.0, gt=0)
    mc_grid: List[str] = Field(default_factory=lambda: ["1/2", "1", "2"])
    seed: int = Field(default=0, ge=0, lt=2**64)
    max_atoms: int = Field(default=10**7, ge=1)
    workers: int = Field(default=1, ge=1)
    record_timings: bool = Field(default=False)
    gamma_perturbation: str = Field(
        default="0", description="Test hook: offset added to gamma before harness checks"
    )

    @field_validator(
        "identity_a",
        "identity_b_offsets",
        "identity_c",
        "identity_delta",
        "pi_a",
        "pi_b",
        "pi_delta",
        "grid_unit",
        "grid_half_line",
        "grid_dual",
        "mc_grid",
        "mean_square_times",
        mode="before",
    )
    @classmethod
    def _rational_list(cls, value):
        if isinstance(value, str):
            value = [item for item in value.split(",") if item.strip()]
        return [_normalize_rational(item) for item in value]

    @field_validator("gamma_perturbation", mode="before")
    @classmethod
    def _rational(cls, value):
        return _normalize_rational(value)


class CheckResult(BaseModel):
    check_id: str = Field(description="Dotted suite.check identifier")
    tag: str = Field(description="Formula family the check covers")
    parameter_point: str = Field(description="Serialized parameter point")
    mode: CheckMode
    residual: str = Field(description="Residual rendered exactly or as a float")
    passed: bool
    skipped: bool = False
    runtime_ms: int = 0
    detail: str = ""


class ReportSummary(BaseModel):
    total: int = 0
    passed: int = 0
    failed: int = 0
    skipped: int = 0


class CoverageEntry(BaseModel):
    tag: str
    checks: int
    passed: int


class VerificationReport(BaseModel):
    suite: Suite
    version: str
    seed: int
    results: List[CheckResult] = Field(default_factory=list)
    summary: ReportSummary = Field(default_factory=ReportSummary)
    coverage: List[CoverageEntry] = Field(default_factory=list)
    notes: List[str] = Field(default_factory=list)

    @property
    def ok(self) -> bool:
        """True only when every check passed; skipped checks count against it."""
        return self.summary.passed == self.summary.total


class LawRow(BaseModel):
    state: int
    weight: str
    y_value: str


class HarnessSummary(BaseModel):
    case: str = Field(description="Case1, Case2 or K-chain")
    eta: str
    theta: str
    sigma: str
    tau: str
    gamma: str
    floats: Dict[str, float] = Field(default_factory=dict)
    domain: str
    gamma_identity: str = Field(description="Which gamma identity holds and whether exactly")


class TrajectoryRow(BaseModel):
    path_id: int
    time: str
    state: int
    y_value: str
    z_value: str
