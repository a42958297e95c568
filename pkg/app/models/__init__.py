from pydantic import (
    BaseModel, ConfigDict, Field, PlainSerializer, PlainValidator, WithJsonSchema,
    field_validator, model_validator
)
from typing import Annotated, Any, Callable, Dict, List, Optional, Tuple, Union
from enum import Enum
import numpy as np


def _to_complex(value: Any) -> complex:
    """Accept Python/numpy numbers or [re, im] pairs"""
    if isinstance(value, bool):
        raise ValueError("booleans are not complex numbers")
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise ValueError("complex values are written as [re, im]")
        return complex(float(value[0]), float(value[1]))
    if isinstance(value, (int, float, complex, np.number)):
        return complex(value)
    raise ValueError(f"Cannot interpret {value!r} as a complex number")


ComplexNumber = Annotated[
    complex,
    PlainValidator(_to_complex),
    PlainSerializer(lambda z: [z.real, z.imag], return_type=List[float]),
    WithJsonSchema({
        "type": "array",
        "items": {"type": "number"},
        "minItems": 2,
        "maxItems": 2,
        "description": "[re, im]"
    }),
]


class ModelKind(str, Enum):
    F1 = "f1"
    F2 = "f2"

class Parity(str, Enum):
    EVEN = "even"
    ODD = "odd"

class SectorKind(str, Enum):
    SINGLE_MODE_RESIDUE = "single-mode-residue"
    TWO_MODE_FAMILY = "two-mode-family"

class FamilySide(str, Enum):
    ZERO_P = "0p"
    Q_ZERO = "q0"
    ONE_P = "1p"
    Q_ONE = "q1"

class OverlapKind(str, Enum):
    SQUEEZED = "squeezed"
    COHERENT = "coherent"
    NUMBER = "number"

class OutputFormat(str, Enum):
    JSON = "json"
    CSV = "csv"

class Command(str, Enum):
    STATE = "state"
    OVERLAP = "overlap"
    QFUNC = "qfunc"
    WAVEFUNCTION = "wavefunction"
    VERIFY = "verify"

class RecursionKind(str, Enum):
    F1_EVEN = "f1-even"
    F1_ODD = "f1-odd"
    F2_FAMILY = "f2-family"


# ---------------------------------------------------------------------------
# Truncated Fock spaces
# ---------------------------------------------------------------------------

class TruncationSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    dim: int = Field(..., ge=8, le=1024, description="Retained Fock levels per mode (0..dim-1)")
    guard: int = Field(..., ge=0, description="Boundary band excluded from residual checks")

    @model_validator(mode="before")
    @classmethod
    def default_guard(cls, data: Any) -> Any:
        if isinstance(data, dict) and data.get("guard") is None:
            dim = data.get("dim")
            if isinstance(dim, int):
                data = {**data, "guard": max(1, dim // 16)}
        return data

    @model_validator(mode="after")
    def guard_fits(self) -> "TruncationSpec":
        if self.guard >= self.dim or 4 * self.guard > self.dim:
            raise ValueError(f"guard {self.guard} must not exceed dim/4 (dim={self.dim})")
        return self


class FamilyLabel(BaseModel):
    """Two-mode diagonal family, named by its base state |n_a, n_b>"""
    model_config = ConfigDict(frozen=True)

    side: FamilySide
    index: int = Field(..., ge=0, description="p for 0p/1p families, q for q0/q1 families")

    @model_validator(mode="after")
    def index_in_range(self) -> "FamilyLabel":
        minimum = {
            FamilySide.ZERO_P: 0,
            FamilySide.Q_ZERO: 1,
            FamilySide.ONE_P: 1,
            FamilySide.Q_ONE: 2,
        }[self.side]
        if self.index < minimum:
            raise ValueError(f"family {self.side.value} needs index >= {minimum}")
        return self

    @property
    def base(self) -> Tuple[int, int]:
        if self.side == FamilySide.ZERO_P:
            return 0, self.index
        if self.side == FamilySide.Q_ZERO:
            return self.index, 0
        if self.side == FamilySide.ONE_P:
            return 1, self.index
        return self.index, 1

    @property
    def label(self) -> str:
        n_a, n_b = self.base
        return f"{n_a}:{n_b}"

    @property
    def a_side(self) -> bool:
        return self.side in (FamilySide.ZERO_P, FamilySide.ONE_P)

    @classmethod
    def parse(cls, text: str) -> "FamilyLabel":
        try:
            n_a, n_b = (int(part) for part in text.split(":"))
        except ValueError:
            raise ValueError(f"Family '{text}' must be written as 'n_a:n_b', e.g. '0:2' or '3:0'")
        if n_a == 0:
            return cls(side=FamilySide.ZERO_P, index=n_b)
        if n_b == 0:
            return cls(side=FamilySide.Q_ZERO, index=n_a)
        if n_a == 1:
            return cls(side=FamilySide.ONE_P, index=n_b)
        if n_b == 1:
            return cls(side=FamilySide.Q_ONE, index=n_a)
        raise ValueError(f"|{n_a},{n_b}> is not annihilated by the pair operator; no family starts there")


class SectorSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: SectorKind
    modulus: int = Field(..., ge=1, description="Residue modulus, or level step along a family diagonal")
    offset: int = Field(0, ge=0)
    family: Optional[FamilyLabel] = None

    @model_validator(mode="after")
    def consistent(self) -> "SectorSpec":
        if self.offset >= self.modulus:
            raise ValueError("sector offset must be below its modulus")
        if (self.family is not None) != (self.kind == SectorKind.TWO_MODE_FAMILY):
            raise ValueError("a family label is required exactly for two-mode sectors")
        return self

    @classmethod
    def residue(cls, modulus: int, offset: int) -> "SectorSpec":
        return cls(kind=SectorKind.SINGLE_MODE_RESIDUE, modulus=modulus, offset=offset)

    @classmethod
    def diagonal(cls, family: Union[FamilyLabel, str], step: int = 1) -> "SectorSpec":
        if isinstance(family, str):
            family = FamilyLabel.parse(family)
        return cls(kind=SectorKind.TWO_MODE_FAMILY, modulus=step, family=family)

    @property
    def modes(self) -> int:
        return 2 if self.kind == SectorKind.TWO_MODE_FAMILY else 1

    def contains(self, n_a: int, n_b: Optional[int] = None) -> bool:
        if self.family is None:
            return n_a % self.modulus == self.offset
        base_a, base_b = self.family.base
        shift = n_a - base_a
        return shift >= 0 and n_b - base_b == shift and shift % self.modulus == 0


class FockVector(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    trunc: TruncationSpec
    coeffs: np.ndarray

    @field_validator("coeffs", mode="before")
    @classmethod
    def as_array(cls, value: Any) -> np.ndarray:
        array = np.array(value, dtype=complex)
        array.setflags(write=False)
        return array

    @model_validator(mode="after")
    def shape_and_finite(self) -> "FockVector":
        if self.coeffs.shape != (self.trunc.dim,):
            raise ValueError(f"expected {self.trunc.dim} coefficients, got shape {self.coeffs.shape}")
        if not np.all(np.isfinite(self.coeffs)):
            raise ValueError("state coefficients must be finite")
        return self

    @property
    def modes(self) -> int:
        return 1

    @property
    def flat(self) -> np.ndarray:
        return self.coeffs


class TwoModeFockVector(BaseModel):
    """Coefficients indexed [n_a, n_b]; flattened row-major as n_a*dim + n_b"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    trunc: TruncationSpec
    coeffs: np.ndarray

    @field_validator("coeffs", mode="before")
    @classmethod
    def as_array(cls, value: Any) -> np.ndarray:
        array = np.array(value, dtype=complex)
        array.setflags(write=False)
        return array

    @model_validator(mode="after")
    def shape_and_finite(self) -> "TwoModeFockVector":
        dim = self.trunc.dim
        if self.coeffs.shape == (dim * dim,):
            object.__setattr__(self, "coeffs", self.coeffs.reshape(dim, dim))
        if self.coeffs.shape != (dim, dim):
            raise ValueError(f"expected a {dim}x{dim} coefficient table, got shape {self.coeffs.shape}")
        if not np.all(np.isfinite(self.coeffs)):
            raise ValueError("state coefficients must be finite")
        return self

    @property
    def modes(self) -> int:
        return 2

    @property
    def flat(self) -> np.ndarray:
        return self.coeffs.reshape(-1)


AnyFockVector = Union[FockVector, TwoModeFockVector]


class MatrixOperator(BaseModel):
    """
    Dense truncated operator.

    bandwidth is the largest per-mode level shift of the operator's generating
    band (a† -> 1, a†² -> 2, ab + βa†b† -> 1). Series in a single raising
    operator keep the bandwidth of that operator.
    """
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    trunc: TruncationSpec
    modes: int = Field(1, ge=1, le=2)
    entries: np.ndarray
    bandwidth: int = Field(..., ge=0)
    label: str = ""

    @field_validator("entries", mode="before")
    @classmethod
    def as_array(cls, value: Any) -> np.ndarray:
        array = np.array(value, dtype=complex)
        array.setflags(write=False)
        return array

    @model_validator(mode="after")
    def shape_and_finite(self) -> "MatrixOperator":
        size = self.trunc.dim ** self.modes
        if self.entries.shape != (size, size):
            raise ValueError(f"expected a {size}x{size} matrix, got shape {self.entries.shape}")
        if not np.all(np.isfinite(self.entries)):
            raise ValueError("operator entries must be finite")
        return self

    @property
    def size(self) -> int:
        return self.entries.shape[0]

    def adjoint(self) -> "MatrixOperator":
        return MatrixOperator(
            trunc=self.trunc,
            modes=self.modes,
            entries=self.entries.conj().T,
            bandwidth=self.bandwidth,
            label=f"({self.label})†" if self.label else ""
        )


# ---------------------------------------------------------------------------
# Special functions
# ---------------------------------------------------------------------------

class HypergeometricParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    a: ComplexNumber
    b: ComplexNumber = Field(..., description="b of M(a,b,z), or c of F(-n,a;c;z)")
    z: ComplexNumber
    terminating_order: Optional[int] = Field(None, ge=0, description="n when the first parameter is -n")


class SeriesValue(BaseModel):
    model_config = ConfigDict(frozen=True)

    value: ComplexNumber
    converged: bool
    terms: int


# ---------------------------------------------------------------------------
# Conjugates and eigenproblems
# ---------------------------------------------------------------------------

class GeneralizedAnnihilator(BaseModel):
    """f(n_a) a^p, or the product f1(n_a) a^k f2(n_b) b^l"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    trunc: TruncationSpec
    f: Optional[Callable[..., Any]] = Field(None, description="Diagonal map n -> f(n) of a single-mode annihilator")
    p: Optional[int] = Field(None, ge=1)
    f1: Optional[Callable[..., Any]] = None
    k: Optional[int] = Field(None, ge=1)
    f2: Optional[Callable[..., Any]] = None
    l: Optional[int] = Field(None, ge=1)
    label: str = ""

    @model_validator(mode="after")
    def one_structure(self) -> "GeneralizedAnnihilator":
        single = self.f is not None and self.p is not None
        product = None not in (self.f1, self.k, self.f2, self.l)
        if single == product:
            raise ValueError("give either (f, p) or (f1, k, f2, l)")
        return self

    @property
    def is_product(self) -> bool:
        return self.f1 is not None


class ConjugatePair(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    F: MatrixOperator
    G_dagger: MatrixOperator
    sector: SectorSpec


class ArctanSeries(BaseModel):
    """b_k of sum_k b_k (g†)^k; b_(2m+1) = (-scale_factor*beta)^m / (2m+1)"""
    model_config = ConfigDict(frozen=True)

    beta: ComplexNumber
    scale_factor: int = Field(..., ge=1, description="4 for the single-mode operator, 1 for the pair operator")
    coefficients: List[ComplexNumber]

    @field_validator("coefficients")
    @classmethod
    def even_terms_vanish(cls, value: List[complex]) -> List[complex]:
        if any(value[k] != 0 for k in range(0, len(value), 2)):
            raise ValueError("even arctan coefficients must vanish")
        return value

    @property
    def scale(self) -> complex:
        return self.scale_factor * self.beta

    @property
    def order(self) -> int:
        return len(self.coefficients) - 1


class F1Problem(BaseModel):
    model_config = ConfigDict(frozen=True, populate_by_name=True)

    beta: ComplexNumber
    lam: ComplexNumber = Field(..., alias="lambda")
    c_even: ComplexNumber = 1 + 0j
    c_odd: ComplexNumber = 0j
    trunc: TruncationSpec

    @model_validator(mode="after")
    def some_weight(self) -> "F1Problem":
        if self.c_even == 0 and self.c_odd == 0:
            raise ValueError("at least one of c_even, c_odd must be nonzero")
        return self

    def weight(self, parity: Parity) -> complex:
        return self.c_even if parity == Parity.EVEN else self.c_odd


class F2Problem(BaseModel):
    model_config = ConfigDict(frozen=True, populate_by_name=True)

    beta: ComplexNumber
    lam: ComplexNumber = Field(..., alias="lambda")
    family_weights: Dict[str, ComplexNumber] = Field(..., description="'0:p' / 'q:0' -> weight")
    trunc: TruncationSpec

    @model_validator(mode="after")
    def families_valid(self) -> "F2Problem":
        if not self.family_weights:
            raise ValueError("at least one family weight is required")
        for text in self.family_weights:
            family = FamilyLabel.parse(text)
            if family.side not in (FamilySide.ZERO_P, FamilySide.Q_ZERO):
                raise ValueError(f"family {text} solves the auxiliary equation only and is discarded")
            if family.index >= self.trunc.dim:
                raise ValueError(f"family {text} does not fit in dim={self.trunc.dim}")
        if all(weight == 0 for weight in self.family_weights.values()):
            raise ValueError("at least one family weight must be nonzero")
        return self

    @property
    def families(self) -> List[Tuple[FamilyLabel, complex]]:
        return [(FamilyLabel.parse(text), weight) for text, weight in self.family_weights.items()]


class OverlapValue(BaseModel):
    model_config = ConfigDict(frozen=True)

    value: ComplexNumber
    valid: bool = Field(..., description="Inside the region where the series behind the closed form converges")
    converged: bool = True
    note: Optional[str] = None


# ---------------------------------------------------------------------------
# Oracles and reports
# ---------------------------------------------------------------------------

class RecursionOracle(BaseModel):
    model_config = ConfigDict(frozen=True, populate_by_name=True)

    kind: RecursionKind
    beta: ComplexNumber
    lam: ComplexNumber = Field(..., alias="lambda")
    length: int = Field(..., ge=1)
    family: Optional[FamilyLabel] = None

    @model_validator(mode="after")
    def family_for_pairs(self) -> "RecursionOracle":
        if (self.family is not None) != (self.kind == RecursionKind.F2_FAMILY):
            raise ValueError("a family is required exactly for f2-family recursions")
        if self.family is not None and self.family.side not in (FamilySide.ZERO_P, FamilySide.Q_ZERO):
            raise ValueError("recursions exist for 0:p and q:0 families only")
        return self


class NullspaceSolution(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    state: Union[FockVector, TwoModeFockVector]
    residual: float
    rank: int
    unknowns: int


class ConjugacyReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    max_residual: float
    tolerance: float
    passed: bool
    sector: SectorSpec
    columns: int


class TransformReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    beta: ComplexNumber
    deviation: float = Field(..., description="max interior |F2 - (c²+d²)/2 - β(c†²+d†²)/2|")
    commutator_deviation: float = Field(..., description="max interior deviation of [c,c†]=[d,d†]=1, [c,d]=[c,d†]=0")
    tolerance: float
    passed: bool


class VerificationSettings(BaseModel):
    single_dim: int = Field(256, ge=8)
    single_guard: int = Field(16, ge=0)
    pair_dim: int = Field(48, ge=8)
    pair_guard: int = Field(8, ge=0)
    wave_dim: int = Field(512, ge=8)
    transform_dim: int = Field(32, ge=8)


class CriterionResult(BaseModel):
    criterion: int
    name: str
    value: Optional[float] = None
    tolerance: float
    passed: bool
    detail: str = ""


class VerificationReport(BaseModel):
    criteria: List[CriterionResult]
    passed: bool
    settings: VerificationSettings
    elapsed_seconds: float


# ---------------------------------------------------------------------------
# Command configuration (CLI and HTTP)
# ---------------------------------------------------------------------------

class GridSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    minimum: float
    maximum: float
    steps: int = Field(..., ge=1)

    def values(self) -> np.ndarray:
        return np.linspace(self.minimum, self.maximum, self.steps)


class RunConfig(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    command: Command
    model: ModelKind = ModelKind.F1
    beta: ComplexNumber = 0j
    lam: ComplexNumber = Field(0j, alias="lambda")
    dim: Optional[int] = Field(None, ge=8, le=1024, description="Levels per mode; the model default when unset")
    guard: Optional[int] = Field(None, ge=0)
    parity: Parity = Parity.EVEN
    c_even: Optional[ComplexNumber] = None
    c_odd: Optional[ComplexNumber] = None
    families: List[str] = Field(default_factory=lambda: ["0:0"])
    kind: OverlapKind = OverlapKind.SQUEEZED
    point: ComplexNumber = 0j
    delta: ComplexNumber = 0j
    n: int = Field(0, ge=0)
    grid: Optional[GridSpec] = None
    grid_im: Optional[GridSpec] = None
    x0: float = 0.5
    pair_dim: Optional[int] = Field(None, ge=8)
    expect_fail: bool = False
    out: Optional[str] = None
    format: Optional[OutputFormat] = None


# ---------------------------------------------------------------------------
# HTTP request models
# ---------------------------------------------------------------------------

class EigenRequest(BaseModel):
    model: ModelKind = Field(ModelKind.F1, description="f1 = a² + βa†², f2 = ab + βa†b†")
    beta_re: float = Field(0.0, description="Re β")
    beta_im: float = Field(0.0, description="Im β")
    lambda_re: float = Field(0.0, description="Re λ")
    lambda_im: float = Field(0.0, description="Im λ")
    dim: Optional[int] = Field(None, ge=8, le=1024, description="Retained levels per mode (default 256 for f1, 48 for f2)")
    guard: Optional[int] = Field(None, ge=0, description="Boundary guard band")
    parity: Parity = Field(Parity.EVEN, description="Single-mode component when no weights are given")
    c_even_re: Optional[float] = None
    c_even_im: float = 0.0
    c_odd_re: Optional[float] = None
    c_odd_im: float = 0.0
    families: List[str] = Field(default_factory=lambda: ["0:0"], description="Pair families, e.g. '0:2' or '3:0'")

    def to_run_config(self, command: Command, **extra: Any) -> RunConfig:
        return RunConfig(
            command=command,
            model=self.model,
            beta=complex(self.beta_re, self.beta_im),
            lam=complex(self.lambda_re, self.lambda_im),
            dim=self.dim,
            guard=self.guard,
            parity=self.parity,
            c_even=None if self.c_even_re is None else complex(self.c_even_re, self.c_even_im),
            c_odd=None if self.c_odd_re is None else complex(self.c_odd_re, self.c_odd_im),
            families=self.families,
            **extra
        )


class StateRequest(EigenRequest):
    pass


class OverlapRequest(EigenRequest):
    kind: OverlapKind = Field(OverlapKind.SQUEEZED, description="squeezed (Caves-Schumaker for f2), coherent or number")
    point_re: float = Field(0.0, description="Re of μ, α or γ")
    point_im: float = 0.0
    delta_re: float = Field(0.0, description="Re δ for pair coherent overlaps")
    delta_im: float = 0.0
    n: int = Field(0, ge=0, description="Number-state index")


class QFunctionRequest(EigenRequest):
    grid_min: float = -2.0
    grid_max: float = 2.0
    grid_steps: int = Field(11, ge=1, le=401)
    delta_re: float = 0.0
    delta_im: float = 0.0


class WavefunctionRequest(EigenRequest):
    x_min: float = -3.0
    x_max: float = 3.0
    x_steps: int = Field(61, ge=1, le=4001)
    x0: float = Field(0.5, description="Reference point of the returned ratio")


# ---------------------------------------------------------------------------
# Responses (HTTP)
# ---------------------------------------------------------------------------

ComplexPair = Optional[List[float]]


class PayloadHeader(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    command: Command
    model: ModelKind
    beta: ComplexPair
    lam: ComplexPair = Field(..., alias="lambda")


class StatePayload(BaseModel):
    dim: int
    modes: int = Field(..., ge=1, le=2)
    coeffs: List[List[Optional[float]]] = Field(..., description="[re, im] per level; pair tables flattened as n_a*dim + n_b")


class StateResponse(PayloadHeader):
    truncation: TruncationSpec
    weights: Dict[str, ComplexPair]
    gauge: str
    interior_residual: Optional[float] = None
    state: StatePayload


class OverlapResponse(PayloadHeader):
    kind: OverlapKind
    mu: ComplexPair = None
    alpha: ComplexPair = None
    gamma: ComplexPair = None
    delta: ComplexPair = None
    n: Optional[int] = None
    value: ComplexPair
    valid: bool
    converged: bool
    components: Dict[str, ComplexPair]
    notes: List[str] = Field(default_factory=list)


class TableResponse(PayloadHeader):
    columns: List[str]
    rows: List[List[Optional[float]]]


class WavefunctionResponse(TableResponse):
    x0: float


class VerifyResponse(VerificationReport):
    command: Command = Command.VERIFY
    expect_fail: bool = False
