"""Esquemas y modelos Pydantic del toolkit."""
from enum import Enum
from fractions import Fraction
from typing import Callable, Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from models.intervals import RationalInterval, to_rational


class ExactModel(BaseModel):
    """Base para modelos que transportan racionales exactos."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)


# Máquinas libres de prefijos
class HaltingPair(ExactModel):
    """Par (programa, salida) observado al parar."""
    program: str
    output: str
    discovered_stage: int = Field(0, ge=0)


class ComplexityReport(ExactModel):
    """Resultado de la búsqueda acotada de H_M(x)."""
    target: str
    h_value: Optional[int] = Field(None, description="None significa NOT-FOUND")
    witness: Optional[str] = None
    search_cap: int
    budget: int

    @property
    def found(self) -> bool:
        return self.h_value is not None

    @model_validator(mode="after")
    def check_witness(self):
        """El testigo tiene exactamente la longitud reportada."""
        if (self.h_value is None) != (self.witness is None):
            raise ValueError("h_value y witness deben estar ambos presentes o ambos ausentes")
        if self.witness is not None and len(self.witness) != self.h_value:
            raise ValueError("la longitud del testigo no coincide con h_value")
        return self


class ComplexityProfileRow(ExactModel):
    """Cota superior acotada de H(X↾n) frente a T·n."""
    n: int
    h_upper: Optional[int]
    t_n: Fraction


# Función de partición
class PartitionApprox(ExactModel):
    """Suma parcial certificada de Z(T) sobre el dominio enumerado."""
    machine_id: str
    T: Fraction
    stage: int
    value: RationalInterval
    terms: int


class PhaseRow(ExactModel):
    """Fila de la tabla de fases."""
    T: Fraction
    stage: int
    terms: int
    lo: Fraction
    hi: Fraction


class SyntheticDomainSpec(ExactModel):
    """Cantidad de programas pedidos por longitud."""
    counts: Dict[int, int]
    max_len: int = Field(..., ge=0)

    @field_validator("counts")
    @classmethod
    def validate_counts(cls, v):
        """Longitudes y cantidades no negativas."""
        for length, count in v.items():
            if length < 0 or count < 0:
                raise ValueError(f"entrada inválida {length}:{count}")
        return v

    @model_validator(mode="after")
    def validate_max_len(self):
        if any(length > self.max_len for length, count in self.counts.items() if count):
            raise ValueError("hay longitudes mayores que max_len")
        return self

    @classmethod
    def from_rule(cls, rule: Callable[[int], int], max_len: int, min_len: int = 1) -> "SyntheticDomainSpec":
        """Construye la especificación evaluando la regla n -> cantidad."""
        return cls(counts={n: rule(n) for n in range(min_len, max_len + 1)}, max_len=max_len)

    def count(self, length: int) -> int:
        return self.counts.get(length, 0)


# Martingalas
class CapitalTrace(ExactModel):
    """Capital B(X↾i) para i = 0..defined_up_to."""
    values: List[Fraction]
    defined_up_to: int
    requested: int

    @model_validator(mode="after")
    def check_length(self):
        if len(self.values) != self.defined_up_to + 1:
            raise ValueError("values no coincide con defined_up_to")
        return self

    @property
    def complete(self) -> bool:
        return self.defined_up_to == self.requested

    @property
    def final(self) -> Fraction:
        return self.values[-1]


class FairnessVerdict(ExactModel):
    """PASS o FAIL con la cadena testigo."""
    passed: bool
    depth: int
    witness: Optional[str] = None
    reason: Optional[str] = None


class SuccessObservation(ExactModel):
    """Observación empírica: REACHED(n) o NOT-REACHED hasta el horizonte."""
    reached: bool
    position: Optional[int] = None
    threshold: Fraction
    horizon: int
    undefined_at: Optional[int] = None


# Predicción
class Prediction(str, Enum):
    """Alfabeto de salida {0, 1, N}."""
    ZERO = "0"
    ONE = "1"
    SUSPEND = "N"

    @property
    def bit(self) -> Optional[str]:
        return None if self is Prediction.SUSPEND else self.value


class PredictabilityReport(ExactModel):
    """Veredicto empírico de las condiciones de predictibilidad fuerte."""
    horizon: int
    predictions_made: int
    mispredictions: List[int]
    suspensions: int
    undefined_at: Optional[int] = None
    unreached: int = 0

    @model_validator(mode="after")
    def check_accounting(self):
        """Toda posición revisada queda contabilizada exactamente una vez."""
        undefined = 1 if self.undefined_at is not None else 0
        if self.predictions_made + self.suspensions + undefined + self.unreached != self.horizon:
            raise ValueError("las posiciones del reporte no suman el horizonte")
        return self

    @property
    def clean(self) -> bool:
        return not self.mispredictions and self.undefined_at is None

    @property
    def density(self) -> Fraction:
        return Fraction(self.predictions_made, self.horizon) if self.horizon else Fraction(0)


class RunLengthParams(ExactModel):
    """Parámetros (m, L) del autómata de longitud de rachas."""
    m: int = Field(..., ge=0)
    L: int = Field(..., ge=1)


class RunBoundVerdict(ExactModel):
    """VIOLATED(n) o NOT-VIOLATED-UP-TO(horizon)."""
    violated: bool
    position: Optional[int] = None
    d: int
    horizon: int


# CLI
class Command(str, Enum):
    MACHINE_ENUM = "machine-enum"
    PHASE_TABLE = "phase-table"
    PREDICT = "predict"
    MARTINGALE = "martingale"
    COMPLEXITY = "complexity"


def _parse_rational(value) -> Fraction:
    if isinstance(value, str):
        value = value.strip()
    return to_rational(value)


class RunConfig(ExactModel):
    """Configuración validada de una ejecución del CLI."""
    command: Command
    machine: Optional[str] = None
    snapshot: Optional[str] = None
    temps: Optional[List[Fraction]] = None
    steps: int = Field(0, ge=0)
    horizon: Optional[int] = Field(None, ge=1)
    precision_bits: int = Field(40, ge=1)
    sequence: Optional[str] = None
    predictor: Optional[str] = None
    m: Optional[int] = Field(None, ge=0)
    L: Optional[int] = Field(None, ge=1)
    estimate: bool = False
    tail_fraction: Fraction = Fraction(1, 2)
    threshold: Optional[Fraction] = None
    target: Optional[str] = None
    cap: int = Field(12, ge=0)
    budget: int = Field(256, ge=1)
    places: Optional[int] = Field(None, ge=0)
    out: Optional[str] = None

    @field_validator("temps", mode="before")
    @classmethod
    def parse_temps(cls, v):
        """Acepta '1/2,1' o una lista."""
        if v is None:
            return None
        if isinstance(v, str):
            v = [part for part in v.split(",") if part.strip()]
        temps = [_parse_rational(t) for t in v]
        if any(t <= 0 for t in temps):
            raise ValueError("todas las temperaturas deben ser positivas")
        return temps

    @field_validator("tail_fraction", "threshold", mode="before")
    @classmethod
    def parse_fraction(cls, v):
        return None if v is None else _parse_rational(v)

    @field_validator("tail_fraction")
    @classmethod
    def validate_tail_fraction(cls, v):
        if not 0 < v <= 1:
            raise ValueError("tail_fraction debe estar en (0, 1]")
        return v

    @field_validator("threshold")
    @classmethod
    def validate_threshold(cls, v):
        if v is not None and v <= 0:
            raise ValueError("threshold debe ser positivo")
        return v

    @model_validator(mode="after")
    def validate_required(self):
        """Campos obligatorios por comando."""
        cmd = self.command
        if cmd in (Command.MACHINE_ENUM, Command.COMPLEXITY) and not (self.machine or self.snapshot):
            raise ValueError(f"{cmd.value} requiere --machine o --snapshot")
        if cmd is Command.PHASE_TABLE:
            if not (self.machine or self.snapshot):
                raise ValueError("phase-table requiere --machine o --snapshot")
            if not self.temps:
                raise ValueError("phase-table requiere al menos una temperatura")
        if cmd in (Command.PREDICT, Command.MARTINGALE):
            if not self.sequence:
                raise ValueError(f"{cmd.value} requiere --sequence")
            if self.horizon is None:
                raise ValueError(f"{cmd.value} requiere --horizon")
            synthesized = self.m is not None or self.L is not None
            if synthesized and (self.m is None or self.L is None):
                raise ValueError("--m y --L van juntos")
            sources = sum([bool(self.predictor), synthesized, self.estimate])
            if sources != 1:
                raise ValueError("indicar exactamente uno: --predictor, --m/--L o --estimate")
        if cmd is Command.COMPLEXITY and self.target is None and self.sequence is None:
            raise ValueError("complexity requiere --target o --sequence")
        return self
