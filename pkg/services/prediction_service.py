"""Predictores fuertes, autómatas con salida y compiladores predictor -> martingala."""
import csv
import io
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, Iterator, List, Optional, Tuple, Union

from config import get_settings
from models.intervals import RationalLike, to_rational
from models.schemas import PredictabilityReport, Prediction, RunBoundVerdict, RunLengthParams
from services.martingale_service import Capital, Martingale
from services.sequence_service import BitSource, zero_runs
from utils.errors import SpecError
from utils.logger import get_logger, log_with_extra

settings = get_settings()
logger = get_logger(__name__)


class Predictor(ABC):
    """F: cadenas -> {0, 1, N}; None significa no definido (sólo parciales)."""

    partial: bool = False
    name: str = "predictor"

    @abstractmethod
    def predict(self, x: str) -> Optional[Prediction]:
        """F(x)."""

    def __call__(self, x: str) -> Optional[Prediction]:
        return self.predict(x)

    def predictions_along(self, x: str) -> Iterator[Optional[Prediction]]:
        """F(x↾0), F(x↾1), ..., F(x↾|x|)."""
        for n in range(len(x) + 1):
            yield self.predict(x[:n])


class TotalPredictor(Predictor):
    """Predictor total: toda entrada produce una predicción."""

    def __init__(self, fn: Callable[[str], Union[Prediction, str]], name: str = "total"):
        self._fn = fn
        self.name = name

    def predict(self, x: str) -> Prediction:
        return Prediction(self._fn(x))

    def as_partial_predictor(self) -> "PartialPredictor":
        return PartialPredictor(self.predict, name=self.name)


class PartialPredictor(Predictor):
    """Predictor parcial: la función puede devolver None."""

    partial = True

    def __init__(self, fn: Callable[[str], Optional[Union[Prediction, str]]], name: str = "partial"):
        self._fn = fn
        self.name = name

    def predict(self, x: str) -> Optional[Prediction]:
        result = self._fn(x)
        return None if result is None else Prediction(result)


def constant_predictor(prediction: Union[Prediction, str]) -> TotalPredictor:
    p = Prediction(prediction)
    return TotalPredictor(lambda x: p, name=f"always:{p.value}")


@dataclass(frozen=True)
class PredictorFAO:
    """Autómata finito con salida (Q, {0,1}, δ, q0, {0,1,N}, f).

    Los estados son 0..len(outputs)-1; ``transitions[q]`` es (δ(q,0), δ(q,1)).
    """

    transitions: Tuple[Tuple[int, int], ...]
    outputs: Tuple[Prediction, ...]
    start: int = 0
    name: str = "fao"

    def __post_init__(self):
        size = len(self.outputs)
        if size == 0:
            raise ValueError("el autómata necesita al menos un estado")
        if len(self.transitions) != size:
            raise ValueError("δ debe estar definida para todo estado")
        if not 0 <= self.start < size:
            raise ValueError(f"estado inicial {self.start} fuera de Q")
        for q, targets in enumerate(self.transitions):
            if len(targets) != 2 or not all(0 <= t < size for t in targets):
                raise ValueError(f"δ({q}, ·) inválida: {targets}")
        object.__setattr__(self, "outputs", tuple(Prediction(p) for p in self.outputs))

    @property
    def states(self) -> range:
        return range(len(self.outputs))

    def run(self, x: str) -> Prediction:
        """f(q_n) tras leer x símbolo a símbolo."""
        q = self.start
        for symbol in x:
            q = self.transitions[q][symbol == "1"]
        return self.outputs[q]

    def predictions_along(self, x: str) -> Iterator[Prediction]:
        q = self.start
        yield self.outputs[q]
        for symbol in x:
            q = self.transitions[q][symbol == "1"]
            yield self.outputs[q]

    def as_total_predictor(self) -> TotalPredictor:
        fao = self

        class _Simulated(TotalPredictor):
            def predictions_along(self, x: str) -> Iterator[Prediction]:
                return fao.predictions_along(x)

        return _Simulated(self.run, name=self.name)

    def to_text(self) -> str:
        """Una línea por (estado, símbolo) -> estado y una por salida."""
        lines = [f"start {self.start}"]
        for q, (on0, on1) in enumerate(self.transitions):
            lines.append(f"{q} 0 {on0}")
            lines.append(f"{q} 1 {on1}")
        lines.extend(f"out {q} {p.value}" for q, p in enumerate(self.outputs))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str, name: str = "fao") -> "PredictorFAO":
        start = 0
        delta: Dict[Tuple[int, str], int] = {}
        outputs: Dict[int, Prediction] = {}
        for number, raw in enumerate(text.splitlines(), start=1):
            tokens = raw.split("#", 1)[0].split()
            if not tokens:
                continue
            try:
                if tokens[0] == "start" and len(tokens) == 2:
                    start = int(tokens[1])
                elif tokens[0] == "out" and len(tokens) == 3:
                    outputs[int(tokens[1])] = Prediction(tokens[2])
                elif len(tokens) == 3 and tokens[1] in ("0", "1"):
                    delta[(int(tokens[0]), tokens[1])] = int(tokens[2])
                else:
                    raise ValueError(raw)
            except ValueError as e:
                raise SpecError(f"línea {number} del autómata inválida: {raw!r}") from e
        size = max(list(outputs) + [q for q, _ in delta] + [start]) + 1
        try:
            transitions = tuple((delta[(q, "0")], delta[(q, "1")]) for q in range(size))
            return cls(transitions=transitions, outputs=tuple(outputs[q] for q in range(size)), start=start, name=name)
        except (KeyError, ValueError) as e:
            raise SpecError(f"autómata incompleto: falta {e}") from e


AnyPredictor = Union[Predictor, PredictorFAO]


def fao_run(M: PredictorFAO, x: str) -> Prediction:
    return M.run(x)


def check_predictability(F: AnyPredictor, X: BitSource, horizon: int) -> PredictabilityReport:
    """Evalúa F(X↾n) para n = 0..horizon-1 contra X(n+1)."""
    if horizon < 1:
        raise ValueError("horizon debe ser ≥ 1")
    x = X.prefix(horizon)
    predictions = F.predictions_along(x)
    made = suspensions = 0
    mispredictions: List[int] = []
    undefined_at = None
    unreached = 0
    for n in range(horizon):
        prediction = next(predictions)
        if prediction is None:
            undefined_at = n
            unreached = horizon - n - 1
            break
        if prediction is Prediction.SUSPEND:
            suspensions += 1
            continue
        made += 1
        if prediction.bit != x[n]:
            mispredictions.append(n)
    report = PredictabilityReport(
        horizon=horizon, predictions_made=made, mispredictions=mispredictions,
        suspensions=suspensions, undefined_at=undefined_at, unreached=unreached,
    )
    log_with_extra(
        logger, "debug", "Predictibilidad revisada",
        predictor=getattr(F, "name", "?"), horizon=horizon, made=made, errors=len(mispredictions),
    )
    return report


class CompiledMartingale(Martingale):
    """Martingala que apuesta todo a cada predicción comprometida de F.

    B(λ) = 1; B(x0) = B(x) si F(x)=N, 2B(x) si F(x)=0, 0 si F(x)=1;
    B(x1) = 2B(x) - B(x0). Si F(x) no está definido, tampoco B(x0) ni B(x1).
    """

    def __init__(self, predictor: AnyPredictor):
        if isinstance(predictor, PredictorFAO):
            predictor = predictor.as_total_predictor()
        self.predictor = predictor
        self.partial = getattr(predictor, "partial", False)
        self.name = f"compiled:{getattr(predictor, 'name', 'predictor')}"
        self._cache: Dict[str, Optional[int]] = {"": 1}

    @staticmethod
    def _bet(capital: int, prediction: Prediction, symbol: str) -> int:
        if prediction is Prediction.SUSPEND:
            return capital
        return 2 * capital if prediction.bit == symbol else 0

    def value(self, x: str) -> Optional[Capital]:
        if len(x) > settings.martingale_cache_depth:
            values = self.trajectory(x)
            return values[-1] if len(values) == len(x) + 1 else None
        result = self._cached(x)
        return None if result is None else Fraction(result)

    def _cached(self, x: str) -> Optional[int]:
        if x in self._cache:
            return self._cache[x]
        parent = self._cached(x[:-1])
        result = None
        if parent is not None:
            prediction = self.predictor(x[:-1])
            if prediction is not None:
                result = self._bet(parent, prediction, x[-1])
        self._cache[x] = result
        return result

    def trajectory(self, x: str) -> List[Capital]:
        capital = 1
        values = [capital]
        for symbol, prediction in zip(x, self.predictor.predictions_along(x)):
            if prediction is None:
                break
            capital = self._bet(capital, prediction, symbol)
            values.append(capital)
        return [Fraction(v) for v in values]


def compile_martingale_total(F: Union[TotalPredictor, PredictorFAO]) -> CompiledMartingale:
    if getattr(F, "partial", False):
        raise ValueError("se esperaba un predictor total")
    return CompiledMartingale(F)


def compile_martingale_partial(F: PartialPredictor) -> CompiledMartingale:
    martingale = CompiledMartingale(F)
    martingale.partial = True
    return martingale


def synth_runlength_fao(m: int, L: int) -> PredictorFAO:
    """Autómata de estados q_0..q_{m+L} que predice 1 tras y0^L con |y| ≥ m.

    δ(q_{m+L}, 0) queda fijado en q_{m+L}.
    """
    if m < 0:
        raise ValueError("m debe ser ≥ 0")
    if L < 1:
        raise ValueError("L debe ser ≥ 1")
    last = m + L
    transitions = []
    for i in range(last + 1):
        if i < m:
            transitions.append((i + 1, i + 1))
        elif i < last:
            transitions.append((i + 1, m))
        else:
            transitions.append((last, m))
    outputs = [Prediction.SUSPEND] * last + [Prediction.ONE]
    return PredictorFAO(transitions=tuple(transitions), outputs=tuple(outputs), name=f"runlength:m={m},L={L}")


def ends_with_guarded_zero_run(x: str, m: int, L: int) -> bool:
    """¿Existe y con |y| ≥ m y x = y0^L?"""
    return len(x) >= m + L and x.endswith("0" * L)


def estimate_runlength_params(x: str, tail_fraction: RationalLike) -> Optional[RunLengthParams]:
    """Heurística para (m, L) a partir de un prefijo finito; None significa NO-ZEROS.

    L es la racha completa de ceros más larga que termina en la cola
    (los últimos ⌈tail_fraction·|x|⌉ bits); m es el índice justo después
    de la última racha más larga que L.
    """
    tail_fraction = to_rational(tail_fraction)
    if not 0 < tail_fraction <= 1:
        raise ValueError("tail_fraction debe estar en (0, 1]")
    runs = zero_runs(x)
    tail_start = len(x) - math.ceil(tail_fraction * len(x))
    in_tail = [length for start, length, complete in runs if complete and start + length > tail_start]
    if not in_tail:
        logger.info("Sin rachas completas de ceros en la cola: NO-ZEROS")
        return None
    L = max(in_tail)
    m = max((start + length for start, length, _ in runs if length > L), default=0)
    log_with_extra(logger, "info", "Parámetros estimados", m=m, L=L, sample=len(x))
    return RunLengthParams(m=m, L=L)


def check_run_bound(X: BitSource, d: int, horizon: int) -> RunBoundVerdict:
    """VIOLATED(n) si X↾n es el primer prefijo que termina en 0^d."""
    if d < 1:
        raise ValueError("d debe ser ≥ 1")
    if horizon < d:
        raise ValueError("horizon debe ser ≥ d")
    index = X.prefix(horizon).find("0" * d)
    if index < 0:
        return RunBoundVerdict(violated=False, d=d, horizon=horizon)
    return RunBoundVerdict(violated=True, position=index + d, d=d, horizon=horizon)


REPORT_HEADER = ["horizon", "predictions_made", "suspensions", "mispredictions", "undefined_at", "unreached"]


def report_csv(report: PredictabilityReport) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(REPORT_HEADER)
    writer.writerow([
        report.horizon,
        report.predictions_made,
        report.suspensions,
        ";".join(str(n) for n in report.mispredictions),
        "" if report.undefined_at is None else report.undefined_at,
        report.unreached,
    ])
    return buffer.getvalue()


def report_text(report: PredictabilityReport, label: str = "") -> str:
    density = report.density
    lines = [
        f"Predictor: {label}" if label else "Predictor",
        f"  horizonte:        {report.horizon}",
        f"  predicciones:     {report.predictions_made} (densidad {density.numerator}/{density.denominator})",
        f"  suspensiones:     {report.suspensions}",
        f"  errores:          {len(report.mispredictions)}",
    ]
    if report.mispredictions:
        shown = ", ".join(str(n) for n in report.mispredictions[:10])
        lines.append(f"  primeros errores: {shown}")
    if report.undefined_at is not None:
        lines.append(f"  no definido en:   {report.undefined_at} ({report.unreached} posiciones sin alcanzar)")
    return "\n".join(lines) + "\n"
