"""Martingalas como estrategias de apuesta con capital racional exacto."""
import csv
import io
import itertools
import math
from abc import ABC, abstractmethod
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Tuple

from config import get_settings
from models.intervals import RationalLike, to_rational
from models.schemas import CapitalTrace, FairnessVerdict, SuccessObservation
from services.sequence_service import BitSource
from utils.logger import get_logger

settings = get_settings()
logger = get_logger(__name__)

Capital = Fraction


class Martingale(ABC):
    """B: cadenas -> capital ≥ 0 con B(x0) + B(x1) = 2B(x).

    ``value`` devuelve None donde una martingala parcial no está definida.
    """

    partial: bool = False
    name: str = "martingale"

    @abstractmethod
    def value(self, x: str) -> Optional[Capital]:
        """B(x), o None si no está definida."""

    def __call__(self, x: str) -> Optional[Capital]:
        return self.value(x)

    def trajectory(self, x: str) -> List[Capital]:
        """B(x↾0), B(x↾1), ... hasta el primer prefijo no definido (excluido)."""
        values = []
        for n in range(len(x) + 1):
            current = self.value(x[:n])
            if current is None:
                break
            values.append(current)
        return values


class MartingaleTotal(Martingale):
    """Martingala total a partir de una función."""

    def __init__(self, fn: Callable[[str], RationalLike], name: str = "total"):
        self._fn = fn
        self.name = name

    def value(self, x: str) -> Optional[Capital]:
        result = self._fn(x)
        return None if result is None else to_rational(result)


class MartingalePartial(Martingale):
    """Martingala parcial: la función devuelve None fuera del dominio."""

    partial = True

    def __init__(self, fn: Callable[[str], Optional[RationalLike]], name: str = "partial"):
        self._fn = fn
        self.name = name

    def value(self, x: str) -> Optional[Capital]:
        result = self._fn(x)
        return None if result is None else to_rational(result)


def constant_martingale(capital: RationalLike = 1) -> MartingaleTotal:
    c = to_rational(capital)
    return MartingaleTotal(lambda x: c, name=f"constant:{c}")


class CEMartingale:
    """Martingala c.e. dada por aproximaciones inferiores por etapa.

    ``approximate(x, s)`` debe ser no decreciente en s; su límite es B(x).
    """

    def __init__(self, approximate: Callable[[str, int], RationalLike], name: str = "ce"):
        self._approximate = approximate
        self.name = name

    def lower(self, x: str, stage: int) -> Capital:
        return to_rational(self._approximate(x, stage))

    def check_stage_monotone(self, depth: int, stages: int) -> Optional[Tuple[str, int]]:
        """Primer (x, s) con lower(x, s+1) < lower(x, s), o None."""
        for x in all_strings(depth):
            previous = self.lower(x, 0)
            for stage in range(1, stages + 1):
                current = self.lower(x, stage)
                if current < previous:
                    return x, stage - 1
                previous = current
        return None


def ce_from_martingale(B: Martingale) -> CEMartingale:
    """Truncaciones diádicas ⌊B(x)·2^s⌋/2^s: no decrecientes en s."""

    def approximate(x: str, stage: int) -> Fraction:
        current = B(x) or Fraction(0)
        scale = 1 << stage
        return Fraction(math.floor(current * scale), scale)

    return CEMartingale(approximate, name=f"ce:{B.name}")


def all_strings(max_len: int):
    """Todas las cadenas de longitud ≤ max_len en orden longitud-lexicográfico."""
    for length in range(max_len + 1):
        for bits in itertools.product("01", repeat=length):
            yield "".join(bits)


def check_fairness(B: Martingale, depth: int) -> FairnessVerdict:
    """Comprueba la ley de equidad en todo nodo x con |x| < depth.

    Para martingalas parciales además: dominio cerrado por prefijos y
    x0 definido si y sólo si x1 definido.
    """
    if depth < 0 or depth > settings.fairness_depth_limit:
        raise ValueError(f"depth debe estar en [0, {settings.fairness_depth_limit}]")

    def fail(x: str, reason: str) -> FairnessVerdict:
        logger.debug(f"Equidad falla en {x or 'λ'}: {reason}")
        return FairnessVerdict(passed=False, depth=depth, witness=x, reason=reason)

    root = B("")
    if root is None and not B.partial:
        return fail("", "martingala total no definida")
    if root is not None and root < 0:
        return fail("", "capital negativo")

    level: Dict[str, Optional[Capital]] = {"": root}
    for _ in range(depth):
        next_level: Dict[str, Optional[Capital]] = {}
        for x, bx in level.items():
            b0, b1 = B(x + "0"), B(x + "1")
            next_level[x + "0"], next_level[x + "1"] = b0, b1
            if not B.partial and (b0 is None or b1 is None):
                return fail(x, "martingala total no definida en un hijo")
            if bx is None:
                if b0 is not None or b1 is not None:
                    return fail(x, "dominio no cerrado por prefijos")
                continue
            if (b0 is None) != (b1 is None):
                return fail(x, "sólo uno de x0, x1 está definido")
            if b0 is None:
                continue
            if b0 < 0 or b1 < 0:
                return fail(x, "capital negativo")
            if b0 + b1 != 2 * bx:
                return fail(x, f"B(x0)+B(x1) = {b0 + b1} ≠ {2 * bx}")
        level = next_level
    return FairnessVerdict(passed=True, depth=depth)


def run_capital(B: Martingale, X: BitSource, n: int) -> CapitalTrace:
    """B(X↾i) para i = 0..n, cortando en el primer valor no definido."""
    if n < 0:
        raise ValueError("n debe ser no negativo")
    values = [to_rational(v) for v in B.trajectory(X.prefix(n))]
    if not values:
        # B(λ) no definido: traza vacía no representable
        raise ValueError(f"{B.name} no está definida en λ")
    if len(values) <= n:
        logger.info(f"{B.name} deja de estar definida en la posición {len(values)}")
    return CapitalTrace(values=values, defined_up_to=len(values) - 1, requested=n)


def succeeds_empirically(
    B: Martingale, X: BitSource, threshold: RationalLike, horizon: int
) -> SuccessObservation:
    """REACHED(n) para el menor n ≤ horizon con B(X↾n) ≥ threshold; si no, NOT-REACHED.

    Es un indicio empírico, nunca una prueba de éxito.
    """
    threshold = to_rational(threshold)
    if horizon < 1:
        raise ValueError("horizon debe ser ≥ 1")
    if threshold <= 0:
        raise ValueError("threshold debe ser positivo")
    values = B.trajectory(X.prefix(horizon))
    for n, capital in enumerate(values):
        if capital >= threshold:
            return SuccessObservation(reached=True, position=n, threshold=threshold, horizon=horizon)
    undefined_at = len(values) if len(values) <= horizon else None
    return SuccessObservation(reached=False, threshold=threshold, horizon=horizon, undefined_at=undefined_at)


def capital_csv(trace: CapitalTrace) -> str:
    """CSV 'n,capital_num,capital_den'."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["n", "capital_num", "capital_den"])
    for n, capital in enumerate(trace.values):
        writer.writerow([n, capital.numerator, capital.denominator])
    return buffer.getvalue()
