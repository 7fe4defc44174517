"""Secuencias binarias infinitas presentadas como prefijos bajo demanda."""
import itertools
import math
from abc import ABC, abstractmethod
from enum import Enum
from fractions import Fraction
from typing import Callable, Iterable, Iterator, List, Tuple

from models.bits import BitString, RunBlocks
from models.intervals import RationalInterval, RationalLike, to_rational
from utils.errors import UnstableDigitsError
from utils.logger import get_logger

logger = get_logger(__name__)


class SourceKind(str, Enum):
    DYADIC_RATIONAL = "dyadic-rational"
    EVENTUALLY_PERIODIC = "eventually-periodic"
    GENERATOR = "generator"
    ENUMERATION_BACKED = "enumeration-backed"


def fractional_part(value: RationalLike) -> Fraction:
    """α - ⌊α⌋."""
    q = to_rational(value)
    return q - (q.numerator // q.denominator)


def is_dyadic(q: Fraction) -> bool:
    return q.denominator & (q.denominator - 1) == 0


class BitSource(ABC):
    """Secuencia binaria infinita X con prefijos X↾n monótonos.

    Cada fuente guarda los bits ya emitidos; el estado sólo crece, así que
    prefix(n) siempre es prefijo de prefix(n+1). No es segura para lectores
    concurrentes: clonar o serializar el acceso.
    """

    kind: SourceKind

    def __init__(self):
        self._bits: List[str] = []

    @abstractmethod
    def _extend_to(self, n: int) -> None:
        """Asegura que ``self._bits`` tiene al menos n bits."""

    def prefix(self, n: int) -> BitString:
        """X↾n."""
        if n < 0:
            raise ValueError("n debe ser no negativo")
        if len(self._bits) < n:
            self._extend_to(n)
        return BitString("".join(self._bits[:n]))

    def bit(self, n: int) -> int:
        """X(n), con n ≥ 1."""
        if n < 1:
            raise ValueError("los bits se numeran desde 1")
        if len(self._bits) < n:
            self._extend_to(n)
        return int(self._bits[n - 1])

    def describe(self) -> str:
        return self.kind.value


class RationalSource(BitSource):
    """Expansión binaria de un racional en [0,1) por división larga.

    La división larga nunca produce la cola de unos, así que los diádicos
    salen con infinitos ceros.
    """

    def __init__(self, value: RationalLike):
        super().__init__()
        q = to_rational(value)
        if not 0 <= q < 1:
            raise ValueError(f"{q} fuera de [0,1): normalizar con fractional_part")
        self.value = q
        self.kind = SourceKind.DYADIC_RATIONAL if is_dyadic(q) else SourceKind.EVENTUALLY_PERIODIC
        self._remainder = q.numerator

    def _extend_to(self, n: int) -> None:
        den = self.value.denominator
        while len(self._bits) < n:
            self._remainder *= 2
            digit, self._remainder = divmod(self._remainder, den)
            self._bits.append(str(digit))

    def describe(self) -> str:
        return f"rational:{self.value.numerator}/{self.value.denominator}"


class PeriodicSource(BitSource):
    """prefix · period^ω."""

    kind = SourceKind.EVENTUALLY_PERIODIC

    def __init__(self, period: str, prefix: str = ""):
        super().__init__()
        self.head = BitString(prefix)
        self.period = BitString(period)
        if not self.period:
            raise ValueError("el periodo no puede ser vacío")
        self._cycle = itertools.chain(self.head, itertools.cycle(self.period))

    def _extend_to(self, n: int) -> None:
        self._bits.extend(itertools.islice(self._cycle, n - len(self._bits)))

    def describe(self) -> str:
        head = f"{self.head}|" if self.head else ""
        return f"periodic:{head}{self.period}"


class GeneratorSource(BitSource):
    """Envuelve un iterador infinito de bits (0/1 o '0'/'1')."""

    kind = SourceKind.GENERATOR

    def __init__(self, bits: Iterable, label: str = "generator"):
        super().__init__()
        self._iter = iter(bits)
        self.label = label

    def _extend_to(self, n: int) -> None:
        for b in itertools.islice(self._iter, n - len(self._bits)):
            self._bits.append("1" if b in (1, "1", True) else "0")
        if len(self._bits) < n:
            raise ValueError(f"el generador '{self.label}' se agotó en {len(self._bits)} bits")

    def describe(self) -> str:
        return self.label


class EnumerationSource(BitSource):
    """Real c.e. aproximado por intervalos certificados.

    ``approximate(k)`` devuelve un intervalo que contiene al real con ancho
    pedido ≤ 2^-k en la etapa actual. Un dígito se expone sólo cuando los dos
    extremos coinciden en él; si no, UNSTABLE-DIGITS.
    """

    kind = SourceKind.ENUMERATION_BACKED

    def __init__(self, approximate: Callable[[int], RationalInterval], label: str = "enumeration"):
        super().__init__()
        self._approximate = approximate
        self.label = label

    def _extend_to(self, n: int) -> None:
        interval = self._approximate(n + 2)
        if interval.lo < 0 or interval.hi >= 1:
            raise UnstableDigitsError(1, f"el intervalo {interval} no está dentro de [0,1)")
        scale = 1 << n
        lo_digits = math.floor(interval.lo * scale)
        hi_digits = math.floor(interval.hi * scale)
        if lo_digits != hi_digits:
            first_unstable = n - (lo_digits ^ hi_digits).bit_length() + 1
            logger.debug(f"{self.label}: dígitos inestables desde la posición {first_unstable}")
            raise UnstableDigitsError(first_unstable)
        digits = format(lo_digits, f"0{n}b") if n else ""
        if "".join(self._bits) != digits[: len(self._bits)]:
            raise UnstableDigitsError(1, f"{self.label}: la aproximación contradice dígitos ya certificados")
        self._bits = list(digits)

    def describe(self) -> str:
        return self.label


def prefix(src: BitSource, n: int) -> BitString:
    return src.prefix(n)


def bit(src: BitSource, n: int) -> int:
    return src.bit(n)


def _runs(x: str) -> Iterator[Tuple[str, int]]:
    for symbol, group in itertools.groupby(x):
        yield symbol, sum(1 for _ in group)


def decompose_runs(x: str) -> RunBlocks:
    """Descompone x como 1^{b0} 0^{a1} 1^{b1} ..."""
    runs = list(_runs(BitString(x)))
    b0 = 0
    if runs and runs[0][0] == "1":
        b0 = runs.pop(0)[1]
    pairs = []
    open_zeros = 0
    for i in range(0, len(runs), 2):
        zeros = runs[i][1]
        if i + 1 < len(runs):
            pairs.append((zeros, runs[i + 1][1]))
        else:
            open_zeros = zeros
    return RunBlocks(b0=b0, pairs=tuple(pairs), open_zeros=open_zeros)


def zero_runs(x: str) -> List[Tuple[int, int, bool]]:
    """(inicio, longitud, completa) de cada racha de ceros; completa si la sigue un 1."""
    result = []
    position = 0
    for symbol, length in _runs(x):
        if symbol == "0":
            result.append((position, length, position + length < len(x)))
        position += length
    return result


def max_zero_run(x: str) -> int:
    return max((length for symbol, length in _runs(x) if symbol == "0"), default=0)
