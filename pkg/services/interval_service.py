"""Aritmética racional exacta y cotas certificadas de 2^{-ℓ/T}."""
import math
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Optional

from models.intervals import RationalInterval, RationalLike, Tristate, to_rational

ZERO_INTERVAL = RationalInterval.point(0)


def _dyadic_root_floor(r: int, n: int, bits: int) -> int:
    """Mayor a < 2^bits con (a / 2^bits)^n ≤ 2^{-r}.

    Bisección diádica bit a bit: la prueba a^n · 2^r ≤ 2^{bits·n} es
    aritmética entera exacta.
    """
    bound = 1 << (bits * n - r)
    a = 0
    for position in range(bits - 1, -1, -1):
        candidate = a | (1 << position)
        if candidate ** n <= bound:
            a = candidate
    return a


@lru_cache(maxsize=4096)
def pow2_neg(length: int, T: Fraction, k: int) -> RationalInterval:
    """Intervalo [lo, hi] que contiene 2^{-length/T} con hi - lo ≤ 2^-k.

    Con T = num/den el exponente es length·den/num. Si es entero el
    resultado es un punto; si no, 2^{-q}·2^{-r/num} y la raíz se acota por
    bisección.
    """
    T = to_rational(T)
    if length < 0:
        raise ValueError("la longitud debe ser no negativa")
    if T <= 0:
        raise ValueError("T debe ser positivo")
    if k < 1:
        raise ValueError("la precisión k debe ser ≥ 1")

    q, r = divmod(length * T.denominator, T.numerator)
    whole = Fraction(1, 1 << q)
    if r == 0:
        return RationalInterval.point(whole)

    a = _dyadic_root_floor(r, T.numerator, k)
    scale = Fraction(1, 1 << k)
    return RationalInterval(whole * a * scale, whole * (a + 1) * scale)


def interval_add(a: RationalInterval, b: RationalInterval) -> RationalInterval:
    return RationalInterval(a.lo + b.lo, a.hi + b.hi)


def interval_scale(a: RationalInterval, factor: int) -> RationalInterval:
    """factor · a, con factor natural."""
    if factor < 0:
        raise ValueError("el factor debe ser no negativo")
    return RationalInterval(a.lo * factor, a.hi * factor)


def interval_sum(intervals: Iterable[RationalInterval]) -> RationalInterval:
    total = ZERO_INTERVAL
    for interval in intervals:
        total = interval_add(total, interval)
    return total


def interval_leq(a: RationalInterval, b: RationalInterval) -> Tristate:
    """¿a ≤ b? certificado."""
    if a.hi <= b.lo:
        return Tristate.YES
    if a.lo > b.hi:
        return Tristate.NO
    return Tristate.UNKNOWN


def ceil_log2(n: int) -> int:
    return (n - 1).bit_length() if n > 1 else 0


def truncate_decimal(value: RationalLike, places: int) -> str:
    """Decimal truncado (hacia cero) con marca explícita cuando no es exacto."""
    q = to_rational(value)
    sign = "-" if q < 0 else ""
    q = abs(q)
    scaled = q * 10 ** places
    digits = math.floor(scaled)
    integer, fraction = divmod(digits, 10 ** places)
    text = f"{sign}{integer}"
    if places:
        text += "." + str(fraction).zfill(places)
    if scaled != digits:
        text += " (truncated)"
    return text


def render_interval(interval: RationalInterval, places: Optional[int] = None) -> str:
    if places is None:
        return str(interval)
    return f"[{truncate_decimal(interval.lo, places)}, {truncate_decimal(interval.hi, places)}]"
