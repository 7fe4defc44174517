"""Intervalos racionales cerrados y el veredicto tri-estado."""
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Union

Rational = Fraction
RationalLike = Union[int, str, Fraction]


def to_rational(value: RationalLike) -> Fraction:
    """Convierte a racional exacto; rechaza floats."""
    if isinstance(value, float):
        raise TypeError("no se admiten floats: usar 'num/den' o Fraction")
    return Fraction(value)


def format_rational(q: Fraction) -> str:
    """Renderiza siempre como 'num/den'."""
    return f"{q.numerator}/{q.denominator}"


class Tristate(str, Enum):
    """Resultado certificado de una comparación de intervalos."""

    YES = "YES"
    NO = "NO"
    UNKNOWN = "UNKNOWN"


@dataclass(frozen=True)
class RationalInterval:
    """[lo, hi] con extremos racionales exactos."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        object.__setattr__(self, "lo", to_rational(self.lo))
        object.__setattr__(self, "hi", to_rational(self.hi))
        if self.lo > self.hi:
            raise ValueError(f"intervalo vacío: [{self.lo}, {self.hi}]")

    @classmethod
    def point(cls, value: RationalLike) -> "RationalInterval":
        q = to_rational(value)
        return cls(q, q)

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def is_point(self) -> bool:
        return self.lo == self.hi

    def contains(self, value: RationalLike) -> bool:
        return self.lo <= to_rational(value) <= self.hi

    def __str__(self) -> str:
        return f"[{format_rational(self.lo)}, {format_rational(self.hi)}]"
