"""Cadenas binarias finitas y descomposición en bloques de rachas."""
from dataclasses import dataclass
from typing import Tuple

EMPTY_SYMBOL = "λ"


class BitString(str):
    """Cadena binaria finita sobre {0,1}.

    Hereda de ``str`` para que el slicing y la concatenación sean baratos,
    pero el orden es el de longitud-luego-lexicográfico (λ, 0, 1, 00, ...),
    que coincide con la identificación con los naturales.
    """

    def __new__(cls, value: str = "") -> "BitString":
        if isinstance(value, BitString):
            return value
        text = str(value)
        if text == EMPTY_SYMBOL:
            text = ""
        if text.strip("01"):
            raise ValueError(f"cadena binaria inválida: {value!r}")
        return super().__new__(cls, text)

    @property
    def length(self) -> int:
        return len(self)

    @property
    def bits(self) -> Tuple[int, ...]:
        return tuple(int(c) for c in self)

    def to_index(self) -> int:
        """Posición en el orden λ=0, 0=1, 1=2, 00=3, ..."""
        return int("1" + self, 2) - 1

    @classmethod
    def from_index(cls, index: int) -> "BitString":
        if index < 0:
            raise ValueError("el índice debe ser no negativo")
        return cls(bin(index + 1)[3:])

    def display(self) -> str:
        return str(self) if self else EMPTY_SYMBOL

    def __add__(self, other: str) -> "BitString":
        return BitString(str.__add__(self, other))

    def _key(self):
        return (len(self), str(self))

    def __lt__(self, other: str) -> bool:
        return self._key() < (len(other), str(other))

    def __le__(self, other: str) -> bool:
        return self._key() <= (len(other), str(other))

    def __gt__(self, other: str) -> bool:
        return self._key() > (len(other), str(other))

    def __ge__(self, other: str) -> bool:
        return self._key() >= (len(other), str(other))

    __hash__ = str.__hash__

    def __repr__(self) -> str:
        return f"BitString({self.display()!r})"


EMPTY = BitString("")


@dataclass(frozen=True)
class RunBlocks:
    """Descomposición 1^{b0} 0^{a1} 1^{b1} 0^{a2} ... de una cadena.

    ``pairs`` sólo contiene bloques de ceros cerrados por al menos un uno.
    Un bloque final de ceros sin uno detrás queda en ``open_zeros`` y marca
    ``tail``.
    """

    b0: int = 0
    pairs: Tuple[Tuple[int, int], ...] = ()
    open_zeros: int = 0

    def __post_init__(self):
        if self.b0 < 0 or self.open_zeros < 0:
            raise ValueError("longitudes de bloque negativas")
        for a, b in self.pairs:
            if a < 1 or b < 1:
                raise ValueError(f"par de bloques inválido: ({a}, {b})")

    @property
    def tail(self) -> bool:
        """True si el último bloque de ceros está incompleto."""
        return self.open_zeros > 0

    def reconstruct(self) -> BitString:
        parts = ["1" * self.b0]
        parts.extend("0" * a + "1" * b for a, b in self.pairs)
        parts.append("0" * self.open_zeros)
        return BitString("".join(parts))
