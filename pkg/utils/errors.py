"""Errores del toolkit con su código estable."""
from typing import Optional


class ToolkitError(Exception):
    """Error base: lleva un código estable y un detalle legible."""

    code = "TOOLKIT-ERROR"

    def __init__(self, detail: str):
        super().__init__(f"{self.code}: {detail}")
        self.detail = detail


class UnstableDigitsError(ToolkitError):
    """Los dígitos pedidos todavía no están certificados."""

    code = "UNSTABLE-DIGITS"

    def __init__(self, position: int, detail: Optional[str] = None):
        super().__init__(detail or f"el bit {position} no está certificado en la etapa actual")
        self.position = position


class PrefixViolationError(ToolkitError):
    """Un programa es prefijo propio de otro del dominio."""

    code = "PREFIX-VIOLATION"

    def __init__(self, program: str, other: str):
        super().__init__(f"'{program}' y '{other}' violan la condición libre de prefijos")
        self.program = program
        self.other = other


class KraftViolationError(ToolkitError):
    """La suma de Kraft del dominio enumerado supera 1."""

    code = "KRAFT-VIOLATION"


class UnrealizableSpecError(ToolkitError):
    """El trie binario se agota antes de colocar todos los programas pedidos."""

    code = "UNREALIZABLE-SPEC"

    def __init__(self, length: int, requested: int, available: int):
        super().__init__(
            f"longitud {length}: se piden {requested} programas y sólo quedan {available} libres"
        )
        self.length = length


class SnapshotError(ToolkitError):
    """Snapshot mal formado o no reproducible."""

    code = "SNAPSHOT"


class SpecError(ToolkitError):
    """Especificación de máquina, secuencia o predictor inválida."""

    code = "INVALID-SPEC"
