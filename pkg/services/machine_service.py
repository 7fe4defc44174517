"""Máquinas libres de prefijos: tablas, intérprete auto-delimitado y dominios sintéticos."""
import hashlib
import math
from abc import ABC, abstractmethod
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

from config import get_settings
from models.bits import BitString
from models.schemas import ComplexityProfileRow, ComplexityReport, HaltingPair, SyntheticDomainSpec
from services.sequence_service import BitSource
from utils.errors import (
    KraftViolationError,
    PrefixViolationError,
    SnapshotError,
    UnrealizableSpecError,
)
from utils.logger import get_logger, log_with_extra

settings = get_settings()
logger = get_logger(__name__)


class MachineKind(str, Enum):
    TABLE = "table"
    INTERPRETER = "interpreter"
    SYNTHETIC = "synthetic"


class PrefixTrie:
    """Trie binario de los programas enumerados."""

    _END = "$"

    def __init__(self):
        self._root: Dict[str, dict] = {}
        self.size = 0

    def insert(self, program: str) -> None:
        """Inserta el programa o lanza PREFIX-VIOLATION nombrando el conflicto."""
        node = self._root
        for symbol in program:
            if self._END in node:
                raise PrefixViolationError(node[self._END], program)
            node = node.setdefault(symbol, {})
        if self._END in node:
            raise PrefixViolationError(program, node[self._END])
        if node:
            raise PrefixViolationError(program, self._any_below(node))
        node[self._END] = program
        self.size += 1

    def _any_below(self, node: dict) -> str:
        while self._END not in node:
            node = node[min(node)]
        return node[self._END]

    def __contains__(self, program: str) -> bool:
        node = self._root
        for symbol in program:
            node = node.get(symbol)
            if node is None:
                return False
        return self._END in node


class PrefixMachine(ABC):
    """Máquina libre de prefijos con dominio enumerado por etapas.

    La enumeración muta el estado: un único dueño a la vez. Las consultas
    sobre una máquina quieta se pueden compartir en sólo lectura.
    """

    kind: MachineKind

    def __init__(self):
        self.stage = 0
        self._pairs: Dict[str, HaltingPair] = {}
        self._trie = PrefixTrie()
        self._kraft = Fraction(0)

    @property
    @abstractmethod
    def machine_id(self) -> str:
        """Identificador estable de la definición."""

    @property
    def exhausted(self) -> bool:
        """True si ya no quedan programas por descubrir."""
        return False

    @abstractmethod
    def _advance(self, steps: int) -> None:
        """Avanza ``steps`` etapas del calendario de enumeración."""

    @abstractmethod
    def run(self, program: str, budget: int) -> Optional[str]:
        """Salida de la máquina si ``program`` para en ≤ budget pasos; None si no."""

    @abstractmethod
    def candidate_programs(self, max_len: int) -> Iterator[str]:
        """Programas posibles de longitud ≤ max_len, en orden longitud-lexicográfico."""

    def step_enumeration(self, steps: int) -> "PrefixMachine":
        if steps < 0:
            raise ValueError("steps debe ser no negativo")
        if steps == 0 or self.exhausted:
            return self
        before = len(self._pairs)
        self._advance(steps)
        log_with_extra(
            logger, "info", "Enumeración avanzada",
            machine=self.machine_id, stage=self.stage,
            new_pairs=len(self._pairs) - before, kraft=f"{self._kraft}",
        )
        return self

    def _record(self, program: str, output: str) -> None:
        self._trie.insert(program)
        self._kraft += Fraction(1, 1 << len(program))
        if self._kraft > 1:
            logger.error(f"Suma de Kraft {self._kraft} > 1 en {self.machine_id}")
            raise KraftViolationError(f"la suma de Kraft llegó a {self._kraft}")
        self._pairs[program] = HaltingPair(program=program, output=output, discovered_stage=self.stage)

    def halting_pairs(self) -> Iterator[HaltingPair]:
        return iter(self._pairs.values())

    def length_profile(self) -> Counter:
        """Cantidad de programas enumerados por longitud."""
        return Counter(len(p) for p in self._pairs)

    @property
    def enumerated_count(self) -> int:
        return sum(self.length_profile().values())

    def kraft_sum(self) -> Fraction:
        return self._kraft


class TableMachine(PrefixMachine):
    """Máquina definida por una tabla finita; cada programa para al instante."""

    kind = MachineKind.TABLE

    def __init__(self, pairs: Iterable[Tuple[str, str]]):
        super().__init__()
        self.table: List[Tuple[BitString, BitString]] = [
            (BitString(p), BitString(o)) for p, o in pairs
        ]
        check = PrefixTrie()
        for program, _ in self.table:
            check.insert(program)
        self._outputs = dict(self.table)

    @property
    def machine_id(self) -> str:
        digest = hashlib.sha1(
            "\n".join(f"{p}\t{o}" for p, o in self.table).encode()
        ).hexdigest()[:10]
        return f"table:{digest}"

    @property
    def exhausted(self) -> bool:
        return self.stage >= len(self.table)

    def _advance(self, steps: int) -> None:
        for _ in range(steps):
            if self.exhausted:
                break
            program, output = self.table[self.stage]
            self._record(program, output)
            self.stage += 1

    def run(self, program: str, budget: int) -> Optional[str]:
        return self._outputs.get(program)

    def candidate_programs(self, max_len: int) -> Iterator[str]:
        return iter(sorted((p for p in self._outputs if len(p) <= max_len), key=lambda p: (len(p), p)))


PUSH0, PUSH1, EMIT, HALT = range(4)


def decode_program(program: str) -> Optional[Tuple[int, ...]]:
    """Instrucciones de 1^k 0 w (|w| = k), o None si no es auto-delimitado.

    w se lee de a dos bits (00 push0, 01 push1, 10 emit, 11 halt); un bit
    impar final se ignora.
    """
    k = len(program) - len(program.lstrip("1"))
    if len(program) != 2 * k + 1 or program[k] != "0":
        return None
    payload = program[k + 1:]
    return tuple(int(payload[j:j + 2], 2) for j in range(0, k - 1, 2))


@dataclass
class Execution:
    """Estado reanudable de un programa del intérprete."""

    instructions: Tuple[int, ...]
    ip: int = 0
    steps: int = 0
    halted: bool = False
    stack: List[str] = field(default_factory=list)
    output: List[str] = field(default_factory=list)

    def __post_init__(self):
        if not self.instructions:
            self.halted = True

    def step(self) -> bool:
        """Ejecuta una instrucción; True si el programa ya paró."""
        if self.halted:
            return True
        op = self.instructions[self.ip]
        self.ip = (self.ip + 1) % len(self.instructions)
        self.steps += 1
        if op == PUSH0:
            self.stack.append("0")
        elif op == PUSH1:
            self.stack.append("1")
        elif op == EMIT:
            if self.stack:
                self.output.append(self.stack.pop())
        elif not self.stack or self.stack[-1] == "1":
            self.halted = True
        else:
            self.stack.pop()
        return self.halted

    @property
    def result(self) -> str:
        return "".join(self.output)


def unpair(s: int) -> Tuple[int, int]:
    """Inversa del emparejamiento de Cantor: s -> (i, t)."""
    w = (math.isqrt(8 * s + 1) - 1) // 2
    t = s - w * (w + 1) // 2
    return w - t, t


def pair(i: int, t: int) -> int:
    return (i + t) * (i + t + 1) // 2 + t


def program_at(index: int) -> BitString:
    """i-ésimo programa auto-delimitado (por longitud de cabecera, luego carga)."""
    k = (index + 1).bit_length() - 1
    offset = index - ((1 << k) - 1)
    payload = format(offset, f"0{k}b") if k else ""
    return BitString("1" * k + "0" + payload)


class InterpreterMachine(PrefixMachine):
    """Intérprete de pila auto-delimitado con enumeración por dovetailing.

    En la etapa s, con (i, t) = unpair(s), el programa i recibe su paso
    t+1. Los estados en curso se guardan, así cada etapa cuesta una
    instrucción y el orden es reproducible.
    """

    kind = MachineKind.INTERPRETER

    def __init__(self):
        super().__init__()
        self._running: Dict[int, Execution] = {}
        self._done: set = set()

    @property
    def machine_id(self) -> str:
        return "interpreter"

    def _advance(self, steps: int) -> None:
        for _ in range(steps):
            index, _ = unpair(self.stage)
            if index not in self._done:
                execution = self._running.get(index)
                if execution is None:
                    execution = Execution(decode_program(program_at(index)))
                    self._running[index] = execution
                if execution.step():
                    del self._running[index]
                    self._done.add(index)
                    self._record(program_at(index), execution.result)
            self.stage += 1

    def run(self, program: str, budget: int) -> Optional[str]:
        instructions = decode_program(program)
        if instructions is None:
            return None
        execution = Execution(instructions)
        while not execution.halted and execution.steps < budget:
            execution.step()
        return execution.result if execution.halted else None

    def candidate_programs(self, max_len: int) -> Iterator[str]:
        k = 0
        while 2 * k + 1 <= max_len:
            for offset in range(1 << k):
                yield "1" * k + "0" + (format(offset, f"0{k}b") if k else "")
            k += 1


class SyntheticMachine(PrefixMachine):
    """Dominio con count(n) programas de cada longitud n; toda salida es λ.

    Los programas se asignan de forma voraz sobre el trie binario: en cada
    profundidad se toman los primeros nodos libres (código canónico), así
    que el dominio queda descrito por bloques (longitud, inicio, cantidad)
    sin materializar los programas.
    """

    kind = MachineKind.SYNTHETIC

    def __init__(self, spec: SyntheticDomainSpec):
        super().__init__()
        self.spec = spec
        self.blocks: List[Tuple[int, int, int]] = []
        first_free = 0
        for length in range(spec.max_len + 1):
            available = (1 << length) - first_free
            count = spec.count(length)
            if count > available:
                logger.error(f"Especificación irrealizable en la longitud {length}")
                raise UnrealizableSpecError(length, count, available)
            if count:
                self.blocks.append((length, first_free, count))
            first_free = (first_free + count) << 1
        self._kraft = sum((Fraction(c, 1 << n) for n, _, c in self.blocks), Fraction(0))
        self.stage = sum(c for _, _, c in self.blocks)

    @property
    def machine_id(self) -> str:
        digest = hashlib.sha1(repr(sorted(self.spec.counts.items())).encode()).hexdigest()[:10]
        return f"synthetic:{digest}"

    @property
    def exhausted(self) -> bool:
        return True

    def _advance(self, steps: int) -> None:
        return None

    def halting_pairs(self) -> Iterator[HaltingPair]:
        for program in self.candidate_programs(self.spec.max_len):
            yield HaltingPair(program=program, output="", discovered_stage=0)

    def length_profile(self) -> Counter:
        return Counter({n: c for n, _, c in self.blocks})

    def run(self, program: str, budget: int) -> Optional[str]:
        n = len(program)
        code = int(program, 2) if program else 0
        for length, start, count in self.blocks:
            if length == n and start <= code < start + count:
                return ""
        return None

    def candidate_programs(self, max_len: int) -> Iterator[str]:
        for length, start, count in self.blocks:
            if length > max_len:
                break
            for code in range(start, start + count):
                yield format(code, f"0{length}b") if length else ""


def make_table_machine(pairs: Sequence[Tuple[str, str]]) -> TableMachine:
    """Máquina de tabla ya enumerada: cada entrada para al instante."""
    machine = TableMachine(pairs)
    machine.step_enumeration(len(machine.table))
    return machine


def step_enumeration(m: PrefixMachine, steps: int) -> PrefixMachine:
    return m.step_enumeration(steps)


def kraft_sum(m: PrefixMachine) -> Fraction:
    return m.kraft_sum()


def complexity_exact(m: PrefixMachine, x: str, cap: int, budget: int) -> ComplexityReport:
    """min{|p| : |p| ≤ cap, p para en ≤ budget pasos, m(p) = x}, o NOT-FOUND.

    Es una búsqueda acotada: el resultado es una cota superior certificada
    de H_M(x), nunca H(x).
    """
    if cap > settings.complexity_cap_limit:
        raise ValueError(f"cap {cap} supera el límite {settings.complexity_cap_limit}")
    target = BitString(x)
    for program in m.candidate_programs(cap):
        if m.run(program, budget) == target:
            return ComplexityReport(
                target=target, h_value=len(program), witness=program, search_cap=cap, budget=budget
            )
    return ComplexityReport(target=target, search_cap=cap, budget=budget)


def complexity_profile(
    m: PrefixMachine, X: BitSource, n_max: int, T: Fraction, cap: int, budget: int
) -> List[ComplexityProfileRow]:
    """Cotas superiores acotadas de H(X↾n) junto a T·n, para n = 0..n_max."""
    rows = []
    for n in range(n_max + 1):
        report = complexity_exact(m, X.prefix(n), cap, budget)
        rows.append(ComplexityProfileRow(n=n, h_upper=report.h_value, t_n=T * n))
    return rows


# Snapshots
def save_snapshot(m: PrefixMachine, path: Union[str, Path]) -> None:
    """Cabecera kind/stage y una línea programa<TAB>salida por par."""
    lines = [f"kind={m.kind.value}", f"stage={m.stage}"]
    if isinstance(m, SyntheticMachine):
        counts = ",".join(f"{n}:{c}" for n, c in sorted(m.spec.counts.items()) if c)
        lines.append(f"max_len={m.spec.max_len}")
        lines.append(f"counts={counts}")
    elif isinstance(m, TableMachine):
        lines.extend(f"{p}\t{o}" for p, o in m.table)
    else:
        lines.extend(f"{pair.program}\t{pair.output}" for pair in m.halting_pairs())
    Path(path).write_text("\n".join(lines) + "\n")
    logger.info(f"Snapshot guardado en {path} ({m.machine_id}, etapa {m.stage})")


def parse_counts(text: str) -> Dict[int, int]:
    counts: Dict[int, int] = {}
    for item in filter(None, (part.strip() for part in text.split(","))):
        length, _, count = item.partition(":")
        counts[int(length)] = int(count)
    return counts


def load_snapshot(path: Union[str, Path]) -> PrefixMachine:
    """Reconstruye la máquina; el intérprete se re-ejecuta hasta la etapa guardada."""
    try:
        text = Path(path).read_text()
    except OSError:
        logger.error(f"No se pudo leer el snapshot {path}")
        raise
    header: Dict[str, str] = {}
    pairs: List[Tuple[str, str]] = []
    for raw in text.splitlines():
        if "\t" in raw:
            program, _, output = raw.partition("\t")
            pairs.append((program, output))
        elif "=" in raw:
            key, _, value = raw.partition("=")
            header[key.strip()] = value.strip()
        elif raw.strip():
            raise SnapshotError(f"línea inválida: {raw!r}")
    try:
        kind = MachineKind(header["kind"])
        stage = int(header["stage"])
    except (KeyError, ValueError) as e:
        raise SnapshotError(f"cabecera incompleta o inválida: {e}") from e

    if kind is MachineKind.SYNTHETIC:
        spec = SyntheticDomainSpec(
            counts=parse_counts(header.get("counts", "")), max_len=int(header.get("max_len", 0))
        )
        return SyntheticMachine(spec)
    if kind is MachineKind.TABLE:
        machine = TableMachine(pairs)
        return machine.step_enumeration(stage)

    machine = InterpreterMachine().step_enumeration(stage)
    replayed = [(p.program, p.output) for p in machine.halting_pairs()]
    if replayed != pairs:
        raise SnapshotError("el snapshot no coincide con la re-ejecución determinista")
    return machine
