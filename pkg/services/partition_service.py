"""Sumas parciales certificadas de Z(T) y la tabla de la transición de fase."""
import asyncio
import csv
import io
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence

from models.intervals import RationalInterval, RationalLike, format_rational, to_rational
from models.schemas import PartitionApprox, PhaseRow, SyntheticDomainSpec
from services.interval_service import (
    ZERO_INTERVAL,
    ceil_log2,
    interval_add,
    interval_scale,
    pow2_neg,
    truncate_decimal,
)
from services.machine_service import PrefixMachine, SyntheticMachine
from services.sequence_service import EnumerationSource
from utils.logger import get_logger, log_with_extra

logger = get_logger(__name__)

PHASE_HEADER = ["T", "stage", "terms", "lo", "hi"]


def inverse_square_rule(n: int) -> int:
    """⌊2^n / (2n²)⌋: Kraft < π²/12 pero Σ diverge para T > 1."""
    return (1 << n) // (2 * n * n)


COUNT_RULES: Dict[str, Callable[[int], int]] = {
    "inverse-square": inverse_square_rule,
}


def z_approx(m: PrefixMachine, T: RationalLike, k: int) -> PartitionApprox:
    """Σ 2^{-|p|/T} sobre los programas enumerados, con ancho total ≤ 2^-k.

    Cada término usa precisión k' = k + ⌈log2(terms)⌉ + 1. Los programas se
    agrupan por longitud, lo que no cambia la cota de ancho. Para T ≤ 1 el
    extremo superior se recorta a la suma de Kraft, porque 2^{-ℓ/T} ≤ 2^{-ℓ}.
    """
    T = to_rational(T)
    if T <= 0:
        raise ValueError("T debe ser positivo")
    profile = m.length_profile()
    terms = sum(profile.values())
    if terms == 0:
        return PartitionApprox(machine_id=m.machine_id, T=T, stage=m.stage, value=ZERO_INTERVAL, terms=0)

    per_term = k + ceil_log2(terms) + 1
    value = ZERO_INTERVAL
    for length in sorted(profile):
        value = interval_add(value, interval_scale(pow2_neg(length, T, per_term), profile[length]))

    if T <= 1 and value.hi > m.kraft_sum():
        value = RationalInterval(value.lo, m.kraft_sum())
    return PartitionApprox(machine_id=m.machine_id, T=T, stage=m.stage, value=value, terms=terms)


def build_synthetic_domain(spec: SyntheticDomainSpec) -> SyntheticMachine:
    """Máquina sintética con exactamente spec.count(n) programas de cada longitud."""
    machine = SyntheticMachine(spec)
    log_with_extra(
        logger, "info", "Dominio sintético construido",
        machine=machine.machine_id, programs=machine.stage, kraft=f"{machine.kraft_sum()}",
    )
    return machine


def _phase_row(m: PrefixMachine, T: Fraction, k: int) -> PhaseRow:
    approx = z_approx(m, T, k)
    return PhaseRow(T=approx.T, stage=approx.stage, terms=approx.terms, lo=approx.value.lo, hi=approx.value.hi)


def _validate_temps(temps: Sequence[RationalLike]) -> List[Fraction]:
    parsed = [to_rational(t) for t in temps]
    if not parsed:
        raise ValueError("se necesita al menos una temperatura")
    if any(t <= 0 for t in parsed):
        raise ValueError("todas las temperaturas deben ser positivas")
    return parsed


def phase_table(m: PrefixMachine, temps: Sequence[RationalLike], k: int) -> List[PhaseRow]:
    """Una fila por temperatura, todas sobre la misma instantánea de la máquina."""
    rows = [_phase_row(m, T, k) for T in _validate_temps(temps)]
    logger.info(f"Tabla de fases calculada: {len(rows)} temperaturas sobre {m.machine_id}")
    return rows


async def phase_table_parallel(m: PrefixMachine, temps: Sequence[RationalLike], k: int) -> List[PhaseRow]:
    """Igual que phase_table, evaluando cada temperatura en el executor.

    gather() conserva el orden de entrada, así que la salida es determinista.
    """
    parsed = _validate_temps(temps)
    loop = asyncio.get_running_loop()
    tasks = [loop.run_in_executor(None, _phase_row, m, T, k) for T in parsed]
    rows = await asyncio.gather(*tasks)
    logger.info(f"Tabla de fases (paralela) calculada: {len(rows)} temperaturas")
    return list(rows)


def phase_table_csv(rows: Sequence[PhaseRow], places: Optional[int] = None) -> str:
    """CSV 'T,stage,terms,lo,hi' con racionales num/den y, opcionalmente, decimales truncados."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    header = list(PHASE_HEADER)
    if places is not None:
        header += ["lo_decimal", "hi_decimal"]
    writer.writerow(header)
    for row in rows:
        record = [format_rational(row.T), row.stage, row.terms, format_rational(row.lo), format_rational(row.hi)]
        if places is not None:
            record += [truncate_decimal(row.lo, places), truncate_decimal(row.hi, places)]
        writer.writerow(record)
    return buffer.getvalue()


def z_upper_bound(m: PrefixMachine, approx: PartitionApprox) -> Optional[Fraction]:
    """Cota superior certificada de la Z(T) verdadera, si existe.

    Con el dominio agotado basta value.hi. Con T ≤ 1 la masa no enumerada
    es ≤ 1 - kraft_sum y cada término pendiente es ≤ 2^{-ℓ}.
    """
    if m.exhausted:
        return approx.value.hi
    if approx.T <= 1:
        return approx.value.hi + (1 - m.kraft_sum())
    return None


def z_digits(m: PrefixMachine, T: RationalLike) -> EnumerationSource:
    """Dígitos de Z(T) expuestos sólo cuando están certificados."""
    T = to_rational(T)

    def approximate(k: int) -> RationalInterval:
        approx = z_approx(m, T, k)
        upper = z_upper_bound(m, approx)
        if upper is None:
            # sin cota superior no hay dígitos estables
            return RationalInterval(approx.value.lo, approx.value.lo + 1)
        return RationalInterval(approx.value.lo, upper)

    return EnumerationSource(approximate, label=f"Z({format_rational(T)}) de {m.machine_id}")
