"""Script que exhibe la transición de fase de Z(T) sobre el dominio sintético ⌊2^n/(2n²)⌋."""
import asyncio
import sys
from fractions import Fraction
from pathlib import Path
from typing import List

# Agregar el directorio raíz al path
sys.path.append(str(Path(__file__).parent.parent))

from config import get_settings
from models.schemas import PhaseRow, SyntheticDomainSpec
from services.interval_service import truncate_decimal
from services.partition_service import build_synthetic_domain, inverse_square_rule, phase_table_parallel
from utils.errors import UnrealizableSpecError
from utils.logger import get_logger

settings = get_settings()
logger = get_logger(__name__)

TEMPERATURES = [Fraction(1, 2), Fraction(3, 4), Fraction(1), Fraction(3, 2), Fraction(2)]


async def exhibit(max_len: int = 30) -> List[PhaseRow]:
    """Calcula la tabla de fases del dominio sintético hasta max_len."""
    logger.info(f"Construyendo dominio sintético hasta longitud {max_len}")
    try:
        machine = build_synthetic_domain(SyntheticDomainSpec.from_rule(inverse_square_rule, max_len))
    except UnrealizableSpecError as e:
        logger.error(f"❌ Dominio irrealizable: {e.detail}")
        raise

    rows = await phase_table_parallel(machine, TEMPERATURES, settings.default_precision_bits)
    logger.info(f"✅ {len(rows)} temperaturas evaluadas sobre {machine.stage} programas")
    return rows


def main():
    """Función principal del script."""
    max_len = int(sys.argv[1]) if len(sys.argv) > 1 else 30
    rows = asyncio.run(exhibit(max_len))

    print(f"\n📈 Z(T) parcial, longitudes ≤ {max_len}")
    for row in rows:
        marker = "converge" if row.T <= 1 else "crece sin cota"
        print(f"   T={row.T}: [{truncate_decimal(row.lo, 6)}, {truncate_decimal(row.hi, 6)}]  ({marker})")


if __name__ == "__main__":
    main()
