"""Lectura de especificaciones de máquina, secuencia y predictor para el CLI."""
import io
from pathlib import Path
from typing import Dict, Optional, Tuple

from dotenv import dotenv_values
from pydantic import ValidationError

from models.bits import BitString
from models.schemas import SyntheticDomainSpec
from services.machine_service import (
    InterpreterMachine,
    MachineKind,
    PrefixMachine,
    make_table_machine,
    parse_counts,
)
from services.partition_service import COUNT_RULES, build_synthetic_domain
from services.prediction_service import PredictorFAO, TotalPredictor, constant_predictor
from services.sequence_service import BitSource, PeriodicSource, RationalSource, fractional_part
from utils.errors import SpecError
from utils.logger import get_logger

logger = get_logger(__name__)


def read_key_values(source: str) -> Dict[str, str]:
    """Archivo clave=valor, o el mismo formato en línea separado por ';'."""
    path = Path(source)
    if path.is_file():
        values = dotenv_values(path)
    else:
        values = dotenv_values(stream=io.StringIO(source.replace(";", "\n")))
    return {k.strip().lower(): (v or "").strip() for k, v in values.items()}


def parse_table_pairs(text: str) -> Tuple[Tuple[str, str], ...]:
    """'1:,01:1' -> (('1', ''), ('01', '1')); λ vale como cadena vacía."""
    pairs = []
    for item in filter(None, (part.strip() for part in text.split(","))):
        program, sep, output = item.partition(":")
        if not sep:
            raise SpecError(f"par sin ':' en la tabla: {item!r}")
        try:
            pairs.append((BitString(program), BitString(output)))
        except ValueError as e:
            raise SpecError(str(e)) from e
    return tuple(pairs)


def parse_machine_spec(source: str) -> PrefixMachine:
    """Construye la máquina descrita por ``kind=...`` y sus parámetros.

    kind=table        pairs=1:,01:1
    kind=interpreter
    kind=synthetic    rule=inverse-square max_len=30  (o counts=1:1,3:2 max_len=3)
    """
    values = read_key_values(source)
    try:
        kind = MachineKind(values.get("kind", ""))
    except ValueError as e:
        raise SpecError(f"kind de máquina desconocido: {values.get('kind')!r}") from e

    if kind is MachineKind.TABLE:
        return make_table_machine(parse_table_pairs(values.get("pairs", "")))
    if kind is MachineKind.INTERPRETER:
        return InterpreterMachine()

    try:
        max_len = int(values.get("max_len", ""))
        if "rule" in values:
            rule = COUNT_RULES.get(values["rule"])
            if rule is None:
                raise SpecError(f"regla desconocida: {values['rule']!r}")
            spec = SyntheticDomainSpec.from_rule(rule, max_len, int(values.get("min_len", "1")))
        else:
            spec = SyntheticDomainSpec(counts=parse_counts(values.get("counts", "")), max_len=max_len)
    except (ValueError, ValidationError) as e:
        raise SpecError(f"dominio sintético inválido: {e}") from e
    return build_synthetic_domain(spec)


def parse_sequence_spec(text: str) -> BitSource:
    """periodic:[cabeza|]periodo, rational:n/d, zeros, ones."""
    kind, _, body = text.strip().partition(":")
    try:
        if kind == "zeros":
            return PeriodicSource("0")
        if kind == "ones":
            return PeriodicSource("1")
        if kind == "periodic":
            head, sep, period = body.rpartition("|")
            return PeriodicSource(period, prefix=head if sep else "")
        if kind == "rational":
            return RationalSource(fractional_part(body))
    except (ValueError, ZeroDivisionError) as e:
        raise SpecError(f"secuencia inválida {text!r}: {e}") from e
    raise SpecError(f"tipo de secuencia desconocido: {text!r}")


def parse_predictor_spec(text: str) -> TotalPredictor:
    """always:0|1|N o fao:<ruta a la tabla del autómata>."""
    kind, _, body = text.strip().partition(":")
    if kind == "always":
        try:
            return constant_predictor(body)
        except ValueError as e:
            raise SpecError(f"predicción constante inválida: {body!r}") from e
    if kind == "fao":
        path = Path(body)
        fao = PredictorFAO.from_text(path.read_text(), name=f"fao:{path.name}")
        return fao.as_total_predictor()
    raise SpecError(f"tipo de predictor desconocido: {text!r}")


def load_config_file(path: Optional[str]) -> Dict[str, str]:
    """Claves del archivo --config normalizadas a los nombres de RunConfig."""
    if not path:
        return {}
    if not Path(path).is_file():
        raise FileNotFoundError(f"no existe el archivo de configuración {path}")
    values = {}
    for key, value in dotenv_values(path).items():
        key = key.strip().lower().replace("-", "_")
        values["L" if key == "l" else key] = (value or "").strip()
    logger.debug(f"Configuración leída de {path}: {sorted(values)}")
    return values
