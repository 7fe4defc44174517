"""Punto de entrada del CLI del toolkit de predictibilidad fuerte."""
import argparse
import sys
from typing import Any, Dict, List, Optional

from pydantic import ValidationError

from cli.commands import COMMANDS, EXIT_ERROR
from cli.specs import load_config_file
from config import get_settings
from models.schemas import Command, RunConfig
from utils.errors import ToolkitError
from utils.logger import get_logger

settings = get_settings()
logger = get_logger(__name__)

# Flags compartidos: (nombre, tipo, ayuda)
FLAGS = [
    ("--machine", str, "Archivo clave=valor de la máquina, o 'kind=...;...' en línea"),
    ("--snapshot", str, "Snapshot de máquina generado por machine-enum"),
    ("--temps", str, "Temperaturas racionales separadas por comas, p. ej. 1/2,1"),
    ("--steps", int, "Etapas de enumeración a avanzar"),
    ("--horizon", int, "Cantidad de posiciones a revisar"),
    ("--precision-bits", int, "Precisión k: ancho total ≤ 2^-k"),
    ("--sequence", str, "periodic:[cabeza|]periodo, rational:n/d, zeros u ones"),
    ("--predictor", str, "always:0|1|N o fao:<ruta>"),
    ("--m", int, "Parámetro m del autómata de rachas"),
    ("--L", int, "Parámetro L del autómata de rachas"),
    ("--tail-fraction", str, "Fracción de cola para --estimate"),
    ("--threshold", str, "Umbral de capital para REACHED/NOT-REACHED"),
    ("--target", str, "Cadena objetivo para complexity"),
    ("--cap", int, "Longitud máxima de programa en la búsqueda acotada"),
    ("--budget", int, "Pasos máximos por programa"),
    ("--places", int, "Decimales truncados adicionales en el CSV"),
    ("--out", str, "Archivo de salida (por defecto stdout)"),
]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=settings.project_name.lower().replace(" ", "-"),
        description="Máquinas libres de prefijos, Z(T), martingalas y predictores fuertes.",
    )
    parser.add_argument("--version", action="version", version=settings.version)
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in Command:
        sub = subparsers.add_parser(command.value)
        sub.add_argument("--config", type=str, help="Archivo clave=valor con valores por defecto")
        for flag, kind, help_text in FLAGS:
            sub.add_argument(flag, type=kind, default=None, help=help_text)
        sub.add_argument("--estimate", action="store_true", default=None, help="Estimar (m, L) sobre una muestra")
    return parser


def build_config(args: argparse.Namespace) -> RunConfig:
    """Valores del archivo --config pisados por los flags explícitos."""
    values: Dict[str, Any] = {
        "precision_bits": settings.default_precision_bits,
        "budget": settings.default_budget,
        "tail_fraction": settings.default_tail_fraction,
    }
    values.update(load_config_file(args.config))
    flags = {k: v for k, v in vars(args).items() if k != "config" and v is not None}
    values.update(flags)
    values = {k: v for k, v in values.items() if v != ""}
    return RunConfig(**values)


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = build_config(args)
        logger.info(f"Ejecutando {config.command.value}")
        return COMMANDS[config.command](config, sys.stdout)
    except ValidationError as e:
        first = e.errors()[0]
        message = first.get("msg", str(e))
        logger.error(f"Configuración inválida: {message}")
        sys.stderr.write(f"error: {message}\n")
    except (ToolkitError, ValueError, OSError) as e:
        logger.error(f"{type(e).__name__}: {e}")
        sys.stderr.write(f"error: {e}\n")
    return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
