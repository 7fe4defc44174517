"""Subcomandos del CLI: cada uno recibe un RunConfig validado y devuelve el código de salida."""
import asyncio
import csv
import io
import math
import sys
from fractions import Fraction
from pathlib import Path
from typing import Callable, Dict, Optional, TextIO

from config import get_settings
from cli.specs import parse_machine_spec, parse_predictor_spec, parse_sequence_spec
from models.intervals import format_rational, to_rational
from models.schemas import Command, RunConfig
from services.machine_service import (
    PrefixMachine,
    complexity_exact,
    complexity_profile,
    load_snapshot,
    save_snapshot,
)
from services.martingale_service import capital_csv, run_capital, succeeds_empirically
from services.partition_service import phase_table, phase_table_csv, phase_table_parallel
from services.prediction_service import (
    Predictor,
    check_predictability,
    compile_martingale_total,
    constant_predictor,
    estimate_runlength_params,
    report_csv,
    report_text,
    synth_runlength_fao,
)
from services.sequence_service import BitSource
from utils.logger import get_logger, log_with_extra

settings = get_settings()
logger = get_logger(__name__)

EXIT_OK = 0
EXIT_MISPREDICTIONS = 1
EXIT_ERROR = 2


def _emit(text: str, out: Optional[str], stream: TextIO) -> None:
    if out:
        Path(out).write_text(text)
        logger.info(f"Salida escrita en {out}")
    else:
        stream.write(text)


def _machine(config: RunConfig) -> PrefixMachine:
    machine = load_snapshot(config.snapshot) if config.snapshot else parse_machine_spec(config.machine)
    return machine.step_enumeration(config.steps)


def _predictor(config: RunConfig, X: BitSource, stream: TextIO) -> Predictor:
    """Predictor explícito, sintetizado con (m, L) o estimado sobre una muestra."""
    if config.predictor:
        return parse_predictor_spec(config.predictor)
    if config.m is not None:
        return synth_runlength_fao(config.m, config.L).as_total_predictor()

    sample_size = math.ceil(to_rational(settings.estimate_sample_fraction) * config.horizon)
    params = estimate_runlength_params(X.prefix(sample_size), config.tail_fraction)
    if params is None:
        stream.write(f"estimate: NO-ZEROS en los primeros {sample_size} bits\n")
        return constant_predictor("N")
    stream.write(f"estimate: m={params.m} L={params.L} (muestra de {sample_size} bits)\n")
    return synth_runlength_fao(params.m, params.L).as_total_predictor()


def cmd_machine_enum(config: RunConfig, stream: Optional[TextIO] = None) -> int:
    """Avanza la enumeración, guarda el snapshot y resume el estado."""
    stream = stream or sys.stdout
    machine = _machine(config)
    if config.out:
        save_snapshot(machine, config.out)
    stream.write(
        f"machine={machine.machine_id} stage={machine.stage} "
        f"terms={machine.enumerated_count} kraft={format_rational(machine.kraft_sum())}\n"
    )
    return EXIT_OK


def cmd_phase_table(config: RunConfig, stream: Optional[TextIO] = None) -> int:
    stream = stream or sys.stdout
    machine = _machine(config)
    if settings.parallel_temperatures and len(config.temps) > 1:
        rows = asyncio.run(phase_table_parallel(machine, config.temps, config.precision_bits))
    else:
        rows = phase_table(machine, config.temps, config.precision_bits)
    _emit(phase_table_csv(rows, config.places), config.out, stream)
    return EXIT_OK


def cmd_predict(config: RunConfig, stream: Optional[TextIO] = None) -> int:
    """Reporte de predictibilidad; código 1 si hubo algún error de predicción."""
    stream = stream or sys.stdout
    X = parse_sequence_spec(config.sequence)
    predictor = _predictor(config, X, stream)
    report = check_predictability(predictor, X, config.horizon)
    stream.write(report_text(report, f"{predictor.name} sobre {X.describe()}"))
    if config.out:
        _emit(report_csv(report), config.out, stream)
    else:
        stream.write(report_csv(report))
    log_with_extra(
        logger, "info", "Predicción evaluada",
        predictor=predictor.name, horizon=config.horizon, errors=len(report.mispredictions),
    )
    return EXIT_OK if not report.mispredictions else EXIT_MISPREDICTIONS


def cmd_martingale(config: RunConfig, stream: Optional[TextIO] = None) -> int:
    """Trayectoria del capital de la martingala compilada a partir del predictor."""
    stream = stream or sys.stdout
    X = parse_sequence_spec(config.sequence)
    martingale = compile_martingale_total(_predictor(config, X, sys.stderr))
    trace = run_capital(martingale, X, config.horizon)
    _emit(capital_csv(trace), config.out, stream)
    if config.threshold is not None:
        observation = succeeds_empirically(martingale, X, config.threshold, config.horizon)
        verdict = f"REACHED({observation.position})" if observation.reached else "NOT-REACHED"
        sys.stderr.write(f"threshold={format_rational(config.threshold)} {verdict}\n")
    return EXIT_OK


def cmd_complexity(config: RunConfig, stream: Optional[TextIO] = None) -> int:
    """Cota superior acotada de H_M: para un objetivo o para los prefijos de una secuencia."""
    stream = stream or sys.stdout
    machine = _machine(config)
    if config.target is not None:
        report = complexity_exact(machine, config.target, config.cap, config.budget)
        h_value = report.h_value if report.found else "NOT-FOUND"
        witness = report.witness if report.found else ""
        stream.write(f"target={report.target or 'λ'} h_upper={h_value} witness={witness}\n")
        return EXIT_OK

    X = parse_sequence_spec(config.sequence)
    T = config.temps[0] if config.temps else Fraction(1)
    rows = complexity_profile(machine, X, config.horizon or 0, T, config.cap, config.budget)
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["n", "h_upper", "t_n"])
    for row in rows:
        writer.writerow([row.n, "NOT-FOUND" if row.h_upper is None else row.h_upper, format_rational(row.t_n)])
    _emit(buffer.getvalue(), config.out, stream)
    return EXIT_OK


COMMANDS: Dict[Command, Callable[[RunConfig, TextIO], int]] = {
    Command.MACHINE_ENUM: cmd_machine_enum,
    Command.PHASE_TABLE: cmd_phase_table,
    Command.PREDICT: cmd_predict,
    Command.MARTINGALE: cmd_martingale,
    Command.COMPLEXITY: cmd_complexity,
}
