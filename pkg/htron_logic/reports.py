import csv
import dataclasses
import io
import logging
import math
import pathlib
import sys
import typing

from htron_logic import textio
from htron_logic.device.models import Phase
from htron_logic.gates import BiasWindow, TruthRow
from htron_logic.margins import MarginReport
from htron_logic.simulator import Trace
from htron_logic.synth.full_adder import BenchRow
from htron_logic.synth.mapper import MappedCircuit

logger = logging.getLogger(__name__)

PathLike = typing.Union[str, pathlib.Path]


@dataclasses.dataclass(frozen=True)
class TruthOut:
    inputs: str
    output: int


@dataclasses.dataclass(frozen=True)
class WindowOut:
    kind: str
    lo: float
    hi: float
    lo_closed: bool
    hi_closed: bool


@dataclasses.dataclass(frozen=True)
class MarginOut:
    kind: str
    i_b1_uA: float
    combo: str
    error_rate: float
    worst_margin_uA: float
    trials: int
    seed: int


@dataclasses.dataclass(frozen=True)
class SynthOut:
    basis: str
    levels: int
    gate_count: int


def _cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return textio.format_number(value)
    return str(value)


class Report:
    """Writes rows of one dataclass as CSV, to a file atomically or to stdout."""

    def __init__(self, row_type: type):
        self._field_names = [f.name for f in dataclasses.fields(row_type)]

    def render(self, rows: typing.Iterable) -> str:
        buffer = io.StringIO()
        writer = csv.DictWriter(buffer, self._field_names, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _cell(v) for k, v in dataclasses.asdict(row).items()})
        return buffer.getvalue()

    def write(self, rows: typing.Iterable, out: typing.Optional[PathLike] = None) -> str:
        text = self.render(rows)
        emit(text, out)
        return text


def emit(text: str, out: typing.Optional[PathLike] = None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    textio.write_text(out, text)
    logger.info("Wrote '%s'.", out)


def truth_rows(rows: typing.Iterable[TruthRow]) -> list[TruthOut]:
    return [TruthOut(inputs=r.bits, output=r.output) for r in rows]


def window_rows(window: BiasWindow) -> list[WindowOut]:
    return [
        WindowOut(window.kind.value, i.lo, i.hi, i.lo_closed, i.hi_closed)
        for i in window.intervals
    ]


def margin_rows(report: MarginReport) -> list[MarginOut]:
    return [
        MarginOut(
            kind=report.kind.value,
            i_b1_uA=report.i_b1,
            combo=combo.bits,
            error_rate=combo.error_rate,
            worst_margin_uA=report.worst_case_margin,
            trials=report.trials,
            seed=report.seed,
        )
        for combo in report.combos
    ]


def synth_rows(circuit: MappedCircuit) -> list[SynthOut]:
    return [SynthOut(circuit.basis.value, circuit.levels, circuit.gate_count)]


def write_truth(rows, out=None) -> str:
    return Report(TruthOut).write(truth_rows(rows), out)


def write_window(window: BiasWindow, out=None) -> str:
    return Report(WindowOut).write(window_rows(window), out)


def write_margins(report: MarginReport, out=None) -> str:
    return Report(MarginOut).write(margin_rows(report), out)


def write_synth(circuit: MappedCircuit, out=None) -> str:
    return Report(SynthOut).write(synth_rows(circuit), out)


def write_bench(rows: typing.Iterable[BenchRow], out=None) -> str:
    return Report(BenchRow).write(rows, out)


def render_trace(trace: Trace) -> str:
    """One row per sample: time, net currents, then gate phases and load voltages."""
    nets = list(trace.currents)
    gates = list(trace.states)
    header = ["t_ns"] + [f"{n}.i_uA" for n in nets]
    for gate in gates:
        header += [f"{gate}.state", f"{gate}.v_mV"]

    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for k, t in enumerate(trace.times):
        row = [_cell(round(float(t) * 1e9, 6))]
        row += [_cell(round(float(trace.currents[n][k]), 6)) for n in nets]
        for gate in gates:
            row.append(Phase(int(trace.states[gate][k])).name)
            row.append(_cell(round(float(trace.v_load[gate][k]), 6)))
        writer.writerow(row)
    return buffer.getvalue()


def write_trace(trace: Trace, out=None) -> str:
    text = render_trace(trace)
    emit(text, out)
    return text
