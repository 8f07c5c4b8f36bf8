"""Command line front end.

    python -m htron_logic truth --gate AND2
    python -m htron_logic window --gate NOT --step 1 --explain
    python -m htron_logic sim adder.hnl --stimulus pulses.csv --dt 50ps --out trace.csv
    python -m htron_logic fa-bench

Exit status is 0 on success, 1 when the inputs are well formed but the answer is
negative (empty window, failed equivalence, reset violation under --strict, different
camouflage views) and 2 for usage, configuration, parse and file errors.
"""

import argparse
import logging
import pathlib
import re
import sys
import typing

import numpy as np

from htron_logic import reports, settings, simulator
from htron_logic.device import csv_io
from htron_logic.device.htron import calibrate_from_measurements
from htron_logic.device.models import Spread, SwitchingSampleSet
from htron_logic.errors import DOMAIN_ERRORS, HtronError, NoFeasibleBiasError
from htron_logic.gates import (
    NOT_BIAS_NOTE,
    BiasConfig,
    GateKind,
    bias_for,
    bias_window,
    truth_table,
)
from htron_logic.margins import DEFAULT_TRIALS, monte_carlo_margin, robust_bias
from htron_logic.netlist import camouflage, hnl
from htron_logic.netlist.splitters import insert_splitters
from htron_logic.synth.expr import parse_expression
from htron_logic.synth.full_adder import benchmark
from htron_logic.synth.mapper import Basis, map_expression
from htron_logic.synth.verify import verify_equivalence

logger = logging.getLogger(__name__)

PROG = "htron-logic"

_time_pattern = re.compile(r"\s*(?P<value>[-+0-9.eE]+)\s*(?P<unit>fs|ps|ns|us|μs|ms|s)\s*")
_PER_SECOND = {"fs": 1e15, "ps": 1e12, "ns": 1e9, "us": 1e6, "μs": 1e6, "ms": 1e3, "s": 1.0}

# gate points of the zero-spread sample set built from a calibration table
_SYNTHETIC_SAMPLE_POINTS = np.arange(0.0, 400.5, 0.5)


class _DomainFailure(Exception):
    """A negative but well-formed answer; exit status 1."""


def parse_time(text: str) -> float:
    """'50ps' -> 5e-11 seconds. A unit is required."""
    match = _time_pattern.fullmatch(text)
    if not match:
        raise argparse.ArgumentTypeError(f"'{text}' needs a time unit, e.g. 50ps or 40ns")
    try:
        value = float(match.group("value"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"'{text}' is not a time") from None
    if not value > 0:
        raise argparse.ArgumentTypeError(f"'{text}' must be positive")
    return value / _PER_SECOND[match.group("unit")]


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"'{text}' is not an integer") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"'{text}' must be at least 1")
    return value


def _gate_kind(text: str) -> GateKind:
    try:
        return GateKind.parse(text)
    except HtronError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def _basis(text: str) -> Basis:
    try:
        return Basis.parse(text)
    except HtronError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def _spread(text: str) -> Spread:
    try:
        return Spread.parse(text)
    except HtronError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=PROG, description="Reconfigurable hTron logic: gates, netlists and synthesis."
    )
    parser.add_argument("--config", type=pathlib.Path, help="INI configuration file")
    parser.add_argument("--log-level", help="logging level, e.g. DEBUG or WARNING")
    commands = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name: str, help_text: str) -> argparse.ArgumentParser:
        sub = commands.add_parser(name, help=help_text, description=help_text)
        sub.add_argument("--out", type=pathlib.Path, help="output file (default: stdout)")
        return sub

    def add_calibration(sub):
        sub.add_argument("--calib", type=pathlib.Path, help="calibration CSV (i_gate_uA,i_ch_crit_uA)")

    def add_gate(sub):
        sub.add_argument("--gate", type=_gate_kind, required=True, help="COPY, NOT, AND2, OR2 or MAJ3")
        sub.add_argument("--ib2", type=float, default=None, help="channel bias in μA (default 55)")
        sub.add_argument("--explain", action="store_true", help="print interpretation notes")

    sim = add("sim", "Transient simulation of a netlist.")
    sim.add_argument("netlist", type=pathlib.Path)
    sim.add_argument("--stimulus", type=pathlib.Path, required=True, help="stimulus CSV")
    sim.add_argument("--dt", type=parse_time, help="timestep, e.g. 50ps")
    sim.add_argument("--t-end", type=parse_time, help="end time, e.g. 40ns")
    sim.add_argument("--strict", action="store_true", help="fail on reset violations")
    sim.add_argument("--auto-split", action="store_true", help="insert COPY splitters for fanout")
    add_calibration(sim)

    truth = add("truth", "Steady-state truth table of one biased gate.")
    add_gate(truth)
    truth.add_argument("--bias", type=float, help="gate bias I_B1 in μA (default: nominal)")
    add_calibration(truth)

    window = add("window", "Range of gate bias I_B1 that realizes a gate.")
    add_gate(window)
    window.add_argument("--lo", type=float, default=-200.0, help="sweep start in μA")
    window.add_argument("--hi", type=float, default=200.0, help="sweep end in μA")
    window.add_argument("--step", type=float, default=1.0, help="sweep step in μA")
    add_calibration(window)

    synth = add("synth", "Map a Boolean expression onto a gate basis (.hnl output).")
    synth.add_argument("expression", help="prefix expression, e.g. 'maj(a, not(b), c)'")
    synth.add_argument("--basis", type=_basis, default=Basis.HTRON)
    synth.add_argument("--name", help="netlist name")
    synth.add_argument("--report", action="store_true", help="print basis,levels,gate_count")
    add_calibration(synth)

    add("fa-bench", "Compare one-bit full adders in the MAJ_NOT, NAND2 and NOR2 bases.")

    margins = add("margins", "Monte Carlo error rates of a gate bias point.")
    add_gate(margins)
    margins.add_argument("--bias", type=float, help="gate bias I_B1 in μA (default: nominal)")
    margins.add_argument("--robust", action="store_true", help="use the most robust bias instead")
    margins.add_argument("--samples", type=pathlib.Path, help="raw samples CSV (i_gate_uA,sample_uA)")
    margins.add_argument("--spread", type=_spread, help="parametric spread, e.g. uniform:5")
    margins.add_argument("--trials", type=_positive_int, default=DEFAULT_TRIALS)
    margins.add_argument("--seed", type=int, default=0)
    margins.add_argument("--workers", type=_positive_int, default=1)
    margins.add_argument("--step", type=float, default=0.5, help="robust bias grid step in μA")
    add_calibration(margins)

    camo = add("camo", "Camouflage view of a netlist, or compare two.")
    camo.add_argument("netlist", type=pathlib.Path)
    camo.add_argument("other", type=pathlib.Path, nargs="?")

    calibrate = add("calibrate", "Median calibration table from raw switching samples.")
    calibrate.add_argument("--samples", type=pathlib.Path, required=True)

    return parser


def _table(args, config: settings.ToolConfig):
    if getattr(args, "calib", None) is not None:
        return csv_io.read_calibration_csv(args.calib)
    return config.require_table()


def _explain(args) -> None:
    if getattr(args, "explain", False) and args.gate is GateKind.NOT:
        print(NOT_BIAS_NOTE, file=sys.stderr)


def _bias(args) -> BiasConfig:
    nominal = bias_for(args.gate) if args.ib2 is None else bias_for(args.gate, i_b2=args.ib2)
    if getattr(args, "bias", None) is None:
        return nominal
    return BiasConfig(args.gate, args.bias, nominal.i_b2, nominal.r_load)


def _cmd_sim(args, config: settings.ToolConfig) -> None:
    table = _table(args, config)
    fanout = config.splitter_fanout
    netlist = hnl.read_file(args.netlist, allow_fanout=args.auto_split, splitter_fanout=fanout)
    if args.auto_split:
        netlist = insert_splitters(netlist, splitter_fanout=fanout)
    stimulus = simulator.read_stimulus_csv(args.stimulus)
    sim_config = simulator.SimConfig(
        dt=args.dt or config.dt,
        t_end=args.t_end,
        params=config.params,
        enc=config.enc,
        strict=args.strict,
    )
    trace = simulator.simulate(netlist, stimulus, table, sim_config)
    reports.write_trace(trace, args.out)
    if trace.violations:
        logger.warning("%d reset violation(s) during the run.", len(trace.violations))


def _cmd_truth(args, config: settings.ToolConfig) -> None:
    _explain(args)
    rows = truth_table(args.gate, _bias(args), _table(args, config), config.enc)
    reports.write_truth(rows, args.out)


def _cmd_window(args, config: settings.ToolConfig) -> None:
    _explain(args)
    i_b2 = _bias(args).i_b2
    window = bias_window(
        args.gate, _table(args, config), config.enc, (args.lo, args.hi, args.step), i_b2
    )
    reports.write_window(window, args.out)
    if window.is_empty:
        raise NoFeasibleBiasError(f"{args.gate.value} has no bias window in the sweep.")
    logger.info("%s", window)


def _cmd_synth(args, config: settings.ToolConfig) -> None:
    expr = parse_expression(args.expression)
    circuit = map_expression(
        expr, args.basis, name=args.name, splitter_fanout=config.splitter_fanout
    )
    table = csv_io.read_calibration_csv(args.calib) if args.calib else config.table
    if table is not None:
        result = verify_equivalence(circuit.netlist, expr, table, config.enc, params=config.params)
        if not result:
            raise _DomainFailure(
                f"hTron netlist differs from {expr} at input vector {result.vector}."
            )
    else:
        logger.info("No calibration configured; hTron netlist not simulated.")

    reports.emit(hnl.serialize(circuit.netlist), args.out)
    if args.report:
        reports.write_synth(circuit)


def _cmd_fa_bench(args, config: settings.ToolConfig) -> None:
    reports.write_bench(benchmark(splitter_fanout=config.splitter_fanout), args.out)


def _samples(args, config: settings.ToolConfig) -> SwitchingSampleSet:
    if args.samples is not None:
        return csv_io.read_samples_csv(args.samples)
    # the calibration table as a spread-free sample set
    return SwitchingSampleSet.synthesize(
        _table(args, config), _SYNTHETIC_SAMPLE_POINTS, Spread(), count=1
    )


def _cmd_margins(args, config: settings.ToolConfig) -> None:
    _explain(args)
    samples = _samples(args, config)
    bias = _bias(args)
    if args.robust:
        best = robust_bias(
            args.gate,
            samples,
            config.enc,
            sweep=(-200.0, 200.0, args.step),
            i_b2=bias.i_b2,
            spread=args.spread,
        )
        bias = BiasConfig(args.gate, best, bias.i_b2, bias.r_load)
    report = monte_carlo_margin(
        args.gate,
        bias,
        samples,
        config.enc,
        trials=args.trials,
        seed=args.seed,
        spread=args.spread,
        workers=args.workers,
    )
    reports.write_margins(report, args.out)


def _cmd_camo(args, config: settings.ToolConfig) -> None:
    first = camouflage.camouflage_view(hnl.read_file(args.netlist))
    if args.other is None:
        reports.emit(camouflage.to_json(first), args.out)
        return
    second = camouflage.camouflage_view(hnl.read_file(args.other))
    identical = camouflage.views_identical(first, second)
    reports.emit("identical\n" if identical else "different\n", args.out)
    if not identical:
        raise _DomainFailure(f"'{args.netlist}' and '{args.other}' can be told apart.")


def _cmd_calibrate(args, config: settings.ToolConfig) -> None:
    table = calibrate_from_measurements(csv_io.read_samples_csv(args.samples))
    if args.out is None:
        sys.stdout.write(csv_io.render_calibration_csv(table))
    else:
        csv_io.write_calibration_csv(args.out, table)


_COMMANDS: dict[str, typing.Callable] = {
    "sim": _cmd_sim,
    "truth": _cmd_truth,
    "window": _cmd_window,
    "synth": _cmd_synth,
    "fa-bench": _cmd_fa_bench,
    "margins": _cmd_margins,
    "camo": _cmd_camo,
    "calibrate": _cmd_calibrate,
}


def _fail(message: str) -> None:
    print(f"{PROG}: error: {message}", file=sys.stderr)


def run(argv: typing.Optional[typing.Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    try:
        level = (
            settings.parse_log_level(args.log_level)
            if args.log_level
            else settings.log_level_from_env()
        )
        logging.basicConfig(format=settings.LOG_FORMAT, level=level)
        logging.getLogger().setLevel(level)

        config_path = args.config or settings.config_path_from_env()
        config = settings.load_config(config_path)
        _COMMANDS[args.command](args, config)
    except _DomainFailure as e:
        _fail(str(e))
        return 1
    except DOMAIN_ERRORS as e:
        _fail(str(e))
        return 1
    except HtronError as e:
        _fail(str(e))
        return 2
    except OSError as e:
        _fail(f"{e.strerror or e}: '{e.filename}'" if e.filename else str(e))
        return 2
    return 0


def main() -> None:
    sys.exit(run())
