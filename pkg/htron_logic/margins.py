"""Monte Carlo error rates and worst-case margins of a gate bias point."""

import concurrent.futures
import dataclasses
import logging
import math
import typing

import numpy as np

from htron_logic.device.htron import (
    calibrate_from_measurements,
    sample_critical_current,
    switching_threshold,
)
from htron_logic.device.models import CalibrationTable, Spread, SwitchingSampleSet
from htron_logic.errors import ConfigurationError, NoFeasibleBiasError
from htron_logic.gates import (
    DEFAULT_I_B2,
    BiasConfig,
    GateKind,
    LogicEncoding,
    bias_window,
    input_combinations,
)

logger = logging.getLogger(__name__)

DEFAULT_TRIALS = 10_000
BLOCK_SIZE = 1_000


@dataclasses.dataclass(frozen=True)
class ComboMargin:
    inputs: tuple[int, ...]
    i_gate_total: float
    error_rate: float
    margin: float
    """Distance in μA from the worst-case switching threshold; negative when failing."""

    @property
    def bits(self) -> str:
        return "".join(str(b) for b in self.inputs)


@dataclasses.dataclass(frozen=True)
class MarginReport:
    kind: GateKind
    i_b1: float
    combos: tuple[ComboMargin, ...]
    worst_case_margin: float
    trials: int
    seed: int

    @property
    def error_rates(self) -> dict[str, float]:
        return {c.bits: c.error_rate for c in self.combos}

    @property
    def max_error_rate(self) -> float:
        return max(c.error_rate for c in self.combos)


def _shifted(table: CalibrationTable, delta: float) -> CalibrationTable:
    return CalibrationTable(tuple((g, max(c + delta, 1e-9)) for g, c in table.knots))


def _envelopes(
    samples: SwitchingSampleSet, spread: typing.Optional[Spread]
) -> tuple[CalibrationTable, CalibrationTable]:
    if spread is not None:
        # samples are only the centre of a parametric spread
        median = calibrate_from_measurements(samples)
        return _shifted(median, -spread.bound), _shifted(median, spread.bound)
    return samples.envelope("low"), samples.envelope("high")


def combo_margins(
    bias: BiasConfig,
    samples: SwitchingSampleSet,
    enc: typing.Optional[LogicEncoding] = None,
    spread: typing.Optional[Spread] = None,
) -> list[float]:
    """Worst-case margin of every input combination of the gate."""
    enc = enc or LogicEncoding()
    low, high = _envelopes(samples, spread)
    # weakest channel switches earliest, strongest latest
    g_low = switching_threshold(low, bias.i_b2)
    g_high = switching_threshold(high, bias.i_b2)

    margins = []
    for bits in input_combinations(bias.kind.arity):
        total = abs(bias.i_b1 + sum(enc.level(b) for b in bits))
        if bias.kind.ideal(bits):
            margins.append(total - g_high)
        else:
            margins.append(g_low - total)
    return margins


def worst_case_margin(
    bias: BiasConfig,
    samples: SwitchingSampleSet,
    enc: typing.Optional[LogicEncoding] = None,
    spread: typing.Optional[Spread] = None,
) -> float:
    return min(combo_margins(bias, samples, enc, spread))


@dataclasses.dataclass(frozen=True)
class _Block:
    bias: BiasConfig
    samples: SwitchingSampleSet
    totals: tuple[float, ...]
    expected: tuple[int, ...]
    spread: typing.Optional[Spread]
    size: int
    seed: np.random.SeedSequence


def _run_block(block: _Block) -> np.ndarray:
    """Error counts per input combination over one block of trials."""
    rng = np.random.default_rng(block.seed)
    gates = block.samples.gate_currents
    errors = np.zeros(len(block.totals), dtype=np.int64)
    for index, (total, expected) in enumerate(zip(block.totals, block.expected)):
        # beyond the measured sweep the outermost point stands in, like the table ends
        i_gate = float(np.clip(abs(total), gates[0], gates[-1]))
        crit = sample_critical_current(block.samples, i_gate, rng, block.spread, size=block.size)
        switched = block.bias.i_b2 > crit
        errors[index] = np.count_nonzero(switched != bool(expected))
    return errors


def monte_carlo_margin(
    kind: GateKind,
    bias: BiasConfig,
    samples: SwitchingSampleSet,
    enc: typing.Optional[LogicEncoding] = None,
    trials: int = DEFAULT_TRIALS,
    seed: int = 0,
    spread: typing.Optional[Spread] = None,
    workers: int = 1,
) -> MarginReport:
    """Error rate per input combination with an independent threshold draw per evaluation.

    Trials run in fixed blocks with their own seed streams, so the report does not
    depend on the number of workers.
    """
    if trials < 1:
        raise ConfigurationError(f"Need at least one trial, got {trials}.")
    if workers < 1:
        raise ConfigurationError(f"Need at least one worker, got {workers}.")
    if bias.kind is not kind:
        raise ConfigurationError(f"Bias is configured for {bias.kind.value}, not {kind.value}.")
    enc = enc or LogicEncoding()

    combos = input_combinations(kind.arity)
    totals = tuple(bias.i_b1 + sum(enc.level(b) for b in bits) for bits in combos)
    expected = tuple(kind.ideal(bits) for bits in combos)

    n_blocks = math.ceil(trials / BLOCK_SIZE)
    seeds = np.random.SeedSequence(seed).spawn(n_blocks)
    blocks = [
        _Block(
            bias=bias,
            samples=samples,
            totals=totals,
            expected=expected,
            spread=spread,
            size=min(BLOCK_SIZE, trials - index * BLOCK_SIZE),
            seed=seeds[index],
        )
        for index in range(n_blocks)
    ]

    if workers == 1 or n_blocks == 1:
        counts = [_run_block(b) for b in blocks]
    else:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as executor:
            counts = list(executor.map(_run_block, blocks))
    errors = np.sum(counts, axis=0)

    margins = combo_margins(bias, samples, enc, spread)
    report = MarginReport(
        kind=kind,
        i_b1=bias.i_b1,
        combos=tuple(
            ComboMargin(bits, total, float(count) / trials, margin)
            for bits, total, count, margin in zip(combos, totals, errors, margins)
        ),
        worst_case_margin=min(margins),
        trials=trials,
        seed=seed,
    )
    logger.info(
        "%s at I_B1 = %g μA: worst error rate %.4f, worst-case margin %g μA over %d trials.",
        kind.value,
        bias.i_b1,
        report.max_error_rate,
        report.worst_case_margin,
        trials,
    )
    return report


def robust_bias(
    kind: GateKind,
    samples: SwitchingSampleSet,
    enc: typing.Optional[LogicEncoding] = None,
    sweep: tuple[float, float, float] = (-200.0, 200.0, 0.5),
    i_b2: float = DEFAULT_I_B2,
    spread: typing.Optional[Spread] = None,
) -> float:
    """The in-window bias on the sweep grid with the largest worst-case margin."""
    enc = enc or LogicEncoding()
    table = calibrate_from_measurements(samples)
    window = bias_window(kind, table, enc, sweep, i_b2)

    lo, hi, step = sweep
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    grid = [lo + step * i for i in range(count)]
    candidates = [b for b in grid if window.contains(b)]
    if not candidates:
        raise NoFeasibleBiasError(
            f"No bias on the {step:g} μA grid from {lo:g} to {hi:g} μA realizes {kind.value}."
        )

    best = None
    best_margin = -math.inf
    for candidate in candidates:
        margin = worst_case_margin(BiasConfig(kind, candidate, i_b2), samples, enc, spread)
        if best is None or margin > best_margin + 1e-9:
            best, best_margin = candidate, margin
        elif math.isclose(margin, best_margin, abs_tol=1e-9) and abs(candidate) < abs(best):
            best = candidate

    logger.info(
        "Most robust %s bias: %g μA with a worst-case margin of %g μA.",
        kind.value,
        best,
        best_margin,
    )
    return float(best)
