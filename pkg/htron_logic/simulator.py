"""Fixed-timestep transient simulation of hTron gate netlists.

Every step evaluates the gates level by level: the heater of each gate sees its bias
plus the currents on its input nets, the channel switches through the device state
machine, and the current steered into the load drives the output net. Independent
input vectors are simulated together as lanes of the same arrays.
"""

import csv
import dataclasses
import io
import logging
import math
import pathlib
import typing

import numpy as np

from htron_logic import textio
from htron_logic.device.htron import advance, check_timestep, critical_current, load_fraction
from htron_logic.device.models import CalibrationTable, DeviceParams, Phase
from htron_logic.errors import NetlistError, ResetViolationError, StimulusError
from htron_logic.gates import LogicEncoding
from htron_logic.netlist.models import Netlist

logger = logging.getLogger(__name__)

DEFAULT_DT = 50e-12

Waveform = tuple[tuple[float, float], ...]


@dataclasses.dataclass(frozen=True)
class Stimulus:
    """Piecewise-constant input currents: (t in s, i in μA) breakpoints per net."""

    waveforms: typing.Mapping[str, Waveform]

    def __post_init__(self):
        waveforms = {
            net: tuple((float(t), float(i)) for t, i in points)
            for net, points in self.waveforms.items()
        }
        object.__setattr__(self, "waveforms", waveforms)

        for net, points in waveforms.items():
            if not points:
                raise StimulusError(f"Input '{net}' has no breakpoints.")
            if points[0][0] != 0:
                raise StimulusError(
                    f"Input '{net}' must start at t = 0, not {points[0][0] * 1e9:g} ns."
                )
            for (t0, _), (t1, _) in zip(points, points[1:]):
                if t1 <= t0:
                    raise StimulusError(
                        f"Breakpoints of input '{net}' must increase strictly in time "
                        f"({t0 * 1e9:g} ns then {t1 * 1e9:g} ns)."
                    )
            for t, i in points:
                if not math.isfinite(i):
                    raise StimulusError(f"Input '{net}' has a non-finite current at {t} s.")

    @property
    def last_breakpoint(self) -> float:
        return max((points[-1][0] for points in self.waveforms.values()), default=0.0)

    def samples(self, net: str, count: int, dt: float) -> np.ndarray:
        """The waveform at t = k·dt; a breakpoint applies from the first sample at or after it."""
        result = np.empty(count)
        points = self.waveforms[net]
        for index, (t, i) in enumerate(points):
            start = max(0, math.ceil(t / dt - 1e-6))
            end = count
            if index + 1 < len(points):
                end = max(0, math.ceil(points[index + 1][0] / dt - 1e-6))
            result[min(start, count) : min(end, count)] = i
        return result

    @classmethod
    def constant(cls, currents: typing.Mapping[str, float]) -> "Stimulus":
        return cls({net: ((0.0, i),) for net, i in currents.items()})

    @classmethod
    def from_vectors(
        cls,
        inputs: typing.Sequence[str],
        vectors: typing.Sequence[typing.Sequence[int]],
        period: float,
        enc: typing.Optional[LogicEncoding] = None,
    ) -> "Stimulus":
        """One input vector per period, starting at t = 0."""
        enc = enc or LogicEncoding()
        if not period > 0:
            raise StimulusError(f"Vector period {period} s must be positive.")
        waveforms = {net: [] for net in inputs}
        for index, bits in enumerate(vectors):
            if len(bits) != len(inputs):
                raise StimulusError(
                    f"Vector {index} has {len(bits)} bits for {len(inputs)} inputs."
                )
            for net, bit in zip(inputs, bits):
                waveforms[net].append((index * period, enc.level(bit)))
        return cls(waveforms)


def read_stimulus_csv(file_path: typing.Union[str, pathlib.Path]) -> Stimulus:
    """Read `t_ns,<net>=<μA>,...` rows; nets keep their value until set again."""
    text = textio.read_text(file_path)
    rows = [r for r in csv.reader(io.StringIO(text)) if any(c.strip() for c in r)]
    if not rows or rows[0][0].strip() != "t_ns":
        raise StimulusError(f"{file_path}: first line must start with 't_ns'.")

    waveforms: dict[str, list[tuple[float, float]]] = {}
    for line, row in enumerate(rows[1:], start=2):
        try:
            t = float(row[0]) * 1e-9
        except ValueError:
            raise StimulusError(f"{file_path}: line {line}: bad time '{row[0]}'.") from None
        for cell in row[1:]:
            net, sep, value = cell.strip().partition("=")
            if not sep or not net:
                raise StimulusError(f"{file_path}: line {line}: expected '<net>=<μA>', got '{cell}'.")
            try:
                current = float(value)
            except ValueError:
                raise StimulusError(
                    f"{file_path}: line {line}: '{value}' is not a current."
                ) from None
            waveforms.setdefault(net.strip(), []).append((t, current))

    stimulus = Stimulus(waveforms)
    logger.info("Read stimulus for %d inputs from '%s'.", len(waveforms), file_path)
    return stimulus


@dataclasses.dataclass(frozen=True)
class SimConfig:
    dt: float = DEFAULT_DT
    t_end: typing.Optional[float] = None
    """End of the run in s. Defaults to the last breakpoint plus the settle time."""
    params: DeviceParams = dataclasses.field(default_factory=DeviceParams)
    enc: LogicEncoding = dataclasses.field(default_factory=LogicEncoding)
    strict: bool = False
    """Raise on reset violations instead of logging them."""


@dataclasses.dataclass
class Trace:
    dt: float
    currents: dict[str, np.ndarray]
    """Current in μA per net."""
    states: dict[str, np.ndarray]
    """Phase code per gate (see `Phase`)."""
    v_load: dict[str, np.ndarray]
    """Load voltage in mV per gate."""
    violations: list[tuple[str, float]] = dataclasses.field(default_factory=list)

    def __len__(self) -> int:
        return len(self.times)

    @property
    def times(self) -> np.ndarray:
        count = len(next(iter(self.currents.values()))) if self.currents else 0
        return np.arange(count) * self.dt

    def output_bits(
        self, netlist: Netlist, enc: typing.Optional[LogicEncoding] = None, sample: int = -1
    ) -> tuple[int, ...]:
        enc = enc or LogicEncoding()
        return tuple(enc.read(self.currents[n][sample]) for n in netlist.primary_outputs)


class _Engine:
    """Arrays of gate state for a netlist, advanced one timestep at a time over lanes."""

    def __init__(
        self,
        netlist: Netlist,
        table: CalibrationTable,
        params: DeviceParams,
        enc: LogicEncoding,
        lanes: int,
    ):
        self.netlist = netlist
        self.table = table
        self.params = params
        self.nets = netlist.nets
        self.index = {net: i for i, net in enumerate(self.nets)}
        # the extra last row is a grounded pin used to pad inputs
        self.ground = len(self.nets)
        self.currents = np.zeros((len(self.nets) + 1, lanes))
        for net, level in netlist.ties:
            self.currents[self.index[net]] = enc.level(level)

        gates = netlist.gates
        self.gate_index = {g.id: i for i, g in enumerate(gates)}
        self.phase = np.full((len(gates), lanes), int(Phase.SUPERCONDUCTING))
        self.elapsed = np.zeros((len(gates), lanes))
        self.i_load = np.zeros((len(gates), lanes))
        self.triggered = np.zeros((len(gates), lanes), dtype=bool)

        self.i_b1 = np.array([g.bias.i_b1 for g in gates])
        self.i_b2 = np.array([g.bias.i_b2 for g in gates])
        self.steered = np.array(
            [g.bias.i_b2 * load_fraction(params, g.bias.r_load) for g in gates]
        )
        self.out_rows = np.array([self.index[g.output] for g in gates], dtype=int)

        by_level: dict[int, list[int]] = {}
        for i, gate in enumerate(gates):
            by_level.setdefault(netlist.levels[gate.output], []).append(i)
        self.levels = []
        for level in sorted(by_level):
            members = np.array(by_level[level], dtype=int)
            pins = np.full((len(members), 3), self.ground, dtype=int)
            for row, i in enumerate(members):
                for pin, net in enumerate(gates[i].inputs):
                    pins[row, pin] = self.index[net]
            self.levels.append((members, pins))

    def set_inputs(self, net: str, values) -> None:
        self.currents[self.index[net]] = values

    def step(self, dt: float) -> np.ndarray:
        """Advance every gate by dt; returns the reset-violation mask."""
        violated = np.zeros_like(self.triggered)
        for members, pins in self.levels:
            total = self.i_b1[members, None] + self.currents[pins].sum(axis=1)
            trig = self.i_b2[members, None] > critical_current(self.table, np.abs(total))
            phase, elapsed, bad = advance(
                self.phase[members], self.elapsed[members], trig, dt, self.params
            )
            self.phase[members] = phase
            self.elapsed[members] = elapsed
            self.triggered[members] = trig
            violated[members] = bad

            hot = (phase == Phase.RESISTIVE) | (phase == Phase.RESETTING)
            load = np.where(hot, self.steered[members, None], 0.0)
            self.i_load[members] = load
            self.currents[self.out_rows[members]] = load
        return violated

    def is_settled(self) -> bool:
        """Every gate is in a stable phase that agrees with its trigger."""
        resistive = self.phase == Phase.RESISTIVE
        stable = resistive | (self.phase == Phase.SUPERCONDUCTING)
        return bool(np.all(stable) and np.all(resistive == self.triggered))

    def current(self, net: str) -> np.ndarray:
        return self.currents[self.index[net]]


def _sample_count(t_end: float, dt: float) -> int:
    return int(math.floor(t_end / dt + 1e-9)) + 1


def settle_time(netlist: Netlist, params: DeviceParams, dt: float = DEFAULT_DT) -> float:
    """Upper bound on the time a constant stimulus needs to reach steady state."""
    return netlist.depth() * (params.turn_on_delay + params.reset_time) + 2 * dt


def _check_inputs(netlist: Netlist, nets: typing.Iterable[str]) -> None:
    given = set(nets)
    missing = [n for n in netlist.primary_inputs if n not in given]
    if missing:
        raise StimulusError(f"No stimulus for input(s) {', '.join(missing)}.")
    unknown = sorted(given - set(netlist.primary_inputs))
    if unknown:
        raise StimulusError(f"Stimulus drives unknown input(s) {', '.join(unknown)}.")


def simulate(
    netlist: Netlist,
    stimulus: Stimulus,
    table: CalibrationTable,
    config: typing.Optional[SimConfig] = None,
) -> Trace:
    config = config or SimConfig()
    params = config.params
    check_timestep(config.dt, params)
    _check_inputs(netlist, stimulus.waveforms)

    t_end = config.t_end
    if t_end is None:
        t_end = stimulus.last_breakpoint + settle_time(netlist, params, config.dt)
    if t_end < stimulus.last_breakpoint:
        raise StimulusError(
            f"Simulation ends at {t_end * 1e9:g} ns, before the last breakpoint "
            f"at {stimulus.last_breakpoint * 1e9:g} ns."
        )

    count = _sample_count(t_end, config.dt)
    engine = _Engine(netlist, table, params, config.enc, lanes=1)
    inputs = {net: stimulus.samples(net, count, config.dt) for net in netlist.primary_inputs}

    gates = netlist.gates
    currents = {net: np.zeros(count) for net in netlist.nets}
    states = {g.id: np.zeros(count, dtype=np.int8) for g in gates}
    v_load = {g.id: np.zeros(count) for g in gates}
    r_load = np.array([g.bias.r_load for g in gates])
    violations = []

    logger.info(
        "Simulating '%s': %d gates, %d steps of %g ps.",
        netlist.name,
        len(gates),
        count,
        config.dt * 1e12,
    )
    for k in range(count):
        for net, values in inputs.items():
            engine.set_inputs(net, values[k])
        violated = engine.step(config.dt)

        for i in np.nonzero(violated[:, 0])[0]:
            gate_id = gates[i].id
            t = k * config.dt
            if config.strict:
                raise ResetViolationError(
                    f"Gate '{gate_id}' was retriggered while resetting at {t * 1e9:g} ns."
                )
            logger.warning(
                "Gate '%s' was retriggered while resetting at %g ns.", gate_id, t * 1e9
            )
            violations.append((gate_id, t))

        for net in netlist.nets:
            currents[net][k] = engine.current(net)[0]
        load = engine.i_load[:, 0]
        for i, gate in enumerate(gates):
            states[gate.id][k] = engine.phase[i, 0]
            # μA · Ω = μV
            v_load[gate.id][k] = load[i] * r_load[i] / 1000

    return Trace(
        dt=config.dt,
        currents=currents,
        states=states,
        v_load=v_load,
        violations=violations,
    )


def settle(
    netlist: Netlist,
    vectors: typing.Sequence[typing.Sequence[int]],
    table: CalibrationTable,
    config: typing.Optional[SimConfig] = None,
) -> list[tuple[int, ...]]:
    """Settled transient outputs for constant input vectors, all run as parallel lanes."""
    config = config or SimConfig()
    params = config.params
    check_timestep(config.dt, params)
    vectors = [tuple(v) for v in vectors]
    if not vectors:
        return []

    engine = _Engine(netlist, table, params, config.enc, lanes=len(vectors))
    bits = np.array(vectors, dtype=int).reshape(len(vectors), len(netlist.primary_inputs))
    for column, net in enumerate(netlist.primary_inputs):
        levels = np.where(bits[:, column] == 1, config.enc.i_one, config.enc.i_zero)
        engine.set_inputs(net, levels)

    bound = _sample_count(settle_time(netlist, params, config.dt), config.dt)
    for k in range(bound):
        engine.step(config.dt)
        if engine.is_settled():
            logger.debug("'%s' settled after %d steps.", netlist.name, k + 1)
            break
    else:
        logger.warning("'%s' did not settle within %d steps.", netlist.name, bound)

    outputs = np.array(
        [[config.enc.read(c) for c in engine.current(net)] for net in netlist.primary_outputs]
    ).reshape(len(netlist.primary_outputs), len(vectors))
    return [tuple(int(b) for b in column) for column in outputs.T]


def steady_state(
    netlist: Netlist,
    input_bits: typing.Union[typing.Sequence[int], typing.Mapping[str, int]],
    table: CalibrationTable,
    enc: typing.Optional[LogicEncoding] = None,
    params: typing.Optional[DeviceParams] = None,
) -> tuple[int, ...]:
    """Outputs after every gate has settled, evaluated in topological order without timing."""
    enc = enc or LogicEncoding()
    params = params or DeviceParams()
    if isinstance(input_bits, typing.Mapping):
        bits = dict(input_bits)
    else:
        if len(input_bits) != len(netlist.primary_inputs):
            raise StimulusError(
                f"Expected {len(netlist.primary_inputs)} input bits, got {len(input_bits)}."
            )
        bits = dict(zip(netlist.primary_inputs, input_bits))
    _check_inputs(netlist, bits)

    currents = {net: enc.level(bit) for net, bit in bits.items()}
    currents.update({net: enc.level(level) for net, level in netlist.ties})
    for gate in netlist.gates:
        total = gate.bias.i_b1 + sum(currents[n] for n in gate.inputs)
        switched = gate.bias.i_b2 > critical_current(table, abs(total))
        fraction = load_fraction(params, gate.bias.r_load)
        currents[gate.output] = gate.bias.i_b2 * fraction if switched else 0.0
    return tuple(enc.read(currents[net]) for net in netlist.primary_outputs)


def max_clock_estimate(netlist: Netlist, params: typing.Optional[DeviceParams] = None) -> float:
    """Rough upper clock rate in Hz: one pass through the logic plus one thermal reset."""
    params = params or DeviceParams()
    depth = netlist.depth()
    if depth < 1:
        raise NetlistError(f"Netlist '{netlist.name}' has no gate between inputs and outputs.")
    return 1.0 / (depth * params.turn_on_delay + params.reset_time)
