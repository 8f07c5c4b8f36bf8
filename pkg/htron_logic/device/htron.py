"""Threshold compact model of the heater cryotron.

The gate current magnitude selects the channel critical current from a calibration
table; the channel switches when its bias exceeds that value, with a fixed turn-on
delay and thermal reset time.
"""

import logging
import math
import typing

import numpy as np

from htron_logic.device.models import (
    CalibrationTable,
    DeviceParams,
    DeviceState,
    Phase,
    Spread,
    SwitchingSampleSet,
)
from htron_logic.errors import (
    CalibrationError,
    ConfigurationError,
    SampleRangeError,
    TimestepError,
    UnsupportedOperatingPointError,
)

logger = logging.getLogger(__name__)

RngLike = typing.Union[np.random.Generator, int, None]


def critical_current(table: CalibrationTable, i_gate):
    """Channel critical current (μA) for a gate current magnitude (μA)."""
    if not table.knots:
        raise ConfigurationError("Calibration table has no knots.")
    result = np.interp(i_gate, table.gate_currents, table.critical_currents)
    if np.ndim(result) == 0:
        return float(result)
    return result


def switching_threshold(table: CalibrationTable, i_channel: float) -> float:
    """Largest gate current magnitude that still leaves the channel superconducting.

    The channel switches for |I_G| strictly above the returned value. Returns +inf when
    no gate current switches it and -inf when it is switched even without gate current.
    """
    gates = table.gate_currents
    crits = table.critical_currents
    if crits[-1] >= i_channel:
        return math.inf
    if crits[0] < i_channel:
        return -math.inf

    j = int(np.nonzero(crits >= i_channel)[0][-1])
    g0, c0 = gates[j], crits[j]
    g1, c1 = gates[j + 1], crits[j + 1]
    return float(g0 + (c0 - i_channel) * (g1 - g0) / (c0 - c1))


def calibrate_from_measurements(samples: SwitchingSampleSet) -> CalibrationTable:
    """Median switching current per gate current, as a calibration table."""
    knots = []
    for i_gate, values in samples.points:
        if len(values) == 1:
            logger.debug("Single sample at gate current %s μA.", i_gate)
        # numpy takes the mean of the central pair for even counts
        knots.append((i_gate, float(np.median(values))))

    try:
        return CalibrationTable(tuple(knots))
    except CalibrationError as e:
        raise CalibrationError(f"Calibration from measurements failed: {e}") from e


def sample_critical_current(
    samples: SwitchingSampleSet,
    i_gate: float,
    rng: RngLike = None,
    spread: typing.Optional[Spread] = None,
    size: typing.Optional[int] = None,
):
    """Draw critical current realizations at the sampled gate current nearest `i_gate`.

    Without a spread the draw is uniform over the measured samples; with one it is the
    median plus the parametric deviation.
    """
    gates = samples.gate_currents
    if not gates[0] <= i_gate <= gates[-1]:
        raise SampleRangeError(
            f"Gate current {i_gate} μA is outside the sampled range "
            f"{gates[0]}..{gates[-1]} μA."
        )
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)

    values = samples.samples_at(samples.nearest_index(i_gate))
    if spread is not None:
        result = float(np.median(values)) + spread.draw(rng, size=size)
    else:
        result = rng.choice(values, size=size)

    if size is None:
        return float(result)
    return np.asarray(result, dtype=float)


def check_timestep(dt: float, params: DeviceParams) -> None:
    if not dt > 0:
        raise TimestepError(f"Timestep {dt} s must be positive.")
    if dt > params.turn_on_delay * (1 + 1e-9):
        raise TimestepError(
            f"Timestep {dt * 1e12:g} ps exceeds the turn-on delay "
            f"{params.turn_on_delay * 1e12:g} ps."
        )


def advance(phase, elapsed, triggered, dt: float, params: DeviceParams):
    """One timestep of the switching state machine over arrays of devices.

    Returns the new phases, the new elapsed times and a mask of devices whose trigger
    reasserted while they were still resetting.
    """
    phase = np.asarray(phase)
    elapsed = np.asarray(elapsed, dtype=float)
    triggered = np.asarray(triggered, dtype=bool)

    new_phase = phase.copy()
    new_elapsed = np.zeros_like(elapsed)
    tol = dt * 1e-6
    later = elapsed + dt

    # superconducting: a trigger starts the turn-on delay
    start = (phase == Phase.SUPERCONDUCTING) & triggered
    new_phase[start] = Phase.SWITCHING_ON

    # switching on: completes after the delay or aborts when the trigger drops
    switching = phase == Phase.SWITCHING_ON
    done = switching & triggered & (later + tol >= params.turn_on_delay)
    waiting = switching & triggered & ~done
    new_phase[done] = Phase.RESISTIVE
    new_phase[waiting] = Phase.SWITCHING_ON
    new_elapsed[waiting] = later[waiting]
    new_phase[switching & ~triggered] = Phase.SUPERCONDUCTING

    # resistive: losing the trigger starts the thermal reset
    new_phase[(phase == Phase.RESISTIVE) & ~triggered] = Phase.RESETTING

    # resetting: completes after the reset time or falls back when retriggered
    resetting = phase == Phase.RESETTING
    violated = resetting & triggered
    recovered = resetting & ~triggered & (later + tol >= params.reset_time)
    cooling = resetting & ~triggered & ~recovered
    new_phase[violated] = Phase.RESISTIVE
    new_phase[recovered] = Phase.SUPERCONDUCTING
    new_phase[cooling] = Phase.RESETTING
    new_elapsed[cooling] = later[cooling]

    return new_phase, new_elapsed, violated


def load_fraction(params: DeviceParams, r_load: float) -> float:
    """Share of the channel bias steered into the load by a resistive channel."""
    return params.r_normal / (params.r_normal + r_load)


class DeviceInstance:
    """One hTron with its switching state. Not safe for concurrent mutation."""

    def __init__(
        self,
        table: CalibrationTable,
        params: typing.Optional[DeviceParams] = None,
        r_load: float = 1e3,
        state: typing.Optional[DeviceState] = None,
    ):
        if r_load <= 0:
            raise ConfigurationError(f"Load resistance {r_load} Ω must be > 0.")
        self.table = table
        self.params = params or DeviceParams()
        self.r_load = r_load
        self.state = state or DeviceState()

    def __repr__(self) -> str:
        return f"DeviceInstance(state={self.state}, r_load={self.r_load:g})"

    def is_triggered(self, i_gate_total: float, i_channel_bias: float) -> bool:
        return i_channel_bias > critical_current(self.table, abs(i_gate_total))

    def step(
        self, i_gate_total: float, i_channel_bias: float, dt: float
    ) -> tuple[DeviceState, float, float]:
        check_timestep(dt, self.params)
        if i_channel_bias < 0:
            raise UnsupportedOperatingPointError(
                f"Negative channel bias {i_channel_bias} μA is not supported."
            )

        triggered = self.is_triggered(i_gate_total, i_channel_bias)
        phase, elapsed, _ = advance(
            np.array([int(self.state.phase)]),
            np.array([self.state.elapsed]),
            np.array([triggered]),
            dt,
            self.params,
        )
        self.state = DeviceState(Phase(int(phase[0])), float(elapsed[0]))

        if self.state.phase.is_resistive:
            i_load = i_channel_bias * load_fraction(self.params, self.r_load)
        else:
            i_load = 0.0
        i_channel = i_channel_bias - i_load
        return self.state, i_channel, i_load


def step(
    device: DeviceInstance, i_gate_total: float, i_channel_bias: float, dt: float
) -> tuple[DeviceState, float, float]:
    return device.step(i_gate_total, i_channel_bias, dt)
