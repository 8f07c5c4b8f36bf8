import dataclasses
import enum
import functools
import math
import typing

import numpy as np

from htron_logic.errors import CalibrationError, ConfigurationError

# the measured switching point of the reference device
ANCHOR_GATE_UA = 110.0
ANCHOR_CRIT_UA = 55.0


def _frozen_array(values) -> np.ndarray:
    result = np.array(values, dtype=float)
    result.setflags(write=False)
    return result


class Phase(enum.IntEnum):
    SUPERCONDUCTING = 0
    SWITCHING_ON = 1
    RESISTIVE = 2
    RESETTING = 3

    @property
    def is_resistive(self) -> bool:
        """Electrically resistive: the channel bias is steered into the load."""
        return self in (Phase.RESISTIVE, Phase.RESETTING)


@dataclasses.dataclass(frozen=True)
class DeviceState:
    phase: Phase = Phase.SUPERCONDUCTING
    elapsed: float = 0.0
    """Seconds spent in a timed phase (SWITCHING_ON or RESETTING)."""

    def __str__(self) -> str:
        if self.phase in (Phase.SWITCHING_ON, Phase.RESETTING):
            return f"{self.phase.name}({self.elapsed * 1e12:.0f} ps)"
        return self.phase.name


@dataclasses.dataclass(frozen=True)
class CalibrationTable:
    """Monotone map from gate current to channel critical current (both in μA).

    Linear between knots, clamped to the nearest knot outside them.
    """

    knots: tuple[tuple[float, float], ...]

    def __post_init__(self):
        knots = tuple((float(g), float(c)) for g, c in self.knots)
        object.__setattr__(self, "knots", knots)

        if not knots:
            raise ConfigurationError("Calibration table has no knots.")

        for i_gate, i_crit in knots:
            if i_gate < 0 or not math.isfinite(i_gate):
                raise CalibrationError(f"Gate current {i_gate} μA must be >= 0.")
            if i_crit <= 0 or not math.isfinite(i_crit):
                raise CalibrationError(
                    f"Critical current {i_crit} μA at gate current {i_gate} μA "
                    "must be > 0."
                )

        for (g0, c0), (g1, c1) in zip(knots, knots[1:]):
            if g1 <= g0:
                raise CalibrationError(
                    f"Gate currents must increase strictly: {g0} μA then {g1} μA."
                )
            if c1 > c0:
                raise CalibrationError(
                    f"Critical current rises from {c0} μA to {c1} μA between "
                    f"gate currents {g0} μA and {g1} μA."
                )

    @functools.cached_property
    def gate_currents(self) -> np.ndarray:
        return _frozen_array([g for g, _ in self.knots])

    @functools.cached_property
    def critical_currents(self) -> np.ndarray:
        return _frozen_array([c for _, c in self.knots])

    @property
    def is_anchored(self) -> bool:
        """Does the table reproduce the reference device's switching point?"""
        gates = self.gate_currents
        if not gates[0] <= ANCHOR_GATE_UA <= gates[-1]:
            return False
        value = float(np.interp(ANCHOR_GATE_UA, gates, self.critical_currents))
        return math.isclose(value, ANCHOR_CRIT_UA, abs_tol=1e-9)

    @classmethod
    def from_pairs(cls, pairs: typing.Iterable[tuple[float, float]]):
        return cls(knots=tuple(sorted(pairs)))


@dataclasses.dataclass(frozen=True)
class Spread:
    """Parametric spread of the critical current around its median."""

    kind: str = "none"
    """One of 'none', 'uniform' (width is the half-width) or 'normal' (width is σ)."""
    width: float = 0.0

    def __post_init__(self):
        if self.kind not in ("none", "uniform", "normal"):
            raise ConfigurationError(f"Unknown spread kind '{self.kind}'.")
        if self.width < 0:
            raise ConfigurationError(f"Spread width {self.width} μA must be >= 0.")

    def draw(self, rng: np.random.Generator, size=None):
        if self.kind == "uniform":
            return rng.uniform(-self.width, self.width, size=size)
        if self.kind == "normal":
            return rng.normal(0.0, self.width, size=size)
        return np.zeros(size) if size is not None else 0.0

    @property
    def bound(self) -> float:
        """Largest deviation counted for worst-case margins (3σ for a normal spread)."""
        if self.kind == "normal":
            return 3 * self.width
        if self.kind == "uniform":
            return self.width
        return 0.0

    @classmethod
    def parse(cls, value: str) -> "Spread":
        """Parse 'uniform:5', 'normal:2.5' or 'none'."""
        kind, _, width = value.partition(":")
        try:
            return cls(kind=kind.strip(), width=float(width) if width else 0.0)
        except ValueError as e:
            raise ConfigurationError(f"Invalid spread '{value}': {e}") from e


@dataclasses.dataclass(frozen=True)
class SwitchingSampleSet:
    """Measured channel switching currents per gate current (μA)."""

    points: tuple[tuple[float, tuple[float, ...]], ...]

    def __post_init__(self):
        points = tuple(
            sorted((float(g), tuple(float(s) for s in values)) for g, values in self.points)
        )
        object.__setattr__(self, "points", points)

        if not points:
            raise CalibrationError("Sample set has no gate currents.")
        for (g0, _), (g1, _) in zip(points, points[1:]):
            if g0 == g1:
                raise CalibrationError(f"Gate current {g0} μA appears twice.")
        for i_gate, values in points:
            if not values:
                raise CalibrationError(f"No samples at gate current {i_gate} μA.")
            if any(v <= 0 for v in values):
                raise CalibrationError(
                    f"Samples at gate current {i_gate} μA must be positive."
                )

    @functools.cached_property
    def gate_currents(self) -> np.ndarray:
        return _frozen_array([g for g, _ in self.points])

    def samples_at(self, index: int) -> np.ndarray:
        return np.array(self.points[index][1], dtype=float)

    def nearest_index(self, i_gate: float) -> int:
        gates = self.gate_currents
        # ties go to the lower gate current
        return int(np.argmin(np.abs(gates - i_gate)))

    def envelope(self, side: str) -> CalibrationTable:
        """Per-point lowest ('low') or highest ('high') sample, forced non-increasing."""
        if side == "low":
            values = np.array([min(v) for _, v in self.points])
        elif side == "high":
            values = np.array([max(v) for _, v in self.points])
        else:
            raise ValueError(side)
        values = np.minimum.accumulate(values)
        return CalibrationTable(tuple(zip(self.gate_currents.tolist(), values.tolist())))

    @classmethod
    def from_mapping(cls, data: typing.Mapping[float, typing.Iterable[float]]):
        return cls(points=tuple((g, tuple(v)) for g, v in data.items()))

    @classmethod
    def synthesize(
        cls,
        table: CalibrationTable,
        gate_points: typing.Iterable[float],
        spread: Spread,
        count: int = 50,
        seed: typing.Optional[int] = None,
    ) -> "SwitchingSampleSet":
        """Emulate the repeated-ramp measurement: `count` switching currents per gate current."""
        if count < 1:
            raise ConfigurationError("At least one sample per gate current is required.")
        rng = np.random.default_rng(seed)
        data = {}
        for i_gate in gate_points:
            median = float(
                np.interp(i_gate, table.gate_currents, table.critical_currents)
            )
            values = median + np.asarray(spread.draw(rng, size=count), dtype=float)
            data[float(i_gate)] = np.maximum(values, 1e-6).tolist()
        return cls.from_mapping(data)


@dataclasses.dataclass(frozen=True)
class DeviceParams:
    turn_on_delay: float = 300e-12
    """Seconds from trigger to resistive channel."""
    reset_time: float = 15e-9
    """Seconds of thermal recovery before the channel superconducts again."""
    r_normal: float = 100e3
    """Channel normal-state resistance in ohms."""
    r_gate: float = 1e3
    """Heater input impedance in ohms."""
    critical_temperature: float = 3.5
    operating_temperature: float = 0.9

    def __post_init__(self):
        for field in dataclasses.fields(self):
            value = getattr(self, field.name)
            if not value > 0:
                raise ConfigurationError(f"Device parameter {field.name} must be > 0.")
        if self.turn_on_delay >= self.reset_time:
            raise ConfigurationError("turn_on_delay must be shorter than reset_time.")
        if self.r_normal <= 10 * self.r_gate:
            raise ConfigurationError(
                "r_normal must be much larger than r_gate "
                f"({self.r_normal} Ω vs {self.r_gate} Ω)."
            )
        if self.operating_temperature >= self.critical_temperature:
            raise ConfigurationError("operating_temperature must be below T_C.")

    @classmethod
    def preset(cls, name: str, **overrides) -> "DeviceParams":
        try:
            base = PRESETS[name]
        except KeyError:
            raise ConfigurationError(f"Unknown device preset '{name}'.") from None
        return dataclasses.replace(base, **overrides)


PRESETS = {
    # WSi microwires, the measured device
    "wsi": DeviceParams(),
    # thinner NbN channel: ~1 ns thermal reset
    "nbn": DeviceParams(reset_time=1e-9, critical_temperature=9.0),
}
