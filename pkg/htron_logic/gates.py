"""The reconfigurable single-hTron gate: encoding, biasing and bias windows.

All inputs and the gate bias I_B1 are summed on the heater; the channel bias I_B2
is fixed. The gate outputs a '1' when that sum switches the channel.
"""

import dataclasses
import enum
import itertools
import logging
import math
import typing

import numpy as np

from htron_logic.device.htron import critical_current, switching_threshold
from htron_logic.device.models import CalibrationTable
from htron_logic.errors import ConfigurationError

logger = logging.getLogger(__name__)

DEFAULT_I_B2 = 55.0
DEFAULT_R_LOAD = 1e3

NOT_BIAS_NOTE = (
    "NOT gate: the source text applies -120 uA 'as I_B2' right after keeping I_B2 "
    "unchanged, and quotes a total gate current of -65 uA for input '1'. "
    "Both only agree with -120 uA as the gate bias I_B1, which is used here."
)


class GateKind(enum.Enum):
    COPY = "COPY"
    NOT = "NOT"
    AND2 = "AND2"
    OR2 = "OR2"
    MAJ3 = "MAJ3"

    @property
    def arity(self) -> int:
        return _ARITY[self]

    def ideal(self, bits: typing.Sequence[int]) -> int:
        """The Boolean function the gate is biased to realize."""
        if len(bits) != self.arity:
            raise ValueError(f"{self.value} takes {self.arity} inputs, got {len(bits)}.")
        if self is GateKind.COPY:
            return int(bits[0])
        if self is GateKind.NOT:
            return 1 - int(bits[0])
        if self is GateKind.AND2:
            return int(all(bits))
        if self is GateKind.OR2:
            return int(any(bits))
        return int(sum(bits) >= 2)

    @classmethod
    def parse(cls, name: str) -> "GateKind":
        try:
            return cls(name.upper())
        except ValueError:
            known = ", ".join(k.value for k in cls)
            raise ConfigurationError(
                f"Unknown gate kind '{name}' (expected one of {known})."
            ) from None


_ARITY = {
    GateKind.COPY: 1,
    GateKind.NOT: 1,
    GateKind.AND2: 2,
    GateKind.OR2: 2,
    GateKind.MAJ3: 3,
}

NOMINAL_I_B1 = {
    GateKind.COPY: 65.0,
    GateKind.NOT: -120.0,
    GateKind.AND2: 10.0,
    GateKind.OR2: 65.0,
    GateKind.MAJ3: 10.0,
}


@dataclasses.dataclass(frozen=True)
class LogicEncoding:
    i_zero: float = 0.0
    i_one: float = 55.0
    detect_threshold: typing.Optional[float] = None
    """Output currents at or above this read as '1'. Defaults to the midpoint."""

    def __post_init__(self):
        if self.detect_threshold is None:
            object.__setattr__(
                self, "detect_threshold", (self.i_zero + self.i_one) / 2
            )
        if not self.i_zero < self.detect_threshold < self.i_one:
            raise ConfigurationError(
                "Logic encoding needs i_zero < detect_threshold < i_one "
                f"(got {self.i_zero}, {self.detect_threshold}, {self.i_one})."
            )

    def level(self, bit: int) -> float:
        return self.i_one if bit else self.i_zero

    def read(self, current: float) -> int:
        return int(current >= self.detect_threshold)


@dataclasses.dataclass(frozen=True)
class BiasConfig:
    kind: GateKind
    i_b1: float
    """Gate bias in μA, signed."""
    i_b2: float = DEFAULT_I_B2
    """Channel bias in μA."""
    r_load: float = DEFAULT_R_LOAD

    def __post_init__(self):
        if not self.i_b2 > 0:
            raise ConfigurationError(f"Channel bias I_B2 {self.i_b2} μA must be > 0.")
        if not self.r_load > 0:
            raise ConfigurationError(f"Load resistance {self.r_load} Ω must be > 0.")


@dataclasses.dataclass(frozen=True)
class TruthRow:
    inputs: tuple[int, ...]
    output: int
    i_gate_total: float

    @property
    def bits(self) -> str:
        return "".join(str(b) for b in self.inputs)


@dataclasses.dataclass(frozen=True)
class Interval:
    lo: float
    hi: float
    lo_closed: bool
    hi_closed: bool

    def __str__(self) -> str:
        left = "[" if self.lo_closed else "("
        right = "]" if self.hi_closed else ")"
        return f"{left}{self.lo:g}, {self.hi:g}{right}"

    def contains(self, value: float) -> bool:
        above = value >= self.lo if self.lo_closed else value > self.lo
        below = value <= self.hi if self.hi_closed else value < self.hi
        return above and below

    def strictly_inside(self, value: float) -> bool:
        return self.lo < value < self.hi


@dataclasses.dataclass(frozen=True)
class BiasWindow:
    kind: GateKind
    intervals: tuple[Interval, ...]

    def __str__(self) -> str:
        if not self.intervals:
            return f"{self.kind.value}: empty"
        return f"{self.kind.value}: " + " U ".join(str(i) for i in self.intervals)

    @property
    def is_empty(self) -> bool:
        return not self.intervals

    def contains(self, value: float) -> bool:
        return any(i.contains(value) for i in self.intervals)

    def strictly_inside(self, value: float) -> bool:
        return any(i.strictly_inside(value) for i in self.intervals)


def bias_for(
    kind: GateKind, i_b2: float = DEFAULT_I_B2, r_load: float = DEFAULT_R_LOAD
) -> BiasConfig:
    """The nominal bias point of each gate kind."""
    return BiasConfig(kind=kind, i_b1=NOMINAL_I_B1[kind], i_b2=i_b2, r_load=r_load)


def input_combinations(arity: int) -> list[tuple[int, ...]]:
    return list(itertools.product((0, 1), repeat=arity))


def ideal(kind: GateKind, bits: typing.Sequence[int]) -> int:
    return kind.ideal(bits)


def truth_table(
    kind: GateKind,
    bias: BiasConfig,
    table: CalibrationTable,
    enc: typing.Optional[LogicEncoding] = None,
) -> list[TruthRow]:
    """Steady-state output of the biased gate for every input combination."""
    if bias.kind is not kind:
        raise ConfigurationError(
            f"Bias is configured for {bias.kind.value}, not {kind.value}."
        )
    enc = enc or LogicEncoding()

    rows = []
    for bits in input_combinations(kind.arity):
        total = bias.i_b1 + sum(enc.level(b) for b in bits)
        output = int(bias.i_b2 > critical_current(table, abs(total)))
        rows.append(TruthRow(inputs=bits, output=output, i_gate_total=total))
    return rows


class _WindowProblem:
    """Checks whether a gate bias realizes the ideal function on every input row."""

    def __init__(self, kind, table, enc, i_b2):
        self.kind = kind
        self.table = table
        self.i_b2 = i_b2
        combos = input_combinations(kind.arity)
        self.sums = np.array([sum(enc.level(b) for b in bits) for bits in combos])
        self.expected = np.array([kind.ideal(bits) == 1 for bits in combos])

    def realizes(self, i_b1) -> np.ndarray:
        totals = np.abs(np.add.outer(np.atleast_1d(i_b1), self.sums))
        switched = self.i_b2 > critical_current(self.table, totals)
        return np.all(switched == self.expected, axis=-1)

    def realizes_one(self, i_b1: float) -> bool:
        return bool(self.realizes(i_b1)[0])

    def boundaries(self) -> list[float]:
        """Biases at which some row sits exactly on the switching threshold."""
        g_crit = switching_threshold(self.table, self.i_b2)
        if not math.isfinite(g_crit):
            return []
        points = set()
        for s in self.sums.tolist():
            points.add(g_crit - s)
            points.add(-g_crit - s)
        return sorted(points)

    def refine_edge(self, inside: float, outside: float) -> tuple[float, bool]:
        """Exact window edge between an in-window and an out-of-window grid point."""
        low, high = min(inside, outside), max(inside, outside)
        points = sorted(
            (c for c in self.boundaries() if low <= c <= high),
            key=lambda c: abs(c - inside),
        )
        for index, point in enumerate(points):
            if not self.realizes_one(point):
                return point, False
            beyond = points[index + 1] if index + 1 < len(points) else outside
            if not self.realizes_one((point + beyond) / 2):
                return point, True
        return inside, True


def bias_window(
    kind: GateKind,
    table: CalibrationTable,
    enc: typing.Optional[LogicEncoding] = None,
    sweep: tuple[float, float, float] = (-200.0, 200.0, 1.0),
    i_b2: float = DEFAULT_I_B2,
) -> BiasWindow:
    """Sweep I_B1 over a grid and collect the ranges that realize the gate's function."""
    lo, hi, step = sweep
    if not step > 0:
        raise ConfigurationError(f"Sweep step {step} μA must be > 0.")
    if hi < lo:
        raise ConfigurationError(f"Sweep range {lo}..{hi} μA is empty.")

    problem = _WindowProblem(kind, table, enc or LogicEncoding(), i_b2)
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    grid = lo + step * np.arange(count)
    ok = problem.realizes(grid)

    intervals = []
    index = 0
    while index < count:
        if not ok[index]:
            index += 1
            continue
        start = index
        while index + 1 < count and ok[index + 1]:
            index += 1
        end = index

        if start == 0:
            left, left_closed = float(grid[0]), True
        else:
            left, left_closed = problem.refine_edge(grid[start], grid[start - 1])
        if end == count - 1:
            right, right_closed = float(grid[-1]), True
        else:
            right, right_closed = problem.refine_edge(grid[end], grid[end + 1])

        intervals.append(
            Interval(float(left), float(right), left_closed, right_closed)
        )
        index += 1

    window = BiasWindow(kind=kind, intervals=tuple(intervals))
    logger.debug("Bias window %s over %d grid points.", window, count)
    return window
