import pathlib
import random

import numpy as np
import pytest

from htron_logic.device.models import CalibrationTable, Spread, SwitchingSampleSet
from htron_logic.gates import BiasConfig, GateKind, LogicEncoding, bias_for
from htron_logic.netlist.models import Gate, Netlist, build

REPO_DIR = pathlib.Path(__file__).parent.parent
SHIPPED_CONFIG = REPO_DIR / "htron_logic.cfg"

SAMPLE_POINTS = np.arange(0.0, 400.5, 0.5)


@pytest.fixture
def threshold_table() -> CalibrationTable:
    """Flat at 55 μA up to the 110 μA gate critical current."""
    return CalibrationTable(((110.0, 55.0), (135.0, 30.0)))


@pytest.fixture
def linear_table() -> CalibrationTable:
    """Critical current 165 - I_G; also switches 55 μA at 110 μA."""
    return CalibrationTable(((0.0, 165.0), (160.0, 5.0)))


@pytest.fixture
def enc() -> LogicEncoding:
    return LogicEncoding()


def median_samples(table: CalibrationTable) -> SwitchingSampleSet:
    return SwitchingSampleSet.synthesize(table, SAMPLE_POINTS, Spread(), count=1)


@pytest.fixture
def threshold_samples(threshold_table) -> SwitchingSampleSet:
    return median_samples(threshold_table)


@pytest.fixture
def linear_samples(linear_table) -> SwitchingSampleSet:
    return median_samples(linear_table)


def single_gate(kind: GateKind, i_b1=None) -> Netlist:
    inputs = ["a", "b", "c"][: kind.arity]
    bias = bias_for(kind) if i_b1 is None else BiasConfig(kind, i_b1)
    gate = Gate("g1", kind, tuple(inputs), "y", bias)
    return build(kind.value.lower(), inputs, ["y"], [gate])


def random_netlist(
    rng: random.Random,
    max_inputs: int = 6,
    max_gates: int = 12,
    random_bias: bool = False,
    index: int = 0,
) -> Netlist:
    """A valid netlist in which every net has at most one reader."""
    n_inputs = rng.randint(1, max_inputs)
    inputs = [f"x{i}" for i in range(n_inputs)]
    unread = list(inputs)
    ties = []
    if rng.random() < 0.2:
        ties.append(("k0", rng.randint(0, 1)))
        unread.append("k0")

    gates = []
    kinds = list(GateKind)
    for g in range(rng.randint(1, max_gates)):
        options = [k for k in kinds if k.arity <= len(unread)]
        if not options:
            break
        kind = rng.choice(options)
        chosen = rng.sample(unread, kind.arity)
        for net in chosen:
            unread.remove(net)
        if random_bias:
            bias = BiasConfig(
                kind,
                float(rng.randint(-200, 200)),
                rng.choice([55.0, 55.0, 60.5]),
                rng.choice([1e3, 1e3, 2e3]),
            )
        else:
            bias = bias_for(kind)
        output = f"n{g}"
        gates.append(Gate(f"g{g}", kind, tuple(chosen), output, bias))
        unread.append(output)

    outputs = [g.output for g in gates if g.output in unread] or [inputs[0]]
    return build(f"rand{index}", inputs, outputs, gates, ties)


def ideal_outputs(netlist: Netlist, bits) -> tuple[int, ...]:
    """Outputs from composing each gate's Boolean function."""
    values = dict(zip(netlist.primary_inputs, bits))
    values.update(netlist.tie_levels)
    for gate in netlist.gates:
        values[gate.output] = gate.kind.ideal([values[n] for n in gate.inputs])
    return tuple(values[n] for n in netlist.primary_outputs)


def random_fanout_netlist(rng: random.Random, max_inputs: int = 4, max_gates: int = 10, index: int = 0) -> Netlist:
    """A netlist whose primary inputs may have several readers; gate outputs have at most one."""
    n_inputs = rng.randint(1, max_inputs)
    inputs = [f"x{i}" for i in range(n_inputs)]
    unread: list[str] = []

    gates = []
    kinds = list(GateKind)
    for g in range(rng.randint(1, max_gates)):
        pool = inputs + unread
        kind = rng.choice([k for k in kinds if k.arity <= len(pool)])
        chosen = rng.sample(pool, kind.arity)
        for net in chosen:
            if net in unread:
                unread.remove(net)
        output = f"n{g}"
        gates.append(Gate(f"g{g}", kind, tuple(chosen), output, bias_for(kind)))
        unread.append(output)

    return build(f"fan{index}", inputs, unread, gates, allow_fanout=True)
