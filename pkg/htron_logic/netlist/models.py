import dataclasses
import functools
import logging
import typing

import networkx as nx

from htron_logic.errors import NetlistError
from htron_logic.gates import BiasConfig, GateKind, bias_for

logger = logging.getLogger(__name__)

DEFAULT_SPLITTER_FANOUT = 2

Location = tuple[int, int]


@dataclasses.dataclass(frozen=True)
class Gate:
    id: str
    kind: GateKind
    inputs: tuple[str, ...]
    output: str
    bias: BiasConfig

    @classmethod
    def nominal(cls, gate_id: str, kind: GateKind, inputs, output: str) -> "Gate":
        """A gate at the kind's nominal bias point."""
        return cls(gate_id, kind, tuple(inputs), output, bias_for(kind))


@dataclasses.dataclass(frozen=True)
class Netlist:
    name: str
    primary_inputs: tuple[str, ...]
    primary_outputs: tuple[str, ...]
    gates: tuple[Gate, ...]
    ties: tuple[tuple[str, int], ...] = ()
    """Nets held at a constant logic level by a stimulus current."""

    @functools.cached_property
    def gate_by_id(self) -> dict[str, Gate]:
        return {g.id: g for g in self.gates}

    @functools.cached_property
    def driver_of(self) -> dict[str, typing.Optional[Gate]]:
        """Driving gate per net; None for primary inputs and ties."""
        result: dict[str, typing.Optional[Gate]] = {}
        for net in self.primary_inputs:
            result[net] = None
        for net, _ in self.ties:
            result[net] = None
        for gate in self.gates:
            result[gate.output] = gate
        return result

    @functools.cached_property
    def readers(self) -> dict[str, list[tuple[Gate, int]]]:
        """Reading gate pins per net."""
        result: dict[str, list[tuple[Gate, int]]] = {}
        for gate in self.gates:
            for pin, net in enumerate(gate.inputs):
                result.setdefault(net, []).append((gate, pin))
        return result

    @property
    def nets(self) -> list[str]:
        return list(self.driver_of)

    @property
    def tie_levels(self) -> dict[str, int]:
        return dict(self.ties)

    def graph(self) -> nx.DiGraph:
        """Gate-level dependency graph."""
        graph = nx.DiGraph()
        for gate in self.gates:
            graph.add_node(gate.id)
        for gate in self.gates:
            for net in gate.inputs:
                driver = self.driver_of.get(net)
                if driver is not None:
                    graph.add_edge(driver.id, gate.id)
        return graph

    @functools.cached_property
    def levels(self) -> dict[str, int]:
        """Logic level of every gate output; primary inputs and ties are level 0."""
        result = {net: 0 for net in self.primary_inputs}
        result.update({net: 0 for net, _ in self.ties})
        order = nx.topological_sort(self.graph())
        for gate_id in order:
            gate = self.gate_by_id[gate_id]
            result[gate.output] = 1 + max((result[n] for n in gate.inputs), default=0)
        return result

    def depth(self) -> int:
        """Longest primary-input to primary-output path, in gates."""
        return max((self.levels.get(n, 0) for n in self.primary_outputs), default=0)


def validate(
    netlist: Netlist,
    allow_fanout: bool = False,
    splitter_fanout: int = DEFAULT_SPLITTER_FANOUT,
    locations: typing.Optional[typing.Mapping[tuple, Location]] = None,
) -> Netlist:
    """Check the structural rules and return the netlist with gates in topological order."""
    locations = locations or {}

    def fail(message: str, key: typing.Optional[tuple] = None):
        line, column = locations.get(key, (None, None)) if key else (None, None)
        raise NetlistError(message, line, column)

    seen_ids = set()
    for gate in netlist.gates:
        if gate.id in seen_ids:
            fail(f"gate id '{gate.id}' is used twice", ("gate", gate.id))
        seen_ids.add(gate.id)
        if len(gate.inputs) != gate.kind.arity:
            fail(
                f"gate '{gate.id}' of kind {gate.kind.value} takes "
                f"{gate.kind.arity} input(s), got {len(gate.inputs)}",
                ("gate", gate.id),
            )
        if gate.bias.kind is not gate.kind:
            fail(f"gate '{gate.id}' carries a {gate.bias.kind.value} bias", ("gate", gate.id))

    # every net has exactly one driver
    drivers: dict[str, tuple] = {}
    sources = [(n, ("input", n)) for n in netlist.primary_inputs]
    sources += [(n, ("tie", n)) for n, _ in netlist.ties]
    sources += [(g.output, ("gate", g.id)) for g in netlist.gates]
    for net, key in sources:
        if net in drivers:
            fail(f"net '{net}' has more than one driver", key)
        drivers[net] = key

    for net, level in netlist.ties:
        if level not in (0, 1):
            fail(f"tie '{net}' must be held at 0 or 1", ("tie", net))

    seen_outputs = set()
    for net in netlist.primary_outputs:
        if net in seen_outputs:
            fail(f"output '{net}' is declared twice", ("output", net))
        seen_outputs.add(net)
        if net not in drivers:
            fail(f"undeclared net '{net}'", ("output", net))

    for gate in netlist.gates:
        for pin, net in enumerate(gate.inputs):
            if net not in drivers:
                fail(f"undeclared net '{net}'", ("read", gate.id, pin))

    graph = netlist.graph()
    try:
        cycle = nx.find_cycle(graph)
    except nx.NetworkXNoCycle:
        cycle = None
    if cycle:
        members = " -> ".join(edge[0] for edge in cycle)
        fail(f"combinational cycle through gates {members}", ("gate", cycle[0][0]))

    if not allow_fanout:
        for net, pins in netlist.readers.items():
            if is_fanout_legal(pins, splitter_fanout):
                continue
            gate, pin = pins[1]
            fail(
                f"net '{net}' has {len(pins)} readers; fanout needs COPY splitters",
                ("read", gate.id, pin),
            )

    order = list(nx.lexicographical_topological_sort(graph, key=str))
    gates = tuple(netlist.gate_by_id[g] for g in order)
    return dataclasses.replace(netlist, gates=gates)


def is_fanout_legal(pins: list[tuple[Gate, int]], splitter_fanout: int) -> bool:
    """One reader, or a splitter stage of at most `splitter_fanout` COPY gates."""
    if len(pins) <= 1:
        return True
    return len(pins) <= splitter_fanout and all(g.kind is GateKind.COPY for g, _ in pins)


def build(
    name: str,
    primary_inputs: typing.Iterable[str],
    primary_outputs: typing.Iterable[str],
    gates: typing.Iterable[Gate],
    ties: typing.Iterable[tuple[str, int]] = (),
    **kwargs,
) -> Netlist:
    netlist = Netlist(
        name=name,
        primary_inputs=tuple(primary_inputs),
        primary_outputs=tuple(primary_outputs),
        gates=tuple(gates),
        ties=tuple(ties),
    )
    return validate(netlist, **kwargs)


def structurally_equal(a: Netlist, b: Netlist) -> bool:
    """Same interface, ties and gates, regardless of gate order."""
    return (
        a.name == b.name
        and a.primary_inputs == b.primary_inputs
        and a.primary_outputs == b.primary_outputs
        and sorted(a.ties) == sorted(b.ties)
        and a.gate_by_id == b.gate_by_id
    )
