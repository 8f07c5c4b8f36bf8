import dataclasses
import logging

from htron_logic.gates import GateKind
from htron_logic.netlist.models import (
    DEFAULT_SPLITTER_FANOUT,
    Gate,
    Netlist,
    is_fanout_legal,
    validate,
)

logger = logging.getLogger(__name__)


class _Names:
    """Hands out gate ids and net names that do not clash with the netlist."""

    def __init__(self, netlist: Netlist):
        self._used = set(netlist.nets) | {g.id for g in netlist.gates}
        self._used |= {n for g in netlist.gates for n in g.inputs}

    def fresh(self, base: str) -> str:
        index = 0
        while f"{base}{index}" in self._used:
            index += 1
        name = f"{base}{index}"
        self._used.add(name)
        return name


def _chunks(items: list, parts: int) -> list[list]:
    """Split into `parts` groups whose sizes differ by at most one."""
    size, extra = divmod(len(items), parts)
    result = []
    start = 0
    for index in range(parts):
        end = start + size + (1 if index < extra else 0)
        result.append(items[start:end])
        start = end
    return result


def insert_splitters(
    netlist: Netlist, splitter_fanout: int = DEFAULT_SPLITTER_FANOUT
) -> Netlist:
    """Replace every multi-reader net by a balanced tree of COPY gates.

    The source net feeds a splitter stage of up to `splitter_fanout` COPY gates; every
    leaf COPY drives exactly one of the original readers.
    """
    if splitter_fanout < 2:
        raise ValueError("A splitter must drive at least two readers.")

    names = _Names(netlist)
    rewired: dict[tuple[str, int], str] = {}
    added: list[Gate] = []

    def split(source: str, pins: list[tuple[Gate, int]]) -> None:
        groups = _chunks(pins, min(splitter_fanout, len(pins)))
        for group in groups:
            out = names.fresh(f"{source}_s")
            gate_id = names.fresh(f"split_{source}_")
            added.append(Gate.nominal(gate_id, GateKind.COPY, (source,), out))
            if len(group) == 1:
                gate, pin = group[0]
                rewired[(gate.id, pin)] = out
            else:
                split(out, group)

    for net, pins in netlist.readers.items():
        if is_fanout_legal(pins, splitter_fanout):
            continue
        split(net, pins)
        logger.info("Net '%s' fans out to %d readers; splitter tree added.", net, len(pins))

    if not added:
        return validate(netlist, splitter_fanout=splitter_fanout)

    gates = []
    for gate in netlist.gates:
        inputs = tuple(rewired.get((gate.id, pin), net) for pin, net in enumerate(gate.inputs))
        gates.append(dataclasses.replace(gate, inputs=inputs))

    result = dataclasses.replace(netlist, gates=tuple(gates) + tuple(added))
    return validate(result, splitter_fanout=splitter_fanout)
