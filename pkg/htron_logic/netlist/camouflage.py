"""Layout-level view of a netlist in which every gate is the same three-input cell.

Kinds and biases only live in the bias currents, so the view keeps the cell count,
the wiring between cell pins and the order of the primary inputs and outputs.
"""

import dataclasses
import json
import logging

import networkx as nx
from networkx.algorithms import isomorphism

from htron_logic.netlist.models import Netlist

logger = logging.getLogger(__name__)

CELL = "HTRON_CELL"
CELL_PINS = 3

TERMINAL = "TERMINAL"
INPUT = "INPUT"
OUTPUT = "OUTPUT"


@dataclasses.dataclass(frozen=True)
class CamouflageView:
    name: str
    cells: tuple[str, ...]
    """Cell instance names; each one is an identical HTRON_CELL."""
    terminals: tuple[str, ...]
    """External input terminals: primary inputs, ties and grounded padding pins."""
    inputs: tuple[str, ...]
    """Primary-input terminals in declaration order; ties and padding stay anonymous."""
    outputs: tuple[str, ...]
    """Cells observed by the primary outputs, in output order."""
    wires: tuple[tuple[str, str, int], ...]
    """(source node, cell, pin) for every cell input pin."""

    def graph(self) -> nx.MultiDiGraph:
        graph = nx.MultiDiGraph()
        for cell in self.cells:
            graph.add_node(cell, role=CELL)
        for terminal in self.terminals:
            graph.add_node(terminal, role=TERMINAL)
        for index, terminal in enumerate(self.inputs):
            graph.add_node(terminal, role=INPUT, index=index)
        for index, source in enumerate(self.outputs):
            node = f"out{index}"
            graph.add_node(node, role=OUTPUT, index=index)
            graph.add_edge(source, node, pin=-1)
        for source, cell, pin in self.wires:
            graph.add_edge(source, cell, pin=pin)
        return graph


def camouflage_view(netlist: Netlist) -> CamouflageView:
    """Erase kinds and biases; pad every cell to three inputs with grounded terminals."""
    node_of: dict[str, str] = {}
    terminals = []
    for net in netlist.primary_inputs:
        node_of[net] = f"in:{net}"
        terminals.append(node_of[net])
    for net, _ in netlist.ties:
        node_of[net] = f"in:{net}"
        terminals.append(node_of[net])
    for gate in netlist.gates:
        node_of[gate.output] = f"cell:{gate.id}"

    cells = []
    wires = []
    for gate in netlist.gates:
        cell = f"cell:{gate.id}"
        cells.append(cell)
        for pin in range(CELL_PINS):
            if pin < len(gate.inputs):
                source = node_of[gate.inputs[pin]]
            else:
                source = f"gnd:{gate.id}.{pin}"
                terminals.append(source)
            wires.append((source, cell, pin))

    inputs = tuple(node_of[net] for net in netlist.primary_inputs)
    outputs = tuple(node_of[net] for net in netlist.primary_outputs)
    return CamouflageView(
        name=netlist.name,
        cells=tuple(cells),
        terminals=tuple(terminals),
        inputs=inputs,
        outputs=outputs,
        wires=tuple(wires),
    )


def _same_role(a: dict, b: dict) -> bool:
    return a.get("role") == b.get("role") and a.get("index") == b.get("index")


def _same_pins(a: dict, b: dict) -> bool:
    return sorted(e["pin"] for e in a.values()) == sorted(e["pin"] for e in b.values())


def views_identical(a: CamouflageView, b: CamouflageView) -> bool:
    """Is there a wiring isomorphism that keeps cell pins, input order and output order?"""
    if len(a.cells) != len(b.cells) or len(a.terminals) != len(b.terminals):
        return False
    if len(a.inputs) != len(b.inputs) or len(a.outputs) != len(b.outputs):
        return False
    matcher = isomorphism.MultiDiGraphMatcher(
        a.graph(), b.graph(), node_match=_same_role, edge_match=_same_pins
    )
    identical = matcher.is_isomorphic()
    logger.debug("Views '%s' and '%s' identical: %s.", a.name, b.name, identical)
    return identical


def to_json(view: CamouflageView) -> str:
    """Canonical text for diffing; the netlist name is left out."""
    data = {
        "cell": CELL,
        "pins": CELL_PINS,
        "cells": sorted(view.cells),
        "terminals": sorted(view.terminals),
        "inputs": list(view.inputs),
        "outputs": list(view.outputs),
        "wires": sorted([list(w) for w in view.wires]),
    }
    return json.dumps(data, sort_keys=True, indent=2) + "\n"
