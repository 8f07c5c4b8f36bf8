"""Hand-built one-bit full adders per basis, certified over all eight input vectors."""

import dataclasses
import logging
import typing

from htron_logic.netlist.models import DEFAULT_SPLITTER_FANOUT, Netlist
from htron_logic.synth.expr import maj, var, xor
from htron_logic.synth.mapper import Basis, CellBuilder, MappedCircuit, certify, lower

logger = logging.getLogger(__name__)

INPUTS = ("a", "b", "cin")
SUM = "s"
CARRY = "cout"

BENCH_BASES = (Basis.MAJ_NOT, Basis.NAND2, Basis.NOR2)

# majority logic is credited with up to this much less depth in arithmetic circuits
REPORTED_DEPTH_SAVING_PCT = 33.0


def reference_sum():
    return xor(*(var(n) for n in INPUTS))


def reference_carry():
    return maj(*(var(n) for n in INPUTS))


def _majority(builder: CellBuilder) -> tuple[str, str]:
    a, b, c = INPUTS
    carry = builder.cell("MAJ3", a, b, c)
    inner = builder.cell("MAJ3", a, b, builder.not_(c))
    total = builder.cell("MAJ3", builder.not_(carry), inner, c)
    return total, carry


def _nand(builder: CellBuilder) -> tuple[str, str]:
    a, b, c = INPUTS

    def nand(x, y):
        return builder.cell("NAND2", x, y)

    n1 = nand(a, b)
    half = nand(nand(a, n1), nand(b, n1))
    n5 = nand(half, c)
    total = nand(nand(half, n5), nand(c, n5))
    return total, nand(n5, n1)


def _nor(builder: CellBuilder) -> tuple[str, str]:
    a, b, c = INPUTS

    def nor(x, y):
        return builder.cell("NOR2", x, y)

    def half_adder(x, y):
        both = nor(builder.not_(x), builder.not_(y))
        return nor(nor(x, y), both), both

    half, carry1 = half_adder(a, b)
    total, carry2 = half_adder(half, c)
    return total, builder.not_(nor(carry1, carry2))


_CONSTRUCTIONS = {
    Basis.HTRON: _majority,
    Basis.MAJ_NOT: _majority,
    Basis.NAND2: _nand,
    Basis.NOR2: _nor,
}


@dataclasses.dataclass(frozen=True)
class AdderReport:
    basis: Basis
    levels: int
    gate_count: int
    htron_levels: int
    htron_gates: int


class FullAdder(typing.NamedTuple):
    sum: Netlist
    carry: Netlist
    report: AdderReport


def full_adder_circuit(
    basis: Basis, splitter_fanout: int = DEFAULT_SPLITTER_FANOUT
) -> MappedCircuit:
    builder = CellBuilder(basis, INPUTS)
    total, carry = _CONSTRUCTIONS[basis](builder)
    network = builder.network([(SUM, total), (CARRY, carry)])
    certify(network, {SUM: reference_sum(), CARRY: reference_carry()})
    netlist = lower(network, f"full_adder_{basis.value.lower()}", splitter_fanout)
    return MappedCircuit(basis=basis, network=network, netlist=netlist)


def full_adder(basis: Basis, splitter_fanout: int = DEFAULT_SPLITTER_FANOUT) -> FullAdder:
    circuit = full_adder_circuit(basis, splitter_fanout)
    name = f"full_adder_{basis.value.lower()}"
    sum_netlist = lower(circuit.network.cone(SUM), f"{name}_sum", splitter_fanout)
    carry_netlist = lower(circuit.network.cone(CARRY), f"{name}_carry", splitter_fanout)
    report = AdderReport(
        basis=basis,
        levels=circuit.levels,
        gate_count=circuit.gate_count,
        htron_levels=circuit.htron_levels,
        htron_gates=circuit.htron_gates,
    )
    return FullAdder(sum_netlist, carry_netlist, report)


def level_reduction(levels: int, reference_levels: int) -> float:
    """Percent fewer levels than the reference, rounded to two decimals."""
    return round(100 * (1 - reference_levels / levels), 2)


@dataclasses.dataclass(frozen=True)
class BenchRow:
    basis: str
    levels: int
    gate_count: int
    htron_levels: int
    htron_gates: int
    level_reduction_pct: float
    """Levels saved by the majority adder relative to this one."""


def benchmark(
    bases: typing.Iterable[Basis] = BENCH_BASES,
    splitter_fanout: int = DEFAULT_SPLITTER_FANOUT,
) -> list[BenchRow]:
    circuits = {b: full_adder_circuit(b, splitter_fanout) for b in bases}
    majority = circuits.get(Basis.MAJ_NOT)
    if majority is None:
        majority = full_adder_circuit(Basis.MAJ_NOT, splitter_fanout)
    rows = []
    for circuit in circuits.values():
        rows.append(
            BenchRow(
                basis=circuit.basis.value,
                levels=circuit.levels,
                gate_count=circuit.gate_count,
                htron_levels=circuit.htron_levels,
                htron_gates=circuit.htron_gates,
                level_reduction_pct=level_reduction(circuit.levels, majority.levels),
            )
        )
        logger.info(
            "Full adder in %s: %d levels, %d gates, majority saves %.2f%% of the levels.",
            circuit.basis.value,
            circuit.levels,
            circuit.gate_count,
            rows[-1].level_reduction_pct,
        )
    logger.info(
        "Majority logic is credited with up to %.0f%% less depth in arithmetic circuits.",
        REPORTED_DEPTH_SAVING_PCT,
    )
    return rows

