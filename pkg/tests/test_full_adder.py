import pytest

import htron_logic.synth.full_adder as full_adder_module
from htron_logic.gates import GateKind
from htron_logic.netlist.models import validate
from htron_logic.simulator import steady_state
from htron_logic.synth.full_adder import (
    CARRY,
    SUM,
    benchmark,
    full_adder,
    full_adder_circuit,
    level_reduction,
    reference_carry,
    reference_sum,
)
from htron_logic.synth.mapper import Basis
from htron_logic.synth.verify import verify_equivalence

EXPECTED = {
    Basis.MAJ_NOT: (3, 5, 0.0),
    Basis.NAND2: (6, 9, 50.0),
    Basis.NOR2: (7, 12, 57.14),
}


def test_benchmark_rows():
    rows = benchmark()
    assert [r.basis for r in rows] == ["MAJ_NOT", "NAND2", "NOR2"]
    for row in rows:
        levels, cells, reduction = EXPECTED[Basis(row.basis)]
        assert (row.levels, row.gate_count, row.level_reduction_pct) == (levels, cells, reduction)
        assert row.htron_levels >= row.levels
        assert row.htron_gates >= row.gate_count


def test_majority_adder_is_shallowest():
    levels = {basis: full_adder(basis).report.levels for basis in EXPECTED}
    assert levels[Basis.MAJ_NOT] < levels[Basis.NAND2] < levels[Basis.NOR2]


@pytest.mark.parametrize("basis", list(Basis))
def test_adder_outputs_match_references(basis, threshold_table):
    adder = full_adder(basis)
    assert verify_equivalence(adder.sum, reference_sum(), threshold_table)
    assert verify_equivalence(adder.carry, reference_carry(), threshold_table)
    assert adder.sum.primary_outputs == (SUM,)
    assert adder.carry.primary_outputs == (CARRY,)


@pytest.mark.parametrize("basis", list(Basis))
def test_combined_adder_netlist(basis, threshold_table):
    netlist = validate(full_adder_circuit(basis).netlist)
    assert netlist.primary_outputs == (SUM, CARRY)
    assert steady_state(netlist, (1, 1, 0), threshold_table) == (0, 1)
    assert steady_state(netlist, (1, 0, 0), threshold_table) == (1, 0)
    assert steady_state(netlist, (1, 1, 1), threshold_table) == (1, 1)


def test_majority_adder_uses_three_majority_gates():
    netlist = full_adder_circuit(Basis.HTRON).netlist
    kinds = [g.kind for g in netlist.gates if g.kind is not GateKind.COPY]
    assert kinds.count(GateKind.MAJ3) == 3
    assert kinds.count(GateKind.NOT) == 2


def test_level_reduction():
    assert level_reduction(6, 3) == 50.0
    assert level_reduction(7, 3) == 57.14
    assert level_reduction(3, 3) == 0.0


def test_benchmark_builds_each_adder_once(monkeypatch):
    built = []
    original = full_adder_module.full_adder_circuit

    def counting(basis, *args, **kwargs):
        built.append(basis)
        return original(basis, *args, **kwargs)

    monkeypatch.setattr(full_adder_module, "full_adder_circuit", counting)
    benchmark()
    assert built == [Basis.MAJ_NOT, Basis.NAND2, Basis.NOR2]

    built.clear()
    rows = benchmark([Basis.NAND2])
    assert built == [Basis.NAND2, Basis.MAJ_NOT]
    assert rows[0].level_reduction_pct == 50.0
