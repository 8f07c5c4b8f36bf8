import pytest

from htron_logic.errors import ConfigurationError
from htron_logic.gates import (
    NOMINAL_I_B1,
    BiasConfig,
    GateKind,
    Interval,
    LogicEncoding,
    bias_for,
    bias_window,
    ideal,
    input_combinations,
    truth_table,
)

EXPECTED_OUTPUTS = {
    GateKind.COPY: [0, 1],
    GateKind.NOT: [1, 0],
    GateKind.AND2: [0, 0, 0, 1],
    GateKind.OR2: [0, 1, 1, 1],
    GateKind.MAJ3: [0, 0, 0, 1, 0, 1, 1, 1],
}

EXPECTED_WINDOWS = {
    GateKind.AND2: Interval(0, 55, False, True),
    GateKind.MAJ3: Interval(0, 55, False, True),
    GateKind.OR2: Interval(55, 110, False, True),
    GateKind.COPY: Interval(55, 110, False, True),
    GateKind.NOT: Interval(-165, -110, True, False),
}


@pytest.mark.parametrize("kind", list(GateKind))
def test_truth_tables_at_nominal_bias(kind, threshold_table):
    rows = truth_table(kind, bias_for(kind), threshold_table)
    assert [r.output for r in rows] == EXPECTED_OUTPUTS[kind]
    assert [r.output for r in rows] == [ideal(kind, r.inputs) for r in rows]


def test_truth_table_row_count(threshold_table):
    total = sum(len(truth_table(k, bias_for(k), threshold_table)) for k in GateKind)
    assert total == 20


def test_not_gate_total_current(threshold_table):
    rows = truth_table(GateKind.NOT, bias_for(GateKind.NOT), threshold_table)
    assert [r.i_gate_total for r in rows] == [-120, -65]
    assert [r.bits for r in rows] == ["0", "1"]


def test_truth_table_bias_kind_must_match(threshold_table):
    with pytest.raises(ConfigurationError):
        truth_table(GateKind.AND2, bias_for(GateKind.OR2), threshold_table)


@pytest.mark.parametrize("kind", list(GateKind))
def test_bias_windows(kind, threshold_table):
    window = bias_window(kind, threshold_table)
    assert window.intervals == (EXPECTED_WINDOWS[kind],)
    assert window.strictly_inside(NOMINAL_I_B1[kind])


def test_window_on_linear_device(linear_table):
    window = bias_window(GateKind.AND2, linear_table, sweep=(-200, 200, 0.5))
    assert str(window) == "AND2: (0, 55]"


def test_window_outside_sweep_is_empty(threshold_table):
    window = bias_window(GateKind.AND2, threshold_table, sweep=(60, 100, 1))
    assert window.is_empty
    assert str(window) == "AND2: empty"


def test_window_sweep_validation(threshold_table):
    with pytest.raises(ConfigurationError):
        bias_window(GateKind.AND2, threshold_table, sweep=(0, 10, 0))
    with pytest.raises(ConfigurationError):
        bias_window(GateKind.AND2, threshold_table, sweep=(10, 0, 1))


def test_interval_membership():
    interval = Interval(-165, -110, True, False)
    assert str(interval) == "[-165, -110)"
    assert interval.contains(-165)
    assert not interval.contains(-110)
    assert not interval.strictly_inside(-165)


def test_logic_encoding():
    enc = LogicEncoding()
    assert enc.detect_threshold == 27.5
    assert enc.level(1) == 55
    assert enc.read(54.4) == 1
    assert enc.read(10.0) == 0
    with pytest.raises(ConfigurationError):
        LogicEncoding(i_zero=0, i_one=55, detect_threshold=60)


def test_gate_kind_parse():
    assert GateKind.parse("and2") is GateKind.AND2
    assert GateKind.MAJ3.arity == 3
    with pytest.raises(ConfigurationError, match="XOR"):
        GateKind.parse("XOR")


def test_bias_config_validation():
    with pytest.raises(ConfigurationError):
        BiasConfig(GateKind.AND2, 10.0, i_b2=0.0)
    with pytest.raises(ConfigurationError):
        BiasConfig(GateKind.AND2, 10.0, r_load=-1.0)


def test_input_combinations_order():
    assert input_combinations(2) == [(0, 0), (0, 1), (1, 0), (1, 1)]


def test_majority_with_a_constant_input(threshold_table):
    enc = LogicEncoding()
    maj = bias_for(GateKind.MAJ3)
    for tied, kind in [(0, GateKind.AND2), (1, GateKind.OR2)]:
        folded = BiasConfig(kind, maj.i_b1 + enc.level(tied))
        assert folded.i_b1 == NOMINAL_I_B1[kind]
        rows = truth_table(GateKind.MAJ3, maj, threshold_table)
        reduced = [r.output for r in rows if r.inputs[2] == tied]
        assert reduced == [r.output for r in truth_table(kind, bias_for(kind), threshold_table)]


def test_copy_is_or_with_a_grounded_input(threshold_table):
    copy_rows = truth_table(GateKind.COPY, bias_for(GateKind.COPY), threshold_table)
    or_rows = truth_table(GateKind.OR2, bias_for(GateKind.OR2), threshold_table)
    assert [r.output for r in copy_rows] == [r.output for r in or_rows if r.inputs[1] == 0]


@pytest.mark.parametrize("kind", [GateKind.AND2, GateKind.OR2, GateKind.MAJ3])
def test_symmetric_gates_ignore_input_order(kind, threshold_table):
    rows = {r.inputs: r.output for r in truth_table(kind, bias_for(kind), threshold_table)}
    for inputs, output in rows.items():
        assert rows[tuple(reversed(inputs))] == output
