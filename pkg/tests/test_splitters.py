import itertools
import math
import random

import pytest

from htron_logic.gates import GateKind
from htron_logic.netlist import hnl
from htron_logic.netlist.models import structurally_equal, validate
from htron_logic.netlist.splitters import insert_splitters
from htron_logic.simulator import steady_state

from conftest import ideal_outputs, random_fanout_netlist

TWO_READERS = """\
input a b;
gate g1 AND2 a b -> y;
gate g2 NOT y -> p;
gate g3 NOT y -> q;
output p q;
"""

FOUR_READERS = """\
input a b;
gate g1 OR2 a b -> y;
gate r1 NOT y -> p1;
gate r2 NOT y -> p2;
gate r3 NOT y -> p3;
gate r4 NOT y -> p4;
output p1 p2 p3 p4;
"""


def _copies(netlist):
    return [g for g in netlist.gates if g.kind is GateKind.COPY]


def _assert_same_function(before, after, table):
    for bits in itertools.product((0, 1), repeat=len(before.primary_inputs)):
        assert steady_state(after, bits, table) == steady_state(before, bits, table)


def test_compliant_netlist_is_unchanged():
    netlist = hnl.parse("input a b; gate g1 AND2 a b -> y; gate g2 NOT y -> z; output z;")
    assert structurally_equal(insert_splitters(netlist), netlist)


def test_two_readers_get_two_copies(threshold_table):
    before = hnl.parse(TWO_READERS, allow_fanout=True)
    after = insert_splitters(before)

    copies = _copies(after)
    assert len(copies) == 2
    assert all(c.inputs == ("y",) for c in copies)
    readers = {after.gate_by_id["g2"].inputs[0], after.gate_by_id["g3"].inputs[0]}
    assert readers == {c.output for c in copies}

    validate(after)
    _assert_same_function(before, after, threshold_table)


def test_fanout_four_builds_depth_two_tree(threshold_table):
    before = hnl.parse(FOUR_READERS, allow_fanout=True)
    after = insert_splitters(before)

    assert len(_copies(after)) == 6
    assert after.depth() == before.depth() + 2
    for pins in after.readers.values():
        assert len(pins) == 1 or all(g.kind is GateKind.COPY for g, _ in pins)
    _assert_same_function(before, after, threshold_table)


def test_primary_input_fanout_is_split(threshold_table):
    before = hnl.parse(
        "input a b; gate g1 AND2 a b -> y; gate g2 OR2 a y -> z; output z;",
        allow_fanout=True,
    )
    after = insert_splitters(before)
    assert len(_copies(after)) == 2
    _assert_same_function(before, after, threshold_table)


def test_copy_splitter_stage_is_left_alone():
    netlist = hnl.parse("input a; gate s1 COPY a -> p; gate s2 COPY a -> q; output p q;")
    assert structurally_equal(insert_splitters(netlist), netlist)


def test_wider_splitters_need_fewer_copies():
    before = hnl.parse(FOUR_READERS, allow_fanout=True)
    after = insert_splitters(before, splitter_fanout=4)
    assert len(_copies(after)) == 4
    assert after.depth() == before.depth() + 1


def test_splitter_names_are_deterministic_and_unique():
    before = hnl.parse(FOUR_READERS, allow_fanout=True)
    first = hnl.serialize(insert_splitters(before))
    second = hnl.serialize(insert_splitters(before))
    assert first == second

    after = insert_splitters(before)
    ids = [g.id for g in after.gates]
    assert len(ids) == len(set(ids))


def test_splitter_fanout_must_be_at_least_two():
    with pytest.raises(ValueError):
        insert_splitters(hnl.parse(TWO_READERS, allow_fanout=True), splitter_fanout=1)


def test_legalized_random_netlists_keep_function_and_bounded_depth(threshold_table):
    rng = random.Random(13)
    for index in range(40):
        original = random_fanout_netlist(rng, index=index)
        legal = insert_splitters(original)
        fanout = max(len(pins) for pins in original.readers.values())
        assert original.depth() <= legal.depth() <= original.depth() + math.ceil(math.log2(fanout))
        for bits in itertools.product((0, 1), repeat=len(original.primary_inputs)):
            assert steady_state(legal, bits, threshold_table) == ideal_outputs(original, bits)
