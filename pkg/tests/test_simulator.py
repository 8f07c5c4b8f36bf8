import itertools
import random

import numpy as np
import pytest

from htron_logic.device.models import DeviceParams, Phase
from htron_logic.errors import NetlistError, ResetViolationError, StimulusError
from htron_logic.gates import GateKind
from htron_logic.netlist import hnl
from htron_logic.netlist.splitters import insert_splitters
from htron_logic.simulator import (
    SimConfig,
    Stimulus,
    max_clock_estimate,
    read_stimulus_csv,
    settle,
    settle_time,
    simulate,
    steady_state,
)

from conftest import ideal_outputs, random_fanout_netlist, random_netlist, single_gate

NS = 1e-9
STEERED = 55 * 100e3 / 101e3


def _copy_pulse(*extra):
    return Stimulus({"a": ((0, 0), (1 * NS, 55), (5 * NS, 0)) + extra})


def test_copy_turns_on_after_delay_and_off_after_reset(threshold_table):
    netlist = single_gate(GateKind.COPY)
    trace = simulate(netlist, _copy_pulse(), threshold_table, SimConfig(t_end=25 * NS))

    y = trace.currents["y"]
    # 1 ns + 300 ps turn-on delay
    assert y[25] == 0
    assert y[26] == pytest.approx(STEERED)
    # 5 ns + 15 ns reset
    assert y[399] == pytest.approx(STEERED)
    assert y[400] == 0

    states = trace.states["g1"]
    assert states[20] == Phase.SWITCHING_ON
    assert states[100] == Phase.RESETTING
    assert trace.v_load["g1"][50] == pytest.approx(STEERED * 1e3 / 1000)
    assert trace.output_bits(netlist, sample=200) == (1,)
    assert trace.output_bits(netlist) == (0,)
    assert trace.times[40] == pytest.approx(2 * NS)
    assert not trace.violations


def test_default_end_time_covers_settling(threshold_table):
    netlist = single_gate(GateKind.COPY)
    trace = simulate(netlist, _copy_pulse(), threshold_table)
    expected = 5 * NS + settle_time(netlist, DeviceParams())
    assert trace.times[-1] == pytest.approx(expected, abs=50e-12)


def test_not_chain_never_glitches(threshold_table):
    netlist = hnl.parse("input x; gate g1 NOT x -> m; gate g2 NOT m -> y; output y;")
    trace = simulate(netlist, Stimulus.constant({"x": 0.0}), threshold_table)
    assert trace.currents["m"][-1] == pytest.approx(STEERED)
    assert not trace.currents["y"].any()


def test_quiet_and_gate_stays_off(threshold_table):
    netlist = single_gate(GateKind.AND2)
    trace = simulate(netlist, Stimulus.constant({"a": 0.0, "b": 0.0}), threshold_table)
    assert not trace.currents["y"].any()
    assert (trace.states["g1"] == Phase.SUPERCONDUCTING).all()


def test_simulation_is_deterministic(threshold_table):
    netlist = single_gate(GateKind.OR2)
    stimulus = Stimulus.from_vectors(["a", "b"], [(0, 0), (1, 0), (0, 0), (1, 1)], 20 * NS)
    first = simulate(netlist, stimulus, threshold_table)
    second = simulate(netlist, stimulus, threshold_table)
    for net in first.currents:
        assert np.array_equal(first.currents[net], second.currents[net])
    assert first.violations == second.violations


def test_retrigger_during_reset_is_reported(threshold_table):
    netlist = single_gate(GateKind.COPY)
    stimulus = _copy_pulse((10 * NS, 55))
    trace = simulate(netlist, stimulus, threshold_table)
    assert len(trace.violations) == 1
    gate_id, t = trace.violations[0]
    assert gate_id == "g1"
    assert t == pytest.approx(10 * NS)

    with pytest.raises(ResetViolationError, match="g1"):
        simulate(netlist, stimulus, threshold_table, SimConfig(strict=True))


def test_settle_matches_steady_state_on_random_netlists(threshold_table):
    rng = random.Random(7)
    for index in range(50):
        netlist = random_netlist(rng, index=index)
        vectors = list(itertools.product((0, 1), repeat=len(netlist.primary_inputs)))
        transient = settle(netlist, vectors, threshold_table)
        for bits, outputs in zip(vectors, transient):
            expected = ideal_outputs(netlist, bits)
            assert steady_state(netlist, bits, threshold_table) == expected
            assert outputs == expected, hnl.serialize(netlist)


def test_settle_matches_steady_state_after_splitter_insertion(threshold_table):
    rng = random.Random(17)
    for index in range(20):
        original = random_fanout_netlist(rng, index=index)
        netlist = insert_splitters(original)
        vectors = list(itertools.product((0, 1), repeat=len(netlist.primary_inputs)))
        transient = settle(netlist, vectors, threshold_table)
        for bits, outputs in zip(vectors, transient):
            expected = ideal_outputs(original, bits)
            assert steady_state(netlist, bits, threshold_table) == expected
            assert outputs == expected, hnl.serialize(netlist)


def test_not_chain_follows_a_pulse_train(threshold_table):
    netlist = hnl.parse("input x; gate g1 NOT x -> m; gate g2 NOT m -> y; output y;")
    edges = [(0, 0), (20, 1), (60, 0), (100, 1), (140, 0)]
    stimulus = Stimulus({"x": tuple((t * NS, 55.0 * bit) for t, bit in edges)})
    trace = simulate(netlist, stimulus, threshold_table)
    assert not trace.violations

    y = np.array([1 if i > 27.5 else 0 for i in trace.currents["y"]])
    # just before the next edge every stage has settled
    for (_, bit), (t_next, _) in zip(edges, edges[1:]):
        assert y[round((t_next - 1) * NS / trace.dt)] == bit
    assert y[-1] == edges[-1][1]
    assert np.count_nonzero(np.diff(y)) == len(edges) - 1


def test_steady_state_of_single_gates(threshold_table):
    assert steady_state(single_gate(GateKind.AND2), (1, 1), threshold_table) == (1,)
    assert steady_state(single_gate(GateKind.AND2), (0, 1), threshold_table) == (0,)
    assert steady_state(single_gate(GateKind.MAJ3), {"a": 1, "b": 0, "c": 1}, threshold_table) == (1,)
    assert steady_state(single_gate(GateKind.NOT), [0], threshold_table) == (1,)


def test_steady_state_input_errors(threshold_table):
    netlist = single_gate(GateKind.AND2)
    with pytest.raises(StimulusError):
        steady_state(netlist, (1,), threshold_table)
    with pytest.raises(StimulusError, match="b"):
        steady_state(netlist, {"a": 1}, threshold_table)
    with pytest.raises(StimulusError, match="unknown"):
        steady_state(netlist, {"a": 1, "b": 0, "z": 1}, threshold_table)


def test_max_clock_estimate():
    netlist = single_gate(GateKind.AND2)
    assert max_clock_estimate(netlist) == pytest.approx(65.36e6, rel=1e-3)
    assert max_clock_estimate(netlist, DeviceParams.preset("nbn")) > max_clock_estimate(netlist)

    wire = hnl.parse("input a; output a;")
    with pytest.raises(NetlistError):
        max_clock_estimate(wire)


def test_stimulus_validation():
    with pytest.raises(StimulusError, match="t = 0"):
        Stimulus({"a": ((1 * NS, 0),)})
    with pytest.raises(StimulusError, match="strictly"):
        Stimulus({"a": ((0, 0), (2 * NS, 55), (2 * NS, 0))})
    with pytest.raises(StimulusError):
        Stimulus({"a": ((0, float("nan")),)})
    with pytest.raises(StimulusError):
        Stimulus({"a": ()})


def test_stimulus_samples():
    stimulus = Stimulus({"a": ((0, 0), (0.1 * NS, 55), (0.175 * NS, 10))})
    assert stimulus.samples("a", 6, 50e-12).tolist() == [0, 0, 55, 55, 10, 10]
    assert stimulus.last_breakpoint == pytest.approx(0.175 * NS)


def test_simulate_input_errors(threshold_table):
    netlist = single_gate(GateKind.AND2)
    with pytest.raises(StimulusError, match="b"):
        simulate(netlist, Stimulus.constant({"a": 0}), threshold_table)
    with pytest.raises(StimulusError, match="before the last breakpoint"):
        simulate(
            netlist,
            Stimulus({"a": ((0, 0), (10 * NS, 55)), "b": ((0, 0),)}),
            threshold_table,
            SimConfig(t_end=5 * NS),
        )


def test_vectors_need_matching_width():
    with pytest.raises(StimulusError):
        Stimulus.from_vectors(["a", "b"], [(0,)], 10 * NS)
    with pytest.raises(StimulusError):
        Stimulus.from_vectors(["a"], [(0,)], 0)


def test_read_stimulus_csv(tmp_path):
    path = tmp_path / "stim.csv"
    path.write_text("t_ns\n0,a=0,b=0\n1,a=55\n5,a=0,b=55\n")
    stimulus = read_stimulus_csv(path)
    assert np.allclose(stimulus.waveforms["a"], [(0, 0), (1e-9, 55), (5e-9, 0)])
    assert np.allclose(stimulus.waveforms["b"], [(0, 0), (5e-9, 55)])

    path.write_text("time,a=0\n")
    with pytest.raises(StimulusError, match="t_ns"):
        read_stimulus_csv(path)

    path.write_text("t_ns\n0,a:0\n")
    with pytest.raises(StimulusError, match="line 2"):
        read_stimulus_csv(path)
