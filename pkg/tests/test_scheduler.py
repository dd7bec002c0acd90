import json
import math

import numpy as np
import pytest

from ddforge.benchmarks import bv_circuit
from ddforge.circuit import Circuit
from ddforge.gates import Gate
from ddforge.rzx import rewrite_to_rzx
from ddforge.scheduler import DurationTable, ScheduleError, idle_windows, schedule_asap, total_duration
from ddforge.transpile import BasisSet, decompose_to_basis

from conftest import random_circuit

TABLE = DurationTable.default()


def sched_of(n, ops):
    return schedule_asap(Circuit(n, tuple(ops)), TABLE)


def test_default_table_values():
    assert TABLE.table["RZ"] == 0
    assert TABLE.table["X"] == TABLE.table["SX"] == 160
    assert TABLE.table["CX"] == 1088
    assert TABLE.table["MEASURE"] == 5440
    assert TABLE.dt_ns == pytest.approx(0.2)


def test_disjoint_gates_start_together():
    s = sched_of(2, [Gate("X", (0,)), Gate("X", (1,))])
    assert s.start_times == (0, 0)
    assert total_duration(s) == 160


def test_cx_example_and_its_window():
    s = sched_of(3, [Gate("CX", (0, 1)), Gate("X", (2,)), Gate("CX", (1, 2))])
    assert s.start_times == (0, 0, 1088)
    windows = idle_windows(s)
    assert [(w.qubit, w.start, w.length) for w in windows] == [(2, 160, 928)]
    assert windows[0].left == 1 and windows[0].right == 2


def test_rz_is_free():
    s = sched_of(1, [Gate("RZ", (0,), (0.3,)), Gate("X", (0,))])
    assert s.start_times == (0, 0)


def test_back_to_back_has_no_window():
    assert idle_windows(sched_of(1, [Gate("X", (0,)), Gate("X", (0,))])) == []


def test_empty_circuit():
    assert total_duration(sched_of(2, [])) == 0


def test_bv3_has_window_next_to_ancilla():
    lowered = decompose_to_basis(bv_circuit("111"), BasisSet.CX_BASIS)
    windows = idle_windows(schedule_asap(lowered, TABLE))
    # q2 waits for the CXs from q0 and q1 to clear the ancilla
    assert any(w.qubit == 2 for w in windows)


def test_rzz_pi3_durations():
    c = Circuit(2, (Gate("RZZ", (0, 1), (math.pi / 3,)),))
    cx = schedule_asap(decompose_to_basis(c, BasisSet.CX_BASIS), TABLE)
    pe = schedule_asap(rewrite_to_rzx(c, TABLE), TABLE)
    assert total_duration(cx) == 2176
    assert abs(total_duration(pe) - 1025) <= 0.02 * 1025


def test_missing_duration_raises():
    table = DurationTable({"RZ": 0, "X": 160})
    with pytest.raises(ScheduleError):
        schedule_asap(Circuit(2, (Gate("CX", (0, 1)),)), table)


def test_table_invariants():
    with pytest.raises(ValueError):
        DurationTable({"RZ": 5})
    with pytest.raises(ValueError):
        DurationTable({"X": -1})
    with pytest.raises(ValueError):
        DurationTable({"RZ": 0}, rzx_alpha=1.0, rzx_beta=-2.0)


def test_rzx_duration_monotone():
    thetas = np.linspace(0, math.pi, 200)
    d = [TABLE.rzx_duration(t) for t in thetas]
    assert all(a <= b for a, b in zip(d, d[1:]))
    assert TABLE.rzx_duration(-0.5) == TABLE.rzx_duration(0.5)


def test_table_from_file(tmp_path):
    path = tmp_path / "dev.ini"
    path.write_text(
        "[device]\ndt_ns = 0.5\n"
        "[durations]\nRZ = 0\nX = 100\nSX = 50\nCX = 700\nMEASURE = 2000\n"
        "[rzx]\nalpha = 10\nbeta = 100\n"
    )
    t = DurationTable.from_file(path)
    assert t.table["X"] == 100 and t.table["CX"] == 700
    assert t.rzx_duration(1.0) == 110
    assert t.dt_to_us(2000) == pytest.approx(1.0)


def test_dump_is_index_to_start():
    s = sched_of(3, [Gate("CX", (0, 1)), Gate("X", (2,)), Gate("CX", (1, 2))])
    assert json.loads(s.dump()) == {"0": 0, "1": 0, "2": 1088}


def _check_invariants(s):
    total = total_duration(s)
    for q in range(s.num_qubits):
        busy = s.qubit_busy_intervals(q)
        for (a0, a1), (b0, b1) in zip(busy, busy[1:]):
            assert a1 <= b0
        for a, b in busy:
            assert b <= total
        if busy:
            span = busy[-1][1] - busy[0][0]
            idle = sum(b0 - a1 for (_, a1), (b0, _) in zip(busy, busy[1:]))
            assert sum(b - a for a, b in busy) + idle == span
    for i, op in enumerate(s.ops):
        if op.num_qubits == 2:
            for q in op.qubits:
                assert (s.start_times[i], s.end_time(i)) in s.qubit_busy_intervals(q)


def test_schedule_invariants_random(rng):
    for _ in range(200):
        n = int(rng.integers(1, 6))
        c = decompose_to_basis(random_circuit(rng, n, int(rng.integers(0, 30))), BasisSet.CX_BASIS)
        s = schedule_asap(c, TABLE)
        _check_invariants(s)
        assert schedule_asap(s.circuit, TABLE).start_times == s.start_times
        for w in idle_windows(s):
            assert w.length > 0
            assert s.end_time(w.left) == w.start and s.start_times[w.right] == w.end


def test_removing_gate_never_lengthens(rng):
    for _ in range(100):
        c = decompose_to_basis(random_circuit(rng, 4, 20), BasisSet.CX_BASIS)
        if not c.ops:
            continue
        full = total_duration(schedule_asap(c, TABLE))
        k = int(rng.integers(len(c.ops)))
        shorter = c.replace(c.ops[:k] + c.ops[k + 1 :])
        assert total_duration(schedule_asap(shorter, TABLE)) <= full


def test_windows_skip_measure_and_leading_idle():
    ops = [Gate("X", (0,)), Gate("CX", (0, 1)), Gate("MEASURE", (0,)), Gate("X", (1,)), Gate("X", (1,)), Gate("MEASURE", (1,))]
    s = sched_of(2, [Gate("RZ", (1,), (0.2,))] + ops)
    # q1 is idle before the CX, but that is leading idle; nothing else has a gap
    assert idle_windows(s) == []
