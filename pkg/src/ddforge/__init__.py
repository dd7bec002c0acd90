"""Dynamical-decoupling insertion, pulse-efficient RZX rewriting and noisy evaluation."""

from .benchmarks import (
    Graph,
    bv_circuit,
    erdos_renyi,
    graph_state_circuit,
    hs_circuit,
    maxcut_bruteforce,
    optimize_qaoa,
    qaoa_maxcut_ansatz,
    qft_circuit,
    random_regular_graph,
)
from .circuit import Circuit, equiv_up_to_phase, unitary_of
from .gates import Gate
from .metrics import MetricKind, approximation_ratio, jsd, pst, relative_report
from .noise import CountsResult, NoiseModel, effective_channel_fidelity, simulate
from .rzx import echoed_rzx, rewrite_to_rzx
from .scheduler import DurationTable, IdleWindow, ScheduledCircuit, idle_windows, schedule_asap, total_duration
from .sequences import DDSequence, InsertionReport, build_sequence, hahn_absorbable, insert_dd, kdd_expand, udd_positions
from .transpile import BasisSet, decompose_to_basis

__all__ = [
    "BasisSet", "Circuit", "CountsResult", "DDSequence", "DurationTable", "Gate", "Graph",
    "IdleWindow", "InsertionReport", "MetricKind", "NoiseModel", "ScheduledCircuit",
    "approximation_ratio", "build_sequence", "bv_circuit", "decompose_to_basis", "echoed_rzx",
    "effective_channel_fidelity", "equiv_up_to_phase", "erdos_renyi", "graph_state_circuit",
    "hahn_absorbable", "hs_circuit", "idle_windows", "insert_dd", "jsd", "kdd_expand",
    "maxcut_bruteforce", "optimize_qaoa", "pst", "qaoa_maxcut_ansatz", "qft_circuit",
    "random_regular_graph", "relative_report", "rewrite_to_rzx", "schedule_asap", "simulate",
    "total_duration", "udd_positions", "unitary_of",
]
