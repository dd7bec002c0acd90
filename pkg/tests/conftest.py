import math

import numpy as np
import pytest

from ddforge.circuit import Circuit
from ddforge.gates import Gate

ONE_Q = ("X", "Y", "SX", "H", "RZ", "RX", "RY")
TWO_Q = ("CX", "CZ", "RZZ", "CP", "RZX", "RYY")
NUM_PARAMS = {"RZ": 1, "RX": 1, "RY": 1, "RZZ": 1, "CP": 1, "RZX": 1, "RYY": 1}


def random_circuit(rng, n_qubits, n_gates, one_q=ONE_Q, two_q=TWO_Q, two_q_prob=0.4):
    ops = []
    for _ in range(n_gates):
        if n_qubits > 1 and rng.random() < two_q_prob:
            name = two_q[rng.integers(len(two_q))]
            qs = tuple(int(q) for q in rng.choice(n_qubits, 2, replace=False))
        else:
            name = one_q[rng.integers(len(one_q))]
            qs = (int(rng.integers(n_qubits)),)
        params = tuple(rng.uniform(-2 * math.pi, 2 * math.pi, NUM_PARAMS.get(name, 0)))
        ops.append(Gate(name, qs, params))
    return Circuit(n_qubits, tuple(ops), "random")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def expm_hermitian(generator, theta):
    """exp(-i theta/2 G) via eigendecomposition of the Hermitian generator."""
    w, v = np.linalg.eigh(generator)
    return (v * np.exp(-0.5j * theta * w)) @ v.conj().T


def qaoa_grid(graph, gammas, betas):
    """<cut> on a (gamma, beta) grid from an explicit kron-built statevector."""
    n = graph.n
    z = 1 - 2 * ((np.arange(2**n)[:, None] >> np.arange(n)) & 1)  # +-1 spins, bit q = qubit q
    zz = sum(z[:, a] * z[:, b] for a, b in graph.edges) if graph.edges else np.zeros(2**n)
    cut = (len(graph.edges) - zz) / 2
    psi = np.exp(-1j * np.outer(gammas, zz)) / math.sqrt(2**n)  # (G, 2^n)
    out = np.empty((len(gammas), len(betas)))
    for j, b in enumerate(betas):
        r = np.array([[math.cos(b), -1j * math.sin(b)], [-1j * math.sin(b), math.cos(b)]])
        m = np.array([[1.0]])
        for _ in range(n):
            m = np.kron(r, m)
        amp = psi @ m.T
        out[:, j] = (np.abs(amp) ** 2) @ cut
    return out
