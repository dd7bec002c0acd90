import json
import math

import numpy as np
import pytest
from scipy import stats

from ddforge.circuit import Circuit, ideal_distribution
from ddforge.gates import Gate, rx
from ddforge.noise import NoiseModel, effective_channel_fidelity, simulate
from ddforge.scheduler import DurationTable, schedule_asap
from ddforge.sequences import build_sequence, insert_dd
from ddforge.transpile import BasisSet, decompose_to_basis

from conftest import random_circuit

TABLE = DurationTable.default()
SHOTS = 8192


def ramsey(delay, table=TABLE, measure=True):
    ops = [Gate("SX", (0,)), Gate("DELAY", (0,), duration=delay), Gate("RX", (0,), (-math.pi / 2,))]
    if measure:
        ops.append(Gate("MEASURE", (0,)))
    return schedule_asap(Circuit(1, tuple(ops)), table)


def idle_window(length, table=TABLE):
    return ramsey(length, table, measure=False)


def binomial_tol(p, shots=SHOTS, k=4.5):
    return k * math.sqrt(max(p * (1 - p), 1e-4) / shots)


# -- model ----------------------------------------------------------------------


def test_model_validation():
    with pytest.raises(ValueError):
        NoiseModel(t1_us=10, t2_us=30)
    with pytest.raises(ValueError):
        NoiseModel(depol_1q=1.5)
    with pytest.raises(ValueError):
        NoiseModel(quasi_static_sigma=-1)
    with pytest.raises(ValueError):
        NoiseModel(t1_us=0)


def test_profiles_load():
    m = NoiseModel.profile("profile-default", seed=4)
    assert m.t1_us == 100 and m.t2_us == 80 and m.seed == 4
    assert m.depol_1q == pytest.approx(2e-4) and m.depol_2q == pytest.approx(7e-3)
    assert m.dephasing_rate == pytest.approx(1 / 80 - 1 / 200)
    assert NoiseModel.profile("ideal").t1_us == math.inf
    for name in ("profile-low-qv", "profile-high-qv"):
        NoiseModel.profile(name)
    with pytest.raises(KeyError):
        NoiseModel.profile("nope")


def test_profile_from_file(tmp_path):
    path = tmp_path / "n.ini"
    path.write_text("[noise:mine]\nquasi_static_sigma = 1.5\nt1_us = 50\nt2_us = 40\n")
    m = NoiseModel.profile("mine", path=path)
    assert m.quasi_static_sigma == 1.5 and m.t2_us == 40 and m.depol_2q == 0


def test_default_sigma_gives_ramsey_near_0p9():
    sigma = NoiseModel.profile().quasi_static_sigma
    t = TABLE.dt_to_us(1000)
    assert (1 + math.exp(-((sigma * t) ** 2) / 2)) / 2 == pytest.approx(0.9, abs=0.01)


# -- simulate -------------------------------------------------------------------


def test_errors():
    s = ramsey(100)
    with pytest.raises(ValueError):
        simulate(s, NoiseModel(), 0)
    big = schedule_asap(Circuit(17, (Gate("X", (0,)),)), TABLE)
    with pytest.raises(ValueError):
        simulate(big, NoiseModel(), 10)


def test_deterministic_and_counts_sum():
    noise = NoiseModel.profile(seed=9)
    s = schedule_asap(decompose_to_basis(random_circuit(np.random.default_rng(1), 3, 20), BasisSet.CX_BASIS), TABLE)
    a = simulate(s, noise, 3000)
    b = simulate(s, noise, 3000)
    assert a == b and a.to_json() == b.to_json()
    assert a.shots == 3000
    assert simulate(s, noise.with_(seed=10), 3000) != a
    assert json.loads(a.to_json()) == dict(a)


def test_bit_order_follows_measured_qubits():
    c = Circuit(3, (Gate("X", (0,)), Gate("MEASURE", (0,)), Gate("MEASURE", (2,))))
    counts = simulate(schedule_asap(c, TABLE), NoiseModel(), 100)
    assert counts == {"10": 100}


def test_noiseless_matches_ideal_chi2():
    rng = np.random.default_rng(3)
    for _ in range(5):
        c = random_circuit(rng, 3, 15)
        c = decompose_to_basis(c.replace(list(c.ops) + [Gate("MEASURE", (q,)) for q in range(3)]), BasisSet.CX_BASIS)
        ideal = ideal_distribution(c)
        counts = simulate(schedule_asap(c, TABLE), NoiseModel(), SHOTS)
        keys = [k for k, p in ideal.items() if p > 1e-12]
        assert sum(counts.get(k, 0) for k in keys) == SHOTS
        observed = np.array([counts.get(k, 0) for k in keys])
        expected = np.array([ideal[k] for k in keys]) * SHOTS
        if len(keys) > 1:
            assert stats.chisquare(observed, expected).pvalue > 0.001


def test_ramsey_large_sigma_tends_to_half():
    sigma, delay = 20.0, 10000  # sigma * t = 40 rad
    counts = simulate(ramsey(delay), NoiseModel(quasi_static_sigma=sigma), SHOTS)
    t = TABLE.dt_to_us(delay)
    expected = (1 + math.exp(-((sigma * t) ** 2) / 2)) / 2
    assert counts.get("0", 0) / SHOTS == pytest.approx(expected, abs=binomial_tol(0.5))


def test_ramsey_matches_gaussian_average():
    sigma, delay = 3.0, 2000
    counts = simulate(ramsey(delay), NoiseModel(quasi_static_sigma=sigma), SHOTS)
    t = TABLE.dt_to_us(delay)
    expected = (1 + math.exp(-((sigma * t) ** 2) / 2)) / 2
    assert counts.get("0", 0) / SHOTS == pytest.approx(expected, abs=binomial_tol(expected))


def test_ramsey_with_cp_is_exact():
    s, rep = insert_dd(ramsey(4000), build_sequence("CP"))
    assert rep.windows_filled == 1
    counts = simulate(s, NoiseModel(quasi_static_sigma=20.0), SHOTS)
    assert counts == {"0": SHOTS}


def _ramsey_oracle(delay, t1, t2):
    """P(0) for SX, idle, SX^dagger with damping during gates, via 2x2 Kraus algebra."""
    rho = np.array([[1, 0], [0, 0]], dtype=complex)

    def evolve(rho, u):
        return u @ rho @ u.conj().T

    def damp(rho, dt):
        t = TABLE.dt_to_us(dt)
        g = 1 - math.exp(-t / t1)
        rate = 1 / t2 - 0.5 / t1
        k0 = np.array([[1, 0], [0, math.sqrt(1 - g)]])
        k1 = np.array([[0, math.sqrt(g)], [0, 0]])
        rho = evolve(rho, k0) + evolve(rho, k1)
        off = math.exp(-t * rate)
        return np.array([[rho[0, 0], rho[0, 1] * off], [rho[1, 0] * off, rho[1, 1]]])

    rho = damp(evolve(rho, rx(math.pi / 2)), 160)
    rho = damp(rho, delay)
    rho = damp(evolve(rho, rx(-math.pi / 2)), 160)
    return float(rho[0, 0].real)


def test_ramsey_t1_t2_matches_density_matrix_oracle():
    t1, t2 = 20.0, 15.0
    noise = NoiseModel(t1_us=t1, t2_us=t2, seed=2)
    for delay in (5000, 40000):
        p0 = simulate(ramsey(delay), noise, SHOTS).get("0", 0) / SHOTS
        expected = _ramsey_oracle(delay, t1, t2)
        assert p0 == pytest.approx(expected, abs=binomial_tol(expected))


def test_ramsey_t2_decay_monotone():
    noise = NoiseModel(t1_us=1e6, t2_us=10.0, seed=5)
    delays = [0, 10000, 25000, 50000, 100000, 250000]
    psts = [simulate(ramsey(d), noise, SHOTS).get("0", 0) / SHOTS for d in delays]
    tol = binomial_tol(0.5)
    assert all(b <= a + tol for a, b in zip(psts, psts[1:]))
    assert psts[-1] == pytest.approx(0.5, abs=tol)
    assert psts[0] > 0.99


def test_depolarizing_rate():
    p = 0.3
    c = Circuit(1, (Gate("X", (0,)), Gate("MEASURE", (0,))))
    counts = simulate(schedule_asap(c, TABLE), NoiseModel(depol_1q=p), SHOTS)
    # X and Y errors flip |1> back to |0>
    assert counts.get("0", 0) / SHOTS == pytest.approx(p / 2, abs=binomial_tol(p / 2))


def test_overrotation_skips_rz():
    eps = 0.2
    noise = NoiseModel(overrotation_epsilon=eps)
    c = Circuit(1, (Gate("X", (0,)), Gate("MEASURE", (0,))))
    p0 = simulate(schedule_asap(c, TABLE), noise, SHOTS).get("0", 0) / SHOTS
    expected = math.cos(math.pi * (1 + eps) / 2) ** 2
    assert p0 == pytest.approx(expected, abs=binomial_tol(expected))
    rz = Circuit(1, (Gate("RZ", (0,), (1.0,)), Gate("MEASURE", (0,))))
    assert simulate(schedule_asap(rz, TABLE), noise, 100) == {"0": 100}


# -- channel fidelity -------------------------------------------------------------


def test_fidelity_noiseless_is_one():
    assert effective_channel_fidelity(idle_window(2000), NoiseModel()) == pytest.approx(1.0, abs=1e-12)


def test_fidelity_quasi_static_matches_gaussian_formula():
    sigma, length = 3.34, 4000
    t = TABLE.dt_to_us(length)
    f_pro = (1 + math.exp(-((sigma * t) ** 2) / 2)) / 2
    got = effective_channel_fidelity(idle_window(length), NoiseModel(quasi_static_sigma=sigma))
    assert got == pytest.approx((2 * f_pro + 1) / 3, abs=1e-9)


def test_fidelity_amplitude_damping_formula():
    table = DurationTable({**TABLE.table, "SX": 0, "RX": 0}, TABLE.rzx_alpha, TABLE.rzx_beta)
    t1, length = 10.0, 20000
    gamma = 1 - math.exp(-table.dt_to_us(length) / t1)
    f_pro = (1 + math.sqrt(1 - gamma)) ** 2 / 4
    got = effective_channel_fidelity(idle_window(length, table), NoiseModel(t1_us=t1, t2_us=2 * t1))
    assert got == pytest.approx((2 * f_pro + 1) / 3, abs=1e-9)


@pytest.mark.parametrize("name", ["CP", "CPMG", "XY4", "XY8", "XY16", "KDD"])
def test_exact_refocusing(name):
    noise = NoiseModel(quasi_static_sigma=NoiseModel.profile().quasi_static_sigma)
    s, rep = insert_dd(idle_window(4000), build_sequence(name))
    assert rep.windows_filled == 1
    assert effective_channel_fidelity(s, noise) == pytest.approx(1.0, abs=1e-9)


def test_no_dd_fidelity_below_one():
    noise = NoiseModel(quasi_static_sigma=NoiseModel.profile().quasi_static_sigma)
    assert effective_channel_fidelity(idle_window(4000), noise) < 0.95


def test_xy8_at_least_xy4_under_overrotation():
    noise = NoiseModel(overrotation_epsilon=0.01)
    f = {}
    for name in ("XY4", "XY8"):
        s, _ = insert_dd(idle_window(4000), build_sequence(name))
        f[name] = effective_channel_fidelity(s, noise)
    assert f["XY4"] < 1.0
    assert f["XY8"] >= f["XY4"]


def test_fidelity_two_qubits_agrees_with_one():
    # an untouched second qubit must not change the fidelity of the first
    sigma = 2.0
    one = effective_channel_fidelity(idle_window(3000), NoiseModel(quasi_static_sigma=sigma))
    ops = (Gate("SX", (0,)), Gate("DELAY", (0,), duration=3000), Gate("RX", (0,), (-math.pi / 2,)), Gate("X", (1,)))
    two = effective_channel_fidelity(schedule_asap(Circuit(2, ops), TABLE), NoiseModel(quasi_static_sigma=sigma))
    # F_pro multiplies; convert both to process fidelity
    assert (5 * two - 1) / 4 == pytest.approx((3 * one - 1) / 2, abs=1e-9)


def test_fidelity_scale_limit():
    s = schedule_asap(Circuit(5, (Gate("X", (4,)),)), TABLE)
    with pytest.raises(ValueError):
        effective_channel_fidelity(s, NoiseModel())
