"""End-to-end acceptance checks.

Test names follow ``test_c<k>_<what>``; the terminal summary groups them into
one PASS/FAIL line per criterion.  Reference numbers below are the target
figure data for these experiments.
"""

import numpy as np
import pytest

from cqpolar.channel import make_channel, psc_to_bscq
from cqpolar.combine import bit_branches, bit_unitaries, check_branches, CHECK_UNITARY
from cqpolar.decoder import CodeSpec, decode, polar_encode, psc_decode
from cqpolar.density_evolution import design, exact_de, polar_de
from cqpolar.experiments import block_error, rate_sweep, wilson_interval
from cqpolar.quantum_sim import (
    ConditionalParams,
    apply_conditional_bitnode,
    apply_gate,
    exact_channel_output,
    from_density,
    from_vector,
    psc_channel_output,
    sample_channel_output,
)
from oracles import XI, XX, helstrom_error, rho

THREE_SIGMA = 0.9973


def _random_pairs(rng, count):
    d = rng.random((2, count))
    g = (2 * rng.random((2, count)) - 1) * np.sqrt(d * (1 - d))
    return d[0], g[0], d[1], g[1]


# -- criterion 1: length-8 design at delta=0.05, gamma=0.15 ------------------------

LENGTH8_CHANNEL = (0.05, 0.15)
LENGTH8_INFO = [3, 5, 6, 7]  # positions 4, 6, 7, 8


def test_c1_de_bit_errors():
    eps = polar_de(make_channel(*LENGTH8_CHANNEL), 3, M=10_000, seed=0)
    reference = [0.0178, 0.0146, 0.0123, 0.0003]
    for pos, ref in zip(LENGTH8_INFO, reference):
        assert eps[pos] == pytest.approx(ref, rel=0.15), f"bit {pos + 1}"


def test_c1_union_bound():
    res = design(make_channel(*LENGTH8_CHANNEL), 3, M=10_000, seed=0, K=4)
    assert res.info_set == LENGTH8_INFO
    assert 0.040 <= res.value <= 0.050


def test_c1_block_error():
    code = CodeSpec.from_info_set(make_channel(*LENGTH8_CHANNEL), 8, LENGTH8_INFO)
    res = block_error(code, 1000, seed=0, frozen="ones")
    assert 0.05 <= res.rate <= 0.09, f"block error {res.rate}"


# -- criterion 2: length-4 pure-state channel -----------------------------------

# theta -> per-bit errors of the simulated decoder (reference data)
PURE_STATE_TABLE = {
    1.5707963267949: (2.22044604925031e-16, 3.33066907387547e-16, 1.11022302462516e-15,
                      1.33226762955019e-15),
    1.4707963267949: (0.00991704341450905, 9.74216689968443e-05, 4.96676648700234e-05,
                      2.46687714700045e-09),
    1.3707963267949: (0.0386905821650815, 0.00144956145310871, 0.000778920833477192,
                      6.06718033480114e-07),
    1.2707963267949: (0.0835187366177882, 0.00659825523851221, 0.00381345592737248,
                      1.4542657598704e-05),
    1.1707963267949: (0.140148292807039, 0.0183552342346497, 0.0114983525193786,
                      0.000132229595326105),
    1.0707963267949: (0.203433600817162, 0.0389382842098346, 0.026415246248769,
                      0.000698252791343945),
    0.970796326794896: (0.267997668602159, 0.0695738060650879, 0.0508234541595034,
                        0.00258973019518671),
    0.870796326794896: (0.328897110566731, 0.110346843819858, 0.0861193179831495,
                        0.00747237329250616),
    0.770796326794897: (0.382193304062495, 0.160168674602223, 0.132406457088151,
                        0.0178500957986584),
}


def _pure_state_errors(theta):
    code = CodeSpec(psc_to_bscq(theta), (True,) * 4)
    u = np.zeros(4, dtype=np.int8)
    state = psc_channel_output(theta, polar_encode(u))
    return psc_decode(state, code, mode="genie", truth=u).bit_errors[0]


def test_c2_anchor_bit():
    assert _pure_state_errors(1.0707963267949)[3] == pytest.approx(0.000698252791, abs=1e-9)


def test_c2_last_bit_column():
    for theta, row in PURE_STATE_TABLE.items():
        assert _pure_state_errors(theta)[3] == pytest.approx(row[3], abs=1e-9), theta


def test_c2_other_columns():
    for theta, row in PURE_STATE_TABLE.items():
        np.testing.assert_allclose(_pure_state_errors(theta)[:3], row[:3], atol=2e-3)


# -- criterion 3: exact evolution against the genie decoder ----------------------

def test_c3_de_matches_genie_decoder():
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(20):
        delta = 0.5 * rng.random()
        gamma = rng.random() * np.sqrt(delta * (1 - delta))
        ch = make_channel(delta, gamma)
        for n in (1, 2, 3):
            N = 1 << n
            truth = rng.integers(0, 2, N).astype(np.int8)
            state = exact_channel_output(ch, polar_encode(truth))
            trace = decode(state, CodeSpec(ch, (True,) * N), mode="genie", truth=truth)
            expected, _ = exact_de(ch, n)
            worst = max(worst, np.abs(trace.bit_errors[0] - expected).max())
    assert worst < 1e-9


# -- criterion 4: length-8 block error against reference curves ------------------

BLOCK_TRIALS = 20_000


def _block_case(delta, gamma, K, decoder):
    ch = make_channel(delta, gamma)
    info = design(ch, 3, M=10_000, seed=0, K=K).info_set
    return block_error(CodeSpec.from_info_set(ch, 8, info), BLOCK_TRIALS, seed=0,
                       decoder=decoder)


@pytest.mark.parametrize("delta,gamma,K,decoder,reference", [
    (0.05, 0.0, 4, "pmbpqm", 0.04445),
    (0.05, 0.215, 4, "pmbpqm", 0.0108333333333333),
    (0.1, 0.0, 2, "pmbpqm", 0.0545),
    (0.1, 0.0, 2, "helstrom", 0.0533888888888889),
], ids=["d05_g0", "d05_g215", "d10_g0", "d10_g0_helstrom"])
def test_c4_block_error(delta, gamma, K, decoder, reference):
    res = _block_case(delta, gamma, K, decoder)
    low, high = wilson_interval(res.errors, res.trials, THREE_SIGMA)
    assert low <= reference <= high, f"{res.rate} [{low}, {high}]"


# -- criterion 5: union bounds for the rate-3/8 design -------------------------

NCUB_GAMMAS = [0, 0.05, 0.1, 0.15, 0.2, 0.235, 0.25, 0.28, 0.297]


def test_c5_ncub_is_four_times_ub():
    for gamma in NCUB_GAMMAS:
        ch = make_channel(0.1, gamma)
        ub = design(ch, 3, M=10_000, seed=0, K=3, bound="ub")
        ncub = design(ch, 3, M=10_000, seed=0, K=3, bound="ncub")
        assert ncub.info_set == ub.info_set
        assert ncub.value == 4 * ub.value


def test_c5_ub_at_zero_coherence():
    ub = design(make_channel(0.1, 0.0), 3, M=10_000, seed=0, K=3).value
    assert ub == pytest.approx(0.126846791608455, rel=0.05)


# -- criterion 6: rate sweep at length 1024 ---------------------------------------

@pytest.fixture(scope="module")
def sweep():
    delta = 0.07
    gammas = np.linspace(0.0, np.sqrt(delta * (1 - delta)), 10)
    return np.array(rate_sweep(delta, gammas, 10, 10_000, 0, 0.1))


def test_c6_rate_monotone(sweep):
    assert np.sum(np.diff(sweep[:, 1]) < 0) <= 2


def test_c6_beats_measure_first(sweep):
    assert sweep[-1, 1] > sweep[-1, 3]


def test_c6_matches_measure_first_without_coherence(sweep):
    assert abs(sweep[0, 1] - sweep[0, 3]) <= 1 / 1024


# -- criterion 7: property suites -------------------------------------------------

def test_c7_optimality():
    d1, g1, d2, g2 = _random_pairs(np.random.default_rng(7), 1000)
    for kernel in (check_branches, bit_branches):
        p, d, _ = kernel(d1, g1, d2, g2)
        ours = np.sum(p * np.minimum(d, 1 - d), axis=0)
        for k in range(1000):
            r1, r2 = rho(d1[k], g1[k]), rho(d2[k], g2[k])
            if kernel is check_branches:
                s0 = 0.5 * (np.kron(r1, r2) + XX @ np.kron(r1, r2) @ XX)
                s1 = XI @ s0 @ XI
            else:
                s0 = np.kron(r1, r2)
                s1 = XX @ s0 @ XX
            assert abs(ours[k] - helstrom_error(s0, s1)) < 1e-10


def _full_matrix(n, circuit):
    state = from_vector(np.eye(1 << n))
    circuit(state)
    return state.data.reshape(1 << n, -1).T


def test_c7_unitarity():
    rng = np.random.default_rng(8)
    eye4 = np.eye(4)
    assert np.abs(CHECK_UNITARY @ CHECK_UNITARY.T - eye4).max() < 1e-10
    v = bit_unitaries(*_random_pairs(rng, 1000))
    assert np.abs(v @ np.swapaxes(v, -1, -2) - eye4).max() < 1e-10
    # embedded check node and a conditional bit node on four qubits
    emb = _full_matrix(4, lambda s: apply_gate(s, [3, 1], CHECK_UNITARY))
    assert np.abs(emb @ emb.conj().T - np.eye(16)).max() < 1e-10
    d1, g1, d2, g2 = _random_pairs(rng, 2)
    cp_i = ConditionalParams((1,), d1, g1)
    cp_j = ConditionalParams((3,), d2, g2)
    cond = _full_matrix(4, lambda s: apply_conditional_bitnode(s, 0, 2, cp_i, cp_j))
    assert np.abs(cond @ cond.conj().T - np.eye(16)).max() < 1e-10


def test_c7_purity_and_classical_closure():
    rng = np.random.default_rng(9)
    d = rng.random((2, 500))
    g = np.sqrt(d * (1 - d))
    for kernel in (check_branches, bit_branches):
        p, dd, gg = kernel(d[0], g[0], d[1], g[1])
        live = p > 1e-9
        assert np.abs(gg**2 - dd * (1 - dd))[live].max() < 1e-7
        p, dd, gg = kernel(d[0], 0 * g[0], d[1], 0 * g[1])
        assert np.abs(gg).max() == 0.0


def test_c7_backend_agreement():
    rng = np.random.default_rng(10)
    ch = make_channel(0.08, 0.2)
    for n in (1, 2):
        N = 1 << n
        truth = rng.integers(0, 2, N).astype(np.int8)
        code = CodeSpec(ch, (True,) * N)
        exact = decode(exact_channel_output(ch, polar_encode(truth)), code, mode="genie",
                       truth=truth).bit_errors[0]
        sampled = sample_channel_output(ch, np.tile(polar_encode(truth), (20_000, 1)), rng)
        mc = decode(sampled, code, mode="genie", truth=truth).bit_errors
        sd = mc.std(axis=0) / np.sqrt(len(mc))
        assert np.all(np.abs(mc.mean(axis=0) - exact) <= 5 * sd + 1e-12)
    # identical forced-outcome probabilities on the same pure input, N = 4
    u = np.array([1, 0, 1, 1], dtype=np.int8)
    pure = sample_channel_output(ch, polar_encode(u)[None], rng)
    mixed = from_density(pure.matrix())
    code = CodeSpec(ch, (True,) * 4)
    a = decode(pure, code, mode="genie_collapse", truth=u).p_correct
    b = decode(mixed, code, mode="genie_collapse", truth=u).p_correct
    assert np.abs(a - b).max() < 1e-10


def test_c7_seed_determinism():
    ch = make_channel(0.07, 0.15)
    base = polar_de(ch, 6, M=1000, seed=21)
    for workers in (2, 4):
        assert np.array_equal(base, polar_de(ch, 6, M=1000, seed=21, workers=workers))
    code = CodeSpec.from_info_set(ch, 8, [3, 5, 6, 7])
    one = block_error(code, 1200, seed=5)
    many = block_error(code, 1200, seed=5, workers=3)
    assert one.errors == many.errors
