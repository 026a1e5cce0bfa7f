import numpy as np
import pytest

import faultmem as fm
from faultmem.decoders import (EdgeMessages, GateFaultPlan, TkState,
                               algorithm_a_round, gallager_b_round,
                               parallel_bitflip_decode, parallel_bitflip_round,
                               parallel_bitflip_round_many, tk_round)


def reference_refresh(g, state, xor_flips=(), maj_flips=()):
    """Straight-line reimplementation of the estimate-majority refresh:
    explicit per-edge messages, chain-parity faults, majority with tie
    retention.  The oracle for algorithm_a_round."""
    est = {}
    for c in range(g.m):
        for k in range(g.rho):
            x = 0
            for k2 in range(g.rho):
                if k2 != k:
                    x ^= int(state[g.check_nbrs[c, k2]])
            flips = sum(1 for (cc, kk, _p) in xor_flips
                        if cc == c and kk == k) % 2
            est[(c, k)] = x ^ flips
    new = np.empty(g.n, np.uint8)
    for v in range(g.n):
        s = sum(est[(int(g.var_nbrs[v, j]), int(g.var_edge_pos[v, j]))]
                for j in range(g.gamma))
        if s > g.gamma // 2:
            val = 1
        elif g.gamma - s > g.gamma // 2:
            val = 0
        else:
            val = int(state[v])
        if v in maj_flips:
            val ^= 1
        new[v] = val
    return new


def reference_bitflip(g, state):
    """Text-rule reimplementation: flip each variable in more unsatisfied
    than satisfied constraints."""
    unsat = [int(sum(state[v] for v in g.check_nbrs[c]) % 2) for c in range(g.m)]
    new = state.copy()
    for v in range(g.n):
        u = sum(unsat[int(c)] for c in g.var_nbrs[v])
        if u > g.gamma - u:
            new[v] ^= 1
    return new


def random_codeword(g, rng):
    k = fm.code_dimension(g)
    return fm.encode(g, rng.integers(0, 2, size=k).astype(np.uint8))


# -- fixpoints --------------------------------------------------------------


def test_codeword_fixpoints(seed7_graph):
    g = seed7_graph
    rng = np.random.default_rng(2)
    for _ in range(5):
        cw = random_codeword(g, rng)
        assert np.array_equal(algorithm_a_round(g, cw), cw)
        assert np.array_equal(parallel_bitflip_round(g, cw), cw)
        tk = TkState.from_word(g, cw)
        assert np.array_equal(tk_round(g, tk).copies, tk.copies)
        out = gallager_b_round(g, EdgeMessages.from_word(g, cw))
        assert np.array_equal(out.var_to_check, EdgeMessages.from_word(g, cw).var_to_check)


def test_single_error_restored_girth6(girth6_graph):
    g = girth6_graph
    zero = np.zeros(g.n, np.uint8)
    for v in range(g.n):
        w = zero.copy()
        w[v] = 1
        assert np.array_equal(algorithm_a_round(g, w), zero)
        assert np.array_equal(parallel_bitflip_round(g, w), zero)


def test_even_gamma_tie_keeps_value():
    g = fm.build_random_regular(fm.CodeParams(12, 4, 6), seed=4)
    rng = np.random.default_rng(0)
    found = 0
    for _ in range(200):
        w = rng.integers(0, 2, size=g.n).astype(np.uint8)
        est = np.empty((g.n, g.gamma), np.uint8)
        for v in range(g.n):
            for j in range(g.gamma):
                c = int(g.var_nbrs[v, j])
                others = [int(u) for u in g.check_nbrs[c] if u != v]
                est[v, j] = sum(int(w[u]) for u in others) % 2
        sums = est.sum(axis=1)
        tied = np.flatnonzero(sums * 2 == g.gamma)
        if tied.size == 0:
            continue
        found += 1
        out = algorithm_a_round(g, w)
        assert (out[tied] == w[tied]).all()
    assert found > 10  # ties actually exercised


# -- gate faults ------------------------------------------------------------


def test_refresh_matches_reference_with_xor_fault(seed7_graph):
    g = seed7_graph
    w = np.zeros(g.n, np.uint8)
    w[[2, 9]] = 1
    fault = {(3, 1, 2)}
    plan = GateFaultPlan(frozenset(fault))
    assert np.array_equal(algorithm_a_round(g, w, plan),
                          reference_refresh(g, w, xor_flips=fault))


def test_two_faults_same_chain_cancel(seed7_graph):
    g = seed7_graph
    w = np.zeros(g.n, np.uint8)
    w[[1, 5]] = 1
    plan = GateFaultPlan(frozenset({(2, 0, 0), (2, 0, 3)}))
    assert np.array_equal(algorithm_a_round(g, w, plan),
                          algorithm_a_round(g, w))


def test_majority_fault_complements_output(seed7_graph):
    g = seed7_graph
    w = np.zeros(g.n, np.uint8)
    plan = GateFaultPlan(maj_flips=frozenset({4}))
    out = algorithm_a_round(g, w, plan)
    expected = np.zeros(g.n, np.uint8)
    expected[4] = 1
    assert np.array_equal(out, expected)


def test_random_faulty_rounds_match_reference(seed7_graph):
    g = seed7_graph
    rng = np.random.default_rng(11)
    for _ in range(30):
        w = rng.integers(0, 2, size=g.n).astype(np.uint8)
        xor = {(int(rng.integers(0, g.m)), int(rng.integers(0, g.rho)),
                int(rng.integers(0, g.rho - 2))) for _ in range(3)}
        maj = {int(rng.integers(0, g.n)) for _ in range(2)}
        plan = GateFaultPlan(frozenset(xor), frozenset(maj))
        assert np.array_equal(algorithm_a_round(g, w, plan),
                              reference_refresh(g, w, xor, maj))


def test_empty_plan_is_reliable(seed7_graph):
    g = seed7_graph
    rng = np.random.default_rng(8)
    w = rng.integers(0, 2, size=g.n).astype(np.uint8)
    assert np.array_equal(algorithm_a_round(g, w, GateFaultPlan.empty()),
                          algorithm_a_round(g, w))
    tk = TkState(rng.integers(0, 2, size=(g.n, g.gamma)).astype(np.uint8))
    assert np.array_equal(tk_round(g, tk, GateFaultPlan.empty()).copies,
                          tk_round(g, tk).copies)


def test_gate_plan_validation(seed7_graph):
    with pytest.raises(ValueError):
        GateFaultPlan(frozenset({(0, 0, 99)})).validate(seed7_graph)
    with pytest.raises(ValueError):
        GateFaultPlan(maj_flips=frozenset({99})).validate(seed7_graph)


# -- parallel bit flipping --------------------------------------------------


def test_bitflip_matches_text_rule(seed7_graph):
    g = seed7_graph
    rng = np.random.default_rng(5)
    for _ in range(100):
        w = rng.integers(0, 2, size=g.n).astype(np.uint8)
        assert np.array_equal(parallel_bitflip_round(g, w),
                              reference_bitflip(g, w))


def test_bitflip_two_errors_match_reference(seed7_graph):
    g = seed7_graph
    rng = np.random.default_rng(6)
    for _ in range(50):
        w = np.zeros(g.n, np.uint8)
        w[rng.choice(g.n, 2, replace=False)] = 1
        assert np.array_equal(parallel_bitflip_round(g, w),
                              reference_bitflip(g, w))


def test_decode_codeword_confirms_fixpoint(seed7_graph):
    g = seed7_graph
    cw = np.zeros(g.n, np.uint8)
    out, rounds, converged = parallel_bitflip_decode(g, cw, 5)
    assert np.array_equal(out, cw) and rounds == 1 and converged


def test_decode_beyond_guarantee_reports_honestly(seed7_graph):
    g = seed7_graph
    rng = np.random.default_rng(9)
    w = rng.integers(0, 2, size=g.n).astype(np.uint8)
    out, rounds, converged = parallel_bitflip_decode(g, w, 30)
    assert rounds <= 30
    if converged:
        assert np.array_equal(parallel_bitflip_round(g, out), out)


def test_batched_round_equals_loop(seed7_graph):
    g = seed7_graph
    rng = np.random.default_rng(10)
    states = rng.integers(0, 2, size=(40, g.n)).astype(np.uint8)
    batch = parallel_bitflip_round_many(g, states)
    for i in range(40):
        assert np.array_equal(batch[i], parallel_bitflip_round(g, states[i]))


# -- refresh / bit-flipping agreement ----------------------------------------


@pytest.mark.parametrize("gamma,rho", [(3, 6), (4, 6)])
def test_refresh_equals_bitflip_exhaustive(gamma, rho):
    g = fm.build_random_regular(fm.CodeParams(12, gamma, rho), seed=7)
    from faultmem.tanner import as_word
    from faultmem.decoders import algorithm_a_round_many
    idx = np.arange(2 ** g.n, dtype=np.uint32)
    states = ((idx[:, None] >> np.arange(g.n)) & 1).astype(np.uint8)
    assert np.array_equal(algorithm_a_round_many(g, states),
                          parallel_bitflip_round_many(g, states))


# -- bit-copy scheme --------------------------------------------------------


def test_tk_flipped_variable_restored(girth6_graph):
    g = girth6_graph
    zero = np.zeros(g.n, np.uint8)
    tk = TkState.from_word(g, zero)
    tk.copies[7, :] ^= 1
    out = tk_round(g, tk)
    assert (out.copies[7] == 0).all()


def test_tk_readout_majority_and_ties():
    g = fm.build_random_regular(fm.CodeParams(12, 4, 6), seed=4)
    copies = np.zeros((g.n, 4), np.uint8)
    copies[3] = [1, 1, 1, 0]
    copies[5] = [1, 1, 0, 0]  # tie
    st = TkState(copies)
    prev = np.zeros(g.n, np.uint8)
    prev[5] = 1
    out = st.readout(prev=prev)
    assert out[3] == 1 and out[5] == 1
    with pytest.raises(ValueError):
        st.readout()


def test_single_corrupt_edge_message_restored(girth6_graph):
    g = girth6_graph
    msgs = EdgeMessages.from_word(g, np.zeros(g.n, np.uint8))
    msgs.var_to_check[13] = 1
    out = gallager_b_round(g, msgs)
    assert out.var_to_check[13] == 0


def test_tk_equals_gallager_b_with_faults():
    rng = np.random.default_rng(42)
    for trial in range(25):
        g = fm.build_random_regular(fm.CodeParams(12, 3, 6), seed=trial)
        tk = TkState(rng.integers(0, 2, size=(g.n, g.gamma)).astype(np.uint8))
        em = EdgeMessages.from_copies(g, tk)
        for _ in range(5):
            xor = frozenset({(int(rng.integers(0, g.m)), int(rng.integers(0, g.rho)),
                              int(rng.integers(0, g.rho - 2)))
                             for _ in range(int(rng.integers(0, 4)))})
            maj = frozenset(int(v) for v in
                            rng.choice(g.n, int(rng.integers(0, 3)), replace=False))
            plan = GateFaultPlan(xor, maj)
            tk = tk_round(g, tk, plan)
            em = gallager_b_round(g, em, plan)
            assert np.array_equal(tk.copies.reshape(-1), em.var_to_check)


def test_tk_initialization_equal_copies(seed7_graph):
    g = seed7_graph
    w = np.zeros(g.n, np.uint8)
    w[3] = 0
    tk = TkState.from_word(g, w)
    assert (tk.copies == tk.copies[:, :1]).all()
