from __future__ import annotations

import heapq
import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bfosd import model, oracle, osd
from bfosd.gf2 import BitMatrix, BitVector
from conftest import GOLDEN_POPS, golden_base

CONVENTIONS = ("confidence", "llr")


def make_model(h) -> model.DecodingModel:
    H = BitMatrix.from_dense(np.asarray(h, dtype=np.uint8))
    return model.DecodingModel(H, np.full(H.cols, 0.1), BitMatrix.zeros(0, H.cols))


def random_instance(seed, rows=None, cols=None, integer=False):
    """Random model, a reachable syndrome and signed LLRs."""
    rng = np.random.default_rng(seed)
    rows = rows or int(rng.integers(1, 8))
    cols = cols or int(rng.integers(rows, rows + 9))
    h = rng.integers(0, 2, (rows, cols), dtype=np.uint8)
    m = make_model(h)
    e = BitVector.from_bits(rng.integers(0, 2, cols))
    s = m.h_dec @ e
    if integer:
        llrs = rng.integers(-4, 5, cols).astype(float)
    else:
        # dyadic values keep every sum exact so tie-breaks are reproducible
        llrs = rng.integers(-40, 41, cols) / 8.0
    return m, s, llrs


def naive_eager(base: osd.BaseSolution, budget: int):
    """Push-all best-first reference with (cost, lexicographic T) priority."""
    k = base.k
    rank = sorted(range(k), key=lambda j: (base.generator_weights[j], base.free_cols[j]))
    R = base.pivot_block

    def cost(T):
        piv = base.base_pivot_bits.copy()
        for t in T:
            piv ^= R[:, rank[t]]
        e = base.transformed_error(piv, [rank[t] for t in T])
        return osd.candidate_cost(e, base.llrs)

    heap = [(cost(()), ())]
    pops = []
    while heap and len(pops) < budget:
        c, T = heapq.heappop(heap)
        pops.append((T, c))
        start = T[-1] + 1 if T else 0
        for j in range(start, k):
            child = T + (j,)
            heapq.heappush(heap, (cost(child), child))
    return pops


# -- ordering and pre-flip -----------------------------------------------------


def test_order_columns_examples():
    assert osd.order_columns([-5, 0.1, 3], "llr").tolist() == [0, 1, 2]
    assert osd.order_columns([-5, 0.1, 3], "confidence").tolist() == [1, 2, 0]
    for conv in CONVENTIONS:
        assert osd.order_columns([2, 2, 1], conv).tolist() == [2, 0, 1]


def test_convention_parse():
    assert osd.OrderingConvention.parse("llr") is osd.OrderingConvention.LLR
    assert osd.OrderingConvention.parse("confidence_ascending_with_preflip") is osd.OrderingConvention.CONFIDENCE
    with pytest.raises(ValueError):
        osd.OrderingConvention.parse("magnitude")


def test_preflip_examples():
    eye = BitMatrix.identity(2)
    rec = osd.preflip(eye, BitVector.from_string("10"), [-2, 3])
    assert rec.flips.to_string() == "10"
    assert rec.adjusted_syndrome.to_string() == "00"
    assert rec.adjusted_llrs.tolist() == [2, 3]
    rec = osd.preflip(eye, BitVector.from_string("10"), [1, 3])
    assert not rec.flips.any() and rec.adjusted_syndrome.to_string() == "10"
    rec = osd.preflip(BitMatrix.from_dense([[1, 1]]), BitVector.from_string("1"), [-1, -1])
    assert rec.flips.to_string() == "11"
    assert rec.adjusted_syndrome.to_string() == "1"


@given(st.integers(0, 2**32 - 1))
def test_preflip_invariants(seed):
    m, s, llrs = random_instance(seed)
    rec = osd.preflip(m.h_dec, s, llrs)
    assert np.all(rec.adjusted_llrs >= 0)
    assert np.array_equal(rec.adjusted_llrs, np.abs(llrs))
    assert rec.adjusted_syndrome == s ^ (m.h_dec @ rec.flips)


# -- costs ------------------------------------------------------------------------


def test_candidate_cost_examples():
    lam = [3, 6, 9]
    assert osd.candidate_cost(BitVector.zeros(3), lam) == 0
    assert osd.candidate_cost(BitVector.from_string("110"), lam) == 9
    assert osd.candidate_cost(BitVector.from_string("111"), lam) == 18


def test_incremental_cost_examples():
    lam = [5.0, 2.0]
    assert osd.incremental_cost(5.0, BitVector.from_string("10"), BitVector.from_string("11"), lam) == 2.0
    g = BitVector.from_string("11")
    assert osd.incremental_cost(0.0, BitVector.zeros(2), g, lam) == 7.0
    assert osd.incremental_cost(4.5, BitVector.from_string("01"), BitVector.zeros(2), lam) == 4.5


def test_incremental_cost_matches_recompute():
    rng = np.random.default_rng(7)
    for _ in range(10_000):
        n = int(rng.integers(1, 20))
        lam = rng.uniform(0, 10, n)
        parent = rng.integers(0, 2, n).astype(np.uint8)
        g = rng.integers(0, 2, n).astype(np.uint8)
        got = osd.incremental_cost(osd.candidate_cost(parent, lam), parent, g, lam)
        assert abs(got - osd.candidate_cost(parent ^ g, lam)) <= 1e-9


# -- OSD-0 --------------------------------------------------------------------------


def test_osd0_worked_example():
    m = make_model([[1, 1, 0], [0, 1, 1]])
    base = osd.osd0(m, BitVector.from_string("10"), [1.0, 2.0, 3.0])
    assert base.pivot_cols.tolist() == [0, 1]
    assert base.free_cols.tolist() == [2]
    assert base.e_base.to_string() == "100"
    assert base.base_cost == 1.0
    assert base.generator_weights.tolist() == [6.0]
    assert [g.to_string() for g in base.generators] == ["111"]
    cand = osd.base_candidate(base)
    assert cand.error.to_string() == "100" and cand.cost == 1.0


def test_osd0_zero_syndrome():
    m = make_model([[1, 1, 0, 1], [0, 1, 1, 1]])
    base = osd.osd0(m, BitVector.zeros(2), [0.5, 1.0, 2.0, 0.1])
    assert not base.e_base.any() and base.base_cost == 0


def test_osd0_preflip_composition():
    m = make_model([[1, 0], [0, 1]])
    base = osd.osd0(m, BitVector.from_string("10"), [-2.0, 3.0], "confidence")
    assert not base.e_base.any()
    assert osd.base_candidate(base).error.to_string() == "10"
    assert osd.base_candidate(base).cost == 0.0


def test_osd0_inconsistent_syndrome():
    m = make_model([[1, 1], [1, 1]])
    with pytest.raises(osd.InconsistentSyndromeError, match="inconsistent syndrome"):
        osd.osd0(m, BitVector.from_string("10"), [1.0, 1.0])


def test_osd0_rejects_bad_lengths():
    m = make_model([[1, 1, 0], [0, 1, 1]])
    with pytest.raises(ValueError):
        osd.osd0(m, BitVector.zeros(2), [1.0, 1.0])
    with pytest.raises(ValueError):
        osd.osd0(m, BitVector.zeros(3), [1.0, 1.0, 1.0])


@given(st.integers(0, 2**32 - 1), st.sampled_from(CONVENTIONS))
def test_osd0_invariants(seed, convention):
    m, s, llrs = random_instance(seed)
    base = osd.osd0(m, s, llrs, convention)
    cand = osd.base_candidate(base)
    assert m.h_dec @ cand.error == s
    assert m.h_dec @ (base.e_base ^ base.preflip.flips) == s
    assert np.all(base.generator_weights >= 0)
    for g, w in zip(base.generators, base.generator_weights):
        assert not (m.h_dec @ g).any()
        assert w == pytest.approx(osd.candidate_cost(g, base.llrs), abs=1e-9)
    if convention == "llr":
        assert not base.preflip.flips.any()
    assert cand.cost == pytest.approx(osd.candidate_cost(base.e_base, base.llrs), abs=1e-12)


# -- OSD-w and OSD-CS ----------------------------------------------------------------


def coset_setup(seed, k_max=8):
    rng = np.random.default_rng(seed)
    rows = int(rng.integers(2, 7))
    k = int(rng.integers(0, k_max + 1))
    m, s, llrs = random_instance(seed, rows=rows, cols=rows + k)
    return m, s, llrs


@settings(max_examples=50)
@given(st.integers(0, 2**32 - 1), st.sampled_from(CONVENTIONS))
def test_osd_w_full_equals_oracle(seed, convention):
    m, s, llrs = coset_setup(seed)
    base = osd.osd0(m, s, llrs, convention)
    cand = osd.osd_w(base, base.k)
    ref = oracle.coset_min(m.h_dec, base.preflip.adjusted_syndrome, base.llrs)
    assert cand.cost == pytest.approx(ref.minimum_cost, abs=1e-9)
    assert cand.evaluated == 2**base.k
    assert m.h_dec @ cand.error == s


def test_osd_w_counts_and_errors():
    m, s, llrs = random_instance(3, rows=4, cols=10)
    base = osd.osd0(m, s, llrs)
    assert base.k >= 4
    assert osd.osd_w(base, 4).evaluated == 16
    zero = osd.osd_w(base, 0)
    assert zero.evaluated == 1 and zero.cost == base.base_cost
    with pytest.raises(ValueError):
        osd.osd_w(base, base.k + 1)


def test_osd_cs_counts_and_errors():
    m, s, llrs = random_instance(5, rows=3, cols=13)
    base = osd.osd0(m, s, llrs)
    k = base.k
    assert k == 10
    assert osd.osd_cs(base, 7).evaluated == k + 21
    assert osd.osd_cs(base, 0).evaluated == k
    assert osd.osd_cs(base, 1).evaluated == k
    with pytest.raises(ValueError):
        osd.osd_cs(base, k + 1)


def test_osd_cs_candidate_count_at_k100():
    rng = np.random.default_rng(0)
    h = np.hstack([np.eye(4, dtype=np.uint8), rng.integers(0, 2, (4, 100), dtype=np.uint8)])
    m = make_model(h)
    base = osd.osd0(m, BitVector.from_string("1010"), rng.uniform(0.1, 5, 104))
    assert base.k == 100
    assert osd.osd_cs(base, 7).evaluated == 121


@settings(max_examples=60)
@given(st.integers(0, 2**32 - 1))
def test_osd_cs_small_k_against_oracle(seed):
    rng = np.random.default_rng(seed)
    rows = int(rng.integers(2, 6))
    m, s, llrs = random_instance(seed, rows=rows, cols=rows + 3)
    base = osd.osd0(m, s, llrs)
    if base.k != 3:
        return
    cand = osd.osd_cs(base, 3)
    assert cand.evaluated == 6
    ref = oracle.coset_min(m.h_dec, base.preflip.adjusted_syndrome, base.llrs)
    assert cand.cost >= ref.minimum_cost - 1e-9
    # the optimum in free-column coordinates: the free bits of the oracle argmin
    free_weight = sum(ref.argmin[int(c)] for c in base.free_cols)
    if free_weight <= 2:
        assert cand.cost == pytest.approx(ref.minimum_cost, abs=1e-9)
    else:
        # a weight-3 optimum is only reachable if some lighter combination ties it
        lighter = min(
            osd.candidate_cost(base.e_base ^ BitVector.from_bits(sum(c.to_array() for c in combo) % 2), base.llrs)
            for r in range(3)
            for combo in itertools.combinations(base.generators, r)
        )
        assert (cand.cost == pytest.approx(ref.minimum_cost, abs=1e-9)) == (lighter <= ref.minimum_cost + 1e-9)


@settings(max_examples=40)
@given(st.integers(0, 2**32 - 1), st.sampled_from(("llr", "weight")))
def test_selection_switch_consistency(seed, selection):
    m, s, llrs = coset_setup(seed)
    base = osd.osd0(m, s, llrs)
    lam = min(base.k, 4)
    for cand in (osd.osd_w(base, lam, selection), osd.osd_cs(base, lam, selection)):
        assert m.h_dec @ cand.error == s
        assert cand.cost <= base.base_cost + 1e-12
    with pytest.raises(ValueError):
        osd.osd_w(base, 0, "random")


# -- best-first OSD ---------------------------------------------------------------


def test_golden_traversal():
    base = golden_base()
    assert base.free_cols.tolist() == [8, 9, 10]
    assert base.generator_weights.tolist() == [7.5, 8.0, 9.0]
    cand = osd.bf_osd(base, 7, record_trace=True)
    popped = [(tuple(t + 1 for t in T), c - base.base_cost) for T, c in cand.trace]
    assert popped == GOLDEN_POPS
    assert (2, 3) not in [T for T, _ in popped]
    assert cand.evaluated == 7
    assert cand.cost == base.base_cost
    assert cand.generator_set == ()
    full = osd.bf_osd(base, 8, record_trace=True)
    assert full.trace[-1] == ((1, 2), base.base_cost + 10.0)


def test_bf_budget_one_returns_base():
    m, s, llrs = random_instance(11, rows=4, cols=9)
    base = osd.osd0(m, s, llrs)
    cand = osd.bf_osd(base, 1)
    assert cand.error == osd.base_candidate(base).error
    assert cand.evaluated == 1 and cand.queries_used == 1


def test_bf_rejects_bad_arguments():
    base = golden_base()
    with pytest.raises(ValueError):
        osd.bf_osd(base, 0)
    with pytest.raises(ValueError):
        osd.bf_osd(base, 3, expansion="greedy")


@settings(max_examples=80)
@given(st.integers(0, 2**32 - 1), st.booleans(), st.integers(1, 70))
def test_bf_kernel_matches_push_all_reference(seed, integer, budget):
    m, s, llrs = random_instance(seed, integer=integer)
    base = osd.osd0(m, s, llrs)
    cand = osd.bf_osd(base, budget, record_trace=True)
    ref = naive_eager(base, budget)
    assert [T for T, _ in cand.trace] == [T for T, _ in ref]
    assert [c for _, c in cand.trace] == pytest.approx([c for _, c in ref], abs=1e-9)
    assert cand.evaluated == min(budget, 2**base.k)


@settings(max_examples=60)
@given(st.integers(0, 2**32 - 1), st.sampled_from(("eager", "lazy")))
def test_bf_search_invariants(seed, expansion):
    m, s, llrs = random_instance(seed, integer=True)
    base = osd.osd0(m, s, llrs)
    n = 2**base.k
    cand = osd.bf_osd(base, n, expansion, record_trace=True)
    subsets = [T for T, _ in cand.trace]
    # every subset exactly once, children only adjoin larger indices
    assert len(subsets) == n == len(set(subsets))
    assert all(list(T) == sorted(set(T)) for T in subsets)
    running = list(itertools.accumulate((c for _, c in cand.trace), min))
    assert all(a >= b for a, b in zip(running, running[1:]))
    assert cand.cost == running[-1]
    assert m.h_dec @ cand.error == s
    ref = oracle.coset_min(m.h_dec, base.preflip.adjusted_syndrome, base.llrs)
    assert cand.cost == pytest.approx(ref.minimum_cost, abs=1e-9)


@settings(max_examples=40)
@given(st.integers(0, 2**32 - 1))
def test_bf_eager_pops_queue_minimum(seed):
    m, s, llrs = random_instance(seed, integer=True)
    base = osd.osd0(m, s, llrs)
    trace = osd.bf_osd(base, 2**base.k, record_trace=True).trace
    cost_of = dict(trace)
    k = base.k
    popped: set = set()
    frontier = {()}
    for T, c in trace:
        assert T in frontier
        assert all(c <= cost_of[U] + 1e-12 for U in frontier)
        frontier.remove(T)
        popped.add(T)
        start = T[-1] + 1 if T else 0
        frontier |= {T + (j,) for j in range(start, k)}


@settings(max_examples=40)
@given(st.integers(0, 2**32 - 1), st.sampled_from(("eager", "lazy")))
def test_bf_anytime_and_budget_reads(seed, expansion):
    m, s, llrs = random_instance(seed)
    base = osd.osd0(m, s, llrs)
    budgets = [1, 2, 3, 5, 9, 17, 40]
    many = osd.bf_osd_budgets(base, budgets, expansion)
    costs = [c.cost for c in many]
    assert all(a >= b for a, b in zip(costs, costs[1:]))
    for q, c in zip(budgets, many):
        single = osd.bf_osd(base, q, expansion)
        assert single.cost == c.cost and single.error == c.error
        assert single.queries_used == c.queries_used <= c.evaluated == min(q, 2**base.k)
        assert m.h_dec @ c.error == s


def test_lazy_visits_same_set_as_eager():
    m, s, llrs = random_instance(21, rows=3, cols=9)
    base = osd.osd0(m, s, llrs)
    n = 2**base.k
    lazy = osd.bf_osd(base, n, "lazy", record_trace=True)
    eager = osd.bf_osd(base, n, "eager", record_trace=True)
    assert sorted(T for T, _ in lazy.trace) == sorted(T for T, _ in eager.trace)
    assert lazy.cost == eager.cost
    assert lazy.decoder == "bf_osd(Q=%d,lazy)" % n


def test_bf_generator_set_uses_column_indices():
    m, s, llrs = random_instance(4, rows=3, cols=9)
    base = osd.osd0(m, s, llrs)
    cand = osd.bf_osd(base, 2**base.k)
    assert set(cand.generator_set) <= set(base.free_cols.tolist())
    rebuilt = base.e_base
    for c in cand.generator_set:
        rebuilt = rebuilt ^ base.generators[base.free_cols.tolist().index(c)]
    assert rebuilt ^ base.preflip.flips == cand.error


def test_format_trace():
    base = golden_base()
    text = osd.format_trace(osd.bf_osd(base, 3, record_trace=True).trace)
    lines = text.splitlines()
    c0 = base.base_cost
    assert lines[0] == f"q=1 T={{}} cost={c0!r}"
    assert lines[1] == f"q=2 T={{0}} cost={c0 + 3.0!r}"
    assert lines[2] == f"q=3 T={{0,1}} cost={c0 + 4.0!r}"


# -- configuration and dispatch -------------------------------------------------------


def test_decoder_config_validation():
    with pytest.raises(ValueError):
        osd.DecoderConfig(variant="osd_x")
    with pytest.raises(ValueError):
        osd.DecoderConfig(budget=0)
    with pytest.raises(ValueError):
        osd.DecoderConfig(budget="all")
    with pytest.raises(ValueError):
        osd.DecoderConfig(expansion="breadth")
    with pytest.raises(ValueError):
        osd.DecoderConfig(convention="signed")
    with pytest.raises(ValueError):
        osd.DecoderConfig(budget_scale=0)
    with pytest.raises(ValueError):
        osd.DecoderConfig(variant="osd_w", w=5).check(4)


def test_resolve_budget():
    k = 402
    assert osd.DecoderConfig().resolve_budget(k) == 423
    one_pct = osd.DecoderConfig(budget_scale=0.01, budget_min=2)
    assert one_pct.resolve_budget(k) == max(2, math.ceil(4.23)) == 5
    assert osd.DecoderConfig(budget=100, budget_scale=0.01, budget_min=2).resolve_budget(k) == 2
    assert osd.DecoderConfig(budget=121).resolve_budget(k) == 121
    assert osd.DecoderConfig(lam=0).resolve_budget(10) == 10


def test_decode_dispatch_and_fast_path():
    m, s, llrs = random_instance(8, rows=4, cols=10)
    for variant in ("osd0", "osd_w", "osd_cs", "bf_osd"):
        cfg = osd.DecoderConfig(variant=variant, lam=3, w=3, budget=20)
        cand = osd.decode(m, s, llrs, cfg)
        assert m.h_dec @ cand.error == s
        assert cand.decoder.startswith(variant)
    clean = np.abs(llrs) + 0.5
    fast = osd.decode(m, BitVector.zeros(4), clean, osd.DecoderConfig(fast_path=True))
    assert not fast.error.any() and fast.evaluated == 0
    slow = osd.decode(m, BitVector.zeros(4), clean, osd.DecoderConfig())
    assert not slow.error.any() and slow.evaluated > 0
    with pytest.raises(ValueError):
        osd.search(osd.osd0(m, s, llrs), osd.DecoderConfig(variant="oracle"))


def test_decoder_labels_and_params():
    cfg = osd.DecoderConfig(budget_scale=0.01, budget_min=2)
    assert cfg.label() == "bf_osd(Q=csx0.01,eager)"
    assert osd.DecoderConfig(variant="osd_cs").label() == "osd_cs(lambda=7)"
    assert cfg.params()["convention"] == "confidence_ascending_with_preflip"
