"""Ordered statistics decoding: OSD-0, OSD-w, OSD-CS and best-first OSD.

Every variant starts from an OSD-0 base solution ``e_base`` and explores the
coset ``e_base + ker(H)`` through the null-space generators read off the
RREF. Costs are sums of non-negative LLR magnitudes over the support of a
candidate in the transformed (pre-flipped) domain, so candidates with lower
cost are more probable.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from itertools import combinations

import numpy as np
from numba import njit

from . import gf2
from .bp import SoftOutput
from .gf2 import BitMatrix, BitVector, EliminationResult
from .model import DecodingModel


class OrderingConvention(str, Enum):
    LLR = "llr_ascending"
    CONFIDENCE = "confidence_ascending_with_preflip"

    @classmethod
    def parse(cls, value) -> OrderingConvention:
        if isinstance(value, cls):
            return value
        aliases = {"llr": cls.LLR, "confidence": cls.CONFIDENCE}
        if value in aliases:
            return aliases[value]
        try:
            return cls(value)
        except ValueError:
            raise ValueError(f"unknown ordering convention {value!r}") from None


class InconsistentSyndromeError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class PreflipRecord:
    flips: BitVector
    adjusted_syndrome: BitVector
    adjusted_llrs: np.ndarray


@dataclass(frozen=True, eq=False)
class Candidate:
    """A syndrome-consistent error in the original domain.

    ``generator_set`` holds the free columns (``h_dec`` indices) whose
    generators were XORed into the base. ``queries_used`` is the evaluation
    count at which the candidate was found and ``evaluated`` the total count.
    ``trace`` (best-first only, on request) lists the popped ``(T, cost)``
    pairs with ``T`` in weight-rank indexing.
    """

    error: BitVector
    cost: float
    generator_set: tuple[int, ...]
    queries_used: int
    evaluated: int
    decoder: str
    trace: tuple[tuple[tuple[int, ...], float], ...] | None = None


@dataclass(frozen=True, eq=False)
class BaseSolution:
    """OSD-0 output plus everything the coset searches need.

    ``e_base`` lives in the transformed domain (free bits are 0), ``llrs`` are
    the non-negative cost weights, ``pivot_block`` is the RREF restricted to
    the free columns (``rank x k``) and ``base_pivot_bits`` is ``e_base`` on
    the pivot columns.
    """

    e_base: BitVector
    elimination: EliminationResult
    generator_weights: np.ndarray
    preflip: PreflipRecord
    llrs: np.ndarray
    convention: OrderingConvention
    pivot_block: np.ndarray
    base_pivot_bits: np.ndarray
    base_cost: float

    @property
    def k(self) -> int:
        return self.elimination.n_free

    @property
    def pivot_cols(self) -> np.ndarray:
        return self.elimination.pivot_cols

    @property
    def free_cols(self) -> np.ndarray:
        return self.elimination.free_cols

    @cached_property
    def generator_matrix(self) -> BitMatrix:
        return gf2.null_space_matrix(self.elimination)

    @property
    def generators(self) -> list[BitVector]:
        G = self.generator_matrix
        return [G.row(i) for i in range(G.rows)]

    def transformed_error(self, pivot_bits: np.ndarray, free_slots) -> np.ndarray:
        e = np.zeros(len(self.e_base), dtype=np.uint8)
        e[self.pivot_cols] = pivot_bits
        e[self.free_cols[list(free_slots)]] = 1
        return e

    def to_original(self, e_transformed: np.ndarray) -> BitVector:
        return BitVector.from_bits(e_transformed) ^ self.preflip.flips

    def candidate(self, pivot_bits, free_slots, queries_used, evaluated, decoder, trace=None) -> Candidate:
        slots = sorted(int(s) for s in free_slots)
        e = self.transformed_error(pivot_bits, slots)
        return Candidate(
            error=self.to_original(e),
            cost=candidate_cost(e, self.llrs),
            generator_set=tuple(sorted(int(self.free_cols[s]) for s in slots)),
            queries_used=int(queries_used),
            evaluated=int(evaluated),
            decoder=decoder,
            trace=trace,
        )


def order_columns(llrs, convention) -> np.ndarray:
    """Column scan order: ascending LLR or ascending |LLR|, ties by index."""
    convention = OrderingConvention.parse(convention)
    key = np.asarray(llrs, dtype=np.float64)
    if convention is OrderingConvention.CONFIDENCE:
        key = np.abs(key)
    return np.argsort(key, kind="stable")


def preflip(h_dec: BitMatrix, syndrome: BitVector, llrs) -> PreflipRecord:
    """Accept every negative-LLR hard decision and absorb it into the syndrome."""
    llrs = np.asarray(llrs, dtype=np.float64)
    flips = BitVector.from_bits((llrs < 0).astype(np.uint8))
    adjusted = syndrome ^ (h_dec @ flips) if flips.any() else syndrome
    mags = np.abs(llrs)
    mags.setflags(write=False)
    return PreflipRecord(flips=flips, adjusted_syndrome=adjusted, adjusted_llrs=mags)


def candidate_cost(e, llrs) -> float:
    bits = e.to_array() if isinstance(e, BitVector) else np.asarray(e)
    return float(np.asarray(llrs, dtype=np.float64)[bits.astype(bool)].sum())


def incremental_cost(parent_cost: float, parent_e, g, llrs) -> float:
    """Cost of ``parent_e ^ g`` from the parent's cost, touching only the bits of ``g``."""
    pe = parent_e.to_array() if isinstance(parent_e, BitVector) else np.asarray(parent_e)
    gb = g.to_array() if isinstance(g, BitVector) else np.asarray(g)
    idx = np.flatnonzero(gb)
    lam = np.asarray(llrs, dtype=np.float64)[idx]
    signs = np.where(pe[idx] == 1, -1.0, 1.0)
    return float(parent_cost + (signs * lam).sum())


def osd0(model: DecodingModel, syndrome: BitVector, soft, convention="confidence") -> BaseSolution:
    """Order, eliminate and back-substitute with free bits fixed to 0.

    Under the confidence convention the negative-LLR bits are pre-flipped
    first. Under the LLR convention no pre-flip happens, columns are sorted by
    signed LLR and costs still use |LLR|.

    Raises:
        InconsistentSyndromeError: the syndrome is outside the column space.
    """
    convention = OrderingConvention.parse(convention)
    llrs = np.asarray(soft.llrs if isinstance(soft, SoftOutput) else soft, dtype=np.float64)
    if llrs.shape != (model.n_columns,):
        raise ValueError(f"expected {model.n_columns} LLRs, got shape {llrs.shape}")
    if len(syndrome) != model.n_detectors:
        raise ValueError(f"syndrome length {len(syndrome)} != detector count {model.n_detectors}")
    if convention is OrderingConvention.CONFIDENCE:
        rec = preflip(model.h_dec, syndrome, llrs)
        order = order_columns(rec.adjusted_llrs, convention)
    else:
        mags = np.abs(llrs)
        mags.setflags(write=False)
        rec = PreflipRecord(BitVector.zeros(model.n_columns), syndrome, mags)
        order = order_columns(llrs, convention)
    er = gf2.eliminate_ordered(model.h_dec, order)
    reduced = er.reduce(rec.adjusted_syndrome).to_array()
    r = er.rank
    if reduced[r:].any():
        raise InconsistentSyndromeError("inconsistent syndrome: not in the column space of h_dec")
    cost_llrs = rec.adjusted_llrs
    base_bits = reduced[:r].copy()
    e = np.zeros(model.n_columns, dtype=np.uint8)
    e[er.pivot_cols] = base_bits
    R = er.free_block()
    lam_p = cost_llrs[er.pivot_cols]
    weights = cost_llrs[er.free_cols] + (R.T.astype(np.float64) @ lam_p if r else 0.0)
    weights = np.asarray(weights, dtype=np.float64).reshape(er.n_free)
    return BaseSolution(
        e_base=BitVector.from_bits(e),
        elimination=er,
        generator_weights=weights,
        preflip=rec,
        llrs=cost_llrs,
        convention=convention,
        pivot_block=R,
        base_pivot_bits=base_bits,
        base_cost=float(lam_p @ base_bits) if r else 0.0,
    )


def base_candidate(base: BaseSolution, decoder: str = "osd0") -> Candidate:
    return base.candidate(base.base_pivot_bits, (), 1, 1, decoder)


def _select_free(base: BaseSolution, count: int, selection: str) -> np.ndarray:
    """Free slots of the ``count`` least reliable columns."""
    if selection == "llr":
        key = base.llrs[base.free_cols]
    elif selection == "weight":
        key = base.generator_weights
    else:
        raise ValueError(f"selection must be 'llr' or 'weight', got {selection!r}")
    order = np.lexsort((base.free_cols, key))
    return order[:count]


def osd_w(base: BaseSolution, w: int, selection: str = "llr") -> Candidate:
    """Exhaustive search over all ``2**w`` flip patterns of ``w`` free columns."""
    if w < 0 or w > base.k:
        raise ValueError(f"w={w} must lie in 0..k={base.k}")
    if w > 24:
        raise ValueError("w > 24 would enumerate more than 2**24 candidates")
    slots = _select_free(base, w, selection)
    n_cand = 1 << w
    combos = ((np.arange(n_cand)[:, None] >> np.arange(w)) & 1).astype(np.int64)
    R = base.pivot_block[:, slots].astype(np.int64)
    piv = ((combos @ R.T) & 1) ^ base.base_pivot_bits[None, :]
    lam_p = base.llrs[base.pivot_cols]
    lam_f = base.llrs[base.free_cols[slots]]
    costs = piv.astype(np.float64) @ lam_p + combos.astype(np.float64) @ lam_f
    best = int(np.argmin(costs))
    chosen = slots[np.flatnonzero(combos[best])]
    return base.candidate(piv[best].astype(np.uint8), chosen, best + 1, n_cand, f"osd_w(w={w})")


def osd_cs(base: BaseSolution, lam: int, selection: str = "llr") -> Candidate:
    """Combination sweep: all ``k`` single generators, then pairs among ``lam`` least reliable."""
    k = base.k
    if lam < 0 or lam > k:
        raise ValueError(f"lambda={lam} must lie in 0..k={k}")
    lam_p = base.llrs[base.pivot_cols]
    R = base.pivot_block
    e0 = base.base_pivot_bits
    best_cost, best_bits, best_slots, found_at = base.base_cost, e0, (), 0
    if k:
        overlap = (lam_p * e0) @ R if R.shape[0] else np.zeros(k)
        single = base.base_cost + base.generator_weights - 2.0 * overlap
        j = int(np.argmin(single))
        if single[j] < best_cost:
            best_cost, best_bits, best_slots, found_at = single[j], e0 ^ R[:, j], (j,), j + 1
    pairs = list(combinations(sorted(_select_free(base, lam, selection).tolist()), 2))
    if pairs:
        a = np.array([p[0] for p in pairs])
        b = np.array([p[1] for p in pairs])
        piv = e0[None, :] ^ R[:, a].T ^ R[:, b].T
        lam_f = base.llrs[base.free_cols]
        costs = piv.astype(np.float64) @ lam_p + lam_f[a] + lam_f[b]
        t = int(np.argmin(costs))
        if costs[t] < best_cost:
            best_cost, best_bits, best_slots, found_at = costs[t], piv[t], pairs[t], k + t + 1
    evaluated = k + len(pairs)
    return base.candidate(np.asarray(best_bits, dtype=np.uint8), best_slots, found_at, evaluated, f"osd_cs(lambda={lam})")


# -- best-first coset search ----------------------------------------------


@njit(cache=True)
def _key_less(ca, ta, cb, tb, node_parent, node_last, buf_a, buf_b):
    # (cost, T) ordering: T compared lexicographically as sorted tuples.
    if ca < cb:
        return True
    if ca > cb:
        return False
    na = 0
    p = ta
    while p > 0:
        buf_a[na] = node_last[p]
        na += 1
        p = node_parent[p]
    nb = 0
    p = tb
    while p > 0:
        buf_b[nb] = node_last[p]
        nb += 1
        p = node_parent[p]
    i = na - 1
    j = nb - 1
    while i >= 0 and j >= 0:
        if buf_a[i] != buf_b[j]:
            return buf_a[i] < buf_b[j]
        i -= 1
        j -= 1
    return na < nb


@njit(cache=True)
def _child_less(pool_cost, pool_j, x, y):
    if pool_cost[x] < pool_cost[y]:
        return True
    if pool_cost[x] > pool_cost[y]:
        return False
    return pool_j[x] < pool_j[y]


@njit(cache=True)
def _child_sift_down(pool_cost, pool_j, start, size, pos):
    while True:
        left = 2 * pos + 1
        if left >= size:
            return
        smallest = left
        right = left + 1
        if right < size and _child_less(pool_cost, pool_j, start + right, start + left):
            smallest = right
        if _child_less(pool_cost, pool_j, start + smallest, start + pos):
            a = start + smallest
            b = start + pos
            tc = pool_cost[a]
            pool_cost[a] = pool_cost[b]
            pool_cost[b] = tc
            tj = pool_j[a]
            pool_j[a] = pool_j[b]
            pool_j[b] = tj
            pos = smallest
        else:
            return


@njit(cache=True)
def _top_less(p, q, pool_cost, pool_j, child_start, cand_node, node_parent, node_last, buf_a, buf_b):
    # Compare the best remaining children of popped nodes p and q. A child is
    # keyed by (cost, T_parent + (j,)); a placeholder node holds j for the
    # lexicographic walk.
    sp = child_start[p]
    sq = child_start[q]
    cp = pool_cost[sp]
    cq = pool_cost[sq]
    if cp != cq:
        return cp < cq
    node_parent[cand_node] = p
    node_last[cand_node] = pool_j[sp]
    node_parent[cand_node + 1] = q
    node_last[cand_node + 1] = pool_j[sq]
    return _key_less(cp, cand_node, cq, cand_node + 1, node_parent, node_last, buf_a, buf_b)


@njit(cache=True)
def _heap_sift_down(heap, size, pos, pool_cost, pool_j, child_start, cand_node, node_parent, node_last, buf_a, buf_b):
    while True:
        left = 2 * pos + 1
        if left >= size:
            return
        smallest = left
        right = left + 1
        if right < size and _top_less(heap[right], heap[left], pool_cost, pool_j, child_start, cand_node, node_parent, node_last, buf_a, buf_b):
            smallest = right
        if _top_less(heap[smallest], heap[pos], pool_cost, pool_j, child_start, cand_node, node_parent, node_last, buf_a, buf_b):
            t = heap[smallest]
            heap[smallest] = heap[pos]
            heap[pos] = t
            pos = smallest
        else:
            return


@njit(cache=True)
def _heap_sift_up(heap, pos, pool_cost, pool_j, child_start, cand_node, node_parent, node_last, buf_a, buf_b):
    while pos > 0:
        parent = (pos - 1) // 2
        if _top_less(heap[pos], heap[parent], pool_cost, pool_j, child_start, cand_node, node_parent, node_last, buf_a, buf_b):
            t = heap[parent]
            heap[parent] = heap[pos]
            heap[pos] = t
            pos = parent
        else:
            return


@njit(cache=True)
def _bf_eager_kernel(R, lam_p, weights, e0, base_cost, n_pops):
    """Best-first pops over subsets of generators (indices in weight-rank order).

    Equivalent to pushing every child ``T + {j}``, ``j > max T``, on each pop:
    each popped node keeps its children in a private heap and exposes only the
    best remaining one to the global heap.
    """
    r = R.shape[0]
    k = R.shape[1]
    # two spare node slots are scratch space for tie-break walks
    node_parent = np.full(n_pops + 2, -1, dtype=np.int64)
    node_last = np.full(n_pops + 2, -1, dtype=np.int64)
    node_cost = np.zeros(n_pops)
    node_bits = np.zeros((n_pops, r), dtype=np.uint8)
    child_start = np.zeros(n_pops, dtype=np.int64)
    child_size = np.zeros(n_pops, dtype=np.int64)
    pool_cost = np.empty(n_pops * k if k > 0 else 1)
    pool_j = np.empty(n_pops * k if k > 0 else 1, dtype=np.int64)
    heap = np.empty(n_pops, dtype=np.int64)
    buf_a = np.empty(n_pops + 2, dtype=np.int64)
    buf_b = np.empty(n_pops + 2, dtype=np.int64)
    overlap = np.empty(k if k > 0 else 1)
    # row-wise sparse copy of R; column indices ascend within each row
    row_ptr = np.zeros(r + 1, dtype=np.int64)
    for i in range(r):
        cnt = 0
        for j in range(k):
            if R[i, j]:
                cnt += 1
        row_ptr[i + 1] = row_ptr[i] + cnt
    row_idx = np.empty(max(row_ptr[r], 1), dtype=np.int64)
    for i in range(r):
        t = row_ptr[i]
        for j in range(k):
            if R[i, j]:
                row_idx[t] = j
                t += 1
    scratch = n_pops
    pool_used = 0
    hsize = 0

    node_cost[0] = base_cost
    for i in range(r):
        node_bits[0, i] = e0[i]
    pops = 1
    best = 0
    current = 0
    while True:
        # expand the node just popped
        first = node_last[current] + 1
        n_child = k - first
        if n_child > 0 and pops < n_pops:
            for j in range(first, k):
                overlap[j] = 0.0
            for i in range(r):
                if node_bits[current, i]:
                    li = lam_p[i]
                    for t in range(row_ptr[i + 1] - 1, row_ptr[i] - 1, -1):
                        j = row_idx[t]
                        if j < first:
                            break
                        overlap[j] += li
            start = pool_used
            base = node_cost[current]
            for j in range(first, k):
                pool_cost[start + j - first] = base + weights[j] - 2.0 * overlap[j]
                pool_j[start + j - first] = j
            pool_used += n_child
            child_start[current] = start
            child_size[current] = n_child
            for pos in range(n_child // 2 - 1, -1, -1):
                _child_sift_down(pool_cost, pool_j, start, n_child, pos)
            heap[hsize] = current
            hsize += 1
            _heap_sift_up(heap, hsize - 1, pool_cost, pool_j, child_start, scratch, node_parent, node_last, buf_a, buf_b)
        if pops >= n_pops or hsize == 0:
            break
        # pop the globally best child
        p = heap[0]
        s = child_start[p]
        c = pool_cost[s]
        j = pool_j[s]
        node = pops
        node_parent[node] = p
        node_last[node] = j
        node_cost[node] = c
        for i in range(r):
            node_bits[node, i] = node_bits[p, i] ^ R[i, j]
        pops += 1
        if c < node_cost[best]:
            best = node
        # retire that child from p's private heap
        size = child_size[p] - 1
        child_size[p] = size
        if size > 0:
            last = s + size
            pool_cost[s] = pool_cost[last]
            pool_j[s] = pool_j[last]
            _child_sift_down(pool_cost, pool_j, s, size, 0)
        else:
            hsize -= 1
            heap[0] = heap[hsize]
        if hsize > 0:
            _heap_sift_down(heap, hsize, 0, pool_cost, pool_j, child_start, scratch, node_parent, node_last, buf_a, buf_b)
        current = node
    return node_parent[:pops], node_last[:pops], node_cost[:pops], node_bits[:pops], best


def _subset_of(node: int, parent: np.ndarray, last: np.ndarray) -> tuple[int, ...]:
    out = []
    while node > 0:
        out.append(int(last[node]))
        node = int(parent[node])
    return tuple(reversed(out))


def _weight_rank(base: BaseSolution) -> np.ndarray:
    """Free slots sorted by ascending generator weight, ties by column index."""
    return np.lexsort((base.free_cols, base.generator_weights))


def max_pops(k: int, budget: int) -> int:
    return budget if k >= 62 else min(budget, 1 << k)


def bf_osd(base: BaseSolution, budget: int, expansion: str = "eager", record_trace: bool = False) -> Candidate:
    """Best-first search of the coset with a budget of ``budget`` pops.

    The root (the base solution) is the first pop. Each pop evaluates one
    candidate; the running best only changes on a strict improvement, so the
    returned cost is non-increasing in ``budget``. ``expansion="lazy"`` pushes
    only first-child/next-sibling pairs instead of all children.
    """
    return bf_osd_budgets(base, [budget], expansion, record_trace)[0]


def bf_osd_budgets(base: BaseSolution, budgets, expansion: str = "eager", record_trace: bool = False) -> list[Candidate]:
    """One search, read off at several budgets.

    The pop sequence does not depend on the budget, so the answer at budget
    ``Q`` is the first minimum among the first ``Q`` pops of the largest run.
    """
    budgets = [int(b) for b in budgets]
    if not budgets or min(budgets) < 1:
        raise ValueError("budget must be at least 1")
    rank_order = _weight_rank(base)
    R = np.ascontiguousarray(base.pivot_block[:, rank_order])
    weights = np.ascontiguousarray(base.generator_weights[rank_order])
    lam_p = np.ascontiguousarray(base.llrs[base.pivot_cols])
    n_pops = max_pops(base.k, max(budgets))
    if expansion == "eager":
        parent, last, costs, bits, _ = _bf_eager_kernel(
            R, lam_p, weights, base.base_pivot_bits.astype(np.uint8), float(base.base_cost), n_pops
        )
        subsets = None
    elif expansion == "lazy":
        parent, last, costs, bits, _, subsets = _bf_lazy(R, lam_p, weights, base.base_pivot_bits, base.base_cost, n_pops)
    else:
        raise ValueError(f"expansion must be 'eager' or 'lazy', got {expansion!r}")

    def subset(i):
        return subsets[i] if subsets is not None else _subset_of(i, parent, last)

    out = []
    for budget in budgets:
        n = min(len(costs), budget)
        best = int(np.argmin(costs[:n]))  # first minimum = strict-improvement rule
        trace = tuple((subset(i), float(costs[i])) for i in range(n)) if record_trace else None
        slots = rank_order[list(subset(best))]
        out.append(base.candidate(bits[best], slots, best + 1, n, f"bf_osd(Q={budget},{expansion})", trace))
    return out


def _bf_lazy(R, lam_p, weights, e0, base_cost, n_pops):
    r, k = R.shape
    parent = [-1]
    last = [-1]
    costs = [float(base_cost)]
    bits = [np.asarray(e0, dtype=np.uint8)]
    subsets = [()]
    best = 0
    heap: list = []

    def push(T, from_node, j):
        pb = bits[from_node]
        overlap = float(lam_p[pb.astype(bool)] @ R[pb.astype(bool), j]) if r else 0.0
        heapq.heappush(heap, (costs[from_node] + weights[j] - 2.0 * overlap, T, from_node, j))

    if k:
        push((0,), 0, 0)
    while len(costs) < n_pops and heap:
        c, T, from_node, j = heapq.heappop(heap)
        node = len(costs)
        parent.append(from_node)
        last.append(j)
        costs.append(c)
        bits.append(bits[from_node] ^ R[:, j])
        subsets.append(T)
        if c < costs[best]:
            best = node
        if j + 1 < k:
            push(T + (j + 1,), node, j + 1)
            push(T[:-1] + (j + 1,), from_node, j + 1)
    return np.array(parent), np.array(last), np.array(costs), np.array(bits), best, subsets


def format_trace(trace) -> str:
    lines = []
    for q, (T, cost) in enumerate(trace, start=1):
        inner = ",".join(str(t) for t in T)
        lines.append(f"q={q} T={{{inner}}} cost={cost!r}")
    return "\n".join(lines)


# -- decoder configuration ---------------------------------------------------

VARIANTS = ("osd0", "osd_w", "osd_cs", "bf_osd", "oracle")


@dataclass(frozen=True)
class DecoderConfig:
    """Which post-BP search to run and with what parameters.

    ``budget`` is either an integer or ``"cs"``, meaning the OSD-CS candidate
    count ``k + lam*(lam-1)/2`` of the model being decoded. The resolved budget
    is ``max(budget_min, ceil(budget_scale * budget))``.
    """

    variant: str = "bf_osd"
    convention: str = "confidence"
    budget: int | str = "cs"
    budget_scale: float = 1.0
    budget_min: int = 1
    lam: int = 7
    w: int = 4
    expansion: str = "eager"
    selection: str = "llr"
    fast_path: bool = False

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        OrderingConvention.parse(self.convention)
        if self.expansion not in ("eager", "lazy"):
            raise ValueError(f"expansion must be 'eager' or 'lazy', got {self.expansion!r}")
        if self.selection not in ("llr", "weight"):
            raise ValueError(f"selection must be 'llr' or 'weight', got {self.selection!r}")
        if isinstance(self.budget, str):
            if self.budget != "cs":
                raise ValueError(f"budget must be an integer or 'cs', got {self.budget!r}")
        elif int(self.budget) < 1:
            raise ValueError("budget must be at least 1")
        if self.budget_scale <= 0:
            raise ValueError("budget_scale must be positive")

    def resolve_budget(self, k: int) -> int:
        raw = k + self.lam * (self.lam - 1) // 2 if self.budget == "cs" else int(self.budget)
        return max(int(self.budget_min), math.ceil(self.budget_scale * raw - 1e-12), 1)

    def check(self, k: int) -> None:
        """Reject parameters that cannot work on a model with ``k`` free columns."""
        if self.variant == "osd_w" and not 0 <= self.w <= k:
            raise ValueError(f"osd_w needs 0 <= w <= k, got w={self.w}, k={k}")
        if self.variant == "osd_cs" and not 0 <= self.lam <= k:
            raise ValueError(f"osd_cs needs 0 <= lambda <= k, got lambda={self.lam}, k={k}")

    def label(self) -> str:
        if self.variant == "bf_osd":
            extra = f"Q={self.budget}" + (f"x{self.budget_scale:g}" if self.budget_scale != 1 else "")
            return f"bf_osd({extra},{self.expansion})"
        if self.variant == "osd_cs":
            return f"osd_cs(lambda={self.lam})"
        if self.variant == "osd_w":
            return f"osd_w(w={self.w})"
        return self.variant

    def params(self) -> dict:
        return {
            "variant": self.variant,
            "convention": OrderingConvention.parse(self.convention).value,
            "budget": self.budget,
            "budget_scale": self.budget_scale,
            "budget_min": self.budget_min,
            "lam": self.lam,
            "w": self.w,
            "expansion": self.expansion,
            "selection": self.selection,
            "fast_path": self.fast_path,
        }


def is_trivial(syndrome: BitVector, llrs) -> bool:
    return not syndrome.any() and bool(np.all(np.asarray(llrs) > 0))


def zero_candidate(n: int, decoder: str) -> Candidate:
    return Candidate(BitVector.zeros(n), 0.0, (), 0, 0, decoder)


def search(base: BaseSolution, config: DecoderConfig, record_trace: bool = False) -> Candidate:
    """Run the configured coset search on an OSD-0 base."""
    v = config.variant
    if v == "osd0":
        return base_candidate(base)
    if v == "osd_w":
        return osd_w(base, config.w, config.selection)
    if v == "osd_cs":
        return osd_cs(base, config.lam, config.selection)
    if v == "bf_osd":
        return bf_osd(base, config.resolve_budget(base.k), config.expansion, record_trace)
    raise ValueError(f"variant {v!r} is not an OSD search")


def decode(model: DecodingModel, syndrome: BitVector, soft, config: DecoderConfig, record_trace: bool = False) -> Candidate:
    llrs = soft.llrs if isinstance(soft, SoftOutput) else soft
    if config.fast_path and is_trivial(syndrome, llrs):
        return zero_candidate(model.n_columns, config.label())
    base = osd0(model, syndrome, llrs, config.convention)
    return search(base, config, record_trace)
