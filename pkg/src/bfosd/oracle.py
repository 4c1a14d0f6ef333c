"""Brute-force references for tests and acceptance runs.

The linear algebra here is a separate pure-Python implementation on integer
bitmasks so that it does not share code with the kernels it is used to check.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .gf2 import BitMatrix, BitVector

MAX_COSET_DIM = 24
MAX_BASIS_COLS = 20
_TABLE_BITS = 12


class OracleRefusal(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class OracleResult:
    minimum_cost: float
    argmin: BitVector
    enumerated: int


def _int_rank(vectors) -> int:
    basis: dict[int, int] = {}
    for v in vectors:
        while v:
            top = v.bit_length() - 1
            if top not in basis:
                basis[top] = v
                break
            v ^= basis[top]
    return len(basis)


def _solve_with_kernel(dense: np.ndarray, rhs: np.ndarray):
    """Particular solution and kernel basis by plain row reduction on int rows."""
    m, n = dense.shape
    rows = []
    for i in range(m):
        val = int(rhs[i]) << n
        for j in np.flatnonzero(dense[i]):
            val |= 1 << int(j)
        rows.append(val)
    pivots = []
    r = 0
    for col in range(n):
        bit = 1 << col
        p = next((i for i in range(r, m) if rows[i] & bit), None)
        if p is None:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        for i in range(m):
            if i != r and rows[i] & bit:
                rows[i] ^= rows[r]
        pivots.append(col)
        r += 1
    if any(rows[i] >> n & 1 for i in range(r, m)):
        return None, None
    e0 = np.zeros(n, dtype=np.uint8)
    for i, col in enumerate(pivots):
        e0[col] = rows[i] >> n & 1
    piv_set = set(pivots)
    kernel = []
    for f in range(n):
        if f in piv_set:
            continue
        g = np.zeros(n, dtype=np.uint8)
        g[f] = 1
        for i, col in enumerate(pivots):
            if rows[i] >> f & 1:
                g[col] = 1
        kernel.append(g)
    return e0, (np.array(kernel, dtype=np.uint8).reshape(len(kernel), n))


def _gray_table(gens: np.ndarray, n: int) -> np.ndarray:
    """All XOR combinations of ``gens`` in reflected Gray-code order."""
    table = np.zeros((1, n), dtype=np.uint8)
    for g in gens:
        table = np.vstack([table, table[::-1] ^ g])
    return table


def _lex_key(row: np.ndarray) -> bytes:
    return np.packbits(row, bitorder="big").tobytes()


def coset_min(model, syndrome: BitVector, llrs) -> OracleResult:
    """Exact minimum of ``sum(llrs[e == 1])`` over all ``e`` with ``H e = s``.

    ``model`` may be a :class:`~bfosd.model.DecodingModel` or a bare
    :class:`BitMatrix`. Ties go to the lexicographically smallest error.

    Raises:
        OracleRefusal: if the coset dimension exceeds ``MAX_COSET_DIM``.
        ValueError: if the syndrome is not in the column space.
    """
    h = model.h_dec if hasattr(model, "h_dec") else model
    dense = h.to_dense()
    n = h.cols
    lam = np.asarray(llrs, dtype=np.float64)
    if lam.shape != (n,) or np.any(lam < 0):
        raise ValueError("coset_min needs one non-negative weight per column")
    e0, kernel = _solve_with_kernel(dense, syndrome.to_array())
    if e0 is None:
        raise ValueError("inconsistent syndrome: not in the column space")
    k = kernel.shape[0]
    if k > MAX_COSET_DIM:
        raise OracleRefusal(f"coset dimension {k} exceeds the enumeration limit {MAX_COSET_DIM}")
    low = _gray_table(kernel[: min(k, _TABLE_BITS)], n)
    high = kernel[min(k, _TABLE_BITS) :]
    best_cost = np.inf
    best_row = None
    offset = e0.copy()
    n_high = 1 << len(high)
    for t in range(n_high):
        if t:
            offset = offset ^ high[(t & -t).bit_length() - 1]
        block = low ^ offset
        costs = block.astype(np.float64) @ lam
        c = costs.min()
        if c <= best_cost:
            ties = np.flatnonzero(costs == c)
            row = min((block[i] for i in ties), key=_lex_key)
            if c < best_cost or _lex_key(row) < _lex_key(best_row):
                best_cost, best_row = float(c), row.copy()
    return OracleResult(best_cost, BitVector.from_bits(best_row), 1 << k)


def min_cost_basis(M: BitMatrix, costs) -> OracleResult:
    """Minimum aggregate cost over all column bases, by enumerating ``rank``-subsets.

    ``argmin`` is the indicator of the chosen columns; among ties the
    lexicographically first subset wins.
    """
    n = M.cols
    if n > MAX_BASIS_COLS:
        raise OracleRefusal(f"{n} columns exceeds the enumeration limit {MAX_BASIS_COLS}")
    costs = np.asarray(costs, dtype=np.float64)
    if costs.shape != (n,):
        raise ValueError(f"expected {n} costs")
    dense = M.to_dense()
    cols = [sum(1 << int(i) for i in np.flatnonzero(dense[:, j])) for j in range(n)]
    r = _int_rank(cols)
    best_cost, best_set, seen = np.inf, (), 0
    for subset in combinations(range(n), r):
        seen += 1
        c = float(costs[list(subset)].sum())
        if c < best_cost and _int_rank(cols[j] for j in subset) == r:
            best_cost, best_set = c, subset
    return OracleResult(best_cost, BitVector.from_indices(n, best_set), seen)
