"""Bit-packed linear algebra over GF(2).

Rows are stored as little-endian ``uint64`` words: bit ``i`` of a row lives in
word ``i // 64`` at position ``i % 64``. Column permutations are never applied
physically; :func:`eliminate_ordered` scans columns through an index array so
results stay in the caller's original column indexing.

Text formats
------------
Dense::

    rows cols
    0110
    ...

Sparse (one line of column indices per row, ``-`` for an empty row)::

    rows cols sparse
    1 2
    -
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from numba import njit

WORD_BITS = 64


class InvalidOrderingError(ValueError):
    """Raised when a column order is not a permutation of the column indices."""


class InconsistentSystemError(ValueError):
    """Raised when a right-hand side lies outside the column space."""


def _n_words(n_bits: int) -> int:
    return max(1, (n_bits + WORD_BITS - 1) // WORD_BITS)


def _pack_rows(dense: np.ndarray) -> np.ndarray:
    dense = np.asarray(dense)
    rows, cols = dense.shape
    n_bytes = _n_words(cols) * 8
    out = np.zeros((rows, n_bytes), dtype=np.uint8)
    if cols:
        packed = np.packbits(dense.astype(bool), axis=1, bitorder="little")
        out[:, : packed.shape[1]] = packed
    return out.view("<u8").astype(np.uint64, copy=False)


def _unpack_rows(words: np.ndarray, cols: int) -> np.ndarray:
    raw = np.ascontiguousarray(words).astype("<u8", copy=False).view(np.uint8)
    return np.unpackbits(raw, axis=-1, count=cols, bitorder="little")


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


class BitVector:
    """Immutable packed vector in F_2^n."""

    __slots__ = ("_length", "_words")

    def __init__(self, length: int, words: np.ndarray):
        words = np.asarray(words, dtype=np.uint64)
        if words.shape != (_n_words(length),):
            raise ValueError(f"expected {_n_words(length)} words for length {length}")
        self._length = int(length)
        self._words = _readonly(words)

    @classmethod
    def zeros(cls, length: int) -> BitVector:
        return cls(length, np.zeros(_n_words(length), dtype=np.uint64))

    @classmethod
    def from_bits(cls, bits) -> BitVector:
        arr = np.asarray(bits, dtype=np.uint8).reshape(1, -1)
        if arr.size and arr.max() > 1:
            raise ValueError("bits must be 0 or 1")
        return cls(arr.shape[1], _pack_rows(arr)[0])

    @classmethod
    def from_indices(cls, length: int, indices: Iterable[int]) -> BitVector:
        arr = np.zeros(length, dtype=np.uint8)
        for i in indices:
            if not 0 <= i < length:
                raise IndexError(f"bit index {i} out of range for length {length}")
            arr[i] ^= 1
        return cls.from_bits(arr)

    @classmethod
    def from_string(cls, text: str) -> BitVector:
        text = text.strip()
        if set(text) - {"0", "1"}:
            raise ValueError(f"not a bit string: {text!r}")
        return cls.from_bits([int(c) for c in text])

    @property
    def words(self) -> np.ndarray:
        return self._words

    def __len__(self) -> int:
        return self._length

    def __getitem__(self, i: int) -> int:
        if not 0 <= i < self._length:
            raise IndexError(f"bit index {i} out of range for length {self._length}")
        return int((self._words[i >> 6] >> np.uint64(i & 63)) & np.uint64(1))

    def _check_same(self, other: BitVector) -> None:
        if not isinstance(other, BitVector) or other._length != self._length:
            raise ValueError("bit vectors must have equal length")

    def __xor__(self, other: BitVector) -> BitVector:
        self._check_same(other)
        return BitVector(self._length, self._words ^ other._words)

    def __and__(self, other: BitVector) -> BitVector:
        self._check_same(other)
        return BitVector(self._length, self._words & other._words)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, BitVector)
            and other._length == self._length
            and bool(np.array_equal(self._words, other._words))
        )

    def __hash__(self) -> int:
        return hash((self._length, self._words.tobytes()))

    def __repr__(self) -> str:
        return f"BitVector('{self.to_string()}')"

    def dot(self, other: BitVector) -> int:
        """GF(2) inner product."""
        self._check_same(other)
        return int(np.bitwise_count(self._words & other._words).sum() & 1)

    def weight(self) -> int:
        return int(np.bitwise_count(self._words).sum())

    def any(self) -> bool:
        return bool(self._words.any())

    def support(self) -> np.ndarray:
        return np.flatnonzero(self.to_array())

    def flip(self, i: int) -> BitVector:
        self[i]  # bounds check
        words = self._words.copy()
        words[i >> 6] ^= np.uint64(1) << np.uint64(i & 63)
        return BitVector(self._length, words)

    def to_array(self) -> np.ndarray:
        return _unpack_rows(self._words, self._length)

    def to_string(self) -> str:
        return "".join("1" if b else "0" for b in self.to_array())


class BitMatrix:
    """Immutable packed row-major matrix over GF(2)."""

    __slots__ = ("_rows", "_cols", "_words")

    def __init__(self, rows: int, cols: int, words: np.ndarray):
        words = np.asarray(words, dtype=np.uint64)
        if words.shape != (rows, _n_words(cols)):
            raise ValueError(f"expected word array of shape {(rows, _n_words(cols))}")
        self._rows = int(rows)
        self._cols = int(cols)
        self._words = _readonly(words)

    @classmethod
    def zeros(cls, rows: int, cols: int) -> BitMatrix:
        return cls(rows, cols, np.zeros((rows, _n_words(cols)), dtype=np.uint64))

    @classmethod
    def identity(cls, n: int) -> BitMatrix:
        return cls.from_dense(np.eye(n, dtype=np.uint8))

    @classmethod
    def from_dense(cls, dense) -> BitMatrix:
        arr = np.asarray(dense, dtype=np.uint8)
        if arr.ndim != 2:
            raise ValueError("dense matrix must be 2-D")
        if arr.size and arr.max() > 1:
            raise ValueError("entries must be 0 or 1")
        return cls(arr.shape[0], arr.shape[1], _pack_rows(arr))

    @classmethod
    def from_sparse(cls, rows: int, cols: int, supports: Sequence[Iterable[int]]) -> BitMatrix:
        if len(supports) != rows:
            raise ValueError(f"expected {rows} rows, got {len(supports)}")
        dense = np.zeros((rows, cols), dtype=np.uint8)
        for i, sup in enumerate(supports):
            for j in sup:
                if not 0 <= j < cols:
                    raise IndexError(f"column index {j} out of range in row {i}")
                dense[i, j] ^= 1
        return cls.from_dense(dense)

    @classmethod
    def from_rows(cls, vectors: Sequence[BitVector], cols: int | None = None) -> BitMatrix:
        if not vectors:
            if cols is None:
                raise ValueError("column count required for an empty row list")
            return cls.zeros(0, cols)
        n = len(vectors[0])
        if any(len(v) != n for v in vectors):
            raise ValueError("rows must have equal length")
        return cls(len(vectors), n, np.stack([v.words for v in vectors]))

    @property
    def rows(self) -> int:
        return self._rows

    @property
    def cols(self) -> int:
        return self._cols

    @property
    def shape(self) -> tuple[int, int]:
        return (self._rows, self._cols)

    @property
    def words(self) -> np.ndarray:
        return self._words

    def get(self, i: int, j: int) -> int:
        if not (0 <= i < self._rows and 0 <= j < self._cols):
            raise IndexError(f"entry ({i}, {j}) out of range for shape {self.shape}")
        return int((self._words[i, j >> 6] >> np.uint64(j & 63)) & np.uint64(1))

    def row(self, i: int) -> BitVector:
        if not 0 <= i < self._rows:
            raise IndexError(f"row {i} out of range")
        return BitVector(self._cols, self._words[i].copy())

    def column(self, j: int) -> BitVector:
        if not 0 <= j < self._cols:
            raise IndexError(f"column {j} out of range")
        bits = (self._words[:, j >> 6] >> np.uint64(j & 63)) & np.uint64(1)
        return BitVector.from_bits(bits.astype(np.uint8))

    def to_dense(self) -> np.ndarray:
        return _unpack_rows(self._words, self._cols).reshape(self._rows, self._cols)

    def transpose(self) -> BitMatrix:
        return BitMatrix.from_dense(self.to_dense().T)

    @property
    def T(self) -> BitMatrix:
        return self.transpose()

    def nnz(self) -> int:
        return int(np.bitwise_count(self._words).sum())

    def is_zero(self) -> bool:
        return not self._words.any()

    def __matmul__(self, other):
        if isinstance(other, BitVector):
            if len(other) != self._cols:
                raise ValueError(f"vector length {len(other)} != matrix cols {self._cols}")
            parity = np.bitwise_count(self._words & other.words).sum(axis=1) & 1
            return BitVector.from_bits(parity.astype(np.uint8))
        if isinstance(other, BitMatrix):
            if other._rows != self._cols:
                raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
            prod = self.to_dense().astype(np.int64) @ other.to_dense().astype(np.int64)
            return BitMatrix.from_dense((prod & 1).astype(np.uint8))
        return NotImplemented

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, BitMatrix)
            and other.shape == self.shape
            and bool(np.array_equal(self._words, other._words))
        )

    def __hash__(self) -> int:
        return hash((self.shape, self._words.tobytes()))

    def __repr__(self) -> str:
        return f"BitMatrix({self._rows}x{self._cols}, nnz={self.nnz()})"

    def hstack(self, other: BitMatrix) -> BitMatrix:
        return BitMatrix.from_dense(np.hstack([self.to_dense(), other.to_dense()]))

    def vstack(self, other: BitMatrix) -> BitMatrix:
        if other._cols != self._cols:
            raise ValueError("column counts differ")
        return BitMatrix(self._rows + other._rows, self._cols, np.vstack([self._words, other._words]))

    def select_columns(self, cols: Sequence[int]) -> BitMatrix:
        return BitMatrix.from_dense(self.to_dense()[:, list(cols)])


@njit(cache=True)
def _eliminate_kernel(a, t, order, track_ops):
    rows = a.shape[0]
    n_words = a.shape[1]
    t_words = t.shape[1]
    n = order.shape[0]
    pivots = np.empty(min(rows, n), dtype=np.int64)
    is_pivot = np.zeros(n, dtype=np.bool_)
    rank = 0
    for idx in range(n):
        if rank == rows:
            break
        col = order[idx]
        w = col >> 6
        mask = np.uint64(1) << np.uint64(col & 63)
        p = -1
        for i in range(rank, rows):
            if (a[i, w] & mask) != 0:
                p = i
                break
        if p < 0:
            continue
        if p != rank:
            for x in range(n_words):
                tmp = a[p, x]
                a[p, x] = a[rank, x]
                a[rank, x] = tmp
            if track_ops:
                for x in range(t_words):
                    tmp = t[p, x]
                    t[p, x] = t[rank, x]
                    t[rank, x] = tmp
        for i in range(rows):
            if i != rank and (a[i, w] & mask) != 0:
                for x in range(n_words):
                    a[i, x] ^= a[rank, x]
                if track_ops:
                    for x in range(t_words):
                        t[i, x] ^= t[rank, x]
        pivots[rank] = col
        is_pivot[col] = True
        rank += 1
    return pivots[:rank], is_pivot


@dataclass(frozen=True, eq=False)
class EliminationResult:
    """Outcome of an ordered Gaussian elimination.

    ``rref`` row ``i`` (for ``i < rank``) carries the pivot of ``pivot_cols[i]``;
    the remaining rows are zero. ``row_ops`` is the accumulated row transform,
    so ``row_ops @ M == rref`` and ``row_ops @ s`` is the reduced right-hand side.
    ``free_cols`` lists the non-pivot columns in scan order.
    """

    rref: BitMatrix
    pivot_cols: np.ndarray
    free_cols: np.ndarray
    row_ops: BitMatrix
    column_order: np.ndarray

    @property
    def rank(self) -> int:
        return len(self.pivot_cols)

    @property
    def n_free(self) -> int:
        return len(self.free_cols)

    def reduce(self, rhs: BitVector) -> BitVector:
        return self.row_ops @ rhs

    def free_block(self) -> np.ndarray:
        """Dense ``rank x n_free`` block of the RREF restricted to free columns."""
        words = self.rref.words[: self.rank]
        dense = _unpack_rows(words, self.rref.cols).reshape(self.rank, self.rref.cols)
        return dense[:, self.free_cols]


def _check_order(order, n: int) -> np.ndarray:
    arr = np.asarray(order)
    if arr.ndim != 1 or arr.shape[0] != n or (n and arr.dtype.kind not in "iu"):
        raise InvalidOrderingError(f"column order must list each of the {n} columns once")
    arr = arr.astype(np.int64)
    if n and not np.array_equal(np.sort(arr), np.arange(n)):
        raise InvalidOrderingError(f"column order is not a permutation of 0..{n - 1}")
    return arr


def eliminate_ordered(M: BitMatrix, column_order) -> EliminationResult:
    """Reduced row-echelon form with pivots chosen greedily in ``column_order``.

    A column becomes a pivot iff it is independent of the pivots chosen before
    it, so scanning by ascending cost yields a minimum-cost basis.
    """
    order = _check_order(column_order, M.cols)
    a = np.array(M.words, dtype=np.uint64, copy=True)
    t = _pack_rows(np.eye(M.rows, dtype=np.uint8))
    pivots, is_pivot = _eliminate_kernel(a, t, order, True)
    free = order[~is_pivot[order]] if M.cols else order
    return EliminationResult(
        rref=BitMatrix(M.rows, M.cols, a),
        pivot_cols=_readonly(pivots.copy()),
        free_cols=_readonly(np.ascontiguousarray(free)),
        row_ops=BitMatrix(M.rows, M.rows, t),
        column_order=_readonly(order),
    )


def rank(M: BitMatrix) -> int:
    if M.rows == 0 or M.cols == 0:
        return 0
    a = np.array(M.words, dtype=np.uint64, copy=True)
    t = np.zeros((1, 1), dtype=np.uint64)
    pivots, _ = _eliminate_kernel(a, t, np.arange(M.cols, dtype=np.int64), False)
    return len(pivots)


def null_space_matrix(er: EliminationResult) -> BitMatrix:
    """Kernel basis as rows, one per free column (in ``er.free_cols`` order)."""
    n = er.rref.cols
    k = er.n_free
    dense = np.zeros((k, n), dtype=np.uint8)
    if k:
        dense[np.arange(k), er.free_cols] = 1
        if er.rank:
            dense[:, er.pivot_cols] = er.free_block().T
    return BitMatrix.from_dense(dense)


def null_space_generators(er: EliminationResult) -> list[BitVector]:
    """Generator ``g_j`` per free column ``j``: a 1 at ``j`` and ``R[i, j]`` at pivot ``pi_i``."""
    G = null_space_matrix(er)
    return [G.row(i) for i in range(G.rows)]


def solve_particular(er: EliminationResult, rhs: BitVector) -> BitVector:
    """Solve ``M e = rhs`` with every free bit fixed to 0.

    Raises:
        InconsistentSystemError: if ``rhs`` is not in the column space of M.
    """
    reduced = er.reduce(rhs).to_array()
    r = er.rank
    if reduced[r:].any():
        raise InconsistentSystemError("inconsistent syndrome: right-hand side not in column space")
    e = np.zeros(er.rref.cols, dtype=np.uint8)
    e[er.pivot_cols] = reduced[:r]
    return BitVector.from_bits(e)


# -- text formats ---------------------------------------------------------


def format_matrix(M: BitMatrix, sparse: bool = False) -> str:
    if sparse:
        lines = [f"{M.rows} {M.cols} sparse"]
        dense = M.to_dense()
        for i in range(M.rows):
            sup = np.flatnonzero(dense[i])
            lines.append(" ".join(str(j) for j in sup) if sup.size else "-")
    else:
        lines = [f"{M.rows} {M.cols}"]
        lines += ["".join(str(b) for b in row) or "-" for row in M.to_dense()]
    return "\n".join(lines) + "\n"


def parse_matrix(text: str) -> BitMatrix:
    lines = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            lines.append(line)
    if not lines:
        raise ValueError("empty matrix text")
    header = lines[0].split()
    if len(header) not in (2, 3) or (len(header) == 3 and header[2] != "sparse"):
        raise ValueError(f"bad matrix header: {lines[0]!r}")
    try:
        rows, cols = int(header[0]), int(header[1])
    except ValueError as exc:
        raise ValueError(f"bad matrix header: {lines[0]!r}") from exc
    body = lines[1:]
    if len(body) != rows:
        raise ValueError(f"header declares {rows} rows, found {len(body)}")
    if len(header) == 3:
        supports = []
        for i, line in enumerate(body):
            try:
                supports.append([] if line == "-" else [int(tok) for tok in line.split()])
            except ValueError as exc:
                raise ValueError(f"row {i}: bad column index list {line!r}") from exc
        try:
            return BitMatrix.from_sparse(rows, cols, supports)
        except IndexError as exc:
            raise ValueError(str(exc)) from exc
    dense = np.zeros((rows, cols), dtype=np.uint8)
    for i, line in enumerate(body):
        line = line.replace(" ", "")
        if line == "-" and cols == 0:
            continue
        if len(line) != cols or set(line) - {"0", "1"}:
            raise ValueError(f"row {i}: expected {cols} characters of 0/1")
        dense[i] = [int(c) for c in line]
    return BitMatrix.from_dense(dense)


def read_matrix(path) -> BitMatrix:
    return parse_matrix(Path(path).read_text())


def write_matrix(path, M: BitMatrix, sparse: bool = False) -> None:
    Path(path).write_text(format_matrix(M, sparse=sparse))
