"""Dense linear algebra over GF(2) with rows packed into Python ints.

Bit ``j`` of a packed row is the entry in column ``j``. Elimination is
plain Gaussian elimination with whole-row XOR; columns are scanned left to
right so basis choices are deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence


def _mask(n: int) -> int:
    return (1 << n) - 1


@dataclass(frozen=True)
class BitVector:
    """A vector in GF(2)^len; coordinate ``i`` is bit ``i`` of ``bits``."""

    len: int
    bits: int = 0

    def __post_init__(self) -> None:
        if self.len < 0:
            raise ValueError("negative length")
        if self.bits < 0 or self.bits >> self.len:
            raise ValueError(f"bits {self.bits:#x} do not fit in length {self.len}")

    @classmethod
    def from_list(cls, entries: Sequence[int]) -> BitVector:
        bits = 0
        for i, x in enumerate(entries):
            if x & 1:
                bits |= 1 << i
        return cls(len(entries), bits)

    @classmethod
    def zero(cls, n: int) -> BitVector:
        return cls(n, 0)

    @classmethod
    def unit(cls, n: int, i: int) -> BitVector:
        return cls(n, 1 << i)

    def to_list(self) -> list[int]:
        return [(self.bits >> i) & 1 for i in range(self.len)]

    def __getitem__(self, i: int) -> int:
        if not 0 <= i < self.len:
            raise IndexError(i)
        return (self.bits >> i) & 1

    def __add__(self, other: BitVector) -> BitVector:
        if self.len != other.len:
            raise ValueError("length mismatch")
        return BitVector(self.len, self.bits ^ other.bits)

    __xor__ = __add__

    def is_zero(self) -> bool:
        return self.bits == 0

    def __str__(self) -> str:
        return "".join(str(x) for x in self.to_list()) or "()"


class BitMatrix:
    """An immutable ``rows x cols`` matrix over GF(2)."""

    __slots__ = ("rows", "cols", "_data")

    def __init__(self, rows: int, cols: int, data: Iterable[int] = ()) -> None:
        packed = tuple(data)
        if not packed:
            packed = (0,) * rows
        if len(packed) != rows:
            raise ValueError(f"expected {rows} packed rows, got {len(packed)}")
        full = _mask(cols)
        for r in packed:
            if r < 0 or r & ~full:
                raise ValueError("row does not fit in the column count")
        self.rows = rows
        self.cols = cols
        self._data = packed

    @classmethod
    def from_lists(cls, entries: Sequence[Sequence[int]], cols: int | None = None) -> BitMatrix:
        if cols is None:
            cols = len(entries[0]) if entries else 0
        data = []
        for row in entries:
            if len(row) != cols:
                raise ValueError("ragged rows")
            data.append(BitVector.from_list(row).bits)
        return cls(len(entries), cols, data)

    @classmethod
    def from_columns(cls, rows: int, columns: Sequence[int]) -> BitMatrix:
        """Build from packed columns (bit ``i`` of a column is row ``i``)."""
        data = [0] * rows
        for j, col in enumerate(columns):
            while col:
                low = col & -col
                i = low.bit_length() - 1
                if i >= rows:
                    raise ValueError("column does not fit in the row count")
                data[i] |= 1 << j
                col ^= low
        return cls(rows, len(columns), data)

    @classmethod
    def identity(cls, n: int) -> BitMatrix:
        return cls(n, n, [1 << i for i in range(n)])

    @classmethod
    def zeros(cls, rows: int, cols: int) -> BitMatrix:
        return cls(rows, cols, [0] * rows)

    @property
    def packed_rows(self) -> tuple[int, ...]:
        return self._data

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    def row(self, i: int) -> BitVector:
        return BitVector(self.cols, self._data[i])

    def column(self, j: int) -> BitVector:
        return BitVector(self.rows, self.packed_column(j))

    def packed_column(self, j: int) -> int:
        if not 0 <= j < self.cols:
            raise IndexError(j)
        col = 0
        for i, r in enumerate(self._data):
            if (r >> j) & 1:
                col |= 1 << i
        return col

    def packed_columns(self) -> list[int]:
        cols = [0] * self.cols
        for i, r in enumerate(self._data):
            while r:
                low = r & -r
                cols[low.bit_length() - 1] |= 1 << i
                r ^= low
        return cols

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        if not (0 <= i < self.rows and 0 <= j < self.cols):
            raise IndexError(ij)
        return (self._data[i] >> j) & 1

    def to_lists(self) -> list[list[int]]:
        return [[(r >> j) & 1 for j in range(self.cols)] for r in self._data]

    def transpose(self) -> BitMatrix:
        return BitMatrix(self.cols, self.rows, self.packed_columns())

    T = property(transpose)

    def vstack(self, other: BitMatrix) -> BitMatrix:
        if self.cols != other.cols:
            raise ValueError("column count mismatch")
        return BitMatrix(self.rows + other.rows, self.cols, self._data + other._data)

    def apply(self, v: int) -> int:
        """Return ``M @ v`` for a packed column vector ``v``."""
        out = 0
        for i, r in enumerate(self._data):
            if (r & v).bit_count() & 1:
                out |= 1 << i
        return out

    def __matmul__(self, other: BitMatrix) -> BitMatrix:
        return multiply(self, other)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BitMatrix):
            return NotImplemented
        return self.shape == other.shape and self._data == other._data

    def __hash__(self) -> int:
        return hash((self.rows, self.cols, self._data))

    def __repr__(self) -> str:
        body = "; ".join("".join(str(x) for x in row) for row in self.to_lists())
        return f"BitMatrix({self.rows}x{self.cols}: {body})"


class XorBasis:
    """Incremental basis of packed vectors keyed by their highest set bit."""

    __slots__ = ("_pivots",)

    def __init__(self) -> None:
        self._pivots: dict[int, int] = {}

    def __len__(self) -> int:
        return len(self._pivots)

    def reduce(self, v: int) -> int:
        pivots = self._pivots
        while v:
            h = v.bit_length() - 1
            p = pivots.get(h)
            if p is None:
                return v
            v ^= p
        return 0

    def add(self, v: int) -> bool:
        """Insert ``v``; return True when it was independent of the basis."""
        v = self.reduce(v)
        if not v:
            return False
        self._pivots[v.bit_length() - 1] = v
        return True


def rank_of_packed(vectors: Iterable[int]) -> int:
    basis = XorBasis()
    for v in vectors:
        basis.add(v)
    return len(basis)


def rank(M: BitMatrix) -> int:
    """Dimension of the column space of ``M``."""
    return rank_of_packed(M.packed_rows)


def column_basis(M: BitMatrix) -> tuple[list[int], BitMatrix]:
    """Leftmost independent columns of ``M`` and the matrix stacking them."""
    indices, picked = column_basis_packed(M.packed_columns(), M.rows)
    return indices, BitMatrix.from_columns(M.rows, picked)


def column_basis_packed(columns: Sequence[int], rows: int) -> tuple[list[int], list[int]]:
    """Greedy column basis over packed columns; stops once rank hits ``rows``."""
    basis = XorBasis()
    indices: list[int] = []
    picked: list[int] = []
    for j, c in enumerate(columns):
        if basis.add(c):
            indices.append(j)
            picked.append(c)
            if len(indices) == rows:
                break
    return indices, picked


def left_inverse(Q: BitMatrix) -> BitMatrix:
    """A ``cols(Q) x rows(Q)`` matrix ``P`` with ``P @ Q == I``.

    Raises ValueError when the columns of ``Q`` are dependent.
    """
    m, q = Q.rows, Q.cols
    # row i of the augmented system is [Q_i | e_i]
    work = [r | (1 << (q + i)) for i, r in enumerate(Q.packed_rows)]
    pivot_rows: list[int] = []
    used = [False] * m
    for col in range(q):
        bit = 1 << col
        piv = next((i for i in range(m) if not used[i] and work[i] & bit), None)
        if piv is None:
            raise ValueError("columns of Q are linearly dependent")
        used[piv] = True
        pv = work[piv]
        for i in range(m):
            if i != piv and work[i] & bit:
                work[i] ^= pv
        pivot_rows.append(piv)
    return BitMatrix(q, m, [work[i] >> q for i in pivot_rows])


def multiply(A: BitMatrix, B: BitMatrix) -> BitMatrix:
    if A.cols != B.rows:
        raise ValueError(f"cannot multiply {A.shape} by {B.shape}")
    brows = B.packed_rows
    out = []
    for r in A.packed_rows:
        acc = 0
        while r:
            low = r & -r
            acc ^= brows[low.bit_length() - 1]
            r ^= low
        out.append(acc)
    return BitMatrix(A.rows, B.cols, out)


def row_space_member(M: BitMatrix, v: BitVector) -> bool:
    if v.len != M.cols:
        raise ValueError("vector length does not match column count")
    basis = XorBasis()
    for r in M.packed_rows:
        basis.add(r)
    return basis.reduce(v.bits) == 0
