from __future__ import annotations

import itertools
import random
import time

import pytest
from hypothesis import given
from hypothesis import strategies as st

from gainlift.gf2 import (
    BitMatrix,
    BitVector,
    XorBasis,
    column_basis,
    left_inverse,
    multiply,
    rank,
    row_space_member,
)


def brute_rank(rows: list[int]) -> int:
    span = {0}
    for r in rows:
        span |= {s ^ r for s in span}
    return len(span).bit_length() - 1


matrices = st.integers(0, 8).flatmap(
    lambda rows: st.integers(0, 8).flatmap(
        lambda cols: st.lists(st.integers(0, (1 << cols) - 1), min_size=rows, max_size=rows).map(
            lambda data: BitMatrix(rows, cols, data)
        )
    )
)


def test_bitvector_basics():
    v = BitVector.from_list([1, 0, 1])
    assert v.bits == 0b101 and v.to_list() == [1, 0, 1]
    assert (v + BitVector.unit(3, 0)).to_list() == [0, 0, 1]
    assert BitVector.zero(4).is_zero()
    with pytest.raises(ValueError):
        BitVector(2, 0b100)
    with pytest.raises(ValueError):
        v + BitVector.zero(2)


def test_rank_examples():
    assert rank(BitMatrix.from_lists([[1, 1], [1, 1]])) == 1
    assert rank(BitMatrix.from_lists([[1, 1, 0], [0, 1, 1], [1, 0, 1]])) == 2
    assert rank(BitMatrix.identity(5)) == 5
    assert rank(BitMatrix.zeros(3, 4)) == 0


@given(matrices)
def test_rank_matches_row_subset_enumeration(M):
    assert rank(M) == brute_rank(list(M.packed_rows))


@given(matrices)
def test_rank_of_transpose(M):
    assert rank(M.T) == rank(M)
    assert M.T.T == M


@given(matrices, matrices)
def test_stacked_rank_bounds(A, B):
    if A.cols != B.cols:
        B = BitMatrix(B.rows, A.cols, [r & ((1 << A.cols) - 1) for r in B.packed_rows])
    s = rank(A.vstack(B))
    assert max(rank(A), rank(B)) <= s <= rank(A) + rank(B)


def test_column_basis_examples():
    idx, Q = column_basis(BitMatrix.zeros(3, 2))
    assert idx == [] and Q.shape == (3, 0)
    c = [[1], [0], [1]]
    idx, Q = column_basis(BitMatrix.from_lists([r + r for r in c]))
    assert idx == [0] and Q.to_lists() == c
    theta = BitMatrix.from_columns(3, [0b011, 0b101])
    idx, Q = column_basis(theta)
    assert idx == [0, 1] and rank(Q) == 2


@given(matrices)
def test_column_basis_and_left_inverse(M):
    idx, Q = column_basis(M)
    assert len(idx) == rank(M) == rank(Q)
    assert [M.packed_column(j) for j in idx] == Q.packed_columns()
    P = left_inverse(Q)
    assert P.shape == (Q.cols, Q.rows)
    assert P @ Q == BitMatrix.identity(Q.cols)


def test_left_inverse_examples():
    assert left_inverse(BitMatrix.identity(3)) == BitMatrix.identity(3)
    P = left_inverse(BitMatrix.from_lists([[1], [1]]))
    assert P @ BitMatrix.from_lists([[1], [1]]) == BitMatrix.identity(1)
    assert P.to_lists() == [[1, 0]]
    # columns e1 and e1+e2 of a 3x2 matrix
    Q = BitMatrix.from_columns(3, [0b001, 0b011])
    P = left_inverse(Q)
    assert P @ Q == BitMatrix.identity(2)
    assert P.to_lists() == [[1, 1, 0], [0, 1, 0]]
    # the row pair (1,0,0), (1,1,0) does not invert Q: its second row hits e1 too
    wrong = BitMatrix.from_lists([[1, 0, 0], [1, 1, 0]])
    assert wrong @ Q != BitMatrix.identity(2)


def test_left_inverse_rejects_dependent_columns():
    with pytest.raises(ValueError):
        left_inverse(BitMatrix.from_columns(2, [0b11, 0b11]))


def test_multiply_examples():
    A = BitMatrix.from_lists([[1, 0, 1], [0, 1, 1]])
    assert A @ BitMatrix.identity(3) == A
    one = BitMatrix.from_lists([[1, 1]])
    assert (one @ one.T).to_lists() == [[0]]
    with pytest.raises(ValueError):
        multiply(A, A)


@given(matrices, st.integers(0, 255))
def test_apply_matches_multiply(M, v):
    v &= (1 << M.cols) - 1
    col = BitMatrix.from_columns(M.cols, [v])
    assert (M @ col).packed_columns() == [M.apply(v)]


def test_row_space_member_examples():
    M = BitMatrix.from_lists([[1, 0, 1], [0, 1, 1]])
    assert row_space_member(M, BitVector.zero(3))
    assert row_space_member(BitMatrix.identity(2), BitVector.from_list([1, 1]))
    assert not row_space_member(BitMatrix.from_lists([[1, 1, 0]]), BitVector.from_list([0, 1, 1]))
    with pytest.raises(ValueError):
        row_space_member(M, BitVector.zero(2))


def test_row_space_member_matches_enumeration():
    rng = random.Random(3)
    for _ in range(100):
        rows = [rng.randrange(16) for _ in range(rng.randint(0, 4))]
        span = {0}
        for r in rows:
            span |= {s ^ r for s in span}
        M = BitMatrix(len(rows), 4, rows) if rows else BitMatrix.zeros(0, 4)
        for v in range(16):
            assert row_space_member(M, BitVector(4, v)) == (v in span)


def test_xor_basis_reports_independence():
    b = XorBasis()
    assert b.add(0b110) and b.add(0b011)
    assert not b.add(0b101)
    assert len(b) == 2 and b.reduce(0b101) == 0


def test_matrix_round_trips():
    rows = [[1, 0, 1, 1], [0, 0, 1, 0]]
    M = BitMatrix.from_lists(rows)
    assert M.to_lists() == rows
    assert BitMatrix.from_columns(2, M.packed_columns()) == M
    assert M[0, 3] == 1 and M.column(2).to_list() == [1, 1]
    for i, j in itertools.product(range(2), range(4)):
        assert M.T[j, i] == M[i, j]


def test_rank_1024_is_fast():
    rng = random.Random(0)
    M = BitMatrix(1024, 1024, [rng.getrandbits(1024) for _ in range(1024)])
    t = time.perf_counter()
    r = rank(M)
    assert time.perf_counter() - t < 1.0
    assert 1014 <= r <= 1024
