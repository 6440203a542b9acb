import pytest

from bpbv_engine.errors import ConfigurationError
from bpbv_engine.linalg import (
    Inconsistent,
    Solution,
    SparseMatrix,
    canonical_rows,
    kernel,
    rank,
    rank_profile,
    row_space_contains,
    row_space_equal,
    solve,
    verify_solution,
)


def test_identity_system():
    identity = SparseMatrix.from_rows([{0: 1}, {1: 1}, {2: 1}], 3, p=3)
    result = solve(identity, [2, 0, 1])
    assert isinstance(result, Solution)
    assert result.particular == {0: 2, 2: 1}
    assert result.kernel == ()


def test_chain_ring_solution_and_kernel():
    matrix = SparseMatrix.from_rows([{0: 2}], 1, p=2, N=2)
    result = solve(matrix, [2])
    assert isinstance(result, Solution)
    assert result.particular == {0: 1}
    assert result.kernel == ({0: 2},)
    assert verify_solution(matrix, {0: 2}, result)


def test_chain_ring_inconsistent():
    matrix = SparseMatrix.from_rows([{0: 2}], 1, p=2, N=2)
    assert isinstance(solve(matrix, [1]), Inconsistent)


def test_field_inconsistent():
    matrix = SparseMatrix.from_rows([{0: 1, 1: 1}, {0: 1, 1: 1}], 2, p=2)
    assert isinstance(solve(matrix, [1, 0]), Inconsistent)


def test_field_kernel():
    matrix = SparseMatrix.from_rows([{0: 1, 1: 1, 2: 1}], 3, p=2)
    vectors = kernel(matrix)
    assert len(vectors) == 2
    assert all(not matrix.apply(vector) for vector in vectors)


def test_rank_profile():
    zero = SparseMatrix.from_rows([{}, {}], 3, p=5)
    assert rank_profile(zero).rank == 0
    identity = SparseMatrix.from_rows([{i: 1} for i in range(4)], 4, p=5)
    profile = rank_profile(identity)
    assert profile.rank == 4
    assert profile.pivots == (0, 1, 2, 3)
    single = SparseMatrix.from_rows([{0: 2}], 1, p=2, N=2)
    assert rank_profile(single).rank == 1


def test_howell_form_is_canonical():
    first = [{0: 1, 1: 2}, {1: 2}]
    second = [{0: 1}, {0: 1, 1: 2}]
    assert canonical_rows(first, 2, 2) == canonical_rows(second, 2, 2)
    assert row_space_equal(first, second, 2, 2)


def test_row_space_containment():
    ambient = [{0: 1, 1: 1}, {2: 1}]
    assert row_space_contains(ambient, [{0: 1, 1: 1, 2: 1}], 2)
    assert not row_space_contains(ambient, [{0: 1}], 2)
    assert rank(ambient + [{0: 1}], 2) == 3


def test_dimension_mismatch():
    matrix = SparseMatrix.from_rows([{0: 1}], 1, p=2)
    with pytest.raises(ConfigurationError):
        solve(matrix, [1, 0])
    with pytest.raises(ConfigurationError):
        SparseMatrix.from_rows([{3: 1}], 2, p=2)
