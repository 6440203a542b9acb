"""
Sparse exact linear algebra over F_p and Z/p^N.

Over F_p everything goes through Gaussian elimination to reduced row echelon
form. Over Z/p^N (N > 1) rows are brought to Howell normal form, the
canonical echelon form for modules over a chain ring; solving and kernels use
the Howell form of the augmented system [A^T | I].

Vectors are plain ``dict[int, int]`` maps from column index to a nonzero
residue. Column order is whatever the caller assigns, so callers that need
reproducible answers must enumerate their bases canonically.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, Iterable, List, Mapping, Sequence, Tuple, Union

from .errors import ConfigurationError

logger = logging.getLogger(__name__)

SparseVector = Dict[int, int]
RowEntries = Tuple[Tuple[int, int], ...]


def _clean(vector: Mapping[int, int], modulus: int) -> SparseVector:
    return {col: value % modulus for col, value in vector.items() if value % modulus}


@dataclass(frozen=True)
class SparseMatrix:
    """Row-major sparse matrix over Z/p^N (F_p when ``N == 1``)."""

    nrows: int
    ncols: int
    p: int
    N: int
    rows: Tuple[RowEntries, ...]

    @property
    def modulus(self) -> int:
        return self.p ** self.N

    @classmethod
    def from_rows(
        cls, rows: Sequence[Mapping[int, int]], ncols: int, p: int, N: int = 1
    ) -> "SparseMatrix":
        modulus = p ** N
        canonical: List[RowEntries] = []
        for row in rows:
            cleaned = _clean(row, modulus)
            if any(col < 0 or col >= ncols for col in cleaned):
                raise ConfigurationError(f"row entry outside 0..{ncols - 1}: {sorted(cleaned)}")
            canonical.append(tuple(sorted(cleaned.items())))
        return cls(nrows=len(canonical), ncols=ncols, p=p, N=N, rows=tuple(canonical))

    @classmethod
    def from_columns(
        cls, columns: Sequence[Mapping[int, int]], nrows: int, p: int, N: int = 1
    ) -> "SparseMatrix":
        buckets: List[SparseVector] = [dict() for _ in range(nrows)]
        for j, column in enumerate(columns):
            for i, value in column.items():
                if i < 0 or i >= nrows:
                    raise ConfigurationError(f"column entry outside 0..{nrows - 1}: row {i}")
                buckets[i][j] = value
        return cls.from_rows(buckets, len(columns), p, N)

    def row(self, index: int) -> SparseVector:
        return dict(self.rows[index])

    def columns(self) -> List[SparseVector]:
        cols: List[SparseVector] = [dict() for _ in range(self.ncols)]
        for i, row in enumerate(self.rows):
            for j, value in row:
                cols[j][i] = value
        return cols

    def apply(self, vector: Mapping[int, int]) -> SparseVector:
        """Return A·x for a sparse column vector x."""
        out: SparseVector = {}
        for i, row in enumerate(self.rows):
            acc = 0
            for j, value in row:
                x = vector.get(j)
                if x:
                    acc += value * x
            acc %= self.modulus
            if acc:
                out[i] = acc
        return out


@dataclass(frozen=True)
class RankProfile:
    rank: int
    pivots: Tuple[int, ...]
    form: SparseMatrix


@dataclass(frozen=True)
class Solution:
    """Particular solution plus generators of the kernel (as a module over Z/p^N)."""

    particular: SparseVector
    kernel: Tuple[SparseVector, ...]


@dataclass(frozen=True)
class Inconsistent:
    reason: str = "system has no solution"


SolveResult = Union[Solution, Inconsistent]


# ---------------------------------------------------------------------------
# F_p: Gaussian elimination
# ---------------------------------------------------------------------------


def _subtract_multiple(target: SparseVector, factor: int, source: Mapping[int, int], modulus: int) -> None:
    for col, value in source.items():
        updated = (target.get(col, 0) - factor * value) % modulus
        if updated:
            target[col] = updated
        else:
            target.pop(col, None)


def _rref(rows: Iterable[Mapping[int, int]], p: int) -> List[Tuple[int, SparseVector]]:
    pivots: Dict[int, SparseVector] = {}
    for raw in rows:
        row = dict(raw)
        while row:
            lead = min(row)
            pivot_row = pivots.get(lead)
            if pivot_row is None:
                inverse = pow(row[lead], -1, p)
                if inverse != 1:
                    row = {col: value * inverse % p for col, value in row.items()}
                pivots[lead] = row
                break
            _subtract_multiple(row, row[lead], pivot_row, p)

    order = sorted(pivots)
    for position in range(len(order) - 1, -1, -1):
        col = order[position]
        pivot_row = pivots[col]
        for above in order[:position]:
            factor = pivots[above].get(col)
            if factor:
                _subtract_multiple(pivots[above], factor, pivot_row, p)
    return [(col, pivots[col]) for col in order]


# ---------------------------------------------------------------------------
# Z/p^N: Howell normal form
# ---------------------------------------------------------------------------


def _valuation(value: int, p: int, N: int) -> int:
    v = 0
    while v < N and value % p == 0:
        value //= p
        v += 1
    return v


def _howell(rows: Iterable[Mapping[int, int]], p: int, N: int) -> List[Tuple[int, SparseVector]]:
    modulus = p ** N
    pending = [_clean(row, modulus) for row in rows]
    pending = [row for row in pending if row]
    result: List[Tuple[int, SparseVector]] = []

    while pending:
        lead = min(min(row) for row in pending)
        candidates = [i for i, row in enumerate(pending) if lead in row]
        best = min(candidates, key=lambda i: (_valuation(pending[i][lead], p, N), i))
        pivot_row = pending.pop(best)

        e = _valuation(pivot_row[lead], p, N)
        unit = pivot_row[lead] // p ** e
        inverse = pow(unit, -1, modulus)
        pivot_row = _clean({col: value * inverse for col, value in pivot_row.items()}, modulus)
        pe = p ** e

        survivors: List[SparseVector] = []
        for row in pending:
            entry = row.get(lead)
            if entry:
                _subtract_multiple(row, entry // pe, pivot_row, modulus)
            if row:
                survivors.append(row)
        if e > 0:
            saturated = _clean({col: value * p ** (N - e) for col, value in pivot_row.items()}, modulus)
            if saturated:
                survivors.append(saturated)
        pending = survivors
        result.append((lead, pivot_row))

    for i, (col, pivot_row) in enumerate(result):
        pe = pivot_row[col]
        for j in range(i):
            entry = result[j][1].get(col)
            if entry and entry >= pe:
                _subtract_multiple(result[j][1], entry // pe, pivot_row, modulus)
    return result


def _echelon(rows: Iterable[Mapping[int, int]], p: int, N: int) -> List[Tuple[int, SparseVector]]:
    if N == 1:
        return _rref(rows, p)
    return _howell(rows, p, N)


# ---------------------------------------------------------------------------
# Public operations
# ---------------------------------------------------------------------------


def rank_profile(matrix: SparseMatrix) -> RankProfile:
    echelon = _echelon((dict(row) for row in matrix.rows), matrix.p, matrix.N)
    form = SparseMatrix.from_rows([row for _, row in echelon], matrix.ncols, matrix.p, matrix.N)
    return RankProfile(rank=len(echelon), pivots=tuple(col for col, _ in echelon), form=form)


def solve(matrix: SparseMatrix, rhs: Union[Mapping[int, int], Sequence[int]]) -> SolveResult:
    """Solve A·x = b; returns a particular solution and kernel generators or ``Inconsistent``."""
    if isinstance(rhs, Mapping):
        b = dict(rhs)
        if any(i < 0 or i >= matrix.nrows for i in b):
            raise ConfigurationError("right-hand side has entries outside the row range")
    else:
        if len(rhs) != matrix.nrows:
            raise ConfigurationError(f"right-hand side has length {len(rhs)}, expected {matrix.nrows}")
        b = {i: value for i, value in enumerate(rhs) if value}
    b = _clean(b, matrix.modulus)

    if matrix.N == 1:
        return _solve_field(matrix, b)
    return _solve_chain_ring(matrix, b)


def _solve_field(matrix: SparseMatrix, b: SparseVector) -> SolveResult:
    p, n = matrix.p, matrix.ncols
    augmented = []
    for i, row in enumerate(matrix.rows):
        entries = dict(row)
        if i in b:
            entries[n] = b[i]
        augmented.append(entries)
    echelon = _rref(augmented, p)
    if any(col == n for col, _ in echelon):
        return Inconsistent()

    particular = {col: row[n] for col, row in echelon if row.get(n)}
    pivot_cols = {col for col, _ in echelon}
    kernel: Dict[int, SparseVector] = {f: {f: 1} for f in range(n) if f not in pivot_cols}
    for col, row in echelon:
        for j, value in row.items():
            if j < n and j != col:
                kernel[j][col] = (-value) % p
    return Solution(particular=particular, kernel=tuple(kernel[f] for f in sorted(kernel)))


def _solve_chain_ring(matrix: SparseMatrix, b: SparseVector) -> SolveResult:
    modulus, width = matrix.modulus, matrix.nrows
    transposed = matrix.columns()
    augmented = []
    for j, column in enumerate(transposed):
        entries = dict(column)
        entries[width + j] = 1
        augmented.append(entries)
    howell = _howell(augmented, matrix.p, matrix.N)

    residual = dict(b)
    for col, row in howell:
        if col >= width:
            break
        entry = residual.get(col)
        if not entry:
            continue
        pe = row[col]
        if entry % pe:
            return Inconsistent(reason=f"row {col} not divisible by pivot {pe}")
        _subtract_multiple(residual, entry // pe, row, modulus)
    if any(col < width for col in residual):
        return Inconsistent()

    particular = {col - width: (-value) % modulus for col, value in residual.items()}
    particular = {j: v for j, v in particular.items() if v}
    kernel = tuple(
        {c - width: value for c, value in row.items()} for col, row in howell if col >= width
    )
    return Solution(particular=particular, kernel=kernel)


def kernel(matrix: SparseMatrix) -> Tuple[SparseVector, ...]:
    result = solve(matrix, {})
    assert isinstance(result, Solution)
    return result.kernel


def canonical_rows(rows: Iterable[Mapping[int, int]], p: int, N: int = 1) -> Tuple[RowEntries, ...]:
    """Canonical form (RREF or Howell) of the row module spanned by ``rows``."""
    return tuple(tuple(sorted(row.items())) for _, row in _echelon(rows, p, N))


def row_space_equal(
    first: Iterable[Mapping[int, int]], second: Iterable[Mapping[int, int]], p: int, N: int = 1
) -> bool:
    return canonical_rows(first, p, N) == canonical_rows(second, p, N)


def row_space_contains(
    ambient: Sequence[Mapping[int, int]], candidates: Sequence[Mapping[int, int]], p: int, N: int = 1
) -> bool:
    """True when every candidate lies in the row module spanned by ``ambient``."""
    base = canonical_rows(ambient, p, N)
    return canonical_rows(list(ambient) + list(candidates), p, N) == base


def rank(rows: Iterable[Mapping[int, int]], p: int, N: int = 1) -> int:
    return len(_echelon(rows, p, N))


def verify_solution(matrix: SparseMatrix, rhs: Mapping[int, int], solution: Solution) -> bool:
    modulus = matrix.modulus
    if _clean(matrix.apply(solution.particular), modulus) != _clean(rhs, modulus):
        return False
    return all(not matrix.apply(vector) for vector in solution.kernel)
