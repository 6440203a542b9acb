"""
Graded slices of truncated series rings and the certificates built on them.

A slice is the finite set of monomials v^a x^b of one cohomological degree d
with x-degree at most a cap. Every statement of the form "z lies in the ideal"
or "the kernel of multiplication by u is this ideal" is reduced to sparse
linear algebra on slices, over F_p or over Z/p^N.

Projecting an ideal to a slice is exact: an element sum h_j g_j only sees
multipliers of x-degree <= cap - ord(g_j) below the cap. Kernels are not: the
computed kernel can only be larger than the true one, which is why kernel
comparisons distinguish FAIL from UNDECIDED-AT-CUTOFF.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

from .coeffring import VKey, vkey_degree, vkey_mul, v_monomials_of_weight
from .errors import ConfigurationError, InvariantViolation, PreconditionError
from .linalg import (
    Inconsistent,
    SparseMatrix,
    SparseVector,
    canonical_rows,
    kernel,
    row_space_contains,
    row_space_equal,
    solve,
)
from .models import FAIL, PASS, UNDECIDED, CheckOutcome
from .series import SeriesRing, TruncatedSeries, XExp, ts_parse

logger = logging.getLogger(__name__)

Monomial = Tuple[XExp, VKey]
FlatTerm = Tuple[XExp, VKey, int, int]


def chain_parameters(ring: SeriesRing) -> Tuple[int, int]:
    """(p, N) of the coefficient scalars: F_p is N = 1."""
    scalars = ring.scalars
    if scalars.kind == "prime_field":
        return scalars.p, 1
    if scalars.kind == "integers_mod":
        return scalars.p, scalars.N
    raise ConfigurationError("slice linear algebra needs modular scalars, not rationals")


# ========== 1. Slice bases ==========


def _exponents_of_degree(weights: Tuple[int, ...], total: int) -> List[XExp]:
    if not weights:
        return [()] if total == 0 else []
    found: List[XExp] = []
    head = weights[0]
    for e in range(total // head + 1):
        for rest in _exponents_of_degree(weights[1:], total - head * e):
            found.append((e,) + rest)
    return sorted(found)


@dataclass(frozen=True)
class SliceBasis:
    """
    Monomials v^a x^b of cohomological degree ``degree`` and x-degree <= ``cap``.

    Ordered by x-degree, then x-exponent, then v-key; linear algebra inherits
    this column order, so certificates are reproducible.
    """

    ring: SeriesRing
    degree: int
    cap: int
    monomials: Tuple[Monomial, ...]
    _index: Dict[Monomial, int] = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "_index", {mono: i for i, mono in enumerate(self.monomials)})

    def __len__(self) -> int:
        return len(self.monomials)

    def position(self, xexp: XExp, vkey: VKey) -> Optional[int]:
        return self._index.get((xexp, vkey))

    def vector(self, series: TruncatedSeries) -> SparseVector:
        """Coordinates of the part of ``series`` below the cap; terms off the slice are rejected."""
        out: SparseVector = {}
        degree = self.ring.degree
        p = self.ring.scalars.p
        for xexp, vkey, scalar in series.flat_terms():
            if degree(xexp) > self.cap:
                continue
            col = self._index.get((xexp, vkey))
            if col is None:
                found = 2 * degree(xexp) + vkey_degree(vkey, p)
                raise PreconditionError(f"term of degree {found} does not lie on the degree-{self.degree} slice")
            out[col] = scalar
        return out

    def element(self, vector: Mapping[int, int], prec: Optional[int] = None) -> TruncatedSeries:
        prec = self.cap if prec is None else prec
        items = ((self.monomials[i][0], self.monomials[i][1], value) for i, value in vector.items())
        return self.ring.from_flat(prec, items)

    def render_vector(self, vector: Mapping[int, int]) -> str:
        return self.element(vector).render()

    def x_degree(self, index: int) -> int:
        return self.ring.degree(self.monomials[index][0])


@lru_cache(maxsize=256)
def slice_basis(ring: SeriesRing, degree: int, cap: int) -> SliceBasis:
    """Enumerate a slice; odd degrees and negative caps give the empty slice."""
    monomials: List[Monomial] = []
    if degree % 2 == 0 and cap >= 0:
        half = degree // 2
        p = ring.scalars.p
        for xdeg in range(max(half, 0), cap + 1):
            vkeys = v_monomials_of_weight(xdeg - half, ring.lo, ring.hi, p)
            if not vkeys:
                continue
            for xexp in _exponents_of_degree(ring.weights, xdeg):
                monomials.extend((xexp, vkey) for vkey in vkeys)
    basis = SliceBasis(ring, degree, cap, tuple(monomials))
    logger.debug("slice d=%d cap=%d in %s: %d monomials", degree, cap, ring.describe(), len(basis))
    return basis


def _flat(series: TruncatedSeries) -> List[FlatTerm]:
    degree = series.ring.degree
    return [(xexp, vkey, scalar, degree(xexp)) for xexp, vkey, scalar in series.flat_terms()]


def _shifted_vector(
    basis: SliceBasis, xexp: XExp, vkey: VKey, terms: Sequence[FlatTerm], sign: int = 1
) -> SparseVector:
    """Coordinates of (v^vkey x^xexp) * series, where ``terms`` is the series in flat form."""
    out: SparseVector = {}
    room = basis.cap - basis.ring.degree(xexp)
    modulus = basis.ring.scalars.modulus
    for gx, gv, scalar, gdeg in terms:
        if gdeg > room:
            continue
        key = (tuple(a + b for a, b in zip(xexp, gx)), vkey_mul(vkey, gv))
        col = basis._index.get(key)
        if col is None:
            raise PreconditionError(f"product term {key} falls outside the degree-{basis.degree} slice")
        value = (out.get(col, 0) + sign * scalar) % modulus
        if value:
            out[col] = value
        else:
            out.pop(col, None)
    return out


# ========== 2. Presentations ==========


@dataclass(frozen=True, eq=False)
class QuotientPresentation:
    """
    An ambient series ring and finitely many homogeneous ideal generators.

    ``truncation`` is the x-degree bound the generators were computed to;
    ``precision`` is the smallest precision actually carried by a generator.
    """

    ring: SeriesRing
    generators: Tuple[TruncatedSeries, ...]
    labels: Tuple[str, ...]
    truncation: int

    def __post_init__(self) -> None:
        if len(self.labels) != len(self.generators):
            raise ConfigurationError("one label per generator is required")
        for label, g in zip(self.labels, self.generators):
            if g.ring != self.ring:
                raise ConfigurationError(f"generator {label} lives in {g.ring.describe()}, not {self.ring.describe()}")
            if g.is_zero():
                raise ConfigurationError(f"generator {label} is zero")
            if not g.is_homogeneous():
                raise PreconditionError(f"generator {label} is not homogeneous: {g.cohomological_degrees()}")

    @classmethod
    def build(
        cls,
        ring: SeriesRing,
        generators: Sequence[TruncatedSeries],
        labels: Optional[Sequence[str]] = None,
        truncation: Optional[int] = None,
    ) -> "QuotientPresentation":
        """Drop zero generators and default the truncation to the generators' precision."""
        labels = list(labels) if labels is not None else [f"g{i}" for i in range(len(generators))]
        kept = [(label, g) for label, g in zip(labels, generators) if not g.is_zero()]
        if truncation is None:
            if not generators:
                raise ConfigurationError("a presentation without generators needs an explicit truncation")
            truncation = min(g.prec for g in generators)
        return cls(ring, tuple(g for _, g in kept), tuple(label for label, _ in kept), truncation)

    @property
    def degrees(self) -> Tuple[int, ...]:
        return tuple(g.homogeneous_degree() for g in self.generators)  # type: ignore[misc]

    @property
    def orders(self) -> Tuple[int, ...]:
        return tuple(g.order() for g in self.generators)

    @property
    def max_order(self) -> int:
        return max(self.orders, default=0)

    @property
    def precision(self) -> int:
        return min([g.prec for g in self.generators] + [self.truncation])

    def effective_cutoff(self) -> int:
        """D_eff = D - (largest generator order), never above the generators' precision."""
        return min(self.truncation - self.max_order, self.precision)

    def extend(self, generators: Sequence[TruncatedSeries], labels: Sequence[str]) -> "QuotientPresentation":
        return QuotientPresentation.build(
            self.ring,
            list(self.generators) + list(generators),
            list(self.labels) + list(labels),
            self.truncation,
        )

    def chain(self) -> Tuple[int, int]:
        return chain_parameters(self.ring)


@dataclass(frozen=True)
class QuotientSlice:
    basis: SliceBasis
    ideal_rows: Tuple[SparseVector, ...]
    form: Tuple[Tuple[Tuple[int, int], ...], ...]
    rank: int
    length: int
    quotient_length: int

    @property
    def dimension(self) -> int:
        return len(self.basis)

    def quotient_monomials(self) -> List[Monomial]:
        """Monomials not hit by a unit pivot; over F_p these span the quotient."""
        unit_pivots = {row[0][0] for row in self.form if row and row[0][1] == 1}
        return [mono for i, mono in enumerate(self.basis.monomials) if i not in unit_pivots]


def ideal_rows(pres: QuotientPresentation, degree: int, cap: int) -> Tuple[SliceBasis, List[SparseVector]]:
    """The ideal's projection to one slice, as monomial multiples of the generators."""
    if cap > pres.precision:
        raise ConfigurationError(f"slice cap {cap} exceeds the presentation precision {pres.precision}")
    basis = slice_basis(pres.ring, degree, cap)
    rows: List[SparseVector] = []
    for g, g_degree, g_order in zip(pres.generators, pres.degrees, pres.orders):
        terms = _flat(g)
        for xexp, vkey in slice_basis(pres.ring, degree - g_degree, cap - g_order).monomials:
            row = _shifted_vector(basis, xexp, vkey, terms)
            if row:
                rows.append(row)
    return basis, rows


def _length(form: Sequence[Sequence[Tuple[int, int]]], p: int, N: int) -> int:
    total = 0
    for row in form:
        lead = row[0][1]
        e = 0
        while e < N and lead % p == 0:
            lead //= p
            e += 1
        total += N - e
    return total


def quotient_slice(pres: QuotientPresentation, degree: int, cap: Optional[int] = None) -> QuotientSlice:
    """
    The slice of the ambient ring, the ideal's sub-slice and the quotient size.

    Over Z/p^N the sizes are lengths (a copy of Z/p^N counts N), which for
    N = 1 are ordinary dimensions over F_p.
    """
    cap = pres.effective_cutoff() if cap is None else cap
    p, N = pres.chain()
    basis, rows = ideal_rows(pres, degree, cap)
    form = canonical_rows(rows, p, N)
    length = _length(form, p, N)
    result = QuotientSlice(
        basis=basis,
        ideal_rows=tuple(rows),
        form=form,
        rank=len(form),
        length=length,
        quotient_length=N * len(basis) - length,
    )
    logger.debug(
        "quotient slice d=%d cap=%d: dim=%d ideal rank=%d quotient=%d",
        degree, cap, len(basis), result.rank, result.quotient_length,
    )
    return result


# ========== 3. Membership certificates ==========


@dataclass(frozen=True, eq=False)
class MembershipCertificate:
    """
    target = sum_j multipliers[j] * generators[j] below x-degree ``cutoff``.

    Verification is multiplication and subtraction only.
    """

    target: TruncatedSeries
    generators: Tuple[TruncatedSeries, ...]
    multipliers: Tuple[TruncatedSeries, ...]
    cutoff: int
    labels: Tuple[str, ...] = ()

    def residual(self) -> TruncatedSeries:
        total = self.target.truncate(self.cutoff)
        for h, g in zip(self.multipliers, self.generators):
            total = total - h.mul(g, cap=self.cutoff)
        return total

    def verify(self) -> bool:
        if len(self.multipliers) != len(self.generators):
            return False
        residual = self.residual()
        return residual.is_zero() and residual.prec >= self.cutoff

    def to_payload(self) -> Dict[str, object]:
        return {
            "kind": "membership",
            "cutoff": self.cutoff,
            "labels": list(self.labels),
            "target": self.target.to_payload(),
            "generators": [g.to_payload() for g in self.generators],
            "multipliers": [h.to_payload() for h in self.multipliers],
        }

    @classmethod
    def from_payload(cls, payload: Mapping[str, object]) -> "MembershipCertificate":
        if payload.get("kind") != "membership":
            raise ConfigurationError(f"not a membership certificate: kind={payload.get('kind')!r}")
        return cls(
            target=ts_parse(payload["target"]),  # type: ignore[arg-type]
            generators=tuple(ts_parse(g) for g in payload["generators"]),  # type: ignore[union-attr]
            multipliers=tuple(ts_parse(h) for h in payload["multipliers"]),  # type: ignore[union-attr]
            cutoff=int(payload["cutoff"]),  # type: ignore[arg-type]
            labels=tuple(payload.get("labels") or ()),  # type: ignore[arg-type]
        )


@dataclass(frozen=True)
class NotFound:
    """No certificate exists among multipliers below the cutoff."""

    reason: str
    degree: Optional[int]
    cutoff: int


MembershipResult = Union[MembershipCertificate, NotFound]


def ideal_member(z: TruncatedSeries, pres: QuotientPresentation, cutoff: Optional[int] = None) -> MembershipResult:
    """
    Decide z in (g_1, ..., g_r) below x-degree ``cutoff`` and return the witness.

    The cutoff may not exceed D - max ord(g_j), the generators' precision or
    the precision of z.
    """
    if z.ring != pres.ring:
        raise ConfigurationError(f"element lives in {z.ring.describe()}, presentation in {pres.ring.describe()}")
    bound = min(pres.effective_cutoff(), z.prec)
    if cutoff is None:
        cutoff = bound
    elif cutoff > bound:
        raise ConfigurationError(
            f"cutoff {cutoff} out of range: at most {bound} "
            f"(D={pres.truncation}, max generator order {pres.max_order}, element precision {z.prec})"
        )
    target = z.truncate(cutoff)
    ring = pres.ring
    zeros = tuple(ring.zero(cutoff - o) for o in pres.orders)
    if target.is_zero():
        return MembershipCertificate(target, pres.generators, zeros, cutoff, pres.labels)

    degree = target.homogeneous_degree()
    assert degree is not None
    basis = slice_basis(ring, degree, cutoff)
    columns: List[SparseVector] = []
    unknowns: List[Tuple[int, XExp, VKey]] = []
    for j, (g, g_degree, g_order) in enumerate(zip(pres.generators, pres.degrees, pres.orders)):
        terms = _flat(g)
        for xexp, vkey in slice_basis(ring, degree - g_degree, cutoff - g_order).monomials:
            columns.append(_shifted_vector(basis, xexp, vkey, terms))
            unknowns.append((j, xexp, vkey))

    rhs = basis.vector(target)
    if not columns:
        return NotFound("no multiplier monomials fit below the cutoff", degree, cutoff)
    p, N = pres.chain()
    matrix = SparseMatrix.from_columns(columns, len(basis), p, N)
    logger.debug("ideal_member: degree %d cutoff %d, system %dx%d", degree, cutoff, matrix.nrows, matrix.ncols)
    result = solve(matrix, rhs)
    if isinstance(result, Inconsistent):
        return NotFound(result.reason, degree, cutoff)

    buckets: List[List[Tuple[XExp, VKey, int]]] = [[] for _ in pres.generators]
    for col, value in sorted(result.particular.items()):
        j, xexp, vkey = unknowns[col]
        buckets[j].append((xexp, vkey, value))
    multipliers = tuple(
        ring.from_flat(cutoff - o, items) for o, items in zip(pres.orders, buckets)
    )
    certificate = MembershipCertificate(target, pres.generators, multipliers, cutoff, pres.labels)
    if not certificate.verify():
        raise InvariantViolation(f"membership certificate in degree {degree} fails its own re-check")
    return certificate


def recheck_certificate(payload: Mapping[str, object]) -> bool:
    """Re-verify a certificate payload (or a ``{"certificates": [...]}`` bundle) without solving."""
    if "certificates" in payload:
        bundle = payload["certificates"]
        return all(recheck_certificate(item) for item in bundle)  # type: ignore[union-attr]
    return MembershipCertificate.from_payload(payload).verify()


# ========== 4. Multiplication kernels ==========


@dataclass(frozen=True)
class KernelSlice:
    """
    Kernel of z -> u*z in the quotient, projected to ``basis``.

    The domain reached x-degree ``domain_cap``; monomials of the basis above it
    are unconstrained and are included as unit vectors.
    """

    basis: SliceBasis
    vectors: Tuple[SparseVector, ...]
    domain_cap: int
    target_cap: int


def multiplication_kernel(
    u: TruncatedSeries, pres: QuotientPresentation, degree: int, cap: int, slack: int = 0
) -> KernelSlice:
    ring = pres.ring
    if u.ring != ring:
        raise ConfigurationError("multiplier and presentation live in different rings")
    basis = slice_basis(ring, degree, cap)
    if u.is_zero():
        return KernelSlice(basis, tuple({i: 1} for i in range(len(basis))), cap, cap)

    u_degree = u.homogeneous_degree()
    assert u_degree is not None
    u_order = u.order()
    target_cap = min(cap + slack + u_order, u.prec, pres.precision)
    domain_cap = target_cap - u_order
    domain = slice_basis(ring, degree, domain_cap)
    target = slice_basis(ring, degree + u_degree, target_cap)

    columns: List[SparseVector] = []
    u_terms = _flat(u)
    for xexp, vkey in domain.monomials:
        columns.append(_shifted_vector(target, xexp, vkey, u_terms))
    for g, g_degree, g_order in zip(pres.generators, pres.degrees, pres.orders):
        terms = _flat(g)
        for xexp, vkey in slice_basis(ring, degree + u_degree - g_degree, target_cap - g_order).monomials:
            columns.append(_shifted_vector(target, xexp, vkey, terms, sign=-1))

    p, N = pres.chain()
    vectors: List[SparseVector] = []
    if columns:
        matrix = SparseMatrix.from_columns(columns, len(target), p, N)
        logger.debug("multiplication kernel: degree %d, system %dx%d", degree, matrix.nrows, matrix.ncols)
        for vector in kernel(matrix):
            projected: SparseVector = {}
            for col, value in vector.items():
                if col >= len(domain):
                    continue
                xexp, vkey = domain.monomials[col]
                position = basis.position(xexp, vkey)
                if position is not None:
                    projected[position] = value
            if projected:
                vectors.append(projected)
    for i in range(len(basis)):
        if basis.x_degree(i) > domain_cap:
            vectors.append({i: 1})
    return KernelSlice(basis, tuple(vectors), domain_cap, target_cap)


def compare_kernel(
    name: str,
    computed: KernelSlice,
    expected_rows: Sequence[SparseVector],
    ideal: Sequence[SparseVector],
    p: int,
    N: int = 1,
) -> CheckOutcome:
    """
    Compare a computed kernel with the expected sub-slice, both modulo the ideal.

    The computed kernel contains the true one, so "expected not contained" is
    a definite FAIL, equality is a PASS and anything in between is undecided.
    """
    basis = computed.basis
    sizes = {"slice": len(basis), "domain_cap": computed.domain_cap, "target_cap": computed.target_cap}
    if basis.cap < 0:
        return CheckOutcome(name, UNDECIDED, "no room below the truncation for this slice", sizes)
    found = list(computed.vectors) + list(ideal)
    wanted = list(expected_rows) + list(ideal)
    sizes["kernel_rank"] = len(canonical_rows(found, p, N))
    sizes["expected_rank"] = len(canonical_rows(wanted, p, N))
    if not row_space_contains(found, wanted, p, N):
        missing = next(
            (row for row in expected_rows if not row_space_contains(found, [row], p, N)), {}
        )
        return CheckOutcome(name, FAIL, f"expected kernel element not found: {basis.render_vector(missing)}", sizes)
    if row_space_equal(found, wanted, p, N):
        return CheckOutcome(name, PASS, "", sizes)
    extra = next((row for row in computed.vectors if not row_space_contains(wanted, [row], p, N)), {})
    return CheckOutcome(
        name,
        UNDECIDED,
        f"kernel at cap {basis.cap} also contains {basis.render_vector(extra)}",
        sizes,
    )
