"""
E*BV_k = E*[[x_0..x_{k-1}]] / ([p](x_0), ..., [p](x_{k-1})) and the quotients A(k)*.

Everything is computed over one law and one m; k varies per call and must
satisfy k <= w = n + 1 - m. Series variables are named ``x0``, ``x1``, ...,
plus ``t`` for the rings E*[[x_0..x_{k-1}]][[t]] in which phi_k, psi_k and the
Weierstrass data live.

Equalities in quotient rings are never decided by a normal form; they are
membership certificates over graded slices (module ``slices``).
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, List, Optional, Sequence, Tuple

from .dickson import beta, last_nonzero_one_vectors, permutation_sign, reduce_alpha_to_cohomology
from .errors import ConfigurationError, InvariantViolation
from .fgl import FormalGroupLaw, default_truncation
from .linalg import canonical_rows, row_space_contains
from .models import FAIL, PASS, UNDECIDED, CheckOutcome
from .series import (
    SeriesRing,
    TruncatedSeries,
    substitute,
    ts_product,
    weierstrass_basis_coords,
    weierstrass_divrem,
)
from .slices import (
    MembershipCertificate,
    MembershipResult,
    NotFound,
    QuotientPresentation,
    compare_kernel,
    ideal_member,
    ideal_rows,
    multiplication_kernel,
    quotient_slice,
)

logger = logging.getLogger(__name__)


def filtration_truncation(p: int, m: int, n: int) -> int:
    """Truncation large enough for the A(k)* chain up to k = w: p^{n+1} + p^m + 2 at least."""
    return max(default_truncation(p, m, n), p ** (n + 1) + p ** m + 2)


def x_names(k: int) -> Tuple[str, ...]:
    return tuple(f"x{i}" for i in range(k))


def alpha_degree(p: int, m: int, w: int) -> int:
    """Cohomological degree 2 p^m (p^w - 1)/(p - 1) of alpha and alpha'."""
    return 2 * p ** m * (p ** w - 1) // (p - 1)


def _drop_t(series: TruncatedSeries, ring: SeriesRing) -> TruncatedSeries:
    """Move a t-free series of E*[[x]][[t]] into E*[[x]]."""
    i_t = series.ring.index("t")
    terms = {}
    for xexp, coefficient in series.raw_terms().items():
        if xexp[i_t]:
            raise InvariantViolation("series still depends on t")
        terms[xexp[:i_t] + xexp[i_t + 1:]] = dict(coefficient)
    return TruncatedSeries._make(ring, series.prec, terms)


def _determinant(matrix: Sequence[Sequence[TruncatedSeries]], ring: SeriesRing, cap: int) -> TruncatedSeries:
    size = len(matrix)
    if size == 0:
        return ring.one(cap)
    total = ring.zero(cap)
    for sigma in itertools.permutations(range(size)):
        term = ts_product([matrix[r][sigma[r]] for r in range(size)], cap=cap)
        total = total + term.scale(permutation_sign(sigma))
    return total


def _minor(matrix: Sequence[Sequence[TruncatedSeries]], row: int, col: int) -> List[List[TruncatedSeries]]:
    return [[entry for c, entry in enumerate(line) if c != col] for r, line in enumerate(matrix) if r != row]


@dataclass(frozen=True, eq=False)
class AlphaComputation:
    """Both products for alpha; ``certificate`` is None when they agree term by term."""

    phi_product: TruncatedSeries
    lambda_product: TruncatedSeries
    certificate: Optional[MembershipCertificate]


@dataclass(frozen=True, eq=False)
class ARing:
    """
    A(k)* presented as a quotient of E*[[x_0..x_{k-1}]], with the Weierstrass data.

    [p](t) = psi * phi + sum_i remainder[i] t^i in E*[[x]][[t]]; ``theta`` is a
    series in (x, y) with y of weight ``degree`` such that [p](t) = theta(phi(t))
    modulo the presentation's ideal.
    """

    k: int
    degree: int
    presentation: QuotientPresentation
    phi: TruncatedSeries
    psi: TruncatedSeries
    remainder: Tuple[TruncatedSeries, ...]
    theta: TruncatedSeries

    @property
    def theta_bar(self) -> TruncatedSeries:
        return self.theta.shift("y", -1)


class BVRing:
    """E*BV_k for all k <= w over one law and one m."""

    def __init__(self, law: FormalGroupLaw, m: int) -> None:
        if not 0 <= m <= law.n:
            raise ConfigurationError(f"need 0 <= m <= n, got m={m}, n={law.n}")
        self.law = law
        self.m = m
        self.p = law.p
        self.n = law.n
        self.w = law.n + 1 - m
        self.D = law.D
        self.N = law.N if m == 0 else 1
        self._phis: Dict[Tuple[SeriesRing, str, int], TruncatedSeries] = {}
        self._a_rings: Dict[int, ARing] = {}
        self._presentations: Dict[int, QuotientPresentation] = {}

    def __repr__(self) -> str:
        return f"BVRing(p={self.p}, m={self.m}, n={self.n}, flavor={self.law.flavor}, D={self.D})"

    def _check_k(self, k: int) -> None:
        if not 0 <= k <= self.w:
            raise ConfigurationError(f"k={k} outside 0..w={self.w}")

    # --- rings and generators ---

    def ambient(self, k: int) -> SeriesRing:
        return self.law.e_ring(self.m, x_names(k))

    def t_ring(self, k: int) -> SeriesRing:
        return self.law.e_ring(self.m, x_names(k) + ("t",))

    def p_series_at(self, k: int, i: int) -> TruncatedSeries:
        """[p](x_i) in E*[[x_0..x_{k-1}]]."""
        return self.law.p_series(self.m).embed(self.ambient(k), {"t": f"x{i}"})

    def presentation(self, k: int) -> QuotientPresentation:
        """E*BV_k as E*[[x_0..x_{k-1}]] modulo ([p](x_0), ..., [p](x_{k-1}))."""
        self._check_k(k)
        if k not in self._presentations:
            self._presentations[k] = QuotientPresentation.build(
                self.ambient(k),
                [self.p_series_at(k, i) for i in range(k)],
                [f"[p](x{i})" for i in range(k)],
                truncation=self.D,
            )
        return self._presentations[k]

    def lambda_series(self, lam: Sequence[int], k: Optional[int] = None) -> TruncatedSeries:
        """[lambda](x) = [lambda_0](x_0) +_F ... +_F [lambda_{j-1}](x_{j-1})."""
        k = len(lam) if k is None else k
        if len(lam) > k:
            raise ConfigurationError(f"lambda has {len(lam)} entries but only {k} variables exist")
        ring = self.ambient(k)
        coefficients = {f"x{i}": c % self.p for i, c in enumerate(lam) if c % self.p}
        if not coefficients:
            return ring.zero(self.D)
        return self.law.combination(coefficients, ring, self.D)

    # --- phi_j ---

    def _phi_in(self, ring: SeriesRing, target: str, j: int) -> TruncatedSeries:
        """prod over lambda in F_p^j of (target -_F [lambda](x))^{p^m}, in ``ring``."""
        key = (ring, target, j)
        if key in self._phis:
            return self._phis[key]
        order = self.p ** (self.m + j)
        cap = self.D - order + 1
        if cap < 1:
            raise ConfigurationError(f"D={self.D} is too small for phi_{j} of t-degree {order}")
        factors = []
        for lam in itertools.product(range(self.p), repeat=j):
            coefficients = {target: 1}
            coefficients.update({f"x{i}": -c for i, c in enumerate(lam) if c})
            factors.append(self.law.combination(coefficients, ring, cap))
        base = ts_product(factors, cap=self.D)
        result = base.power(self.p ** self.m, cap=self.D)
        logger.debug("phi_%d(%s): %d terms, precision %d", j, target, len(result), result.prec)
        self._phis[key] = result
        return result

    def phi(self, j: int) -> TruncatedSeries:
        """phi_j(t) in E*[[x_0..x_{j-1}]][[t]], of Weierstrass degree p^{m+j}."""
        self._check_k(j)
        return self._phi_in(self.t_ring(j), "t", j)

    def phi_at(self, j: int, k: int) -> TruncatedSeries:
        """phi_j(x_j) in E*[[x_0..x_{k-1}]], j < k."""
        self._check_k(k)
        if not 0 <= j < k:
            raise ConfigurationError(f"phi_{j}(x_{j}) needs j < k={k}")
        return self._phi_in(self.ambient(k), f"x{j}", j)

    # --- alpha and alpha' ---

    @property
    def alpha_degree(self) -> int:
        return alpha_degree(self.p, self.m, self.w)

    @cached_property
    def alpha_computation(self) -> AlphaComputation:
        w = self.w
        phi_product = ts_product([self.phi_at(j, w) for j in range(w)], cap=self.D)
        factors = [self.lambda_series(lam, w) for lam in last_nonzero_one_vectors(self.p, w)]
        lambda_product = ts_product(factors, cap=self.D).power(self.p ** self.m, cap=self.D)
        difference = phi_product - lambda_product
        if difference.is_zero():
            return AlphaComputation(phi_product, lambda_product, None)
        result = ideal_member(difference, self.presentation(w))
        if isinstance(result, NotFound):
            raise InvariantViolation(
                f"the two products for alpha differ outside ([p](x_j)) below x-degree {result.cutoff}: "
                f"{difference.render()}"
            )
        logger.info("alpha products agree modulo ([p](x_j)) below x-degree %d", result.cutoff)
        return AlphaComputation(phi_product, lambda_product, result)

    def alpha(self) -> TruncatedSeries:
        return self.alpha_computation.phi_product

    def pi_at(self, i: int, j: int, k: int) -> TruncatedSeries:
        """pi_i(x_j) in E*[[x_0..x_{k-1}]]."""
        return self._pis[i].embed(self.ambient(k), {"t": f"x{j}"})

    @cached_property
    def _pis(self) -> List[TruncatedSeries]:
        return self.law.pi_series(self.m)

    def pi_matrix(self) -> List[List[TruncatedSeries]]:
        """(pi_i(x_j)) for m <= i <= n and 0 <= j < w."""
        return [[self.pi_at(self.m + r, j, self.w) for j in range(self.w)] for r in range(self.w)]

    @cached_property
    def _alpha_prime(self) -> TruncatedSeries:
        return _determinant(self.pi_matrix(), self.ambient(self.w), self.D)

    def alpha_prime(self) -> TruncatedSeries:
        return self._alpha_prime

    def v_alpha_prime_certificate(self, i: int) -> MembershipCertificate:
        """
        v_i alpha' = sum_j (-1)^{r+j} M_{rj} [p](x_j) with r = i - m.

        M_{rj} is the (r, j) minor of the pi-matrix; replacing row r by
        ([p](x_j))_j and expanding along that row gives the identity.
        """
        if not self.m <= i <= self.n:
            raise ConfigurationError(f"need m <= i <= n, got i={i}")
        ring = self.ambient(self.w)
        pres = self.presentation(self.w)
        matrix = self.pi_matrix()
        r = i - self.m
        multipliers = tuple(
            _determinant(_minor(matrix, r, j), ring, self.D).scale((-1) ** (r + j)) for j in range(self.w)
        )
        target = self.alpha_prime().mul(ring.v(i, self.D))
        cutoff = min(pres.effective_cutoff(), target.prec)
        certificate = MembershipCertificate(target, pres.generators, multipliers, cutoff, pres.labels)
        if not certificate.verify():
            raise InvariantViolation(f"v_{i} alpha' cofactor expansion does not reproduce the target")
        return certificate

    def alpha_difference_certificate(self) -> MembershipResult:
        """alpha - alpha' in ([p](x_0), ..., [p](x_{w-1}))."""
        return ideal_member(self.alpha() - self.alpha_prime(), self.presentation(self.w))

    def mod_ideal_check(self) -> CheckOutcome:
        """alpha and alpha' reduce mod I_{n+1} to beta^{p^m}, which is nonzero."""
        expected = beta(self.p, self.w).power(self.p ** self.m)
        reduced_alpha = reduce_alpha_to_cohomology(self.alpha().reduce(self.n + 1))
        reduced_prime = reduce_alpha_to_cohomology(self.alpha_prime().reduce(self.n + 1))
        holds = bool(expected) and reduced_alpha == expected and reduced_prime == expected
        detail = "" if holds else (
            f"beta^q={expected.render()}; alpha={reduced_alpha.render()}; alpha'={reduced_prime.render()}"
        )
        return CheckOutcome("alpha mod I_{n+1} = beta^{p^m}", PASS if holds else FAIL, detail)

    # --- A(k)* ---

    def a_ring(self, k: int) -> ARing:
        self._check_k(k)
        if k in self._a_rings:
            return self._a_rings[k]
        needed = self.p ** (self.m + k) + self.p ** self.m + 2
        if self.D < needed:
            raise ConfigurationError(
                f"A({k})* needs D >= {needed}, the law has D={self.D}; "
                f"build it with filtration_truncation({self.p}, {self.m}, {self.n})"
            )
        degree = self.p ** (self.m + k)
        t_ring = self.t_ring(k)
        ring = self.ambient(k)
        phi = self.phi(k)
        pseries = self.law.p_series(self.m).embed(t_ring)
        psi, remainder = weierstrass_divrem(pseries, phi, degree, "t")
        parts = remainder.split_by("t")
        coefficients = tuple(
            _drop_t(parts[i], ring) if i in parts else ring.zero(remainder.prec - i) for i in range(degree)
        )
        generators = [self.p_series_at(k, j) for j in range(k)]
        labels = [f"[p](x{j})" for j in range(k)]
        for i, c in enumerate(coefficients):
            generators.append(c)
            labels.append(f"c{i}")
        presentation = QuotientPresentation.build(ring, generators, labels, truncation=self.D)

        coords = weierstrass_basis_coords(pseries, phi, degree, "t", "y")
        _, theta = coords[0].split_at("y", 1)
        a = ARing(k, degree, presentation, phi, psi, coefficients, theta)
        logger.info(
            "A(%d)*: %d remainder coefficients, theta has %d terms",
            k, sum(1 for c in coefficients if c), len(theta),
        )
        self._a_rings[k] = a
        return a

    def psi(self, k: int) -> TruncatedSeries:
        return self.a_ring(k).psi

    def theta(self, k: int) -> TruncatedSeries:
        return self.a_ring(k).theta

    def psi_at(self, i: int, k: int) -> TruncatedSeries:
        """psi_i(x_i) in E*[[x_0..x_{k-1}]], i < k."""
        return self.a_ring(i).psi.embed(self.ambient(k), {"t": f"x{i}"})

    def _theta_args(self, a: ARing) -> Dict[str, TruncatedSeries]:
        t_ring = self.t_ring(a.k)
        args = {name: t_ring.var(name, self.D) for name in x_names(a.k)}
        args["y"] = a.phi
        return args

    def _certify_t_coefficients(self, name: str, difference: TruncatedSeries, a: ARing) -> CheckOutcome:
        ring = self.ambient(a.k)
        certificates = []
        for e, part in difference.split_by("t").items():
            coefficient = _drop_t(part, ring)
            cutoff = min(a.presentation.effective_cutoff(), coefficient.prec)
            if coefficient.is_zero() or cutoff < 0:
                continue
            result = ideal_member(coefficient, a.presentation, cutoff)
            if isinstance(result, NotFound):
                return CheckOutcome(
                    name,
                    UNDECIDED,
                    f"coefficient of t^{e} not certified below x-degree {cutoff}: {coefficient.render()}",
                )
            certificates.append(result.to_payload())
        return CheckOutcome(name, PASS, "", {"certificates": len(certificates)}, {"certificates": certificates})

    def theta_check(self, k: int) -> CheckOutcome:
        """[p](t) - theta_k(phi_k(t)) vanishes coefficient-wise in A(k)*."""
        a = self.a_ring(k)
        pseries = self.law.p_series(self.m).embed(self.t_ring(k))
        composite = substitute(a.theta, self._theta_args(a))
        return self._certify_t_coefficients(f"[p](t)=theta_{k}(phi_{k}(t)) in A({k})*", pseries - composite, a)

    def psi_theta_check(self, k: int) -> CheckOutcome:
        """psi_k(t) = theta_bar_k(phi_k(t)) in A(k)*, with theta_k(s) = s theta_bar_k(s)."""
        a = self.a_ring(k)
        composite = substitute(a.theta_bar, self._theta_args(a))
        return self._certify_t_coefficients(f"psi_{k}=theta_bar_{k}(phi_{k}) in A({k})*", a.psi - composite, a)

    def top_quotient_check(self) -> CheckOutcome:
        """In A(w)* the remainder vanishes mod I_{n+1} and every v_i (and p when m = 0) is zero."""
        a = self.a_ring(self.w)
        ring = self.ambient(self.w)
        name = f"I_{{n+1}}=0 in A({self.w})*"
        leftover = [f"c{i}={c.reduce(self.n + 1).render()}" for i, c in enumerate(a.remainder) if c.reduce(self.n + 1)]
        if leftover:
            return CheckOutcome(name, FAIL, f"remainder survives mod I_{self.n + 1}: {'; '.join(leftover)}")
        certificates = []
        for i in range(self.m, self.n + 1):
            result = ideal_member(ring.v(i, self.D), a.presentation)
            if isinstance(result, NotFound):
                return CheckOutcome(name, UNDECIDED, f"v_{i} not certified below x-degree {result.cutoff}")
            certificates.append(result.to_payload())
        return CheckOutcome(name, PASS, "", {"certificates": len(certificates)}, {"certificates": certificates})

    # --- chi_j and slice checks ---

    def chi(self, j: int, k: Optional[int] = None) -> TruncatedSeries:
        """chi_j = prod_{i<j} phi_i(x_i) in E*[[x_0..x_{k-1}]]."""
        k = self.w if k is None else k
        self._check_k(k)
        if not 0 <= j <= k:
            raise ConfigurationError(f"chi_{j} needs j <= k={k}")
        if j == 0:
            return self.ambient(k).one(self.D)
        return ts_product([self.phi_at(i, k) for i in range(j)], cap=self.D)

    def chi_psi_check(self, j: int, k: Optional[int] = None) -> CheckOutcome:
        """chi_j psi_i(x_i) lies in ([p](x_*)) for every i < j."""
        k = self.w if k is None else k
        pres = self.presentation(k)
        chi = self.chi(j, k)
        name = f"chi_{j} psi_i in ([p](x_*))"
        certificates = []
        for i in range(j):
            result = ideal_member(chi.mul(self.psi_at(i, k)), pres)
            if isinstance(result, NotFound):
                return CheckOutcome(name, UNDECIDED, f"chi_{j} psi_{i}(x{i}) not certified below x-degree {result.cutoff}")
            certificates.append(result.to_payload())
        return CheckOutcome(name, PASS, "", {"certificates": len(certificates)}, {"certificates": certificates})

    def _slice_cap(self, pres: QuotientPresentation, cap: Optional[int]) -> int:
        bound = min(pres.effective_cutoff(), pres.precision)
        return bound if cap is None else min(cap, bound)

    def _slack(self, slack: Optional[int]) -> int:
        return self.p ** self.n if slack is None else slack

    def _kernel_check(
        self,
        name: str,
        u: TruncatedSeries,
        base: QuotientPresentation,
        expected: QuotientPresentation,
        degree: int,
        cap: Optional[int],
        slack: Optional[int],
    ) -> CheckOutcome:
        cap = self._slice_cap(expected, cap)
        computed = multiplication_kernel(u, base, degree, cap, self._slack(slack))
        _, ideal = ideal_rows(base, degree, cap)
        _, wanted = ideal_rows(expected, degree, cap)
        return compare_kernel(name, computed, wanted, ideal, self.p, self.N)

    def _torsion_generators(self, k: int) -> Tuple[List[TruncatedSeries], List[str]]:
        """Elements killed by p for trivial reasons over Z/p^N."""
        if self.m != 0:
            return [], []
        return [self.ambient(k).constant(self.p ** (self.N - 1), self.D)], [f"p^{self.N - 1}"]

    def annihilator_slice_check(
        self, j: int, degree: int, cap: Optional[int] = None, slack: Optional[int] = None, k: Optional[int] = None
    ) -> CheckOutcome:
        """ann(chi_j) = (psi_0(x_0), ..., psi_{j-1}(x_{j-1})) on one slice of E*BV_k."""
        k = self.w if k is None else k
        base = self.presentation(k)
        expected = base.extend([self.psi_at(i, k) for i in range(j)], [f"psi{i}(x{i})" for i in range(j)])
        return self._kernel_check(
            f"ann(chi_{j}) in degree {degree}", self.chi(j, k), base, expected, degree, cap, slack
        )

    def vm_regularity_check(
        self, k: int, degree: int, cap: Optional[int] = None, slack: Optional[int] = None
    ) -> CheckOutcome:
        """v_m is injective on E*BV_k for k < w; for k = w its kernel is the ideal (alpha)."""
        base = self.presentation(k)
        extra, labels = self._torsion_generators(k)
        if k == self.w:
            extra.append(self.alpha())
            labels.append("alpha")
        expected = base.extend(extra, labels) if extra else base
        u = self.ambient(k).v(self.m, self.D)
        return self._kernel_check(f"v_{self.m}-torsion of E*BV_{k} in degree {degree}", u, base, expected, degree, cap, slack)

    def chromatic_depth_check(
        self,
        k: int,
        degree: int,
        depth: Optional[int] = None,
        cap: Optional[int] = None,
        slack: Optional[int] = None,
    ) -> List[CheckOutcome]:
        """v_m, ..., v_{m+depth-1} is a regular sequence on E*BV_k (expected depth w - k)."""
        depth = self.w - k if depth is None else depth
        if self.m + depth - 1 > self.n:
            raise ConfigurationError(f"depth {depth} needs generators beyond v_{self.n}")
        ring = self.ambient(k)
        outcomes = []
        for i in range(depth):
            quotient = self.presentation(k).extend(
                [ring.v(self.m + l, self.D) for l in range(i)], [f"v{self.m + l}" for l in range(i)]
            )
            extra, labels = self._torsion_generators(k)
            expected = quotient.extend(extra, labels) if extra else quotient
            outcomes.append(
                self._kernel_check(
                    f"v_{self.m + i} regular on E*BV_{k}/(v_{self.m}..v_{self.m + i - 1}) in degree {degree}",
                    ring.v(self.m + i, self.D),
                    quotient,
                    expected,
                    degree,
                    cap,
                    slack,
                )
            )
        return outcomes

    def weierstrass_rank_check(self, j: int, degree: int, cap: Optional[int] = None) -> CheckOutcome:
        """R[[t]]/phi_j(t) is free over R on 1, t, ..., t^{d_j - 1}, on one slice."""
        phi = self.phi(j)
        ring = self.t_ring(j)
        d_j = self.p ** (self.m + j)
        pres = QuotientPresentation.build(ring, [phi], [f"phi{j}"], truncation=self.D)
        cap = min(phi.prec, self.D) if cap is None else min(cap, phi.prec)
        sliced = quotient_slice(pres, degree, cap)
        i_t = ring.index("t")
        low = [{i: 1} for i, (xexp, _) in enumerate(sliced.basis.monomials) if xexp[i_t] < d_j]
        everything = [{i: 1} for i in range(len(sliced.basis))]
        sizes = {"slice": len(sliced.basis), "phi_rank": sliced.rank, "free_part": len(low)}
        name = f"R[[t]]/phi_{j} free of rank {d_j} in degree {degree}"
        if not row_space_contains(list(sliced.ideal_rows) + low, everything, self.p, self.N):
            return CheckOutcome(name, FAIL, "phi multiples and t^i (i < d_j) do not span the slice", sizes)
        if sliced.quotient_length == self.N * len(low):
            return CheckOutcome(name, PASS, "", sizes)
        return CheckOutcome(
            name,
            UNDECIDED,
            f"quotient length {sliced.quotient_length} vs {self.N * len(low)} expected at cap {cap}",
            sizes,
        )

    def a_ring_recursion_check(self, k: int, degree: int, cap: Optional[int] = None) -> CheckOutcome:
        """The ideal of A(k)* equals ([p](x_*)) + (psi_0(x_0), ..., psi_{k-1}(x_{k-1})) on one slice."""
        remainder_ideal = self.a_ring(k).presentation
        psi_ideal = self.presentation(k).extend(
            [self.psi_at(i, k) for i in range(k)], [f"psi{i}(x{i})" for i in range(k)]
        )
        cap = min(self._slice_cap(remainder_ideal, cap), self._slice_cap(psi_ideal, cap))
        name = f"A({k})* ideal recursion in degree {degree}"
        _, first = ideal_rows(remainder_ideal, degree, cap)
        basis, second = ideal_rows(psi_ideal, degree, cap)
        sizes = {"slice": len(basis), "cap": cap}
        if canonical_rows(first, self.p, self.N) == canonical_rows(second, self.p, self.N):
            return CheckOutcome(name, PASS, "", sizes)
        forward = row_space_contains(second, first, self.p, self.N)
        backward = row_space_contains(first, second, self.p, self.N)
        detail = "remainder ideal is smaller" if forward else "psi ideal is smaller" if backward else "ideals differ"
        return CheckOutcome(name, FAIL, f"{detail} at cap {cap}", sizes)
