"""
p-typical formal group laws with Hazewinkel or Araki generators.

Construction is staged. The logarithm log(t) = sum_i l_i t^{p^i} and its
functional inverse exp are computed over exact rationals; every series the
engine needs from the law is of the form exp(sum_j c_j log y_j), so it is
evaluated at that stage and only then reduced, with a p-integrality check,
to Z/p^N[v_1..v_n] or to E* = F_p[v_m..v_n]. F(s,t), the formal inverse and
the p-series are the three combinations kept on the law itself.

Neither generator family is claimed to realise a commutative ring spectrum at
p = 2; everything here is algebra over BP*, where both families are valid.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, FrozenSet, List, Literal, Mapping, Optional, Sequence, Tuple

from .coeffring import ScalarRing, VPolynomial, coefficient_ring, vp_parse
from .errors import ConfigurationError, InvariantViolation
from .series import SeriesRing, TruncatedSeries, substitute, ts_parse

logger = logging.getLogger(__name__)

Flavor = Literal["hazewinkel", "araki"]
FLAVORS: Tuple[str, ...] = ("hazewinkel", "araki")
CACHE_FORMAT_VERSION = 1


def default_truncation(p: int, m: int, n: int) -> int:
    """x-degree of alpha plus room for the p-series: p^m (p^w - 1)/(p - 1) + p^n + 2."""
    w = n + 1 - m
    return p ** m * (p ** w - 1) // (p - 1) + p ** n + 2


DEFAULT_PADIC_PRECISION = 6


@dataclass(frozen=True)
class AxiomCheck:
    name: str
    holds: bool
    detail: str = ""


@dataclass(frozen=True)
class FlavorComparison:
    agree: bool
    differences: Tuple[str, ...]


# ========== 1. rational stage ==========


def log_coefficients(p: int, n: int, flavor: str, count: int) -> List[VPolynomial]:
    """l_0, ..., l_{count-1} over Q[v_1..v_n] with l_0 = 1."""
    if flavor not in FLAVORS:
        raise ConfigurationError(f"unknown flavor {flavor!r}; expected one of {FLAVORS}")
    rationals = ScalarRing.rationals(p)
    one = VPolynomial.constant(rationals, 1, n, 1)
    coeffs = [one]
    for r in range(1, count):
        acc = VPolynomial.zero(rationals, 1, n)
        for i in range(r):
            index = r - i
            if index > n:
                continue
            v = VPolynomial.generator(rationals, 1, n, index)
            acc = acc + coeffs[i] * v ** (p ** i)
        if flavor == "hazewinkel":
            coeffs.append(acc.scale(Fraction(1, p)))
        else:
            coeffs.append(acc.scale(Fraction(1, p - p ** (p ** r))))
    return coeffs


def _log_exponents(p: int, cap: int) -> int:
    count = 0
    while p ** count <= cap:
        count += 1
    return count


def exp_series(log_coeffs: Sequence[VPolynomial], p: int, n: int, D: int) -> TruncatedSeries:
    """Functional inverse of the logarithm, by fixed-point iteration e <- t - sum_{i>=1} l_i e^{p^i}."""
    ring = SeriesRing(("t",), ScalarRing.rationals(p), 1, n)
    t = ring.var("t", D)
    current = t
    for iteration in range(D + 1):
        update = t
        for i in range(1, len(log_coeffs)):
            if p ** i > D:
                break
            update = update - current.power(p ** i).scale(log_coeffs[i])
        if update == current:
            logger.debug("exp series converged after %d iterations", iteration)
            return update
        current = update
    raise InvariantViolation("exp fixed-point iteration did not converge")


# ========== 2. the law ==========


class FormalGroupLaw:
    """
    A constructed p-typical law.

    ``F``, ``inverse`` and ``pseries`` live over Z/p^N[v_1..v_n]; use
    ``e_ring``/``combination`` to obtain series over E* for a chosen m.
    """

    def __init__(
        self,
        p: int,
        n: int,
        flavor: str,
        D: int,
        N: int,
        log_coeffs: Sequence[VPolynomial],
        exp: TruncatedSeries,
        F: Optional[TruncatedSeries] = None,
        inverse: Optional[TruncatedSeries] = None,
        pseries: Optional[TruncatedSeries] = None,
    ) -> None:
        self.p = p
        self.n = n
        self.flavor = flavor
        self.D = D
        self.N = N
        self.log_coeffs = tuple(log_coeffs)
        self.exp = exp
        self._combinations: Dict[Tuple[FrozenSet[Tuple[str, int]], SeriesRing, int], TruncatedSeries] = {}
        base = self.e_ring(0, ("s", "t"))
        self.F = F if F is not None else self.combination({"s": 1, "t": 1}, base, D)
        single = self.e_ring(0, ("t",))
        self.inverse = inverse if inverse is not None else self.combination({"t": -1}, single, D)
        self.pseries = pseries if pseries is not None else self.combination({"t": p}, single, D)

    # --- rings ---

    def e_ring(self, m: int, variables: Sequence[str], weights: Sequence[int] = ()) -> SeriesRing:
        scalars, lo, hi = coefficient_ring(self.p, m, self.n, self.N)
        return SeriesRing(tuple(variables), scalars, lo, hi, tuple(weights))

    def header(self) -> Dict[str, object]:
        return {
            "format_version": CACHE_FORMAT_VERSION,
            "p": self.p,
            "n": self.n,
            "flavor": self.flavor,
            "D": self.D,
            "N": self.N,
        }

    # --- exp(sum c log y) ---

    def combination(self, coefficients: Mapping[str, int], ring: SeriesRing, cap: Optional[int] = None) -> TruncatedSeries:
        cap = self.D if cap is None else cap
        key = (frozenset((k, int(c)) for k, c in coefficients.items() if c), ring, cap)
        cached = self._combinations.get(key)
        if cached is None:
            cached = exp_log_combination(self, coefficients, ring, cap)
            self._combinations[key] = cached
        return cached

    def over(self, series: TruncatedSeries, ring: SeriesRing) -> TruncatedSeries:
        """Push a law series (over Z/p^N[v_1..v_n]) to the coefficients of ``ring``."""
        if series.ring.same_coefficients(ring):
            return series
        return series.map_to(ring.scalars, ring.lo, ring.hi)

    def p_series(self, m: int) -> TruncatedSeries:
        ring = self.e_ring(m, ("t",))
        return self.over(self.pseries, ring)

    def pi_series(self, m: int) -> List[TruncatedSeries]:
        ring = self.e_ring(m, ("t",))
        return [self.over(pi, ring) for pi in pi_decompose(self.pseries)]

    # --- cache payloads ---

    def to_payload(self) -> Dict[str, object]:
        return {
            **self.header(),
            "log_coeffs": [c.render() for c in self.log_coeffs],
            "exp": self.exp.to_payload(),
            "F": self.F.to_payload(),
            "inverse": self.inverse.to_payload(),
            "pseries": self.pseries.to_payload(),
        }

    @classmethod
    def from_payload(cls, payload: Mapping[str, object]) -> "FormalGroupLaw":
        p, n = int(payload["p"]), int(payload["n"])  # type: ignore[arg-type]
        rationals = ScalarRing.rationals(p)
        return cls(
            p=p,
            n=n,
            flavor=str(payload["flavor"]),
            D=int(payload["D"]),  # type: ignore[arg-type]
            N=int(payload["N"]),  # type: ignore[arg-type]
            log_coeffs=[vp_parse(text, rationals, 1, n) for text in payload["log_coeffs"]],  # type: ignore[union-attr]
            exp=ts_parse(payload["exp"]),  # type: ignore[arg-type]
            F=ts_parse(payload["F"]),  # type: ignore[arg-type]
            inverse=ts_parse(payload["inverse"]),  # type: ignore[arg-type]
            pseries=ts_parse(payload["pseries"]),  # type: ignore[arg-type]
        )

    def __repr__(self) -> str:
        return f"FormalGroupLaw(p={self.p}, n={self.n}, flavor={self.flavor}, D={self.D}, N={self.N})"


def build_fgl(p: int, n: int, flavor: str, D: int, N: int = DEFAULT_PADIC_PRECISION) -> FormalGroupLaw:
    if n < 1:
        raise ConfigurationError(f"n must be >= 1, got {n}")
    if D < 1 or N < 1:
        raise ConfigurationError(f"truncation D and precision N must be >= 1 (D={D}, N={N})")
    if D < p ** n:
        raise ConfigurationError(f"D={D} cannot express t^{p ** n}; need D >= p^n")
    ScalarRing.rationals(p)  # rejects composite p
    logs = log_coefficients(p, n, flavor, _log_exponents(p, D))
    exp = exp_series(logs, p, n, D)
    law = FormalGroupLaw(p, n, flavor, D, N, logs, exp)
    logger.info("built %r: F has %d terms, [p](t) has %d terms", law, len(law.F), len(law.pseries))
    return law


def exp_log_combination(
    law: FormalGroupLaw, coefficients: Mapping[str, int], ring: SeriesRing, cap: int
) -> TruncatedSeries:
    """
    exp(sum_y c_y log y) in ``ring`` to degree ``cap``.

    This is [c](y) for a single variable, F(s,t) for {s:1, t:1}, and
    t -_F [lambda](x) for {t:1, x_i:-lambda_i}. Generators below ring.lo are
    set to zero at the rational stage (a ring map), then the result is reduced
    to ring's scalars; a denominator divisible by p raises NonIntegralError.
    """
    if cap > law.D:
        raise ConfigurationError(f"cap {cap} exceeds the truncation D={law.D} the law was built with")
    for name in coefficients:
        ring.index(name)
        if ring.weights[ring.index(name)] != 1:
            raise ConfigurationError("exp/log combinations need weight-one variables")
    rational_ring = SeriesRing(ring.variables, ScalarRing.rationals(law.p), ring.lo, ring.hi, ring.weights)
    p = law.p

    u = rational_ring.zero(cap)
    for name, c in sorted(coefficients.items()):
        if not c:
            continue
        for i, l_i in enumerate(law.log_coeffs):
            if p ** i > cap:
                break
            coefficient = l_i.map_to(rational_ring.scalars, ring.lo, ring.hi).scale(c)
            if coefficient:
                u = u + rational_ring.var(name, cap, p ** i).scale(coefficient)
    if u.is_zero():
        return ring.zero(cap)

    exp_coeffs = {
        xexp[0]: coefficient.map_to(rational_ring.scalars, ring.lo, ring.hi) for xexp, coefficient in law.exp.items()
    }
    top = min(cap, law.exp.prec)
    acc = rational_ring.constant(exp_coeffs.get(top, rational_ring.coefficient()), cap - top)
    for k in range(top - 1, 0, -1):
        acc = u.mul(acc, cap=cap - k)
        e_k = exp_coeffs.get(k)
        if e_k:
            acc = acc + rational_ring.constant(e_k, cap - k)
    result = u.mul(acc, cap=cap)
    return result.map_to(ring.scalars, ring.lo, ring.hi)


# ========== 3. integer series and formal sums ==========


def _law_F(law: FormalGroupLaw, ring: SeriesRing) -> TruncatedSeries:
    target = ring.with_variables(("s", "t"))
    return law.over(law.F, target)


def formal_sum(law: FormalGroupLaw, terms: Sequence[TruncatedSeries]) -> TruncatedSeries:
    if not terms:
        raise ConfigurationError("formal_sum needs at least one term")
    F = _law_F(law, terms[0].ring)
    total = terms[0]
    for term in terms[1:]:
        total = substitute(F, {"s": total, "t": term})
    return total


def formal_inverse(law: FormalGroupLaw, a: TruncatedSeries) -> TruncatedSeries:
    iota = law.over(law.inverse, a.ring.with_variables(("t",)))
    return substitute(iota, {"t": a})


def formal_diff(law: FormalGroupLaw, a: TruncatedSeries, b: TruncatedSeries) -> TruncatedSeries:
    return formal_sum(law, [a, formal_inverse(law, b)])


def int_series(law: FormalGroupLaw, c: int, ring: Optional[SeriesRing] = None) -> TruncatedSeries:
    """[c](t) by iterated formal addition: [0]=0, [1]=t, [c+1](t)=F(t,[c](t)), [-c]=iota([c])."""
    ring = ring or law.e_ring(0, ("t",))
    t = ring.var("t", law.D)
    if c == 0:
        return ring.zero(law.D)
    result = t
    for _ in range(abs(c) - 1):
        result = formal_sum(law, [t, result])
    if c < 0:
        result = formal_inverse(law, result)
    return result


# ========== 4. checks ==========


def check_axioms(law: FormalGroupLaw) -> List[AxiomCheck]:
    F = law.F
    D = law.D
    checks = []

    unit = F.split_by("t").get(0, F.ring.zero(D))
    expected = F.ring.var("s", D)
    checks.append(AxiomCheck("unit", unit == expected, "" if unit == expected else (unit - expected).render()))

    swapped = TruncatedSeries._make(
        F.ring, F.prec, {(b, a): dict(c) for (a, b), c in F.raw_terms().items()}
    )
    checks.append(AxiomCheck("commutativity", swapped == F, "" if swapped == F else (swapped - F).render()))

    triple = law.e_ring(0, ("s", "t", "u"))
    s, t, u = (triple.var(name, D) for name in ("s", "t", "u"))
    left = substitute(F, {"s": substitute(F, {"s": s, "t": t}), "t": u})
    right = substitute(F, {"s": s, "t": substitute(F, {"s": t, "t": u})})
    checks.append(AxiomCheck("associativity", left == right, "" if left == right else (left - right).render()))

    single = law.e_ring(0, ("t",))
    t1 = single.var("t", D)
    zero = substitute(F, {"s": t1, "t": law.inverse})
    checks.append(AxiomCheck("inverse", zero.is_zero(), zero.render()))
    return checks


def check_flavor_identity(law: FormalGroupLaw) -> AxiomCheck:
    """araki: [p](t) = sum^F_{k>=0} v_k t^{p^k}; hazewinkel: [p](t) = exp_F(pt) +_F sum^F_{k>0} v_k t^{p^k}."""
    ring = law.e_ring(0, ("t",))
    D = law.D
    pieces = []
    for k in range(1, law.n + 1):
        if law.p ** k <= D:
            pieces.append(ring.var("t", D, law.p ** k).scale(ring.coefficient({((k, 1),): 1})))
    if law.flavor == "araki":
        pieces.insert(0, ring.var("t", D).scale(law.p))
    else:
        scaled_exp = TruncatedSeries._make(
            law.exp.ring,
            law.exp.prec,
            {xexp: {vk: s * law.p ** xexp[0] for vk, s in c.items()} for xexp, c in law.exp.raw_terms().items()},
        )
        pieces.insert(0, scaled_exp.map_to(ring.scalars, ring.lo, ring.hi))
    expected = formal_sum(law, pieces)
    holds = expected == law.pseries
    return AxiomCheck(f"{law.flavor}-p-series", holds, "" if holds else (expected - law.pseries).render())


def compare_flavors_mod_p(p: int, n: int, D: int) -> FlavorComparison:
    laws = [build_fgl(p, n, flavor, D, 1) for flavor in FLAVORS]
    reduced = [law.F.map_to(ScalarRing.prime_field(p), 1, n) for law in laws]
    difference = reduced[0] - reduced[1]
    rendered = tuple(
        f"{coefficient.render()} at {list(xexp)}" for xexp, coefficient in difference.items()
    )
    if rendered:
        logger.warning("hazewinkel and araki laws differ mod %d: %s", p, rendered[:3])
    return FlavorComparison(agree=not rendered, differences=rendered)


# ========== 5. pi decomposition ==========


def pi_decompose(ps: TruncatedSeries) -> List[TruncatedSeries]:
    """
    The series pi_0..pi_n with [p](t) = sum_k v_k pi_k(t), v_0 = p and pi_0 = t.

    Terms of [p](t) - pt are assigned to the largest v-index they contain.
    """
    ring = ps.ring
    if ring.variables != ("t",) or ring.scalars.kind != "integers_mod" or ring.lo != 1:
        raise ConfigurationError("pi_decompose expects [p](t) over Z/p^N[v_1..v_n]")
    n = ring.hi
    buckets: List[Dict[Tuple[int, ...], Dict]] = [dict() for _ in range(n + 1)]
    leftover = []
    for xexp, coefficient in ps.items():
        for k, part in coefficient.split_top():
            if k == 0:
                expected = ring.scalars.p % ring.scalars.modulus if xexp == (1,) else 0
                if part.raw_terms() != ({(): expected} if expected else {}):
                    leftover.append(f"{part.render()}*t^{xexp[0]}")
                continue
            buckets[k][xexp] = dict(part.raw_terms())
    if leftover:
        raise InvariantViolation(f"[p](t) has v-free terms besides pt: {leftover}")
    pis = [ring.var("t", ps.prec)]
    pis.extend(TruncatedSeries._make(ring, ps.prec, buckets[k]) for k in range(1, n + 1))
    return pis


def pi_congruence_check(pi: TruncatedSeries, k: int) -> AxiomCheck:
    """pi_k = t^{p^k} mod (p, t^{p^k+1}) and mod I_{n+1}."""
    p = pi.ring.scalars.p
    n = pi.ring.hi
    target = p ** k
    mod_p = pi.reduce(1)
    low = mod_p.truncate(min(target, mod_p.prec))
    expected_low = mod_p.ring.var("t", low.prec, target)
    mod_ideal = pi.reduce(n + 1)
    expected_full = mod_ideal.ring.var("t", mod_ideal.prec, target)
    holds_low = low == expected_low
    holds_full = mod_ideal == expected_full
    detail = []
    if not holds_low:
        detail.append(f"mod (p, t^{target + 1}): {low.render()}")
    if not holds_full:
        detail.append(f"mod I_{n + 1}: {mod_ideal.render()}")
    return AxiomCheck(f"pi_{k}-congruence", holds_low and holds_full, "; ".join(detail))
