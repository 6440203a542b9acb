"""
Truncated multivariate power series over VPolynomial coefficients.

A ``TruncatedSeries`` lives in a ``SeriesRing`` (variable names, integer
weights, coefficient scalars and generator range) and carries its own
precision ``prec``: every term of weighted degree <= prec is exact, nothing
above it is stored. Precision follows the usual rules for power series:

* a + b is known to min(prec_a, prec_b);
* a * b is known to min(prec_a + ord_b, prec_b + ord_a), optionally capped;
* g(args) is known to min(prec of args, (prec_g + 1) * ratio - 1) where ratio
  is the smallest order/weight quotient among the substituted variables.

Truncation is by weighted x-degree only, never by v-degree. Coefficients are
stored as raw ``{vkey: scalar}`` dicts for speed; ``coefficient`` wraps them.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

from .coeffring import (
    Scalar,
    ScalarRing,
    VKey,
    VPolynomial,
    poly_clean,
    poly_map,
    vkey_degree,
    vkey_generator,
    vkey_mul,
    vkey_power,
    vp_parse,
    vp_reduce,
)
from .errors import ConfigurationError, PreconditionError

logger = logging.getLogger(__name__)

XExp = Tuple[int, ...]
RawCoefficient = Dict[VKey, Scalar]


# ========== 1. Rings ==========


@dataclass(frozen=True)
class SeriesRing:
    """Coefficient ring E* = scalars[v_lo..v_hi] together with the series variables."""

    variables: Tuple[str, ...]
    scalars: ScalarRing
    lo: int
    hi: int
    weights: Tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if not self.weights:
            object.__setattr__(self, "weights", (1,) * len(self.variables))
        if len(self.weights) != len(self.variables):
            raise ConfigurationError("one weight per variable is required")
        if len(set(self.variables)) != len(self.variables):
            raise ConfigurationError(f"duplicate variable names in {self.variables}")
        if any(w < 1 for w in self.weights):
            raise ConfigurationError("variable weights must be positive")

    @property
    def nvars(self) -> int:
        return len(self.variables)

    def index(self, name: str) -> int:
        try:
            return self.variables.index(name)
        except ValueError:
            raise ConfigurationError(f"unknown variable {name!r}; ring has {self.variables}") from None

    def degree(self, xexp: XExp) -> int:
        return sum(w * e for w, e in zip(self.weights, xexp))

    def unit_exponent(self, name: str, power: int = 1) -> XExp:
        exps = [0] * self.nvars
        exps[self.index(name)] = power
        return tuple(exps)

    @property
    def origin(self) -> XExp:
        return (0,) * self.nvars

    def with_variables(self, variables: Sequence[str], weights: Sequence[int] = ()) -> "SeriesRing":
        return SeriesRing(tuple(variables), self.scalars, self.lo, self.hi, tuple(weights))

    def with_scalars(self, scalars: ScalarRing, lo: int, hi: int) -> "SeriesRing":
        return SeriesRing(self.variables, scalars, lo, hi, self.weights)

    def same_coefficients(self, other: "SeriesRing") -> bool:
        return self.scalars == other.scalars and self.lo == other.lo and self.hi == other.hi

    def coefficient(self, terms: Optional[Mapping[VKey, Scalar]] = None) -> VPolynomial:
        return VPolynomial(self.scalars, self.lo, self.hi, terms)

    # --- element constructors ---

    def zero(self, prec: int) -> "TruncatedSeries":
        return TruncatedSeries._make(self, prec, {})

    def constant(self, value: Union[VPolynomial, Scalar], prec: int) -> "TruncatedSeries":
        if isinstance(value, VPolynomial):
            if not (value.scalars == self.scalars and value.lo == self.lo and value.hi == self.hi):
                raise ConfigurationError("constant lives in a different coefficient ring")
            raw = dict(value.raw_terms())
        else:
            raw = poly_clean({(): self.scalars.normalize(value)}, self.scalars)
        return TruncatedSeries._make(self, prec, {self.origin: raw} if raw and prec >= 0 else {})

    def one(self, prec: int) -> "TruncatedSeries":
        return self.constant(1, prec)

    def var(self, name: str, prec: int, power: int = 1) -> "TruncatedSeries":
        xexp = self.unit_exponent(name, power)
        if self.degree(xexp) > prec:
            return self.zero(prec)
        return TruncatedSeries._make(self, prec, {xexp: {(): 1}})

    def v(self, index: int, prec: int) -> "TruncatedSeries":
        if index == 0:
            return self.constant(self.scalars.p, prec)
        if not self.lo <= index <= self.hi:
            return self.zero(prec)
        return TruncatedSeries._make(self, prec, {self.origin: {vkey_generator(index): 1}})

    def monomial(self, xexp: XExp, vkey: VKey, prec: int, scalar: Scalar = 1) -> "TruncatedSeries":
        if self.degree(xexp) > prec:
            return self.zero(prec)
        raw = poly_clean({vkey: self.scalars.normalize(scalar)}, self.scalars)
        return TruncatedSeries._make(self, prec, {xexp: raw} if raw else {})

    def from_flat(self, prec: int, items: Iterable[Tuple[XExp, VKey, Scalar]]) -> "TruncatedSeries":
        terms: Dict[XExp, RawCoefficient] = {}
        for xexp, vkey, scalar in items:
            if self.degree(xexp) > prec:
                continue
            bucket = terms.setdefault(xexp, {})
            bucket[vkey] = bucket.get(vkey, 0) + scalar
        return TruncatedSeries._make(self, prec, _clean_terms(terms, self.scalars))

    def describe(self) -> str:
        names = ",".join(
            name if w == 1 else f"{name}:{w}" for name, w in zip(self.variables, self.weights)
        )
        return f"{self.scalars.describe()}[v{self.lo}..v{self.hi}][[{names}]]"

    def as_dict(self) -> Dict[str, object]:
        return {
            "variables": list(self.variables),
            "weights": list(self.weights),
            "scalars": self.scalars.as_dict(),
            "lo": self.lo,
            "hi": self.hi,
        }

    @classmethod
    def from_dict(cls, payload: Mapping[str, object]) -> "SeriesRing":
        return cls(
            tuple(payload["variables"]),  # type: ignore[arg-type]
            ScalarRing.from_dict(payload["scalars"]),  # type: ignore[arg-type]
            int(payload["lo"]),  # type: ignore[arg-type]
            int(payload["hi"]),  # type: ignore[arg-type]
            tuple(payload.get("weights") or ()),  # type: ignore[arg-type]
        )


def _clean_terms(terms: Dict[XExp, RawCoefficient], scalars: ScalarRing) -> Dict[XExp, RawCoefficient]:
    out = {}
    for xexp, coefficient in terms.items():
        cleaned = poly_clean(coefficient, scalars)
        if cleaned:
            out[xexp] = cleaned
    return out


# ========== 2. Series ==========


class TruncatedSeries:
    __slots__ = ("ring", "prec", "_terms")

    def __init__(
        self,
        ring: SeriesRing,
        prec: int,
        terms: Optional[Mapping[XExp, Union[VPolynomial, Mapping[VKey, Scalar]]]] = None,
    ) -> None:
        raw: Dict[XExp, RawCoefficient] = {}
        for xexp, coefficient in (terms or {}).items():
            xexp = tuple(xexp)
            if len(xexp) != ring.nvars or any(e < 0 for e in xexp):
                raise ConfigurationError(f"exponent {xexp} does not fit variables {ring.variables}")
            if ring.degree(xexp) > prec:
                continue
            if isinstance(coefficient, VPolynomial):
                coefficient = ring.constant(coefficient, prec)._terms.get(ring.origin, {})
            else:
                coefficient = ring.coefficient(coefficient).raw_terms()
            if coefficient:
                raw[xexp] = dict(coefficient)
        self.ring = ring
        self.prec = prec
        self._terms = _clean_terms(raw, ring.scalars)

    @classmethod
    def _make(cls, ring: SeriesRing, prec: int, terms: Dict[XExp, RawCoefficient]) -> "TruncatedSeries":
        obj = cls.__new__(cls)
        obj.ring = ring
        obj.prec = prec
        obj._terms = terms
        return obj

    # --- inspection ---

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def order(self) -> int:
        """Smallest weighted degree carrying a term; prec + 1 for the zero series."""
        if not self._terms:
            return self.prec + 1
        degree = self.ring.degree
        return min(degree(xexp) for xexp in self._terms)

    def coefficient(self, xexp: XExp) -> VPolynomial:
        return VPolynomial._raw(self.ring.scalars, self.ring.lo, self.ring.hi, dict(self._terms.get(tuple(xexp), {})))

    def constant_coefficient(self) -> VPolynomial:
        return self.coefficient(self.ring.origin)

    def raw_terms(self) -> Mapping[XExp, RawCoefficient]:
        return self._terms

    def sort_key(self, xexp: XExp) -> Tuple[int, XExp]:
        return (self.ring.degree(xexp), xexp)

    def items(self) -> Iterator[Tuple[XExp, VPolynomial]]:
        """Terms in graded-lexicographic order."""
        for xexp in sorted(self._terms, key=self.sort_key):
            yield xexp, self.coefficient(xexp)

    def flat_terms(self) -> Iterator[Tuple[XExp, VKey, Scalar]]:
        for xexp in sorted(self._terms, key=self.sort_key):
            for vkey, scalar in sorted(self._terms[xexp].items()):
                yield xexp, vkey, scalar

    def cohomological_degrees(self) -> List[int]:
        p = self.ring.scalars.p
        found = set()
        for xexp, coefficient in self._terms.items():
            xdeg = 2 * self.ring.degree(xexp)
            for vkey in coefficient:
                found.add(xdeg + vkey_degree(vkey, p))
        return sorted(found)

    def is_homogeneous(self) -> bool:
        return len(self.cohomological_degrees()) <= 1

    def homogeneous_degree(self) -> Optional[int]:
        degrees = self.cohomological_degrees()
        if not degrees:
            return None
        if len(degrees) > 1:
            raise PreconditionError(f"series is not homogeneous (degrees {degrees})")
        return degrees[0]

    # --- arithmetic ---

    def _check(self, other: "TruncatedSeries") -> None:
        if self.ring.variables != other.ring.variables or not self.ring.same_coefficients(other.ring):
            raise ConfigurationError(f"series rings differ: {self.ring.describe()} vs {other.ring.describe()}")
        if self.ring.weights != other.ring.weights:
            raise ConfigurationError("series rings use different variable weights")

    def _lift(self, other: Union["TruncatedSeries", VPolynomial, Scalar]) -> "TruncatedSeries":
        if isinstance(other, TruncatedSeries):
            self._check(other)
            return other
        return self.ring.constant(other, self.prec)

    def __add__(self, other: Union["TruncatedSeries", VPolynomial, Scalar]) -> "TruncatedSeries":
        other = self._lift(other)
        prec = min(self.prec, other.prec)
        degree = self.ring.degree
        merged: Dict[XExp, RawCoefficient] = {}
        for source in (self._terms, other._terms):
            for xexp, coefficient in source.items():
                if degree(xexp) > prec:
                    continue
                bucket = merged.get(xexp)
                if bucket is None:
                    merged[xexp] = dict(coefficient)
                else:
                    for vkey, scalar in coefficient.items():
                        bucket[vkey] = bucket.get(vkey, 0) + scalar
        return TruncatedSeries._make(self.ring, prec, _clean_terms(merged, self.ring.scalars))

    __radd__ = __add__

    def __neg__(self) -> "TruncatedSeries":
        return self.scale(-1)

    def __sub__(self, other: Union["TruncatedSeries", VPolynomial, Scalar]) -> "TruncatedSeries":
        return self + (-self._lift(other))

    def __rsub__(self, other: Union[VPolynomial, Scalar]) -> "TruncatedSeries":
        return self._lift(other) - self

    def scale(self, factor: Union[VPolynomial, Scalar]) -> "TruncatedSeries":
        if isinstance(factor, VPolynomial):
            return self.mul(self.ring.constant(factor, self.prec))
        factor = self.ring.scalars.normalize(factor)
        terms = {xexp: {k: v * factor for k, v in c.items()} for xexp, c in self._terms.items()}
        return TruncatedSeries._make(self.ring, self.prec, _clean_terms(terms, self.ring.scalars))

    def __mul__(self, other: Union["TruncatedSeries", VPolynomial, Scalar]) -> "TruncatedSeries":
        if isinstance(other, TruncatedSeries):
            return self.mul(other)
        return self.scale(other)

    __rmul__ = __mul__

    def mul(self, other: "TruncatedSeries", cap: Optional[int] = None) -> "TruncatedSeries":
        self._check(other)
        ceiling = max(self.prec, other.prec) if cap is None else cap
        prec = min(self.prec + other.order(), other.prec + self.order(), ceiling)
        return TruncatedSeries._make(self.ring, prec, _mul_raw(self._terms, other._terms, self.ring, prec))

    def power(self, exponent: int, cap: Optional[int] = None) -> "TruncatedSeries":
        return ts_power(self, exponent, cap)

    def __pow__(self, exponent: int) -> "TruncatedSeries":
        return ts_power(self, exponent)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        try:
            return (self - other).is_zero()
        except ConfigurationError:
            return False

    __hash__ = None  # type: ignore[assignment]

    # --- truncation and restructuring ---

    def truncate(self, prec: int) -> "TruncatedSeries":
        if prec >= self.prec:
            return self
        degree = self.ring.degree
        return TruncatedSeries._make(
            self.ring, prec, {x: dict(c) for x, c in self._terms.items() if degree(x) <= prec}
        )

    def split_by(self, name: str) -> Dict[int, "TruncatedSeries"]:
        """Coefficients of name^e, as series in the same ring with that exponent cleared."""
        i = self.ring.index(name)
        weight = self.ring.weights[i]
        buckets: Dict[int, Dict[XExp, RawCoefficient]] = {}
        for xexp, coefficient in self._terms.items():
            e = xexp[i]
            stripped = xexp[:i] + (0,) + xexp[i + 1:]
            buckets.setdefault(e, {})[stripped] = dict(coefficient)
        return {
            e: TruncatedSeries._make(self.ring, self.prec - e * weight, terms)
            for e, terms in sorted(buckets.items())
        }

    def split_at(self, name: str, bound: int) -> Tuple["TruncatedSeries", "TruncatedSeries"]:
        """(terms with name-exponent < bound, terms with exponent >= bound)."""
        i = self.ring.index(name)
        low: Dict[XExp, RawCoefficient] = {}
        high: Dict[XExp, RawCoefficient] = {}
        for xexp, coefficient in self._terms.items():
            (low if xexp[i] < bound else high)[xexp] = dict(coefficient)
        return (
            TruncatedSeries._make(self.ring, self.prec, low),
            TruncatedSeries._make(self.ring, self.prec, high),
        )

    def shift(self, name: str, amount: int) -> "TruncatedSeries":
        """Multiply by name^amount; a negative amount divides exactly."""
        i = self.ring.index(name)
        weight = self.ring.weights[i]
        terms: Dict[XExp, RawCoefficient] = {}
        for xexp, coefficient in self._terms.items():
            e = xexp[i] + amount
            if e < 0:
                raise PreconditionError(f"{name}^{-amount} does not divide the series")
            terms[xexp[:i] + (e,) + xexp[i + 1:]] = dict(coefficient)
        return TruncatedSeries._make(self.ring, self.prec + amount * weight, terms)

    def embed(self, target: SeriesRing, rename: Optional[Mapping[str, str]] = None) -> "TruncatedSeries":
        """Move into a ring with more (or renamed) variables and the same coefficients."""
        if not self.ring.same_coefficients(target):
            raise ConfigurationError("embed keeps the coefficient ring; use map_to first")
        rename = dict(rename or {})
        positions = []
        for name, weight in zip(self.ring.variables, self.ring.weights):
            j = target.index(rename.get(name, name))
            if target.weights[j] != weight:
                raise ConfigurationError(f"variable {name!r} changes weight under embedding")
            positions.append(j)
        terms: Dict[XExp, RawCoefficient] = {}
        for xexp, coefficient in self._terms.items():
            new = [0] * target.nvars
            for e, j in zip(xexp, positions):
                new[j] = e
            terms[tuple(new)] = dict(coefficient)
        return TruncatedSeries._make(target, self.prec, terms)

    def map_coefficients(self, fn: Callable[[VPolynomial], VPolynomial], target: SeriesRing) -> "TruncatedSeries":
        if target.variables != self.ring.variables:
            raise ConfigurationError("map_coefficients keeps the variables")
        terms = {}
        for xexp, coefficient in self.items():
            image = fn(coefficient)
            if image:
                terms[xexp] = dict(image.raw_terms())
        return TruncatedSeries._make(target, self.prec, terms)

    def map_to(self, scalars: ScalarRing, lo: int, hi: int) -> "TruncatedSeries":
        """Coefficient-wise ring map: kill generators outside [lo, hi], reduce scalars."""
        target = self.ring.with_scalars(scalars, lo, hi)
        terms = {}
        for xexp, coefficient in self._terms.items():
            image = poly_map(coefficient, self.ring.scalars, scalars, lo, hi)
            if image:
                terms[xexp] = image
        return TruncatedSeries._make(target, self.prec, terms)

    def reduce(self, j: int) -> "TruncatedSeries":
        """Coefficient-wise reduction modulo I_j."""
        scalars = self.ring.scalars
        if j >= 1 and scalars.kind == "integers_mod":
            scalars = ScalarRing.prime_field(scalars.p)
        target = self.ring.with_scalars(scalars, self.ring.lo, self.ring.hi)
        return self.map_coefficients(lambda c: vp_reduce(c, j), target)

    def inverse(self) -> "TruncatedSeries":
        """Multiplicative inverse; the constant coefficient must be a v-free unit."""
        constant = self.constant_coefficient()
        if set(constant.raw_terms()) - {()} or not self.ring.scalars.is_unit(constant.constant_term()):
            raise PreconditionError(f"constant coefficient {constant.render()} is not a unit")
        u_inv = self.ring.scalars.inverse(constant.constant_term())
        nilpotent = self.ring.one(self.prec) - self.scale(u_inv)
        acc = self.ring.one(self.prec)
        for _ in range(self.prec + 1):
            acc = self.ring.one(self.prec) + nilpotent.mul(acc, cap=self.prec)
        return acc.scale(u_inv)

    # --- text ---

    def to_payload(self) -> Dict[str, object]:
        return {
            "ring": self.ring.as_dict(),
            "prec": self.prec,
            "terms": [[list(xexp), coefficient.render()] for xexp, coefficient in self.items()],
        }

    @classmethod
    def from_payload(cls, payload: Mapping[str, object]) -> "TruncatedSeries":
        return ts_parse(payload)

    def render(self) -> str:
        if not self._terms:
            return f"O({self.prec + 1})" if self.prec >= 0 else "0"
        parts = []
        for xexp, coefficient in self.items():
            monomial = "*".join(
                name if e == 1 else f"{name}^{e}" for name, e in zip(self.ring.variables, xexp) if e
            )
            text = coefficient.render()
            if len(coefficient) > 1:
                text = f"({text})"
            if not monomial:
                parts.append(text)
            elif text == "1":
                parts.append(monomial)
            else:
                parts.append(f"{text}*{monomial}")
        return " + ".join(parts)

    def __repr__(self) -> str:
        return f"TruncatedSeries({self.render()} + O(deg>{self.prec}) in {self.ring.describe()})"


# ========== 3. kernels ==========


def _mul_raw(
    a: Mapping[XExp, RawCoefficient], b: Mapping[XExp, RawCoefficient], ring: SeriesRing, cap: int
) -> Dict[XExp, RawCoefficient]:
    if not a or not b:
        return {}
    degree = ring.degree
    b_sorted = sorted(((degree(xb), xb, cb) for xb, cb in b.items()), key=lambda item: item[0])
    out: Dict[XExp, RawCoefficient] = {}
    for xa, ca in a.items():
        room = cap - degree(xa)
        if room < 0:
            continue
        for db, xb, cb in b_sorted:
            if db > room:
                break
            xe = tuple(i + j for i, j in zip(xa, xb))
            target = out.get(xe)
            if target is None:
                target = out[xe] = {}
            for va, sa in ca.items():
                for vb, sb in cb.items():
                    vk = vkey_mul(va, vb)
                    target[vk] = target.get(vk, 0) + sa * sb
    return _clean_terms(out, ring.scalars)


def _frobenius(a: TruncatedSeries, cap: int) -> TruncatedSeries:
    p = a.ring.scalars.p
    degree = a.ring.degree
    prec = min(p * (a.prec + 1) - 1, cap)
    terms = {}
    for xexp, coefficient in a.raw_terms().items():
        xe = tuple(p * e for e in xexp)
        if degree(xe) > prec:
            continue
        terms[xe] = {vkey_power(vk, p): s for vk, s in coefficient.items()}
    return TruncatedSeries._make(a.ring, prec, terms)


# ========== 4. public operations ==========


def ts_arith(a: TruncatedSeries, b: TruncatedSeries, op: str) -> TruncatedSeries:
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a.mul(b, cap=min(a.prec, b.prec))
    raise ConfigurationError(f"unknown series operation {op!r}")


def ts_truncate(a: TruncatedSeries, prec: int) -> TruncatedSeries:
    return a.truncate(prec)


def ts_power(a: TruncatedSeries, exponent: int, cap: Optional[int] = None) -> TruncatedSeries:
    """a^exponent; in characteristic p the p-th powers go through the Frobenius."""
    if exponent < 0:
        raise ConfigurationError("negative powers are not supported; use inverse()")
    cap = a.prec if cap is None else cap
    if exponent == 0:
        return a.ring.one(cap)
    p = a.ring.scalars.p
    if a.ring.scalars.characteristic_is_p:
        frobenius_steps = 0
        while exponent % p == 0:
            exponent //= p
            frobenius_steps += 1
        if frobenius_steps:
            base = _power_by_squaring(a, exponent, cap)
            for _ in range(frobenius_steps):
                base = _frobenius(base, cap)
            return base
    return _power_by_squaring(a, exponent, cap)


def _power_by_squaring(a: TruncatedSeries, exponent: int, cap: int) -> TruncatedSeries:
    result: Optional[TruncatedSeries] = None
    base = a
    while exponent:
        if exponent & 1:
            result = base if result is None else result.mul(base, cap=cap)
        exponent >>= 1
        if exponent:
            base = base.mul(base, cap=cap)
    assert result is not None
    return result.truncate(cap)


def ts_product(factors: Sequence[TruncatedSeries], cap: Optional[int] = None) -> TruncatedSeries:
    """
    Product with order-aware truncation.

    Callers only need each factor to precision cap - (sum of the other
    orders); the precision rule for products then delivers ``cap`` exactly.
    """
    if not factors:
        raise ConfigurationError("empty product")
    cap = max(f.prec for f in factors) if cap is None else cap
    result = factors[0].truncate(cap)
    for factor in factors[1:]:
        result = result.mul(factor, cap=cap)
    return result


def ts_map_coefficients(a: TruncatedSeries, fn: Callable[[VPolynomial], VPolynomial], target: SeriesRing) -> TruncatedSeries:
    return a.map_coefficients(fn, target)


def substitute(
    g: TruncatedSeries,
    args: Union[Mapping[str, TruncatedSeries], Sequence[TruncatedSeries]],
    prec: Optional[int] = None,
) -> TruncatedSeries:
    """
    Evaluate g at the given series, one argument per variable of g.

    Arguments must share one ring whose coefficients equal g's and must have
    positive order; the result precision follows the rule in the module
    docstring, optionally lowered to ``prec``.
    """
    if not isinstance(args, Mapping):
        if len(args) != g.ring.nvars:
            raise ConfigurationError(f"expected {g.ring.nvars} arguments, got {len(args)}")
        args = dict(zip(g.ring.variables, args))
    missing = [name for name in g.ring.variables if name not in args]
    if missing:
        raise ConfigurationError(f"no argument for variables {missing}")
    ordered = [args[name] for name in g.ring.variables]
    if not ordered:
        raise ConfigurationError("substitution needs at least one variable")
    target = ordered[0].ring
    for arg in ordered:
        if arg.ring != target:
            raise ConfigurationError("substitution arguments live in different rings")
    if not g.ring.same_coefficients(target):
        raise ConfigurationError(
            f"coefficients of g ({g.ring.describe()}) differ from the arguments ({target.describe()})"
        )
    orders = []
    for name, arg in zip(g.ring.variables, ordered):
        if not arg.constant_coefficient().is_zero():
            raise PreconditionError(f"argument for {name!r} has nonzero constant term")
        orders.append(arg.order())

    ratio = min(Fraction(o, w) for o, w in zip(orders, g.ring.weights))
    result_prec = min(arg.prec for arg in ordered)
    result_prec = min(result_prec, math.ceil(ratio * (g.prec + 1)) - 1)
    if prec is not None:
        result_prec = min(result_prec, prec)

    powers: List[List[TruncatedSeries]] = [[target.one(result_prec)] for _ in ordered]

    def power_of(i: int, e: int) -> TruncatedSeries:
        cached = powers[i]
        while len(cached) <= e:
            cached.append(cached[-1].mul(ordered[i], cap=result_prec))
        return cached[e]

    def evaluate(items: List[Tuple[XExp, RawCoefficient]], i: int) -> TruncatedSeries:
        if i == len(ordered):
            (_, coefficient), = items
            return TruncatedSeries._make(target, result_prec, {target.origin: dict(coefficient)})
        groups: Dict[int, List[Tuple[XExp, RawCoefficient]]] = {}
        for xexp, coefficient in items:
            groups.setdefault(xexp[i], []).append((xexp, coefficient))
        total = target.zero(result_prec)
        for e in sorted(groups):
            inner = evaluate(groups[e], i + 1)
            if e:
                inner = power_of(i, e).mul(inner, cap=result_prec)
            total = total + inner
        return total

    if g.is_zero():
        return target.zero(result_prec)
    result = evaluate(list(g.raw_terms().items()), 0)
    return result.truncate(result_prec)


def weierstrass_divrem(
    f: TruncatedSeries, phi: TruncatedSeries, d: int, variable: str = "t"
) -> Tuple[TruncatedSeries, TruncatedSeries]:
    """
    Division with remainder by a Weierstrass series of degree d in ``variable``.

    Writes phi = P + t^d U with P = sum_{k<d} a_k t^k and U a unit, then
    repeatedly moves the part of the running remainder of t-degree >= d into
    the quotient. Coefficients a_k (k < d) must lie in the maximal ideal and
    a_d must have a unit constant term. Returns (q, r) with f = q*phi + r and
    deg_t r < d.

    Truncation is by x-degree only, so the terms of t-degree < d must have
    order at least that of t^d; otherwise q is not determined by the
    truncated data (t^2 + v1*t is rejected, t^2 + v1*x0*t is fine).
    """
    f._check(phi)
    ring = f.ring
    coefficients = phi.split_by(variable)
    for k in range(d):
        a_k = coefficients.get(k)
        if a_k is None:
            continue
        constant = a_k.constant_coefficient()
        if not ring.scalars.in_maximal_ideal(constant.constant_term()):
            raise PreconditionError(
                f"coefficient a_{k} of {variable}^{k} is not topologically nilpotent "
                f"(constant term {constant.render()})"
            )
    a_d = coefficients.get(d)
    if a_d is None or not ring.scalars.is_unit(a_d.constant_coefficient().constant_term()) or (
        set(a_d.constant_coefficient().raw_terms()) - {()}
    ):
        shown = a_d.constant_coefficient().render() if a_d is not None else "0"
        raise PreconditionError(f"coefficient a_{d} of {variable}^{d} is not a unit (constant term {shown})")

    low_part, high_part = phi.split_at(variable, d)
    leading = d * ring.weights[ring.index(variable)]
    if not low_part.is_zero() and low_part.order() < leading:
        raise PreconditionError(
            f"terms of {variable}-degree < {d} have x-order {low_part.order()} below the "
            f"Weierstrass degree {leading}: {low_part.render()}"
        )
    unit = high_part.shift(variable, -d)
    unit_inverse = unit.inverse()

    working = min(f.prec, phi.prec)
    quotient = ring.zero(working - phi.order())
    remainder = ring.zero(working)
    current = f.truncate(working)
    bound = d * (working + 2) + 2
    for _ in range(bound):
        if current.is_zero():
            break
        low, high = current.split_at(variable, d)
        remainder = remainder + low.truncate(current.prec)
        if high.is_zero():
            current = ring.zero(current.prec)
            break
        h = high.shift(variable, -d).mul(unit_inverse)
        quotient = quotient + h
        current = -(h.mul(low_part, cap=working))
    else:
        raise PreconditionError("Weierstrass division did not converge within the truncation")
    remainder = remainder.truncate(min(remainder.prec, current.prec))
    logger.debug("weierstrass_divrem: d=%d quotient terms=%d remainder terms=%d", d, len(quotient), len(remainder))
    return quotient, remainder


def weierstrass_basis_coords(
    c: TruncatedSeries, phi: TruncatedSeries, d: int, variable: str = "t", coordinate: str = "y"
) -> List[TruncatedSeries]:
    """
    Coordinates b_0..b_{d-1} with c(t) = sum_i b_i(phi(t)) t^i.

    The b_i live in the ring obtained by replacing ``variable`` with
    ``coordinate`` of weight d. The recombination is checked before returning.
    """
    ring = c.ring
    i_t = ring.index(variable)
    names = list(ring.variables)
    weights = list(ring.weights)
    names[i_t] = coordinate
    weights[i_t] = d * ring.weights[i_t]
    coord_ring = ring.with_variables(names, weights)

    base_prec = min(c.prec, phi.prec)
    buckets: List[Dict[XExp, RawCoefficient]] = [dict() for _ in range(d)]
    current = c.truncate(base_prec)
    step = max(phi.order(), 1)
    for j in range(base_prec // step + 2):
        if current.is_zero():
            break
        quotient, remainder = weierstrass_divrem(current, phi, d, variable)
        for xexp, coefficient in remainder.raw_terms().items():
            i = xexp[i_t]
            coord = xexp[:i_t] + (j,) + xexp[i_t + 1:]
            if coord_ring.degree(coord) > base_prec - i * ring.weights[i_t]:
                continue
            buckets[i][coord] = dict(coefficient)
        current = quotient
    coords = [
        TruncatedSeries._make(coord_ring, base_prec - i * ring.weights[i_t], buckets[i]) for i in range(d)
    ]

    recombined = recombine_basis_coords(coords, phi, variable, coordinate)
    residual = (c - recombined)
    if not residual.is_zero():
        raise PreconditionError(f"basis coordinates fail to recombine: {residual.render()}")
    return coords


def recombine_basis_coords(
    coords: Sequence[TruncatedSeries], phi: TruncatedSeries, variable: str = "t", coordinate: str = "y"
) -> TruncatedSeries:
    ring = phi.ring
    total: Optional[TruncatedSeries] = None
    for i, b in enumerate(coords):
        args = {}
        for name in b.ring.variables:
            args[name] = phi if name == coordinate else ring.var(name, phi.prec)
        term = substitute(b, args).shift(variable, i) if not b.is_zero() else ring.zero(b.prec + i)
        total = term if total is None else total + term
    assert total is not None
    return total


# ========== 5. canonical payloads ==========


def ts_parse(payload: Mapping[str, object]) -> TruncatedSeries:
    ring = SeriesRing.from_dict(payload["ring"])  # type: ignore[arg-type]
    prec = int(payload["prec"])  # type: ignore[arg-type]
    terms: Dict[XExp, RawCoefficient] = {}
    for xexp, text in payload["terms"]:  # type: ignore[union-attr]
        coefficient = vp_parse(text, ring.scalars, ring.lo, ring.hi)
        if coefficient:
            terms[tuple(xexp)] = dict(coefficient.raw_terms())
    return TruncatedSeries._make(ring, prec, terms)
