"""
Scalars and graded sparse polynomials in the generators v_lo, ..., v_hi.

A polynomial term is keyed by a *v-key*: a sorted tuple of ``(index, exponent)``
pairs with positive exponents, so ``v1^2*v3`` is ``((1, 2), (3, 1))`` and the
constant monomial is ``()``. The generator v_k sits in cohomological degree
-2(p^k - 1); v_0 is never a variable, it is the scalar p.

Three scalar rings are supported: the prime field F_p, the chain ring Z/p^N,
and exact rationals (``fractions.Fraction``) which are only used while a formal
group law is being constructed. Moving a value from the rationals to a modular
ring checks p-integrality instead of assuming it.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterator, List, Literal, Mapping, Optional, Tuple, Union

from sympy import isprime

from .errors import ConfigurationError, InvariantViolation, NonIntegralError

logger = logging.getLogger(__name__)

ScalarKind = Literal["prime_field", "integers_mod", "rational"]
Scalar = Union[int, Fraction]
VKey = Tuple[Tuple[int, int], ...]


# ========== 1. Scalar rings ==========


@dataclass(frozen=True)
class ScalarRing:
    kind: ScalarKind
    """``prime_field`` (F_p), ``integers_mod`` (Z/p^N) or ``rational`` (Q, p-local bookkeeping)"""

    p: int
    """The prime; for rationals it names the prime whose denominators are watched"""

    N: int = 1
    """p-adic precision, meaningful only for ``integers_mod``"""

    def __post_init__(self) -> None:
        if not isprime(self.p):
            raise ConfigurationError(f"p={self.p} is not prime")
        if self.N < 1:
            raise ConfigurationError(f"p-adic precision must be >= 1, got {self.N}")
        if self.kind == "prime_field" and self.N != 1:
            raise ConfigurationError("prime_field scalars carry N=1")

    @classmethod
    def prime_field(cls, p: int) -> "ScalarRing":
        return cls("prime_field", p, 1)

    @classmethod
    def integers_mod(cls, p: int, N: int) -> "ScalarRing":
        return cls("integers_mod", p, N)

    @classmethod
    def rationals(cls, p: int) -> "ScalarRing":
        return cls("rational", p, 1)

    @property
    def modulus(self) -> Optional[int]:
        if self.kind == "rational":
            return None
        return self.p ** self.N

    @property
    def is_modular(self) -> bool:
        return self.kind != "rational"

    @property
    def characteristic_is_p(self) -> bool:
        return self.kind == "prime_field" or (self.kind == "integers_mod" and self.N == 1)

    def normalize(self, value: Scalar) -> Scalar:
        if self.kind == "rational":
            return Fraction(value)
        if isinstance(value, Fraction):
            return self.reduce_from(value, ScalarRing.rationals(self.p))
        return value % self.modulus

    def is_unit(self, value: Scalar) -> bool:
        if self.kind == "rational":
            return value != 0
        return value % self.p != 0

    def in_maximal_ideal(self, value: Scalar) -> bool:
        """True for scalars that are topologically nilpotent in the p-adic sense."""
        if self.kind == "rational":
            return value == 0
        return value % self.p == 0

    def inverse(self, value: Scalar) -> Scalar:
        if not self.is_unit(value):
            raise InvariantViolation(f"{value} is not a unit in {self.describe()}")
        if self.kind == "rational":
            return 1 / Fraction(value)
        return pow(value, -1, self.modulus)

    def reduce_from(self, value: Scalar, source: "ScalarRing") -> Scalar:
        """Image of ``value`` under the reduction map ``source -> self``."""
        if source.p != self.p:
            raise ConfigurationError(f"cannot reduce from p={source.p} to p={self.p}")
        if self.kind == "rational":
            if source.kind != "rational":
                raise ConfigurationError("no reduction map from a modular ring to the rationals")
            return Fraction(value)
        modulus = self.modulus
        if source.kind == "rational":
            value = Fraction(value)
            if value.denominator % self.p == 0:
                raise NonIntegralError(f"coefficient {value} is not {self.p}-integral")
            return value.numerator * pow(value.denominator, -1, modulus) % modulus
        if source.modulus % modulus:
            raise ConfigurationError(f"no reduction map from {source.describe()} to {self.describe()}")
        return value % modulus

    def render(self, value: Scalar) -> str:
        return str(value)

    def parse(self, text: str) -> Scalar:
        text = text.strip()
        if self.kind == "rational":
            return Fraction(text)
        if "/" in text:
            return self.reduce_from(Fraction(text), ScalarRing.rationals(self.p))
        return int(text) % self.modulus

    def describe(self) -> str:
        if self.kind == "prime_field":
            return f"F_{self.p}"
        if self.kind == "integers_mod":
            return f"Z/{self.p}^{self.N}"
        return f"Q_({self.p})"

    def as_dict(self) -> Dict[str, object]:
        return {"kind": self.kind, "p": self.p, "N": self.N}

    @classmethod
    def from_dict(cls, payload: Mapping[str, object]) -> "ScalarRing":
        return cls(str(payload["kind"]), int(payload["p"]), int(payload["N"]))  # type: ignore[arg-type]


# ========== 2. v-keys ==========


@lru_cache(maxsize=None)
def vkey_mul(a: VKey, b: VKey) -> VKey:
    if not a:
        return b
    if not b:
        return a
    merged = dict(a)
    for index, exponent in b:
        merged[index] = merged.get(index, 0) + exponent
    return tuple(sorted(merged.items()))


@lru_cache(maxsize=None)
def vkey_power(a: VKey, exponent: int) -> VKey:
    return tuple((index, e * exponent) for index, e in a)


def vkey_weight(key: VKey, p: int) -> int:
    """Sum of e_k (p^k - 1); the cohomological degree is minus twice this."""
    return sum(e * (p ** index - 1) for index, e in key)


def vkey_degree(key: VKey, p: int) -> int:
    return -2 * vkey_weight(key, p)


def vkey_top(key: VKey) -> int:
    return key[-1][0] if key else 0


def vkey_divide(key: VKey, index: int) -> VKey:
    out = []
    for i, e in key:
        if i == index:
            if e > 1:
                out.append((i, e - 1))
        else:
            out.append((i, e))
    return tuple(out)


def vkey_generator(index: int) -> VKey:
    return ((index, 1),)


def vkey_render(key: VKey) -> str:
    return "*".join(f"v{i}" if e == 1 else f"v{i}^{e}" for i, e in key)


def v_monomials_of_weight(weight: int, lo: int, hi: int, p: int) -> List[VKey]:
    """All v-keys over v_lo..v_hi with sum e_k (p^k - 1) == weight, canonically sorted."""
    if weight < 0:
        return []
    found: List[VKey] = []

    def extend(index: int, remaining: int, prefix: List[Tuple[int, int]]) -> None:
        if remaining == 0:
            found.append(tuple(prefix))
            return
        if index > hi:
            return
        step = p ** index - 1
        for e in range(remaining // step, -1, -1):
            if e:
                prefix.append((index, e))
            extend(index + 1, remaining - e * step, prefix)
            if e:
                prefix.pop()

    extend(max(lo, 1), weight, [])
    return sorted(found)


# ========== 3. raw coefficient maps ==========
# A raw polynomial is a plain dict VKey -> nonzero scalar; the helpers below are
# shared with the series module, which stores coefficients in this form.


def poly_clean(terms: Mapping[VKey, Scalar], scalars: ScalarRing) -> Dict[VKey, Scalar]:
    modulus = scalars.modulus
    if modulus is None:
        return {k: v for k, v in terms.items() if v}
    out = {}
    for k, v in terms.items():
        v %= modulus
        if v:
            out[k] = v
    return out


def poly_add_into(target: Dict[VKey, Scalar], source: Mapping[VKey, Scalar], factor: Scalar = 1) -> None:
    for k, v in source.items():
        target[k] = target.get(k, 0) + factor * v


def poly_mul(a: Mapping[VKey, Scalar], b: Mapping[VKey, Scalar], scalars: ScalarRing) -> Dict[VKey, Scalar]:
    out: Dict[VKey, Scalar] = {}
    for ka, ca in a.items():
        for kb, cb in b.items():
            key = vkey_mul(ka, kb)
            out[key] = out.get(key, 0) + ca * cb
    return poly_clean(out, scalars)


def poly_map(
    terms: Mapping[VKey, Scalar], source: ScalarRing, target: ScalarRing, lo: int, hi: int
) -> Dict[VKey, Scalar]:
    """Ring map that kills generators outside [lo, hi] and reduces scalars."""
    out: Dict[VKey, Scalar] = {}
    for key, value in terms.items():
        if key and (key[0][0] < lo or key[-1][0] > hi):
            continue
        out[key] = out.get(key, 0) + target.reduce_from(value, source)
    return poly_clean(out, target)


# ========== 4. VPolynomial ==========


class VPolynomial:
    """Immutable sparse polynomial in v_lo..v_hi over a ScalarRing."""

    __slots__ = ("scalars", "lo", "hi", "_terms", "_hash")

    def __init__(
        self,
        scalars: ScalarRing,
        lo: int,
        hi: int,
        terms: Optional[Mapping[VKey, Scalar]] = None,
    ) -> None:
        if lo < 1 or hi < lo - 1:
            raise ConfigurationError(f"invalid generator range [{lo}, {hi}]")
        cleaned: Dict[VKey, Scalar] = {}
        for key, value in (terms or {}).items():
            if key and (key[0][0] < lo or key[-1][0] > hi):
                raise ConfigurationError(f"monomial {vkey_render(key)} outside range [{lo}, {hi}]")
            cleaned[key] = scalars.normalize(value)
        self.scalars = scalars
        self.lo = lo
        self.hi = hi
        self._terms = poly_clean(cleaned, scalars)
        self._hash: Optional[int] = None

    # --- constructors ---

    @classmethod
    def zero(cls, scalars: ScalarRing, lo: int, hi: int) -> "VPolynomial":
        return cls(scalars, lo, hi)

    @classmethod
    def constant(cls, scalars: ScalarRing, lo: int, hi: int, value: Scalar) -> "VPolynomial":
        return cls(scalars, lo, hi, {(): value})

    @classmethod
    def generator(cls, scalars: ScalarRing, lo: int, hi: int, index: int) -> "VPolynomial":
        if index == 0:
            return cls.constant(scalars, lo, hi, scalars.p)
        return cls(scalars, lo, hi, {vkey_generator(index): 1})

    @classmethod
    def _raw(cls, scalars: ScalarRing, lo: int, hi: int, terms: Dict[VKey, Scalar]) -> "VPolynomial":
        obj = cls.__new__(cls)
        obj.scalars = scalars
        obj.lo = lo
        obj.hi = hi
        obj._terms = terms
        obj._hash = None
        return obj

    # --- inspection ---

    @property
    def terms(self) -> Dict[VKey, Scalar]:
        return dict(self._terms)

    def raw_terms(self) -> Mapping[VKey, Scalar]:
        return self._terms

    def items(self) -> Iterator[Tuple[VKey, Scalar]]:
        return iter(sorted(self._terms.items()))

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def constant_term(self) -> Scalar:
        return self._terms.get((), 0)

    def degrees(self) -> List[int]:
        return sorted({vkey_degree(k, self.scalars.p) for k in self._terms})

    def is_homogeneous(self) -> bool:
        return len(self.degrees()) <= 1

    def degree(self) -> Optional[int]:
        """Cohomological degree of a homogeneous value; None for zero."""
        degrees = self.degrees()
        if not degrees:
            return None
        if len(degrees) > 1:
            raise InvariantViolation(f"{self.render()} is not homogeneous")
        return degrees[0]

    def same_ring(self, other: "VPolynomial") -> bool:
        return self.scalars == other.scalars and self.lo == other.lo and self.hi == other.hi

    def _check(self, other: "VPolynomial") -> None:
        if not self.same_ring(other):
            raise ConfigurationError(
                f"coefficient rings differ: {self.scalars.describe()}[v{self.lo}..v{self.hi}] vs "
                f"{other.scalars.describe()}[v{other.lo}..v{other.hi}]"
            )

    # --- arithmetic ---

    def _coerce(self, other: Union["VPolynomial", int, Fraction]) -> "VPolynomial":
        if isinstance(other, VPolynomial):
            self._check(other)
            return other
        return VPolynomial.constant(self.scalars, self.lo, self.hi, other)

    def __add__(self, other: Union["VPolynomial", int, Fraction]) -> "VPolynomial":
        other = self._coerce(other)
        merged = dict(self._terms)
        poly_add_into(merged, other._terms)
        return VPolynomial._raw(self.scalars, self.lo, self.hi, poly_clean(merged, self.scalars))

    __radd__ = __add__

    def __neg__(self) -> "VPolynomial":
        return self.scale(-1)

    def __sub__(self, other: Union["VPolynomial", int, Fraction]) -> "VPolynomial":
        return self + (-self._coerce(other))

    def __rsub__(self, other: Union[int, Fraction]) -> "VPolynomial":
        return self._coerce(other) - self

    def __mul__(self, other: Union["VPolynomial", int, Fraction]) -> "VPolynomial":
        if not isinstance(other, VPolynomial):
            return self.scale(other)
        self._check(other)
        return VPolynomial._raw(self.scalars, self.lo, self.hi, poly_mul(self._terms, other._terms, self.scalars))

    __rmul__ = __mul__

    def scale(self, factor: Scalar) -> "VPolynomial":
        factor = self.scalars.normalize(factor)
        return VPolynomial._raw(
            self.scalars, self.lo, self.hi, poly_clean({k: v * factor for k, v in self._terms.items()}, self.scalars)
        )

    def __pow__(self, exponent: int) -> "VPolynomial":
        result = VPolynomial.constant(self.scalars, self.lo, self.hi, 1)
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    def __eq__(self, other: object) -> bool:
        if isinstance(other, VPolynomial):
            return self.same_ring(other) and self._terms == other._terms
        if isinstance(other, (int, Fraction)):
            return self._terms == VPolynomial.constant(self.scalars, self.lo, self.hi, other)._terms
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.scalars, self.lo, self.hi, frozenset(self._terms.items())))
        return self._hash

    # --- maps ---

    def map_to(self, scalars: ScalarRing, lo: int, hi: int) -> "VPolynomial":
        return VPolynomial._raw(scalars, lo, hi, poly_map(self._terms, self.scalars, scalars, lo, hi))

    def reduce(self, j: int) -> "VPolynomial":
        return vp_reduce(self, j)

    def split_top(self) -> List[Tuple[int, "VPolynomial"]]:
        return vp_split_top(self)

    # --- text ---

    def render(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for key, value in sorted(self._terms.items()):
            monomial = vkey_render(key)
            coefficient = self.scalars.render(value)
            if not monomial:
                parts.append(coefficient)
            elif value == 1:
                parts.append(monomial)
            else:
                parts.append(f"{coefficient}*{monomial}")
        return " + ".join(parts)

    def __str__(self) -> str:
        return self.render()

    def __repr__(self) -> str:
        return f"VPolynomial({self.render()!r} over {self.scalars.describe()}[v{self.lo}..v{self.hi}])"


# ========== 5. module-level operations ==========


def _check_degree_bookkeeping(op: str, result: VPolynomial, *inputs: VPolynomial) -> None:
    """Debug-level check that arithmetic respects the grading of the inputs."""
    if not result or not all(inputs):
        return
    if op == "reduce":
        expected = set(inputs[0].degrees())
    elif not all(a.is_homogeneous() for a in inputs):
        return
    elif op == "mul":
        expected = {sum(a.degree() for a in inputs)}
    else:
        expected = {a.degree() for a in inputs}
    if not set(result.degrees()) <= expected:
        raise InvariantViolation(
            f"{op} of degrees {[a.degrees() for a in inputs]} produced degrees {result.degrees()}"
        )


def vp_arith(a: VPolynomial, b: Union[VPolynomial, Scalar], op: Literal["add", "mul", "scalar-mul"]) -> VPolynomial:
    if op == "add":
        if not isinstance(b, VPolynomial):
            raise ConfigurationError("add expects two polynomials")
        result = a + b
    elif op == "mul":
        if not isinstance(b, VPolynomial):
            raise ConfigurationError("mul expects two polynomials")
        result = a * b
    elif op == "scalar-mul":
        if isinstance(b, VPolynomial):
            raise ConfigurationError("scalar-mul expects a scalar")
        return a.scale(b)
    else:
        raise ConfigurationError(f"unknown operation {op!r}")
    if logger.isEnabledFor(logging.DEBUG):
        _check_degree_bookkeeping(op, result, a, b)
    return result


def vp_reduce(a: VPolynomial, j: int) -> VPolynomial:
    """
    Reduce modulo I_j = (v_0, ..., v_{j-1}).

    Terms containing some v_i with i < j are deleted. Over Z/p^N with j >= 1
    the scalar p = v_0 lies in the ideal too, so the result is returned over
    F_p (the quotient ring), keeping the generator range.
    """
    scalars = a.scalars
    if j >= 1 and scalars.kind == "integers_mod":
        scalars = ScalarRing.prime_field(a.scalars.p)
    kept: Dict[VKey, Scalar] = {}
    for key, value in a.raw_terms().items():
        if key and key[0][0] < j:
            continue
        kept[key] = scalars.reduce_from(value, a.scalars) if scalars is not a.scalars else value
    result = VPolynomial._raw(scalars, a.lo, a.hi, poly_clean(kept, scalars))
    if logger.isEnabledFor(logging.DEBUG):
        _check_degree_bookkeeping("reduce", result, a)
    return result


def vp_split_top(a: VPolynomial) -> List[Tuple[int, VPolynomial]]:
    """
    Partition terms by the largest v-index they contain.

    The part for index k >= 1 is returned divided by v_k. The v-free part, if
    any, is reported under k = 0 undivided (it is the p-multiple part).
    """
    buckets: Dict[int, Dict[VKey, Scalar]] = {}
    for key, value in a.raw_terms().items():
        top = vkey_top(key)
        if top == 0:
            buckets.setdefault(0, {})[key] = value
            continue
        reduced = vkey_divide(key, top)
        assert vkey_mul(reduced, vkey_generator(top)) == key
        buckets.setdefault(top, {})[reduced] = value
    return [(k, VPolynomial._raw(a.scalars, a.lo, a.hi, buckets[k])) for k in sorted(buckets)]


def vp_parse(text: str, scalars: ScalarRing, lo: int, hi: int) -> VPolynomial:
    """Inverse of ``VPolynomial.render``."""
    text = text.strip()
    terms: Dict[VKey, Scalar] = {}
    if text == "0":
        return VPolynomial.zero(scalars, lo, hi)
    for chunk in text.split(" + "):
        coefficient: Scalar = 1
        exponents: Dict[int, int] = {}
        for factor in chunk.strip().split("*"):
            factor = factor.strip()
            if factor.startswith("v"):
                name, _, power = factor.partition("^")
                index = int(name[1:])
                exponents[index] = exponents.get(index, 0) + (int(power) if power else 1)
            else:
                coefficient = coefficient * scalars.parse(factor)
        key = tuple(sorted(exponents.items()))
        terms[key] = terms.get(key, 0) + coefficient
    return VPolynomial(scalars, lo, hi, terms)


def coefficient_ring(p: int, m: int, n: int, N: int) -> Tuple[ScalarRing, int, int]:
    """Scalars and generator range of E* = BP<m,n>*: F_p[v_m..v_n], or Z/p^N[v_1..v_n] when m = 0."""
    if not 0 <= m <= n:
        raise ConfigurationError(f"need 0 <= m <= n, got m={m}, n={n}")
    if m == 0:
        return ScalarRing.integers_mod(p, N), 1, n
    return ScalarRing.prime_field(p), m, n
