"""
Mod-p cohomology of BV_k and the Dickson-invariant identities.

H*(BV_k; F_p) = Lambda[a_0..a_{k-1}] (x) F_p[x_0..x_{k-1}] with |a_i| = 1 and
|x_i| = 2. A term is keyed by ``(mask, xexp)``: bit i of ``mask`` marks a_i and
the exterior part is always written in ascending order, so
a_j a_i = -a_i a_j is applied while multiplying and a_i^2 = 0 holds at every
prime, p = 2 included.
"""

from __future__ import annotations

import itertools
import logging
import random
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from sympy import isprime

from .errors import ConfigurationError, InvariantViolation, PreconditionError
from .models import FAIL, PASS, CheckOutcome
from .series import TruncatedSeries

logger = logging.getLogger(__name__)

TermKey = Tuple[int, Tuple[int, ...]]
Matrix = Sequence[Sequence[int]]


def _bits(mask: int) -> List[int]:
    return [i for i in range(mask.bit_length()) if mask >> i & 1]


def _merge_sign(left: int, right: int) -> int:
    """Sign of a_left * a_right after sorting: (-1)^(pairs i in left, j in right with i > j)."""
    inversions = 0
    for j in _bits(right):
        inversions += bin(left >> (j + 1)).count("1")
    return -1 if inversions % 2 else 1


# ========== 1. SignedPoly ==========


class SignedPoly:
    __slots__ = ("p", "k", "_terms")

    def __init__(self, p: int, k: int, terms: Optional[Mapping[TermKey, int]] = None) -> None:
        if not isprime(p):
            raise ConfigurationError(f"p must be prime, got {p}")
        self.p = p
        self.k = k
        clean: Dict[TermKey, int] = {}
        for (mask, xexp), value in (terms or {}).items():
            xexp = tuple(xexp)
            if len(xexp) != k or mask >> k:
                raise ConfigurationError(f"term ({mask}, {xexp}) does not fit k={k}")
            value %= p
            if value:
                clean[(mask, xexp)] = (clean.get((mask, xexp), 0) + value) % p
        self._terms = {key: value for key, value in clean.items() if value}

    # --- constructors ---

    @classmethod
    def zero(cls, p: int, k: int) -> "SignedPoly":
        return cls(p, k)

    @classmethod
    def one(cls, p: int, k: int) -> "SignedPoly":
        return cls(p, k, {(0, (0,) * k): 1})

    @classmethod
    def a(cls, p: int, k: int, i: int) -> "SignedPoly":
        return cls(p, k, {(1 << i, (0,) * k): 1})

    @classmethod
    def x(cls, p: int, k: int, i: int, power: int = 1) -> "SignedPoly":
        exps = [0] * k
        exps[i] = power
        return cls(p, k, {(0, tuple(exps)): 1})

    # --- inspection ---

    def terms(self) -> Dict[TermKey, int]:
        return dict(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self) -> bool:
        return bool(self._terms)

    def degrees(self) -> List[int]:
        return sorted({bin(mask).count("1") + 2 * sum(xexp) for mask, xexp in self._terms})

    def _check(self, other: "SignedPoly") -> None:
        if (self.p, self.k) != (other.p, other.k):
            raise ConfigurationError(f"SignedPoly over (p={self.p}, k={self.k}) vs (p={other.p}, k={other.k})")

    # --- arithmetic ---

    def __add__(self, other: "SignedPoly") -> "SignedPoly":
        self._check(other)
        merged = dict(self._terms)
        for key, value in other._terms.items():
            merged[key] = merged.get(key, 0) + value
        return SignedPoly(self.p, self.k, merged)

    def __neg__(self) -> "SignedPoly":
        return self.scale(-1)

    def __sub__(self, other: "SignedPoly") -> "SignedPoly":
        return self + (-other)

    def scale(self, factor: int) -> "SignedPoly":
        return SignedPoly(self.p, self.k, {key: value * factor for key, value in self._terms.items()})

    def __mul__(self, other: "SignedPoly") -> "SignedPoly":
        self._check(other)
        out: Dict[TermKey, int] = {}
        for (ma, xa), ca in self._terms.items():
            for (mb, xb), cb in other._terms.items():
                if ma & mb:
                    continue
                key = (ma | mb, tuple(i + j for i, j in zip(xa, xb)))
                out[key] = out.get(key, 0) + _merge_sign(ma, mb) * ca * cb
        return SignedPoly(self.p, self.k, out)

    def power(self, exponent: int) -> "SignedPoly":
        result = SignedPoly.one(self.p, self.k)
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            exponent >>= 1
            if exponent:
                base = base * base
        return result

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SignedPoly):
            return NotImplemented
        return (self.p, self.k) == (other.p, other.k) and self._terms == other._terms

    def __hash__(self) -> int:
        return hash((self.p, self.k, frozenset(self._terms.items())))

    # --- text ---

    def _sort_key(self, key: TermKey) -> Tuple[int, Tuple[int, ...], Tuple[int, ...]]:
        mask, xexp = key
        degree = bin(mask).count("1") + 2 * sum(xexp)
        return (degree, tuple(_bits(mask)), xexp)

    def render(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for key in sorted(self._terms, key=self._sort_key):
            mask, xexp = key
            factors = [f"a{i}" for i in _bits(mask)]
            factors += [f"x{i}" if e == 1 else f"x{i}^{e}" for i, e in enumerate(xexp) if e]
            value = self._terms[key]
            if not factors:
                parts.append(str(value))
            elif value == 1:
                parts.append("*".join(factors))
            else:
                parts.append(f"{value}*" + "*".join(factors))
        return " + ".join(parts)

    def __str__(self) -> str:
        return self.render()

    def __repr__(self) -> str:
        return f"SignedPoly({self.render()!r}, p={self.p}, k={self.k})"


def dickson_parse(text: str, p: int, k: int) -> SignedPoly:
    """Inverse of ``SignedPoly.render``; exterior factors may appear in any order (signs applied)."""
    text = text.strip()
    total = SignedPoly.zero(p, k)
    if text == "0":
        return total
    for chunk in text.split(" + "):
        term = SignedPoly.one(p, k)
        for factor in chunk.strip().split("*"):
            factor = factor.strip()
            if factor.startswith("a"):
                term = term * SignedPoly.a(p, k, int(factor[1:]))
            elif factor.startswith("x"):
                name, _, power = factor.partition("^")
                term = term * SignedPoly.x(p, k, int(name[1:]), int(power) if power else 1)
            else:
                term = term.scale(int(factor))
        total = total + term
    return total


# ========== 2. Operations ==========


def q_op(i: int, e: SignedPoly) -> SignedPoly:
    """Milnor's Q_i: the derivation with Q_i(a_j) = x_j^{p^i} and Q_i(x_j) = 0."""
    if i < 0:
        raise ConfigurationError(f"Q_i needs i >= 0, got {i}")
    power = e.p ** i
    out: Dict[TermKey, int] = {}
    for (mask, xexp), value in e.terms().items():
        for r, s in enumerate(_bits(mask)):
            new_x = list(xexp)
            new_x[s] += power
            key = (mask & ~(1 << s), tuple(new_x))
            out[key] = out.get(key, 0) + (-1) ** r * value
    return SignedPoly(e.p, e.k, out)


def frobenius_twist(e: SignedPoly) -> SignedPoly:
    """The ring map fixing a_i and sending x_i to x_i^p."""
    return SignedPoly(
        e.p, e.k, {(mask, tuple(e.p * v for v in xexp)): value for (mask, xexp), value in e.terms().items()}
    )


def gl_act(g: Matrix, e: SignedPoly) -> SignedPoly:
    """Substitute a_j -> sum_i g[i][j] a_i and x_j -> sum_i g[i][j] x_i."""
    p, k = e.p, e.k
    if len(g) != k or any(len(row) != k for row in g):
        raise ConfigurationError(f"matrix must be {k}x{k}")
    a_images = [SignedPoly(p, k, {(1 << i, (0,) * k): g[i][j] for i in range(k)}) for j in range(k)]
    x_images = [
        SignedPoly(p, k, {(0, tuple(int(r == i) for r in range(k))): g[i][j] for i in range(k)}) for j in range(k)
    ]
    x_powers: Dict[Tuple[int, int], SignedPoly] = {}

    def x_power(j: int, e_j: int) -> SignedPoly:
        if (j, e_j) not in x_powers:
            x_powers[(j, e_j)] = x_images[j].power(e_j)
        return x_powers[(j, e_j)]

    total = SignedPoly.zero(p, k)
    for (mask, xexp), value in e.terms().items():
        term = SignedPoly.one(p, k).scale(value)
        for j in _bits(mask):
            term = term * a_images[j]
        for j, e_j in enumerate(xexp):
            if e_j:
                term = term * x_power(j, e_j)
        total = total + term
    return total


def det_mod_p(g: Matrix, p: int) -> int:
    size = len(g)
    total = 0
    for sigma in itertools.permutations(range(size)):
        product = permutation_sign(sigma)
        for row, col in enumerate(sigma):
            product *= g[row][col]
        total += product
    return total % p


def permutation_sign(sigma: Sequence[int]) -> int:
    inversions = sum(1 for i in range(len(sigma)) for j in range(i + 1, len(sigma)) if sigma[i] > sigma[j])
    return -1 if inversions % 2 else 1


def random_invertible(p: int, k: int, rng: random.Random) -> List[List[int]]:
    """A uniformly sampled element of GL_k(F_p), by rejection."""
    while True:
        g = [[rng.randrange(p) for _ in range(k)] for _ in range(k)]
        if det_mod_p(g, p):
            return g


# ========== 3. Dickson invariants ==========


def last_nonzero_one_vectors(p: int, k: int) -> List[Tuple[int, ...]]:
    """Vectors of F_p^k whose last nonzero entry is 1, in lexicographic order."""
    found = []
    for vector in itertools.product(range(p), repeat=k):
        nonzero = [c for c in vector if c]
        if nonzero and nonzero[-1] == 1:
            found.append(vector)
    return found


def beta(p: int, k: int) -> SignedPoly:
    """Product of the linear forms sum_i lambda_i x_i over vectors with last nonzero entry 1."""
    if k < 1:
        raise ConfigurationError("beta needs k >= 1")
    result = SignedPoly.one(p, k)
    for vector in last_nonzero_one_vectors(p, k):
        form = SignedPoly.zero(p, k)
        for i, c in enumerate(vector):
            if c:
                form = form + SignedPoly.x(p, k, i).scale(c)
        result = result * form
    return result


def beta_prime(p: int, k: int) -> SignedPoly:
    """det(x_i^{p^j}) by Leibniz expansion."""
    if k < 1:
        raise ConfigurationError("beta_prime needs k >= 1")
    total = SignedPoly.zero(p, k)
    for sigma in itertools.permutations(range(k)):
        exps = [0] * k
        for i, j in enumerate(sigma):
            exps[i] += p ** j
        total = total + SignedPoly(p, k, {(0, tuple(exps)): permutation_sign(sigma)})
    return total


def beta_sec(p: int, m: int, k: int) -> SignedPoly:
    """Q_{m+k-1} ... Q_m (a_0 a_1 ... a_{k-1}), applying Q_m first."""
    if k < 1 or m < 0:
        raise ConfigurationError(f"beta_sec needs k >= 1 and m >= 0, got k={k}, m={m}")
    element = SignedPoly(p, k, {((1 << k) - 1, (0,) * k): 1})
    for i in range(m, m + k):
        element = q_op(i, element)
    return element


def reduce_alpha_to_cohomology(series: TruncatedSeries) -> SignedPoly:
    """A v-free series over F_p in x0..x_{k-1} (alpha mod I_{n+1}) as an element of H*(BV_k)."""
    ring = series.ring
    if ring.scalars.kind != "prime_field":
        raise ConfigurationError("reduce the series to F_p coefficients first")
    if list(ring.variables) != [f"x{i}" for i in range(ring.nvars)]:
        raise ConfigurationError(f"expected variables x0..x{ring.nvars - 1}, got {ring.variables}")
    terms: Dict[TermKey, int] = {}
    for xexp, vkey, scalar in series.flat_terms():
        if vkey:
            raise InvariantViolation(f"series still carries v-generators: {series.render()}")
        terms[(0, xexp)] = int(scalar)
    return SignedPoly(ring.scalars.p, ring.nvars, terms)


# ========== 4. Identity checks ==========


def _outcome(name: str, holds: bool, detail: str) -> CheckOutcome:
    return CheckOutcome(name, PASS if holds else FAIL, "" if holds else detail)


def check_dickson_identities(p: int, k: int, m: int) -> List[CheckOutcome]:
    """beta''_m = (beta')^{p^m} = beta^{p^m}."""
    b = beta(p, k)
    b_prime = beta_prime(p, k)
    b_sec = beta_sec(p, m, k)
    twisted = b_prime.power(p ** m)
    target = b.power(p ** m)
    return [
        _outcome(f"beta=beta' (p={p}, k={k})", b == b_prime, f"beta={b.render()}; beta'={b_prime.render()}"),
        _outcome(
            f"beta''_{m}=(beta')^{p ** m} (p={p}, k={k})",
            b_sec == twisted,
            f"beta''={b_sec.render()}; (beta')^q={twisted.render()}",
        ),
        _outcome(
            f"beta''_{m}=beta^{p ** m} (p={p}, k={k})",
            b_sec == target,
            f"beta''={b_sec.render()}; beta^q={target.render()}",
        ),
    ]


def random_signed_poly(p: int, k: int, rng: random.Random, terms: int = 4, max_exponent: int = 3) -> SignedPoly:
    total = SignedPoly.zero(p, k)
    for _ in range(terms):
        mask = rng.randrange(1 << k)
        xexp = tuple(rng.randrange(max_exponent + 1) for _ in range(k))
        total = total + SignedPoly(p, k, {(mask, xexp): rng.randrange(1, p)})
    return total


def check_operation_laws(p: int, k: int, rng: random.Random, samples: int = 10, max_q: int = 2) -> List[CheckOutcome]:
    """Q_i Q_i = 0, the Koszul derivation law and F Q_i = Q_{i+1} F on random inputs."""
    outcomes = []
    for i in range(max_q + 1):
        square_failures: List[str] = []
        derivation_failures: List[str] = []
        twist_failures: List[str] = []
        for _ in range(samples):
            e = random_signed_poly(p, k, rng)
            f = random_signed_poly(p, k, rng)
            if q_op(i, q_op(i, e)):
                square_failures.append(e.render())
            left = q_op(i, e * f)
            right = SignedPoly.zero(p, k)
            for (mask, xexp), value in e.terms().items():
                piece = SignedPoly(p, k, {(mask, xexp): value})
                sign = -1 if bin(mask).count("1") % 2 else 1
                right = right + q_op(i, piece) * f + (piece * q_op(i, f)).scale(sign)
            if left != right:
                derivation_failures.append(f"{e.render()} | {f.render()}")
            if frobenius_twist(q_op(i, e)) != q_op(i + 1, frobenius_twist(e)):
                twist_failures.append(e.render())
        outcomes.append(_outcome(f"Q_{i}^2=0 (p={p}, k={k})", not square_failures, "; ".join(square_failures[:1])))
        outcomes.append(
            _outcome(f"Q_{i} derivation (p={p}, k={k})", not derivation_failures, "; ".join(derivation_failures[:1]))
        )
        outcomes.append(
            _outcome(f"F Q_{i} = Q_{i + 1} F (p={p}, k={k})", not twist_failures, "; ".join(twist_failures[:1]))
        )
    return outcomes


def check_det_character(p: int, k: int, rng: random.Random, samples: int = 20) -> List[CheckOutcome]:
    """g* beta' = det(g) beta' and g*(a_0 ... a_{k-1}) = det(g) a_0 ... a_{k-1}."""
    b_prime = beta_prime(p, k)
    top = SignedPoly(p, k, {((1 << k) - 1, (0,) * k): 1})
    beta_failures: List[str] = []
    top_failures: List[str] = []
    for _ in range(samples):
        g = random_invertible(p, k, rng)
        det = det_character(g, p)
        if gl_act(g, b_prime) != b_prime.scale(det):
            beta_failures.append(str(g))
        if gl_act(g, top) != top.scale(det):
            top_failures.append(str(g))
    return [
        _outcome(f"g*beta'=det(g)beta' (p={p}, k={k})", not beta_failures, f"fails for g={beta_failures[:1]}"),
        _outcome(f"g*(a_0..a_{k - 1})=det(g)(a_0..a_{k - 1}) (p={p}, k={k})", not top_failures, f"fails for g={top_failures[:1]}"),
    ]


def det_character(g: Matrix, p: int) -> int:
    det = det_mod_p(g, p)
    if not det:
        raise PreconditionError(f"matrix {g} is singular mod {p}")
    return det


def check_all(p: int, k: int, m: int, seed: int = 0, samples: int = 20) -> List[CheckOutcome]:
    rng = random.Random(seed)
    outcomes = check_dickson_identities(p, k, m)
    outcomes += check_operation_laws(p, k, rng, samples=max(samples // 2, 1), max_q=m + k)
    outcomes += check_det_character(p, k, rng, samples=samples)
    logger.info("dickson checks (p=%d, k=%d, m=%d): %d outcomes", p, k, m, len(outcomes))
    return outcomes

