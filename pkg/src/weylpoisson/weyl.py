"""Weyl algebra ``A_{n,R}`` in PBW normal form.

Generators are indexed ``0 .. 2n-1`` (``x̂_1 .. x̂_{2n}`` in one-based
notation) with ``[x̂_i, x̂_j] = omega(i, j)``, so ``x̂_i`` behaves like the
coordinate ``x_i`` and ``x̂_{n+i}`` like ``d/dx_i``.  An element is a sparse
map from exponent tuples ``alpha`` to nonzero coefficients, meaning
``sum c_alpha x̂_1^alpha_1 ... x̂_2n^alpha_2n``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from math import comb, factorial
from typing import Iterable, Mapping, Optional, Sequence

from .errors import IndexMismatch, RelationCheckFailed, RingMismatch
from .rings import Ring

NEG_INF = float("-inf")

__all__ = [
    "NEG_INF", "omega", "SymplecticForm", "WeylAlgebra", "WeylElement", "WeylEndo",
    "EndoReport", "multiply", "commutator", "bernstein_degree", "apply_endo",
    "verify_endo", "ad_power", "ad_nilpotency_order", "power", "compose_endos",
]


def omega(n: int, i: int, j: int) -> int:
    """Standard symplectic form, zero-based: ``delta(i, n+j) - delta(n+i, j)``."""
    return (i == n + j) - (n + i == j)


@dataclass(frozen=True)
class SymplecticForm:
    n: int

    def __call__(self, i: int, j: int) -> int:
        return omega(self.n, i, j)

    def matrix(self) -> list[list[int]]:
        m = 2 * self.n
        return [[omega(self.n, i, j) for j in range(m)] for i in range(m)]


@lru_cache(maxsize=None)
def _contraction(a: int, b: int) -> tuple[tuple[int, int], ...]:
    """``d^a x^b = sum_k C(a,k) C(b,k) k! x^(b-k) d^(a-k)``; returns ``(k, weight)``."""
    return tuple((k, comb(a, k) * comb(b, k) * factorial(k)) for k in range(min(a, b) + 1))


def _mul_terms(n: int, ta: Mapping, tb: Mapping, char: int) -> dict:
    """Raw (unnormalized) product of two term maps.

    Left factor ``x^A d^B`` times right ``x^C d^D``: only the middle
    ``d^B x^C`` needs reordering, and it splits into independent conjugate
    pairs because distinct pairs commute.
    """
    out: dict = {}
    get = out.get
    m = 2 * n
    pairs = range(n)
    for ea, ca in ta.items():
        for eb, cb in tb.items():
            c = ca * cb
            opts = []
            for i in pairs:
                if ea[n + i] and eb[i]:
                    opts.append((i, _contraction(ea[n + i], eb[i])))
            base = tuple(ea[k] + eb[k] for k in range(m))
            if not opts:
                out[base] = get(base, 0) + c
                continue
            for choice in itertools.product(*(o[1] for o in opts)):
                w = 1
                e = list(base)
                for (i, _), (k, weight) in zip(opts, choice):
                    w *= weight
                    e[i] -= k
                    e[n + i] -= k
                if char and w % char == 0:
                    continue
                key = tuple(e)
                out[key] = get(key, 0) + c * w
    return out


class WeylAlgebra:
    """Parent object for ``A_{n,R}``."""

    def __init__(self, n: int, ring: Ring):
        if n < 1:
            raise ValueError("n must be >= 1")
        self.n = n
        self.ring = ring

    def __eq__(self, other):
        return isinstance(other, WeylAlgebra) and self.n == other.n and self.ring == other.ring

    def __hash__(self):
        return hash((self.n, self.ring))

    def __repr__(self):
        return f"WeylAlgebra({self.n}, {self.ring})"

    @property
    def ngens(self) -> int:
        return 2 * self.n

    def element(self, terms: Mapping | Iterable = ()) -> "WeylElement":
        """Build an element from ``{exponent: coeff}`` (coefficients are coerced)."""
        items = terms.items() if isinstance(terms, Mapping) else terms
        ring = self.ring
        out: dict = {}
        for e, c in items:
            e = tuple(int(x) for x in e)
            if len(e) != 2 * self.n or min(e, default=0) < 0:
                raise IndexMismatch(f"bad exponent {e} for n={self.n}")
            out[e] = out.get(e, 0) + ring.coerce(c)
        return WeylElement._from_raw(self, out)

    def zero(self) -> "WeylElement":
        return WeylElement(self, {})

    def one(self) -> "WeylElement":
        return self.scalar(1)

    def scalar(self, c) -> "WeylElement":
        return self.element({(0,) * (2 * self.n): c})

    def gen(self, i: int) -> "WeylElement":
        e = [0] * (2 * self.n)
        e[i] = 1
        return WeylElement(self, {tuple(e): self.ring.one})

    def gens(self) -> tuple["WeylElement", ...]:
        return tuple(self.gen(i) for i in range(2 * self.n))

    def monomial(self, exps: Sequence[int], c=1) -> "WeylElement":
        return self.element({tuple(exps): c})

    def change_ring(self, ring: Ring) -> "WeylAlgebra":
        return WeylAlgebra(self.n, ring)


class WeylElement:
    """Sparse PBW-normal-form element; treat as immutable."""

    __slots__ = ("algebra", "terms")

    def __init__(self, algebra: WeylAlgebra, terms: dict):
        self.algebra = algebra
        self.terms = terms

    @classmethod
    def _from_raw(cls, algebra, raw: Mapping) -> "WeylElement":
        ring = algebra.ring
        norm = ring.normalize
        terms = {}
        for e, c in raw.items():
            c = norm(c)
            if c:
                terms[e] = c
        return cls(algebra, terms)

    @property
    def n(self) -> int:
        return self.algebra.n

    @property
    def ring(self) -> Ring:
        return self.algebra.ring

    def _check(self, other: "WeylElement"):
        if not isinstance(other, WeylElement):
            raise TypeError(f"expected WeylElement, got {type(other).__name__}")
        if other.algebra.n != self.algebra.n:
            raise IndexMismatch(f"n={self.n} vs n={other.n}")
        if other.algebra.ring != self.algebra.ring:
            raise RingMismatch(f"{self.ring} vs {other.ring}")

    def _lift(self, other):
        if isinstance(other, WeylElement):
            self._check(other)
            return other
        return self.algebra.scalar(other)

    def __add__(self, other):
        other = self._lift(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, 0) + c
        return WeylElement._from_raw(self.algebra, out)

    __radd__ = __add__

    def __neg__(self):
        return WeylElement._from_raw(self.algebra, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, WeylElement):
            return multiply(self, other)
        c = self.ring.coerce(other)
        return WeylElement._from_raw(self.algebra, {e: v * c for e, v in self.terms.items()})

    def __rmul__(self, other):
        c = self.ring.coerce(other)
        return WeylElement._from_raw(self.algebra, {e: c * v for e, v in self.terms.items()})

    def __pow__(self, k: int):
        return power(self, k)

    def __eq__(self, other):
        if isinstance(other, WeylElement):
            return self.algebra == other.algebra and self.terms == other.terms
        if isinstance(other, int):
            return self == self.algebra.scalar(other)
        return NotImplemented

    def __hash__(self):
        return hash((self.algebra, frozenset(self.terms.items())))

    def __bool__(self):
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def degree(self):
        return bernstein_degree(self)

    def constant_coefficient(self):
        return self.terms.get((0,) * (2 * self.n), self.ring.zero)

    def change_ring(self, ring: Ring) -> "WeylElement":
        src = self.ring
        return WeylElement._from_raw(
            self.algebra.change_ring(ring), {e: src.reduce(c, ring) for e, c in self.terms.items()}
        )

    def map_coefficients(self, fn) -> "WeylElement":
        return WeylElement._from_raw(self.algebra, {e: fn(c) for e, c in self.terms.items()})

    def sorted_terms(self) -> list:
        return sorted(self.terms.items())

    def __repr__(self):
        return f"WeylElement({self})"

    def __str__(self):
        if not self.terms:
            return "0"
        m = 2 * self.n
        parts = []
        for e, c in sorted(self.terms.items(), key=lambda t: (-sum(t[0]), t[0])):
            mono = "*".join(
                (f"X{i + 1}" if e[i] == 1 else f"X{i + 1}^{e[i]}") for i in range(m) if e[i]
            )
            cs = self.ring.format(c)
            if not mono:
                parts.append(cs)
            elif cs == "1":
                parts.append(mono)
            else:
                parts.append(f"{cs}*{mono}")
        return " + ".join(parts)


def multiply(a: WeylElement, b: WeylElement) -> WeylElement:
    a._check(b)
    raw = _mul_terms(a.n, a.terms, b.terms, a.ring.characteristic)
    return WeylElement._from_raw(a.algebra, raw)


def commutator(a: WeylElement, b: WeylElement) -> WeylElement:
    return multiply(a, b) - multiply(b, a)


def bernstein_degree(a: WeylElement):
    """Max total degree of a stored term; ``NEG_INF`` for zero."""
    if not a.terms:
        return NEG_INF
    return max(sum(e) for e in a.terms)


def power(a: WeylElement, k: int) -> WeylElement:
    """``a**k`` by repeated left-to-right multiplication."""
    if k < 0:
        raise ValueError("negative power")
    result = a.algebra.one()
    for _ in range(k):
        result = multiply(result, a)
    return result


def ad_power(a: WeylElement, u: WeylElement, k: int) -> WeylElement:
    """``(ad a)^k (u)``."""
    for _ in range(k):
        if not u.terms:
            break
        u = commutator(a, u)
    return u


def ad_nilpotency_order(a: WeylElement, u: WeylElement, cap: int = 64) -> Optional[int]:
    """Smallest ``k <= cap`` with ``(ad a)^k (u) = 0``, else ``None``."""
    for k in range(cap + 1):
        if not u.terms:
            return k
        u = commutator(a, u)
    return None


@dataclass
class EndoReport:
    ok: bool
    violations: list = field(default_factory=list)  # (i, j, defect) one-based
    inverse_checked: bool = False
    inverse_ok: Optional[bool] = None
    inverse_failures: list = field(default_factory=list)  # (order, index, image) one-based

    def __bool__(self):
        return self.ok


class WeylEndo:
    """Endomorphism of ``A_{n,R}`` given by generator images.

    The relation check runs at construction unless ``trusted`` is set
    (used only where the result is relation-preserving by construction,
    e.g. compositions of verified endomorphisms).
    """

    def __init__(
        self,
        images: Sequence[WeylElement],
        claimed_inverse: Optional[Sequence[WeylElement]] = None,
        *,
        trusted: bool = False,
    ):
        images = tuple(images)
        if not images:
            raise IndexMismatch("no images")
        algebra = images[0].algebra
        if len(images) != algebra.ngens:
            raise IndexMismatch(f"expected {algebra.ngens} images, got {len(images)}")
        for im in images:
            images[0]._check(im)
        if claimed_inverse is not None:
            claimed_inverse = tuple(claimed_inverse)
            if len(claimed_inverse) != len(images):
                raise IndexMismatch("claimed inverse has the wrong length")
            for im in claimed_inverse:
                images[0]._check(im)
        self.algebra = algebra
        self.images = images
        self.claimed_inverse = claimed_inverse
        if trusted:
            self.report = EndoReport(ok=True)
        else:
            self.report = verify_endo(self)
        self.verified = self.report.ok

    @property
    def n(self):
        return self.algebra.n

    @property
    def ring(self):
        return self.algebra.ring

    @classmethod
    def identity(cls, algebra: WeylAlgebra) -> "WeylEndo":
        gens = algebra.gens()
        return cls(gens, gens, trusted=True)

    def __call__(self, a: WeylElement) -> WeylElement:
        return apply_endo(self, a)

    def degree(self, include_inverse: bool = True):
        degs = [bernstein_degree(im) for im in self.images]
        if include_inverse and self.claimed_inverse is not None:
            degs += [bernstein_degree(im) for im in self.claimed_inverse]
        return max(degs)

    def is_identity(self) -> bool:
        return all(im == g for im, g in zip(self.images, self.algebra.gens()))

    def first_moved_generator(self) -> Optional[int]:
        """One-based index of the first generator not fixed, or ``None``."""
        for i, (im, g) in enumerate(zip(self.images, self.algebra.gens())):
            if im != g:
                return i + 1
        return None

    def change_ring(self, ring: Ring, verify: bool = True) -> "WeylEndo":
        inv = None
        if self.claimed_inverse is not None:
            inv = [im.change_ring(ring) for im in self.claimed_inverse]
        return WeylEndo(
            [im.change_ring(ring) for im in self.images], inv, trusted=not verify and self.verified
        )

    def inverse(self) -> "WeylEndo":
        if self.claimed_inverse is None:
            raise ValueError("no claimed inverse")
        return WeylEndo(self.claimed_inverse, self.images, trusted=self.verified)

    def __eq__(self, other):
        return isinstance(other, WeylEndo) and self.images == other.images

    def __repr__(self):
        return "WeylEndo(" + ", ".join(f"X{i + 1} -> {im}" for i, im in enumerate(self.images)) + ")"


def _substitute(images: Sequence[WeylElement], a: WeylElement) -> WeylElement:
    algebra = images[0].algebra
    cache: dict = {}

    def pw(i, k):
        key = (i, k)
        if key not in cache:
            cache[key] = images[i] if k == 1 else multiply(pw(i, k - 1), images[i])
        return cache[key]

    acc: dict = {}
    for e, c in a.terms.items():
        term = None
        for i, k in enumerate(e):
            if k:
                term = pw(i, k) if term is None else multiply(term, pw(i, k))
        if term is None:
            term = algebra.one()
        for te, tc in term.terms.items():
            acc[te] = acc.get(te, 0) + c * tc
    return WeylElement._from_raw(algebra, acc)


def apply_endo(f: WeylEndo, a: WeylElement) -> WeylElement:
    """Substitute ``f``'s images into the PBW expansion of ``a``."""
    if not f.verified:
        raise RelationCheckFailed("endomorphism failed the relation check")
    f.images[0]._check(a)
    return _substitute(f.images, a)


def compose_endos(f: WeylEndo, g: WeylEndo) -> WeylEndo:
    """Endomorphism "apply ``f`` then ``g``": images of ``f`` evaluated at those of ``g``.

    ``apply_endo(compose_endos(f, g), a) == apply_endo(g, apply_endo(f, a))``.
    """
    images = [apply_endo(g, im) for im in f.images]
    inv = None
    if f.claimed_inverse is not None and g.claimed_inverse is not None:
        inv = [_substitute(f.claimed_inverse, im) for im in g.claimed_inverse]
    return WeylEndo(images, inv, trusted=f.verified and g.verified)


def verify_endo(f: WeylEndo) -> EndoReport:
    """Check ``[f(x̂_i), f(x̂_j)] = omega_ij`` and, if present, the claimed inverse."""
    n = f.algebra.n
    m = 2 * n
    one = f.algebra.one()
    violations = []
    for i in range(m):
        for j in range(i + 1, m):
            defect = commutator(f.images[i], f.images[j]) - one * omega(n, i, j)
            if defect.terms:
                violations.append((i + 1, j + 1, defect))
    report = EndoReport(ok=not violations, violations=violations)
    if f.claimed_inverse is not None:
        report.inverse_checked = True
        gens = f.algebra.gens()
        failures = []
        for order, outer, inner in (("inverse_after", f.images, f.claimed_inverse),
                                     ("inverse_before", f.claimed_inverse, f.images)):
            for i, im in enumerate(inner):
                got = _substitute(outer, im)
                if got != gens[i]:
                    failures.append((order, i + 1, got))
        report.inverse_failures = failures
        report.inverse_ok = not failures
        report.ok = report.ok and not failures
    return report
