"""Commutative polynomials, the Poisson algebra ``P_{n,R}`` and polynomial maps.

The same sparse polynomial type serves for ``P_n`` (variables
``x_1..x_2n``), for the center of ``A_n`` in characteristic ``p``
(variables ``y_1..y_2n``), for transvection potentials ``F(x_1..x_n)``
and for base rings ``F_p[s_1..s_k]`` of Azumaya presentations.  Variable
names are display-only: equality compares the coefficient ring, the
number of variables and the terms.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

from .errors import IndexMismatch, NonInvertibleDenominator, NotClosed, RingMismatch
from .rings import Ring
from .weyl import NEG_INF, omega

__all__ = [
    "PolynomialRing", "Poly", "PolyMap", "PolyOneForm", "SymplectoReport",
    "poisson_bracket", "compose_maps", "check_symplecto", "pullback_one_form",
    "primitive_of_exact", "exterior_derivative", "is_closed", "poisson_ring",
]


class PolynomialRing:
    def __init__(self, ring: Ring, names: Sequence[str]):
        self.ring = ring
        self.names = tuple(names)
        self.nvars = len(self.names)

    def __eq__(self, other):
        return (
            isinstance(other, PolynomialRing)
            and self.ring == other.ring
            and self.nvars == other.nvars
        )

    def __hash__(self):
        return hash((self.ring, self.nvars))

    def __repr__(self):
        return f"{self.ring}[{', '.join(self.names)}]"

    def element(self, terms: Mapping | Iterable = ()) -> "Poly":
        items = terms.items() if isinstance(terms, Mapping) else terms
        out: dict = {}
        for e, c in items:
            e = tuple(int(x) for x in e)
            if len(e) != self.nvars or min(e, default=0) < 0:
                raise IndexMismatch(f"bad exponent {e} for {self.nvars} variables")
            out[e] = out.get(e, 0) + self.ring.coerce(c)
        return Poly._from_raw(self, out)

    def zero(self) -> "Poly":
        return Poly(self, {})

    def one(self) -> "Poly":
        return self.constant(1)

    def constant(self, c) -> "Poly":
        return self.element({(0,) * self.nvars: c})

    def gen(self, i: int) -> "Poly":
        e = [0] * self.nvars
        e[i] = 1
        return Poly(self, {tuple(e): self.ring.one})

    def gens(self) -> tuple["Poly", ...]:
        return tuple(self.gen(i) for i in range(self.nvars))

    def change_ring(self, ring: Ring) -> "PolynomialRing":
        return PolynomialRing(ring, self.names)

    def renamed(self, names: Sequence[str]) -> "PolynomialRing":
        return PolynomialRing(self.ring, names)


def poisson_ring(n: int, ring: Ring, prefix: str = "x") -> PolynomialRing:
    return PolynomialRing(ring, [f"{prefix}{i + 1}" for i in range(2 * n)])


class Poly:
    __slots__ = ("parent", "terms")

    def __init__(self, parent: PolynomialRing, terms: dict):
        self.parent = parent
        self.terms = terms

    @classmethod
    def _from_raw(cls, parent, raw):
        norm = parent.ring.normalize
        terms = {}
        for e, c in raw.items():
            c = norm(c)
            if c:
                terms[e] = c
        return cls(parent, terms)

    @property
    def ring(self) -> Ring:
        return self.parent.ring

    @property
    def nvars(self) -> int:
        return self.parent.nvars

    def _check(self, other):
        if not isinstance(other, Poly):
            raise TypeError(f"expected Poly, got {type(other).__name__}")
        if other.parent.nvars != self.parent.nvars:
            raise IndexMismatch(f"{self.nvars} vs {other.nvars} variables")
        if other.parent.ring != self.parent.ring:
            raise RingMismatch(f"{self.ring} vs {other.ring}")

    def _lift(self, other):
        if isinstance(other, Poly):
            self._check(other)
            return other
        return self.parent.constant(other)

    def __add__(self, other):
        other = self._lift(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, 0) + c
        return Poly._from_raw(self.parent, out)

    __radd__ = __add__

    def __neg__(self):
        return Poly._from_raw(self.parent, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Poly):
            c = self.ring.coerce(other)
            return Poly._from_raw(self.parent, {e: v * c for e, v in self.terms.items()})
        self._check(other)
        out: dict = {}
        get = out.get
        for ea, ca in self.terms.items():
            for eb, cb in other.terms.items():
                e = tuple(x + y for x, y in zip(ea, eb))
                out[e] = get(e, 0) + ca * cb
        return Poly._from_raw(self.parent, out)

    def __rmul__(self, other):
        return self * other

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power")
        result, base = self.parent.one(), self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.parent == other.parent and self.terms == other.terms
        if isinstance(other, int):
            return self == self.parent.constant(other)
        return NotImplemented

    def __hash__(self):
        return hash((self.parent, frozenset(self.terms.items())))

    def __bool__(self):
        return bool(self.terms)

    def is_zero(self):
        return not self.terms

    def degree(self):
        if not self.terms:
            return NEG_INF
        return max(sum(e) for e in self.terms)

    def constant_coefficient(self):
        return self.terms.get((0,) * self.nvars, self.ring.zero)

    def derivative(self, i: int) -> "Poly":
        out = {}
        for e, c in self.terms.items():
            if e[i]:
                d = list(e)
                d[i] -= 1
                out[tuple(d)] = c * e[i]
        return Poly._from_raw(self.parent, out)

    def evaluate(self, values: Sequence, target: Optional[PolynomialRing] = None):
        """Substitute ``values[i]`` for variable ``i``.

        ``values`` are Polys (substitution, result lives in their parent) or
        coefficients (evaluation, result is a coefficient).
        """
        if len(values) != self.nvars:
            raise IndexMismatch(f"need {self.nvars} values, got {len(values)}")
        polys = [v for v in values if isinstance(v, Poly)]
        if not polys and target is None:
            ring = self.ring
            total = ring.zero
            for e, c in self.terms.items():
                t = c
                for v, k in zip(values, e):
                    if k:
                        t = t * ring.coerce(v) ** k
                total = total + t
            return ring.normalize(total)
        parent = target or polys[0].parent
        values = [v if isinstance(v, Poly) else parent.constant(v) for v in values]
        cache: dict = {}

        def pw(i, k):
            key = (i, k)
            if key not in cache:
                cache[key] = values[i] if k == 1 else pw(i, k - 1) * values[i]
            return cache[key]

        acc: dict = {}
        for e, c in self.terms.items():
            term = None
            for i, k in enumerate(e):
                if k:
                    term = pw(i, k) if term is None else term * pw(i, k)
            if term is None:
                term = parent.one()
            for te, tc in term.terms.items():
                acc[te] = acc.get(te, 0) + c * tc
        return Poly._from_raw(parent, acc)

    def change_ring(self, ring: Ring) -> "Poly":
        src = self.ring
        return Poly._from_raw(
            self.parent.change_ring(ring), {e: src.reduce(c, ring) for e, c in self.terms.items()}
        )

    def map_coefficients(self, fn, parent: Optional[PolynomialRing] = None) -> "Poly":
        return Poly._from_raw(parent or self.parent, {e: fn(c) for e, c in self.terms.items()})

    def map_exponents(self, fn, parent: PolynomialRing) -> "Poly":
        out: dict = {}
        for e, c in self.terms.items():
            k = fn(e)
            out[k] = out.get(k, 0) + c
        return Poly._from_raw(parent, out)

    def renamed(self, parent: PolynomialRing) -> "Poly":
        if parent.nvars != self.nvars:
            raise IndexMismatch("variable count differs")
        return Poly(parent, dict(self.terms))

    def __repr__(self):
        return f"Poly({self})"

    def __str__(self):
        if not self.terms:
            return "0"
        names = self.parent.names
        parts = []
        for e, c in sorted(self.terms.items(), key=lambda t: (-sum(t[0]), t[0])):
            mono = "*".join(
                (names[i] if k == 1 else f"{names[i]}^{k}") for i, k in enumerate(e) if k
            )
            cs = self.ring.format(c)
            if not mono:
                parts.append(cs)
            elif cs == "1":
                parts.append(mono)
            else:
                parts.append(f"{cs}*{mono}")
        return " + ".join(parts)


def poisson_bracket(a: Poly, b: Poly, sign: int = 1) -> Poly:
    """``sign * sum_ij omega_ij da/dx_i db/dx_j`` on ``2n`` variables.

    ``sign=-1`` gives the intrinsic bracket of the characteristic ``p`` center.
    """
    a._check(b)
    m = a.nvars
    if m % 2:
        raise IndexMismatch("Poisson bracket needs an even number of variables")
    n = m // 2
    result = a.parent.zero()
    for i in range(n):
        # omega(i, n+i) = -1, omega(n+i, i) = +1
        result = result - a.derivative(i) * b.derivative(n + i)
        result = result + a.derivative(n + i) * b.derivative(i)
    return result if sign == 1 else result * sign


class PolyMap:
    """Endomorphism of a polynomial ring: ``x_i -> images[i]``."""

    def __init__(self, images: Sequence[Poly], claimed_inverse: Optional[Sequence[Poly]] = None):
        images = tuple(images)
        if not images:
            raise IndexMismatch("no images")
        parent = images[0].parent
        if len(images) != parent.nvars:
            raise IndexMismatch(f"expected {parent.nvars} images, got {len(images)}")
        for im in images:
            images[0]._check(im)
        self.parent = parent
        self.images = images
        self.claimed_inverse = tuple(claimed_inverse) if claimed_inverse is not None else None

    @property
    def ring(self):
        return self.parent.ring

    @property
    def nvars(self):
        return self.parent.nvars

    @classmethod
    def identity(cls, parent: PolynomialRing) -> "PolyMap":
        gens = parent.gens()
        return cls(gens, gens)

    def __call__(self, a: Poly) -> Poly:
        return a.evaluate(self.images)

    def __eq__(self, other):
        return isinstance(other, PolyMap) and self.images == other.images

    def __hash__(self):
        return hash(self.images)

    def is_identity(self) -> bool:
        return all(im == g for im, g in zip(self.images, self.parent.gens()))

    def first_moved_generator(self) -> Optional[int]:
        for i, (im, g) in enumerate(zip(self.images, self.parent.gens())):
            if im != g:
                return i + 1
        return None

    def degree(self, include_inverse: bool = False):
        degs = [im.degree() for im in self.images]
        if include_inverse and self.claimed_inverse is not None:
            degs += [im.degree() for im in self.claimed_inverse]
        return max(degs)

    def change_ring(self, ring: Ring) -> "PolyMap":
        inv = None
        if self.claimed_inverse is not None:
            inv = [im.change_ring(ring) for im in self.claimed_inverse]
        return PolyMap([im.change_ring(ring) for im in self.images], inv)

    def map_coefficients(self, fn, parent=None) -> "PolyMap":
        return PolyMap([im.map_coefficients(fn, parent) for im in self.images])

    def renamed(self, parent: PolynomialRing) -> "PolyMap":
        inv = None
        if self.claimed_inverse is not None:
            inv = [im.renamed(parent) for im in self.claimed_inverse]
        return PolyMap([im.renamed(parent) for im in self.images], inv)

    def __repr__(self):
        names = self.parent.names
        return "PolyMap(" + ", ".join(f"{names[i]} -> {im}" for i, im in enumerate(self.images)) + ")"


def compose_maps(g: PolyMap, h: PolyMap) -> PolyMap:
    """Images of ``g`` evaluated at the images of ``h``."""
    g.images[0]._check(h.images[0])
    images = [im.evaluate(h.images) for im in g.images]
    inv = None
    if g.claimed_inverse is not None and h.claimed_inverse is not None:
        inv = [im.evaluate(g.claimed_inverse) for im in h.claimed_inverse]
    return PolyMap(images, inv)


@dataclass
class SymplectoReport:
    ok: bool
    violations: list = field(default_factory=list)  # (i, j, bracket, expected) one-based

    def __bool__(self):
        return self.ok


def check_symplecto(g: PolyMap, sign: int = 1) -> SymplectoReport:
    """Verify ``{g(x_i), g(x_j)} = sign * omega_ij`` for every pair."""
    m = g.nvars
    n = m // 2
    violations = []
    for i in range(m):
        for j in range(i + 1, m):
            got = poisson_bracket(g.images[i], g.images[j], sign)
            want = g.parent.constant(sign * omega(n, i, j))
            if got != want:
                violations.append((i + 1, j + 1, got, want))
    return SymplectoReport(ok=not violations, violations=violations)


class PolyOneForm:
    """``sum_i components[i] dx_i``."""

    def __init__(self, components: Sequence[Poly]):
        components = tuple(components)
        if not components:
            raise IndexMismatch("no components")
        parent = components[0].parent
        if len(components) != parent.nvars:
            raise IndexMismatch(f"expected {parent.nvars} components")
        for c in components:
            components[0]._check(c)
        self.parent = parent
        self.components = components

    def __add__(self, other: "PolyOneForm"):
        return PolyOneForm([a + b for a, b in zip(self.components, other.components)])

    def __sub__(self, other: "PolyOneForm"):
        return PolyOneForm([a - b for a, b in zip(self.components, other.components)])

    def __eq__(self, other):
        return isinstance(other, PolyOneForm) and self.components == other.components

    def __repr__(self):
        names = self.parent.names
        parts = [f"({c})*d{names[i]}" for i, c in enumerate(self.components) if c]
        return "PolyOneForm(" + (" + ".join(parts) or "0") + ")"


def exterior_derivative(f: Poly) -> PolyOneForm:
    return PolyOneForm([f.derivative(i) for i in range(f.nvars)])


def is_closed(theta: PolyOneForm) -> bool:
    c = theta.components
    return all(
        c[i].derivative(j) == c[j].derivative(i)
        for i in range(len(c)) for j in range(i + 1, len(c))
    )


def pullback_one_form(g: PolyMap, theta: PolyOneForm) -> PolyOneForm:
    """``g* theta = sum_j theta_j(g) d(g_j)``."""
    g.images[0]._check(theta.components[0])
    m = g.nvars
    out = [g.parent.zero() for _ in range(m)]
    for j, comp in enumerate(theta.components):
        if not comp:
            continue
        pulled = comp.evaluate(g.images)
        gj = g.images[j]
        for k in range(m):
            d = gj.derivative(k)
            if d:
                out[k] = out[k] + pulled * d
    return PolyOneForm(out)


def primitive_of_exact(theta: PolyOneForm) -> Poly:
    """``P`` with ``dP = theta`` and ``P(0) = 0``.

    Homotopy formula: the coefficient of ``x^gamma`` in ``P`` is
    ``(1/|gamma|) sum_i theta_i[gamma - e_i]``; the division must be
    possible in the coefficient ring.
    """
    if not is_closed(theta):
        raise NotClosed("one-form is not closed")
    ring = theta.parent.ring
    sums: dict = {}
    for i, comp in enumerate(theta.components):
        for e, c in comp.terms.items():
            g = list(e)
            g[i] += 1
            g = tuple(g)
            sums[g] = sums.get(g, 0) + c
    out = {}
    for g, s in sums.items():
        s = ring.normalize(s)
        if not s:
            continue
        deg = sum(g)
        try:
            out[g] = ring.divide_int(s, deg)
        except NonInvertibleDenominator as exc:
            raise NonInvertibleDenominator(
                f"integrating the degree-{deg} part needs 1/{deg} in {ring}"
            ) from exc
    return Poly._from_raw(theta.parent, out)
