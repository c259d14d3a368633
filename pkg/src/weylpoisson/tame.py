"""Tame words: symplectic matrices and transvections evaluated on both sides.

A word ``[g_1, ..., g_k]`` evaluates to the endomorphism obtained by
substituting left to right: the images of ``g_1`` evaluated at the images
of ``g_2`` and so on (geometrically ``g_1 ∘ g_2 ∘ ... ∘ g_k``).  The same
convention is used for Weyl endomorphisms, polynomial maps and center
maps, so the three evaluations are directly comparable.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .center import (
    CenterMap, center_map, center_ring, char_p, degree_check, frobenius_twist_map,
    untwist_frobenius_map,
)
from .errors import RingMismatch, UnsupportedPrime, WeylPoissonError
from .poisson import (
    Poly, PolyMap, PolyOneForm, PolynomialRing, compose_maps, poisson_ring,
    primitive_of_exact,
)
from .rings import QQ, ZZ, PolyOverPrimeField, PrimeField, Rationals, Ring
from .weyl import WeylAlgebra, WeylEndo, compose_endos, omega

__all__ = [
    "SymplecticMatrix", "Transvection", "TameWord", "eval_word_weyl", "eval_word_poisson",
    "closed_form_center_map", "closed_form_word", "correspondence_check",
    "CorrespondenceReport", "kernel_evidence", "KernelReport", "fourier",
    "potential_ring", "random_symplectic_matrix", "random_transvection", "random_word",
    "identity_words", "WordSampler",
]


def potential_ring(n: int, ring: Ring) -> PolynomialRing:
    return PolynomialRing(ring, [f"x{i + 1}" for i in range(n)])


def _matmul(ring, a, b):
    return [
        [ring.normalize(sum((a[i][k] * b[k][j] for k in range(len(b))), ring.zero))
         for j in range(len(b[0]))]
        for i in range(len(a))
    ]


class SymplecticMatrix:
    """Linear generator ``x̂_i -> sum_j M[i][j] x̂_j``; requires ``M ω M^T = ω``.

    For square matrices this is equivalent to ``M^T ω M = ω``.
    """

    kind = "matrix"

    def __init__(self, matrix: Sequence[Sequence], ring: Ring):
        rows = [[ring.coerce(v) for v in row] for row in matrix]
        m = len(rows)
        if m == 0 or m % 2 or any(len(r) != m for r in rows):
            raise ValueError("symplectic matrix must be square of even size")
        self.ring = ring
        self.n = m // 2
        self.matrix = tuple(tuple(r) for r in rows)
        w = [[ring.coerce(omega(self.n, i, j)) for j in range(m)] for i in range(m)]
        mt = [list(col) for col in zip(*rows)]
        if _matmul(ring, _matmul(ring, rows, w), mt) != w:
            raise ValueError("matrix does not preserve the symplectic form")

    def inverse(self) -> "SymplecticMatrix":
        # M^{-1} = ω M^T ω^{-1} with ω^{-1} = -ω
        ring, m = self.ring, 2 * self.n
        w = [[ring.coerce(omega(self.n, i, j)) for j in range(m)] for i in range(m)]
        neg_w = [[ring.normalize(-v) for v in row] for row in w]
        mt = [list(col) for col in zip(*self.matrix)]
        return SymplecticMatrix(_matmul(ring, _matmul(ring, w, mt), neg_w), ring)

    def change_ring(self, ring: Ring) -> "SymplecticMatrix":
        return SymplecticMatrix([[self.ring.reduce(v, ring) for v in row] for row in self.matrix], ring)

    def weyl_images(self, algebra: WeylAlgebra):
        gens = algebra.gens()
        out = []
        for row in self.matrix:
            im = algebra.zero()
            for c, g in zip(row, gens):
                if c:
                    im = im + g * c
            out.append(im)
        return out

    def poisson_images(self, parent: PolynomialRing):
        gens = parent.gens()
        out = []
        for row in self.matrix:
            im = parent.zero()
            for c, g in zip(row, gens):
                if c:
                    im = im + g * c
            out.append(im)
        return out

    def is_identity(self) -> bool:
        m = 2 * self.n
        return all(self.matrix[i][j] == (1 if i == j else 0) for i in range(m) for j in range(m))

    def __eq__(self, other):
        return isinstance(other, SymplecticMatrix) and self.ring == other.ring and self.matrix == other.matrix

    def __repr__(self):
        return f"SymplecticMatrix({[[self.ring.format(v) for v in r] for r in self.matrix]})"


class Transvection:
    """``T_F``: fixes ``x_1..x_n`` and shifts ``x_{n+i}`` by ``dF/dx_i``.

    ``F`` is a polynomial in ``n`` variables; its constant term acts
    trivially and is dropped.
    """

    kind = "transvection"

    def __init__(self, F: Poly):
        zero = (0,) * F.nvars
        if zero in F.terms:
            F = F - F.parent.constant(F.terms[zero])
        self.F = F
        self.n = F.nvars
        self.ring = F.ring

    def inverse(self) -> "Transvection":
        return Transvection(-self.F)

    def change_ring(self, ring: Ring) -> "Transvection":
        return Transvection(self.F.change_ring(ring))

    def gradient(self) -> list[Poly]:
        return [self.F.derivative(i) for i in range(self.n)]

    def weyl_images(self, algebra: WeylAlgebra):
        n = self.n
        gens = list(algebra.gens())
        for i, dF in enumerate(self.gradient()):
            shift = algebra.element({e + (0,) * n: c for e, c in dF.terms.items()})
            gens[n + i] = gens[n + i] + shift
        return gens

    def poisson_images(self, parent: PolynomialRing):
        n = self.n
        gens = list(parent.gens())
        for i, dF in enumerate(self.gradient()):
            shift = Poly._from_raw(parent, {e + (0,) * n: c for e, c in dF.terms.items()})
            gens[n + i] = gens[n + i] + shift
        return gens

    def is_identity(self) -> bool:
        return self.F.is_zero()

    def __eq__(self, other):
        return isinstance(other, Transvection) and self.F == other.F

    def __repr__(self):
        return f"Transvection({self.F})"


def fourier(n: int, ring: Ring, i: int = 0) -> SymplecticMatrix:
    """``x̂_i -> x̂_{n+i}``, ``x̂_{n+i} -> -x̂_i`` (other generators fixed)."""
    m = 2 * n
    mat = [[1 if r == c else 0 for c in range(m)] for r in range(m)]
    mat[i][i] = 0
    mat[n + i][n + i] = 0
    mat[i][n + i] = 1
    mat[n + i][i] = -1
    return SymplecticMatrix(mat, ring)


@dataclass
class TameWord:
    n: int
    ring: Ring
    generators: list = field(default_factory=list)

    def __post_init__(self):
        for g in self.generators:
            if g.n != self.n:
                raise ValueError(f"generator for n={g.n} in a word with n={self.n}")
            if g.ring != self.ring:
                raise RingMismatch(f"generator over {g.ring} in a word over {self.ring}")

    def __len__(self):
        return len(self.generators)

    def __add__(self, other: "TameWord") -> "TameWord":
        if other.n != self.n or other.ring != self.ring:
            raise RingMismatch("cannot concatenate words over different n or rings")
        return TameWord(self.n, self.ring, self.generators + other.generators)

    def inverse(self) -> "TameWord":
        return TameWord(self.n, self.ring, [g.inverse() for g in reversed(self.generators)])

    def change_ring(self, ring: Ring) -> "TameWord":
        return TameWord(self.n, ring, [g.change_ring(ring) for g in self.generators])


def _generator_endo(g, algebra: WeylAlgebra) -> WeylEndo:
    return WeylEndo(g.weyl_images(algebra), g.inverse().weyl_images(algebra))


def eval_word_weyl(w: TameWord) -> WeylEndo:
    algebra = WeylAlgebra(w.n, w.ring)
    f = WeylEndo.identity(algebra)
    for g in w.generators:
        f = compose_endos(f, _generator_endo(g, algebra))
    return f


def eval_word_poisson(w: TameWord, parent: Optional[PolynomialRing] = None) -> PolyMap:
    parent = parent or poisson_ring(w.n, w.ring)
    g_map = PolyMap.identity(parent)
    for g in w.generators:
        g_map = compose_maps(g_map, PolyMap(g.poisson_images(parent), g.inverse().poisson_images(parent)))
    return g_map


def closed_form_center_map(g, p: Optional[int] = None) -> CenterMap:
    """Center map of a single generator from the closed forms.

    Matrix: ``y_i -> sum_j a_ij^p y_j`` (needs ``p > 2``).  Transvection:
    ``y_{n+i} -> y_{n+i} + Fr_*(dF/dx_i)(y_1..y_n)``.  Generators over a
    characteristic-zero ring are first reduced modulo ``p``.
    """
    if g.ring.characteristic == 0:
        if p is None:
            raise ValueError("prime required for a characteristic-zero generator")
        g = g.change_ring(PrimeField(p))
    q = char_p(g.ring)
    if p is not None and p != q:
        raise RingMismatch(f"generator over {g.ring} at p={p}")
    p = q
    ring = g.ring
    parent = center_ring(g.n, ring)
    if isinstance(g, SymplecticMatrix):
        if p == 2:
            raise UnsupportedPrime("linear closed form needs p > 2")
        twisted = SymplecticMatrix([[ring.frobenius(v) for v in row] for row in g.matrix], ring)
        return CenterMap(PolyMap(twisted.poisson_images(parent)), p, 1)
    twisted_F = g.F.map_coefficients(ring.frobenius)
    images = Transvection(twisted_F).poisson_images(parent)
    return CenterMap(PolyMap(images), p, int(max(1, g.F.degree() - 1)))


def closed_form_word(w: TameWord, p: Optional[int] = None) -> CenterMap:
    if w.ring.characteristic == 0:
        w = w.change_ring(PrimeField(p))
    p = char_p(w.ring)
    result = CenterMap(PolyMap.identity(center_ring(w.n, w.ring)), p, 1)
    for g in w.generators:
        result = result.compose(closed_form_center_map(g, p))
    return result


@dataclass
class CorrespondenceEntry:
    p: int
    closed_form_agrees: Optional[bool] = None
    twist_agrees: Optional[bool] = None
    untwisted_agrees: Optional[bool] = None
    degree_ok: Optional[bool] = None
    center_map: Optional[CenterMap] = None
    error: Optional[str] = None

    @property
    def ok(self):
        return self.error is None and all(
            (self.closed_form_agrees, self.twist_agrees, self.untwisted_agrees, self.degree_ok)
        )


@dataclass
class CorrespondenceReport:
    entries: list

    @property
    def ok(self):
        return all(e.ok for e in self.entries)

    def __bool__(self):
        return self.ok


def _word_at_prime(w: TameWord, p: int) -> TameWord:
    if w.ring.characteristic == 0:
        return w.change_ring(PrimeField(p))
    if char_p(w.ring) != p:
        raise RingMismatch(f"word over {w.ring} checked at p={p}")
    return w


def correspondence_check(w: TameWord, primes: Sequence[int], method: str = "auto") -> CorrespondenceReport:
    """Per prime: Weyl-side center map vs closed forms vs twisted Poisson evaluation."""
    entries = []
    for p in primes:
        entry = CorrespondenceEntry(p)
        try:
            if p == 2:
                raise UnsupportedPrime("p = 2 is excluded")
            wp = _word_at_prime(w, p)
            f = eval_word_weyl(wp)
            cm = center_map(f, method=method)
            entry.center_map = cm
            entry.degree_ok = degree_check(cm, int(max(0, f.degree()))).ok
            entry.closed_form_agrees = cm.map == closed_form_word(wp, p).map
            y = center_ring(w.n, wp.ring)
            g = eval_word_poisson(wp)
            entry.twist_agrees = cm.map == frobenius_twist_map(g).renamed(y)
            entry.untwisted_agrees = untwist_frobenius_map(cm).map == g.renamed(y)
        except (WeylPoissonError, ValueError, ArithmeticError) as exc:
            entry.error = f"{type(exc).__name__}: {exc}"
        entries.append(entry)
    return CorrespondenceReport(entries)


@dataclass
class KernelReport:
    weyl_identity: bool
    poisson_identity: bool
    weyl_witness: Optional[int]
    poisson_witness: Optional[int]
    mod_p: list  # dicts: p, center_identity, witness

    @property
    def consistent(self) -> bool:
        return self.weyl_identity == self.poisson_identity

    def __bool__(self):
        return self.consistent


def kernel_evidence(w: TameWord, primes: Sequence[int] = (), method: str = "auto") -> KernelReport:
    """Decide ``rho^A(w) = id`` and ``rho^P(w) = id`` exactly over the word's ring.

    For each listed prime the center map of ``rho^A(w) mod p`` is recorded
    as the mod-p witness (it is the identity iff the reduction is trivial on
    the center).
    """
    f = eval_word_weyl(w)
    g = eval_word_poisson(w)
    mod_p = []
    for p in primes:
        item = {"p": p}
        try:
            wp = _word_at_prime(w, p)
            cm = center_map(eval_word_weyl(wp), method=method)
            item["center_identity"] = cm.map.is_identity()
            item["witness"] = cm.map.first_moved_generator()
        except (WeylPoissonError, ValueError, ArithmeticError) as exc:
            item["error"] = f"{type(exc).__name__}: {exc}"
        mod_p.append(item)
    return KernelReport(
        weyl_identity=f.is_identity(),
        poisson_identity=g.is_identity(),
        weyl_witness=f.first_moved_generator(),
        poisson_witness=g.first_moved_generator(),
        mod_p=mod_p,
    )


# -- seeded random corpora ----------------------------------------------------

_Q_COEFFS = (1, -1, 2, -2, 3, -3, Fraction(1, 2), Fraction(-1, 2), Fraction(3, 2), Fraction(-3, 2))


def _small_coeff(rng: random.Random, ring: Ring):
    if isinstance(ring, Rationals):
        return rng.choice(_Q_COEFFS)
    if ring == ZZ:
        return rng.choice((1, -1, 2, -2, 3, -3))
    if isinstance(ring, PolyOverPrimeField):
        while True:
            c = ring.random(rng, height=1)
            if c:
                return c
    return ring.coerce(rng.randrange(1, ring.characteristic))


def _elementary_symplectic(rng: random.Random, n: int, ring: Ring) -> list[list]:
    m = 2 * n
    ident = [[ring.coerce(1 if i == j else 0) for j in range(m)] for i in range(m)]
    kind = rng.choice(("upper", "lower", "fourier", "gl"))
    mat = [row[:] for row in ident]
    if kind in ("upper", "lower"):
        i, j = rng.randrange(n), rng.randrange(n)
        c = _small_coeff(rng, ring)
        r, s = (i, n + j) if kind == "upper" else (n + i, j)
        r2, s2 = (j, n + i) if kind == "upper" else (n + j, i)
        mat[r][s] = ring.normalize(mat[r][s] + c)
        if (r2, s2) != (r, s):
            mat[r2][s2] = ring.normalize(mat[r2][s2] + c)
    elif kind == "fourier":
        i = rng.randrange(n)
        mat = [list(row) for row in fourier(n, ring, i).matrix]
    else:
        # diag(D, D^{-T}) with D = I + c E_ij (i != j) or a coordinate swap
        if n == 1:
            if isinstance(ring, Rationals) and rng.random() < 0.5:
                lam = Fraction(rng.choice((2, -2, 1, -1)))
                lam = lam if rng.random() < 0.5 else 1 / lam
                mat[0][0], mat[1][1] = lam, 1 / lam
            else:
                mat[0][0] = mat[1][1] = ring.coerce(-1)
        else:
            i, j = rng.sample(range(n), 2)
            c = _small_coeff(rng, ring)
            mat[i][j] = c
            mat[n + j][n + i] = ring.normalize(-c)
    return mat


def random_symplectic_matrix(rng: random.Random, n: int, ring: Ring, factors: int = 3,
                             height: Optional[int] = 3) -> SymplecticMatrix:
    """Product of elementary symplectic matrices; over Z/Q entries have height <= ``height``."""
    while True:
        mat = [[ring.coerce(1 if i == j else 0) for j in range(2 * n)] for i in range(2 * n)]
        for _ in range(rng.randint(1, factors)):
            mat = _matmul(ring, mat, _elementary_symplectic(rng, n, ring))
        if ring.characteristic == 0 and height is not None:
            if any(abs(Fraction(v).numerator) > height or Fraction(v).denominator > height
                   for row in mat for v in row):
                continue
        sm = SymplecticMatrix(mat, ring)
        if not sm.is_identity():
            return sm


def random_transvection(rng: random.Random, n: int, ring: Ring, max_degree: int = 4,
                        max_terms: int = 3, min_degree: int = 1) -> Transvection:
    parent = potential_ring(n, ring)
    while True:
        terms = {}
        for _ in range(rng.randint(1, max_terms)):
            d = rng.randint(min_degree, max_degree)
            e = [0] * n
            for _ in range(d):
                e[rng.randrange(n)] += 1
            terms[tuple(e)] = _small_coeff(rng, ring)
        F = parent.element(terms)
        if not F.is_zero():
            return Transvection(F)


def _height(g: PolyMap) -> int:
    h = 0
    for im in g.images + (g.claimed_inverse or ()):
        for c in im.terms.values():
            c = Fraction(c)
            h = max(h, abs(c.numerator), c.denominator)
    return h


@dataclass
class WordSampler:
    """Seeded tame-word distribution.

    Generator type is a fair coin; matrices are products of up to three
    elementary symplectic factors (entries of height <= 3 over Z/Q);
    transvection potentials have degree <= ``max_potential_degree``.
    Words whose Poisson evaluation (or its inverse) exceeds
    ``degree_cap``, or whose coefficients exceed ``height_cap`` over Q,
    are resampled.
    """

    n: int
    ring: Ring = QQ
    max_length: int = 5
    max_potential_degree: int = 4
    degree_cap: int = 3
    height_cap: Optional[int] = None

    def generator(self, rng: random.Random):
        if rng.random() < 0.5:
            return random_symplectic_matrix(rng, self.n, self.ring)
        return random_transvection(rng, self.n, self.ring, self.max_potential_degree)

    def word(self, rng: random.Random, length: Optional[int] = None) -> TameWord:
        for _ in range(10000):
            k = length if length is not None else rng.randint(1, self.max_length)
            w = TameWord(self.n, self.ring, [self.generator(rng) for _ in range(k)])
            if self.accepts(w):
                return w
        raise RuntimeError("word sampler could not satisfy its caps")

    def accepts(self, w: TameWord) -> bool:
        g = eval_word_poisson(w)
        if g.degree(include_inverse=True) > self.degree_cap:
            return False
        if self.height_cap is not None and self.ring.characteristic == 0:
            return _height(g) <= self.height_cap
        return True


def random_word(rng: random.Random, n: int, ring: Ring = QQ, **kwargs) -> TameWord:
    return WordSampler(n, ring, **kwargs).word(rng)


def identity_words(rng: random.Random, n: int, ring: Ring = QQ, sampler: Optional[WordSampler] = None):
    """Yield ``(label, word)`` pairs that evaluate to the identity on both sides."""
    sampler = sampler or WordSampler(n, ring, max_length=3)
    kinds = ("inverse", "fourier4", "abelian", "conjugation")
    while True:
        kind = rng.choice(kinds)
        if kind == "inverse":
            w = sampler.word(rng)
            yield kind, w + w.inverse()
        elif kind == "fourier4":
            i = rng.randrange(n)
            yield kind, TameWord(n, ring, [fourier(n, ring, i)] * 4)
        elif kind == "abelian":
            a = random_transvection(rng, n, ring, 3)
            b = random_transvection(rng, n, ring, 3)
            c = Transvection(-(a.F + b.F))
            if c.is_identity():
                continue
            yield kind, TameWord(n, ring, [a, b, c])
        else:
            m = _x_preserving_matrix(rng, n, ring)
            t = random_transvection(rng, n, ring, 3)
            conj = TameWord(n, ring, [m, t, m.inverse()])
            g = eval_word_poisson(conj)
            parent = potential_ring(n, ring)
            shift = PolyOneForm([
                Poly._from_raw(parent, {e[:n]: c for e, c in (g.images[n + i] - g.parent.gen(n + i)).terms.items()})
                for i in range(n)
            ])
            f_conj = primitive_of_exact(shift)
            yield kind, conj + TameWord(n, ring, [Transvection(-f_conj)])


def _x_preserving_matrix(rng, n, ring) -> SymplecticMatrix:
    """``diag(D, D^{-T})``; conjugating a transvection by it gives a transvection."""
    m = 2 * n
    mat = [[ring.coerce(1 if i == j else 0) for j in range(m)] for i in range(m)]
    if n == 1:
        if isinstance(ring, Rationals):
            lam = Fraction(rng.choice((2, -2, -1)))
            mat[0][0], mat[1][1] = lam, 1 / lam
        else:
            mat[0][0] = mat[1][1] = ring.coerce(-1)
    else:
        i, j = rng.sample(range(n), 2)
        c = _small_coeff(rng, ring)
        mat[i][j] = c
        mat[n + j][n + i] = ring.normalize(-c)
    return SymplecticMatrix(mat, ring)
