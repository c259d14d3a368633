"""Independent reference implementations used only by the tests."""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

import sympy
from hypothesis import strategies as st

from weylpoisson.rings import QQ, ZZ, IntegersMod, PrimeField
from weylpoisson.weyl import WeylAlgebra, omega


# -- naive rewriting normal form ---------------------------------------------------

def rewrite_normal_form(n: int, word: tuple) -> dict:
    """Expand a word of generator indices into the PBW basis by swapping
    adjacent out-of-order generators one at a time (x_i x_j = x_j x_i + omega_ij).
    Integer coefficients; reduce afterwards for other rings."""
    return dict(_rewrite(n, tuple(word)))


@lru_cache(maxsize=None)
def _rewrite(n, word):
    for k in range(len(word) - 1):
        i, j = word[k], word[k + 1]
        if i > j:
            out: dict = {}
            swapped = word[:k] + (j, i) + word[k + 2:]
            for e, c in _rewrite(n, swapped):
                out[e] = out.get(e, 0) + c
            w = omega(n, i, j)
            if w:
                for e, c in _rewrite(n, word[:k] + word[k + 2:]):
                    out[e] = out.get(e, 0) + w * c
            return tuple((e, c) for e, c in out.items() if c)
    exp = [0] * (2 * n)
    for g in word:
        exp[g] += 1
    return ((tuple(exp), 1),)


def word_of(exp) -> tuple:
    return tuple(i for i, k in enumerate(exp) for _ in range(k))


def rewrite_product(a, b):
    """PBW product of two elements computed by naive rewriting."""
    n = a.n
    acc: dict = {}
    for ea, ca in a.terms.items():
        for eb, cb in b.terms.items():
            for e, c in rewrite_normal_form(n, word_of(ea) + word_of(eb)).items():
                acc[e] = acc.get(e, 0) + ca * cb * c
    return a.algebra.element(acc)


# -- differential-operator action ------------------------------------------------------

def operator_action(a, f, xs):
    """Apply a char-0 Weyl element to the sympy expression ``f`` with
    x^_i = multiplication by xs[i] and x^_{n+i} = d/dxs[i]."""
    n = a.n
    total = sympy.Integer(0)
    for e, c in a.terms.items():
        g = f
        for i in range(n):
            if e[n + i]:
                g = sympy.diff(g, xs[i], e[n + i])
        for i in range(n):
            g = g * xs[i] ** e[i]
        total += sympy.Rational(Fraction(c).numerator, Fraction(c).denominator) * g
    return sympy.expand(total)


def generic_function(xs):
    return sympy.Function("phi")(*xs)


# -- sympy Poisson bracket -------------------------------------------------------------

def sympy_bracket(a, b, xs):
    n = len(xs) // 2
    out = 0
    for i in range(2 * n):
        for j in range(2 * n):
            w = omega(n, i, j)
            if w:
                out += w * sympy.diff(a, xs[i]) * sympy.diff(b, xs[j])
    return sympy.expand(out)


def poly_to_sympy(a, xs):
    out = sympy.Integer(0)
    for e, c in a.terms.items():
        c = Fraction(c)
        term = sympy.Rational(c.numerator, c.denominator)
        for x, k in zip(xs, e):
            term *= x ** k
        out += term
    return sympy.expand(out)


# -- hypothesis strategies -------------------------------------------------------------

RINGS = [ZZ, QQ, PrimeField(3), PrimeField(5), IntegersMod(9)]


def coefficients(ring):
    if ring == QQ:
        return st.fractions(min_value=-5, max_value=5, max_denominator=4)
    return st.integers(min_value=-6, max_value=6)


@st.composite
def weyl_elements(draw, n, ring, max_degree=3, max_terms=4):
    algebra = WeylAlgebra(n, ring)
    terms = {}
    for _ in range(draw(st.integers(0, max_terms))):
        exp = [0] * (2 * n)
        for _ in range(draw(st.integers(0, max_degree))):
            exp[draw(st.integers(0, 2 * n - 1))] += 1
        terms[tuple(exp)] = draw(coefficients(ring))
    return algebra.element(terms)


@st.composite
def polys(draw, parent, max_degree=3, max_terms=4):
    terms = {}
    for _ in range(draw(st.integers(0, max_terms))):
        exp = [0] * parent.nvars
        for _ in range(draw(st.integers(0, max_degree))):
            exp[draw(st.integers(0, parent.nvars - 1))] += 1
        terms[tuple(exp)] = draw(coefficients(parent.ring))
    return parent.element(terms)
