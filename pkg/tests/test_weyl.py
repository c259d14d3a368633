import random
from math import factorial

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from oracles import (
    RINGS, generic_function, operator_action, rewrite_product, weyl_elements,
)
from weylpoisson.errors import IndexMismatch, RelationCheckFailed, RingMismatch
from weylpoisson.rings import QQ, ZZ, IntegersMod, PrimeField
from weylpoisson.weyl import (
    NEG_INF, SymplecticForm, WeylAlgebra, WeylEndo, ad_nilpotency_order, ad_power, apply_endo,
    bernstein_degree, commutator, compose_endos, multiply, omega, power, verify_endo,
)


def gens(n=1, ring=ZZ):
    return WeylAlgebra(n, ring).gens()


def test_symplectic_form_signs():
    for n in (1, 2, 3):
        w = SymplecticForm(n).matrix()
        for i in range(2 * n):
            for j in range(2 * n):
                assert w[i][j] == -w[j][i]
        for i in range(n):
            assert omega(n, i, n + i) == -1 and omega(n, n + i, i) == 1


def test_basic_products():
    A = WeylAlgebra(1, ZZ)
    x1, x2 = A.gens()
    assert x2 * x1 == x1 * x2 + 1
    assert x2 ** 2 * x1 ** 2 == x1 ** 2 * x2 ** 2 + 4 * x1 * x2 + 2
    assert str(x2 * x1) == "X1*X2 + 1"


@given(weyl_elements(2, QQ))
def test_unit_law(a):
    one = a.algebra.one()
    assert one * a == a and a * one == a


@pytest.mark.parametrize("n", [1, 2, 3])
def test_generator_relations(n):
    g = gens(n)
    for i in range(2 * n):
        for j in range(2 * n):
            assert commutator(g[i], g[j]) == g[0].algebra.scalar(omega(n, i, j))


def test_commutator_examples():
    x1, x2 = gens()
    assert commutator(x2 ** 2, x1 ** 2) == 4 * x1 * x2 + 2
    assert commutator(x1, x1).is_zero()


@pytest.mark.parametrize("p", [2, 3, 5, 7])
def test_pth_power_commutator_sum(p):
    A = WeylAlgebra(1, ZZ)
    x, d = A.gens()
    got = commutator(d ** p, x ** p)
    want = A.element({(i, i): factorial(p) ** 2 // (factorial(i) ** 2 * factorial(p - i)) for i in range(p)})
    assert got == want
    coeffs = [int(c) for c in got.terms.values()]
    assert all(c % p == 0 for c in coeffs)
    assert sum(coeffs) % (p * p) == (-p) % (p * p)


@pytest.mark.parametrize("ring", RINGS, ids=str)
@settings(max_examples=25)
@given(data=st.data())
def test_product_matches_naive_rewriting(ring, data):
    n = data.draw(st.sampled_from([1, 2]))
    a = data.draw(weyl_elements(n, ring, max_degree=3, max_terms=3))
    b = data.draw(weyl_elements(n, ring, max_degree=3, max_terms=3))
    assert multiply(a, b) == rewrite_product(a, b)


@settings(max_examples=25)
@given(data=st.data())
def test_product_matches_differential_operators(data):
    n = data.draw(st.sampled_from([1, 2]))
    a = data.draw(weyl_elements(n, QQ, max_degree=3, max_terms=3))
    b = data.draw(weyl_elements(n, QQ, max_degree=3, max_terms=3))
    xs = sympy.symbols(f"u1:{n + 1}")
    phi = generic_function(xs)
    lhs = operator_action(a * b, phi, xs)
    rhs = operator_action(a, operator_action(b, phi, xs), xs)
    assert sympy.simplify(lhs - rhs) == 0


@pytest.mark.parametrize("ring", [ZZ, QQ, PrimeField(3), IntegersMod(4)], ids=str)
@settings(max_examples=40)
@given(data=st.data())
def test_associativity(ring, data):
    n = data.draw(st.sampled_from([1, 2]))
    a, b, c = (data.draw(weyl_elements(n, ring, max_degree=2)) for _ in range(3))
    assert (a * b) * c == a * (b * c)


@given(data=st.data())
def test_jacobi_and_leibniz(data):
    n = data.draw(st.sampled_from([1, 2]))
    a, b, c = (data.draw(weyl_elements(n, QQ, max_degree=2)) for _ in range(3))
    jac = commutator(a, commutator(b, c)) + commutator(b, commutator(c, a)) + commutator(c, commutator(a, b))
    assert jac.is_zero()
    assert commutator(a, b * c) == commutator(a, b) * c + b * commutator(a, c)


def test_bernstein_degree_examples():
    x1, x2 = gens()
    assert bernstein_degree(x1 * x2 + 1) == 2
    assert bernstein_degree(x1.algebra.zero()) == NEG_INF


@pytest.mark.parametrize("ring", [ZZ, QQ], ids=str)
@given(data=st.data())
def test_degree_additive_over_domains(ring, data):
    n = data.draw(st.sampled_from([1, 2]))
    a = data.draw(weyl_elements(n, ring))
    b = data.draw(weyl_elements(n, ring))
    assert bernstein_degree(a * b) == bernstein_degree(a) + bernstein_degree(b)


@given(data=st.data())
def test_degree_subadditive_mod_m(data):
    ring = IntegersMod(4)
    a = data.draw(weyl_elements(1, ring))
    b = data.draw(weyl_elements(1, ring))
    assert bernstein_degree(a * b) <= bernstein_degree(a) + bernstein_degree(b)


def test_mismatched_operands():
    a = WeylAlgebra(1, ZZ).gen(0)
    with pytest.raises(IndexMismatch):
        a * WeylAlgebra(2, ZZ).gen(0)
    with pytest.raises(RingMismatch):
        a * WeylAlgebra(1, QQ).gen(0)


def _transvection_x_squared(ring=QQ):
    x1, x2 = gens(1, ring)
    return WeylEndo([x1, x2 + 2 * x1], [x1, x2 - 2 * x1])


def test_apply_endo_examples():
    A = WeylAlgebra(1, QQ)
    x1, x2 = A.gens()
    ident = WeylEndo.identity(A)
    a = x1 * x2 ** 2 + 3
    assert apply_endo(ident, a) == a
    assert apply_endo(_transvection_x_squared(), x2) == x2 + 2 * x1


def test_apply_unverified_endo_raises():
    x1, x2 = gens(1, QQ)
    f = WeylEndo([2 * x1, x2])
    assert not f.verified
    with pytest.raises(RelationCheckFailed):
        apply_endo(f, x1)


def _random_tame_endo(rng, n, ring):
    from weylpoisson.tame import WordSampler, eval_word_weyl
    return eval_word_weyl(WordSampler(n, ring, max_length=3, degree_cap=3).word(rng))


def test_apply_is_multiplicative_and_respects_composition():
    rng = random.Random(5)
    for k in range(50):
        n = 1 + k % 2
        f = _random_tame_endo(rng, n, QQ)
        g = _random_tame_endo(rng, n, QQ)
        A = f.algebra
        a = A.element({tuple(rng.randint(0, 1) for _ in range(2 * n)): rng.randint(-3, 3) for _ in range(2)})
        b = A.element({tuple(rng.randint(0, 1) for _ in range(2 * n)): rng.randint(-3, 3) for _ in range(2)})
        assert apply_endo(f, a * b) == apply_endo(f, a) * apply_endo(f, b)
        assert apply_endo(compose_endos(f, g), a) == apply_endo(g, apply_endo(f, a))


def test_verify_endo_examples():
    x1, x2 = gens(1, QQ)
    t = WeylEndo([x1, x2 + 3 * x1 ** 2], [x1, x2 - 3 * x1 ** 2])
    assert verify_endo(t).ok and t.report.inverse_ok
    bad = verify_endo(WeylEndo([2 * x1, x2]))
    assert not bad.ok
    (i, j, defect), = bad.violations
    assert (i, j) == (1, 2) and defect == x1.algebra.scalar(-1)
    A = WeylAlgebra(2, PrimeField(3))
    y = A.gens()
    shift = y[1] ** 3 * y[2] ** 2
    assert verify_endo(WeylEndo([y[0] + shift, y[1], y[2], y[3]])).ok


def test_verify_endo_reports_bad_inverse():
    x1, x2 = gens(1, QQ)
    f = WeylEndo([x1, x2 + x1], [x1, x2 + x1])
    assert f.report.inverse_checked and not f.report.inverse_ok
    assert not f.verified


def test_ad_power_examples():
    x1, x2 = gens()
    assert ad_power(x1, x2, 2).is_zero()
    assert ad_power(x1, x1 * x2, 1) == -x1


@settings(max_examples=30)
@given(data=st.data())
def test_ad_nilpotence_bound_for_generators(data):
    n = data.draw(st.sampled_from([1, 2]))
    u = data.draw(weyl_elements(n, ZZ, max_degree=4))
    if u.is_zero():
        return
    D = int(bernstein_degree(u)) + 1
    for g in u.algebra.gens():
        assert ad_power(g, u, D).is_zero()
        order = ad_nilpotency_order(g, u)
        assert order is not None and order <= D


def test_power_examples():
    A = WeylAlgebra(1, PrimeField(3))
    x1, x2 = A.gens()
    assert power(x1, 0) == A.one()
    assert power(x2 + 2 * x1, 3) == x2 ** 3 + 2 * x1 ** 3
    assert power(x1, 3) == A.monomial((3, 0))
