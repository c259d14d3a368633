import random

import numpy as np
import pytest

from weylpoisson.azumaya import (
    AzumayaPresentation, SubstitutionMap, TensorPresentation, alpha_presentation, base_ring, commutator,
    matrix_rep, parse_base, verify_substitution, verify_triple_iso,
)
from weylpoisson.errors import NormalizationFailure


def _matrix_oracle(algebra, point):
    """Faithful matrix image: xi_j -> D + c I, eta_j -> X + d I on factor j, evaluated at ``point``."""
    p = algebra.p
    X = np.zeros((p, p), dtype=object)
    D = np.zeros((p, p), dtype=object)
    for j in range(p - 1):
        X[j + 1, j] = 1
        D[j, j + 1] = j + 1
    eye = np.eye(p, dtype=object)
    gens = []
    for fac in algebra.factors:
        c = int(fac.f.evaluate(point))
        d = int(fac.g.evaluate(point))
        # (D + cI)^p = c^p I = c I over F_p, and [D + cI, X + dI] = I
        gens.append((D + c * eye, X + d * eye))

    def image(elem):
        size = p ** algebra.k
        total = np.zeros((size, size), dtype=object)
        for e, coeff in elem.terms.items():
            m = np.ones((1, 1), dtype=object)
            for j, (xi, eta) in enumerate(gens):
                block = np.linalg.matrix_power(xi, e[2 * j]) @ np.linalg.matrix_power(eta, e[2 * j + 1])
                m = np.kron(m, block)
            total = total + int(coeff.evaluate(point)) * m
        return total % p

    return image


def _random_element(rng, algebra, terms=4):
    s = algebra.base.gens()
    out = algebra.zero()
    for _ in range(terms):
        e = tuple(rng.randrange(algebra.p) for _ in range(2 * algebra.k))
        c = algebra.base.constant(rng.randrange(1, algebra.p))
        for v in s:
            c = c * v ** rng.randint(0, 1)
        out = out + algebra.element({e: c})
    return out


@pytest.mark.parametrize("p,k", [(2, 1), (3, 1), (5, 1), (2, 2), (3, 2), (2, 3)])
def test_products_match_matrix_oracle(p, k):
    rng = random.Random(p * 7 + k)
    base = base_ring(p, ("s", "t"))
    s, t = base.gens()
    params = [(s, t), (t + 1, s * s), (s * t, base.constant(1))][:k]
    alg = TensorPresentation([AzumayaPresentation(f, g) for f, g in params])
    for _ in range(10):
        point = (rng.randrange(p), rng.randrange(p))
        img = _matrix_oracle(alg, point)
        a, b = _random_element(rng, alg), _random_element(rng, alg)
        assert ((img(a * b) - img(a) @ img(b)) % p == 0).all()


@pytest.mark.parametrize("p", [2, 3, 5, 7])
def test_associativity_and_basic_relations(p):
    rng = random.Random(p)
    base = base_ring(p, ("s",))
    (s,) = base.gens()
    alg = TensorPresentation([AzumayaPresentation(s, s + 1)])
    assert commutator(alg.xi(), alg.eta()) == alg.one()
    assert alg.xi() ** p == alg.scalar(s)
    assert alg.eta() ** p == alg.scalar(s + 1)
    for _ in range(30):
        a, b, c = (_random_element(rng, alg, 3) for _ in range(3))
        assert (a * b) * c == a * (b * c)


def test_substitution_p2_passes():
    base = base_ring(2, ("s",))
    (s,) = base.gens()
    src = TensorPresentation([AzumayaPresentation(s, base.zero())])
    tgt = TensorPresentation([AzumayaPresentation(base.zero(), base.zero())])
    report = verify_substitution(SubstitutionMap.from_strings(src, tgt, {"xi": "xi + s*eta", "eta": "eta"}))
    assert report.ok
    assert [r.relation for r in report.relations] == ["[xi, eta] = 1", "xi^2 = f", "eta^2 = g"]


@pytest.mark.parametrize("p", [2, 3, 5])
def test_substitution_removing_f(p):
    base = base_ring(p, ("s",))
    (s,) = base.gens()
    src = TensorPresentation([AzumayaPresentation(s, base.zero())])
    tgt = TensorPresentation([AzumayaPresentation(base.zero(), base.zero())])
    m = SubstitutionMap.from_strings(src, tgt, {"xi": f"xi - s*eta^{p - 1}", "eta": "eta"})
    report = verify_substitution(m)
    table = {r.relation: r for r in report.relations}
    assert table["[xi, eta] = 1"].verdict == "pass"
    # computed independently: (xi - s eta^{p-1})^p in the matrix model equals s * I
    rng = random.Random(p)
    for _ in range(5):
        point = (rng.randrange(p),)
        img = _matrix_oracle(tgt, point)
        lhs = img(tgt.parse(f"xi - s*eta^{p - 1}") ** p)
        assert ((lhs - point[0] * np.eye(p, dtype=object)) % p == 0).all()
    assert table[f"xi^{p} = f"].computed == tgt.scalar(s)
    assert report.ok


def test_identity_substitution():
    base = base_ring(3, ("s",))
    (s,) = base.gens()
    alg = TensorPresentation([AzumayaPresentation(s, s * s + 2)])
    assert verify_substitution(SubstitutionMap.from_strings(alg, alg, {"xi": "xi", "eta": "eta"})).ok


def test_triple_trivial_parameters_pass():
    rep = verify_triple_iso("0", "0", "0", p=3)
    assert all(r.ok for r in rep.readings.values())


def test_triple_p2_table():
    rep = verify_triple_iso("s1", "s2", "s3", p=2)
    first = rep.readings["A_{h,fg}"]
    assert first.ok and len(first.relations) == 9 + 12
    assert rep.structural_failures["A_{fh,g}"] == ["xi3^2 = f3", "eta3^2 = g3"]


def test_triple_p3_sign_table():
    rep = verify_triple_iso("s1", "1", "1", p=3)
    table = {r.relation: r for r in rep.readings["A_{h,fg}"].relations}
    eta1 = table["eta1^3 = g1"]
    assert eta1.verdict == "sign"
    base = rep.readings["A_{h,fg}"].relations[0].computed.algebra.base
    assert eta1.computed.scalar_part() == -base.constant(1)
    assert len(eta1.expected) == 2
    assert rep.sign_discrepancies["A_{h,fg}"] == ["eta1^3 = g1", "eta2^3 = g2", "eta3^3 = g3"]
    assert rep.structural_failures["A_{h,fg}"] == []
    assert all(table[f"[xi{j}, eta{j}] = 1"].ok for j in (1, 2, 3))


def test_triple_matches_matrix_oracle_at_points():
    p = 3
    base = base_ring(p, ("s1", "s2", "s3"))
    s1, s2, s3 = base.gens()
    z = base.zero()
    tgt = TensorPresentation([AzumayaPresentation(s1, z), AzumayaPresentation(s2, z), AzumayaPresentation(s3, z)])
    eta1 = tgt.parse("eta1 - xi2*xi3")
    rng = random.Random(1)
    for _ in range(5):
        point = tuple(rng.randrange(p) for _ in range(3))
        img = _matrix_oracle(tgt, point)
        cube = img(eta1 ** 3)
        want = (-point[1] * point[2]) * np.eye(p ** 3, dtype=object)
        assert ((cube - want) % p == 0).all()


@pytest.mark.parametrize("p", [2, 3, 5, 7])
def test_matrix_rep(p):
    rep = matrix_rep(p)
    assert rep.ok and rep.span_rank == p * p and rep.trace_commutator == 0
    if p == 2:
        assert rep.X.tolist() == [[0, 0], [1, 0]]
        assert rep.D.tolist() == [[0, 1], [0, 0]]


def test_alpha_presentation():
    (pres,) = alpha_presentation([("y1", "y2")], p=5)
    assert str(pres.f) == "y1" and str(pres.g) == "y2"
    assert alpha_presentation([], p=5) == []
    base = base_ring(3, ("s",))
    (a,) = alpha_presentation([("s", "0")], base=base)
    tgt = TensorPresentation([AzumayaPresentation(base.zero(), base.zero())])
    m = SubstitutionMap.from_strings(TensorPresentation([a]), tgt, {"xi": "xi - s*eta^2", "eta": "eta"})
    assert verify_substitution(m).ok


def test_parse_errors():
    base = base_ring(3, ("s",))
    alg = TensorPresentation([AzumayaPresentation(base.gens()[0], base.zero())])
    for bad in ("xi +* eta", "zeta", "xi / eta"):
        with pytest.raises(NormalizationFailure):
            alg.parse(bad)
    with pytest.raises(NormalizationFailure):
        parse_base("s + q", base)
    assert alg.parse("eta*xi") == alg.parse("xi*eta - 1")
