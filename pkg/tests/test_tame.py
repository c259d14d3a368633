import random

import pytest

from weylpoisson.center import center_map, frobenius_twist_map
from weylpoisson.errors import UnsupportedPrime
from weylpoisson.poisson import check_symplecto, compose_maps, poisson_ring
from weylpoisson.rings import QQ, PrimeField
from weylpoisson.tame import (
    SymplecticMatrix, TameWord, Transvection, WordSampler, closed_form_center_map, correspondence_check,
    eval_word_poisson, eval_word_weyl, fourier, identity_words, kernel_evidence, potential_ring,
    random_symplectic_matrix, random_transvection,
)
from weylpoisson.weyl import WeylAlgebra, compose_endos, verify_endo

F5 = PrimeField(5)


def _transvection(n, ring, terms):
    return Transvection(potential_ring(n, ring).element(terms))


def test_empty_word_is_identity():
    w = TameWord(2, QQ, [])
    assert eval_word_weyl(w).is_identity()
    assert eval_word_poisson(w).is_identity()


def test_quadratic_transvection():
    w = TameWord(1, QQ, [_transvection(1, QQ, {(2,): 1})])
    x1, x2 = WeylAlgebra(1, QQ).gens()
    assert eval_word_weyl(w).images == (x1, x2 + 2 * x1)
    z1, z2 = poisson_ring(1, QQ).gens()
    assert eval_word_poisson(w).images == (z1, z2 + 2 * z1)


def test_conjugated_transvection_matches_hand_substitution():
    fr = fourier(1, QQ)
    w = TameWord(1, QQ, [fr, _transvection(1, QQ, {(3,): 1}), fr.inverse()])
    z1, z2 = poisson_ring(1, QQ).gens()
    # Fourier sends (x1, x2) to (x2, -x1); T adds 3 x1^2 to x2; the inverse sends (x1, x2) to (-x2, x1).
    # Chain: x1 -> x2 -> x2 + 3x1^2 -> x1 + 3x2^2 ; x2 -> -x1 -> -x1 -> x2
    assert eval_word_poisson(w).images == (z1 + 3 * z2 ** 2, z2)
    x1, x2 = WeylAlgebra(1, QQ).gens()
    assert eval_word_weyl(w).images == (x1 + 3 * x2 ** 2, x2)


def test_invalid_matrix_rejected():
    with pytest.raises(ValueError, match="symplectic"):
        SymplecticMatrix([[1, 1], [0, 2]], QQ)


def test_transvection_drops_constant():
    t = _transvection(1, QQ, {(0,): 5, (2,): 1})
    assert t == _transvection(1, QQ, {(2,): 1})
    assert _transvection(1, QQ, {(0,): 5}).is_identity()


def test_word_times_inverse_is_identity():
    rng = random.Random(5)
    for k in range(20):
        n = 1 + k % 2
        w = WordSampler(n, QQ, max_length=6, degree_cap=4).word(rng, length=rng.randint(1, 6))
        ww = w + w.inverse()
        assert eval_word_weyl(ww).is_identity()
        assert eval_word_poisson(ww).is_identity()


def test_evaluations_are_homomorphisms_and_verify():
    rng = random.Random(6)
    for k in range(12):
        n = 1 + k % 2
        w = WordSampler(n, QQ, max_length=5, degree_cap=4).word(rng)
        cut = rng.randint(0, len(w))
        left = TameWord(n, QQ, w.generators[:cut])
        right = TameWord(n, QQ, w.generators[cut:])
        f = eval_word_weyl(w)
        assert f == compose_endos(eval_word_weyl(left), eval_word_weyl(right))
        assert verify_endo(f).ok
        g = eval_word_poisson(w)
        assert g == compose_maps(eval_word_poisson(left), eval_word_poisson(right))
        assert check_symplecto(g).ok


def test_closed_form_examples():
    cm = closed_form_center_map(fourier(1, F5))
    y1, y2 = cm.map.parent.gens()
    assert cm.images == (y2, -y1)
    cm = closed_form_center_map(_transvection(1, F5, {(3,): 1}))
    assert cm.images == (y1, y2 + 3 * y1 ** 2)
    ident = SymplecticMatrix([[1, 0], [0, 1]], F5)
    assert closed_form_center_map(ident).map.is_identity()
    with pytest.raises(UnsupportedPrime):
        closed_form_center_map(fourier(1, PrimeField(2)))


@pytest.mark.parametrize("p", [3, 5, 7])
@pytest.mark.parametrize("n", [1, 2])
def test_closed_form_agrees_with_center_map(p, n):
    ring = PrimeField(p)
    rng = random.Random(100 * p + n)
    for _ in range(6):
        for g in (random_symplectic_matrix(rng, n, ring), random_transvection(rng, n, ring, 4)):
            f = eval_word_weyl(TameWord(n, ring, [g]))
            assert closed_form_center_map(g).map == center_map(f).map


def test_twisted_poisson_equals_center_map_over_fp_t():
    from weylpoisson.rings import PolyOverPrimeField
    rng = random.Random(7)
    for p in (3, 5):
        R = PolyOverPrimeField(p)
        for _ in range(3):
            w = WordSampler(1, R, max_length=3, degree_cap=3).word(rng)
            cm = center_map(eval_word_weyl(w))
            assert cm.map == frobenius_twist_map(eval_word_poisson(w)).renamed(cm.map.parent)


def test_correspondence_single_generators_and_words():
    rng = random.Random(8)
    for n in (1, 2):
        for g in (fourier(n, QQ), random_transvection(rng, n, QQ, 4)):
            assert correspondence_check(TameWord(n, QQ, [g]), [3, 5]).ok
        assert correspondence_check(TameWord(n, QQ, []), [3, 5]).ok
    for k in range(6):
        w = WordSampler(1 + k % 2, QQ, max_length=5, degree_cap=3).word(rng)
        assert correspondence_check(w, [3, 5]).ok


def test_correspondence_reports_bad_prime_without_raising():
    w = TameWord(1, QQ, [_transvection(1, QQ, {(2,): QQ.coerce(1) / 3})])
    report = correspondence_check(w, [3, 5])
    assert report.entries[0].error and report.entries[1].ok
    assert not report.ok


def test_kernel_examples():
    t = _transvection(1, QQ, {(2,): 1})
    w = TameWord(1, QQ, [t, t.inverse()])
    rep = kernel_evidence(w, [3, 5])
    assert rep.weyl_identity and rep.poisson_identity and rep.consistent
    assert all(item["center_identity"] for item in rep.mod_p)
    rep = kernel_evidence(TameWord(1, QQ, [t]), [3, 5])
    assert not rep.weyl_identity and not rep.poisson_identity
    assert rep.weyl_witness == rep.poisson_witness == 2
    assert [item["witness"] for item in rep.mod_p] == [2, 2]


def test_engineered_identity_words():
    rng = random.Random(9)
    for n in (1, 2):
        gen = identity_words(rng, n, QQ)
        kinds = set()
        for _ in range(12):
            kind, w = next(gen)
            kinds.add(kind)
            rep = kernel_evidence(w)
            assert rep.weyl_identity and rep.poisson_identity, kind
        assert len(kinds) >= 3
