"""Weyl algebras, Poisson algebras and their centers in characteristic p."""
from .errors import *  # noqa: F401,F403
from .rings import (
    QQ, ZZ, FpPoly, Integers, IntegersMod, PolyOverPrimeField, PrimeField, Rationals,
    inverse_frobenius, lift_to_mod_p2, rational_reconstruct, ring_from_descriptor,
)
from .weyl import (
    SymplecticForm, WeylAlgebra, WeylElement, WeylEndo, ad_nilpotency_order, ad_power,
    apply_endo, bernstein_degree, commutator, compose_endos, multiply, omega, power,
    verify_endo,
)
from .poisson import (
    Poly, PolyMap, PolyOneForm, PolynomialRing, check_symplecto, compose_maps,
    exterior_derivative, is_closed, poisson_bracket, poisson_ring, primitive_of_exact,
    pullback_one_form,
)
from .center import (
    CenterMap, center_coords, center_lift, center_map, center_poisson_bracket, center_ring,
    degree_check, frobenius_twist_map, psi_profile, untwist_frobenius_map,
)
from .tame import (
    SymplecticMatrix, TameWord, Transvection, closed_form_center_map, correspondence_check,
    eval_word_poisson, eval_word_weyl, kernel_evidence,
)
from .azumaya import (
    AzumayaPresentation, SubstitutionMap, TensorPresentation, alpha_presentation, matrix_rep,
    verify_substitution, verify_triple_iso,
)

__version__ = "0.1.0"
