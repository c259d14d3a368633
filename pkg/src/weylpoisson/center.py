"""The center of ``A_{n,R}`` in characteristic ``p`` and the maps it carries.

In characteristic ``p`` the elements ``x̂_i^p`` are central and the center
is the polynomial ring ``R[y_1..y_2n]`` with ``y_i = x̂_i^p``.  In the PBW
basis an element is central exactly when every exponent is divisible by
``p``, so center coordinates are obtained by exponentwise division.
"""
from __future__ import annotations

import logging
import random
from dataclasses import dataclass, field
from itertools import combinations_with_replacement
from typing import Optional, Sequence

import numpy as np

from .errors import (
    NotCentral, NotDivisibleByP, RelationCheckFailed, RingMismatch, RingNotCharP,
    WeylPoissonError,
)
from .poisson import Poly, PolyMap, PolynomialRing, poisson_ring
from .rings import (
    QQ, IntegersMod, PolyOverPrimeField, PrimeField, Ring, inverse_frobenius,
    rational_reconstruct,
)
from .weyl import WeylAlgebra, WeylElement, WeylEndo, commutator, power

log = logging.getLogger(__name__)

__all__ = [
    "center_ring", "center_coords", "center_lift", "CenterMap", "center_map",
    "center_poisson_bracket", "untwist_frobenius_map", "frobenius_twist_map",
    "DegreeReport", "degree_check", "PrimeEntry", "Reconstruction", "PrimeProfile",
    "psi_profile", "char_p",
]

# Above this prime (over F_p) center images are computed by evaluation and
# interpolation instead of expanding the p-th power in the PBW basis.
DIRECT_PRIME_LIMIT = 7


def char_p(ring: Ring) -> int:
    """The prime characteristic of ``ring`` or :class:`RingNotCharP`."""
    if isinstance(ring, (PrimeField, PolyOverPrimeField)):
        return ring.p
    if isinstance(ring, IntegersMod):
        try:
            PrimeField(ring.m)
        except ValueError:
            pass
        else:
            return ring.m
    raise RingNotCharP(f"{ring} is not of prime characteristic")


def center_ring(n: int, ring: Ring) -> PolynomialRing:
    return poisson_ring(n, ring, prefix="y")


def center_coords(a: WeylElement) -> Poly:
    """Center coordinates of a central element (exponents divided by ``p``)."""
    p = char_p(a.ring)
    out = {}
    for e, c in a.terms.items():
        if any(k % p for k in e):
            raise NotCentral(f"term {e} of the element is not central", term=e)
        out[tuple(k // p for k in e)] = c
    return Poly(center_ring(a.n, a.ring), out)


def center_lift(c: Poly, algebra: Optional[WeylAlgebra] = None, p: Optional[int] = None) -> WeylElement:
    """Inverse of :func:`center_coords`: ``y^beta -> x̂^(p beta)``."""
    if p is None:
        p = char_p(c.ring)
    if c.nvars % 2:
        raise ValueError("center polynomials have an even number of variables")
    algebra = algebra or WeylAlgebra(c.nvars // 2, c.ring)
    return algebra.element({tuple(k * p for k in e): v for e, v in c.terms.items()})


@dataclass
class CenterMap:
    """Induced map on the center, tagged with the source degree bound ``N``."""

    map: PolyMap
    p: int
    source_degree: int

    @property
    def images(self):
        return self.map.images

    def __eq__(self, other):
        if isinstance(other, CenterMap):
            return self.map == other.map
        if isinstance(other, PolyMap):
            return self.map == other
        return NotImplemented

    def compose(self, other: "CenterMap") -> "CenterMap":
        from .poisson import compose_maps
        return CenterMap(compose_maps(self.map, other.map), self.p,
                         max(self.source_degree, other.source_degree))

    def __repr__(self):
        return f"CenterMap(p={self.p}, N={self.source_degree}, {self.map!r})"


def center_map(f: WeylEndo, method: str = "auto") -> CenterMap:
    """``y_i -> center_coords(f(x̂_i)^p)``.

    ``method`` is ``"direct"`` (expand the p-th power), ``"evaluation"``
    (prime fields only: evaluate on the ``p^n``-dimensional modules
    ``F_p[x]/(x^p - s)`` with ``d/dx + lambda`` and interpolate), or
    ``"auto"``.
    """
    if not f.verified:
        raise RelationCheckFailed("center_map needs an endomorphism that passed verify_endo")
    p = char_p(f.ring)
    degree = int(max(0, f.degree(include_inverse=False)))
    if method == "auto":
        if isinstance(f.ring, PrimeField) and p > DIRECT_PRIME_LIMIT and p > degree:
            method = "evaluation"
        else:
            method = "direct"
    if method == "direct":
        images = [center_coords(power(im, p)) for im in f.images]
    elif method == "evaluation":
        if not isinstance(f.ring, PrimeField):
            raise RingMismatch("evaluation method needs a prime field")
        images = [_center_image_by_evaluation(im, p) for im in f.images]
    else:
        raise ValueError(f"unknown method {method!r}")
    return CenterMap(PolyMap(images), p, int(max(0, f.degree())))


# -- evaluation route ---------------------------------------------------------

def _lattice(nvars: int, degree: int) -> list[tuple[int, ...]]:
    """Exponent tuples of total degree <= degree (also the principal lattice)."""
    out = []
    for d in range(degree + 1):
        for combo in combinations_with_replacement(range(nvars), d):
            e = [0] * nvars
            for i in combo:
                e[i] += 1
            out.append(tuple(e))
    return out


def _solve_mod_p(rows: list[list[int]], rhs: list[int], p: int) -> list[int]:
    m = len(rows)
    a = [list(r) + [b] for r, b in zip(rows, rhs)]
    for col in range(m):
        piv = next((r for r in range(col, m) if a[r][col] % p), None)
        if piv is None:
            raise ArithmeticError("singular interpolation system")
        a[col], a[piv] = a[piv], a[col]
        inv = pow(a[col][col], -1, p)
        a[col] = [v * inv % p for v in a[col]]
        for r in range(m):
            if r != col and a[r][col]:
                factor = a[r][col]
                a[r] = [(v - factor * w) % p for v, w in zip(a[r], a[col])]
    return [a[r][m] for r in range(m)]


class _ModuleAction:
    """Action of ``A_{n,F_p}`` on ``⊗_i F_p[x_i]/(x_i^p - s_i)`` with ``x̂_{n+i} = d/dx_i + lam_i``.

    Batched over a set of points ``(s, lam)``; on each module ``x̂_i^p``
    acts as ``s_i`` and ``x̂_{n+i}^p`` as ``lam_i^p = lam_i``.
    """

    def __init__(self, n: int, p: int, points: Sequence[Sequence[int]]):
        self.n, self.p = n, p
        pts = np.array(points, dtype=np.int64).reshape(len(points), 2 * n)
        self.s = pts[:, :n]
        self.lam = pts[:, n:]
        self.npts = len(points)
        self._wrap: dict = {}
        self._mono_wrap: dict = {}
        j = np.arange(p, dtype=np.int64)
        self._dweights = np.where(j < p - 1, j + 1, 0) % p

    def _shape(self, axis_len_at: int) -> list[int]:
        shape = [1] * (self.n + 1)
        shape[axis_len_at] = -1
        return shape

    def start(self) -> np.ndarray:
        v = np.zeros((self.npts,) + (self.p,) * self.n, dtype=np.int64)
        v[(slice(None),) + (0,) * self.n] = 1
        return v

    def deriv(self, v: np.ndarray, i: int) -> np.ndarray:
        ax = i + 1
        shifted = np.roll(v, -1, axis=ax) * self._dweights.reshape(self._shape(ax))
        lam = self.lam[:, i].reshape([-1] + [1] * self.n)
        return (shifted + lam * v) % self.p

    def _wrap_weights(self, i: int, k: int) -> np.ndarray:
        # x_i^k sends x_i^j to s_i^q x_i^{(j+k) mod p} with q = (j+k) // p
        key = (i, k)
        if key not in self._wrap:
            p = self.p
            q = (np.arange(p) + k) // p
            w = np.ones((self.npts, p), dtype=np.int64)
            for col in range(p):
                if q[col]:
                    w[:, col] = [pow(int(x), int(q[col]), p) for x in self.s[:, i]]
            shape = [self.npts] + [1] * self.n
            shape[i + 1] = p
            self._wrap[key] = w.reshape(shape)
        return self._wrap[key]

    def mul_x(self, v: np.ndarray, i: int, k: int) -> np.ndarray:
        return np.roll(v * self._wrap_weights(i, k) % self.p, k % self.p, axis=i + 1)

    def mul_monomial(self, v: np.ndarray, alpha: tuple) -> np.ndarray:
        """Multiply by ``x^alpha`` without reducing (entries grow by a factor < p)."""
        axes = tuple(i + 1 for i, k in enumerate(alpha) if k)
        if not axes:
            return v
        if alpha not in self._mono_wrap:
            weight = None
            for i, k in enumerate(alpha):
                if k:
                    w = self._wrap_weights(i, k)
                    weight = w if weight is None else weight * w % self.p
            self._mono_wrap[alpha] = weight
        shifts = tuple(k % self.p for k in alpha if k)
        return np.roll(v * self._mono_wrap[alpha], shifts, axis=axes)

    def act(self, a: WeylElement, v: np.ndarray) -> np.ndarray:
        n, p = self.n, self.p
        derivs = {(0,) * n: v}

        def d(beta):
            if beta not in derivs:
                i = next(k for k in range(n) if beta[k])
                prev = list(beta)
                prev[i] -= 1
                derivs[beta] = self.deriv(d(tuple(prev)), i)
            return derivs[beta]

        # a = sum over alpha of x^alpha * Q_alpha(d); terms are already PBW ordered
        groups: dict = {}
        for e, c in a.terms.items():
            groups.setdefault(tuple(e[:n]), []).append((tuple(e[n:]), int(c)))
        out = np.zeros_like(v)
        acc = np.empty_like(v)
        tmp = np.empty_like(v)
        for alpha, parts in groups.items():
            np.multiply(d(parts[0][0]), parts[0][1], out=acc)
            for beta, c in parts[1:]:
                np.multiply(d(beta), c, out=tmp)
                acc += tmp
            np.remainder(acc, p, out=acc)
            # entries stay below (#terms * p)^2 * p, far inside int64
            out += self.mul_monomial(acc, alpha)
        np.remainder(out, p, out=out)
        return out


def _center_image_by_evaluation(a: WeylElement, p: int, extra_points: int = 3) -> Poly:
    n = a.n
    parent = center_ring(n, a.ring)
    if not a.terms:
        return parent.zero()
    degree = int(a.degree())
    if degree >= p:
        raise ValueError(f"evaluation route needs p > degree ({p} <= {degree})")
    monos = _lattice(2 * n, degree)
    rng = random.Random(p * 1000003 + degree)
    extras = [tuple(rng.randrange(p) for _ in range(2 * n)) for _ in range(extra_points)]
    points = monos + extras
    module = _ModuleAction(n, p, points)
    v = module.start()
    for _ in range(p):
        v = module.act(a, v)
    origin = (slice(None),) + (0,) * n
    values = v[origin].copy()
    v[origin] = 0
    if v.any():
        raise NotCentral("p-th power does not act as a scalar; the element is not central")
    rows = [[_mono_value(pt, e, p) for e in monos] for pt in monos]
    coeffs = _solve_mod_p(rows, [int(x) for x in values[: len(monos)]], p)
    for pt, val in zip(extras, values[len(monos):]):
        got = sum(c * _mono_value(pt, e, p) for c, e in zip(coeffs, monos)) % p
        if got != int(val):
            raise NotCentral("interpolated center image disagrees at a check point")
    return Poly._from_raw(parent, dict(zip(monos, coeffs)))


def _mono_value(pt, e, p):
    v = 1
    for x, k in zip(pt, e):
        if k:
            v = v * pow(x, k, p) % p
    return v


# -- the intrinsic bracket ----------------------------------------------------

def center_poisson_bracket(
    a: Poly,
    b: Poly,
    p: Optional[int] = None,
    lifts: Optional[tuple[WeylElement, WeylElement]] = None,
) -> Poly:
    """``{a, b} = ([ã, b̃] / p) mod p`` using lifts to ``A_{n, Z/p^2}``.

    By default the canonical lifts are used (coefficients in ``[0, p)``,
    exponents multiplied by ``p``).  Other lifts may be supplied; each must
    reduce modulo ``p`` to the canonical one.
    """
    a._check(b)
    if p is None:
        p = char_p(a.ring)
    if not isinstance(a.ring, PrimeField) or a.ring.p != p:
        raise RingMismatch(f"center bracket needs coefficients in F_{p}")
    n = a.nvars // 2
    big = WeylAlgebra(n, IntegersMod(p * p))
    canon = (center_lift(a, big, p), center_lift(b, big, p))
    if lifts is None:
        lifts = canon
    else:
        for given, want in zip(lifts, canon):
            if given.algebra != big:
                raise RingMismatch("lifts must live in A_{n, Z/p^2}")
            if any(c % p for c in (given - want).terms.values()):
                raise ValueError("supplied lift does not reduce to the element modulo p")
    comm = commutator(*lifts)
    small = WeylAlgebra(n, a.ring)
    out = {}
    for e, c in comm.terms.items():
        if c % p:
            raise NotDivisibleByP(f"coefficient {c} of {e} in [ã, b̃] is not divisible by {p}")
        out[e] = c // p
    return center_coords(small.element(out))


# -- Frobenius ----------------------------------------------------------------

def untwist_frobenius_map(m: CenterMap) -> CenterMap:
    """Coefficientwise p-th roots (identity over ``F_p``)."""
    ring = m.map.ring
    return CenterMap(
        m.map.map_coefficients(lambda c: inverse_frobenius(ring, c)), m.p, m.source_degree
    )


def frobenius_twist_map(g: PolyMap, p: Optional[int] = None) -> PolyMap:
    """``Fr_*``: raise every coefficient to the p-th power."""
    ring = g.ring
    if p is not None and char_p(ring) != p:
        raise RingMismatch(f"{ring} is not of characteristic {p}")
    return g.map_coefficients(ring.frobenius)


# -- degree bound -------------------------------------------------------------

@dataclass
class DegreeReport:
    ok: bool
    bound: int
    max_degree: float
    degrees: list

    def __bool__(self):
        return self.ok


def degree_check(m: CenterMap | PolyMap, bound: Optional[int] = None) -> DegreeReport:
    if isinstance(m, CenterMap):
        if bound is None:
            bound = m.source_degree
        m = m.map
    if bound is None:
        raise ValueError("no degree bound given")
    degs = [im.degree() for im in m.images]
    top = max(degs)
    return DegreeReport(ok=top <= bound, bound=bound, max_degree=top, degrees=degs)


# -- multi-prime profiles -----------------------------------------------------

@dataclass
class PrimeEntry:
    p: int
    center_map: Optional[CenterMap] = None
    untwisted: Optional[CenterMap] = None
    degree_ok: Optional[bool] = None
    error: Optional[str] = None


@dataclass
class Reconstruction:
    map: Optional[PolyMap]
    primes: list
    check_primes: list
    agrees: bool
    error: Optional[str] = None


@dataclass
class PrimeProfile:
    n: int
    source: str
    entries: list = field(default_factory=list)
    reconstruction: Optional[Reconstruction] = None

    @property
    def primes(self):
        return [e.p for e in self.entries]

    def ok(self) -> bool:
        return all(e.error is None and e.degree_ok for e in self.entries)


def _default_checks(count: int) -> int:
    # two check primes when possible, but never fewer than two reconstruction primes
    return max(0, min(2, count - 2))


def psi_profile(
    f: WeylEndo,
    primes: Sequence[int],
    *,
    reconstruct: bool = True,
    n_checks: Optional[int] = None,
    method: str = "auto",
    source: str = "",
) -> PrimeProfile:
    """Center maps of ``f mod p`` at the listed primes, untwisted, plus a
    coefficientwise rational reconstruction across the profile.

    Only the listed primes are examined; failures at a prime are recorded
    in its entry rather than raised.
    """
    primes = sorted(set(int(p) for p in primes))
    profile = PrimeProfile(n=f.n, source=source)
    for p in primes:
        entry = PrimeEntry(p)
        try:
            if p == 2:
                raise ValueError("p = 2 is excluded")
            fp = f.change_ring(PrimeField(p))
            if not fp.verified:
                raise RelationCheckFailed(f"reduction modulo {p} is not relation-preserving")
            cm = center_map(fp, method=method)
            entry.center_map = cm
            entry.untwisted = untwist_frobenius_map(cm)
            entry.degree_ok = degree_check(cm, int(max(0, f.degree()))).ok
        except (WeylPoissonError, ValueError, ArithmeticError) as exc:
            entry.error = f"{type(exc).__name__}: {exc}"
            log.info("psi_profile: prime %d failed: %s", p, exc)
        profile.entries.append(entry)
    if reconstruct:
        profile.reconstruction = _reconstruct(profile, f.n, n_checks)
    return profile


def _reconstruct(profile: PrimeProfile, n: int, n_checks: Optional[int]) -> Reconstruction:
    good = [e for e in profile.entries if e.untwisted is not None]
    k = _default_checks(len(good)) if n_checks is None else n_checks
    primes = [e.p for e in good]
    used, checks = primes[: len(primes) - k], primes[len(primes) - k:]
    if len(used) < 2:
        return Reconstruction(None, used, checks, False, "fewer than two usable primes")
    parent = poisson_ring(n, QQ)
    images = []
    try:
        for i in range(2 * n):
            support = set()
            for e in good:
                support |= set(e.untwisted.images[i].terms)
            terms = {}
            for mono in sorted(support):
                res = [(e.p, e.untwisted.images[i].terms.get(mono, 0)) for e in good]
                terms[mono] = rational_reconstruct(res[: len(used)], res[len(used):])
            images.append(Poly._from_raw(parent, terms))
    except WeylPoissonError as exc:
        return Reconstruction(None, used, checks, False, f"{type(exc).__name__}: {exc}")
    return Reconstruction(PolyMap(images), used, checks, True)
