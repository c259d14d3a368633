"""Presentations ``A_{f,g}`` in characteristic ``p`` and substitution checks.

``A_{f,g}`` is generated over a base ring ``F_p[s_1..s_k]`` by ``xi, eta``
with ``[xi, eta] = 1``, ``xi^p = f`` and ``eta^p = g``.  Elements of a tensor
product of up to three presentations are stored in the basis
``prod_j xi_j^{a_j} eta_j^{b_j}`` (``0 <= a_j, b_j < p``) with base-ring
coefficients; distinct factors commute.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial
from typing import Mapping, Optional, Sequence

import numpy as np
import sympy
from sympy.parsing.sympy_parser import convert_xor, parse_expr, standard_transformations

from .errors import NormalizationFailure, RingMismatch
from .poisson import Poly, PolynomialRing
from .rings import PrimeField

__all__ = [
    "AzumayaPresentation", "TensorPresentation", "AzElement", "SubstitutionMap",
    "RelationResult", "SubstitutionReport", "TripleIsoReport", "MatrixRep",
    "base_ring", "parse_base", "verify_substitution", "verify_triple_iso",
    "matrix_rep", "alpha_presentation", "rank_mod_p",
]

MAX_FACTORS = 3
_TRANSFORMS = standard_transformations + (convert_xor,)


def base_ring(p: int, names: Sequence[str] = ("s",)) -> PolynomialRing:
    return PolynomialRing(PrimeField(p), list(names))


def _sympy_terms(text: str, commutative: Sequence[str], noncommutative: Sequence[str]):
    """Expand ``text`` and yield ``(rational, {comm_name: exp}, [(nc_name, exp), ...])``."""
    local = {name: sympy.Symbol(name) for name in commutative}
    local.update({name: sympy.Symbol(name, commutative=False) for name in noncommutative})
    try:
        expr = parse_expr(str(text), local_dict=local, transformations=_TRANSFORMS, evaluate=True)
    except Exception as exc:  # sympy raises a variety of parse errors
        raise NormalizationFailure(f"cannot parse {text!r}: {exc}") from exc
    if not isinstance(expr, sympy.Expr):
        raise NormalizationFailure(f"cannot parse {text!r} as an expression")
    unknown = {s.name for s in expr.free_symbols} - set(local)
    if unknown:
        raise NormalizationFailure(f"unknown symbols {sorted(unknown)} in {text!r}")
    expr = sympy.expand(expr)
    for term in sympy.Add.make_args(expr):
        if term == 0:
            continue
        c_part, nc_part = term.args_cnc()
        coeff = Fraction(1)
        comm: dict = {}
        for factor in c_part:
            base, exp = factor.as_base_exp()
            if base.is_Rational and exp == 1:
                coeff *= Fraction(int(base.p), int(base.q))
            elif base.is_Symbol and exp.is_Integer and exp > 0:
                comm[base.name] = comm.get(base.name, 0) + int(exp)
            else:
                raise NormalizationFailure(f"unsupported factor {factor} in {text!r}")
        word = []
        for factor in nc_part:
            base, exp = factor.as_base_exp()
            if not (base.is_Symbol and exp.is_Integer and exp > 0):
                raise NormalizationFailure(f"unsupported factor {factor} in {text!r}")
            word.append((base.name, int(exp)))
        yield coeff, comm, word


def parse_base(text, parent: PolynomialRing) -> Poly:
    """Parse a commutative polynomial in the base variables, e.g. ``"s1*s2 + 2"``."""
    if isinstance(text, Poly):
        return text
    if isinstance(text, int):
        return parent.constant(text)
    names = list(parent.names)
    out = parent.zero()
    for coeff, comm, word in _sympy_terms(text, names, ()):
        if word:
            raise NormalizationFailure(f"noncommutative factor in base element {text!r}")
        e = tuple(comm.get(nm, 0) for nm in names)
        out = out + parent.element({e: coeff})
    return out


@dataclass(frozen=True)
class AzumayaPresentation:
    f: Poly
    g: Poly

    def __post_init__(self):
        self.f._check(self.g)
        if not isinstance(self.f.ring, PrimeField):
            raise RingMismatch("presentation parameters must live over F_p[s...]")

    @property
    def p(self) -> int:
        return self.f.ring.p

    @property
    def base(self) -> PolynomialRing:
        return self.f.parent

    def __str__(self):
        return f"A_{{{self.f}, {self.g}}}"


@lru_cache(maxsize=None)
def _factor_product(a: int, b: int, c: int, d: int, p: int) -> tuple:
    """``xi^a eta^b * xi^c eta^d`` as ``(coeff, a', b', f_power, g_power)`` terms."""
    out = []
    for k in range(min(b, c) + 1):
        w = comb(b, k) * comb(c, k) * factorial(k) * (-1) ** k % p
        if not w:
            continue
        x, y = a + c - k, b + d - k
        out.append((w, x % p, y % p, x // p, y // p))
    return tuple(out)


class TensorPresentation:
    """``A_{f_1,g_1} (x) ... (x) A_{f_k,g_k}`` over a shared base, ``k <= 3``."""

    def __init__(self, factors: Sequence[AzumayaPresentation]):
        factors = tuple(factors)
        if not 1 <= len(factors) <= MAX_FACTORS:
            raise ValueError(f"between 1 and {MAX_FACTORS} tensor factors are supported")
        base = factors[0].base
        for fac in factors:
            if fac.base != base:
                raise RingMismatch("tensor factors must share the base ring")
        self.factors = factors
        self.base = base
        self.p = factors[0].p
        self.k = len(factors)
        self._fpow = [[base.one()] for _ in factors]
        self._gpow = [[base.one()] for _ in factors]

    def __eq__(self, other):
        return isinstance(other, TensorPresentation) and self.factors == other.factors

    def __hash__(self):
        return hash(tuple((f.f, f.g) for f in self.factors))

    def generator_names(self) -> list[str]:
        if self.k == 1:
            return ["xi", "eta"]
        return [f"{s}{j + 1}" for j in range(self.k) for s in ("xi", "eta")]

    def _pow(self, table, j, value, q):
        while len(table[j]) <= q:
            table[j].append(table[j][-1] * value)
        return table[j][q]

    def element(self, terms: Mapping) -> "AzElement":
        out = {}
        for e, c in terms.items():
            e = tuple(e)
            if len(e) != 2 * self.k or any(not 0 <= x < self.p for x in e):
                raise NormalizationFailure(f"basis exponent {e} out of range")
            c = c if isinstance(c, Poly) else self.base.constant(c)
            out[e] = out[e] + c if e in out else c
        return AzElement(self, {e: c for e, c in out.items() if not c.is_zero()})

    def scalar(self, c) -> "AzElement":
        return self.element({(0,) * (2 * self.k): c})

    def zero(self) -> "AzElement":
        return AzElement(self, {})

    def one(self) -> "AzElement":
        return self.scalar(1)

    def _gen(self, j: int, which: int, power: int = 1) -> "AzElement":
        if not 0 <= j < self.k:
            raise NormalizationFailure(f"no tensor factor {j + 1}")
        out = self.one()
        e = [0] * (2 * self.k)
        e[2 * j + which] = 1
        g = self.element({tuple(e): 1})
        for _ in range(power):
            out = out * g
        return out

    def xi(self, j: int = 0) -> "AzElement":
        return self._gen(j, 0)

    def eta(self, j: int = 0) -> "AzElement":
        return self._gen(j, 1)

    def parse(self, text) -> "AzElement":
        """Parse e.g. ``"xi1 - s*eta1^2"``; generator order is kept as written."""
        if isinstance(text, AzElement):
            return text
        lookup = {}
        for j in range(self.k):
            for which, stem in enumerate(("xi", "eta")):
                lookup[f"{stem}{j + 1}"] = (j, which)
                if self.k == 1:
                    lookup[stem] = (j, which)
        out = self.zero()
        names = list(self.base.names)
        for coeff, comm, word in _sympy_terms(text, names, list(lookup)):
            e = tuple(comm.get(nm, 0) for nm in names)
            term = self.scalar(self.base.element({e: coeff}))
            for name, k in word:
                j, which = lookup[name]
                term = term * self._gen(j, which, k)
            out = out + term
        return out

    def _mul_mono(self, m1, m2):
        per_factor = [
            _factor_product(m1[2 * j], m1[2 * j + 1], m2[2 * j], m2[2 * j + 1], self.p)
            for j in range(self.k)
        ]
        for combo in itertools.product(*per_factor):
            w = 1
            coeff = None
            exps = []
            for j, (cw, x, y, qf, qg) in enumerate(combo):
                w = w * cw % self.p
                exps += (x, y)
                for table, val, q in ((self._fpow, self.factors[j].f, qf), (self._gpow, self.factors[j].g, qg)):
                    if q:
                        t = self._pow(table, j, val, q)
                        coeff = t if coeff is None else coeff * t
            yield tuple(exps), w, coeff

    def __repr__(self):
        return " (x) ".join(str(f) for f in self.factors)


class AzElement:
    __slots__ = ("algebra", "terms")

    def __init__(self, algebra: TensorPresentation, terms: dict):
        self.algebra = algebra
        self.terms = terms

    def _lift(self, other):
        if isinstance(other, AzElement):
            if other.algebra != self.algebra:
                raise RingMismatch("elements of different presentations")
            return other
        return self.algebra.scalar(other)

    def __add__(self, other):
        other = self._lift(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out[e] + c if e in out else c
        return AzElement(self.algebra, {e: c for e, c in out.items() if not c.is_zero()})

    __radd__ = __add__

    def __neg__(self):
        return AzElement(self.algebra, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        other = self._lift(other)
        alg = self.algebra
        acc: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                base = c1 * c2
                for e, w, extra in alg._mul_mono(e1, e2):
                    c = base * w if extra is None else base * extra * w
                    acc[e] = acc[e] + c if e in acc else c
        return AzElement(alg, {e: c for e, c in acc.items() if not c.is_zero()})

    def __rmul__(self, other):
        return self._lift(other) * self

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power")
        out = self.algebra.one()
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        if not isinstance(other, AzElement):
            try:
                other = self._lift(other)
            except (RingMismatch, TypeError):
                return NotImplemented
        return self.algebra == other.algebra and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def scalar_part(self) -> Optional[Poly]:
        """The base-ring value if this element is a scalar, else ``None``."""
        zero = (0,) * (2 * self.algebra.k)
        if set(self.terms) - {zero}:
            return None
        return self.terms.get(zero, self.algebra.base.zero())

    def __str__(self):
        if not self.terms:
            return "0"
        names = self.algebra.generator_names()
        parts = []
        for e, c in sorted(self.terms.items()):
            mono = "*".join(nm if k == 1 else f"{nm}^{k}" for nm, k in zip(names, e) if k)
            cs = str(c)
            if not mono:
                parts.append(cs)
            elif cs == "1":
                parts.append(mono)
            else:
                parts.append(f"({cs})*{mono}" if len(c.terms) > 1 else f"{cs}*{mono}")
        return " + ".join(parts)

    __repr__ = __str__


def commutator(a: AzElement, b: AzElement) -> AzElement:
    return a * b - b * a


@dataclass
class SubstitutionMap:
    """Images of the generators of ``source`` inside ``target``.

    ``images`` maps ``("xi", j)`` / ``("eta", j)`` (0-based factor index) to
    target elements; missing generators are an error.
    """

    source: TensorPresentation
    target: TensorPresentation
    images: dict

    def __post_init__(self):
        if self.source.base != self.target.base:
            raise RingMismatch("source and target must share the base ring")
        fixed = {}
        for j in range(self.source.k):
            for stem in ("xi", "eta"):
                key = (stem, j)
                if key not in self.images:
                    raise NormalizationFailure(f"no image for {stem}{j + 1}")
                fixed[key] = self.target.parse(self.images[key])
        self.images = fixed

    @classmethod
    def from_strings(cls, source, target, images: Mapping[str, str]) -> "SubstitutionMap":
        parsed = {}
        for name, text in images.items():
            stem = "xi" if name.startswith("xi") else "eta" if name.startswith("eta") else None
            suffix = name[len(stem):] if stem else ""
            if stem is None or (suffix and not suffix.isdigit()):
                raise NormalizationFailure(f"bad generator name {name!r}")
            parsed[(stem, int(suffix) - 1 if suffix else 0)] = text
        return cls(source, target, parsed)


@dataclass
class RelationResult:
    relation: str
    computed: AzElement
    expected: list  # candidate values, first is the stated one
    verdict: str  # "pass", "sign", "fail"
    defect: AzElement

    @property
    def ok(self):
        return self.verdict == "pass"


@dataclass
class SubstitutionReport:
    relations: list = field(default_factory=list)

    @property
    def ok(self):
        return all(r.ok for r in self.relations)

    def __bool__(self):
        return self.ok


def _judge(name, computed: AzElement, expected: AzElement, sign_variant: bool) -> RelationResult:
    candidates = [expected]
    if sign_variant and -expected != expected:
        candidates.append(-expected)
    if computed == expected:
        verdict = "pass"
    elif sign_variant and computed == -expected:
        verdict = "sign"
    else:
        verdict = "fail"
    return RelationResult(name, computed, candidates, verdict, computed - expected)


def _relation_table(m: SubstitutionMap, sign_variants: bool = False) -> SubstitutionReport:
    src, tgt = m.source, m.target
    p = src.p
    report = SubstitutionReport()
    xi = [m.images[("xi", j)] for j in range(src.k)]
    eta = [m.images[("eta", j)] for j in range(src.k)]
    suffix = (lambda j: "") if src.k == 1 else (lambda j: str(j + 1))
    for j, fac in enumerate(src.factors):
        s = suffix(j)
        report.relations.append(_judge(f"[xi{s}, eta{s}] = 1", commutator(xi[j], eta[j]), tgt.one(), False))
        report.relations.append(_judge(f"xi{s}^{p} = f{s}", xi[j] ** p, tgt.scalar(fac.f), sign_variants))
        report.relations.append(_judge(f"eta{s}^{p} = g{s}", eta[j] ** p, tgt.scalar(fac.g), sign_variants))
    gens = [(f"xi{suffix(j)}", xi[j]) for j in range(src.k)] + [(f"eta{suffix(j)}", eta[j]) for j in range(src.k)]
    for (na, a), (nb, b) in itertools.combinations(gens, 2):
        if na[2:] == nb[3:] and na.startswith("xi") and nb.startswith("eta"):
            continue  # the defining commutator, already listed
        report.relations.append(_judge(f"[{na}, {nb}] = 0", commutator(a, b), tgt.zero(), False))
    return report


def verify_substitution(m: SubstitutionMap, sign_variants: bool = False) -> SubstitutionReport:
    """Check that the images satisfy every relation of the source presentation."""
    return _relation_table(m, sign_variants)


@dataclass
class TripleIsoReport:
    p: int
    readings: dict  # reading label -> SubstitutionReport

    @property
    def sign_discrepancies(self):
        return {k: [r.relation for r in rep.relations if r.verdict == "sign"] for k, rep in self.readings.items()}

    @property
    def structural_failures(self):
        return {k: [r.relation for r in rep.relations if r.verdict == "fail"] for k, rep in self.readings.items()}


TRIPLE_FORMULAS = {
    "xi1": "xi1", "xi2": "xi2", "xi3": "xi3",
    "eta1": "eta1 - xi2*xi3", "eta2": "eta2 - xi3*xi1", "eta3": "eta3 - xi1*xi2",
}


def verify_triple_iso(f, g, h, p: Optional[int] = None, base: Optional[PolynomialRing] = None) -> TripleIsoReport:
    """Check ``xi_i' = xi_i``, ``eta_1' = eta_1 - xi_2 xi_3`` (cyclically) from
    ``A_{f,0} (x) A_{g,0} (x) A_{h,0}`` against the two candidate targets

    * ``"A_{h,fg}"``: ``A_{f,gh} (x) A_{g,hf} (x) A_{h,fg}``
    * ``"A_{fh,g}"``: ``A_{f,gh} (x) A_{g,hf} (x) A_{fh,g}``

    p-th power relations are compared against both signs.
    """
    if base is None:
        base = next((x.parent for x in (f, g, h) if isinstance(x, Poly)), None)
        if base is None:
            if p is None:
                raise ValueError("need p or a base ring")
            base = base_ring(p, ("s1", "s2", "s3"))
    f, g, h = (parse_base(x, base) for x in (f, g, h))
    p = base.ring.p
    zero = base.zero()
    target = TensorPresentation([AzumayaPresentation(f, zero), AzumayaPresentation(g, zero), AzumayaPresentation(h, zero)])
    readings = {}
    for label, third in (("A_{h,fg}", (h, f * g)), ("A_{fh,g}", (f * h, g))):
        source = TensorPresentation([
            AzumayaPresentation(f, g * h), AzumayaPresentation(g, h * f), AzumayaPresentation(*third),
        ])
        sm = SubstitutionMap.from_strings(source, target, TRIPLE_FORMULAS)
        readings[label] = _relation_table(sm, sign_variants=True)
    return TripleIsoReport(p, readings)


def rank_mod_p(rows, p: int) -> int:
    a = [[int(v) % p for v in row] for row in rows]
    rank = 0
    ncols = len(a[0]) if a else 0
    for col in range(ncols):
        piv = next((r for r in range(rank, len(a)) if a[r][col]), None)
        if piv is None:
            continue
        a[rank], a[piv] = a[piv], a[rank]
        inv = pow(a[rank][col], -1, p)
        a[rank] = [v * inv % p for v in a[rank]]
        for r in range(len(a)):
            if r != rank and a[r][col]:
                fct = a[r][col]
                a[r] = [(v - fct * w) % p for v, w in zip(a[r], a[rank])]
        rank += 1
    return rank


@dataclass
class MatrixRep:
    p: int
    X: np.ndarray
    D: np.ndarray
    commutator_is_identity: bool
    x_nilpotent: bool
    d_nilpotent: bool
    span_rank: int
    trace_commutator: int

    @property
    def ok(self):
        return (self.commutator_is_identity and self.x_nilpotent and self.d_nilpotent
                and self.span_rank == self.p ** 2 and self.trace_commutator == 0)


def matrix_rep(p: int) -> MatrixRep:
    """``x`` and ``d/dx`` on ``F_p[x]/(x^p)`` in the basis ``1, x, ..., x^{p-1}``
    (column ``j`` is the image of ``x^j``)."""
    PrimeField(p)  # validates p
    X = np.zeros((p, p), dtype=np.int64)
    D = np.zeros((p, p), dtype=np.int64)
    for j in range(p - 1):
        X[j + 1, j] = 1
    for j in range(1, p):
        D[j - 1, j] = j % p
    comm = (D @ X - X @ D) % p
    power = lambda m: np.linalg.matrix_power(m, p) % p  # entries stay tiny
    products = []
    xi = np.eye(p, dtype=np.int64)
    for _ in range(p):
        dj = np.eye(p, dtype=np.int64)
        for _ in range(p):
            products.append((xi @ dj % p).ravel())
            dj = dj @ D % p
        xi = xi @ X % p
    return MatrixRep(
        p=p, X=X, D=D,
        commutator_is_identity=bool((comm == np.eye(p, dtype=np.int64)).all()),
        x_nilpotent=not power(X).any(),
        d_nilpotent=not power(D).any(),
        span_rank=rank_mod_p(products, p),
        trace_commutator=int(np.trace(comm)) % p,
    )


def alpha_presentation(pairs: Sequence, p: Optional[int] = None,
                       base: Optional[PolynomialRing] = None) -> list[AzumayaPresentation]:
    """``sum_i f_i dg_i`` given as ``[(f_i, g_i), ...]`` -> ``[A_{f_i,g_i}, ...]``."""
    out = []
    if base is None:
        base = next((x.parent for pair in pairs for x in pair if isinstance(x, Poly)), None)
    if base is None and pairs:
        if p is None:
            raise ValueError("need p or a base ring for string parameters")
        names = sorted({nm for pair in pairs for x in pair for nm in re.findall(r"[A-Za-z_]\w*", str(x))})
        base = base_ring(p, names or ("s",))
    for f, g in pairs:
        out.append(AzumayaPresentation(parse_base(f, base), parse_base(g, base)))
    return out
