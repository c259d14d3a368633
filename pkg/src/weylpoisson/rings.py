"""Exact coefficient rings.

Five kinds of ring are supported: the integers, the rationals, ``Z/mZ``,
prime fields ``F_p`` and univariate polynomial rings ``F_p[t]``.  Ring
objects are immutable descriptors; ring *elements* are plain Python
values (``int`` for Z, Z/m and F_p, :class:`fractions.Fraction` for Q,
:class:`FpPoly` for ``F_p[t]``) so that algebra code can use ``+`` and
``*`` directly and call :meth:`Ring.normalize` once at the end.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from sympy import isprime
from sympy.ntheory.modular import crt

from .errors import NoReconstruction, NonInvertibleDenominator, NotAPthPower, RingMismatch

__all__ = [
    "Ring", "Integers", "Rationals", "IntegersMod", "PrimeField", "PolyOverPrimeField",
    "FpPoly", "ZZ", "QQ", "lift_to_mod_p2", "inverse_frobenius", "rational_reconstruct",
    "ring_from_descriptor",
]


class FpPoly:
    """Immutable element of ``F_p[t]``; ``coeffs[k]`` is the coefficient of ``t^k``."""

    __slots__ = ("p", "coeffs")

    def __init__(self, p: int, coeffs: Iterable[int] = ()):
        c = [int(x) % p for x in coeffs]
        while c and c[-1] == 0:
            c.pop()
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "coeffs", tuple(c))

    def __setattr__(self, name, value):
        raise AttributeError("FpPoly is immutable")

    @classmethod
    def from_dict(cls, p, mapping):
        if not mapping:
            return cls(p)
        top = max(mapping)
        c = [0] * (top + 1)
        for k, v in mapping.items():
            c[k] = (c[k] + v) % p
        return cls(p, c)

    def _coerce(self, other):
        if isinstance(other, FpPoly):
            if other.p != self.p:
                raise RingMismatch(f"F_{self.p}[t] vs F_{other.p}[t]")
            return other
        if isinstance(other, int):
            return FpPoly(self.p, (other,))
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, v in enumerate(b):
            out[i] += v
        return FpPoly(self.p, out)

    __radd__ = __add__

    def __neg__(self):
        return FpPoly(self.p, (-v for v in self.coeffs))

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, int):
            return FpPoly(self.p, (v * other for v in self.coeffs))
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        a, b = self.coeffs, other.coeffs
        if not a or not b:
            return FpPoly(self.p)
        out = [0] * (len(a) + len(b) - 1)
        for i, u in enumerate(a):
            if u:
                for j, v in enumerate(b):
                    out[i + j] += u * v
        return FpPoly(self.p, out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power")
        result, base = FpPoly(self.p, (1,)), self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __bool__(self):
        return bool(self.coeffs)

    def __eq__(self, other):
        if isinstance(other, int):
            other = FpPoly(self.p, (other,))
        if not isinstance(other, FpPoly):
            return NotImplemented
        return self.p == other.p and self.coeffs == other.coeffs

    def __hash__(self):
        if len(self.coeffs) <= 1:
            return hash(self.coeffs[0] if self.coeffs else 0)
        return hash((self.p, self.coeffs))

    def degree(self) -> int:
        return len(self.coeffs) - 1

    def as_dict(self) -> dict[int, int]:
        return {k: v for k, v in enumerate(self.coeffs) if v}

    def __repr__(self):
        return f"FpPoly({self.p}, {list(self.coeffs)})"

    def __str__(self):
        return self.format("t")

    def format(self, var: str) -> str:
        if not self.coeffs:
            return "0"
        parts = []
        for k in range(len(self.coeffs) - 1, -1, -1):
            v = self.coeffs[k]
            if not v:
                continue
            mono = "" if k == 0 else (var if k == 1 else f"{var}^{k}")
            if not mono:
                parts.append(str(v))
            else:
                parts.append(mono if v == 1 else f"{v}*{mono}")
        return " + ".join(parts)


class Ring:
    """Common interface of the coefficient ring descriptors."""

    characteristic: int = 0

    @property
    def zero(self):
        return self.coerce(0)

    @property
    def one(self):
        return self.coerce(1)

    def coerce(self, x):
        raise NotImplementedError

    def __call__(self, x):
        return self.coerce(x)

    def normalize(self, v):
        return v

    def is_zero(self, v) -> bool:
        return not v

    def inv(self, v):
        raise NonInvertibleDenominator(f"{v} is not invertible in {self}")

    def divide_int(self, v, k: int):
        """Return ``v / k`` or raise :class:`NonInvertibleDenominator`."""
        if self.is_zero(v):
            return self.zero
        return self.normalize(v * self.inv(self.coerce(k)))

    def frobenius(self, v):
        raise TypeError(f"{self} has no Frobenius endomorphism")

    def reduce(self, v, target: "Ring"):
        """Image of ``v`` under the canonical map ``self -> target``."""
        if target == self:
            return v
        return target.coerce(v)

    def random(self, rng: random.Random, height: int = 3):
        return self.coerce(rng.randint(-height, height))

    def to_json(self, v):
        return str(v)

    def from_json(self, obj):
        if isinstance(obj, bool) or not isinstance(obj, (str, int)):
            raise ValueError(f"expected decimal string, got {obj!r}")
        return self.coerce(int(obj))

    def format(self, v) -> str:
        return str(v)

    def descriptor(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Integers(Ring):
    characteristic = 0

    def coerce(self, x):
        if isinstance(x, Fraction):
            if x.denominator != 1:
                raise NonInvertibleDenominator(f"{x} is not an integer")
            return x.numerator
        if isinstance(x, int):
            return int(x)
        raise RingMismatch(f"cannot coerce {x!r} into Z")

    def inv(self, v):
        if v in (1, -1):
            return v
        raise NonInvertibleDenominator(f"{v} is not a unit in Z")

    def divide_int(self, v, k):
        q, r = divmod(v, k)
        if r:
            raise NonInvertibleDenominator(f"{v} is not divisible by {k} in Z")
        return q

    def descriptor(self):
        return {"kind": "Z"}

    def __str__(self):
        return "Z"


@dataclass(frozen=True)
class Rationals(Ring):
    characteristic = 0

    def coerce(self, x):
        if isinstance(x, (int, Fraction)):
            return Fraction(x)
        raise RingMismatch(f"cannot coerce {x!r} into Q")

    def normalize(self, v):
        return Fraction(v)

    def inv(self, v):
        if not v:
            raise NonInvertibleDenominator("division by zero in Q")
        return 1 / Fraction(v)

    def random(self, rng, height=3):
        den = rng.randint(1, height)
        return Fraction(rng.randint(-height, height), den)

    def to_json(self, v):
        v = Fraction(v)
        return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"

    def from_json(self, obj):
        if isinstance(obj, bool) or not isinstance(obj, (str, int)):
            raise ValueError(f"expected rational string, got {obj!r}")
        return Fraction(obj)

    format = to_json

    def descriptor(self):
        return {"kind": "Q"}

    def __str__(self):
        return "Q"


def _mod_inverse(v: int, m: int) -> int:
    try:
        return pow(v, -1, m)
    except ValueError:
        raise NonInvertibleDenominator(f"{v} is not invertible modulo {m}") from None


@dataclass(frozen=True)
class IntegersMod(Ring):
    m: int

    def __post_init__(self):
        if self.m < 2:
            raise ValueError("modulus must be >= 2")

    @property
    def characteristic(self):
        return self.m

    def coerce(self, x):
        if isinstance(x, Fraction):
            return x.numerator * _mod_inverse(x.denominator, self.m) % self.m
        if isinstance(x, int):
            return x % self.m
        raise RingMismatch(f"cannot coerce {x!r} into Z/{self.m}")

    def normalize(self, v):
        return v % self.m

    def inv(self, v):
        return _mod_inverse(v, self.m)

    def random(self, rng, height=3):
        return rng.randrange(self.m)

    def reduce(self, v, target):
        if isinstance(target, (IntegersMod, PrimeField)):
            q = target.characteristic
            if self.m % q:
                raise RingMismatch(f"no canonical map Z/{self.m} -> {target}")
            return v % q
        return super().reduce(v, target)

    def descriptor(self):
        return {"kind": "Zmod", "m": self.m}

    def __str__(self):
        return f"Z/{self.m}"


@dataclass(frozen=True)
class PrimeField(Ring):
    p: int

    def __post_init__(self):
        if not isprime(self.p):
            raise ValueError(f"{self.p} is not prime")

    @property
    def characteristic(self):
        return self.p

    def coerce(self, x):
        if isinstance(x, Fraction):
            return x.numerator * _mod_inverse(x.denominator, self.p) % self.p
        if isinstance(x, int):
            return x % self.p
        raise RingMismatch(f"cannot coerce {x!r} into F_{self.p}")

    def normalize(self, v):
        return v % self.p

    def inv(self, v):
        return _mod_inverse(v, self.p)

    def frobenius(self, v):
        return pow(v, self.p, self.p)

    def random(self, rng, height=3):
        return rng.randrange(self.p)

    def reduce(self, v, target):
        if isinstance(target, PolyOverPrimeField) and target.p == self.p:
            return FpPoly(self.p, (v,))
        return super().reduce(v, target)

    def descriptor(self):
        return {"kind": "Fp", "p": self.p}

    def __str__(self):
        return f"F_{self.p}"


@dataclass(frozen=True)
class PolyOverPrimeField(Ring):
    p: int
    var: str = "t"

    def __post_init__(self):
        if not isprime(self.p):
            raise ValueError(f"{self.p} is not prime")

    @property
    def characteristic(self):
        return self.p

    @property
    def base_field(self) -> PrimeField:
        return PrimeField(self.p)

    def coerce(self, x):
        if isinstance(x, FpPoly):
            if x.p != self.p:
                raise RingMismatch(f"F_{x.p}[t] element in {self}")
            return x
        if isinstance(x, Fraction):
            x = x.numerator * _mod_inverse(x.denominator, self.p)
        if isinstance(x, int):
            return FpPoly(self.p, (x,))
        raise RingMismatch(f"cannot coerce {x!r} into {self}")

    def gen(self) -> FpPoly:
        return FpPoly(self.p, (0, 1))

    def inv(self, v):
        if len(v.coeffs) == 1:
            return FpPoly(self.p, (_mod_inverse(v.coeffs[0], self.p),))
        raise NonInvertibleDenominator(f"{v} is not a unit in {self}")

    def frobenius(self, v):
        out = {}
        for k, c in v.as_dict().items():
            out[k * self.p] = c
        return FpPoly.from_dict(self.p, out)

    def random(self, rng, height=2):
        return FpPoly(self.p, (rng.randrange(self.p) for _ in range(height + 1)))

    def to_json(self, v):
        return {str(k): str(c) for k, c in sorted(v.as_dict().items())}

    def from_json(self, obj):
        if isinstance(obj, (int, str)) and not isinstance(obj, bool):
            return self.coerce(int(obj))
        if not isinstance(obj, dict):
            raise ValueError(f"expected {{exponent: coefficient}} map, got {obj!r}")
        mapping = {}
        for k, c in obj.items():
            e = int(k)
            if e < 0:
                raise ValueError(f"negative exponent {k}")
            mapping[e] = mapping.get(e, 0) + int(c)
        return FpPoly.from_dict(self.p, mapping)

    def format(self, v):
        s = v.format(self.var)
        return f"({s})" if " " in s else s

    def descriptor(self):
        return {"kind": "FpPoly", "p": self.p, "var": self.var}

    def __str__(self):
        return f"F_{self.p}[{self.var}]"


ZZ = Integers()
QQ = Rationals()


def ring_from_descriptor(d: dict) -> Ring:
    kind = d.get("kind")
    if kind == "Z":
        return ZZ
    if kind == "Q":
        return QQ
    if kind == "Zmod":
        return IntegersMod(int(d["m"]))
    if kind == "Fp":
        return PrimeField(int(d["p"]))
    if kind == "FpPoly":
        return PolyOverPrimeField(int(d["p"]), d.get("var", "t"))
    raise ValueError(f"unknown ring kind {kind!r}")


def lift_to_mod_p2(c: int, p: int) -> tuple[IntegersMod, int]:
    """Canonical lift of ``c`` in ``F_p`` to ``Z/p^2``.

    The representative in ``[0, p)`` is its own lift; returns the target
    ring together with the lifted residue.
    """
    c = int(c) % p
    return IntegersMod(p * p), c


def inverse_frobenius(ring: Ring, c):
    """Return ``d`` with ``d**p == c``.

    Over ``F_p`` this is the identity.  Over ``F_p[t]`` every exponent of
    ``c`` must be divisible by ``p`` and ``t^(pk)`` maps to ``t^k``.
    """
    if isinstance(ring, PrimeField):
        return ring.normalize(c)
    if isinstance(ring, PolyOverPrimeField):
        p = ring.p
        out = {}
        for k, v in c.as_dict().items():
            if k % p:
                raise NotAPthPower(f"{ring.format(c)} has exponent {k} not divisible by {p}")
            out[k // p] = v
        return FpPoly.from_dict(p, out)
    raise TypeError(f"inverse Frobenius undefined over {ring}")


def _wang(u: int, m: int) -> Fraction:
    """Half-extended Euclid: the unique a/b = u mod m with 2a^2 <= m, 2b^2 <= m."""
    r0, r1 = m, u % m
    t0, t1 = 0, 1
    while 2 * r1 * r1 > m:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        t0, t1 = t1, t0 - q * t1
    a, b = r1, t1
    if b == 0 or 2 * b * b > m or math.gcd(b, m) != 1:
        raise NoReconstruction(f"no rational with bounded height is congruent to {u} mod {m}")
    if b < 0:
        a, b = -a, -b
    return Fraction(a, b)


def rational_reconstruct(
    residues: Sequence[tuple[int, int]],
    checks: Sequence[tuple[int, int]] = (),
) -> Fraction:
    """Recover a rational from its residues modulo distinct primes.

    ``residues`` are ``(prime, residue)`` pairs used for Chinese remaindering;
    ``checks`` are further pairs the result must reduce to.  The result
    ``a/b`` satisfies ``|a|, b <= sqrt(M/2)`` with ``M`` the product of the
    reconstruction primes.
    """
    primes = [int(p) for p, _ in residues]
    if len(set(primes)) != len(primes) or len(primes) < 2:
        raise ValueError("need at least two distinct primes")
    for p in primes + [int(p) for p, _ in checks]:
        if not isprime(p):
            raise ValueError(f"{p} is not prime")
    u, m = crt(primes, [int(r) % p for p, r in residues])
    value = _wang(int(u), int(m))
    for p, r in checks:
        if value.denominator % p == 0:
            raise NoReconstruction(f"{value} has denominator divisible by check prime {p}")
        if PrimeField(p).coerce(value) != int(r) % p:
            raise NoReconstruction(f"{value} fails the check modulo {p}")
    return value
