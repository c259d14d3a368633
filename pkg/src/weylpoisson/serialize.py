"""JSON round-trips for the engine's domain types.

Terms are always emitted sorted lexicographically by exponent, so output is
byte-stable.  Parsers raise :class:`SchemaError` carrying a JSON pointer.
"""
from __future__ import annotations

import json
from typing import Any, Optional

from .center import CenterMap, PrimeProfile
from .errors import SchemaError, WeylPoissonError
from .poisson import Poly, PolyMap, PolyOneForm, PolynomialRing, poisson_ring
from .rings import Ring, ring_from_descriptor
from .tame import SymplecticMatrix, TameWord, Transvection, potential_ring
from .weyl import WeylAlgebra, WeylElement, WeylEndo

__all__ = [
    "dumps", "ring_to_json", "ring_from_json", "terms_to_json", "terms_from_json",
    "weyl_element_to_json", "weyl_element_from_json", "endo_to_json", "endo_from_json",
    "poly_to_json", "poly_from_json", "polymap_to_json", "polymap_from_json",
    "center_map_to_json", "one_form_to_json", "one_form_from_json",
    "tame_word_to_json", "tame_word_from_json", "prime_profile_to_json",
]


def dumps(obj: Any) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


def _ptr(path: str, key) -> str:
    key = str(key).replace("~", "~0").replace("/", "~1")
    return f"{path}/{key}"


def _get(obj, key, path, kind=None, default=...):
    if not isinstance(obj, dict):
        raise SchemaError("expected an object", path)
    if key not in obj:
        if default is not ...:
            return default
        raise SchemaError(f"missing field {key!r}", _ptr(path, key))
    value = obj[key]
    if kind is not None and not _is(value, kind):
        raise SchemaError(f"expected {kind.__name__ if isinstance(kind, type) else kind}", _ptr(path, key))
    return value


def _is(value, kind) -> bool:
    if kind is int:
        return isinstance(value, int) and not isinstance(value, bool)
    return isinstance(value, kind)


def ring_to_json(ring: Ring) -> dict:
    return ring.descriptor()


def ring_from_json(obj, path: str = "") -> Ring:
    if not isinstance(obj, dict):
        raise SchemaError("ring must be an object like {\"kind\": \"Q\"}", path)
    try:
        return ring_from_descriptor(obj)
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"bad ring descriptor: {exc}", path) from exc


def terms_to_json(terms: dict, ring: Ring) -> list:
    return [{"exp": list(e), "coeff": ring.to_json(c)} for e, c in sorted(terms.items())]


def terms_from_json(obj, nvars: int, ring: Ring, path: str) -> dict:
    if obj == "0":
        return {}
    if not isinstance(obj, list):
        raise SchemaError("terms must be a list", path)
    out: dict = {}
    for k, term in enumerate(obj):
        tp = _ptr(path, k)
        exp = _get(term, "exp", tp, list)
        if len(exp) != nvars or not all(_is(x, int) and x >= 0 for x in exp):
            raise SchemaError(f"exponent must be {nvars} non-negative integers", _ptr(tp, "exp"))
        raw = _get(term, "coeff", tp)
        try:
            c = ring.from_json(raw)
        except (ValueError, TypeError, ZeroDivisionError, WeylPoissonError) as exc:
            raise SchemaError(f"bad coefficient {raw!r}: {exc}", _ptr(tp, "coeff")) from exc
        e = tuple(exp)
        out[e] = ring.normalize(out[e] + c) if e in out else c
    return out


def _n_and_ring(obj, path, n=None, ring=None):
    if n is None:
        n = _get(obj, "n", path, int)
        if n < 1:
            raise SchemaError("n must be positive", _ptr(path, "n"))
    if ring is None:
        ring = ring_from_json(_get(obj, "ring", path), _ptr(path, "ring"))
    return n, ring


# -- Weyl side ------------------------------------------------------------------

def weyl_element_to_json(a: WeylElement) -> dict:
    return {"n": a.n, "ring": ring_to_json(a.ring), "terms": terms_to_json(a.terms, a.ring)}


def weyl_element_from_json(obj, path: str = "", *, n: Optional[int] = None,
                           ring: Optional[Ring] = None) -> WeylElement:
    """Parse an element; ``n``/``ring`` are defaults used when the object omits them."""
    if obj == "0" and n is not None and ring is not None:
        return WeylAlgebra(n, ring).zero()
    if not isinstance(obj, dict):
        raise SchemaError("expected an object with \"terms\"", path)
    n, ring = _n_and_ring(obj, path, None if "n" in obj else n, None if "ring" in obj else ring)
    terms = terms_from_json(_get(obj, "terms", path), 2 * n, ring, _ptr(path, "terms"))
    return WeylAlgebra(n, ring).element(terms)


def endo_to_json(f: WeylEndo) -> dict:
    out = {
        "n": f.n,
        "ring": ring_to_json(f.ring),
        "images": [terms_to_json(im.terms, f.ring) for im in f.images],
    }
    if f.claimed_inverse is not None:
        out["inverse"] = [terms_to_json(im.terms, f.ring) for im in f.claimed_inverse]
    return out


def _image_list(obj, key, n, ring, path, required=True):
    items = _get(obj, key, path, list, default=None if not required else ...)
    if items is None:
        return None
    if len(items) != 2 * n:
        raise SchemaError(f"expected {2 * n} images, got {len(items)}", _ptr(path, key))
    algebra = WeylAlgebra(n, ring)
    out = []
    for i, item in enumerate(items):
        ip = _ptr(_ptr(path, key), i)
        if isinstance(item, dict):
            item = _get(item, "terms", ip)
            ip = _ptr(ip, "terms")
        out.append(algebra.element(terms_from_json(item, 2 * n, ring, ip)))
    return out


def endo_from_json(obj, path: str = "", *, ring: Optional[Ring] = None) -> WeylEndo:
    n, ring = _n_and_ring(obj, path, None, ring)
    images = _image_list(obj, "images", n, ring, path)
    inverse = _image_list(obj, "inverse", n, ring, path, required=False)
    return WeylEndo(images, inverse)


# -- Poisson side ---------------------------------------------------------------

def poly_to_json(a: Poly) -> dict:
    return {
        "nvars": a.nvars,
        "names": list(a.parent.names),
        "ring": ring_to_json(a.ring),
        "terms": terms_to_json(a.terms, a.ring),
    }


def _parent_from_json(obj, path, parent=None, ring=None) -> PolynomialRing:
    if parent is not None:
        return parent
    ring = ring or ring_from_json(_get(obj, "ring", path), _ptr(path, "ring"))
    names = _get(obj, "names", path, list, default=None)
    if names is None:
        nvars = _get(obj, "nvars", path, int)
        names = [f"x{i + 1}" for i in range(nvars)]
    elif not all(isinstance(s, str) for s in names):
        raise SchemaError("names must be strings", _ptr(path, "names"))
    return PolynomialRing(ring, names)


def poly_from_json(obj, path: str = "", *, parent: Optional[PolynomialRing] = None) -> Poly:
    parent = _parent_from_json(obj, path, parent)
    terms = terms_from_json(_get(obj, "terms", path), parent.nvars, parent.ring, _ptr(path, "terms"))
    return parent.element(terms)


def polymap_to_json(g: PolyMap) -> dict:
    out = {
        "nvars": g.nvars,
        "names": list(g.parent.names),
        "ring": ring_to_json(g.ring),
        "images": [terms_to_json(im.terms, g.ring) for im in g.images],
    }
    if g.claimed_inverse is not None:
        out["inverse"] = [terms_to_json(im.terms, g.ring) for im in g.claimed_inverse]
    return out


def polymap_from_json(obj, path: str = "", *, parent: Optional[PolynomialRing] = None) -> PolyMap:
    if parent is None and isinstance(obj, dict) and "n" in obj and "nvars" not in obj and "names" not in obj:
        n = _get(obj, "n", path, int)
        parent = poisson_ring(n, ring_from_json(_get(obj, "ring", path), _ptr(path, "ring")))
    parent = _parent_from_json(obj, path, parent)

    def images(key, required):
        items = _get(obj, key, path, list, default=None if not required else ...)
        if items is None:
            return None
        if len(items) != parent.nvars:
            raise SchemaError(f"expected {parent.nvars} images", _ptr(path, key))
        return [parent.element(terms_from_json(it, parent.nvars, parent.ring, _ptr(_ptr(path, key), i)))
                for i, it in enumerate(items)]

    return PolyMap(images("images", True), images("inverse", False))


def center_map_to_json(cm: CenterMap) -> dict:
    return {"p": cm.p, "source_degree": cm.source_degree, "map": polymap_to_json(cm.map)}


def one_form_to_json(theta: PolyOneForm) -> dict:
    return {
        "nvars": theta.parent.nvars,
        "names": list(theta.parent.names),
        "ring": ring_to_json(theta.parent.ring),
        "components": [terms_to_json(c.terms, theta.parent.ring) for c in theta.components],
    }


def one_form_from_json(obj, path: str = "") -> PolyOneForm:
    if isinstance(obj, dict) and "n" in obj and "nvars" not in obj and "names" not in obj:
        parent = poisson_ring(_get(obj, "n", path, int), ring_from_json(_get(obj, "ring", path), _ptr(path, "ring")))
    else:
        parent = _parent_from_json(obj, path)
    comps = _get(obj, "components", path, list)
    if len(comps) != parent.nvars:
        raise SchemaError(f"expected {parent.nvars} components", _ptr(path, "components"))
    return PolyOneForm([
        parent.element(terms_from_json(c, parent.nvars, parent.ring, _ptr(_ptr(path, "components"), i)))
        for i, c in enumerate(comps)
    ])


# -- tame words -----------------------------------------------------------------

def tame_word_to_json(w: TameWord) -> dict:
    word = []
    for g in w.generators:
        if isinstance(g, SymplecticMatrix):
            word.append({"matrix": [[w.ring.to_json(v) for v in row] for row in g.matrix]})
        else:
            word.append({"transvection": {"terms": terms_to_json(g.F.terms, w.ring)}})
    return {"n": w.n, "ring": ring_to_json(w.ring), "word": word}


def tame_word_from_json(obj, path: str = "") -> TameWord:
    n, ring = _n_and_ring(obj, path)
    items = _get(obj, "word", path, list)
    gens = []
    for k, item in enumerate(items):
        ip = _ptr(_ptr(path, "word"), k)
        if not isinstance(item, dict) or len(item) != 1 or not ({"matrix", "transvection"} & set(item)):
            raise SchemaError("generator must be {\"matrix\": ...} or {\"transvection\": ...}", ip)
        if "matrix" in item:
            mp = _ptr(ip, "matrix")
            rows = item["matrix"]
            if not isinstance(rows, list) or len(rows) != 2 * n or any(
                    not isinstance(r, list) or len(r) != 2 * n for r in rows):
                raise SchemaError(f"matrix must be {2 * n}x{2 * n}", mp)
            try:
                mat = [[ring.from_json(v) for v in row] for row in rows]
            except (ValueError, TypeError, ZeroDivisionError, WeylPoissonError) as exc:
                raise SchemaError(f"bad matrix entry: {exc}", mp) from exc
            try:
                gens.append(SymplecticMatrix(mat, ring))
            except ValueError as exc:
                raise SchemaError(str(exc), mp) from exc
        else:
            tp = _ptr(ip, "transvection")
            F = poly_from_json(item["transvection"], tp, parent=potential_ring(n, ring))
            gens.append(Transvection(F))
    return TameWord(n, ring, gens)


# -- reports --------------------------------------------------------------------

def prime_profile_to_json(profile: PrimeProfile) -> dict:
    primes = []
    for e in profile.entries:
        item = {
            "p": e.p,
            "center_map": polymap_to_json(e.center_map.map) if e.center_map else None,
            "untwisted": polymap_to_json(e.untwisted.map) if e.untwisted else None,
            "degree_ok": bool(e.degree_ok),
        }
        if e.error:
            item["error"] = e.error
        primes.append(item)
    out = {"n": profile.n, "source": profile.source, "primes": primes}
    rec = profile.reconstruction
    if rec is not None:
        out["reconstruction"] = {
            "map": polymap_to_json(rec.map) if rec.map else None,
            "primes": rec.primes,
            "check_primes": rec.check_primes,
            "agrees": rec.agrees,
        }
        if rec.error:
            out["reconstruction"]["error"] = rec.error
    return out
