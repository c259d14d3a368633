"""Command-line interface.

Exit codes: 0 when every check passes, 1 when a verification fails, 2 for
malformed input or usage errors.  Inputs are JSON files (``-`` or no path
reads stdin); outputs are JSON (``--format json``, the default) or text.
"""
from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, Sequence

from . import serialize as ser
from .azumaya import (
    AzumayaPresentation, SubstitutionMap, TensorPresentation, base_ring, matrix_rep, parse_base,
    verify_substitution, verify_triple_iso,
)
from .center import (
    center_coords, center_map, center_poisson_bracket, center_ring, char_p, degree_check,
    psi_profile, untwist_frobenius_map, CenterMap,
)
from .errors import (
    IndexMismatch, NormalizationFailure, RelationCheckFailed, RingMismatch, SchemaError,
    WeylPoissonError,
)
from .poisson import check_symplecto, primitive_of_exact
from .rings import PrimeField
from .suite import SuiteConfig, run_suite
from .tame import correspondence_check, eval_word_poisson, eval_word_weyl, kernel_evidence
from .weyl import apply_endo, commutator

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2

# errors that mean "the input was malformed" rather than "a check failed"
_INPUT_ERRORS = (SchemaError, IndexMismatch, RingMismatch, NormalizationFailure, json.JSONDecodeError)


class UsageError(Exception):
    pass


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def _read_json(path: Optional[str]):
    if path in (None, "-"):
        text = sys.stdin.read()
    else:
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise UsageError(f"cannot read {path}: {exc}") from exc
    return json.loads(text)


def _field(obj, key):
    if not isinstance(obj, dict) or key not in obj:
        raise SchemaError(f"missing field {key!r}", f"/{key}")
    return obj[key]


# -- text rendering -----------------------------------------------------------------

def _scalar(v) -> str:
    return "-" if v is None else str(v)


def _text(obj, indent=0, names=None) -> str:
    pad = "  " * indent
    if isinstance(obj, dict):
        if "terms" in obj and "ring" in obj and len(obj) <= 4:
            return pad + _terms_text(obj["terms"], obj.get("names"))
        names = obj.get("names", names)
        lines = []
        for k, v in obj.items():
            if isinstance(v, (dict, list)) and v and not _flat(v):
                lines.append(f"{pad}{k}:")
                lines.append(_text(v, indent + 1, names))
            else:
                lines.append(f"{pad}{k}: {_inline(v, names)}")
        return "\n".join(lines)
    if isinstance(obj, list):
        if _is_terms(obj):
            return pad + _terms_text(obj, names)
        lines = []
        for v in obj:
            if isinstance(v, (dict, list)) and not _flat(v):
                body = _text(v, indent + 1, names)
                lines.append(f"{pad}- " + body.lstrip())
            else:
                lines.append(f"{pad}- {_inline(v, names)}")
        return "\n".join(lines)
    return pad + _scalar(obj)


def _is_terms(v) -> bool:
    return isinstance(v, list) and all(isinstance(t, dict) and set(t) == {"exp", "coeff"} for t in v)


def _flat(v) -> bool:
    if isinstance(v, list):
        return _is_terms(v) or all(not isinstance(x, (dict, list)) or _flat(x) for x in v)
    return False


def _inline(v, names=None) -> str:
    if isinstance(v, list):
        if v and _is_terms(v):
            return _terms_text(v, names)
        return "[" + ", ".join(_inline(x, names) for x in v) + "]"
    return _scalar(v)


def _terms_text(terms, names=None) -> str:
    if not terms:
        return "0"
    parts = []
    for t in terms:
        e = t["exp"]
        nm = names if names and len(names) == len(e) else [f"X{i + 1}" for i in range(len(e))]
        mono = "*".join(v if k == 1 else f"{v}^{k}" for v, k in zip(nm, e) if k)
        c = t["coeff"]
        c = c if isinstance(c, str) else json.dumps(c)
        parts.append(c if not mono else mono if c == "1" else f"{c}*{mono}")
    return " + ".join(parts)


def _emit(args, payload: dict, code: int) -> int:
    if args.format == "json":
        out = ser.dumps(payload)
    else:
        out = _text(payload) + "\n"
    if getattr(args, "output", None):
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out)
    return code


# -- subcommands -----------------------------------------------------------------

def cmd_normalize(args):
    a = ser.weyl_element_from_json(_read_json(args.input))
    return {"element": ser.weyl_element_to_json(a)}, EXIT_OK


def _pair(args):
    obj = _read_json(args.input)
    a = ser.weyl_element_from_json(_field(obj, "a"), "/a")
    b = ser.weyl_element_from_json(_field(obj, "b"), "/b")
    if a.algebra != b.algebra:
        raise IndexMismatch(f"operands live in A_{a.n} over {a.ring} and A_{b.n} over {b.ring}")
    return a, b


def cmd_mul(args):
    a, b = _pair(args)
    return {"product": ser.weyl_element_to_json(a * b)}, EXIT_OK


def cmd_commutator(args):
    a, b = _pair(args)
    return {"commutator": ser.weyl_element_to_json(commutator(a, b))}, EXIT_OK


def cmd_apply_endo(args):
    obj = _read_json(args.input)
    f = ser.endo_from_json(_field(obj, "endo"), "/endo")
    a = ser.weyl_element_from_json(_field(obj, "element"), "/element", n=f.n, ring=f.ring)
    if not f.verified:
        return {"verified": False, "error": "endomorphism fails the commutation relations"}, EXIT_FAIL
    return {"verified": True, "image": ser.weyl_element_to_json(apply_endo(f, a))}, EXIT_OK


def _endo_report(f):
    r = f.report
    return {
        "ok": r.ok,
        "violations": [{"i": i, "j": j, "defect": ser.terms_to_json(d.terms, f.ring)} for i, j, d in r.violations],
        "inverse_checked": r.inverse_checked,
        "inverse_ok": r.inverse_ok,
        "inverse_failures": [{"order": o, "index": k} for o, k, _ in r.inverse_failures],
    }


def cmd_verify_endo(args):
    f = ser.endo_from_json(_read_json(args.input))
    rep = _endo_report(f)
    return rep, EXIT_OK if rep["ok"] else EXIT_FAIL


def _endo_at_prime(obj, p):
    f = ser.endo_from_json(obj)
    if f.ring.characteristic == 0:
        if p is None:
            raise UsageError("--p is required for an endomorphism over Z or Q")
        f = f.change_ring(PrimeField(p))
    elif p is not None and char_p(f.ring) != p:
        raise RingMismatch(f"endomorphism over {f.ring} but --p {p}")
    return f


def cmd_center_map(args):
    f = _endo_at_prime(_read_json(args.input), args.p)
    if not f.verified:
        return {"verified": False, "relations": _endo_report(f)}, EXIT_FAIL
    cm = center_map(f, method=args.method)
    deg = degree_check(cm)
    brackets = check_symplecto(cm.map, sign=-1)
    payload = {
        "center_map": ser.center_map_to_json(cm),
        "degree_bound": {"ok": deg.ok, "bound": deg.bound, "max_degree": deg.max_degree},
        "preserves_center_bracket": brackets.ok,
        "bracket_defects": [
            {"i": i, "j": j, "defect": ser.terms_to_json((got - want).terms, cm.map.ring)}
            for i, j, got, want in brackets.violations
        ],
    }
    return payload, EXIT_OK if deg.ok else EXIT_FAIL


def _center_element(obj, path):
    if isinstance(obj, dict) and "n" in obj:
        return center_coords(ser.weyl_element_from_json(obj, path))
    return ser.poly_from_json(obj, path)


def cmd_center_bracket(args):
    obj = _read_json(args.input)
    a = _center_element(_field(obj, "a"), "/a")
    b = _center_element(_field(obj, "b"), "/b")
    Y = center_ring(a.nvars // 2, a.ring)
    a, b = a.renamed(Y), b.renamed(Y)
    return {"bracket": ser.poly_to_json(center_poisson_bracket(a, b))}, EXIT_OK


def cmd_untwist(args):
    obj = _read_json(args.input)
    if isinstance(obj, dict) and "map" in obj:
        obj = obj["map"]
    g = ser.polymap_from_json(obj)
    p = char_p(g.ring)
    try:
        u = untwist_frobenius_map(CenterMap(g, p, 0))
    except WeylPoissonError as exc:
        return {"ok": False, "error": f"{type(exc).__name__}: {exc}"}, EXIT_FAIL
    return {"ok": True, "untwisted": ser.polymap_to_json(u.map)}, EXIT_OK


def cmd_psi_profile(args):
    f = ser.endo_from_json(_read_json(args.input))
    if not f.verified:
        return {"verified": False, "relations": _endo_report(f)}, EXIT_FAIL
    prof = psi_profile(f, args.primes, method=args.method, source=args.source or str(f.ring))
    payload = ser.prime_profile_to_json(prof)
    ok = prof.ok() and prof.reconstruction is not None and prof.reconstruction.agrees
    return payload, EXIT_OK if ok else EXIT_FAIL


def cmd_tame_eval(args):
    w = ser.tame_word_from_json(_read_json(args.input))
    f = eval_word_weyl(w)
    g = eval_word_poisson(w)
    symp = check_symplecto(g)
    payload = {
        "weyl": ser.endo_to_json(f),
        "poisson": ser.polymap_to_json(g),
        "weyl_relations_ok": f.verified,
        "poisson_symplectic": symp.ok,
    }
    return payload, EXIT_OK if f.verified and symp.ok else EXIT_FAIL


def cmd_tame_correspond(args):
    w = ser.tame_word_from_json(_read_json(args.input))
    rep = correspondence_check(w, args.primes, method=args.method)
    rows = []
    for e in rep.entries:
        row = {"p": e.p, "ok": e.ok, "closed_form_agrees": e.closed_form_agrees,
               "twist_agrees": e.twist_agrees, "untwisted_agrees": e.untwisted_agrees,
               "degree_ok": e.degree_ok}
        if e.center_map is not None:
            row["center_map"] = ser.center_map_to_json(e.center_map)
        if e.error:
            row["error"] = e.error
        rows.append(row)
    return {"primes": list(args.primes), "ok": rep.ok, "entries": rows}, EXIT_OK if rep.ok else EXIT_FAIL


def cmd_kernel_evidence(args):
    w = ser.tame_word_from_json(_read_json(args.input))
    rep = kernel_evidence(w, args.primes, method=args.method)
    payload = {
        "weyl_identity": rep.weyl_identity,
        "poisson_identity": rep.poisson_identity,
        "consistent": rep.consistent,
        "weyl_witness": rep.weyl_witness,
        "poisson_witness": rep.poisson_witness,
        "mod_p": rep.mod_p,
        "note": "evidence for this word only",
    }
    return payload, EXIT_OK if rep.consistent else EXIT_FAIL


def cmd_primitive(args):
    theta = ser.one_form_from_json(_read_json(args.input))
    try:
        P = primitive_of_exact(theta)
    except WeylPoissonError as exc:
        return {"ok": False, "error": f"{type(exc).__name__}: {exc}"}, EXIT_FAIL
    return {"ok": True, "primitive": ser.poly_to_json(P)}, EXIT_OK


def _relation_rows(report):
    return [
        {"relation": r.relation, "computed": str(r.computed),
         "expected": [str(c) for c in r.expected], "verdict": r.verdict}
        for r in report.relations
    ]


def _presentations(items, base, path):
    if not isinstance(items, list) or not items:
        raise SchemaError("expected a non-empty list of {\"f\", \"g\"}", path)
    return TensorPresentation([
        AzumayaPresentation(parse_base(_field(it, "f"), base), parse_base(_field(it, "g"), base))
        for it in items
    ])


def cmd_azumaya_verify(args):
    obj = _read_json(args.input)
    p = _field(obj, "p")
    if not isinstance(p, int):
        raise SchemaError("p must be an integer", "/p")
    try:
        base = base_ring(p, obj.get("base", ["s1", "s2", "s3"] if "triple" in obj else ["s"]))
    except ValueError as exc:
        raise SchemaError(str(exc), "/p") from exc
    if "triple" in obj:
        t = obj["triple"]
        rep = verify_triple_iso(*(parse_base(_field(t, k), base) for k in ("f", "g", "h")), base=base)
        readings = {label: _relation_rows(r) for label, r in rep.readings.items()}
        payload = {
            "p": p,
            "readings": readings,
            "sign_discrepancies": rep.sign_discrepancies,
            "structural_failures": rep.structural_failures,
        }
        ok = any(all(r.verdict != "fail" for r in table.relations) for table in rep.readings.values())
        return payload, EXIT_OK if ok else EXIT_FAIL
    src = _presentations(_field(obj, "source"), base, "/source")
    tgt = _presentations(_field(obj, "target"), base, "/target")
    images = _field(obj, "images")
    if not isinstance(images, dict):
        raise SchemaError("images must map generator names to expressions", "/images")
    rep = verify_substitution(SubstitutionMap.from_strings(src, tgt, images), sign_variants=args.both_signs)
    return {"p": p, "ok": rep.ok, "relations": _relation_rows(rep)}, EXIT_OK if rep.ok else EXIT_FAIL


def cmd_matrix_rep(args):
    try:
        r = matrix_rep(args.p)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    payload = {
        "p": r.p,
        "X": r.X.tolist(),
        "D": r.D.tolist(),
        "commutator_is_identity": r.commutator_is_identity,
        "x_nilpotent": r.x_nilpotent,
        "d_nilpotent": r.d_nilpotent,
        "span_rank": r.span_rank,
        "trace_commutator": r.trace_commutator,
        "ok": r.ok,
    }
    return payload, EXIT_OK if r.ok else EXIT_FAIL


def cmd_identity_suite(args):
    cfg = SuiteConfig(seed=args.seed, ns=tuple(args.n), primes=tuple(args.primes),
                      max_length=args.max_length, words=args.words, samples=args.samples,
                      degree_cap=args.degree_cap, height_cap=args.height_cap, output=args.output)
    report = run_suite(cfg)
    return report, EXIT_OK if report["ok"] else EXIT_FAIL


# -- parser ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="weylpoisson", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help_, input_=True):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--format", choices=("json", "text"), default="json")
        sp.add_argument("--output", "-o", help="write the report here instead of stdout")
        if input_:
            sp.add_argument("input", nargs="?", default="-", help="JSON input file (default: stdin)")
        sp.set_defaults(func=fn)
        return sp

    add("normalize", cmd_normalize, "canonical PBW form of a Weyl element")
    add("mul", cmd_mul, "product a*b of {\"a\": ..., \"b\": ...}")
    add("commutator", cmd_commutator, "commutator [a, b]")
    add("apply-endo", cmd_apply_endo, "apply {\"endo\": ..., \"element\": ...}")
    add("verify-endo", cmd_verify_endo, "check commutation relations and a claimed inverse")
    for name, fn, help_ in (("center-map", cmd_center_map, "induced map on the center in characteristic p"),
                            ("psi-profile", cmd_psi_profile, "center maps over several primes plus reconstruction"),
                            ("tame-correspond", cmd_tame_correspond, "compare Weyl, closed-form and Poisson center maps"),
                            ("kernel-evidence", cmd_kernel_evidence, "decide whether a tame word is trivial on both sides")):
        sp = add(name, fn, help_)
        sp.add_argument("--method", choices=("auto", "direct", "evaluation"), default="auto")
        if name == "center-map":
            sp.add_argument("--p", type=int, help="reduce a Z/Q endomorphism modulo this prime")
        else:
            default = "101,103,107" if name == "psi-profile" else "3,5"
            sp.add_argument("--primes", type=_int_list, default=_int_list(default))
        if name == "psi-profile":
            sp.add_argument("--source", help="label recorded in the report")
    add("center-bracket", cmd_center_bracket, "intrinsic bracket of two central elements")
    add("untwist", cmd_untwist, "coefficientwise p-th roots of a center map")
    add("tame-eval", cmd_tame_eval, "evaluate a tame word on both sides")
    add("primitive", cmd_primitive, "primitive of an exact polynomial 1-form")
    sp = add("azumaya-verify", cmd_azumaya_verify, "relation table of a substitution or the triple formula")
    sp.add_argument("--both-signs", action="store_true", help="also compare p-th powers against the negated value")
    sp = add("matrix-rep", cmd_matrix_rep, "x and d/dx on F_p[x]/(x^p)", input_=False)
    sp.add_argument("--p", type=int, required=True)
    sp = add("identity-suite", cmd_identity_suite, "seeded end-to-end verification suite", input_=False)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--primes", type=_int_list, default=_int_list("3,5"))
    sp.add_argument("--n", type=_int_list, default=_int_list("1,2"))
    sp.add_argument("--words", type=int, default=10, help="sampled words / matrices per block")
    sp.add_argument("--samples", type=int, default=5, help="random lifts and pairs per (n, p)")
    sp.add_argument("--max-length", type=int, default=5)
    sp.add_argument("--degree-cap", type=int, default=3)
    sp.add_argument("--height-cap", type=int, default=72)
    return parser


def run_command(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse reports usage errors with status 2
        return int(exc.code or 0)
    try:
        payload, code = args.func(args)
    except _INPUT_ERRORS as exc:
        print(f"error: malformed input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except RelationCheckFailed as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except WeylPoissonError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT if isinstance(exc, (ValueError, TypeError)) else EXIT_FAIL
    except (ValueError, TypeError, KeyError) as exc:
        print(f"error: malformed input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return _emit(args, payload, code)


def main() -> None:
    sys.exit(run_command())


if __name__ == "__main__":
    main()
