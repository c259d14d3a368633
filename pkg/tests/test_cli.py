import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

from weylpoisson.cli import run_command

FIX = Path(__file__).parent / "fixtures"


def run(capsys, *argv):
    code = run_command([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv)
    return code, (json.loads(out) if out.strip() else None), err


@pytest.mark.parametrize("argv,code", [
    (["normalize", FIX / "element.json"], 0),
    (["normalize", FIX / "bad_coeff.json"], 2),
    (["normalize", FIX / "not_json.json"], 2),
    (["mul", FIX / "pair.json"], 0),
    (["mul", FIX / "pair_mismatch.json"], 2),
    (["commutator", FIX / "pair.json"], 0),
    (["apply-endo", FIX / "apply.json"], 0),
    (["verify-endo", FIX / "counterexample_p3.json"], 0),
    (["verify-endo", FIX / "endo_bad.json"], 1),
    (["center-map", FIX / "counterexample_p3.json"], 0),
    (["center-map", FIX / "counterexample_q.json", "--p", "3"], 0),
    (["center-map", FIX / "counterexample_q.json", "--p", "5"], 1),
    (["center-map", FIX / "counterexample_q.json"], 2),
    (["center-map", FIX / "endo_bad.json", "--p", "3"], 1),
    (["center-bracket", FIX / "center_pair.json"], 0),
    (["untwist", FIX / "twisted_map.json"], 0),
    (["untwist", FIX / "not_pth_power.json"], 1),
    (["psi-profile", FIX / "word_cubic.json"], 2),
    (["tame-eval", FIX / "word_cubic.json"], 0),
    (["tame-correspond", FIX / "word_conjugate.json", "--primes", "3,5,7"], 0),
    (["tame-correspond", FIX / "word_third.json", "--primes", "3,5"], 1),
    (["kernel-evidence", FIX / "word_identity.json", "--primes", "3,5"], 0),
    (["primitive", FIX / "one_form_exact.json"], 0),
    (["primitive", FIX / "one_form_not_closed.json"], 1),
    (["azumaya-verify", FIX / "azumaya_p2.json"], 0),
    (["azumaya-verify", FIX / "azumaya_p3.json"], 0),
    (["azumaya-verify", FIX / "azumaya_wrong.json"], 1),
    (["azumaya-verify", FIX / "azumaya_bad_expr.json"], 2),
    (["azumaya-verify", FIX / "azumaya_triple_p3.json"], 0),
    (["matrix-rep", "--p", "5"], 0),
    (["matrix-rep", "--p", "4"], 2),
    (["no-such-command"], 2),
    (["normalize", FIX / "missing.json"], 2),
])
def test_exit_codes(capsys, argv, code):
    assert run(capsys, *argv)[0] == code


def test_center_map_counterexample_output(capsys):
    code, payload, _ = run_json(capsys, "center-map", FIX / "counterexample_p3.json")
    assert code == 0
    first = payload["center_map"]["map"]["images"][0]
    assert first == [{"exp": [0, 1, 0, 0], "coeff": "2"}, {"exp": [0, 3, 2, 0], "coeff": "1"},
                     {"exp": [1, 0, 0, 0], "coeff": "1"}]
    assert payload["preserves_center_bracket"] is False
    defects = {(d["i"], d["j"]) for d in payload["bracket_defects"]}
    assert (1, 4) in defects


def test_center_map_text_format(capsys):
    code, out, _ = run(capsys, "center-map", FIX / "counterexample_p3.json", "--format", "text")
    assert code == 0
    assert "y1" in out and "y2^3*y3^2" in out.replace(" ", "")


def test_mismatch_diagnostic_names_field(capsys):
    code, _, err = run(capsys, "mul", FIX / "pair_mismatch.json")
    assert code == 2 and "A_1" in err and "A_2" in err
    code, _, err = run(capsys, "normalize", FIX / "bad_coeff.json")
    assert code == 2 and "/terms/0/coeff" in err


def test_psi_profile_on_endo(capsys, tmp_path):
    code, payload, _ = run_json(capsys, "tame-eval", FIX / "word_cubic.json")
    endo = tmp_path / "endo.json"
    endo.write_text(json.dumps(payload["weyl"]))
    code, payload, _ = run_json(capsys, "psi-profile", endo, "--primes", "5,7,11")
    assert code == 0
    assert payload["reconstruction"]["agrees"] is True
    assert [e["p"] for e in payload["primes"]] == [5, 7, 11]


def test_triple_report_flags_signs(capsys):
    _, payload, _ = run_json(capsys, "azumaya-verify", FIX / "azumaya_triple_p3.json")
    assert payload["sign_discrepancies"]["A_{h,fg}"] == ["eta1^3 = g1", "eta2^3 = g2", "eta3^3 = g3"]
    assert payload["structural_failures"]["A_{fh,g}"] == ["xi3^3 = f3", "eta3^3 = g3"]


def test_identity_suite_contains_commutator_block(capsys):
    code, payload, _ = run_json(capsys, "identity-suite", "--seed", "42", "--primes", "3,5", "--n", "1,2")
    assert code == 0 and payload["ok"]
    assert payload["config"]["seed"] == 42 and payload["config"]["primes"] == [3, 5]
    block = payload["blocks"]["commutator_pth_power"]
    assert block["ok"]


def test_identity_suite_is_byte_identical(tmp_path):
    outs = []
    for k, workers in enumerate(("1", "2")):
        target = tmp_path / f"r{k}.json"
        env = dict(os.environ, WEYLPOISSON_WORKERS=workers)
        subprocess.run([sys.executable, "-m", "weylpoisson", "identity-suite", "--seed", "7", "--words", "4",
                        "-o", str(target)], check=True, env=env)
        outs.append(target.read_bytes())
    assert outs[0] == outs[1]


def test_stdin_input():
    text = (FIX / "element.json").read_text()
    res = subprocess.run([sys.executable, "-m", "weylpoisson", "normalize"], input=text,
                         capture_output=True, text=True)
    assert res.returncode == 0
    terms = json.loads(res.stdout)["element"]["terms"]
    assert terms == [{"exp": [0, 0], "coeff": "-1/2"}, {"exp": [1, 1], "coeff": "3"}]
