"""End-to-end tests of the command-line front end.

Everything runs through cli.main with captured stdout, plus one
subprocess check of the module entry point.  Expected numbers are
re-derived inline from the library (margins, distances) or frozen from
the literal grammar; exit codes follow the documented 0/1/2 contract.
"""

import contextlib
import io
import json
import subprocess
import sys

import pytest

from mumford.cli import main
from mumford.errors import SchemaError
from mumford.serialize import (laurent_from_json, laurent_from_string,
                               laurent_to_json, valu_scalar)
from mumford.valfield import FieldParams, Valu

P3 = FieldParams(3, 1, 1)
P3E2 = FieldParams(3, 1, 2)


def run(*argv):
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        code = main(list(argv))
    return code, buf.getvalue()


def run_json(*argv):
    code, out = run(*argv)
    return code, json.loads(out)


# ---- literal grammar ----

def test_grammar_strings():
    x = laurent_from_string(P3, "t^-2 + 2")
    assert x.terms == {-2: 1, 0: 2}
    assert laurent_from_string(P3, "2*t + 1").terms == {1: 2, 0: 1}
    assert laurent_from_string(P3, "2t").terms == {1: 2}
    assert laurent_from_string(P3, "-t^3").terms == {3: 2}
    assert laurent_from_string(P3, "t + 2t").terms == {}  # 3t = 0 drops out
    assert laurent_from_string(P3, "0").terms == {}
    # ramified exponents live in (1/e)Z
    assert laurent_from_string(P3E2, "t^1/2").terms == {1: 1}
    with pytest.raises(SchemaError):
        laurent_from_string(P3, "t^1/2")
    with pytest.raises(SchemaError):
        laurent_from_string(P3, "")
    with pytest.raises(SchemaError):
        laurent_from_string(P3, "t ^")
    with pytest.raises(SchemaError):
        laurent_from_string(P3, "2 2")


def test_grammar_list_and_roundtrip():
    x = laurent_from_json(P3E2, [[-2, 1, 2], [1, 2, 1]])
    assert x.terms == {-4: 2, 1: 1}
    with pytest.raises(SchemaError):
        laurent_from_json(P3E2, [[1, 3, 1]])          # 1/3 not in (1/2)Z
    with pytest.raises(SchemaError):
        laurent_from_json(P3, [[1, 1]])               # missing digit
    with pytest.raises(SchemaError):
        laurent_from_json(P3, True)
    # to_json -> from_json is the identity on exact elements
    y = laurent_from_string(P3, "t^-2 + 2")
    again = laurent_from_json(P3, laurent_to_json(y)["terms"])
    assert (again - y).is_zero() and again.is_exact()


def test_valu_scalar_forms():
    assert valu_scalar(Valu(2)) == 2
    assert valu_scalar(Valu(-3)) == -3
    from fractions import Fraction
    assert valu_scalar(Valu(Fraction(3, 2))) == [3, 2]
    assert valu_scalar(Valu.infinite()) == "inf"
    assert valu_scalar(Valu.neg_infinite()) == "-inf"


# ---- check / genus ----

def test_check_basic():
    code, out = run_json("check", '{"p":3, "a":[0,1], "lambda":["t","t"]}')
    assert code == 0
    assert out["is_mumford"] is True
    assert out["witness"] is None
    assert out["margins"] == [[None, 2], [2, None]]
    assert out["params"]["p"] == 3


def test_check_negative_exit_1():
    code, out = run_json("check", '{"p":3, "a":[0,1], "lambda":[1,1]}')
    assert code == 1
    assert out["is_mumford"] is False
    assert out["witness"] == [1, 2]
    assert out["margins"][0][1] == 0


def test_check_param_flags_override():
    code, out = run_json("check", '{"a":[0,1], "lambda":["t","t"]}', "--p", "3")
    assert code == 0 and out["params"]["p"] == 3


def test_genus_bare_integer():
    code, out = run("genus", "--p", "3", "--r", "3")
    assert code == 0
    assert out.strip() == "4"
    code, out = run("genus", "--p", "5", "--r", "4")
    assert out.strip() == "12"


# ---- error contract ----

def test_exit_2_error_objects():
    code, out = run_json("check", '{"p":3, "a":[0,1]')
    assert code == 2 and out["error"]["type"] == "SchemaError"

    code, out = run_json("check", "/no/such/file.json")
    assert code == 2 and out["error"]["type"] == "SchemaError"

    # genus 1 is outside the verdict machinery: a precondition, not a "no"
    code, out = run_json("check", '{"p":2, "a":[0,1], "lambda":[1,1]}')
    assert code == 2 and out["error"]["type"] == "GenusTooSmall"

    code, out = run_json("tree", "dist",
                         '{"p":3, "v":{"center":0,"level":0}, '
                         '"w":{"center":0,"level":1}}', "--format", "dot")
    assert code == 2 and out["error"]["type"] == "SchemaError"


def test_input_from_file_and_stdin(tmp_path, monkeypatch):
    doc = '{"p":3, "a":[0,1], "lambda":["t","t"]}'
    path = tmp_path / "bd.json"
    path.write_text(doc)
    code, out = run_json("check", str(path))
    assert code == 0 and out["is_mumford"] is True

    monkeypatch.setattr(sys, "stdin", io.StringIO(doc))
    code, out = run_json("check", "-")
    assert code == 0 and out["is_mumford"] is True


# ---- cover / reduce ----

def test_cover_certificate():
    code, out = run_json("cover", '{"p":3, "a":[0,1], "lambda":["t","t"]}')
    assert code == 0
    assert out["covering"]["covers"] is True
    assert out["genus"] == 2
    assert len(out["pieces"]) >= 2
    assert len(out["thresholds"]["rows"]) == 2
    # deterministic output
    assert run("cover", '{"p":3, "a":[0,1], "lambda":["t","t"]}')[1] == \
        run("cover", '{"p":3, "a":[0,1], "lambda":["t","t"]}')[1]


def test_cover_rejects_non_split_data():
    code, out = run_json("cover", '{"p":3, "a":[0,1], "lambda":[1,1]}')
    assert code == 1
    assert out["is_mumford"] is False and out["witness"] == [1, 2]


def test_reduce_all_pieces_pass():
    code, out = run_json("reduce", '{"p":3, "a":[0,"t^-1"], "lambda":["t","1"]}')
    assert code == 0
    assert out["covering"]["covers"] is True
    assert out["reductions"]
    assert all(rep["passes_condition"] for rep in out["reductions"])
    assert all(rep["ring_shape"] for rep in out["reductions"])


# ---- theta / roundtrip ----

THETA_DOC = '{"p":3, "P2":1, "eta":"t^-2", "u":"2 + t + 2*t^2", "L":4}'


def test_theta_report():
    code, out = run_json("theta", THETA_DOC)
    assert code == 0
    assert out["u_defaulted"] is False
    assert out["cutoff"] == 4
    assert out["bounds"] == [-4, 6]
    # polar coefficients recovered at valuation 1 each (product = 2 = d)
    assert out["lambda1"]["terms"][0][0] == 1
    assert out["lambda2"]["terms"][0][0] == 1
    assert out["margins"]["lambda1"] is not None


def test_theta_words_flag_changes_cutoff():
    code, out = run_json("theta", THETA_DOC, "--words", "2")
    assert code == 0 and out["cutoff"] == 2


def test_theta_default_u_is_deterministic():
    doc = '{"p":3, "P2":1, "eta":"t^-2", "L":2}'
    code1, out1 = run("theta", doc)
    code2, out2 = run("theta", doc)
    assert code1 == code2 == 0
    assert out1 == out2
    assert json.loads(out1)["u_defaulted"] is True


def test_theta_default_u_needs_big_residue_field():
    code, out = run_json("theta", '{"p":2, "P2":1, "eta":"t^-1", "L":2}')
    assert code == 2 and out["error"]["type"] == "SchemaError"


def test_theta_radius_certification():
    code, out = run_json("theta", THETA_DOC, "--radius", "10")
    assert code == 0
    assert out["radius"]["1"]["radius_exp"] == 10
    assert out["radius"]["2"]["order"] == 3

    code, out = run_json("theta", THETA_DOC, "--radius", "-10")
    assert code == 2 and out["error"]["type"] == "RadiusViolation"

    code, out = run_json("theta", THETA_DOC, "--radius", "x")
    assert code == 2 and out["error"]["type"] == "SchemaError"


def test_roundtrip_chains_to_covering():
    code, out = run_json("roundtrip", THETA_DOC)
    assert code == 0
    assert out["criterion"]["margin"] == 2
    assert out["criterion"]["is_mumford"] is True
    assert out["covering"]["covers"] is True
    assert out["reductions_pass"] is True
    assert out["piece_count"] >= 2


# ---- tree ----

def test_tree_dist():
    code, out = run_json("tree", "dist",
                         '{"p":3, "v":{"center":0,"level":0}, '
                         '"w":{"center":"t^2","level":5}}')
    assert code == 0 and out["distance"] == 5

    code, out = run_json("tree", "dist",
                         '{"p":3, "v":{"center":0,"level":0}, '
                         '"w":{"center":1,"level":0}}')
    assert out["distance"] == 0  # same ball, different description


def test_tree_mirror_json_and_dot():
    doc = ('{"p":3, "gens":[{"P":0,"eta":1}, {"P":1,"eta":"t^-2"}]}')
    code, out = run_json("tree", "mirror", doc)
    assert code == 0
    assert out["distance"] == 2
    assert len(out["rows"]) == 7  # margin 2 on both sides of the bridge
    assert any(row["fixed1"] and not row["fixed2"] for row in out["rows"])

    code, dot = run("tree", "mirror", doc, "--format", "dot")
    assert code == 0
    assert dot.startswith("graph mirror_scan {")
    assert "M1" in dot and "M2" in dot

    code, out = run_json("tree", "mirror",
                         '{"p":3, "gens":[{"P":0,"eta":1}, {"P":1,"eta":1}]}')
    assert code == 1 and out["error"]["type"] == "MirrorsIntersect"


def test_tree_hull():
    doc = '{"p":3, "points":[0, 1, "t", "inf"]}'
    code, out = run_json("tree", "hull", doc)
    assert code == 0
    assert len(out["nodes"]) == 2
    assert out["edges"] == [[0, 1, 1]]
    assert out["rays"][3] == ["-inf", 0]

    code, dot = run("tree", "hull", doc, "--format", "dot")
    assert code == 0 and dot.startswith("graph hull {")

    code, out = run_json("tree", "hull", '{"p":3, "points":[0, 0]}')
    assert code == 2 and out["error"]["type"] == "DuplicatePoints"


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "mumford.cli", "genus", "--p", "5", "--r", "3"],
        capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.strip() == "8"
