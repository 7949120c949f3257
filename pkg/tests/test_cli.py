from __future__ import annotations

import json

import jsonschema
import pytest

from hodge import emit
from hodge.cli import run

SCHEMA = emit.load_schema()


@pytest.fixture
def hodge(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("HODGE_CACHE_DIR", str(tmp_path / "cache"))

    def call(*argv):
        code = run(list(argv))
        out, err = capsys.readouterr()
        return code, out, err

    return call


def test_spec_examples(hodge):
    assert hodge("bernoulli", "4")[:2] == (0, "-1/30\n")
    assert hodge("hodge-number", "--genus", "2", "--lambda", "1,1,1")[:2] == (0, "1/2880\n")


def test_hodge_number_with_psi(hodge):
    # top-lambda closed form on the one-pointed genus-2 space: psi^2 lambda_2 = 7/5760
    assert hodge("hodge-number", "--genus", "2", "--lambda", "2", "--psi", "2")[1] == "7/5760\n"
    assert hodge("hodge-number", "--genus", "2", "--lambda", "2", "--psi", "1")[1] == "0\n"


def test_usage_errors(hodge):
    assert hodge("no-such-command")[0] == 2
    assert hodge("bernoulli")[0] == 2
    assert hodge("bernoulli", "4", "--bogus")[0] == 2
    assert hodge("hierarchy", "--order", "3")[0] == 2
    assert hodge("free-energy", "--genus", "0")[0] == 2
    assert hodge("hodge-gf", "--genus", "2")[0] == 2
    assert hodge("specialize", "cubic", "--samples", "1,-1")[0] == 2
    assert hodge("normal-form", "--order", "10")[0] == 2
    assert hodge("hodge-potential", "--genus", "2", "--stage", "5")[0] == 2


ALL_JSON = [
    ("bernoulli", "6"),
    ("free-energy", "--genus", "3"),
    ("hodge-potential", "--genus", "2", "--stage", "1"),
    ("hodge-gf", "--genus", "3", "--all"),
    ("hodge-number", "--genus", "3", "--lambda", "1,1,1,1,1,1"),
    ("hierarchy", "--order", "4", "--flow", "2"),
    ("hierarchy", "--order", "4", "--density", "1"),
    ("hierarchy", "--order", "4", "--miura"),
    ("hierarchy", "--order", "4", "--inverse"),
    ("ham-operator", "--order", "4"),
    ("specialize", "ilw", "--check"),
    ("specialize", "volterra"),
    ("specialize", "cubic", "--order", "4", "--samples", "1,1;2,3;-1,4"),
    ("normal-form", "--order", "4"),
]


@pytest.mark.parametrize("argv", ALL_JSON, ids=lambda a: " ".join(a))
def test_json_output_validates(hodge, argv):
    code, out, _ = hodge(*argv, "--format", "json")
    assert code == 0
    doc = json.loads(out)
    jsonschema.validate(doc, SCHEMA, cls=jsonschema.Draft202012Validator)
    assert doc["status"] == "ok"
    assert doc["command"] == argv[0]


@pytest.mark.parametrize("argv", ALL_JSON, ids=lambda a: " ".join(a))
def test_latex_output_is_a_document(hodge, argv):
    code, out, _ = hodge(*argv, "--format", "latex")
    assert code == 0
    assert out.startswith("\\documentclass{article}")
    assert out.rstrip().endswith("\\end{document}")
    assert out.count("\\begin{align*}") == out.count("\\end{align*}") >= 1


@pytest.mark.parametrize("argv", [
    ("free-energy", "--genus", "3"),
    ("hodge-potential", "--genus", "3"),
    ("hodge-gf", "--genus", "3", "--all"),
    ("hierarchy", "--order", "4", "--flow", "1"),
    ("hierarchy", "--order", "4", "--inverse"),
    ("ham-operator", "--order", "6"),
], ids=lambda a: " ".join(a))
@pytest.mark.parametrize("fmt", ["text", "json", "latex"])
def test_cache_hit_is_byte_identical(hodge, argv, fmt):
    cold = hodge(*argv, "--format", fmt, "--no-cache")
    first = hodge(*argv, "--format", fmt)
    second = hodge(*argv, "--format", fmt)
    assert cold == first == second


def test_cache_dir_flag(hodge, tmp_path):
    d = tmp_path / "elsewhere"
    hodge("hierarchy", "--order", "2", "--cache-dir", str(d))
    assert (d / "index.json").exists()


def test_hierarchy_text(hodge):
    code, out, _ = hodge("hierarchy", "--order", "2")
    assert out == "eps^0: (1)*v*v1\neps^2: -(1)*s1*v1*v2 + (1/12)*v3\n"


def test_operator_text(hodge):
    code, out, _ = hodge("ham-operator", "--order", "4")
    assert out == "d^1 eps^0: (1)\nd^3 eps^2: -(1)*s1\nd^5 eps^4: (3/5)*s1^2\n"


def test_hodge_gf_repeated_indices(hodge):
    code, out, _ = hodge("hodge-gf", "--genus", "2", "--lambda", "1,1")
    assert out == "[1,1] (7/2880)*v2\n"


def test_verify_core(hodge):
    code, out, _ = hodge("verify", "--suite", "core", "--seed", "3")
    assert code == 0
    assert out.strip().splitlines()[-1].endswith(" 0 failed")
    assert "FAIL" not in out


@pytest.mark.slow
def test_verify_full(hodge):
    code, out, _ = hodge("verify", "--suite", "full")
    assert code == 0, [ln for ln in out.splitlines() if ln.startswith("FAIL")]
