import json
import subprocess
import sys
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import EXPECTED_HW_A, EXPECTED_HW_B
from flatcusp.catalog import catalog_lookup, catalog_names
from flatcusp.cli import EXIT_FAILED, EXIT_INPUT, EXIT_OK, format_form, main
from flatcusp.crystal import CrystalGroupSpec, Word
from flatcusp.exact_linalg import Matrix, SymmetricForm, Vector
from flatcusp.io import (
    GroupFileError,
    group_to_dict,
    parse_group_file,
    parse_matrix,
    parse_rational,
    parse_report,
    report_to_dict,
    serialize_group,
)


def hw_doc():
    return group_to_dict(catalog_lookup("hantsche-wendt"))


def write(tmp_path, name, doc):
    path = tmp_path / name
    path.write_text(doc if isinstance(doc, str) else json.dumps(doc), encoding="utf-8")
    return str(path)


# -- rationals ----------------------------------------------------------------


@pytest.mark.parametrize(
    "text, value",
    [("3", 3), ("-3/2", Fraction(-3, 2)), ("−1/2", Fraction(-1, 2)), (" 4 / 6 ", Fraction(2, 3)), (7, 7)],
)
def test_parse_rational(text, value):
    assert parse_rational(text) == value


@pytest.mark.parametrize("bad", ["1/0", "0.5", 0.5, "1/-2", "x", None, True])
def test_parse_rational_rejects(bad):
    with pytest.raises(GroupFileError):
        parse_rational(bad, "k")


def test_zero_denominator_has_location():
    doc = hw_doc()
    doc["generators"][1]["translation"][0] = "1/0"
    with pytest.raises(GroupFileError, match="zero denominator") as exc:
        parse_group_file(json.dumps(doc))
    assert exc.value.key == "generators[1].translation[0]"


def test_malformed_json_has_line():
    with pytest.raises(GroupFileError) as exc:
        parse_group_file('{\n  "dim": 3,\n  "generators": [\n}')
    assert exc.value.line == 4


def test_undeclared_generator():
    doc = hw_doc()
    doc["relators"].append("a c")
    with pytest.raises(GroupFileError, match="c") as exc:
        parse_group_file(json.dumps(doc))
    assert exc.value.key == "relators[2]"


def test_wrong_mu_count():
    doc = hw_doc()
    doc["mu_words"].pop()
    with pytest.raises(GroupFileError, match="mu_words"):
        parse_group_file(json.dumps(doc))


def test_dimension_mismatch():
    doc = hw_doc()
    doc["generators"][0]["holonomy"] = [["1", "0"], ["0", "1"]]
    with pytest.raises(GroupFileError, match="3x3"):
        parse_group_file(json.dumps(doc))


def test_explicit_requires_translation():
    doc = hw_doc()
    del doc["generators"][0]["translation"]
    with pytest.raises(GroupFileError, match="translation"):
        parse_group_file(json.dumps(doc))


def test_ragged_matrix():
    with pytest.raises(GroupFileError):
        parse_matrix([["1", "2"], ["3"]], "m")


# -- group files --------------------------------------------------------------


def test_shipped_hw_file_matches_catalog(groups_dir):
    spec = parse_group_file((groups_dir / "hantsche_wendt.json").read_text())
    assert spec == catalog_lookup("hantsche-wendt")


@pytest.mark.parametrize("stem", ["torus_2", "klein_bottle", "torus_3", "dicosm"])
def test_shipped_files_match_catalog(groups_dir, stem):
    spec = parse_group_file((groups_dir / f"{stem}.json").read_text())
    assert spec == catalog_lookup(stem.replace("_", "-"))


@pytest.mark.parametrize("name", catalog_names())
def test_catalog_round_trip(name):
    spec = catalog_lookup(name)
    assert parse_group_file(serialize_group(spec)) == spec
    abstract = spec.with_translations(None)
    assert parse_group_file(serialize_group(abstract)) == abstract


rationals = st.fractions(max_denominator=50).filter(lambda x: abs(x) < 1000)


@st.composite
def specs(draw):
    n = draw(st.integers(1, 3))
    k = draw(st.integers(1, 3))
    names = tuple(f"g{i}" for i in range(k))
    sign = st.sampled_from([1, -1])
    hols = tuple(Matrix.diag(draw(st.lists(sign, min_size=n, max_size=n))) for _ in range(k))
    trans = tuple(Vector(draw(st.lists(rationals, min_size=n, max_size=n))) for _ in range(k))
    letter = st.tuples(st.integers(0, k - 1), sign)
    word = st.lists(letter, max_size=5).map(lambda ls: Word(tuple(ls)))
    return CrystalGroupSpec(
        dim=n,
        names=names,
        holonomies=hols,
        translations=trans if draw(st.booleans()) else None,
        relators=tuple(draw(st.lists(word, max_size=3))),
        mu_words=tuple(draw(word) for _ in range(n)),
    )


@settings(max_examples=60)
@given(specs())
def test_random_spec_round_trip(spec):
    assert parse_group_file(serialize_group(spec)) == spec


def test_report_round_trip(hw):
    text = json.dumps(report_to_dict(hw))
    back = parse_report(text)
    assert back.matrices == hw.matrices
    assert back.form == hw.form
    assert back.D == hw.D
    assert (back.c, back.K) == (hw.c, hw.K)
    assert back.mu_hat == hw.mu_hat
    assert back.spec == hw.spec


# -- CLI ----------------------------------------------------------------------


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_embed_hw_json(capsys):
    code, out, _ = run(["embed", "catalog:hantsche-wendt"], capsys)
    assert code == EXIT_OK
    doc = json.loads(out)
    mats = {g["name"]: Matrix([[Fraction(x) for x in r] for r in g["matrix"]]) for g in doc["generators"]}
    assert mats == {"a": EXPECTED_HW_A, "b": EXPECTED_HW_B}
    assert doc["verification"]["passed"]
    assert all(isinstance(x, str) for r in doc["form"] for x in r)


def test_embed_hw_text(capsys):
    code, out, _ = run(["embed", "catalog:hantsche-wendt", "--format", "text"], capsys)
    assert code == EXIT_OK
    assert "x^2 + y^2 + z^2 + 4wt" in out
    assert "[  1   1  -1   1  -3 ]" in out
    assert "ALL CHECKS PASS" in out


def test_embed_torus_3(capsys):
    code, out, _ = run(["embed", "catalog:torus-3", "--format", "text"], capsys)
    assert code == EXIT_OK
    assert "signature (4, 1, 0)" in out
    doc = json.loads(run(["embed", "catalog:torus-3"], capsys)[1])
    assert all(len(g["matrix"]) == 5 for g in doc["generators"])


def test_embed_from_file(groups_dir, capsys):
    code, out, _ = run(["embed", str(groups_dir / "klein_bottle_abstract.json")], capsys)
    assert code == EXIT_OK
    assert json.loads(out)["group"]["generators"][0]["translation"] == ["1/2", "0"]


def test_embed_broken_file(tmp_path, capsys):
    path = write(tmp_path, "broken.json", '{"dim": 2, "generators": [')
    code, _, err = run(["embed", path], capsys)
    assert code == EXIT_INPUT
    assert "line 1" in err


def test_embed_torsion_rejected(groups_dir, capsys):
    code, _, err = run(["embed", str(groups_dir / "reflection_line.json")], capsys)
    assert code == EXIT_INPUT
    assert "torsion" in err


def test_embed_unknown_catalog(capsys):
    code, _, err = run(["embed", "catalog:nope"], capsys)
    assert code == EXIT_INPUT
    assert "hantsche-wendt" in err


def test_embed_seed_form(tmp_path, capsys):
    seed = write(tmp_path, "seed.json", {"matrix": [["2", "1"], ["1", "3"]]})
    code, out, _ = run(["embed", "catalog:klein-bottle", "--seed-form", seed], capsys)
    assert code == EXIT_OK
    bad = write(tmp_path, "bad.json", {"matrix": [["1", "0"], ["0", "-1"]]})
    assert run(["embed", "catalog:klein-bottle", "--seed-form", bad], capsys)[0] == EXIT_INPUT


def test_embed_deterministic(tmp_path, capsys):
    p1, p2 = tmp_path / "r1.json", tmp_path / "r2.json"
    assert main(["embed", "catalog:hantsche-wendt", "--out", str(p1)]) == EXIT_OK
    assert main(["embed", "catalog:hantsche-wendt", "--out", str(p2)]) == EXIT_OK
    assert p1.read_bytes() == p2.read_bytes()


@pytest.fixture
def hw_report(tmp_path):
    path = tmp_path / "hw.json"
    assert main(["embed", "catalog:hantsche-wendt", "--out", str(path)]) == EXIT_OK
    return path


def test_verify_ok(hw_report, capsys):
    code, out, _ = run(["verify", str(hw_report)], capsys)
    assert code == EXIT_OK
    assert "[FAIL]" not in out


def test_verify_tampered(hw_report, tmp_path, capsys):
    doc = json.loads(hw_report.read_text())
    doc["generators"][0]["matrix"][2][4] = "3"
    path = write(tmp_path, "t.json", doc)
    code, out, _ = run(["verify", path], capsys)
    assert code == EXIT_FAILED
    assert "[FAIL] a preserves Q'" in out
    assert "witness for" in out


def test_verify_asymmetric_form(hw_report, tmp_path, capsys):
    doc = json.loads(hw_report.read_text())
    doc["form"][0][1] = "1"
    code, out, _ = run(["verify", write(tmp_path, "t.json", doc)], capsys)
    assert code == EXIT_FAILED
    assert "witness" in out and "(0, 1)" in out


def test_verify_json_format(hw_report, capsys):
    code, out, _ = run(["verify", str(hw_report), "--format", "json"], capsys)
    assert code == EXIT_OK
    assert json.loads(out)["passed"] is True


def test_verify_corrupt_report(tmp_path, capsys):
    assert run(["verify", write(tmp_path, "x.json", {"format": "other"})], capsys)[0] == EXIT_INPUT


def test_separate_b(hw_report, capsys):
    code, out, _ = run(["separate", str(hw_report), "--element", "b", "--p", "2"], capsys)
    assert code == EXIT_OK
    assert "case: holonomy-block" in out
    assert "modulus: 3" in out


def test_separate_member(hw_report, capsys):
    code, out, _ = run(["separate", str(hw_report), "--element", "a a", "--p", "2"], capsys)
    assert code == EXIT_OK
    assert out.startswith("member")


def test_separate_json(hw_report, capsys):
    code, out, _ = run(["separate", str(hw_report), "--element", "b", "--p", "2", "--format", "json"], capsys)
    doc = json.loads(out)
    assert (doc["case"], doc["modulus"], doc["certified"]) == ("holonomy-block", 3, True)


def test_separate_matrix_file(hw_report, tmp_path, capsys):
    swap = [["1" if (i, j) in {(0, 0), (1, 1), (2, 2), (3, 4), (4, 3)} else "0" for j in range(5)] for i in range(5)]
    path = write(tmp_path, "swap.json", {"matrix": swap})
    code, out, _ = run(["separate", str(hw_report), "--element", path, "--p", "2"], capsys)
    assert code == EXIT_FAILED
    assert "outside-stabilizer" in out


def test_separate_undeclared_generator(hw_report, capsys):
    code, _, err = run(["separate", str(hw_report), "--element", "a c", "--p", "2"], capsys)
    assert code == EXIT_INPUT


def test_closure(hw_report, capsys):
    code, out, _ = run(["closure", str(hw_report), "--p", "3"], capsys)
    assert code == EXIT_OK
    assert "r = 2" in out


def test_catalog_list(capsys):
    code, out, _ = run(["catalog", "list"], capsys)
    assert code == EXIT_OK
    for name in ("torus-2", "klein-bottle", "torus-3", "hantsche-wendt"):
        assert name in out


def test_catalog_show(capsys):
    code, out, _ = run(["catalog", "show", "hantsche-wendt"], capsys)
    assert code == EXIT_OK
    assert parse_group_file(out) == catalog_lookup("hantsche-wendt")
    assert run(["catalog", "show", "nope"], capsys)[0] == EXIT_INPUT


def test_usage_error(capsys):
    assert run(["embed"], capsys)[0] == EXIT_INPUT
    assert run(["frobnicate"], capsys)[0] == EXIT_INPUT


def test_format_form():
    assert format_form(SymmetricForm(Matrix([[1, 0, 0], [0, 0, -1], [0, -1, 3]]))) == "x1^2 - 2x2x3 + 3x3^2"


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "flatcusp", "--plain", "catalog", "list"], capture_output=True, text=True
    )
    assert proc.returncode == 0
    assert "dicosm" in proc.stdout
