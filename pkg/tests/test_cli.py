import glob
import json
import os
import subprocess
import sys

FIXTURES = os.path.join(os.path.dirname(__file__), "..", "fixtures")
CORPUS = sorted(glob.glob(os.path.join(FIXTURES, "*.site")))
BROKEN = sorted(glob.glob(os.path.join(FIXTURES, "broken", "*.site")))


def tck(*args, env=None):
    full_env = dict(os.environ)
    if env:
        full_env.update(env)
    return subprocess.run(
        [sys.executable, "-m", "tck.cli", *args],
        capture_output=True,
        text=True,
        env=full_env,
    )


def test_validate_on_corpus_exits_zero():
    for path in CORPUS:
        res = tck("validate", path)
        assert res.returncode == 0, (path, res.stdout, res.stderr)


def test_roundtrip_on_every_shipped_fixture_exits_zero():
    assert CORPUS, "shipped corpus missing"
    for path in CORPUS:
        res = tck("roundtrip", path)
        assert res.returncode == 0, (path, res.stdout, res.stderr)


def test_check_site_on_open_site():
    res = tck("check-site", os.path.join(FIXTURES, "OpenSite.site"))
    assert res.returncode == 0
    assert "valid-and-subcanonical" in res.stdout


def test_check_site_names_broken_axiom():
    expectations = {
        "BrokenMaximality.site": "maximality",
        "BrokenStability.site": "stability",
        "BrokenTransitivity.site": "transitivity",
    }
    for path in BROKEN:
        res = tck("check-site", path)
        assert res.returncode == 1, (path, res.stdout)
        assert expectations[os.path.basename(path)] in res.stdout


def test_char_emits_fibre_functor_table_on_pointed_fixture():
    res = tck("char", os.path.join(FIXTURES, "Pointed.site"))
    assert res.returncode == 0
    assert "setpresheaf pointed.char" in res.stdout


def test_sheafify_collapses_nonseparated_fixture():
    res = tck("sheafify", os.path.join(FIXTURES, "NonSeparated.site"), "--json")
    assert res.returncode == 0
    payload = json.loads(res.stdout)
    witness = [w for w in payload["witnesses"] if "ZNonSep" in w]
    assert witness
    # one section left at T after sheafification
    assert "('T', 1)" in witness[0]


def test_check_sheaf_fails_on_nonseparated():
    res = tck("check-sheaf", os.path.join(FIXTURES, "NonSeparated.site"))
    assert res.returncode == 1
    assert "not-a-sheaf" in res.stdout


def test_classify_and_ff_check_on_walking_arrow():
    path = os.path.join(FIXTURES, "WalkingArrow.site")
    res = tck("classify", path)
    assert res.returncode == 0
    res = tck("ff-check", path)
    assert res.returncode == 0


def test_char_stacks_and_probe_on_open_site():
    path = os.path.join(FIXTURES, "OpenSite.site")
    res = tck("char-stacks", path)
    assert res.returncode == 0, res.stdout + res.stderr
    assert "factors-and-roundtrips" in res.stdout
    res = tck("probe-omega-j", path)
    assert res.returncode == 0, res.stdout + res.stderr


def test_check_stack_on_open_site():
    res = tck("check-stack", os.path.join(FIXTURES, "OpenSite.site"))
    assert res.returncode == 0


def test_exit_code_3_on_usage_errors():
    res = tck("roundtrip", os.path.join(FIXTURES, "broken", "BrokenMaximality.site"))
    assert res.returncode == 3  # no classifiable section
    res = tck("validate", "no-such-file.site")
    assert res.returncode == 3
    res = tck("not-a-command", os.path.join(FIXTURES, "OpenSite.site"))
    assert res.returncode == 3


def test_json_report_shape():
    res = tck("validate", os.path.join(FIXTURES, "OpenSite.site"), "--json")
    assert res.returncode == 0
    payload = json.loads(res.stdout)
    assert payload["command"] == "validate"
    assert payload["verdict"] == "pass"
    assert set(payload) >= {"command", "verdict", "witnesses", "counterexamples", "bounds"}


def test_out_path_receives_output(tmp_path):
    out = tmp_path / "sheafified.site"
    res = tck("sheafify", os.path.join(FIXTURES, "NonSeparated.site"), "--out", str(out))
    assert res.returncode == 0
    assert out.exists()
    assert "setpresheaf" in out.read_text()


def test_env_bound_matches_flag():
    path = os.path.join(FIXTURES, "WalkingArrow.site")
    res_flag = tck("ff-check", path, "--bound", "0")
    res_env = tck("ff-check", path, env={"TCK_BOUND": "0"})
    assert res_flag.returncode == res_env.returncode == 2  # aborted by bound
    assert "bound" in res_flag.stdout


def test_cli_output_is_deterministic():
    path = os.path.join(FIXTURES, "OpenSite.site")
    a = tck("classify", path).stdout
    b = tck("classify", path).stdout
    assert a == b


BROKEN_DESCENT_DOC = """
category WA
  objects a b
  arrow id_a : a -> a
  arrow id_b : b -> b
  arrow u : a -> b
  identity a : id_a
  identity b : id_b
  compose id_a id_a : id_a
  compose id_b id_b : id_b
  compose id_b u : u
  compose u id_a : u
end

category Two
  objects x y
  arrow id_x : x -> x
  arrow id_y : y -> y
  identity x : id_x
  identity y : id_y
  compose id_x id_x : id_x
  compose id_y id_y : id_y
end

functor Fu : Two -> Two
  ob x : x
  ob y : y
end

catpresheaf F on WA
  at a : Two
  at b : Two
  arr u : Fu
end

sieve S on WA at b
  arrows u
end

descent_datum D over F at b sieve S
  object u : x
  iso u id_a : id_y
end
"""


def test_validate_fails_on_broken_descent_datum(tmp_path):
    path = tmp_path / "broken_descent.site"
    path.write_text(BROKEN_DESCENT_DOC)
    res = tck("validate", str(path))
    assert res.returncode == 1
    assert "iso-typing" in res.stdout


def test_parse_error_exits_three(tmp_path):
    path = tmp_path / "bad.site"
    path.write_text("category C\n  objects a\n  zzz\nend\n")
    res = tck("validate", str(path))
    assert res.returncode == 3
    assert "line 3" in res.stderr


def test_char_output_parses_against_input_document(tmp_path):
    src = os.path.join(FIXTURES, "Pointed.site")
    out = tmp_path / "char_tables.site"
    res = tck("char", src, "--out", str(out))
    assert res.returncode == 0
    combined = tmp_path / "combined.site"
    combined.write_text(
        open(src, encoding="utf-8").read() + "\n" + out.read_text()
    )
    from tck import docformat

    doc = docformat.parse_file(combined)
    assert any(".char." in name for name in doc.setpresheaves)
