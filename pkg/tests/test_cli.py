from io import StringIO
from pathlib import Path

import pytest

from src.cli.commands import EXIT_INVALID, EXIT_OK, EXIT_ROUND_CAP, RunConfig, main

GOLDEN = Path(__file__).parent / "golden"

PING_PONG = """peer p
peer q
relation ext m@p/1
relation ext m@q/1
fact m@p("x")
rule at p: m@q($x) :- m@p($x)
rule at q: m@p($x) :- m@q($x)
grant write on m@q to p
grant write on m@p to q
"""


def invoke(*argv):
    out, err = StringIO(), StringIO()
    code = main(list(argv), out=out, err=err)
    return code, out.getvalue(), err.getvalue()


def round_count(out):
    return sum(line.startswith("round ") for line in out.splitlines())


@pytest.fixture
def ping_pong(tmp_path):
    path = tmp_path / "pingpong.wdm"
    path.write_text(PING_PONG, encoding="utf-8")
    return path


class TestRun:
    def test_bundled_scenario_prints_trace_and_summary(self):
        code, out, _ = invoke("run", "allphotos")
        assert code == EXIT_OK
        golden = (GOLDEN / "allphotos.trace").read_text(encoding="utf-8")
        assert out.startswith(golden)
        assert out[len(golden):].splitlines() == [
            "✓ 2 round(s) executed",
            "  allPhotos@Alice: 3 fact(s)",
            "  bobPhotos@Bob: 2 fact(s)",
            "  suePhotos@Sue: 1 fact(s)",
            "  rejections: 0",
        ]

    def test_trace_to_file(self, tmp_path):
        trace = tmp_path / "out.trace"
        code, out, _ = invoke("run", "allphotos", "--rounds", "2", "--trace", str(trace))
        assert code == EXIT_OK
        assert trace.read_text(encoding="utf-8") == (GOLDEN / "allphotos.trace").read_text(encoding="utf-8")
        assert out.startswith("✓ 2 round(s) executed")

    def test_empty_scenario_five_rounds(self):
        code, out, _ = invoke("run", "empty", "--rounds", "5")
        assert code == EXIT_OK
        assert round_count(out) == 5
        assert out.splitlines()[-2:] == ["✓ 5 round(s) executed", "  rejections: 0"]

    def test_seed_labels_trace(self):
        _, out, _ = invoke("run", "empty", "--seed", "42")
        assert out.splitlines()[0] == "trace seed=42"

    def test_until_quiescent(self):
        code, out, _ = invoke("run", "persistence", "--until-quiescent")
        assert code == EXIT_OK
        assert "✓ 2 round(s) executed" in out

    def test_round_cap_exit_code(self, ping_pong):
        code, out, _ = invoke("run", str(ping_pong), "--until-quiescent", "--max-rounds", "3")
        assert code == EXIT_ROUND_CAP
        assert "⚠ round cap hit after 3 round(s)" in out

    def test_rounds_beyond_cap(self, ping_pong):
        code, out, _ = invoke("run", str(ping_pong), "--rounds", "6", "--max-rounds", "2")
        assert code == EXIT_ROUND_CAP
        assert round_count(out) == 2

    def test_unsafe_rule_cites_line(self, tmp_path):
        bad = tmp_path / "bad.wdm"
        bad.write_text("peer p\nrelation ext m@p/1\nrule at p: m@p($x) :- m@p($y)\n", encoding="utf-8")
        code, out, err = invoke("run", str(bad))
        assert code == EXIT_INVALID
        assert out == ""
        assert "line 3" in err and "$x" in err

    def test_syntax_error_cites_line_and_column(self, tmp_path):
        bad = tmp_path / "bad.wdm"
        bad.write_text("peer p\nfact m@p(\n", encoding="utf-8")
        code, _, err = invoke("check", str(bad))
        assert code == EXIT_INVALID
        assert err.startswith("⚠ line ")

    def test_missing_file(self, tmp_path):
        code, _, err = invoke("run", str(tmp_path / "nope.wdm"))
        assert code == EXIT_INVALID
        assert "not found" in err

    def test_output_is_repeatable(self):
        assert invoke("run", "fontainbleau") == invoke("run", "fontainbleau")


class TestQuery:
    def test_pete_with_hide(self):
        code, out, _ = invoke("query", "hide", "allPhotos@Pete($f)", "--as", "Pete")
        assert code == EXIT_OK
        assert out.splitlines() == ['allPhotos@Pete("summit.jpg")', 'allPhotos@Pete("sunset.jpg")']

    def test_pete_without_hide(self):
        code, out, _ = invoke("query", "hide_off", "allPhotos@Pete($f)", "--as", "Pete")
        assert code == EXIT_OK
        assert out == ""

    def test_owner_sees_all(self):
        _, out, _ = invoke("query", "hide", "alicePhotos@Alice($f)", "--as", "Alice", "--rounds", "0")
        assert out.splitlines() == ['alicePhotos@Alice("summit.jpg")', 'alicePhotos@Alice("sunset.jpg")']

    def test_unknown_principal(self):
        code, _, err = invoke("query", "hide", "allPhotos@Pete($f)", "--as", "Mallory")
        assert code == EXIT_INVALID
        assert "Mallory" in err

    def test_bad_pattern(self):
        code, _, _ = invoke("query", "hide", "allPhotos@Pete(", "--as", "Pete")
        assert code == EXIT_INVALID


class TestAclAndCheck:
    def test_acl_list(self):
        code, out, _ = invoke("acl", "list", "Bob", "allphotos")
        assert code == EXIT_OK
        assert out.splitlines() == [
            "grant owner on acl@Bob to Bob",
            "grant owner on bobPhotos@Bob to Bob",
            "grant read on bobPhotos@Bob to Charlie",
        ]

    def test_acl_list_unknown_peer(self):
        code, _, err = invoke("acl", "list", "Charlie", "allphotos")
        assert code == EXIT_INVALID
        assert "Charlie" in err

    def test_check_classifies_rules(self):
        code, out, _ = invoke("check", "hatemail")
        assert code == EXIT_OK
        assert out.splitlines() == [
            "Alice B date@Alice($d) :- date@Alice($d)",
            "Alice B secret@Alice($x) :- secret@Alice($x)",
            "Bob B aliceSecret@Bob($x) :- aliceSecret@Bob($x)",
            "Bob E aliceSecret@Bob($x) :- date@Alice($d), secret@Alice($x)",
            'Bob E message@Sue("I hate you") :- date@Alice($d)',
            "Sue B message@Sue($m) :- message@Sue($m)",
            "✓ 3 peer(s), 4 relation(s), 2 fact(s), 6 rule(s)",
            "  B: local rule with local extensional head",
            "  E: non-local rule (delegation)",
        ]


def test_config_file_overrides(tmp_path):
    config = tmp_path / "config.json"
    config.write_text('{"simulation": {"default_rounds": 3}, "trace": {"seed": 9}}', encoding="utf-8")
    plain = tmp_path / "plain.wdm"
    plain.write_text("peer p\n", encoding="utf-8")
    _, out, _ = invoke("--config", str(config), "run", str(plain))
    assert out.splitlines()[0] == "trace seed=9"
    assert "✓ 3 round(s) executed" in out


def test_negative_rounds_rejected():
    with pytest.raises(ValueError):
        RunConfig(Path("x.wdm"), rounds=-1)
    code, _, _ = invoke("run", "empty", "--rounds", "-1")
    assert code == EXIT_INVALID


ACL_READER = """peer P
relation int readers@P/1
rule at P: readers@P($g) :- acl@P($r,$g,$p)
"""


def test_check_accepts_rules_reading_acl(tmp_path):
    path = tmp_path / "readers.wdm"
    path.write_text(ACL_READER, encoding="utf-8")
    code, out, err = invoke("check", str(path))
    assert (code, err) == (EXIT_OK, "")
    assert out.splitlines() == [
        "P A readers@P($g) :- acl@P($r,$g,$p)",
        "✓ 1 peer(s), 1 relation(s), 0 fact(s), 1 rule(s)",
        "  A: local rule with local intentional head",
    ]
    assert invoke("run", str(path), "--rounds", "1")[0] == EXIT_OK


class TestUnreadableScenario:
    def test_invalid_utf8(self, tmp_path):
        bad = tmp_path / "bad.wdm"
        bad.write_bytes(b'peer P\nrelation ext m@P/1\nfact m@P("\xff")\n')
        code, out, err = invoke("run", str(bad), "--rounds", "1")
        assert code == EXIT_INVALID
        assert out == ""
        assert err.startswith("⚠ line 3, col 1: ")
        assert "not valid UTF-8 (byte 36)" in err

    def test_directory(self, tmp_path):
        code, _, err = invoke("check", str(tmp_path))
        assert code == EXIT_INVALID
        assert "cannot read scenario file" in err


def test_scenarios_listing():
    code, out, _ = invoke("scenarios")
    assert code == EXIT_OK
    lines = out.splitlines()
    assert [line.split()[0] for line in lines] == [
        "allphotos", "empty", "fontainbleau", "hatemail", "hide",
        "hide_off", "multiderivation", "persistence", "secret",
    ]
    assert lines[0] == "allphotos rounds=2 Union of Bob's and Sue's photos with provenance-based reads"
