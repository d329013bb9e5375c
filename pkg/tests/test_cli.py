import json

import pytest
from click.testing import CliRunner

from pgcl.cli import main

from conftest import PROGRAMS


def run(*args):
    res = CliRunner().invoke(main, [str(a) for a in args])
    return res.exit_code, res.output


def prog(name):
    return PROGRAMS / name


def test_wp_noswitch_table():
    code, out = run("wp", prog("monty_noswitch.pgcl"), "--post", "[G=P]")
    assert code == 0
    rows = out.strip().splitlines()[1:]
    assert len(rows) == 27 and all(r.split()[-1] == "1/3" for r in rows)


def test_wp_json_switch():
    code, out = run("wp", prog("monty_switch.pgcl"), "--post", "[G=P]", "--output", "json")
    assert code == 0
    data = json.loads(out)
    assert data["command"] == "wp" and set(data) >= {"verdict", "table", "obligations"}
    assert {(r["value_num"], r["value_den"]) for r in data["table"]} == {(2, 3)}
    assert data["table"][0]["state"] == {"P": 1, "G": 1, "C": 1}


def test_wp_skip_and_decimal():
    code, out = run("wp", prog("skip.pgcl"), "--post", "1", "--decimal", "3")
    assert code == 0 and "1/1" in out and "~1.000" in out


def test_wlp_flag_and_loop_info():
    code, out = run("wp", prog("geometric.pgcl"), "--post", "1", "--exact")
    assert code == 0 and "policy-iteration" in out
    code, out = run("wlp", prog("geometric.pgcl"), "--post", "1")
    assert code == 0 and "descending" not in out.split("\n")[0]


@pytest.mark.parametrize("pre, expected", [("2/3", 0), ("2/3 + 1/1000", 1), ("0", 0)])
def test_check_monty_switch(pre, expected):
    code, out = run("check", prog("monty_switch.pgcl"), "--pre", pre, "--post", "[G=P]")
    assert code == expected
    if expected:
        assert "FAILS at" in out


def test_check_secret_spec_fails():
    code, out = run("check", prog("secret_spec.pgcl"), "--pre", "1", "--post", "[l != h]")
    assert code == 1 and "0/1" in out


def test_refine_verdicts():
    assert run("refine", prog("attack.pgcl"), prog("attack_fixed_secret.pgcl"))[0] == 0
    code, out = run("refine", prog("attack.pgcl"), prog("attack_leak.pgcl"))
    assert code == 1 and "with Q" in out
    assert run("refine", prog("attack.pgcl"), prog("attack.pgcl"))[0] == 0
    assert run("refine", prog("attack.pgcl"), prog("attack_leak.pgcl"), "--mode", "falsify")[0] == 1


def test_refine_loops_unsupported_and_space_mismatch():
    assert run("refine", prog("geometric.pgcl"), prog("geometric.pgcl"))[0] == 4
    assert run("refine", prog("geometric.pgcl"), prog("geometric.pgcl"), "--mode", "falsify")[0] == 0
    assert run("refine", prog("attack.pgcl"), prog("skip.pgcl"))[0] == 2


@pytest.mark.parametrize("name", ["monty_switch.pgcl", "monty_noswitch.pgcl", "skip.pgcl", "geometric.pgcl"])
def test_health(name):
    code, out = run("health", prog(name), "--samples", "10")
    assert code == 0 and out.strip().endswith("PASS")


def test_vcg_commands():
    spec = prog("monty_switch.spec")
    code, out = run("vcg", prog("monty_switch.pgcl"), "--specs", spec, "--pre", "2/3", "--post", "[G=P]")
    assert code == 0 and out.startswith("VERIFIED")
    code, out = run("vcg", prog("monty_switch.pgcl"), "--specs", spec, "--pre", "3/4", "--post", "[G=P]")
    assert code == 1 and "counterexample" in out
    code, out = run("vcg", prog("monty_noswitch.pgcl"), "--pre", "1/3", "--post", "[G=P]", "--output", "json")
    assert code == 0 and json.loads(out)["verdict"] == "VERIFIED"


def test_vcg_unknown_label(tmp_path):
    bad = tmp_path / "bad.spec"
    bad.write_text("spec s : 1 |- nope : 1\n")
    code, _ = run("vcg", prog("monty_switch.pgcl"), "--specs", bad, "--pre", "0", "--post", "1")
    assert code == 2


def test_vcg_loop_without_annotation(tmp_path):
    f = tmp_path / "loop.pgcl"
    f.write_text("var c : {0, 1};\ndo c = 0 -> c := 1 [1/2] skip od\n")
    assert run("vcg", f, "--pre", "1", "--post", "[c=1]")[0] == 4
    assert run("vcg", f, "--pre", "1", "--post", "[c=1]", "--exact")[0] == 0


def test_vcg_assumed_termination(tmp_path):
    f = tmp_path / "loop.pgcl"
    f.write_text("var c : {0, 1};\ndo c = 0 -> c := 1 [1/2] skip od @invariant [true] @termination assumed\n")
    code, out = run("vcg", f, "--pre", "1", "--post", "[c=1]")
    assert code == 0 and "assumption" in out.splitlines()[0]


def test_simulate_free():
    code, out = run("simulate-free", prog("attack.pgcl"), "--state", "h=0,l=0")
    assert code == 0 and "2 resolution(s)" in out
    assert run("simulate-free", prog("geometric.pgcl"))[0] == 4
    code, out = run("simulate-free", prog("attack.pgcl"), "--output", "json")
    assert code == 0 and len(json.loads(out)["resolutions"]) == 4


def test_error_exit_codes(tmp_path):
    assert run("wp", prog("skip.pgcl"), "--post", "[x=")[0] == 2
    bad = tmp_path / "bad.pgcl"
    bad.write_text("var x : {0, 1};\nx := 1 [3/2] skip\n")
    code, out = run("wp", bad, "--post", "1")
    assert code == 3
    out_of_domain = tmp_path / "dom.pgcl"
    out_of_domain.write_text("var x : {0, 1};\nx := x + 1\n")
    assert run("wp", out_of_domain, "--post", "1")[0] == 3
    assert run("wp", prog("skip.pgcl"))[0] == 2
    assert run("wp", prog("skip.pgcl"), "--post", "1", "--tol", "abc")[0] == 2
    assert run("wp", tmp_path / "missing.pgcl", "--post", "1")[0] == 2


def test_seeded_commands_reproducible():
    a = run("refine", prog("attack.pgcl"), prog("attack_leak.pgcl"), "--mode", "falsify", "--seed", "7")
    b = run("refine", prog("attack.pgcl"), prog("attack_leak.pgcl"), "--mode", "falsify", "--seed", "7")
    assert a == b
