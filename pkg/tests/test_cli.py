import json
import subprocess
import sys
from pathlib import Path

import pytest
from click.testing import CliRunner

from grafrepair import io
from grafrepair.cli import cli, main
from grafrepair.conditions import graph_satisfies, kmax
from grafrepair.consistency import classify_transformation
from grafrepair.fixtures import G0, RULES, c_noDep, c_one
from grafrepair.rewrite import apply, matches

DATA = Path(__file__).resolve().parent.parent / "data"


def d(name):
    return str(DATA / name)


@pytest.fixture
def run():
    runner = CliRunner()

    def go(*args, env=None):
        return runner.invoke(cli, list(args), env=env)

    return go


class TestValidate:
    @pytest.mark.parametrize("name", ["G0.json", "c_one.json", "rules.json", "good_set.json"])
    def test_ok(self, run, name):
        r = run("validate", d(name))
        assert r.exit_code == 0 and r.output.startswith("ok:")

    def test_cyclic_set(self, run):
        r = run("validate", d("bad_set.json"))
        assert r.exit_code == 1

    def test_kind(self, run):
        assert run("validate", d("G0.json"), "--kind", "rule").exit_code == 2

    def test_missing_file(self, run, tmp_path):
        assert run("validate", str(tmp_path / "nope.json")).exit_code == 2

    def test_malformed(self, run, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{")
        r = run("validate", str(bad))
        assert r.exit_code == 2


class TestQueries:
    def test_check(self, run):
        assert run("check", "-g", d("G1.json"), "-c", d("c_one.json")).exit_code == 0
        r = run("check", "-g", d("G0.json"), "-c", d("c_one.json"))
        assert r.exit_code == 1 and r.output.startswith("false")

    def test_check_layer(self, run):
        r = run("check", "-g", d("G0.json"), "-c", d("c_one.json"), "--layer", "-1", "--format", "json")
        assert r.exit_code == 0 and json.loads(r.output) is True
        # the bare class already violates the universal layer
        assert run("check", "-g", d("G0.json"), "-c", d("c_one.json"), "--layer", "0").exit_code == 1
        assert run("check", "-g", d("G0.json"), "-c", d("c_one.json"), "--layer", "9").exit_code == 2

    @pytest.mark.parametrize("g", ["G0.json", "G1.json", "G2.json", "G_dep.json"])
    @pytest.mark.parametrize("c", ["c_one.json", "c_noDep.json", "c_le1.json"])
    def test_kmax_matches_library(self, run, g, c):
        r = run("kmax", "-g", d(g), "-c", d(c))
        assert r.exit_code == 0
        assert int(r.output) == kmax(io.load(d(g)), io.load(d(c)))

    def test_nv(self, run):
        # two bare classes, each missing both intermediate graphs
        r = run("nv", "-g", d("G2.json"), "-c", d("c_one.json"), "--format", "json")
        assert json.loads(r.output) == [0, 4, "inf"]
        r = run("nv", "-g", d("G0.json"), "-c", d("c_one.json"), "--layer", "0")
        assert r.output.strip() == "2"
        assert run("nv", "-g", d("G0.json"), "-c", d("c_one.json"), "--layer", "2").exit_code == 2

    def test_match(self, run):
        r = run("match", "-g", d("G2.json"), "-r", d("rules.json"), "--name", "addF")
        assert r.exit_code == 0 and len(json.loads(r.output)) == 2
        assert run("match", "-g", d("G0.json"), "-r", d("rules.json"), "--name", "delDep").exit_code == 1

    def test_unknown_rule_name(self, run):
        assert run("match", "-g", d("G0.json"), "-r", d("rules.json"), "--name", "nope").exit_code == 2

    def test_apply(self, run, tmp_path):
        out = tmp_path / "h.json"
        r = run("apply", "-g", d("G0.json"), "-r", d("rules.json"), "--name", "addF", "-o", str(out))
        assert r.exit_code == 0
        assert graph_satisfies(io.load(out), c_one)

    def test_classify_matches_library(self, run):
        r = run("classify", "-g", d("G0.json"), "-r", d("rules.json"), "-c", d("c_one.json"), "--name", "addF")
        assert r.exit_code == 0
        t = apply(RULES["addF"], matches(RULES["addF"], G0)[0])
        assert json.loads(r.output) == classify_transformation(t, c_one).as_dict()


class TestSynth:
    def test_main(self, run, tmp_path):
        out = tmp_path / "r.json"
        r = run("synth-ac", "main", "-r", d("rules.json"), "--name", "addF", "-c", d("c_one.json"), "--layer", "-1", "-o", str(out))
        assert r.exit_code == 0
        rule = io.load(out, "rule")
        assert rule.name == "addF"

    def test_bad_layer(self, run):
        r = run("synth-ac", "main", "-r", d("rules.json"), "--name", "addF", "-c", d("c_one.json"), "--layer", "0")
        assert r.exit_code == 2

    def test_not_basic(self, run):
        r = run("synth-ac", "basic", "-r", d("rules.json"), "--name", "delDep", "-c", d("c_one.json"), "--layer", "-1")
        assert r.exit_code == 1


class TestConflicts:
    def test_constraint(self, run):
        r = run("conflicts", "--constraint", d("c_one.json"))
        assert r.exit_code == 0
        assert json.loads(r.output)["edges"] == []

    def test_good_set(self, run):
        assert run("conflicts", "--set", d("good_set.json")).exit_code == 0

    def test_bad_set(self, run):
        r = run("conflicts", "--set", d("bad_set.json"))
        assert r.exit_code == 1
        assert json.loads(r.output.splitlines()[0])["cycle"]

    def test_dot(self, run):
        r = run("conflicts", "--constraint", d("c_one.json"), "--format", "dot")
        assert r.output.startswith("digraph")

    def test_needs_one_source(self, run):
        assert run("conflicts").exit_code == 2


class TestRepair:
    def test_single(self, run, tmp_path):
        out = tmp_path / "h.json"
        r = run("repair", "-g", d("G2.json"), "-c", d("c_one.json"), "-r", d("rules.json"), "--seed", "7", "-o", str(out))
        assert r.exit_code == 0
        assert graph_satisfies(io.load(out), c_one)

    def test_set(self, run):
        r = run("repair", "-g", d("G_dep.json"), "-c", d("good_set.json"))
        assert r.exit_code == 0
        h = io.loads(r.output)
        assert graph_satisfies(h, c_one) and graph_satisfies(h, c_noDep)

    def test_construct(self, run):
        r = run("repair", "-g", d("G_dep.json"), "-c", d("c_noDep.json"), "--construct")
        assert r.exit_code == 0 and graph_satisfies(io.loads(r.output), c_noDep)

    def test_cyclic_set(self, run):
        assert run("repair", "-g", d("G0.json"), "-c", d("bad_set.json")).exit_code == 1

    def test_cap(self, run):
        r = run("repair", "-g", d("G0.json"), "-c", d("c_one.json"), "-r", d("rules.json"), "--max-iterations", "0")
        assert r.exit_code == 1 and "iteration cap" in r.output

    def test_needs_rules(self, run):
        assert run("repair", "-g", d("G0.json"), "-c", d("c_one.json")).exit_code == 2

    def test_trace_is_deterministic(self, run, tmp_path):
        texts = []
        for i in range(2):
            tr = tmp_path / f"t{i}.jsonl"
            run("repair", "-g", d("G2.json"), "-c", d("c_one.json"), "-r", d("rules.json"), "--seed", "3", "--trace", str(tr))
            texts.append(tr.read_text())
        assert texts[0] == texts[1] and texts[0]

    def test_seed_from_environment(self, run, tmp_path):
        a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        run("repair", "-g", d("G2.json"), "-c", d("c_one.json"), "-r", d("rules.json"), "--seed", "5", "--trace", str(a))
        run("repair", "-g", d("G2.json"), "-c", d("c_one.json"), "-r", d("rules.json"), "--trace", str(b),
            env={"GRAFREPAIR_SEED": "5"})
        assert a.read_text() == b.read_text()

    def test_dot_output(self, run):
        r = run("repair", "-g", d("G0.json"), "-c", d("c_one.json"), "-r", d("rules.json"), "--format", "dot")
        assert r.output.startswith("digraph")


def test_main_returns_codes(capsys):
    assert main(["kmax", "-g", d("G0.json"), "-c", d("c_one.json")]) == 0
    assert capsys.readouterr().out.strip() == "-1"
    assert main(["check", "-g", d("G0.json"), "-c", d("c_one.json")]) == 1
    assert main(["validate", "/nonexistent.json"]) == 2
    assert main(["--help"]) == 0


def test_console_script():
    out = subprocess.run([sys.executable, "-m", "grafrepair.cli", "kmax", "-g", d("G1.json"), "-c", d("c_one.json")],
                         capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout.strip() == "1"
