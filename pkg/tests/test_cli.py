import json

import pytest
from click.testing import CliRunner

from enrichcat import cli, corr, quiv
from enrichcat.fincat import FinCat
from enrichcat.yoneda import contractible_groupoid


@pytest.fixture
def runner():
    return CliRunner()


def write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return str(p)


def monoid():
    return quiv.monoid_precategory(["1", "a"], lambda x, y: "1" if x == y == "1" else "a", "1")


# -- shape --------------------------------------------------------------------------------------

def test_shape_json(runner):
    r = runner.invoke(cli.main, ["shape", "w=0000;phi=[0,3]", "--json"])
    assert r.exit_code == 0
    data = json.loads(r.stdout)
    assert len(data["vertices"]) == 8 and len(data["edges"]) == 4


def test_shape_dot_ranks_floors(runner):
    r = runner.invoke(cli.main, ["shape", "w=00000;phi=[1,2,3]", "--dot"])
    assert r.exit_code == 0
    assert r.stdout.startswith("digraph")
    assert r.stdout.count("rank=same") == 2
    assert '"x2_1" -> "x3_0";' in r.stdout


def test_shape_output_is_deterministic(runner, tmp_path):
    outs = []
    for i in range(2):
        p = tmp_path / f"s{i}.dot"
        assert runner.invoke(cli.main, ["shape", "w=0001;phi=[0,1,3]", "--format", "dot",
                                        "--out", str(p)]).exit_code == 0
        outs.append(p.read_bytes())
    assert outs[0] == outs[1]


def test_shape_parse_error(runner):
    r = runner.invoke(cli.main, ["shape", "w=0000;phi=[0,x]"])
    assert r.exit_code == 2
    assert "parse error" in r.output and "'x'" in r.output


# -- laws ---------------------------------------------------------------------------------------

def test_unknown_suite(runner):
    assert runner.invoke(cli.main, ["laws", "nope"]).exit_code == 2


def test_laws_fold_passes(runner):
    r = runner.invoke(cli.main, ["laws", "fold"])
    assert r.exit_code == 0
    data = json.loads(r.stdout)
    assert data["ok"] and data["laws"]["fold_algebra"] == {"passed": 27, "failed": 0}


def test_laws_reports_are_byte_identical(runner):
    args = ["laws", "yoneda", "--cases", "5", "--seed", "7"]
    a, b = runner.invoke(cli.main, args), runner.invoke(cli.main, args)
    assert a.exit_code == b.exit_code == 0
    assert a.stdout == b.stdout


def test_seed_changes_cases(runner):
    a = runner.invoke(cli.main, ["laws", "quiv", "--cases", "3", "--seed", "1"]).stdout
    b = runner.invoke(cli.main, ["laws", "quiv", "--cases", "3", "--seed", "2"]).stdout
    assert json.loads(a)["config"]["seed"] == 1
    assert a != b


def test_injected_fault_fails_and_replays(runner):
    r = runner.invoke(cli.main, ["laws", "quiv", "--cases", "4", "--inject-fault"])
    assert r.exit_code == 1
    report = json.loads(r.stdout)
    failure = report["failures"][0]
    assert failure["case"] and failure["problem"]
    again = runner.invoke(cli.main, ["laws", "quiv", "--cases", "4", "--inject-fault",
                                     "--replay", failure["case"]])
    assert again.exit_code == 1
    replayed = json.loads(again.stdout)["failures"]
    assert replayed and replayed[0] == failure


def test_text_format(runner):
    r = runner.invoke(cli.main, ["laws", "fold", "--format", "text"])
    assert r.stdout.startswith("suite fold: pass")


def test_small_shape_sweep_via_config():
    rep = cli.run_suite("shapes", cli.SuiteConfig(max_word=2, max_dim=1))
    assert rep.counts["acyclic"]["failed"] == 0
    assert rep.counts["arrow_count"]["failed"] == 0


def test_config_rejects_nonpositive_caps():
    with pytest.raises(ValueError):
        cli.SuiteConfig(max_word=0)


# -- converters -----------------------------------------------------------------------------------

def test_convert_segal_roundtrip(runner, tmp_path):
    path = write(tmp_path, "p.json", monoid().to_json())
    r = runner.invoke(cli.main, ["convert", "segal", path, "--roundtrip"])
    assert r.exit_code == 0
    assert "roundtrip: ok" in r.stderr
    seg = json.loads(r.stdout)
    assert seg["N"] == 4
    back = runner.invoke(cli.main, ["convert", "segal", write(tmp_path, "s.json", seg), "--roundtrip"])
    assert back.exit_code == 0 and "roundtrip: ok" in back.stderr


def test_convert_corr_both_ways(runner, tmp_path):
    K = corr.identity_correspondence(quiv.category_precategory(FinCat.chain(1)))
    path = write(tmp_path, "k.json", K.to_json())
    r = runner.invoke(cli.main, ["convert", "corr", path, "--roundtrip"])
    assert r.exit_code == 0 and "roundtrip: ok" in r.stderr
    seg = write(tmp_path, "seg.json", json.loads(r.stdout))
    r2 = runner.invoke(cli.main, ["convert", "corr", seg, "--roundtrip"])
    assert r2.exit_code == 0 and "roundtrip: ok" in r2.stderr
    assert "kernel" in json.loads(r2.stdout)


def test_schema_violation_names_pointer(runner, tmp_path):
    data = monoid().to_json()
    data["quiver"]["components"][0]["elements"][0] = 5
    r = runner.invoke(cli.main, ["convert", "segal", write(tmp_path, "bad.json", data)])
    assert r.exit_code == 2
    assert "/quiver/components/0/elements/0" in r.output


def test_invalid_json_is_a_usage_error(runner, tmp_path):
    p = tmp_path / "x.json"
    p.write_text("{not json")
    assert runner.invoke(cli.main, ["segal", "to", str(p)]).exit_code == 2


def test_tensor_command(runner, tmp_path):
    X = FinCat.discrete(["x", "y", "z"])
    A = quiv.Quiver.over(X, {("y", "z"): ["h"]})
    B = quiv.Quiver.over(X, {("x", "y"): ["f", "g"]})
    r = runner.invoke(cli.main, ["tensor", write(tmp_path, "a.json", A.to_json()),
                                 write(tmp_path, "b.json", B.to_json())])
    assert r.exit_code == 0
    comps = {(c["src"], c["tgt"]): len(c["elements"]) for c in json.loads(r.stdout)["components"]}
    assert comps[("x", "z")] == 2 and sum(comps.values()) == 2


def test_yoneda_check_and_complete(runner, tmp_path):
    path = write(tmp_path, "j.json", contractible_groupoid(2).to_json())
    r = runner.invoke(cli.main, ["yoneda", "check", path])
    assert r.exit_code == 0 and json.loads(r.stdout)["ok"]
    c = runner.invoke(cli.main, ["complete", path])
    assert c.exit_code == 0
    assert "input complete: False; 2 -> 1 objects" in c.stderr


def test_represent_command(runner, tmp_path):
    K = corr.identity_correspondence(quiv.category_precategory(FinCat.chain(1)))
    r = runner.invoke(cli.main, ["corr", "represent", write(tmp_path, "k.json", K.to_json())])
    assert r.exit_code == 0
    out = json.loads(r.stdout)
    assert out["representable"] and out["objects"] == {"0": "0", "1": "1"}


def test_fold_alg_command(runner):
    r = runner.invoke(cli.main, ["fold-alg", "--max-monoid", "2", "--carrier", "1"])
    assert r.exit_code == 0 and json.loads(r.stdout)["ok"]
