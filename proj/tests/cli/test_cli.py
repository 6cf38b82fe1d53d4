import csv
import json
import os
import pathlib
import shutil
import subprocess

import jsonschema
import pytest
from referencing import Registry, Resource

BIN = os.environ["MORAN_LAB"]
DATA = pathlib.Path(os.environ["MORAN_DATA"])
SCHEMAS = pathlib.Path(os.environ["MORAN_SCHEMAS"])


def _schemas():
    docs = {p.name: json.loads(p.read_text()) for p in SCHEMAS.glob("*.schema.json")}
    registry = Registry().with_resources(
        [(name, Resource.from_contents(doc)) for name, doc in docs.items()])
    return docs, registry


DOCS, REGISTRY = _schemas()


def validate(doc, name):
    validator = jsonschema.Draft202012Validator(DOCS[f"{name}.schema.json"], registry=REGISTRY)
    validator.validate(doc)


def run(*args, env=None, cwd=None):
    full_env = dict(os.environ)
    full_env.pop("MORAN_LAB_CAP", None)
    full_env.update(env or {})
    return subprocess.run([BIN, *map(str, args)], capture_output=True, text=True, env=full_env, cwd=cwd)


def run_json(*args, **kw):
    p = run(*args, **kw)
    assert p.returncode == 0, p.stderr
    return json.loads(p.stdout)


def d(name):
    return DATA / name


def test_types_files_match_schema():
    for name in ["mutant.json", "three.json", "three_raised.json"]:
        validate(json.loads(d(name).read_text()), "types")


def test_estimate_fptras_schema_and_value():
    out = run_json("estimate", "--graph", d("k3.txt"), "--types", d("mutant.json"), "--seed", 7,
                   "--eps", "0.2", "--delta", "0.2")
    validate(out, "estimate")
    r = out["result"]
    assert r["mode"] == "fptras" and r["alpha"] == "mutant" and r["n"] == 3
    assert abs(r["estimate"] - 4 / 7) < 0.2 * 4 / 7
    assert out["manifest"]["masterSeed"] == 7
    assert out["manifest"]["argv"][0] == "estimate"


def test_estimate_plain_schema():
    out = run_json("estimate", "--graph", d("k3.txt"), "--types", d("mutant.json"), "--seed", 7,
                   "--mode", "plain", "--replicates", 2000)
    validate(out, "estimate")
    r = out["result"]
    assert r["ciLow"] <= 4 / 7 <= r["ciHigh"]


def test_estimate_is_deterministic_across_threads():
    a = run_json("estimate", "--graph", d("p3.txt"), "--types", d("mutant.json"), "--seed", 11,
                 "--eps", "0.3", "--delta", "0.3", "--threads", 1)
    b = run_json("estimate", "--graph", d("p3.txt"), "--types", d("mutant.json"), "--seed", 11,
                 "--eps", "0.3", "--delta", "0.3", "--threads", 4)
    assert a["result"] == b["result"]


def test_exact_schema_and_known_values():
    out = run_json("exact", "--graph", d("p3.txt"), "--types", d("mutant.json"), "--dist", "mut")
    validate(out, "exact")
    r = out["result"]
    assert r["backend"] == "rational"
    assert r["states"]["2"]["pi"] == ["7/12", "5/12"]
    assert r["distribution"]["pi"]["mutant"] == "7/12"


def test_exact_float_with_list_distribution():
    out = run_json("exact", "--graph", d("p3.txt"), "--types", d("mutant.json"), "--backend", "float",
                   "--dist", f"list:{d('p3_start.jsonl')}")
    validate(out, "exact")
    assert out["result"]["distribution"]["pi"] is None
    assert abs(out["result"]["distribution"]["piFloat"]["mutant"] - 2 / 3) < 1e-12


def test_exact_cap_from_environment():
    p = run("exact", "--graph", d("p3.txt"), "--types", d("mutant.json"), env={"MORAN_LAB_CAP": "4"})
    assert p.returncode == 4
    assert run("exact", "--graph", d("p3.txt"), "--types", d("mutant.json"), "--cap", 8).returncode == 0
    assert run("exact", "--graph", d("p3.txt"), "--types", d("mutant.json"), "--cap", 7).returncode == 4


def test_exact_default_cap_rejects_large_graph():
    assert run("exact", "--graph", d("p30.txt"), "--types", d("mutant.json")).returncode == 4


def test_bounds_schema_and_values():
    out = run_json("bounds", "--n", 10, "--types", d("three.json"))
    validate(out, "bounds")
    values = {b["quantity"]: b["value"] for b in out["result"]["bounds"]}
    assert "22000" in values.values()
    assert "1/10" in values.values()


def test_bounds_sandwich_on_complete_graph():
    out = run_json("bounds", "--graph", d("k3.txt"), "--types", d("mutant.json"), "--mutants", 1)
    validate(out, "bounds")
    assert "4/7" in [b["value"] for b in out["result"]["bounds"]]


def test_bounds_needs_exactly_one_size_source():
    assert run("bounds", "--types", d("mutant.json")).returncode == 2
    assert run("bounds", "--n", 3, "--graph", d("k3.txt"), "--types", d("mutant.json")).returncode == 2


def test_simulate_schema_and_record(tmp_path):
    rec = tmp_path / "traj.csv"
    out = run_json("simulate", "--graph", d("p3.txt"), "--types", d("mutant.json"),
                   "--start", "wild,mutant,wild", "--seed", 4, "--record", rec)
    validate(out, "simulate")
    rows = list(csv.reader(rec.open()))
    assert len(rows) >= 2
    assert rows[0][0] == "step"
    assert len(rows) - 1 == out["result"]["records"][0]["steps"]


def test_simulate_full_stop():
    out = run_json("simulate", "--graph", d("c4.txt"), "--types", d("three.json"), "--stop", "full",
                   "--seed", 3, "--replicates", 20)
    validate(out, "simulate")
    assert out["result"]["fixated"] == 20
    assert all(r["outcome"] == "fixated" for r in out["result"]["records"])


def test_simulate_truncation():
    out = run_json("simulate", "--graph", d("p3.txt"), "--types", d("mutant.json"), "--seed", 1,
                   "--replicates", 3, "--max-steps", 0)
    assert out["result"]["truncated"] == 3
    assert all(r["type"] is None for r in out["result"]["records"])


def test_couple_schema_and_no_violation(tmp_path):
    log = tmp_path / "c.csv"
    out = run_json("couple", "--graph", d("c4.txt"), "--types", d("three.json"),
                   "--types-prime", d("three_raised.json"), "--start", "alpha,beta,gamma,beta",
                   "--seed", 2, "--events", 2000, "--log", log)
    validate(out, "couple")
    assert out["result"]["violated"] is False
    assert sum(out["result"]["caseCounts"]) == out["result"]["events"]
    assert log.exists()


def test_couple_rejects_wrong_order():
    p = run("couple", "--graph", d("c4.txt"), "--types", d("three_raised.json"),
            "--types-prime", d("three.json"), "--start", "alpha,beta,gamma,beta", "--seed", 2)
    assert p.returncode == 2


@pytest.mark.parametrize("args", [
    ["estimate", "--types", "mutant.json", "--seed", "1"],
    ["estimate", "--graph", "k3.txt", "--types", "mutant.json"],
    ["estimate", "--graph", "k3.txt", "--types", "mutant.json", "--seed", "1", "--alpha", "wild"],
    ["estimate", "--graph", "k3.txt", "--types", "mutant.json", "--seed", "1", "--eps", "1.5"],
    ["exact", "--graph", "missing.txt", "--types", "mutant.json"],
    ["nosuchcommand"],
])
def test_config_errors_exit_2(args):
    resolved = [str(d(a)) if a.endswith((".txt", ".json")) else a for a in args]
    assert run(*resolved).returncode == 2


def test_input_errors_exit_3(tmp_path):
    g = tmp_path / "loop.txt"
    g.write_text("0 1\n1 1\n")
    p = run("exact", "--graph", g, "--types", d("mutant.json"))
    assert p.returncode == 3
    assert "SelfLoop" in p.stderr and "line 2" in p.stderr

    t = tmp_path / "bad.json"
    t.write_text('{"types": [{"name": "a", "fitness": "0"}], "ordinary": "a"}')
    assert run("exact", "--graph", d("k2.txt"), "--types", t).returncode == 3

    disconnected = tmp_path / "split.txt"
    disconnected.write_text("0 1\n2 3\n")
    assert run("exact", "--graph", disconnected, "--types", d("mutant.json")).returncode == 3


def test_text_format():
    p = run("bounds", "--n", 4, "--types", d("mutant.json"), "--format", "text")
    assert p.returncode == 0
    assert "{" not in p.stdout
    assert "direction" in p.stdout


def test_manifest_replay_round_trip(tmp_path):
    g = tmp_path / "p3.txt"
    shutil.copy(d("p3.txt"), g)
    manifest = tmp_path / "m.json"
    first = run("estimate", "--graph", g, "--types", d("mutant.json"), "--seed", 5,
                "--eps", "0.3", "--delta", "0.3", "--manifest", manifest)
    assert first.returncode == 0
    validate(json.loads(manifest.read_text()), "manifest")
    again = run("replay", manifest)
    assert again.returncode == 0
    assert again.stdout == first.stdout

    g.write_text("0 1\n1 2\n0 2\n")
    changed = run("replay", manifest)
    assert changed.returncode == 3
    assert "changed" in changed.stderr
