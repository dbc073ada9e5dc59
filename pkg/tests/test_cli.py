import csv
import json
import subprocess
import sys

import pytest

from conftest import reference_policy_text
from ruleevo.cli import main
from ruleevo.fitness import evaluate
from ruleevo.seeding import STREAM_EVAL, derive_seed
from ruleevo.policy import parse_policy
from ruleevo.qd import archive_load

RUN = ["run", "--config", "cartpole.json", "--quiet", "--set", "engine.population=20",
       "--set", "engine.generations=3", "--set", "engine.eval_episodes=2"]


def _read(d, name):
    return (d / name).read_text()


def test_run_writes_outputs(tmp_path, capsys):
    assert main(RUN + ["--seed", "4", "--out", str(tmp_path)]) == 0
    summary = json.loads(_read(tmp_path, "summary.json"))
    assert summary["config"]["seed"] == 4
    assert summary["config"]["engine"]["population"] == 20
    parse_policy(summary["best_policy_text"], 4, 2)
    assert _read(tmp_path, "best_policy.txt").strip() == summary["best_policy_text"]
    rows = list(csv.DictReader(_read(tmp_path, "stats.csv").splitlines()))
    assert len(rows) == summary["generations_run"]
    archive_load(_read(tmp_path, "archive.json"))
    assert "backend" in json.loads(_read(tmp_path, "timing.json"))
    assert summary["best_policy_text"] in capsys.readouterr().out


def test_run_is_byte_identical_across_workers(tmp_path):
    for w in (1, 3):
        assert main(RUN + ["--seed", "9", "--workers", str(w), "--out", str(tmp_path / f"w{w}")]) == 0
    for name in ("summary.json", "stats.csv", "archive.json", "best_policy.txt"):
        assert _read(tmp_path / "w1", name) == _read(tmp_path / "w3", name)


def test_replay(tmp_path):
    assert main(RUN + ["--seed", "2", "--out", str(tmp_path / "a")]) == 0
    assert main(["replay", str(tmp_path / "a" / "summary.json"), "--out", str(tmp_path / "b"), "--quiet"]) == 0
    assert _read(tmp_path / "a", "summary.json") == _read(tmp_path / "b", "summary.json")


def test_replay_detects_tampering(tmp_path):
    assert main(RUN + ["--seed", "2", "--out", str(tmp_path / "a")]) == 0
    doc = json.loads(_read(tmp_path / "a", "summary.json"))
    doc["fitness"] = -1.0
    (tmp_path / "t.json").write_text(json.dumps(doc))
    assert main(["replay", str(tmp_path / "t.json"), "--out", str(tmp_path / "b"), "--quiet"]) == 1


@pytest.mark.parametrize("extra", [["--set", "engine.generations=0"], ["--set", "engine.bogus=1"],
                                   ["--set", "nosuchkey=1"], ["--set", "engine.population=abc"]])
def test_bad_config_exits_2(tmp_path, extra):
    assert main(RUN + extra + ["--out", str(tmp_path)]) == 2
    assert not (tmp_path / "summary.json").exists()


def test_unknown_key_in_file(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"env": "cartpole", "colour": "red"}))
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "o"), "--quiet"]) == 2


def test_missing_config(tmp_path):
    assert main(["run", "--config", str(tmp_path / "none.json"), "--out", str(tmp_path)]) == 2


def test_eval(tmp_path, capsys):
    f = tmp_path / "p.txt"
    f.write_text(reference_policy_text("acrobot"))
    assert main(["eval", str(f), "--env", "acrobot", "--episodes", "3"]) == 0
    out = capsys.readouterr().out.strip().splitlines()
    assert len(out) == 4 and out[-1].startswith("mean: ")
    returns = [float(line.split(": ")[1]) for line in out[:3]]
    assert float(out[-1].split(": ")[1]) == pytest.approx(sum(returns) / 3)


@pytest.mark.parametrize("text,env", [("if s[0] >= 1 then 0\nelse 0\n", "cartpole"),
                                      ("if s[9] > 1 then 0\nelse 0\n", "cartpole"),
                                      ("if s[0] > 1 then 7\nelse 0\n", "mountaincar")])
def test_eval_bad_policy_exits_2(tmp_path, text, env, capsys):
    f = tmp_path / "p.txt"
    f.write_text(text)
    assert main(["eval", str(f), "--env", env]) == 2
    assert "error" in capsys.readouterr().err


def test_dump_archive(tmp_path, capsys):
    assert main(RUN + ["--out", str(tmp_path)]) == 0
    capsys.readouterr()
    assert main(["dump-archive", str(tmp_path / "archive.json"), "--format", "csv"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "rule_bin,th_bin,fitness,complexity"
    assert main(["dump-archive", str(tmp_path / "archive.json")]) == 0
    assert json.loads(capsys.readouterr().out)["cells"]


def test_dump_archive_malformed(tmp_path):
    f = tmp_path / "a.json"
    f.write_text("{broken")
    assert main(["dump-archive", str(f)]) == 2


def test_console_script_module():
    r = subprocess.run([sys.executable, "-m", "ruleevo.cli", "--help"], capture_output=True, text=True)
    assert r.returncode == 0 and "replay" in r.stdout


def _eval_mean(tmp_path, capsys, env, episodes):
    f = tmp_path / f"{env}.txt"
    f.write_text(reference_policy_text(env))
    assert main(["eval", str(f), "--env", env, "--episodes", str(episodes)]) == 0
    return float(capsys.readouterr().out.strip().splitlines()[-1].split(": ")[1])


def test_eval_reference_cartpole_five_episodes(tmp_path, capsys):
    assert _eval_mean(tmp_path, capsys, "cartpole", 5) == 500.0


def test_eval_reference_mountaincar_hundred_episodes(tmp_path, capsys):
    assert _eval_mean(tmp_path, capsys, "mountaincar", 100) >= -110.0


def test_eval_reference_acrobot_hundred_episodes(tmp_path, capsys):
    assert _eval_mean(tmp_path, capsys, "acrobot", 100) >= -100.0


def test_run_seed_7_best_policy_reaches_500(tmp_path):
    assert main(["run", "--config", "cartpole.json", "--seed", "7", "--out", str(tmp_path), "--quiet"]) == 0
    policy = parse_policy((tmp_path / "best_policy.txt").read_text(), 4, 2)
    cell = next(c for c in archive_load(_read(tmp_path, "archive.json")).cells.values() if c.policy == policy)
    # re-evaluated on the start states of the generation that archived it
    rep = evaluate(policy, "cartpole", 5, 0.1, derive_seed(7, STREAM_EVAL, cell.inserted_at))
    assert rep.performance == 500.0
    assert json.loads(_read(tmp_path, "summary.json"))["performance"] == 500.0
