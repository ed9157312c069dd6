"""
Command-line surface: subcommands and exit codes
"""
import json

import pandas as pd
import pytest
import yaml

from conftest import make_instance
from main import EXIT_BAD_INPUT, EXIT_INFEASIBLE, EXIT_OK, main
from src.core import parse_instance, serialize_instance

TINY_SPEC = {"topology": "erdos-renyi", "node_count": 8, "user_count": 3, "degree": None, "p": 0.5}


@pytest.fixture
def instance_file(tmp_path, illustrative):
    path = tmp_path / "illustrative.json"
    path.write_text(serialize_instance(illustrative), encoding="utf-8")
    return path


def test_gen(tmp_path):
    out = tmp_path / "instances"
    code = main(["gen", "--count", "2", "--topology", "random-regular", "--nodes", "10",
                 "--users", "3", "--degree", "3", "--seed", "4", "--out", str(out)])
    assert code == EXIT_OK
    files = sorted(out.glob("instance_*.json"))
    assert [f.name for f in files] == ["instance_000.json", "instance_001.json"]
    instance = parse_instance(files[0].read_text(encoding="utf-8"))
    assert instance.graph.node_count == 10 and instance.user_count == 3


def test_gen_needs_p_for_erdos_renyi(tmp_path):
    code = main(["gen", "--topology", "erdos-renyi", "--nodes", "10", "--users", "3",
                 "--out", str(tmp_path)])
    assert code == EXIT_BAD_INPUT


def test_solve(tmp_path, instance_file, capsys):
    out = tmp_path / "solution.json"
    assert main(["solve", "--algo", "dp", "--instance", str(instance_file), "--out", str(out)]) == EXIT_OK
    assert "dp: cost 21.000000" in capsys.readouterr().out
    assert json.loads(out.read_text(encoding="utf-8"))["cost"] == 21.0


def test_solve_missing_file(tmp_path):
    assert main(["solve", "--algo", "dp", "--instance", str(tmp_path / "none.json")]) == EXIT_BAD_INPUT


def test_solve_malformed_instance(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json", encoding="utf-8")
    assert main(["solve", "--algo", "dijkstra", "--instance", str(path)]) == EXIT_BAD_INPUT


def test_solve_non_utf8_instance(tmp_path):
    path = tmp_path / "latin1.json"
    path.write_bytes(b"{\"n\": \xff}")
    assert main(["solve", "--algo", "dp", "--instance", str(path)]) == EXIT_BAD_INPUT


def test_solve_infeasible(tmp_path):
    path = tmp_path / "split.json"
    instance = make_instance(4, {(0, 1): 1.0, (2, 3): 1.0}, [(3, 1.0)])
    path.write_text(serialize_instance(instance), encoding="utf-8")
    assert main(["solve", "--algo", "dp", "--instance", str(path)]) == EXIT_INFEASIBLE


def test_gpn_without_checkpoint(instance_file):
    assert main(["solve", "--algo", "gpn", "--instance", str(instance_file)]) == EXIT_BAD_INPUT


def test_viz(tmp_path, instance_file):
    out = tmp_path / "dot"
    code = main(["viz", "--instance", str(instance_file), "--algos", "dp", "greedy", "--out", str(out)])
    assert code == EXIT_OK
    assert sorted(p.name for p in out.glob("*.dot")) == ["dp.dot", "greedy.dot"]


def test_bench(tmp_path):
    config = tmp_path / "suite.yaml"
    config.write_text(yaml.safe_dump({"suite": "node-sweep", "instances": 1, "seed": 3}), encoding="utf-8")
    out = tmp_path / "results"
    code = main(["bench", "--config", str(config), "--solvers", "dijkstra", "greedy", "--out", str(out)])
    assert code == EXIT_OK
    frame = pd.read_csv(out / "node-sweep.csv")
    assert len(frame) == 5 * 2
    assert (out / "node-sweep_summary.csv").exists()


def test_bench_rejects_unknown_config_keys(tmp_path):
    config = tmp_path / "suite.yaml"
    config.write_text("suite: node-sweep\nrepetitions: 3\n", encoding="utf-8")
    assert main(["bench", "--config", str(config), "--solvers", "dijkstra"]) == EXIT_BAD_INPUT


def test_train_then_eval(tmp_path, capsys):
    train_yaml = tmp_path / "train.yaml"
    train_yaml.write_text(yaml.safe_dump({
        "batch_size": 2, "epochs": 1, "steps_per_epoch": 2, "train_spec": TINY_SPEC,
        "validation_spec": TINY_SPEC, "validation_instances": 1, "validation_interval": 1,
    }), encoding="utf-8")
    model_yaml = tmp_path / "model.yaml"
    model_yaml.write_text(yaml.safe_dump({"hidden_dim": 8, "heads": 2}), encoding="utf-8")
    run_dir = tmp_path / "run"
    code = main(["train", "--config", str(train_yaml), "--model-config", str(model_yaml),
                 "--max-steps", "1", "--out", str(run_dir)])
    assert code == EXIT_OK
    checkpoint = run_dir / "checkpoint.gpnc"
    assert checkpoint.exists() and (run_dir / "metrics.csv").exists()
    assert "trained full for 1 steps" in capsys.readouterr().out

    code = main(["eval", "--checkpoint", str(checkpoint), "--config", str(train_yaml), "--instances", "1"])
    assert code == EXIT_OK
    assert "ratio" in capsys.readouterr().out
