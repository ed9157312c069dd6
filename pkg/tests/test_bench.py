"""
Benchmark harness: scoring, suites, runner, incremental and ablation runs, DOT export
"""
import math
import re

import numpy as np
import pandas as pd
import pytest
import torch

from conftest import DATA_DIR, ROOT, make_instance
from src.bench import (SuiteConfig, SuitePoint, SuiteRunner, IncrementalRunner, ablation_run,
                       assert_tree_preserved, cost_delay_score, export_dot, instance_seed, load_variants, suite_points,
                       summarize, tree_to_dot, variant_means, write_dot_files)
from src.bench.runner import REPEATS, solve_row, timed_solve
from src.core import (CheckpointError, GenConfig, InvalidConfigError, MulticastTree, TreeError)
from src.gpn import (GpnModel, GpnSolver, ModelConfig, TrainConfig, VARIANTS, save_checkpoint, train,
                     variant_config)
from src.solvers import BaseSolver, DijkstraSolver, DpSolver, GreedySolver, dijkstra_reuse
from src.utils import load_config

SMALL_POINT = SuitePoint(0, "n=8", GenConfig(topology="erdos-renyi", node_count=8, user_count=3,
                                             degree=None, p=0.5))
RUNTIME_COLUMNS = ["runtime", "log10_runtime", "score"]


class CountingSolver(BaseSolver):
    tag = "dijkstra"

    def __init__(self):
        super().__init__()
        self.calls = 0

    def solve_instance(self, instance):
        self.calls += 1
        return dijkstra_reuse(instance)


def small_config(**overrides) -> SuiteConfig:
    values = dict(instances=3, solvers=("dp", "dijkstra", "greedy"), seed=11)
    values.update(overrides)
    return SuiteConfig(**values)


def test_score_matches_the_reference_table():
    table = pd.read_csv(DATA_DIR / "reference_scores.csv")
    assert len(table) == 30
    for row in table.itertuples():
        assert cost_delay_score(row.cost, 10 ** row.log10_runtime) == pytest.approx(row.score, abs=5e-3)
    assert cost_delay_score(6.781, 10 ** 1.812) == pytest.approx(15.374, abs=1e-3)
    assert cost_delay_score(1.0, 1.0) == 2.0


def test_suite_points():
    assert [p.label for p in suite_points(SuiteConfig(suite="node-sweep"))] == \
        ["n=30", "n=35", "n=40", "n=45", "n=50"]
    degree = suite_points(SuiteConfig(suite="degree-sweep"))
    assert [p.recipe.degree for p in degree] == [3, 4, 5, 6, 7]
    average = suite_points(SuiteConfig(suite="degree-sweep", degree_mode="average"))
    assert [p.recipe.avg_degree for p in average] == [3.0, 4.0, 5.0, 6.0]
    users = suite_points(SuiteConfig(suite="user-sweep"))
    assert [p.recipe.user_count for p in users] == [1, 2, 3, 4, 5, 6, 9, 12, 15]
    assert all(p.recipe.node_count == 50 for p in users)
    assert [p.index for p in users] == list(range(len(users)))


def test_instance_seed_depends_only_on_its_key():
    assert instance_seed(42, 1, 3) == instance_seed(42, 1, 3)
    assert len({instance_seed(42, p, i) for p in range(3) for i in range(10)}) == 30
    assert instance_seed(42, 0, 0) != instance_seed(43, 0, 0)


@pytest.mark.parametrize("kwargs", [{"suite": "speed"}, {"instances": 0}, {"solvers": ()},
                                    {"solvers": ("dp", "lp")}, {"degree_mode": "max"},
                                    {"threads": 0}])
def test_suite_config_rejects(kwargs):
    with pytest.raises(InvalidConfigError):
        SuiteConfig(**kwargs)


def test_runner_rows_and_files(tmp_path):
    runner = SuiteRunner(small_config(), out_dir=tmp_path)
    frame = runner.run([SMALL_POINT])
    assert len(frame) == 9
    assert set(frame["solver"]) == {"dp", "dijkstra", "greedy"}
    solved = frame[frame["feasible"].astype(bool)]
    assert np.allclose(solved["score"], 2 * solved["cost"] + solved["log10_runtime"])
    for _, group in solved.groupby("instance"):
        costs = dict(zip(group["solver"], group["cost"]))
        if "dp" in costs:
            assert costs["dijkstra"] >= costs["dp"] - 1e-9
            assert costs["greedy"] >= costs["dp"] - 1e-9
    written = pd.read_csv(runner.results_path)
    assert list(written.columns) == list(frame.columns)
    assert len(written) == 9
    summary = pd.read_csv(runner.summary_path)
    assert len(summary) == 3
    assert summary["feasible_count"].sum() == frame["feasible"].astype(bool).sum()


def test_runs_are_deterministic_apart_from_timing():
    first = SuiteRunner(small_config()).run([SMALL_POINT])
    second = SuiteRunner(small_config()).run([SMALL_POINT])
    pd.testing.assert_frame_equal(first.drop(columns=RUNTIME_COLUMNS),
                                  second.drop(columns=RUNTIME_COLUMNS))


def test_threads_do_not_change_results():
    single = SuiteRunner(small_config(threads=1)).run([SMALL_POINT])
    pooled = SuiteRunner(small_config(threads=2)).run([SMALL_POINT])
    pd.testing.assert_frame_equal(single.drop(columns=RUNTIME_COLUMNS),
                                  pooled.drop(columns=RUNTIME_COLUMNS))


def test_resume_skips_finished_points(tmp_path):
    config = small_config(solvers=("dijkstra",))
    first = SuiteRunner(config, out_dir=tmp_path).run([SMALL_POINT])
    counting = CountingSolver()
    second = SuiteRunner(config, solvers={"dijkstra": counting}, out_dir=tmp_path).run([SMALL_POINT])
    assert counting.calls == 0
    assert len(second) == len(first)

    fresh = CountingSolver()
    SuiteRunner(small_config(solvers=("dijkstra",), resume=False), solvers={"dijkstra": fresh},
                out_dir=tmp_path).run([SMALL_POINT])
    assert fresh.calls >= config.instances


def test_infeasible_row():
    instance = make_instance(4, {(0, 1): 1.0, (2, 3): 1.0}, [(3, 1.0)])
    row = solve_row("node-sweep", SMALL_POINT, 0, instance, "dijkstra", DijkstraSolver())
    assert not row.feasible
    assert math.isnan(row.cost) and math.isnan(row.score)
    assert row.runtime > 0.0


def test_fast_solves_are_repeated(illustrative):
    solver = CountingSolver()
    solution = timed_solve(solver, illustrative)
    assert solver.calls == 1 + REPEATS
    assert solution.cost == 21.0
    assert solution.runtime > 0.0


def test_summarize_empty_frame():
    assert list(summarize(pd.DataFrame()).columns)[:3] == ["point", "point_label", "solver"]


def _incremental_runner() -> IncrementalRunner:
    config = SuiteConfig(suite="incremental", instances=2, solvers=("greedy", "dijkstra"),
                         base_users=3, added_users=(1, 2), seed=5)
    runner = IncrementalRunner(config)
    runner.base_point = SuitePoint(0, "users=3", GenConfig(topology="random-regular", node_count=12,
                                                           user_count=3, degree=4))
    return runner


def test_incremental_rows():
    runner = _incremental_runner()
    assert runner.row_labels() == ["greedy-warm", "greedy-cold", "dijkstra-cold"]
    frame = runner.run()
    assert list(frame["point_label"].unique()) == ["added=1", "added=2"]
    assert len(frame) == 2 * 2 * 3
    assert set(frame["solver"]) == {"greedy-warm", "greedy-cold", "dijkstra-cold"}


def test_incremental_needs_its_suite():
    with pytest.raises(InvalidConfigError):
        IncrementalRunner(small_config())


def _warm_over_cold(frame: pd.DataFrame, warm: str, cold: str = "dp-cold") -> pd.DataFrame:
    costs = frame[frame["feasible"].astype(bool)].pivot_table(
        index=["point", "instance"], columns="solver", values="cost")
    return costs[[warm, cold]].dropna()


def test_warm_trees_never_beat_the_cold_optimum():
    config = SuiteConfig(suite="incremental", instances=4, solvers=("greedy", "dp"),
                         base_users=3, added_users=(1, 2), seed=8)
    runner = IncrementalRunner(config)
    runner.base_point = SuitePoint(0, "users=3", GenConfig(topology="random-regular", node_count=12,
                                                           user_count=3, degree=4))
    costs = _warm_over_cold(runner.run(), "greedy-warm")
    assert len(costs) == 2 * 4
    assert (costs["greedy-warm"] >= costs["dp-cold"] - 1e-9).all()


@pytest.mark.slow
def test_incremental_acceptance(desk_model):
    config = SuiteConfig(suite="incremental", instances=20, solvers=("greedy", "dp"),
                         base_users=9, added_users=(3,))
    solvers = {"greedy": GreedySolver(), "gpn": GpnSolver(desk_model), "dp": DpSolver()}
    frame = IncrementalRunner(config, solvers=solvers).run()
    for tag in ("greedy", "gpn"):
        costs = _warm_over_cold(frame, f"{tag}-warm")
        assert (costs[f"{tag}-warm"] >= costs["dp-cold"] - 1e-9).all()
    costs = _warm_over_cold(frame, "gpn-warm")
    assert costs["gpn-warm"].mean() <= 1.25 * costs["dp-cold"].mean()


@pytest.mark.slow
def test_ablation_gcn_trails_the_full_model(tmp_path):
    train_config = load_config(ROOT / "configs" / "train_desk.yaml", TrainConfig)
    checkpoints = {}
    for variant in VARIANTS:
        checkpoints[variant] = tmp_path / f"{variant}.pt"
        train(train_config, variant_config(variant), checkpoint_path=checkpoints[variant])
    frame = ablation_run(SuiteConfig(suite="ablation", instances=50, solvers=()), checkpoints=checkpoints)
    means = variant_means(frame)
    assert means["gpn-gcn"] > means["gpn-full"]


def test_tree_preservation_check():
    before = MulticastTree(root=0, parent={1: 0, 2: 1})
    assert_tree_preserved(before, MulticastTree(root=0, parent={1: 0, 2: 1, 3: 2}))
    with pytest.raises(TreeError):
        assert_tree_preserved(before, MulticastTree(root=0, parent={1: 0, 2: 0}))


ILLUSTRATIVE_TREE = MulticastTree(root=0, parent={1: 0, 3: 1, 4: 1, 2: 0, 5: 2})


def test_dot_export(illustrative):
    text = tree_to_dot(illustrative, ILLUSTRATIVE_TREE, "dp")
    edges = re.findall(r'(\d+) -> (\d+) \[label="?([\d.]+)"? style=bold\]', text)
    flows = {(int(u), int(v)): float(label) for u, v, label in edges}
    assert flows == {(0, 1): 4.0, (1, 3): 4.0, (1, 4): 2.0, (0, 2): 1.0, (2, 5): 1.0}
    assert "(source)" in text
    assert text == tree_to_dot(illustrative, ILLUSTRATIVE_TREE, "dp")


def test_dot_export_rejects_foreign_trees(illustrative):
    with pytest.raises(TreeError):
        tree_to_dot(illustrative, MulticastTree(root=1, parent={0: 1}))
    with pytest.raises(TreeError):
        tree_to_dot(illustrative, MulticastTree(root=0, parent={9: 0}))


def test_write_dot_files(tmp_path, illustrative):
    documents = export_dot(illustrative, [("dp", ILLUSTRATIVE_TREE), ("dijkstra", ILLUSTRATIVE_TREE)])
    assert list(documents) == ["dp", "dijkstra"]
    paths = write_dot_files(illustrative, [("dp", ILLUSTRATIVE_TREE)], tmp_path / "dot")
    assert [p.name for p in paths] == ["dp.dot"]
    assert paths[0].read_text(encoding="utf-8") == documents["dp"]


def test_ablation_needs_every_variant():
    with pytest.raises(InvalidConfigError):
        load_variants({})


def test_ablation_rejects_mislabelled_checkpoints(tmp_path):
    small = ModelConfig(hidden_dim=8, heads=2)
    torch.manual_seed(0)
    path = save_checkpoint(tmp_path / "full.ckpt", GpnModel(small))
    with pytest.raises(CheckpointError):
        load_variants({variant: path for variant in VARIANTS})


def test_ablation_loads_each_variant(tmp_path):
    small = ModelConfig(hidden_dim=8, heads=2)
    paths = {variant: save_checkpoint(tmp_path / f"{variant}.ckpt", GpnModel(variant_config(variant, small)))
             for variant in VARIANTS}
    solvers = load_variants(paths)
    assert list(solvers) == [f"gpn-{variant}" for variant in VARIANTS]


def test_variant_means():
    frame = pd.DataFrame({"solver": ["dp", "dp", "gpn-full", "gpn-full"],
                          "cost": [1.0, 3.0, 2.0, float("nan")],
                          "feasible": [True, True, True, False]})
    means = variant_means(frame)
    assert means["dp"] == 2.0 and means["gpn-full"] == 2.0
