"""
Multicast Routing Bench - Main Entry Point
Instance generation, solving, GPN training / evaluation and benchmark suites
"""
import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from src.core import (CheckpointError, GenConfig, InfeasibleError, InstanceFormatError,
                      InvalidConfigError, ProblemInstance, attach_virtual_hub, generate_instance,
                      parse_instance, parse_tree, read_document, serialize_instance,
                      validate)
from src.solvers import SOLVER_TAGS, BcoConfig, GaConfig, make_solver, serialize_solution
from src.utils import load_config, setup_logging

logger = logging.getLogger("src.main")

EXIT_OK = 0
EXIT_INFEASIBLE = 1
EXIT_BAD_INPUT = 2
EXIT_INTERNAL = 3


def _read_instance(path: str) -> ProblemInstance:
    return parse_instance(read_document(path))


def _hub_view(instance: ProblemInstance, with_hub: bool) -> ProblemInstance:
    """Instance whose graph contains every edge a hub-using solver may pick"""
    if with_hub and not instance.graph.has_virtual_hub:
        return attach_virtual_hub(instance)
    return instance


class MulticastBench:
    """Command dispatcher; one method per subcommand"""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.out = Path(args.out) if getattr(args, "out", None) else None
        self.seed = args.seed if args.seed is not None else 0

    def run(self) -> int:
        return getattr(self, f"cmd_{self.args.command}")()

    # ------------------------------------------------------------------ gen
    def cmd_gen(self) -> int:
        from src.bench.suites import instance_seed
        args = self.args
        recipe = load_config(args.config, GenConfig, {
            "topology": args.topology, "node_count": args.nodes, "user_count": args.users,
            "degree": args.degree, "p": args.p, "avg_degree": args.avg_degree,
        })
        out = self.out or Path("instances")
        out.mkdir(parents=True, exist_ok=True)
        for i in range(args.count):
            instance = generate_instance(replace(recipe, seed=instance_seed(self.seed, 0, i)))
            path = out / f"instance_{i:03d}.json"
            path.write_text(serialize_instance(instance), encoding="utf-8")
        print(f"wrote {args.count} instances to {out}")
        return EXIT_OK

    # ---------------------------------------------------------------- solve
    def _solver(self, tag: str, initial_tree=None):
        args = self.args
        extra = {}
        if initial_tree is not None:
            if tag not in ("greedy", "gpn"):
                raise InvalidConfigError(f"{tag} cannot start from an existing tree")
            extra["initial_tree"] = initial_tree
        if tag == "gpn":
            return make_solver(tag, checkpoint=args.checkpoint, **extra)
        return make_solver(tag, use_hub=args.use_hub,
                           ga_config=load_config(args.ga_config, GaConfig, {"seed": args.seed}),
                           bco_config=load_config(args.bco_config, BcoConfig, {"seed": args.seed}),
                           **extra)

    def cmd_solve(self) -> int:
        args = self.args
        instance = _read_instance(args.instance)
        initial = parse_tree(read_document(args.tree)) if args.tree else None
        solution = self._solver(args.algo, initial).solve(instance)
        if solution.tree is not None:
            view = _hub_view(instance, args.algo == "gpn" or args.use_hub)
            report = validate(view.graph, solution.tree, instance.source, instance.demands)
            if not report.ok:
                logger.warning("solution failed validation: %s", "; ".join(report.violations))
        print(f"{solution.solver_tag}: cost {solution.cost:.6f} in {solution.runtime:.4f}s")
        if self.out is not None:
            self.out.parent.mkdir(parents=True, exist_ok=True)
            self.out.write_text(serialize_solution(solution), encoding="utf-8")
        return EXIT_OK

    # ---------------------------------------------------------------- train
    def cmd_train(self) -> int:
        from src.gpn import ModelConfig, TrainConfig, train, variant_config
        args = self.args
        train_config = load_config(args.config, TrainConfig, {"seed": args.seed})
        model_config = variant_config(args.variant, load_config(args.model_config, ModelConfig))
        out = self.out or Path("runs") / args.variant
        result = train(train_config, model_config, checkpoint_path=out / "checkpoint.gpnc",
                       metrics_path=out / "metrics.csv", max_steps=args.max_steps)
        last = result.metrics["val_cost_ratio"].dropna()
        ratio = f"{last.iloc[-1]:.4f}" if len(last) else "n/a"
        print(f"trained {model_config.variant} for {result.steps} steps; "
              f"last validation cost ratio {ratio}; checkpoint {result.checkpoint}")
        return EXIT_OK

    # ----------------------------------------------------------------- eval
    def cmd_eval(self) -> int:
        from src.gpn import GpnSolver, TrainConfig
        from src.solvers import dreyfus_wagner
        args = self.args
        spec = load_config(args.config, TrainConfig).validation_spec
        rng = np.random.default_rng(self.seed)
        solver = GpnSolver.from_checkpoint(args.checkpoint)
        gpn_costs, dp_costs = [], []
        for seed in rng.integers(0, 2**31 - 1, size=args.instances):
            instance = attach_virtual_hub(generate_instance(replace(spec, seed=int(seed))))
            gpn_costs.append(solver.solve(instance).cost)
            dp_costs.append(dreyfus_wagner(instance, use_hub=True).cost)
        ratio = float(np.mean(gpn_costs)) / float(np.mean(dp_costs))
        print(f"mean GPN cost {np.mean(gpn_costs):.4f}, mean DP cost {np.mean(dp_costs):.4f}, "
              f"ratio {ratio:.4f} over {args.instances} instances")
        return EXIT_OK

    # ---------------------------------------------------------------- suites
    def _suite_config(self, suite: str):
        from src.bench import SuiteConfig
        args = self.args
        overrides = {"suite": suite, "seed": args.seed, "threads": args.threads,
                     "instances": args.instances,
                     "checkpoint": getattr(args, "checkpoint", None),
                     "solvers": tuple(args.solvers) if getattr(args, "solvers", None) else None}
        return load_config(args.config, SuiteConfig, overrides)

    def _report(self, frame) -> int:
        from src.bench import summarize
        print(summarize(frame).to_string(index=False))
        return EXIT_OK

    def cmd_bench(self) -> int:
        from src.bench import run_suite
        config = self._suite_config(self.args.suite)
        return self._report(run_suite(config, out_dir=self.out or Path("results")))

    def cmd_incremental(self) -> int:
        from src.bench import incremental_run
        config = self._suite_config("incremental")
        return self._report(incremental_run(config, out_dir=self.out or Path("results")))

    def cmd_ablation(self) -> int:
        from src.bench import ablation_run, variant_means
        config = self._suite_config("ablation")
        checkpoints = dict(config.checkpoints)
        for entry in self.args.checkpoints or []:
            variant, sep, path = entry.partition("=")
            if not sep:
                raise InvalidConfigError(f"--checkpoints entries look like variant=path, got {entry!r}")
            checkpoints[variant] = path
        frame = ablation_run(config, out_dir=self.out or Path("results"), checkpoints=checkpoints)
        print(variant_means(frame).to_string())
        return EXIT_OK

    # ------------------------------------------------------------------ viz
    def cmd_viz(self) -> int:
        from src.bench import write_dot_files
        args = self.args
        instance = _read_instance(args.instance)
        trees = []
        for tag in args.algos:
            solution = self._solver(tag).solve(instance)
            if solution.tree is None:
                logger.warning("%s produced a non-tree overlay; skipped", tag)
                continue
            trees.append((tag, solution.tree))
        view = _hub_view(instance, args.use_hub or "gpn" in args.algos)
        paths = write_dot_files(view, trees, self.out or Path("viz"))
        for path in paths:
            print(path)
        return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    from src.bench.suites import SUITES
    from src.gpn.model import VARIANTS

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--seed', type=int, default=None, help='Root seed (default: 0, or the config file value)')
    common.add_argument('--threads', type=int, default=None,
                        help='Worker threads (default: $MULTICAST_THREADS or 1)')
    common.add_argument('--out', type=str, default=None, help='Output file or directory')
    common.add_argument('--verbose', '-v', action='store_true', help='Debug logging')

    parser = argparse.ArgumentParser(description="Demand-aware multicast routing bench")
    sub = parser.add_subparsers(dest='command', required=True)

    gen = sub.add_parser('gen', parents=[common], help='Write random instance files')
    gen.add_argument('--config', help='GenConfig YAML')
    gen.add_argument('--count', type=int, default=1)
    gen.add_argument('--topology', choices=("random-regular", "erdos-renyi", "average-degree"))
    gen.add_argument('--nodes', type=int)
    gen.add_argument('--users', type=int)
    gen.add_argument('--degree', type=int)
    gen.add_argument('--p', type=float)
    gen.add_argument('--avg-degree', type=float)

    def solver_flags(p: argparse.ArgumentParser):
        p.add_argument('--checkpoint', help='GPN checkpoint (needed for gpn)')
        p.add_argument('--ga-config', help='GaConfig YAML')
        p.add_argument('--bco-config', help='BcoConfig YAML')
        p.add_argument('--use-hub', action='store_true', help='Let baselines route over the virtual hub')

    solve = sub.add_parser('solve', parents=[common], help='Solve one instance')
    solve.add_argument('--algo', required=True, choices=SOLVER_TAGS)
    solve.add_argument('--instance', required=True)
    solve.add_argument('--tree', help='Frozen starting tree (greedy / gpn)')
    solver_flags(solve)

    train = sub.add_parser('train', parents=[common], help='Train a GPN checkpoint')
    train.add_argument('--config', help='TrainConfig YAML')
    train.add_argument('--model-config', help='ModelConfig YAML')
    train.add_argument('--variant', choices=VARIANTS, default='full')
    train.add_argument('--max-steps', type=int, default=None)

    evaluate = sub.add_parser('eval', parents=[common], help='Greedy GPN cost vs DP')
    evaluate.add_argument('--checkpoint', required=True)
    evaluate.add_argument('--config', help='TrainConfig YAML (validation spec)')
    evaluate.add_argument('--instances', type=int, default=50)

    for name in ('bench', 'incremental', 'ablation'):
        p = sub.add_parser(name, parents=[common], help=f'Run the {name} experiment')
        p.add_argument('--config', help='SuiteConfig YAML')
        p.add_argument('--instances', type=int, default=None)
        if name == 'bench':
            p.add_argument('--suite', choices=SUITES, default=None, help='Default: node-sweep or the config value')
        if name == 'ablation':
            p.add_argument('--checkpoints', nargs='+', help='variant=path entries')
        else:
            p.add_argument('--solvers', nargs='+', choices=SOLVER_TAGS)
            p.add_argument('--checkpoint', help='GPN checkpoint (needed for gpn)')

    viz = sub.add_parser('viz', parents=[common], help='Write DOT files for solver trees')
    viz.add_argument('--instance', required=True)
    viz.add_argument('--algos', nargs='+', choices=SOLVER_TAGS, default=['dp', 'dijkstra', 'greedy'])
    solver_flags(viz)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Entry point; returns the process exit code"""
    args = build_parser().parse_args(argv)
    setup_logging(args.verbose)
    try:
        return MulticastBench(args).run()
    except InfeasibleError as exc:
        logger.error("infeasible: %s", exc)
        return EXIT_INFEASIBLE
    except (InstanceFormatError, InvalidConfigError, CheckpointError, FileNotFoundError) as exc:
        logger.error("bad input: %s", exc)
        return EXIT_BAD_INPUT
    except Exception as exc:
        logger.error("internal error: %s", exc)
        logger.debug("traceback", exc_info=True)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
