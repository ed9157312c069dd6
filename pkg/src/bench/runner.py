"""
Suite runner: solve every instance of every point with every solver and
write the per-row and summary CSV files
"""
import logging
import math
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import pandas as pd

from ..core.errors import InfeasibleError
from ..core.graph import ProblemInstance
from ..solvers import BaseSolver, Solution, make_solver
from ..utils.config import default_threads
from .suites import SuiteConfig, SuitePoint, point_instances, suite_points

logger = logging.getLogger(__name__)

RESULT_COLUMNS = ("suite", "point", "point_label", "instance", "seed", "solver",
                  "cost", "runtime", "log10_runtime", "score", "feasible")
SUMMARY_COLUMNS = ("point", "point_label", "solver", "mean_cost", "mean_log10_runtime",
                   "mean_score", "feasible_count")
# solves faster than this are repeated and averaged
REPEAT_BELOW_SECONDS = 1e-3
REPEATS = 10


def cost_delay_score(cost: float, runtime: float) -> float:
    """2 * cost + log10(runtime seconds)"""
    return 2.0 * cost + math.log10(runtime)


@dataclass(frozen=True)
class ResultRow:
    suite: str
    point: int
    point_label: str
    instance: int
    seed: int
    solver: str
    cost: float
    runtime: float
    log10_runtime: float
    score: float
    feasible: bool

    @classmethod
    def solved(cls, suite: str, point: SuitePoint, instance: int, seed: int, label: str,
               solution: Solution) -> "ResultRow":
        runtime = max(solution.runtime, 1e-12)
        return cls(suite, point.index, point.label, instance, seed, label, solution.cost, runtime,
                   math.log10(runtime), cost_delay_score(solution.cost, runtime), True)

    @classmethod
    def infeasible(cls, suite: str, point: SuitePoint, instance: int, seed: int, label: str,
                   runtime: float) -> "ResultRow":
        runtime = max(runtime, 1e-12)
        return cls(suite, point.index, point.label, instance, seed, label, math.nan, runtime,
                   math.log10(runtime), math.nan, False)


def timed_solve(solver: BaseSolver, instance: ProblemInstance) -> Solution:
    """Solve once; sub-millisecond solves are repeated and their time averaged"""
    solution = solver.solve(instance)
    if solution.runtime >= REPEAT_BELOW_SECONDS:
        return solution
    start = time.perf_counter()
    for _ in range(REPEATS):
        solver.solve_instance(instance)
    return solution.with_runtime((time.perf_counter() - start) / REPEATS)


def attempt_solve(suite: str, point: SuitePoint, index: int, instance: ProblemInstance,
                  label: str, solver: BaseSolver) -> Tuple[ResultRow, Optional[Solution]]:
    """Row plus solution; an infeasible solve gives a feasible=False row and no solution"""
    start = time.perf_counter()
    try:
        solution = timed_solve(solver, instance)
    except InfeasibleError as exc:
        logger.warning("%s infeasible on %s instance %d: %s", label, point.label, index, exc)
        row = ResultRow.infeasible(suite, point, index, instance.seed, label, time.perf_counter() - start)
        return row, None
    return ResultRow.solved(suite, point, index, instance.seed, label, solution), solution


def solve_row(suite: str, point: SuitePoint, index: int, instance: ProblemInstance,
              label: str, solver: BaseSolver) -> ResultRow:
    return attempt_solve(suite, point, index, instance, label, solver)[0]


def rows_to_frame(rows: Iterable[ResultRow]) -> pd.DataFrame:
    frame = pd.DataFrame([asdict(r) for r in rows], columns=list(RESULT_COLUMNS))
    if frame.empty:
        return frame
    return frame.sort_values(["point", "instance", "solver"], kind="mergesort").reset_index(drop=True)


def summarize(frame: pd.DataFrame) -> pd.DataFrame:
    """Per point and solver: mean cost, mean log10 runtime, mean score, feasible count"""
    if frame.empty:
        return pd.DataFrame(columns=list(SUMMARY_COLUMNS))
    grouped = frame.groupby(["point", "point_label", "solver"], sort=True)
    summary = grouped.agg(mean_cost=("cost", "mean"),
                          mean_log10_runtime=("log10_runtime", "mean"),
                          mean_score=("score", "mean"),
                          feasible_count=("feasible", "sum")).reset_index()
    summary["feasible_count"] = summary["feasible_count"].astype(int)
    return summary[list(SUMMARY_COLUMNS)]


def build_solvers(config: SuiteConfig) -> Dict[str, BaseSolver]:
    """Solver instances for the configured tags; the checkpoint is loaded once here"""
    solvers = {}
    for tag in config.solvers:
        if tag == "gpn":
            solvers[tag] = make_solver(tag, checkpoint=config.checkpoint)
        else:
            solvers[tag] = make_solver(tag, ga_config=config.ga, bco_config=config.bco)
    return solvers


class SuiteRunner:
    """
    Run one suite and keep its CSV files current

    Rows are rewritten (sorted) after every finished point, so an interrupted
    run can resume: points whose rows are already complete are not re-solved.
    """

    def __init__(self, config: SuiteConfig, solvers: Optional[Mapping[str, BaseSolver]] = None,
                 out_dir: Optional[Union[str, Path]] = None, name: Optional[str] = None):
        self.config = config
        self.solvers = dict(solvers) if solvers is not None else build_solvers(config)
        self.out_dir = Path(out_dir) if out_dir is not None else None
        self.name = name or config.suite
        self.threads = config.threads or default_threads()
        self._write_lock = threading.Lock()

    @property
    def results_path(self) -> Optional[Path]:
        return self.out_dir / f"{self.name}.csv" if self.out_dir else None

    @property
    def summary_path(self) -> Optional[Path]:
        return self.out_dir / f"{self.name}_summary.csv" if self.out_dir else None

    def _previous_rows(self) -> pd.DataFrame:
        path = self.results_path
        if not self.config.resume or path is None or not path.exists():
            return pd.DataFrame(columns=list(RESULT_COLUMNS))
        frame = pd.read_csv(path)
        if list(frame.columns) != list(RESULT_COLUMNS):
            logger.warning("ignoring %s: unexpected columns", path)
            return pd.DataFrame(columns=list(RESULT_COLUMNS))
        return frame

    def row_labels(self) -> List[str]:
        """Solver column values each instance produces"""
        return list(self.solvers)

    def _complete(self, previous: pd.DataFrame, point: SuitePoint) -> Optional[pd.DataFrame]:
        done = previous[previous["point"] == point.index]
        labels = self.row_labels()
        if len(done) == self.config.instances * len(labels) and set(done["solver"]) == set(labels):
            return done
        return None

    def solve_instance_rows(self, point: SuitePoint, index: int,
                            instance: ProblemInstance) -> List[ResultRow]:
        return [solve_row(self.config.suite, point, index, instance, label, solver)
                for label, solver in self.solvers.items()]

    def instances_for(self, point: SuitePoint) -> List[ProblemInstance]:
        return point_instances(self.config, point)

    def run_point(self, point: SuitePoint,
                  task: Optional[Callable[[SuitePoint, int, ProblemInstance], List[ResultRow]]] = None
                  ) -> List[ResultRow]:
        task = task or self.solve_instance_rows
        instances = self.instances_for(point)
        if self.threads == 1:
            nested = [task(point, i, inst) for i, inst in enumerate(instances)]
        else:
            with ThreadPoolExecutor(max_workers=self.threads) as pool:
                nested = list(pool.map(lambda pair: task(point, *pair), enumerate(instances)))
        return [row for rows in nested for row in rows]

    def write(self, frame: pd.DataFrame):
        if self.out_dir is None:
            return
        with self._write_lock:
            self.out_dir.mkdir(parents=True, exist_ok=True)
            frame.to_csv(self.results_path, index=False)
            summarize(frame).to_csv(self.summary_path, index=False)

    def run(self, points: Optional[Sequence[SuitePoint]] = None,
            task: Optional[Callable[[SuitePoint, int, ProblemInstance], List[ResultRow]]] = None
            ) -> pd.DataFrame:
        points = suite_points(self.config) if points is None else points
        previous = self._previous_rows()
        frames = []
        for point in points:
            done = self._complete(previous, point)
            if done is not None:
                logger.info("%s: reusing %d finished rows", point.label, len(done))
                frames.append(done)
            else:
                frames.append(rows_to_frame(self.run_point(point, task)))
            frame = pd.concat(frames, ignore_index=True) if len(frames) > 1 else frames[0]
            frame = frame.sort_values(["point", "instance", "solver"], kind="mergesort").reset_index(drop=True)
            self.write(frame)
            for row in summarize(frame[frame["point"] == point.index]).itertuples():
                logger.info("%s %s: mean cost %.4f, mean log10 runtime %.3f, mean score %.4f",
                            point.label, row.solver, row.mean_cost, row.mean_log10_runtime, row.mean_score)
        if not frames:
            return pd.DataFrame(columns=list(RESULT_COLUMNS))
        return frame


def run_suite(config: SuiteConfig, out_dir: Optional[Union[str, Path]] = None,
              solvers: Optional[Mapping[str, BaseSolver]] = None) -> pd.DataFrame:
    return SuiteRunner(config, solvers=solvers, out_dir=out_dir).run()
