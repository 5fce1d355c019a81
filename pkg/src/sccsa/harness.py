"""Batch experiments: seeded runs per (function, algorithm) cell, summary
statistics, comparison tables and convergence-trace export."""
from __future__ import annotations

import csv
import io
import multiprocessing as mp
import os
from collections import OrderedDict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .algorithms import ALGORITHMS, DEFAULT_PARAMS, RunRecord, default_params, iterations_for, run
from .core import ArgumentError, ConfigurationError, Problem, derive_seed

STATS = ("Ave", "Sdev", "Max", "Min")


@dataclass
class ExperimentPlan:
    problems: List[Problem]
    algorithms: List[Tuple[str, object]]
    runs_per_cell: int = 30
    budget_fe: int = 100_000
    base_seed: int = 0
    pop_size: int = 30

    def validate(self):
        if self.runs_per_cell < 1:
            raise ConfigurationError(f"runs_per_cell must be >= 1, got {self.runs_per_cell}")
        if not self.problems or not self.algorithms:
            raise ConfigurationError("plan needs at least one problem and one algorithm")
        iterations_for(self.budget_fe, self.pop_size)
        for algo, params in self.algorithms:
            if algo not in ALGORITHMS:
                raise ConfigurationError(f"unknown algorithm id {algo!r}; known: {', '.join(ALGORITHMS)}")
            if params is not None and not isinstance(params, DEFAULT_PARAMS[algo]):
                raise ConfigurationError(f"{algo} expects {DEFAULT_PARAMS[algo].__name__}")

    def cells(self):
        for problem in self.problems:
            for algo, params in self.algorithms:
                yield problem, algo, params if params is not None else default_params(algo)

    def run_seed(self, problem_id: str, algo: str, run_index: int) -> int:
        return derive_seed(self.base_seed, problem_id, algo, run_index)


# set in the parent before forking workers; children read it instead of
# unpickling problems (user objectives may be closures)
_ACTIVE_TASKS: list = []


def _run_task(i):
    problem, algo, params, budget, pop, seed, run_index = _ACTIVE_TASKS[i]
    return run(problem, algo, params, pop, budget, seed, run_index=run_index)


def run_experiment(plan: ExperimentPlan, jobs: int = 1) -> List[RunRecord]:
    """Every run of the plan, ordered by (problem, algorithm, run_index).

    Run seeds depend only on ``base_seed`` and the cell/run identity, so adding
    cells leaves existing runs untouched and ``jobs`` does not affect results.
    """
    plan.validate()
    tasks = []
    for problem, algo, params in plan.cells():
        for r in range(plan.runs_per_cell):
            tasks.append((problem, algo, params, plan.budget_fe, plan.pop_size,
                          plan.run_seed(problem.id, algo, r), r))

    global _ACTIVE_TASKS
    _ACTIVE_TASKS = tasks
    try:
        if jobs > 1 and len(tasks) > 1 and "fork" in mp.get_all_start_methods():
            with ProcessPoolExecutor(max_workers=jobs, mp_context=mp.get_context("fork")) as pool:
                return list(pool.map(_run_task, range(len(tasks)), chunksize=max(1, len(tasks) // (4 * jobs))))
        return [_run_task(i) for i in range(len(tasks))]
    finally:
        _ACTIVE_TASKS = []


def group_cells(records: Sequence[RunRecord]) -> "OrderedDict[Tuple[str, str], List[RunRecord]]":
    cells = OrderedDict()
    for rec in records:
        cells.setdefault((rec.problem, rec.algorithm), []).append(rec)
    return cells


@dataclass(frozen=True)
class SummaryStats:
    ave: float
    sdev: float
    max: float
    min: float
    n: int

    def get(self, stat: str) -> float:
        return {"Ave": self.ave, "Sdev": self.sdev, "Max": self.max, "Min": self.min}[stat]


def summarize(records: Sequence[RunRecord]) -> SummaryStats:
    """Mean, sample standard deviation (n - 1), worst and best final fitness."""
    if len(records) == 0:
        raise ArgumentError("cannot summarize an empty set of runs")
    cells = {(r.problem, r.algorithm) for r in records}
    if len(cells) > 1:
        raise ArgumentError(f"records mix several cells: {sorted(cells)}")
    finals = np.sort(np.array([r.final_best_fitness for r in records], dtype=np.float64))
    n = finals.size
    sdev = float(np.std(finals, ddof=1)) if n > 1 else 0.0
    return SummaryStats(float(np.mean(finals)), sdev, float(finals[-1]), float(finals[0]), n)


# --- reference tables and reports ----------------------------------------------

def load_reference(path=None) -> Dict[Tuple[str, str, str], str]:
    """Published values keyed by (function, algorithm, stat), kept as printed.

    ``path=None`` loads the bundled seven-function table.
    """
    if path is None:
        text = resources.files("sccsa").joinpath("data/table3.csv").read_text()
    else:
        text = Path(path).read_text()
    table = {}
    reader = csv.DictReader(io.StringIO(text))
    missing = {"function", "algorithm", "stat", "value"} - set(reader.fieldnames or ())
    if missing:
        raise ConfigurationError(f"reference table lacks columns {sorted(missing)}")
    for lineno, row in enumerate(reader, start=2):
        stat = row["stat"].strip().capitalize()
        if stat not in STATS:
            raise ConfigurationError(f"reference line {lineno}: unknown stat {row['stat']!r}")
        value = row["value"].strip()
        try:
            float(value)
        except ValueError:
            raise ConfigurationError(f"reference line {lineno}: value {value!r} is not a number") from None
        table[(row["function"].strip().lower(), row["algorithm"].strip(), stat)] = value
    return table


@dataclass
class Report:
    functions: List[str]
    columns: List[str]
    published: Dict[str, bool]
    cells: Dict[Tuple[str, str, str], str] = field(default_factory=dict)
    n_runs: Dict[str, int] = field(default_factory=dict)

    def value(self, function, column, stat) -> str:
        return self.cells.get((function, column, stat), "")

    def to_markdown(self) -> str:
        out = ["# Statistical results", ""]
        runs = sorted(set(self.n_runs.values()))
        if runs:
            out.append("Final best fitness per cell over %s runs. Sdev is the sample standard deviation "
                       "(n - 1 denominator); Max is the worst and Min the best final value."
                       % "/".join(str(r) for r in runs))
        if any(self.published.values()):
            out.append('Columns marked "(published)" are reference values copied verbatim, '
                       "published, not reproduced.")
        out.append("")
        out.append("| Function | Stat | " + " | ".join(self.columns) + " |")
        out.append("|---|---|" + "---|" * len(self.columns))
        for fn in self.functions:
            for stat in STATS:
                vals = [self.value(fn, c, stat) or "-" for c in self.columns]
                out.append(f"| {fn} | {stat} | " + " | ".join(vals) + " |")
        return "\n".join(out) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["function", "stat"] + self.columns)
        for fn in self.functions:
            for stat in STATS:
                w.writerow([fn, stat] + [self.value(fn, c, stat) for c in self.columns])
        return buf.getvalue()


def _fmt(v: float) -> str:
    return f"{v:.4E}"


def comparison_report(stats: Dict[Tuple[str, str], SummaryStats],
                      reference: Optional[Dict[Tuple[str, str, str], str]] = None) -> Report:
    """Lay out a (function, algorithm) -> stats matrix with four rows per function.

    Reference columns are appended as ``"<algorithm> (published)"``, restricted
    to the functions present in ``stats``.
    """
    if not stats:
        raise ArgumentError("comparison report needs at least one cell")
    functions, columns = [], []
    for fn, algo in stats:
        if fn not in functions:
            functions.append(fn)
        if algo not in columns:
            columns.append(algo)
    published = {c: False for c in columns}
    cells, n_runs = {}, {}
    for (fn, algo), s in stats.items():
        n_runs[f"{fn}/{algo}"] = s.n
        for stat in STATS:
            cells[(fn, algo, stat)] = _fmt(s.get(stat))
    if reference:
        for (fn, algo, stat), value in reference.items():
            if fn not in functions:
                continue
            label = f"{algo} (published)"
            if label not in published:
                columns.append(label)
                published[label] = True
            cells[(fn, label, stat)] = value
    return Report(functions, columns, published, cells, n_runs)


def summarize_cells(records: Sequence[RunRecord]) -> "OrderedDict[Tuple[str, str], SummaryStats]":
    return OrderedDict((key, summarize(recs)) for key, recs in group_cells(records).items())


# --- file outputs ------------------------------------------------------------------

def _sci(v: float) -> str:
    return format(float(v), ".17e")


def convergence_filename(problem: str, algorithm: str) -> str:
    return f"convergence_{problem}_{algorithm}.csv"


def export_convergence(records: Sequence[RunRecord], path) -> List[Path]:
    """One CSV per cell: ``iteration, run_000 .. run_NNN, mean``."""
    if len(records) == 0:
        raise ArgumentError("no records to export")
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    written = []
    for (problem, algo), recs in group_cells(records).items():
        recs = sorted(recs, key=lambda r: r.run_index)
        lengths = {len(r.trace) for r in recs}
        if len(lengths) != 1:
            raise ArgumentError(f"traces of {problem}/{algo} differ in length: {sorted(lengths)}")
        traces = np.vstack([r.trace for r in recs])
        mean = traces.mean(axis=0)
        target = path / convergence_filename(problem, algo)
        with open(target, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["iteration"] + [f"run_{r.run_index:03d}" for r in recs] + ["mean"])
            for k in range(traces.shape[1]):
                w.writerow([k] + [_sci(v) for v in traces[:, k]] + [_sci(mean[k])])
        written.append(target)
    return written


FINALS_HEADER = ["problem", "algorithm", "run_index", "seed", "fe_count", "final_best_fitness"]


def write_finals(records: Sequence[RunRecord], path) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(FINALS_HEADER)
        for r in records:
            w.writerow([r.problem, r.algorithm, r.run_index, r.seed, r.fe_count, _sci(r.final_best_fitness)])
    return path


def read_finals(path) -> List[RunRecord]:
    """Final-value records (trace holds only the final value) from :func:`write_finals`."""
    out = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != FINALS_HEADER:
            raise ConfigurationError(f"{path}: expected header {','.join(FINALS_HEADER)}")
        for lineno, row in enumerate(reader, start=2):
            try:
                final = float(row["final_best_fitness"])
                rec = RunRecord(int(row["seed"]), row["algorithm"], row["problem"], np.array([final]),
                                final, np.empty(0), int(row["fe_count"]), run_index=int(row["run_index"]))
            except (TypeError, ValueError):
                raise ConfigurationError(f"{path}: malformed row at line {lineno}") from None
            out.append(rec)
    return out


def default_jobs() -> int:
    return max(1, len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else (os.cpu_count() or 1))
