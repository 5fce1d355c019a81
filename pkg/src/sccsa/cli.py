"""Command-line interface: ``sccsa {run,bench,report,plot,list}``.

Settings are resolved in this order, later wins: built-in defaults, the
``--config`` file (flat ``key = value`` lines, ``#`` comments), ``--set
key=value`` pairs, then dedicated flags such as ``--budget``. The resolved
settings are echoed as a banner that is itself a valid config file.

Exit codes: 0 success, 1 configuration error, 2 I/O error.
"""
from __future__ import annotations

import argparse
import os
import shutil
import sys
import tempfile
import time
from pathlib import Path

from . import _kernels
from .algorithms import ALGORITHMS, CsaParams, RandomSearchParams, ScaParams, SccsaParams, run
from .benchmarks import PAPER_FUNCTIONS, available, get_benchmark
from .core import ConfigurationError
from .harness import (
    ExperimentPlan,
    comparison_report,
    convergence_filename,
    default_jobs,
    export_convergence,
    load_reference,
    read_finals,
    run_experiment,
    summarize_cells,
    write_finals,
)
from .plot import PlotInputError, plot_files

OUTPUT_ENV = "SCCSA_OUTPUT_DIR"

R1_MODE_ALIASES = {"sca": "sca_original", "paper": "paper_literal",
                   "sca_original": "sca_original", "paper_literal": "paper_literal"}
DIFF_ALIASES = {"abs": "paper_abs", "paper_abs": "paper_abs", "signed": "signed"}

# key -> (parser, default); None default means "resolved later"
KEYS = {
    "algo": (str, None),
    "fn": (str, None),
    "dim": (int, 10),
    "pop": (int, 30),
    "budget": (int, 100_000),
    "runs": (int, 30),
    "seed": (int, 0),
    "jobs": (int, None),
    "r1_mode": (lambda v: _alias(v, R1_MODE_ALIASES, "r1_mode"), "sca_original"),
    "csa_diff": (lambda v: _alias(v, DIFF_ALIASES, "csa_diff"), "signed"),
    "ap": (float, 0.1),
    "fl": (float, 2.0),
    "partner_source": (str, "memory"),
    "reference": (str, ""),
    "out": (str, None),
}


class IOFailure(Exception):
    pass


def _alias(value, table, key):
    if value not in table:
        raise ConfigurationError(f"{key}: unknown value {value!r} (choose from {', '.join(sorted(table))})")
    return table[value]


def _parse_value(key, raw):
    if key not in KEYS:
        raise ConfigurationError(f"unknown config key {key!r}; known: {', '.join(KEYS)}")
    try:
        return KEYS[key][0](raw.strip())
    except ValueError as exc:
        if isinstance(exc, ConfigurationError):
            raise
        raise ConfigurationError(f"{key}: cannot parse {raw!r}") from None


def read_config_file(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise IOFailure(f"cannot read config {path}: {exc.strerror}") from None
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"{path}:{lineno}: expected 'key = value'")
        key, raw = line.split("=", 1)
        values[key.strip()] = _parse_value(key.strip(), raw)
    return values


def resolve(args, subcommand) -> dict:
    cfg = {k: d for k, (_, d) in KEYS.items()}
    if getattr(args, "config", None):
        cfg.update(read_config_file(args.config))
    for pair in getattr(args, "set", None) or []:
        if "=" not in pair:
            raise ConfigurationError(f"--set expects key=value, got {pair!r}")
        key, raw = pair.split("=", 1)
        cfg[key.strip()] = _parse_value(key.strip(), raw)
    for key in KEYS:
        flag = getattr(args, key, None)
        if flag is not None:
            cfg[key] = _parse_value(key, str(flag))
    if cfg["jobs"] is None:
        cfg["jobs"] = default_jobs()
    if cfg["out"] is None:
        cfg["out"] = os.environ.get(OUTPUT_ENV, "sccsa-out")
    if subcommand == "run":
        cfg["algo"] = cfg["algo"] or "sccsa"
        cfg["runs"] = 1
        if not cfg["fn"]:
            raise ConfigurationError("run needs --fn")
    else:
        cfg["algo"] = cfg["algo"] or ",".join(ALGORITHMS)
        cfg["fn"] = cfg["fn"] or ",".join(PAPER_FUNCTIONS)
    return cfg


def banner(cfg, skip=()) -> str:
    lines = [f"# sccsa effective configuration (kernel backend: {_kernels.BACKEND})"]
    lines += [f"{k} = {cfg[k]}" for k in KEYS if k not in skip]
    return "\n".join(lines) + "\n"


def make_params(algo, cfg):
    if algo == "sccsa":
        return SccsaParams(fl=cfg["fl"], r1_mode=cfg["r1_mode"], diff_mode=cfg["csa_diff"],
                           partner_source=cfg["partner_source"])
    if algo == "csa":
        return CsaParams(awareness_probability=cfg["ap"], flight_length=cfg["fl"], diff_mode=cfg["csa_diff"])
    if algo == "sca":
        return ScaParams(r1_mode=cfg["r1_mode"])
    if algo == "random":
        return RandomSearchParams()
    raise ConfigurationError(f"unknown algorithm id {algo!r}; known: {', '.join(ALGORITHMS)}")


def _split(value):
    return [v.strip() for v in value.split(",") if v.strip()]


def build_plan(cfg) -> ExperimentPlan:
    problems = [get_benchmark(f, cfg["dim"]) for f in _split(cfg["fn"])]
    algorithms = [(a, make_params(a, cfg)) for a in _split(cfg["algo"])]
    plan = ExperimentPlan(problems, algorithms, runs_per_cell=cfg["runs"], budget_fe=cfg["budget"],
                          base_seed=cfg["seed"], pop_size=cfg["pop"])
    plan.validate()
    return plan


def _reference(cfg):
    ref = cfg["reference"]
    if not ref:
        return None
    if ref == "builtin":
        return load_reference()
    if not Path(ref).is_file():
        raise IOFailure(f"reference table {ref} not found")
    return load_reference(ref)


def _write_report(out: Path, records, reference):
    report = comparison_report(summarize_cells(records), reference)
    (out / "report.md").write_text(report.to_markdown())
    (out / "report.csv").write_text(report.to_csv())
    return report


def cmd_bench(args) -> int:
    cfg = resolve(args, "bench")
    plan = build_plan(cfg)
    reference = _reference(cfg)
    sys.stdout.write(banner(cfg))
    sys.stdout.flush()
    out = Path(cfg["out"])

    start = time.perf_counter()
    records = run_experiment(plan, jobs=cfg["jobs"])
    elapsed = time.perf_counter() - start

    # build in a scratch dir next to the target, then swap in
    if out.exists() and not out.is_dir():
        raise IOFailure(f"{out} exists and is not a directory")
    scratch = None
    try:
        out.parent.mkdir(parents=True, exist_ok=True)
        scratch = Path(tempfile.mkdtemp(prefix=".sccsa-", dir=out.parent))
        # location and parallelism do not change results
        (scratch / "config.txt").write_text(banner(cfg, skip=("out", "jobs")))
        write_finals(records, scratch / "finals.csv")
        export_convergence(records, scratch / "convergence")
        report = _write_report(scratch, records, reference)
        if out.exists():
            shutil.rmtree(out)
        scratch.rename(out)
    except OSError as exc:
        if scratch is not None:
            shutil.rmtree(scratch, ignore_errors=True)
        raise IOFailure(f"cannot write results to {out}: {exc}") from None

    print(report.to_markdown())
    print(f"{len(records)} runs in {elapsed:.1f}s; results in {out}")
    return 0


def cmd_run(args) -> int:
    cfg = resolve(args, "run")
    algo = cfg["algo"]
    params = make_params(algo, cfg)
    problem = get_benchmark(cfg["fn"], cfg["dim"])
    # validate budget/pop before printing anything
    ExperimentPlan([problem], [(algo, params)], 1, cfg["budget"], cfg["seed"], cfg["pop"]).validate()
    sys.stdout.write(banner(cfg))
    rec = run(problem, algo, params, cfg["pop"], cfg["budget"], cfg["seed"])
    out = Path(cfg["out"])
    try:
        out.mkdir(parents=True, exist_ok=True)
        export_convergence([rec], out)
    except OSError as exc:
        raise IOFailure(f"cannot write trace to {out}: {exc}") from None
    print(f"final_best_fitness = {rec.final_best_fitness:.17e}")
    print(f"fe_count = {rec.fe_count}")
    print(f"iterations = {rec.iterations}")
    print(f"trace = {out / convergence_filename(problem.id, algo)}")
    return 0


def cmd_report(args) -> int:
    src = Path(args.input)
    finals = src / "finals.csv"
    if not finals.is_file():
        raise IOFailure(f"{finals} not found")
    cfg = {"reference": args.reference or ""}
    reference = _reference(cfg)
    records = read_finals(finals)
    if not records:
        raise ConfigurationError(f"{finals} holds no runs")
    out = Path(args.out) if args.out else src
    try:
        out.mkdir(parents=True, exist_ok=True)
        report = _write_report(out, records, reference)
    except OSError as exc:
        raise IOFailure(f"cannot write report to {out}: {exc}") from None
    print(report.to_markdown())
    return 0


def cmd_plot(args) -> int:
    for p in args.csv:
        if not Path(p).is_file():
            raise IOFailure(f"{p} not found")
    try:
        path = plot_files(args.csv, args.output, title=args.title)
    except PlotInputError as exc:
        raise ConfigurationError(str(exc)) from None
    except OSError as exc:
        raise IOFailure(f"cannot write {args.output}: {exc}") from None
    print(f"wrote {path}")
    return 0


def cmd_list(args) -> int:
    print("functions:")
    for fid in available():
        p = get_benchmark(fid, 1)
        lo, hi = p.bounds.lower[0], p.bounds.upper[0]
        noisy = " (noisy)" if p.stochastic else ""
        print(f"  {fid}  [{lo:g}, {hi:g}]^dim  f_min={p.known_min}{noisy}")
    print("algorithms:")
    for a in ALGORITHMS:
        print(f"  {a}")
    print(f"kernel backend: {_kernels.BACKEND}")
    return 0


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_run_options(p):
    p.add_argument("--config", help="flat key = value file")
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config key")
    p.add_argument("--algo", help="algorithm id (bench: comma-separated list)")
    p.add_argument("--fn", help="function id (bench: comma-separated list)")
    p.add_argument("--dim", type=int)
    p.add_argument("--pop", type=int)
    p.add_argument("--budget", type=int, help="function evaluations per run")
    p.add_argument("--seed", type=int, help="base seed")
    p.add_argument("--jobs", type=int, help="worker processes (default: available cores)")
    p.add_argument("--r1-mode", dest="r1_mode", choices=["paper", "sca"])
    p.add_argument("--csa-diff", dest="csa_diff", choices=["abs", "signed"])
    p.add_argument("--out", help=f"output directory (default: ${OUTPUT_ENV} or ./sccsa-out)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sccsa", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("bench", help="run the function x algorithm benchmark matrix")
    _add_run_options(p)
    p.add_argument("--runs", type=int, help="runs per cell")
    p.add_argument("--reference", help="published-values CSV to include, or 'builtin'")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("run", help="one run of one algorithm on one function")
    _add_run_options(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("report", help="rebuild report.md/report.csv from a bench directory")
    p.add_argument("--in", dest="input", required=True, help="bench output directory")
    p.add_argument("--reference", help="published-values CSV to include, or 'builtin'")
    p.add_argument("--out", help="where to write the report (default: the input directory)")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("plot", help="SVG chart from convergence CSVs")
    p.add_argument("csv", nargs="+")
    p.add_argument("-o", "--output", required=True, help="SVG file to write")
    p.add_argument("--title", default="Convergence")
    p.set_defaults(func=cmd_plot)

    p = sub.add_parser("list", help="list functions and algorithms")
    p.set_defaults(func=cmd_list)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"sccsa: configuration error: {exc}", file=sys.stderr)
        return 1
    except IOFailure as exc:
        print(f"sccsa: I/O error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
