"""Command-line front end.

    thirdlaw thermo-table      --config exp.json --out results/
    thirdlaw staircase         --config exp.json --out results/
    thirdlaw b2-solve          --config exp.json
    thirdlaw measure-ensemble  --config exp.json --seed 7
    thirdlaw equivalence-suite --config exp.json
    thirdlaw protocol          --config exp.json

Each subcommand writes its CSV table(s) into ``--out`` together with a PNG
figure (skip with ``--no-figures``) and a plain-text summary.

Exit codes: 0 success, 1 invalid input, 2 numerical failure,
3 counterexample found by the equivalence suite.
"""
from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import config as cfg
from .errors import NumericalError, ThirdLawError, TruncationError, ValidationError
from .measurement import ground_state_attainment, sample_outcomes, write_ensemble_csv
from .processes import run_protocol, staircase, write_staircase_csv
from .spectra import levels_at
from .tables import fmt, fmt_temperature, write_csv
from .thermo import EntropySurface, entropy, entropy_via_integral, gibbs_populations, partition_function
from .unattainability import b2_solve, equivalence_harness

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_NUMERICAL = 2
EXIT_COUNTEREXAMPLE = 3


class Run:
    """Shared state of one invocation: config, output directory, seed, verbosity."""

    def __init__(self, args):
        self.config = cfg.load(args.config)
        out = args.out if args.out is not None else self.config.get("output", ".")
        self.out = Path(out)
        self.seed = args.seed if args.seed is not None else self.config.get("seed")
        if self.seed is not None and not 0 <= self.seed <= cfg.SEED_MAX:
            raise ValidationError(f"seed {self.seed} is not an unsigned 64-bit integer")
        self.quiet = args.quiet
        self.figures = not args.no_figures

    def need_seed(self, command):
        if self.seed is None:
            raise ValidationError(f"{command} is stochastic: set 'seed' in the config or pass --seed")
        return self.seed

    def say(self, text):
        if not self.quiet:
            print(text)

    def summary(self, name, text):
        self.out.mkdir(parents=True, exist_ok=True)
        with open(self.out / name, "w", encoding="utf-8", newline="") as fh:
            fh.write(text + "\n")
        self.say(text)


def cmd_thermo_table(run: Run) -> int:
    conf = run.config
    entry = cfg.require(conf, "model")
    model = cfg.build_model(entry)
    quad_tol, tail = cfg.tolerances(conf)
    grid = cfg.temperature_grid(conf)
    t_max = float(grid.max()) if grid.size else 1.0
    count = cfg.level_count(entry, model, t_max, tail)
    x = entry["parameter"]
    levels = levels_at(model, x, count)
    surface = EntropySurface(levels, model, x)
    header = ["T", "Z"] + [f"p_{i}" for i in range(count)] + ["S_direct", "S_integral", "residual", "C"]
    rows, s_direct, s_integral, heat = [], [], [], []
    for T in grid:
        T = float(T)
        state = gibbs_populations(levels, T, model, x)
        s = entropy(state)
        if T == 0:
            z, s_int, c = float(surface.ground_degeneracy), surface.zero_entropy, None
        else:
            z = partition_function(levels, T)
            s_int = entropy_via_integral(surface, T, quad_tol)
            c = float(surface.specific_heat(T)[0])
        rows.append([T, z, *map(float, state.populations), s, s_int, abs(s_int - s), c])
        s_direct.append(s)
        s_integral.append(s_int)
        heat.append(np.nan if c is None else c)
    write_csv(run.out / "thermo_table.csv", header, rows)
    if run.figures and grid.size:
        from .plotting import plot_thermo_table

        plot_thermo_table(grid, s_direct, s_integral, heat, run.out / "thermo_table.png", surface.label)
    worst = max((r[-2] for r in rows), default=0.0)
    run.summary("thermo_table.txt", f"thermo-table: {surface.label} rows={len(rows)} levels={count} "
                                    f"max_residual={fmt(worst)}")
    return EXIT_OK


def cmd_staircase(run: Run) -> int:
    sc = cfg.require(run.config, "staircase")
    upper = cfg.build_surface(sc["upper"], run.config)
    lower = cfg.build_surface(sc["lower"], run.config)
    result = staircase(upper, lower, sc["t0"], sc.get("t_target", 0.0), sc.get("max_steps", 10_000))
    write_staircase_csv(result, run.out / "staircase.csv")
    result.trace.to_csv(run.out / "staircase_trace.csv")
    if run.figures:
        from .plotting import plot_staircase

        plot_staircase(upper, lower, result, run.out / "staircase.png")
    target = sc.get("t_target", 0.0)
    reached = result.reached_zero or (target > 0 and result.final_log_temperature <= math.log(target))
    final = "0" if result.reached_zero else fmt_temperature(result.final_temperature,
                                                              result.final_log_temperature)
    run.summary("staircase.txt", f"staircase: upper={upper.label} lower={lower.label} steps={result.steps} "
                                 f"reached_target={fmt(bool(reached))} reached_zero={fmt(result.reached_zero)} "
                                 f"final_temperature={final}")
    return EXIT_OK


def cmd_b2_solve(run: Run) -> int:
    b2 = cfg.require(run.config, "b2")
    alpha = cfg.build_surface(b2["alpha"], run.config)
    beta = cfg.build_surface(b2["beta"], run.config)
    sol = b2_solve(alpha, beta, b2.get("bracket_max", 1e3))
    t1 = "NONE" if sol.t1 is None else fmt(sol.t1)
    write_csv(run.out / "b2_solve.csv", ("alpha", "beta", "delta_s0", "t1", "residual", "note"),
              [(alpha.label, beta.label, sol.delta_s0, t1, sol.residual, sol.note)])
    lines = [f"b2-solve: alpha={alpha.label} beta={beta.label}",
             f"delta_S0 = {fmt(sol.delta_s0)}",
             f"T1 = {t1}",
             f"residual = {fmt(sol.residual)}"]
    if sol.note:
        lines.append(f"note: {sol.note}")
    run.summary("b2_solve.txt", "\n".join(lines))
    return EXIT_OK


def cmd_measure_ensemble(run: Run) -> int:
    seed = run.need_seed("measure-ensemble")
    entry = cfg.require(run.config, "model")
    ms = cfg.require(run.config, "measurement")
    model = cfg.build_model(entry)
    _, tail = cfg.tolerances(run.config)
    x, T, n = entry["parameter"], ms["temperature"], ms["trials"]
    workers = ms.get("workers", 1)
    count = cfg.level_count(entry, model, T, tail)
    state = gibbs_populations(levels_at(model, x, count), T, model, x)
    report = ground_state_attainment(model, x, T, n, seed, ms.get("t_grid"), ms.get("confidence", 0.95), workers)
    outcomes = sample_outcomes(state, n, seed, workers)
    write_ensemble_csv(state, outcomes, run.out / "measure_ensemble.csv")
    write_csv(run.out / "ground_probability.csv", ("T", "q0"), report.table)
    mean_after = float(np.mean(np.log(state.degeneracies)[outcomes]))
    if run.figures:
        from .plotting import plot_attainment

        plot_attainment(report, run.out / "measure_ensemble.png")
    lines = [
        f"measure-ensemble: model={entry['family']}({fmt(float(x))}) T={fmt(float(T))} trials={n} seed={seed}",
        f"q0_exact = {fmt(report.q0_exact)}",
        f"q0_empirical = {fmt(report.frequency)} ({report.hits} ground hits)",
        f"ci_{ms.get('confidence', 0.95):g} = [{fmt(report.ci_low)}, {fmt(report.ci_high)}]",
        f"within_3sigma = {fmt(report.within_3sigma)}",
        f"q0_decreasing_in_T = {fmt(report.monotone)}",
        f"entropy_before = {fmt(entropy(state))}",
        f"mean_entropy_after = {fmt(mean_after)}",
    ]
    run.summary("measure_ensemble.txt", "\n".join(lines))
    return EXIT_OK


def cmd_equivalence_suite(run: Run) -> int:
    seed = run.need_seed("equivalence-suite")
    hs = cfg.require(run.config, "harness")
    report = equivalence_harness(hs["models"], seed, hs.get("workers", 1), hs.get("max_steps", 10_000),
                                 hs.get("bracket_max", 1e3))
    report.to_csv(run.out / "equivalence.csv")
    if run.figures and report.rows:
        from .plotting import plot_harness

        plot_harness(report, run.out / "equivalence.png")
    run.summary("summary.txt", report.summary())
    return EXIT_OK if report.passed else EXIT_COUNTEREXAMPLE


def cmd_protocol(run: Run) -> int:
    entry = cfg.require(run.config, "model")
    pc = cfg.require(run.config, "protocol")
    model = cfg.build_model(entry)
    _, tail = cfg.tolerances(run.config)
    steps = cfg.build_steps(run.config, run.seed)
    T0 = pc["initial_temperature"]
    hottest = max([T0] + [getattr(s, "temperature", None) or 0.0 for s in steps])
    count = cfg.level_count(entry, model, entry.get("t_max", hottest), tail)
    initial = gibbs_populations(levels_at(model, entry["parameter"], count), T0, model, entry["parameter"])
    trace = run_protocol(model, initial, steps)
    trace.to_csv(run.out / "protocol_trace.csv")
    final = trace.final_state
    total_heat = math.fsum(r.heat for r in trace)
    total_work = math.fsum(r.work for r in trace)
    run.summary("protocol.txt", f"protocol: {len(steps)} steps final_entropy={fmt(entropy(final))} "
                                f"final_temperature={fmt(final.temperature)} heat={fmt(total_heat)} "
                                f"work={fmt(total_work)}")
    return EXIT_OK


COMMANDS = {
    "thermo-table": (cmd_thermo_table, "tabulate Z, populations, S (direct and via the heat integral) and C"),
    "staircase": (cmd_staircase, "run the isotherm/adiabat cooling staircase between two curves"),
    "b2-solve": (cmd_b2_solve, "find the start temperature whose adiabat ends at T = 0"),
    "measure-ensemble": (cmd_measure_ensemble, "sample projective energy measurements of a Gibbs state"),
    "equivalence-suite": (cmd_equivalence_suite, "check Nernst <=> unattainability on random model pairs"),
    "protocol": (cmd_protocol, "apply a list of adiabatic/isothermal/thermalize/measure steps"),
}


def _u64(text):
    value = int(text)
    if not 0 <= value <= cfg.SEED_MAX:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="experiment config (JSON, schema 1)")
    common.add_argument("--out", default=None, help="output directory (default: config 'output' or .)")
    common.add_argument("--seed", type=_u64, default=None, help="master seed, overrides the config")
    common.add_argument("--quiet", action="store_true", help="do not print the summary")
    common.add_argument("--no-figures", action="store_true", help="skip the PNG figures")
    parser = argparse.ArgumentParser(prog="thirdlaw", description="Third-law thermodynamics experiments.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, text) in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=text, description=text)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else EXIT_OK
    try:
        run = Run(args)
        return COMMANDS[args.command][0](run)
    except (NumericalError, TruncationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ThirdLawError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
