#!/usr/bin/env python3
import argparse
import os
import sys

import mimopilot
from mimopilot import benchmark
from mimopilot.adapters import fileio
from mimopilot.config import (
    DEFAULT_ANTENNAS,
    DEFAULT_CELLS,
    DEFAULT_CLUSTERS,
    DEFAULT_CROSSOVER,
    DEFAULT_ELITE,
    DEFAULT_GENERATIONS,
    DEFAULT_MUTATION,
    DEFAULT_POPULATION,
    DEFAULT_RECLUSTER,
    DEFAULT_SEED,
    DEFAULT_USERS,
    FITNESS_INTERFERENCE,
    FITNESS_MAX_MIN,
    FITNESS_SUM_SE,
    SOLVER_GA,
)
from mimopilot.core.encoding import GAConfig, search_space_size
from mimopilot.core.errors import MimoPilotError
from mimopilot.core.harness import complexity_estimate
from mimopilot.core.metrics import sum_se
from mimopilot.core.topology import Scenario, generate
from mimopilot.solvers import SOLVER_LABELS, SOLVER_NAMES, run_solver
from mimopilot.util.general import format_objective, write_line

FITNESS_CHOICES = {"sumse": FITNESS_SUM_SE, "interference": FITNESS_INTERFERENCE, "maxmin": FITNESS_MAX_MIN}


def _scenario(args) -> Scenario:
    return Scenario(L=args.cells, K=args.users, M=args.antennas, seed=args.seed)


def _ga_config(args) -> GAConfig:
    return GAConfig(
        population_size=args.pop,
        generations=args.gens,
        crossover_prob=args.pc,
        mutation_prob=args.pm,
        elite_count=args.elite,
        cluster_count=args.clusters,
        recluster_period=args.recluster,
        fitness_mode=FITNESS_CHOICES[args.fitness],
        seed=args.seed,
    )


def solve(args):
    if args.beta:
        beta = fileio.read_fading_csv(args.beta)
    else:
        _, _, beta = generate(_scenario(args))
    result = run_solver(args.solver, beta, _ga_config(args), args.seed, parallelism=args.parallelism)

    write_line(f"solver: {SOLVER_LABELS[result.solver_name]}")
    write_line(f"objective: {format_objective(result.best_objective)}")
    write_line(f"sum_se: {format_objective(result.sum_se)}")
    write_line(f"evaluations: {result.evaluations}")
    write_line(f"wall_time: {result.wall_time:.3f}s")
    write_line(fileio.assignment_to_csv(result.best).rstrip("\n"))

    if args.out:
        fileio.write_solve_result_json(result, os.path.join(args.out, "result.json"))
        fileio.write_assignment_csv(result.best, os.path.join(args.out, "assignment.csv"))
        fileio.write_history_csv(result, os.path.join(args.out, "history.csv"))
        fileio.write_se_report_csv(sum_se(beta, result.best), os.path.join(args.out, "se.csv"))
        write_line(f"results written to {args.out}")


def space(args):
    write_line(str(search_space_size(args.cells, args.users)))
    if args.complexity:
        for name in SOLVER_NAMES:
            estimate = complexity_estimate(
                name, args.cells, args.users, N=args.pop, T=args.gens, C=args.clusters, d=1, P=args.parallelism
            )
            write_line(f"{name}: {estimate}")


def gen(args):
    scenario = _scenario(args)
    _, _, beta = generate(scenario)
    out = args.out or "."
    fileio.write_scenario_json(scenario, os.path.join(out, "scenario.json"))
    fileio.write_fading_csv(beta, os.path.join(out, "fading.csv"))
    write_line(f"scenario: {os.path.join(out, 'scenario.json')}")
    write_line(f"fading: {os.path.join(out, 'fading.csv')}")


def _add_scenario_arguments(parser):
    parser.add_argument("--cells", type=int, default=DEFAULT_CELLS, help="number of cells L")
    parser.add_argument("--users", type=int, default=DEFAULT_USERS, help="users (and pilots) per cell K")
    parser.add_argument("--antennas", type=int, default=DEFAULT_ANTENNAS, help="base station antennas M")
    parser.add_argument("--seed", type=int, default=DEFAULT_SEED, help="root seed of every random stream")


def _add_ga_arguments(parser):
    parser.add_argument("--pop", type=int, default=DEFAULT_POPULATION, help="population size N")
    parser.add_argument("--gens", type=int, default=DEFAULT_GENERATIONS, help="generations T")
    parser.add_argument("--pc", type=float, default=DEFAULT_CROSSOVER, help="crossover probability")
    parser.add_argument("--pm", type=float, default=DEFAULT_MUTATION, help="per-gene mutation probability")
    parser.add_argument("--elite", type=int, default=DEFAULT_ELITE, help="elite individuals per island")
    parser.add_argument("--clusters", type=int, default=DEFAULT_CLUSTERS, help="k-means islands C")
    parser.add_argument("--recluster", type=int, default=DEFAULT_RECLUSTER, help="generations between re-clustering")
    parser.add_argument("--parallelism", type=int, default=1, help="worker processes for pkga")
    parser.add_argument(
        "--fitness", choices=sorted(FITNESS_CHOICES), default="sumse", help="fitness the solvers maximise"
    )


def _add_solve_parser(subparsers):
    solve_parser = subparsers.add_parser("solve", help="solve the pilot assignment of one scenario")
    _add_scenario_arguments(solve_parser)
    _add_ga_arguments(solve_parser)
    solve_parser.add_argument("--solver", choices=SOLVER_NAMES, default=SOLVER_GA, help="solver to run")
    solve_parser.add_argument("--beta", help="fading CSV to solve instead of generating a scenario")
    solve_parser.add_argument("--out", help="directory for result.json, assignment.csv, history.csv and se.csv")
    solve_parser.set_defaults(func=solve)


def _add_space_parser(subparsers):
    space_parser = subparsers.add_parser("space", help="print the exact number of canonical assignments")
    _add_scenario_arguments(space_parser)
    _add_ga_arguments(space_parser)
    space_parser.add_argument(
        "--complexity", action="store_true", help="also print the operation-count estimate of every solver"
    )
    space_parser.set_defaults(func=space)


def _add_gen_parser(subparsers):
    gen_parser = subparsers.add_parser("gen", help="generate a scenario and write scenario.json and fading.csv")
    _add_scenario_arguments(gen_parser)
    gen_parser.add_argument("--out", help="output directory (default: current directory)")
    gen_parser.set_defaults(func=gen)


def _argparser():
    parser = argparse.ArgumentParser(description="Pilot assignment for multi-cell massive MIMO")
    subparsers = parser.add_subparsers(title="subcommands")
    _add_solve_parser(subparsers)
    benchmark.add_benchmark_parsers(subparsers)
    _add_space_parser(subparsers)
    _add_gen_parser(subparsers)

    parser.add_argument("-v", "--version", help="show version info", action="store_true")
    parser.set_defaults(func=show_version)

    return parser


def show_version(args):
    if args.version:
        print(mimopilot.__version__)
    else:
        _argparser().print_help()


def main(argv=None):
    parser = _argparser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except (MimoPilotError, OSError) as e:
        print(f"error: {getattr(e, 'message', e)}", file=sys.stderr)
        sys.exit(1)


if __name__ == "__main__":
    main()
