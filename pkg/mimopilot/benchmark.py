import os

from mimopilot.core.harness import (
    export_cdf,
    load_experiment_spec,
    read_records_csv,
    run_experiment,
    write_experiment_outputs,
    write_table_csv,
)
from mimopilot.util.general import format_objective, write_line


def add_benchmark_parsers(subparsers):
    bench_parser = subparsers.add_parser(
        "bench", help="run an experiment spec and write records.csv, cdf.csv and scaling.csv"
    )
    bench_parser.add_argument("--spec", required=True, help="experiment spec file (.json, .yaml or .yml)")
    bench_parser.add_argument("--out", help="output directory, overrides `outputs` of the spec")
    bench_parser.add_argument(
        "--jobs",
        type=int,
        default=1,
        help="worker processes across (sweep point, seed) pairs; keep 1 when measuring wall time",
    )
    bench_parser.set_defaults(func=bench)

    cdf_parser = subparsers.add_parser("cdf", help="empirical CDF of best objectives per solver from a records file")
    cdf_parser.add_argument("--records", required=True, help="records.csv written by `mimopilot bench`")
    cdf_parser.add_argument("--out", help="directory to write cdf.csv into; prints the table when omitted")
    cdf_parser.set_defaults(func=cdf)


def bench(args):
    spec = load_experiment_spec(args.spec)
    outputs = args.out or spec.outputs
    records = run_experiment(spec, jobs=args.jobs, verbose=True)
    written = write_experiment_outputs(records, outputs)

    ok = [r for r in records if r.ok]
    write_line(f"{len(records)} runs, {len(records) - len(ok)} skipped")
    for name in dict.fromkeys(r.solver_name for r in ok):
        best = max(r.best_objective for r in ok if r.solver_name == name)
        write_line(f"  {name}: best objective {format_objective(best)}")
    for table, path in written.items():
        write_line(f"{table}: {path}")


def cdf(args):
    table = export_cdf(read_records_csv(args.records))
    if args.out:
        path = os.path.join(args.out, "cdf.csv")
        write_table_csv(table, path)
        write_line(f"cdf: {path}")
    else:
        write_line(table.to_csv(index=False).rstrip("\n"))
