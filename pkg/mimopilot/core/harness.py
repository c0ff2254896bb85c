"""
Experiment orchestration: sweep a scenario over parameter grids and seeds, run every configured solver on each drop
and export the resulting tables.
"""

import concurrent.futures
import dataclasses
import itertools
import json
import math
import os
import warnings
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Sequence, Tuple, Union

import numpy as np
import pandas as pd
import yaml
from tqdm import tqdm

from mimopilot.config import EXPA_LIMIT, SOLVER_EXPA, SOLVER_GA, SOLVER_PKGA, SOLVER_RPA, SOLVER_SKGA, TQDM_DISABLE
from mimopilot.core.encoding import GAConfig, search_space_size
from mimopilot.core.errors import ConfigError, InfeasibleSearchError, InsufficientSamplesError, ScenarioError
from mimopilot.core.topology import Scenario, generate

STATUS_OK = "ok"
STATUS_SKIPPED = "skipped"

RECORD_COLUMNS = [
    "solver_name",
    "seed",
    "L",
    "K",
    "M",
    "C",
    "N",
    "T",
    "best_objective",
    "sum_se",
    "wall_time",
    "evaluations",
    "evaluations_to_target",
    "status",
]
CDF_COLUMNS = ["solver", "value", "cdf"]
SCALING_COLUMNS = ["solver", "M", "K", "median_wall_time", "median_evaluations"]

_SCENARIO_FIELDS = {f.name for f in dataclasses.fields(Scenario)} - {"seed"}
_CONFIG_FIELDS = {f.name for f in dataclasses.fields(GAConfig)} - {"seed"}


@dataclass(frozen=True)
class SolverSpec:
    name: str
    config: GAConfig = field(default_factory=GAConfig)
    parallelism: int = 1

    @classmethod
    def from_dict(cls, data: Union[str, dict]) -> "SolverSpec":
        if isinstance(data, str):
            return cls(name=data)
        unknown = set(data) - {"name", "config", "parallelism"}
        if unknown:
            raise ConfigError(f"unknown solver fields: {sorted(unknown)}")
        return cls(
            name=data["name"],
            config=GAConfig.from_dict(data.get("config") or {}),
            parallelism=int(data.get("parallelism", 1)),
        )

    def to_dict(self) -> dict:
        return {"name": self.name, "config": self.config.to_dict(), "parallelism": self.parallelism}


@dataclass(frozen=True)
class ExperimentSpec:
    """
    One experiment: a base scenario, the solvers to compare, the seeds and an optional sweep.

    `sweep` maps Scenario or GAConfig field names to lists of values; the experiment runs every combination of them
    (in key order) for every seed. A seed sets both the scenario drop and the solver streams.
    """

    scenario: Scenario
    solvers: Tuple[SolverSpec, ...]
    seeds: Tuple[int, ...]
    sweep: Dict[str, List] = field(default_factory=dict)
    outputs: str = "results"
    expa_limit: int = EXPA_LIMIT

    def __post_init__(self):
        object.__setattr__(self, "solvers", tuple(self.solvers))
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))
        self.validate()

    def validate(self):
        # imported here, the solvers package depends on core
        from mimopilot.solvers import SOLVER_NAMES

        if not self.solvers:
            raise ScenarioError("experiment needs at least one solver")
        if not self.seeds:
            raise ScenarioError("experiment needs at least one seed")
        if any(s < 0 for s in self.seeds):
            raise ScenarioError(f"seeds must be non-negative, got {list(self.seeds)}")
        for solver in self.solvers:
            if solver.name not in SOLVER_NAMES:
                raise ConfigError(f"unknown solver {solver.name!r}, expected one of {SOLVER_NAMES}")
            if solver.parallelism < 1:
                raise ConfigError(f"parallelism must be >= 1, got {solver.parallelism}")
        for key, values in self.sweep.items():
            if key not in _SCENARIO_FIELDS | _CONFIG_FIELDS:
                raise ScenarioError(f"cannot sweep over {key!r}")
            if not values:
                raise ScenarioError(f"sweep over {key!r} has no values")
        # every sweep point must be a valid scenario and valid solver configs
        for point in self.points():
            self.scenario_at(point, self.seeds[0])
            for solver in self.solvers:
                self.config_at(solver, point, self.seeds[0])

    def points(self) -> List[Dict]:
        keys = list(self.sweep)
        return [dict(zip(keys, values)) for values in itertools.product(*(self.sweep[k] for k in keys))]

    def scenario_at(self, point: Mapping, seed: int) -> Scenario:
        changes = {k: v for k, v in point.items() if k in _SCENARIO_FIELDS}
        return self.scenario.replace(seed=seed, **changes)

    def config_at(self, solver: SolverSpec, point: Mapping, seed: int) -> GAConfig:
        changes = {k: v for k, v in point.items() if k in _CONFIG_FIELDS}
        return solver.config.replace(seed=seed, **changes)

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario.to_dict(),
            "solvers": [s.to_dict() for s in self.solvers],
            "seeds": list(self.seeds),
            "sweep": {k: list(v) for k, v in self.sweep.items()},
            "outputs": self.outputs,
            "expa_limit": self.expa_limit,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentSpec":
        unknown = set(data) - {"scenario", "solvers", "seeds", "sweep", "outputs", "expa_limit"}
        if unknown:
            raise ScenarioError(f"unknown experiment fields: {sorted(unknown)}")
        return cls(
            scenario=Scenario.from_dict(data.get("scenario") or {}),
            solvers=tuple(SolverSpec.from_dict(s) for s in data.get("solvers") or []),
            seeds=tuple(data.get("seeds") or []),
            sweep={k: list(v) for k, v in (data.get("sweep") or {}).items()},
            outputs=data.get("outputs", "results"),
            expa_limit=int(data.get("expa_limit", EXPA_LIMIT)),
        )


def load_experiment_spec(path: str) -> ExperimentSpec:
    """Read an experiment spec from a JSON file, or YAML when the extension is .yaml/.yml."""
    with open(path) as f:
        if path.lower().endswith((".yaml", ".yml")):
            data = yaml.safe_load(f)
        else:
            data = json.load(f)
    if not isinstance(data, dict):
        raise ScenarioError(f"{path} does not contain an experiment object")
    return ExperimentSpec.from_dict(data)


@dataclass(frozen=True)
class RunRecord:
    solver_name: str
    seed: int
    L: int
    K: int
    M: int
    C: int
    N: int
    T: int
    best_objective: float
    sum_se: float
    wall_time: float
    evaluations: int
    evaluations_to_target: int
    status: str = STATUS_OK

    @property
    def ok(self) -> bool:
        return self.status == STATUS_OK

    def same_outcome(self, other: "RunRecord") -> bool:
        """Equality of everything except wall time."""
        mine = dataclasses.replace(self, wall_time=0.0)
        theirs = dataclasses.replace(other, wall_time=0.0)
        return all(_same(a, b) for a, b in zip(dataclasses.astuple(mine), dataclasses.astuple(theirs)))


def run_experiment(spec: ExperimentSpec, jobs: int = 1, verbose: bool = False) -> List[RunRecord]:
    """
    Run every solver of `spec` on every (sweep point, seed) pair.

    Records come out in (sweep point, seed, solver) order whatever `jobs` is. Exhaustive search on points whose
    search space exceeds `spec.expa_limit` yields a skipped record instead of failing the run.

    Args:
        spec: experiment to run
        jobs: worker processes across (sweep point, seed) pairs; keep 1 for timing runs
        verbose: show a progress bar
    """
    if jobs < 1:
        raise ConfigError(f"jobs must be >= 1, got {jobs}")
    tasks = [(spec, point, seed) for point in spec.points() for seed in spec.seeds]
    disable = bool(TQDM_DISABLE) or not verbose
    if jobs == 1:
        batches = [_run_point(task) for task in tqdm(tasks, disable=disable, desc="experiment")]
    else:
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as executor:
            batches = list(tqdm(executor.map(_run_point, tasks), total=len(tasks), disable=disable, desc="experiment"))

    records = [record for batch in batches for record in batch]
    skipped = [r for r in records if not r.ok]
    if skipped:
        warnings.warn(
            f"{len(skipped)} run(s) skipped: exhaustive search space above the limit of {spec.expa_limit}",
            stacklevel=2,
        )
    return records


def _run_point(task) -> List[RunRecord]:
    from mimopilot.solvers import run_solver

    spec, point, seed = task
    scenario = spec.scenario_at(point, seed)
    _, _, beta = generate(scenario)
    records = []
    for solver in spec.solvers:
        config = spec.config_at(solver, point, seed)
        shape = dict(
            solver_name=solver.name,
            seed=seed,
            L=scenario.L,
            K=scenario.K,
            M=scenario.M,
            C=config.cluster_count if solver.name in (SOLVER_SKGA, SOLVER_PKGA) else 1,
            N=config.population_size if solver.name in _GA_SOLVERS else 1,
            T=config.generations if solver.name in _GA_SOLVERS else 0,
        )
        try:
            result = run_solver(
                solver.name, beta, config, seed, parallelism=solver.parallelism, expa_limit=spec.expa_limit
            )
        except InfeasibleSearchError:
            records.append(
                RunRecord(
                    best_objective=math.nan,
                    sum_se=math.nan,
                    wall_time=0.0,
                    evaluations=0,
                    evaluations_to_target=0,
                    status=STATUS_SKIPPED,
                    **shape,
                )
            )
            continue
        records.append(
            RunRecord(
                best_objective=result.best_objective,
                sum_se=result.sum_se,
                wall_time=result.wall_time,
                evaluations=result.evaluations,
                evaluations_to_target=result.evaluations_to_target(),
                **shape,
            )
        )
    return records


_GA_SOLVERS = (SOLVER_GA, SOLVER_SKGA, SOLVER_PKGA)


def records_frame(records: Iterable[RunRecord]) -> pd.DataFrame:
    return pd.DataFrame([dataclasses.astuple(r) for r in records], columns=RECORD_COLUMNS)


def export_cdf(samples: Union[Iterable[RunRecord], Mapping[str, Sequence[float]]]) -> pd.DataFrame:
    """
    Empirical CDF of the best objectives of every solver.

    Args:
        samples: run records (skipped ones are ignored) or a mapping from solver name to objective values

    Returns:
        DataFrame with columns `solver,value,cdf`: per solver the sorted values with levels i/n, i = 1..n

    Raises:
        InsufficientSamplesError: a solver has fewer than 2 values
    """
    if isinstance(samples, Mapping):
        values = {name: [float(v) for v in vs] for name, vs in samples.items()}
    else:
        values = {}
        for record in samples:
            if record.ok:
                values.setdefault(record.solver_name, []).append(record.best_objective)

    frames = []
    for solver, vs in values.items():
        if len(vs) < 2:
            raise InsufficientSamplesError(f"CDF of {solver!r} needs at least 2 samples, got {len(vs)}")
        n = len(vs)
        frames.append(
            pd.DataFrame({"solver": solver, "value": np.sort(vs), "cdf": np.arange(1, n + 1) / n}, columns=CDF_COLUMNS)
        )
    if not frames:
        raise InsufficientSamplesError("no samples to build a CDF from")
    return pd.concat(frames, ignore_index=True)


def export_scaling(records: Iterable[RunRecord]) -> pd.DataFrame:
    """Median wall time and evaluations over seeds, per solver and (M, K) sweep point; skipped runs are dropped."""
    frame = records_frame(records)
    frame = frame[frame["status"] == STATUS_OK]
    grouped = frame.groupby(["solver_name", "M", "K"], sort=False)
    scaling = grouped.agg(median_wall_time=("wall_time", "median"), median_evaluations=("evaluations", "median"))
    scaling = scaling.reset_index().rename(columns={"solver_name": "solver"})
    return scaling[SCALING_COLUMNS]


def complexity_estimate(solver: str, L: int, K: int, N: int = 1, T: int = 1, C: int = 1, d: int = 1, P: int = 1) -> int:
    """
    Operation-count model of each solver: fitness evaluations times the per-evaluation cost plus clustering work.

    Exhaustive search is K!^(L-1), the GA family grows as N*T*L*K, k-means adds N*C*K*d per run and the parallel
    variant divides the total by P.
    """
    if solver == SOLVER_RPA:
        return 1
    if solver == SOLVER_EXPA:
        return search_space_size(L, K)
    base = N * T * L * K
    if solver == SOLVER_GA:
        return base
    clustered = base + N * C * K * d
    if solver == SOLVER_SKGA:
        return clustered
    if solver == SOLVER_PKGA:
        if P < 1:
            raise ConfigError(f"P must be >= 1, got {P}")
        return -(-clustered // P)
    raise ConfigError(f"unknown solver {solver!r}")


def write_records_csv(records: Iterable[RunRecord], path: str):
    _ensure_parent(path)
    records_frame(records).to_csv(path, index=False)


def read_records_csv(path: str) -> List[RunRecord]:
    frame = pd.read_csv(path, float_precision="round_trip")
    missing = set(RECORD_COLUMNS) - set(frame.columns)
    if missing:
        raise ScenarioError(f"{path} is missing record columns {sorted(missing)}")
    records = []
    for row in frame[RECORD_COLUMNS].itertuples(index=False):
        values = row._asdict()
        records.append(
            RunRecord(
                solver_name=str(values["solver_name"]),
                seed=int(values["seed"]),
                L=int(values["L"]),
                K=int(values["K"]),
                M=int(values["M"]),
                C=int(values["C"]),
                N=int(values["N"]),
                T=int(values["T"]),
                best_objective=float(values["best_objective"]),
                sum_se=float(values["sum_se"]),
                wall_time=float(values["wall_time"]),
                evaluations=int(values["evaluations"]),
                evaluations_to_target=int(values["evaluations_to_target"]),
                status=str(values["status"]),
            )
        )
    return records


def write_table_csv(frame: pd.DataFrame, path: str):
    _ensure_parent(path)
    frame.to_csv(path, index=False)


def write_experiment_outputs(records: List[RunRecord], outputs: str) -> Dict[str, str]:
    """
    Write records.csv, cdf.csv and scaling.csv into `outputs`. The CDF file is left out when some solver has fewer
    than two successful runs.

    Returns:
        mapping from table name to the written path
    """
    written = {"records": os.path.join(outputs, "records.csv")}
    write_records_csv(records, written["records"])
    try:
        cdf = export_cdf(records)
    except InsufficientSamplesError as e:
        warnings.warn(f"cdf.csv not written: {e.message}", stacklevel=2)
    else:
        written["cdf"] = os.path.join(outputs, "cdf.csv")
        write_table_csv(cdf, written["cdf"])
    written["scaling"] = os.path.join(outputs, "scaling.csv")
    write_table_csv(export_scaling(records), written["scaling"])
    return written


def _ensure_parent(path: str):
    parent = os.path.dirname(path)
    if parent and not os.path.exists(parent):
        os.makedirs(parent)


def _same(a, b) -> bool:
    if isinstance(a, float) and isinstance(b, float) and math.isnan(a) and math.isnan(b):
        return True
    return a == b
