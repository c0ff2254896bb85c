import json
import math
import os
import tempfile
import unittest

import numpy as np
import pandas as pd
import yaml

from mimopilot.core.encoding import GAConfig, search_space_size
from mimopilot.core.errors import ConfigError, InsufficientSamplesError, ScenarioError
from mimopilot.core.harness import (
    ExperimentSpec,
    RunRecord,
    SolverSpec,
    complexity_estimate,
    export_cdf,
    export_scaling,
    load_experiment_spec,
    read_records_csv,
    run_experiment,
    write_experiment_outputs,
    write_records_csv,
)
from mimopilot.core.topology import Scenario
from tests.helpers import slow_test

SMALL_CONFIG = GAConfig(population_size=12, generations=3, cluster_count=2, elite_count=1)


def get_spec(**kwargs):
    fields = dict(
        scenario=Scenario(L=2, K=3),
        solvers=[SolverSpec("rpa"), SolverSpec("skga", SMALL_CONFIG)],
        seeds=[0, 1],
    )
    fields.update(kwargs)
    return ExperimentSpec(**fields)


def get_record(solver_name, value, **kwargs):
    fields = dict(
        solver_name=solver_name,
        seed=0,
        L=2,
        K=3,
        M=128,
        C=1,
        N=1,
        T=0,
        best_objective=value,
        sum_se=value,
        wall_time=0.1,
        evaluations=10,
        evaluations_to_target=10,
    )
    fields.update(kwargs)
    return RunRecord(**fields)


class TestExperimentSpec(unittest.TestCase):
    def test_requires_solvers_and_seeds(self):
        with self.assertRaises(ScenarioError):
            get_spec(solvers=[])
        with self.assertRaises(ScenarioError):
            get_spec(seeds=[])

    def test_rejects_unknown_names(self):
        with self.assertRaises(ConfigError):
            get_spec(solvers=[SolverSpec("tabu")])
        with self.assertRaises(ScenarioError):
            get_spec(sweep={"users": [2]})

    def test_sweep_values_are_validated(self):
        with self.assertRaises(ScenarioError):
            get_spec(sweep={"K": [2, 0]})

    def test_points(self):
        spec = get_spec(sweep={"K": [2, 3], "M": [64, 128]})
        self.assertEqual(
            spec.points(), [{"K": 2, "M": 64}, {"K": 2, "M": 128}, {"K": 3, "M": 64}, {"K": 3, "M": 128}]
        )
        self.assertEqual(spec.scenario_at({"K": 2}, 5), Scenario(L=2, K=2, seed=5))

    def test_json_and_yaml(self):
        spec = get_spec(sweep={"K": [2, 3]})
        with tempfile.TemporaryDirectory() as tmp:
            json_path = os.path.join(tmp, "spec.json")
            yaml_path = os.path.join(tmp, "spec.yaml")
            with open(json_path, "w") as f:
                json.dump(spec.to_dict(), f)
            with open(yaml_path, "w") as f:
                yaml.safe_dump(spec.to_dict(), f)
            self.assertEqual(load_experiment_spec(json_path), spec)
            self.assertEqual(load_experiment_spec(yaml_path), spec)

    def test_solver_shorthand(self):
        spec = ExperimentSpec.from_dict({"scenario": {"L": 2, "K": 2}, "solvers": ["rpa", "expa"], "seeds": [4]})
        self.assertEqual([s.name for s in spec.solvers], ["rpa", "expa"])


class TestRunExperiment(unittest.TestCase):
    def test_one_record(self):
        records = run_experiment(get_spec(solvers=[SolverSpec("rpa")], seeds=[3]))
        self.assertEqual(len(records), 1)
        self.assertEqual((records[0].solver_name, records[0].seed, records[0].L, records[0].K), ("rpa", 3, 2, 3))

    def test_one_record_per_solver_seed_and_point(self):
        records = run_experiment(get_spec(sweep={"K": [2, 3]}))
        self.assertEqual(len(records), 2 * 2 * 2)
        self.assertEqual([r.K for r in records], [2] * 4 + [3] * 4)
        self.assertEqual([r.seed for r in records[:4]], [0, 0, 1, 1])

    def test_deterministic(self):
        spec = get_spec(sweep={"K": [2, 3]})
        first = run_experiment(spec)
        second = run_experiment(spec)
        self.assertTrue(all(a.same_outcome(b) for a, b in zip(first, second)))

    def test_jobs_do_not_change_records(self):
        spec = get_spec(sweep={"K": [2, 3]})
        sequential = run_experiment(spec)
        parallel = run_experiment(spec, jobs=2)
        self.assertTrue(all(a.same_outcome(b) for a, b in zip(sequential, parallel)))

    def test_infeasible_exhaustive_runs_are_skipped(self):
        spec = get_spec(solvers=[SolverSpec("expa")], sweep={"K": [3, 9]}, seeds=[0], expa_limit=1000)
        with self.assertWarns(UserWarning):
            records = run_experiment(spec)
        self.assertEqual([r.status for r in records], ["ok", "skipped"])
        self.assertEqual(records[0].evaluations, search_space_size(2, 3))
        self.assertTrue(math.isnan(records[1].best_objective))

    def test_record_shape(self):
        records = run_experiment(get_spec(seeds=[0]))
        rpa, skga = records
        self.assertEqual((rpa.C, rpa.N, rpa.T), (1, 1, 0))
        self.assertEqual((skga.C, skga.N, skga.T), (2, 12, 3))
        self.assertEqual(skga.evaluations, 12 * 4)


class TestExports(unittest.TestCase):
    def test_two_sample_cdf(self):
        table = export_cdf({"ga": [2.0, 1.0]})
        self.assertEqual(list(table.columns), ["solver", "value", "cdf"])
        self.assertEqual(table[["value", "cdf"]].values.tolist(), [[1.0, 0.5], [2.0, 1.0]])

    def test_cdf_from_records(self):
        records = [get_record("rpa", v, seed=i) for i, v in enumerate([3.0, 1.0, 2.0])]
        records.append(get_record("expa", math.nan, status="skipped"))
        table = export_cdf(records)
        self.assertEqual(set(table["solver"]), {"rpa"})
        self.assertTrue((np.diff(table["cdf"]) > 0).all())
        self.assertEqual(table["cdf"].iloc[-1], 1.0)

    def test_cdf_needs_two_samples(self):
        with self.assertRaises(InsufficientSamplesError):
            export_cdf({"ga": [1.0]})
        with self.assertRaises(InsufficientSamplesError):
            export_cdf([])

    def test_scaling(self):
        records = [
            get_record("ga", 1.0, K=10, wall_time=1.0, evaluations=100),
            get_record("ga", 1.0, K=10, wall_time=3.0, evaluations=100, seed=1),
            get_record("ga", 1.0, K=20, wall_time=5.0, evaluations=200),
            get_record("expa", math.nan, K=20, status="skipped"),
        ]
        table = export_scaling(records)
        self.assertEqual(list(table.columns), ["solver", "M", "K", "median_wall_time", "median_evaluations"])
        self.assertEqual(table.values.tolist(), [["ga", 128, 10, 2.0, 100.0], ["ga", 128, 20, 5.0, 200.0]])

    def test_single_point_scaling(self):
        records = run_experiment(get_spec())
        self.assertEqual(sorted(export_scaling(records)["solver"]), ["rpa", "skga"])

    def test_records_round_trip(self):
        with self.assertWarns(UserWarning):
            records = run_experiment(get_spec(solvers=[SolverSpec("expa"), SolverSpec("rpa")], expa_limit=3))
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "records.csv")
            write_experiment_outputs(records, tmp)
            restored = read_records_csv(path)
            self.assertEqual(len(restored), len(records))
            self.assertTrue(all(a.same_outcome(b) and a.wall_time == b.wall_time for a, b in zip(records, restored)))

    def test_written_tables(self):
        records = run_experiment(get_spec())
        with tempfile.TemporaryDirectory() as tmp:
            written = write_experiment_outputs(records, os.path.join(tmp, "out"))
            self.assertEqual(sorted(written), ["cdf", "records", "scaling"])
            for path in written.values():
                self.assertTrue(os.path.exists(path))
            cdf = pd.read_csv(written["cdf"])
            self.assertEqual(list(cdf.columns), ["solver", "value", "cdf"])
            write_records_csv(records, os.path.join(tmp, "again.csv"))
            self.assertEqual(len(read_records_csv(os.path.join(tmp, "again.csv"))), 4)


class TestComplexity(unittest.TestCase):
    def test_models(self):
        self.assertEqual(complexity_estimate("rpa", 16, 20), 1)
        self.assertEqual(complexity_estimate("expa", 3, 3), 36)
        self.assertEqual(complexity_estimate("ga", 16, 20, N=120, T=20), 120 * 20 * 16 * 20)
        self.assertEqual(complexity_estimate("skga", 16, 20, N=120, T=20, C=5, d=1), 120 * 20 * 16 * 20 + 120 * 5 * 20)
        self.assertEqual(
            complexity_estimate("pkga", 16, 20, N=120, T=20, C=5, d=1, P=4),
            complexity_estimate("skga", 16, 20, N=120, T=20, C=5, d=1) // 4,
        )

    def test_unknown_solver(self):
        with self.assertRaises(ConfigError):
            complexity_estimate("tabu", 2, 2)


class TestReferenceExperiments(unittest.TestCase):
    @slow_test
    def test_clustered_ga_dominates_random_assignment(self):
        spec = ExperimentSpec(
            scenario=Scenario(),
            solvers=[SolverSpec("rpa"), SolverSpec("skga", GAConfig())],
            seeds=list(range(30)),
        )
        table = export_cdf(run_experiment(spec))
        rpa = np.sort(table[table["solver"] == "rpa"]["value"].values)
        skga = np.sort(table[table["solver"] == "skga"]["value"].values)
        # same sample size: first-order dominance is order-statistic dominance
        self.assertTrue((skga >= rpa).all())

    @slow_test
    def test_scaling_shape(self):
        spec = ExperimentSpec(
            scenario=Scenario(),
            solvers=[SolverSpec("ga", GAConfig())],
            seeds=[0, 1, 2],
            sweep={"K": [10, 20, 40, 60]},
        )
        table = export_scaling(run_experiment(spec))
        K = table["K"].values.astype(float)
        t = table["median_wall_time"].values
        slope, intercept = np.polyfit(K, t, 1)
        residual = t - (slope * K + intercept)
        r2 = 1.0 - float((residual**2).sum()) / float(((t - t.mean()) ** 2).sum())
        self.assertGreaterEqual(r2, 0.9)
        self.assertGreater(t[K == 40][0], t[K == 10][0])

        expa = ExperimentSpec(
            scenario=Scenario(L=2), solvers=[SolverSpec("expa")], seeds=[0, 1, 2], sweep={"K": [4, 5]}
        )
        times = export_scaling(run_experiment(expa))["median_wall_time"].values
        self.assertTrue(2.5 <= times[1] / times[0] <= 10.0)
