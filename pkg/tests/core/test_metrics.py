import math
import unittest

import numpy as np

from mimopilot.config import FITNESS_INTERFERENCE, FITNESS_MAX_MIN, FITNESS_SUM_SE
from mimopilot.core.encoding import PilotAssignment, random_assignment
from mimopilot.core.errors import AssignmentError, ClusteringError, ConfigError
from mimopilot.core.metrics import (
    INFINITE,
    UserClustering,
    assignment_interference,
    asymptotic_sinr,
    cluster_interference,
    finite_m_sinr,
    fitness_function,
    nearest_serving,
    objective,
    pilot_clusters,
    spatial_clustering,
    sum_se,
    user_se,
)
from mimopilot.core.topology import FadingTensor, Scenario, generate
from mimopilot.util.rng import substream
from tests.helpers import crafted_fading, random_fading, uniform_fading

IDENTITY_SE = [math.log2(5), math.log2(65), math.log2(1 + 1 / 0.09), math.log2(26)]


class TestSinr(unittest.TestCase):
    def test_symmetric_pair(self):
        beta = uniform_fading(2, 3, 0.7)
        assignment = PilotAssignment([[0, 1, 2], [0, 1, 2]])
        self.assertEqual(asymptotic_sinr(beta, assignment, 0, 1), 1.0)
        self.assertEqual(user_se(beta, assignment, 0, 1), 1.0)

    def test_single_cell(self):
        beta = uniform_fading(1, 2)
        assignment = PilotAssignment([[0, 1]])
        self.assertEqual(asymptotic_sinr(beta, assignment, 0, 0), INFINITE)
        self.assertEqual(user_se(beta, assignment, 0, 0), 30.0)
        self.assertEqual(user_se(beta, assignment, 0, 0, se_cap=12.0), 12.0)

    def test_three_cells(self):
        beta = np.ones((3, 3, 1))
        beta[0, 1, 0] = 0.5
        beta[0, 2, 0] = 0.1
        assignment = PilotAssignment([[0], [0], [0]])
        self.assertAlmostEqual(asymptotic_sinr(FadingTensor(beta), assignment, 0, 0), 1 / 0.26, places=12)

    def test_se_three(self):
        beta = np.ones((2, 2, 1))
        beta[0, 1, 0] = 1 / math.sqrt(3)
        self.assertAlmostEqual(user_se(FadingTensor(beta), PilotAssignment([[0], [0]]), 0, 0), 2.0, places=12)

    def test_index_out_of_range(self):
        beta = uniform_fading(2, 2)
        assignment = PilotAssignment([[0, 1], [0, 1]])
        with self.assertRaises(AssignmentError):
            asymptotic_sinr(beta, assignment, 2, 0)
        with self.assertRaises(AssignmentError):
            asymptotic_sinr(beta, assignment, 0, -1)

    def test_shape_mismatch(self):
        with self.assertRaises(AssignmentError):
            objective(uniform_fading(2, 2), PilotAssignment([[0, 1, 2], [0, 1, 2]]))


class TestSumSe(unittest.TestCase):
    def test_two_cells_one_user(self):
        report = sum_se(uniform_fading(2, 1), PilotAssignment([[0], [0]]))
        self.assertEqual(report.sum_se, 2.0)

    def test_crafted_identity(self):
        report = sum_se(crafted_fading(), PilotAssignment([[0, 1], [0, 1]]))
        np.testing.assert_allclose(report.per_user_se.ravel(), IDENTITY_SE, rtol=1e-12)
        self.assertAlmostEqual(report.sum_se, sum(IDENTITY_SE), places=12)
        self.assertAlmostEqual(report.min_se, min(IDENTITY_SE), places=12)
        self.assertAlmostEqual(report.mean_se, sum(IDENTITY_SE) / 4, places=12)

    def test_crafted_swap(self):
        beta = crafted_fading()
        identity = objective(beta, PilotAssignment([[0, 1], [0, 1]]))
        swapped = objective(beta, PilotAssignment([[0, 1], [1, 0]]))
        expected = math.log2(101) + math.log2(1 + 1 / 0.09) + math.log2(1 + 0.64 / 0.25) + math.log2(26)
        self.assertNotAlmostEqual(identity, swapped)
        self.assertAlmostEqual(swapped, expected, places=12)

    def test_report_rows(self):
        report = sum_se(crafted_fading(), PilotAssignment([[0, 1], [1, 0]]))
        rows = list(report.rows())
        self.assertEqual([r[:3] for r in rows], [(0, 0, 0), (0, 1, 1), (1, 0, 1), (1, 1, 0)])
        self.assertAlmostEqual(sum(r[3] for r in rows), report.sum_se, places=12)

    def test_matches_per_user_se(self):
        beta = random_fading(3, 4, seed=2)
        assignment = random_assignment(3, 4, substream(2, "assignment"))
        expected = sum(user_se(beta, assignment, i, p) for i in range(3) for p in range(4))
        self.assertAlmostEqual(objective(beta, assignment), expected, places=10)
        self.assertEqual(objective(beta, assignment), sum_se(beta, assignment).sum_se)

    def test_relabeling_invariance(self):
        beta = random_fading(4, 5, seed=3)
        rng = substream(3, "assignment")
        for _ in range(10):
            assignment = random_assignment(4, 5, rng)
            relabeled = assignment.relabeled(rng.permutation(5))
            self.assertAlmostEqual(objective(beta, assignment), objective(beta, relabeled), places=10)
            self.assertAlmostEqual(objective(beta, relabeled.canonical()), objective(beta, assignment), places=10)

    def test_scale_invariance(self):
        for seed in range(3):
            beta = random_fading(3, 4, seed=seed)
            assignment = random_assignment(3, 4, substream(seed, "assignment"))
            base = objective(beta, assignment)
            for gamma in (0.01, 1.0, 100.0):
                self.assertLessEqual(abs(objective(beta.scaled(gamma), assignment) - base), 1e-9 * abs(base))

    def test_weaker_cross_gain_never_hurts(self):
        beta = random_fading(3, 3, seed=4)
        assignment = random_assignment(3, 3, substream(4, "assignment"))
        base = objective(beta, assignment)
        for i, j, k in [(0, 1, 0), (2, 0, 1), (1, 2, 2)]:
            weaker = beta.beta.copy()
            weaker[i, j, k] *= 0.5
            self.assertGreaterEqual(objective(FadingTensor(weaker), assignment), base)


class TestFiniteMSinr(unittest.TestCase):
    def test_no_interferer_no_noise(self):
        sinr = finite_m_sinr(uniform_fading(1, 1), PilotAssignment([[0]]), 0, 0, 8, 0.0, 10, substream(0, "mc"))
        self.assertEqual(sinr, INFINITE)

    def test_converges_to_the_limit(self):
        beta = uniform_fading(2, 1)
        assignment = PilotAssignment([[0], [0]])
        sinr = finite_m_sinr(beta, assignment, 0, 0, 4096, 0.0, 200, substream(1, "mc"))
        self.assertLess(abs(sinr - 1.0), 0.1)

    def test_random_two_cell_instances(self):
        for seed in range(5):
            beta = random_fading(2, 2, seed=seed)
            assignment = random_assignment(2, 2, substream(seed, "assignment"))
            limit = asymptotic_sinr(beta, assignment, 1, 0)
            estimate = finite_m_sinr(beta, assignment, 1, 0, 4096, 0.0, 200, substream(seed, "mc"))
            self.assertLess(abs(estimate - limit) / limit, 0.1)

    def test_deterministic(self):
        beta = random_fading(3, 2, seed=1)
        assignment = PilotAssignment([[0, 1], [1, 0], [0, 1]])
        first = finite_m_sinr(beta, assignment, 2, 1, 64, 1.0, 5, substream(7, "mc"))
        second = finite_m_sinr(beta, assignment, 2, 1, 64, 1.0, 5, substream(7, "mc"))
        self.assertEqual(first, second)

    def test_invalid_arguments(self):
        beta = uniform_fading(2, 1)
        assignment = PilotAssignment([[0], [0]])
        with self.assertRaises(ConfigError):
            finite_m_sinr(beta, assignment, 0, 0, 16, 0.0, 0, substream(0, "mc"))
        with self.assertRaises(AssignmentError):
            finite_m_sinr(beta, assignment, 3, 0, 16, 0.0, 1, substream(0, "mc"))


class TestClusterInterference(unittest.TestCase):
    def test_two_singletons_uniform(self):
        beta = uniform_fading(2, 1)
        clustering = UserClustering([[0], [1]])
        self.assertEqual(cluster_interference(beta, clustering, [0, 1]), 2.0)

    def test_half_cross(self):
        beta = np.full((2, 2, 1), 0.5)
        beta[0, 0, 0] = beta[1, 1, 0] = 1.0
        clustering = UserClustering([[0], [1]])
        self.assertEqual(cluster_interference(FadingTensor(beta), clustering, {0: 0, 1: 1}), 1.0)

    def test_three_clusters(self):
        beta = np.array(
            [
                [[1.0], [0.2], [0.1]],
                [[0.4], [2.0], [0.5]],
                [[0.3], [0.6], [1.5]],
            ]
        )
        clustering = UserClustering([[0], [1], [2]])
        expected = (0.2 / 1.0 + 0.4 / 2.0) + (0.1 / 1.0 + 0.3 / 1.5) + (0.5 / 2.0 + 0.6 / 1.5)
        self.assertAlmostEqual(cluster_interference(FadingTensor(beta), clustering, [0, 1, 2]), expected, places=12)

    def test_swap_symmetry(self):
        beta = random_fading(3, 2, seed=6)
        clustering = UserClustering([[0, 0], [1, 1], [1, 0]])
        forward = cluster_interference(beta, clustering, [0, 1])
        swapped = UserClustering(1 - clustering.labels)
        self.assertAlmostEqual(cluster_interference(beta, swapped, [1, 0]), forward, places=12)

    def test_errors(self):
        beta = uniform_fading(2, 1)
        with self.assertRaises(ClusteringError):
            cluster_interference(beta, UserClustering([[0], [0]], C=2), [0, 1])
        with self.assertRaises(ClusteringError):
            cluster_interference(beta, UserClustering([[0], [1]]), [0])
        with self.assertRaises(ClusteringError):
            cluster_interference(beta, UserClustering([[0], [1]]), [0, 5])

    def test_assignment_interference_per_pilot(self):
        beta = random_fading(3, 4, seed=8)
        assignment = random_assignment(3, 4, substream(8, "assignment"))
        expected = 0.0
        for pilot in range(4):
            sub, clustering, serving = pilot_clusters(beta, assignment, pilot)
            expected += cluster_interference(sub, clustering, serving)
        self.assertAlmostEqual(assignment_interference(beta, assignment), expected, places=10)


class TestFitness(unittest.TestCase):
    def test_modes(self):
        beta = crafted_fading()
        assignment = PilotAssignment([[0, 1], [0, 1]])
        self.assertEqual(fitness_function(beta, FITNESS_SUM_SE)(assignment), objective(beta, assignment))
        self.assertEqual(
            fitness_function(beta, FITNESS_INTERFERENCE)(assignment), -assignment_interference(beta, assignment)
        )
        self.assertAlmostEqual(fitness_function(beta, FITNESS_MAX_MIN)(assignment), min(IDENTITY_SE), places=12)

    def test_unknown_mode(self):
        with self.assertRaises(ConfigError):
            fitness_function(crafted_fading(), "throughput")


class TestSpatialClustering(unittest.TestCase):
    def test_clusters_cover_every_user(self):
        grid, drop, beta = generate(Scenario(L=4, K=6, seed=2))
        clustering = spatial_clustering(drop, 4, substream(2, "spatial"))
        self.assertEqual(clustering.labels.shape, (4, 6))
        self.assertEqual(clustering.sizes().sum(), 24)
        self.assertTrue((clustering.sizes() > 0).all())
        serving = nearest_serving(beta, clustering)
        self.assertEqual(len(serving), 4)
        self.assertGreaterEqual(cluster_interference(beta, clustering, serving), 0.0)
