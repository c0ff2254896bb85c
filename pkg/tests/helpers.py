import os
import unittest

import numpy as np

from mimopilot.core.encoding import GAConfig
from mimopilot.core.topology import FadingTensor
from mimopilot.util.rng import substream

SLOW_TESTS = os.getenv("MIMOPILOT_SLOW_TESTS") == "1"

slow_test = unittest.skipUnless(SLOW_TESTS, "set MIMOPILOT_SLOW_TESTS=1 to run long acceptance runs")


def crafted_fading():
    """Two cells, two users: cell 0 sees (1, 0.8) from its users, cell 1 sees (1, 1)."""
    beta = np.empty((2, 2, 2))
    beta[0, 0] = (1.0, 0.8)
    beta[1, 1] = (1.0, 1.0)
    beta[0, 1] = (0.5, 0.1)
    beta[1, 0] = (0.3, 0.2)
    return FadingTensor(beta)


def uniform_fading(L, K, value=1.0):
    return FadingTensor(np.full((L, L, K), value))


def random_fading(L, K, seed=0):
    """Own-cell coefficients around 1, cross-cell ones spread over two decades below."""
    rng = substream(seed, "test-fading")
    beta = 10.0 ** rng.uniform(-3.0, -1.0, size=(L, L, K))
    for j in range(L):
        beta[j, j] = rng.uniform(0.5, 1.5, size=K)
    return FadingTensor(beta)


def get_config(**kwargs):
    defaults = dict(
        population_size=30,
        generations=10,
        crossover_prob=0.9,
        mutation_prob=0.05,
        elite_count=2,
        cluster_count=3,
        recluster_period=3,
    )
    defaults.update(kwargs)
    return GAConfig(**defaults)
