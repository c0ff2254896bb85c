import dataclasses
import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from mimopilot.config import (
    DEFAULT_CLUSTERS,
    DEFAULT_CROSSOVER,
    DEFAULT_ELITE,
    DEFAULT_GENERATIONS,
    DEFAULT_MUTATION,
    DEFAULT_POPULATION,
    DEFAULT_RECLUSTER,
    DEFAULT_SEED,
    FITNESS_MODES,
    FITNESS_SUM_SE,
)
from mimopilot.core.errors import AssignmentError, ConfigError


class PilotAssignment:
    """
    A pilot assignment chromosome: `rows[j, u]` is the pilot index given to user u of cell j.

    Every row is a permutation of 0..K-1. Assignments produced by this module are canonical: row 0 is the identity,
    which leaves exactly K!^(L-1) distinct assignments.
    """

    def __init__(self, rows, canonical: bool = True):
        rows = np.array(rows, dtype=np.int64)
        if rows.ndim != 2 or rows.shape[0] < 1 or rows.shape[1] < 1:
            raise AssignmentError(f"assignment must be a non-empty L x K matrix, got shape {rows.shape}")
        reference = np.arange(rows.shape[1])
        for j, row in enumerate(rows):
            if not np.array_equal(np.sort(row), reference):
                raise AssignmentError(f"row {j} is not a permutation of 0..{rows.shape[1] - 1}: {row.tolist()}")
        if canonical and not np.array_equal(rows[0], reference):
            raise AssignmentError("row 0 of a canonical assignment must be the identity permutation")
        rows.flags.writeable = False
        self.rows = rows

    @property
    def L(self) -> int:
        return self.rows.shape[0]

    @property
    def K(self) -> int:
        return self.rows.shape[1]

    @property
    def is_canonical(self) -> bool:
        return bool(np.array_equal(self.rows[0], np.arange(self.K)))

    def users_by_pilot(self) -> np.ndarray:
        """Inverse permutation per row: result[j, p] is the user of cell j holding pilot p."""
        return np.argsort(self.rows, axis=1, kind="stable")

    def canonical(self) -> "PilotAssignment":
        """Relabel pilots globally so that row 0 becomes the identity."""
        relabel = np.argsort(self.rows[0])
        return PilotAssignment(relabel[self.rows])

    def relabeled(self, permutation: Sequence[int]) -> "PilotAssignment":
        """Apply the pilot relabeling p -> permutation[p] to every row."""
        return PilotAssignment(np.asarray(permutation)[self.rows], canonical=False)

    def key(self) -> Tuple[int, ...]:
        return tuple(self.rows.ravel().tolist())

    def __eq__(self, other):
        if not isinstance(other, PilotAssignment):
            return NotImplemented
        return self.rows.shape == other.rows.shape and np.array_equal(self.rows, other.rows)

    def __hash__(self):
        return hash((self.rows.shape, self.key()))

    def __repr__(self):
        return f"PilotAssignment({self.rows.tolist()})"


@dataclass(frozen=True)
class GAConfig:
    """
    Evolutionary hyperparameters. Defaults follow the system simulation parameters of the reference setup.

    Attributes:
        population_size: N individuals.
        generations: T generations.
        crossover_prob: probability that a parent pair is recombined.
        mutation_prob: per-gene swap probability.
        elite_count: E best individuals copied unchanged into the next generation.
        cluster_count: C k-means islands.
        recluster_period: R, generations between two k-means partitions.
        fitness_mode: one of "sum-se", "cluster-interference", "max-min".
        seed: root seed of the solver streams.
    """

    population_size: int = DEFAULT_POPULATION
    generations: int = DEFAULT_GENERATIONS
    crossover_prob: float = DEFAULT_CROSSOVER
    mutation_prob: float = DEFAULT_MUTATION
    elite_count: int = DEFAULT_ELITE
    cluster_count: int = DEFAULT_CLUSTERS
    recluster_period: int = DEFAULT_RECLUSTER
    fitness_mode: str = FITNESS_SUM_SE
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.population_size < 2:
            raise ConfigError(f"population_size must be >= 2, got {self.population_size}")
        if self.generations < 0:
            raise ConfigError(f"generations must be >= 0, got {self.generations}")
        if not 0.0 <= self.crossover_prob <= 1.0:
            raise ConfigError(f"crossover_prob must be in [0, 1], got {self.crossover_prob}")
        if not 0.0 <= self.mutation_prob <= 1.0:
            raise ConfigError(f"mutation_prob must be in [0, 1], got {self.mutation_prob}")
        if not 1 <= self.elite_count < self.population_size:
            raise ConfigError(f"need 1 <= elite_count < population_size, got {self.elite_count}")
        if not 1 <= self.cluster_count <= self.population_size - self.elite_count:
            raise ConfigError(
                "need 1 <= cluster_count <= population_size - elite_count, "
                f"got C={self.cluster_count}, N={self.population_size}, E={self.elite_count}"
            )
        if self.recluster_period < 1:
            raise ConfigError(f"recluster_period must be >= 1, got {self.recluster_period}")
        if self.fitness_mode not in FITNESS_MODES:
            raise ConfigError(f"fitness_mode must be one of {FITNESS_MODES}, got {self.fitness_mode!r}")
        if self.seed < 0:
            raise ConfigError(f"seed must be non-negative, got {self.seed}")

    def replace(self, **changes) -> "GAConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "GAConfig":
        fields = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - fields
        if unknown:
            raise ConfigError(f"unknown GA config fields: {sorted(unknown)}")
        return cls(**data)


def random_assignment(L: int, K: int, rng: np.random.Generator) -> PilotAssignment:
    """Identity in row 0, independent uniform permutations in rows 1..L-1."""
    if L < 1 or K < 1:
        raise AssignmentError(f"L and K must be >= 1, got L={L}, K={K}")
    rows = np.empty((L, K), dtype=np.int64)
    rows[0] = np.arange(K)
    for j in range(1, L):
        rows[j] = rng.permutation(K)
    return PilotAssignment(rows)


def search_space_size(L: int, K: int) -> int:
    """Exact number of canonical assignments, (K!)^(L-1)."""
    if L < 1 or K < 1:
        raise AssignmentError(f"L and K must be >= 1, got L={L}, K={K}")
    return math.factorial(K) ** (L - 1)


def pmx_crossover(
    a: PilotAssignment, b: PilotAssignment, p_c: float, rng: np.random.Generator
) -> Tuple[PilotAssignment, PilotAssignment]:
    """
    Partially-mapped crossover applied row by row.

    With probability `p_c` every non-canonical row pair is recombined with its own two cut points; otherwise the
    children are copies of the parents.

    Raises:
        AssignmentError: parents differ in shape
    """
    if a.rows.shape != b.rows.shape:
        raise AssignmentError(f"parents differ in shape: {a.rows.shape} vs {b.rows.shape}")
    if a.K < 2 or rng.random() >= p_c:
        return a, b
    first = a.rows.copy()
    second = b.rows.copy()
    for j in range(1, a.L):
        c1, c2 = np.sort(rng.choice(a.K + 1, size=2, replace=False))
        first[j] = pmx_row(a.rows[j], b.rows[j], c1, c2)
        second[j] = pmx_row(b.rows[j], a.rows[j], c1, c2)
    return PilotAssignment(first), PilotAssignment(second)


def pmx_row(donor, other, c1: int, c2: int) -> np.ndarray:
    """Child carrying donor[c1:c2]; the remaining genes come from `other`, repaired through the segment mapping."""
    donor = np.asarray(donor)
    other = np.asarray(other)
    child = other.copy()
    child[c1:c2] = donor[c1:c2]
    segment = {int(g): i for i, g in enumerate(donor[c1:c2].tolist(), start=c1)}
    for i in list(range(c1)) + list(range(c2, len(donor))):
        gene = int(other[i])
        while gene in segment:
            gene = int(other[segment[gene]])
        child[i] = gene
    return child


def swap_mutation(x: PilotAssignment, p_m: float, rng: np.random.Generator) -> PilotAssignment:
    """Swap each gene of rows 1..L-1 with probability `p_m` against another position of the same row."""
    rows, _ = mutate_rows(x.rows, p_m, rng)
    return x if rows is x.rows else PilotAssignment(rows)


def mutate_rows(rows: np.ndarray, p_m: float, rng: np.random.Generator) -> Tuple[np.ndarray, int]:
    """Swap mutation on a raw row matrix; returns the new matrix and the number of swap events."""
    L, K = rows.shape
    if L < 2 or K < 2 or p_m <= 0.0:
        return rows, 0
    hits = rng.random((L - 1, K)) < p_m
    events = int(hits.sum())
    if events == 0:
        return rows, 0
    mutated = rows.copy()
    for j, u in zip(*np.nonzero(hits)):
        # uniform over the K - 1 other positions
        v = int(rng.integers(K - 1))
        if v >= u:
            v += 1
        row = mutated[j + 1]
        row[u], row[v] = row[v], row[u]
    return mutated, events


def selection_weights(fitness: Sequence[float]) -> np.ndarray:
    """Roulette weights fitness - min + delta, with delta = 1e-9 of the fitness range; uniform when flat."""
    fitness = np.asarray(fitness, dtype=float)
    if fitness.size == 0:
        raise AssignmentError("cannot select from an empty population")
    if not np.isfinite(fitness).all():
        raise AssignmentError("fitness values must be finite")
    spread = float(fitness.max() - fitness.min())
    if spread == 0.0:
        return np.full(fitness.size, 1.0 / fitness.size)
    weights = fitness - fitness.min() + 1e-9 * spread
    return weights / weights.sum()


def roulette_indices(fitness: Sequence[float], count: int, rng: np.random.Generator) -> np.ndarray:
    weights = selection_weights(fitness)
    return rng.choice(len(weights), size=count, replace=True, p=weights)


def roulette_select(population: List, fitness: Sequence[float], count: int, rng: np.random.Generator) -> List:
    """Fitness-proportional selection with replacement, maximizing `fitness`."""
    if len(population) != len(fitness):
        raise AssignmentError(f"{len(population)} individuals but {len(fitness)} fitness values")
    return [population[i] for i in roulette_indices(fitness, count, rng)]
