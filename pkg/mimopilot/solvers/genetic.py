"""
Genetic pilot assignment: the traditional GA and the k-means island variants.

All three solvers share one generation loop. The population is split into islands (a single island for the
traditional GA, k-means groups over fitness for the clustered variants, refreshed every `recluster_period`
generations). Each generation copies the `elite_count` best individuals of the whole population once and splits the
remaining slots evenly over the islands; every island breeds its share from its own members on a random stream keyed
by (seed, generation, island), and the islands are merged back in island order.
Because no island sees another island's stream, running them in worker processes changes nothing but wall time.
"""

import concurrent.futures
import time
import warnings
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from mimopilot.config import SE_CAP, SOLVER_GA, SOLVER_PKGA, SOLVER_SKGA, TQDM_DISABLE
from mimopilot.core.encoding import (
    GAConfig,
    PilotAssignment,
    pmx_crossover,
    random_assignment,
    roulette_indices,
    swap_mutation,
)
from mimopilot.core.errors import ConfigError
from mimopilot.core.kmeans import partition_population
from mimopilot.core.metrics import fitness_function, objective
from mimopilot.core.topology import FadingTensor
from mimopilot.solvers.result import SolveResult
from mimopilot.util.rng import substream

IslandTask = Tuple[np.ndarray, np.ndarray, int, int, int]


def solve_ga(
    beta: FadingTensor,
    config: Optional[GAConfig] = None,
    seed: Optional[int] = None,
    se_cap: float = SE_CAP,
    initial_population: Sequence[PilotAssignment] = (),
    verbose: bool = False,
) -> SolveResult:
    """
    Traditional GA: elitism, roulette selection, PMX crossover and swap mutation over the whole population.

    Args:
        beta: fading tensor
        config: hyperparameters; `cluster_count` and `recluster_period` are ignored
        seed: root seed, defaults to `config.seed`
        se_cap: spectral efficiency of an interference-free user
        initial_population: individuals placed first in the initial population, the rest is random
        verbose: show a progress bar over generations
    """
    config = (config or GAConfig()).replace(cluster_count=1)
    return _run(beta, config, seed, se_cap, SOLVER_GA, _evolve_sequentially, initial_population, verbose)


def solve_sk_ga(
    beta: FadingTensor,
    config: Optional[GAConfig] = None,
    seed: Optional[int] = None,
    se_cap: float = SE_CAP,
    initial_population: Sequence[PilotAssignment] = (),
    verbose: bool = False,
) -> SolveResult:
    """
    Sequential k-means GA: islands formed by k-means over fitness evolve one after another.
    """
    config = config or GAConfig()
    return _run(beta, config, seed, se_cap, SOLVER_SKGA, _evolve_sequentially, initial_population, verbose)


def solve_pk_ga(
    beta: FadingTensor,
    config: Optional[GAConfig] = None,
    seed: Optional[int] = None,
    parallelism: int = 1,
    se_cap: float = SE_CAP,
    initial_population: Sequence[PilotAssignment] = (),
    verbose: bool = False,
) -> SolveResult:
    """
    Parallel k-means GA: the islands of every generation evolve concurrently on min(C, parallelism) processes.

    The result is identical to `solve_sk_ga` with the same seed for every value of `parallelism`.
    """
    config = config or GAConfig()
    if parallelism < 1:
        raise ConfigError(f"parallelism must be >= 1, got {parallelism}")
    if parallelism > config.cluster_count:
        warnings.warn(
            f"parallelism={parallelism} exceeds the {config.cluster_count} islands; "
            f"using {config.cluster_count} workers",
            stacklevel=2,
        )
    workers = min(config.cluster_count, parallelism)
    if workers == 1:
        return _run(beta, config, seed, se_cap, SOLVER_PKGA, _evolve_sequentially, initial_population, verbose)

    with concurrent.futures.ProcessPoolExecutor(
        max_workers=workers, initializer=_init_worker, initargs=(beta.beta, config, se_cap)
    ) as executor:

        def _evolve_in_pool(beta, config, seed, se_cap, tasks):
            return list(executor.map(_pool_evolve, [(seed,) + task for task in tasks]))

        return _run(beta, config, seed, se_cap, SOLVER_PKGA, _evolve_in_pool, initial_population, verbose)


def _run(
    beta: FadingTensor,
    config: GAConfig,
    seed: Optional[int],
    se_cap: float,
    solver_name: str,
    evolve: Callable,
    initial_population: Sequence[PilotAssignment],
    verbose: bool,
) -> SolveResult:
    start = time.perf_counter()
    seed = config.seed if seed is None else seed
    N = config.population_size
    E = config.elite_count
    evaluate = fitness_function(beta, config.fitness_mode, se_cap)

    population = []
    for individual in list(initial_population)[:N]:
        if (individual.L, individual.K) != (beta.L, beta.K):
            raise ConfigError(f"initial individual {individual.rows.shape} does not match L={beta.L}, K={beta.K}")
        population.append(individual.canonical())
    init_rng = substream(seed, "ga", "init")
    while len(population) < N:
        population.append(random_assignment(beta.L, beta.K, init_rng))
    fitness = np.array([evaluate(x) for x in population])
    evaluations = N
    history = [float(fitness.max())]
    trace = [evaluations]
    islands = [np.arange(N)]
    local_optima: List[float] = []

    for t in tqdm(range(config.generations), disable=bool(TQDM_DISABLE) or not verbose, desc=solver_name):
        if config.cluster_count > 1 and t % config.recluster_period == 0:
            islands = partition_population(
                population, fitness, config.cluster_count, substream(seed, "ga", "recluster", t)
            )
        elites = np.argsort(-fitness, kind="stable")[:E]
        quotas = island_quotas(N - E, len(islands))
        tasks = [
            (np.stack([population[i].rows for i in island]), fitness[island], quota, t, c)
            for c, (island, quota) in enumerate(zip(islands, quotas))
        ]
        results = evolve(beta, config, seed, se_cap, tasks)

        # elites join the last island, which holds the fittest cluster
        next_population, merged, islands, offset = [], [], [], 0
        for c, (rows, island_fitness) in enumerate(results):
            if c == len(results) - 1:
                rows = np.concatenate([rows, np.stack([population[i].rows for i in elites])])
                island_fitness = np.concatenate([island_fitness, fitness[elites]])
            next_population.extend(PilotAssignment(r) for r in rows)
            merged.append(island_fitness)
            islands.append(np.arange(offset, offset + len(rows)))
            offset += len(rows)
        population = next_population
        fitness = np.concatenate(merged)
        evaluations += N
        local_optima = [float(f.max()) for f in merged]
        history.append(float(fitness.max()))
        trace.append(evaluations)

    best = population[int(np.argmax(fitness))]
    return SolveResult(
        best=best,
        best_objective=history[-1],
        history=history,
        evaluations=evaluations,
        wall_time=time.perf_counter() - start,
        solver_name=solver_name,
        seed=seed,
        sum_se=objective(beta, best, se_cap),
        fitness_mode=config.fitness_mode,
        evaluation_trace=trace,
        local_optima=local_optima if config.cluster_count > 1 else [],
    )


def island_quotas(offspring: int, C: int) -> List[int]:
    """Split `offspring` slots over C islands as evenly as possible; the fitter (later) islands take the remainder."""
    base, extra = divmod(offspring, C)
    return [base + (1 if c >= C - extra else 0) for c in range(C)]


def _evolve_sequentially(beta, config, seed, se_cap, tasks: List[IslandTask]):
    return [evolve_island(beta, config, seed, se_cap, *task) for task in tasks]


def evolve_island(
    beta: FadingTensor,
    config: GAConfig,
    seed: int,
    se_cap: float,
    rows: np.ndarray,
    fitness: np.ndarray,
    quota: int,
    generation: int,
    island: int,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Breed `quota` children of one island: roulette-selected parents of the island, PMX crossover, swap mutation.

    Returns:
        rows and fitness of the children
    """
    rng = substream(seed, "ga", "generation", generation, "island", island)
    evaluate = fitness_function(beta, config.fitness_mode, se_cap)
    members = [PilotAssignment(r) for r in rows]

    offspring: List[PilotAssignment] = []
    while len(offspring) < quota:
        i, k = roulette_indices(fitness, 2, rng)
        for child in pmx_crossover(members[i], members[k], config.crossover_prob, rng):
            if len(offspring) < quota:
                offspring.append(swap_mutation(child, config.mutation_prob, rng))

    children = np.stack([x.rows for x in offspring]) if offspring else np.empty((0,) + rows.shape[1:], dtype=np.int64)
    return children, np.array([evaluate(x) for x in offspring], dtype=float)


_WORKER: dict = {}


def _init_worker(beta_array, config, se_cap):
    _WORKER["beta"] = FadingTensor(beta_array)
    _WORKER["config"] = config
    _WORKER["se_cap"] = se_cap


def _pool_evolve(task):
    seed, rows, fitness, quota, generation, island = task
    return evolve_island(
        _WORKER["beta"], _WORKER["config"], seed, _WORKER["se_cap"], rows, fitness, quota, generation, island
    )
