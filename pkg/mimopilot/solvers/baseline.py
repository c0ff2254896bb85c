import itertools
import time

import numpy as np

from mimopilot.config import DEFAULT_SEED, EXPA_LIMIT, FITNESS_SUM_SE, SE_CAP, SOLVER_EXPA, SOLVER_RPA
from mimopilot.core.encoding import PilotAssignment, random_assignment, search_space_size
from mimopilot.core.errors import InfeasibleSearchError
from mimopilot.core.metrics import fitness_function, objective
from mimopilot.core.topology import FadingTensor
from mimopilot.solvers.result import SolveResult
from mimopilot.util.rng import substream


def solve_rpa(
    beta: FadingTensor, seed: int = DEFAULT_SEED, fitness_mode: str = FITNESS_SUM_SE, se_cap: float = SE_CAP
) -> SolveResult:
    """Random pilot assignment: one uniform canonical assignment, evaluated once."""
    start = time.perf_counter()
    evaluate = fitness_function(beta, fitness_mode, se_cap)
    assignment = random_assignment(beta.L, beta.K, substream(seed, "rpa"))
    value = evaluate(assignment)
    return SolveResult(
        best=assignment,
        best_objective=value,
        history=[value],
        evaluations=1,
        wall_time=time.perf_counter() - start,
        solver_name=SOLVER_RPA,
        seed=seed,
        sum_se=objective(beta, assignment, se_cap),
        fitness_mode=fitness_mode,
        evaluation_trace=[1],
    )


def solve_expa(
    beta: FadingTensor, limit: int = EXPA_LIMIT, fitness_mode: str = FITNESS_SUM_SE, se_cap: float = SE_CAP
) -> SolveResult:
    """
    Exhaustive pilot assignment over every canonical assignment.

    Assignments are visited in lexicographic order and only a strictly better one replaces the incumbent, so ties
    resolve to the lexicographically smallest assignment.

    Raises:
        InfeasibleSearchError: the search space exceeds `limit`
    """
    size = search_space_size(beta.L, beta.K)
    if size > limit:
        raise InfeasibleSearchError(
            f"exhaustive search over {size} assignments exceeds the limit of {limit}", space_size=size, limit=limit
        )
    start = time.perf_counter()
    evaluate = fitness_function(beta, fitness_mode, se_cap)
    rows = np.empty((beta.L, beta.K), dtype=np.int64)
    rows[0] = np.arange(beta.K)
    best_rows = None
    best_value = -np.inf
    evaluations = 0
    for tail in itertools.product(itertools.permutations(range(beta.K)), repeat=beta.L - 1):
        if tail:
            rows[1:] = tail
        value = evaluate(PilotAssignment(rows))
        evaluations += 1
        if best_rows is None or value > best_value:
            best_rows = rows.copy()
            best_value = value
    best = PilotAssignment(best_rows)
    return SolveResult(
        best=best,
        best_objective=float(best_value),
        history=[float(best_value)],
        evaluations=evaluations,
        wall_time=time.perf_counter() - start,
        solver_name=SOLVER_EXPA,
        seed=None,
        sum_se=objective(beta, best, se_cap),
        fitness_mode=fitness_mode,
        evaluation_trace=[evaluations],
    )
