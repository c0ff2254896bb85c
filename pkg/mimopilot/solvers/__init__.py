from typing import Optional

from mimopilot.config import EXPA_LIMIT, SE_CAP, SOLVER_EXPA, SOLVER_GA, SOLVER_PKGA, SOLVER_RPA, SOLVER_SKGA
from mimopilot.core.encoding import GAConfig
from mimopilot.core.errors import ConfigError
from mimopilot.core.topology import FadingTensor
from mimopilot.solvers.baseline import solve_expa, solve_rpa
from mimopilot.solvers.genetic import solve_ga, solve_pk_ga, solve_sk_ga
from mimopilot.solvers.result import SolveResult

SOLVER_NAMES = (SOLVER_RPA, SOLVER_EXPA, SOLVER_GA, SOLVER_SKGA, SOLVER_PKGA)

# display names used in reports
SOLVER_LABELS = {
    SOLVER_RPA: "Random Pilot Assignment",
    SOLVER_EXPA: "Exhaustive Pilot Assignment",
    SOLVER_GA: "Traditional GA",
    SOLVER_SKGA: "SK-means GA",
    SOLVER_PKGA: "PK-means GA",
}


def run_solver(
    name: str,
    beta: FadingTensor,
    config: Optional[GAConfig] = None,
    seed: Optional[int] = None,
    parallelism: int = 1,
    expa_limit: int = EXPA_LIMIT,
    se_cap: float = SE_CAP,
    verbose: bool = False,
) -> SolveResult:
    """
    Run a solver by registry name.

    Args:
        name (str): one of "rpa", "expa", "ga", "skga", "pkga"
        beta: fading tensor
        config: GA hyperparameters; only `fitness_mode` and `seed` apply to "rpa" and "expa"
        seed: root seed, defaults to `config.seed`
        parallelism: worker processes for "pkga"
        expa_limit: largest search space "expa" will enumerate
        se_cap: spectral efficiency of an interference-free user

    Returns:
        SolveResult
    """
    config = config or GAConfig()
    seed = config.seed if seed is None else seed
    if name == SOLVER_RPA:
        return solve_rpa(beta, seed, config.fitness_mode, se_cap)
    if name == SOLVER_EXPA:
        return solve_expa(beta, expa_limit, config.fitness_mode, se_cap)
    if name == SOLVER_GA:
        return solve_ga(beta, config, seed, se_cap, verbose=verbose)
    if name == SOLVER_SKGA:
        return solve_sk_ga(beta, config, seed, se_cap, verbose=verbose)
    if name == SOLVER_PKGA:
        return solve_pk_ga(beta, config, seed, parallelism, se_cap, verbose=verbose)
    raise ConfigError(f"unknown solver {name!r}, expected one of {SOLVER_NAMES}")
