from typing import Optional, Tuple

from mimopilot.config import SOLVER_SKGA
from mimopilot.core.encoding import GAConfig, PilotAssignment  # noqa: F401
from mimopilot.core.topology import CellGrid, FadingTensor, Scenario, UserDrop
from mimopilot.core.topology import generate as _generate
from mimopilot.solvers import run_solver
from mimopilot.solvers.result import SolveResult

__version__ = "0.1.0"


def generate(scenario: Optional[Scenario] = None) -> Tuple[CellGrid, UserDrop, FadingTensor]:
    """
    Build the cell grid, drop the users and draw the large-scale fading of a scenario.

    Args:
        scenario: defaults to the reference 16-cell system

    Returns:
        (CellGrid, UserDrop, FadingTensor)
    """
    return _generate(scenario or Scenario())


def solve(
    beta: FadingTensor,
    solver: str = SOLVER_SKGA,
    config: Optional[GAConfig] = None,
    seed: Optional[int] = None,
    parallelism: int = 1,
) -> SolveResult:
    """
    Solve the pilot assignment of a fading tensor.

    Example:
        >>> import mimopilot
        >>> _, _, beta = mimopilot.generate()
        >>> result = mimopilot.solve(beta, "skga", seed=3)
        >>> result.best_objective
    """
    return run_solver(solver, beta, config, seed, parallelism=parallelism)
