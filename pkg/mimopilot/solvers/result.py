import math
from dataclasses import dataclass, field
from typing import List, Optional

from mimopilot.core.encoding import PilotAssignment


@dataclass(frozen=True)
class SolveResult:
    """
    Outcome of one solver run.

    Attributes:
        best: best assignment found.
        best_objective: fitness of `best` under `fitness_mode`; equals the last history entry.
        history: best fitness in the population after initialisation and after every generation.
        evaluations: total number of fitness evaluations.
        wall_time: seconds spent in the solver.
        solver_name: registry name of the solver.
        seed: root seed of the run.
        sum_se: system sum-rate of `best`, whatever fitness was optimised.
        fitness_mode: fitness the solver maximised.
        evaluation_trace: cumulative evaluations spent when each history entry was recorded.
        local_optima: best fitness of every island in the final generation (island solvers only).
    """

    best: PilotAssignment
    best_objective: float
    history: List[float]
    evaluations: int
    wall_time: float
    solver_name: str
    seed: Optional[int]
    sum_se: float
    fitness_mode: str
    evaluation_trace: List[int] = field(default_factory=list)
    local_optima: List[float] = field(default_factory=list)

    def evaluations_to_target(self, tolerance: float = 0.01) -> int:
        """Evaluations spent until the history first comes within `tolerance` * |final best| of the final best."""
        final = self.history[-1]
        target = final - tolerance * abs(final)
        trace = self.evaluation_trace or [self.evaluations] * len(self.history)
        for value, spent in zip(self.history, trace):
            if value >= target:
                return spent
        return self.evaluations

    def same_outcome(self, other: "SolveResult") -> bool:
        """Equality of everything except wall time and solver name."""
        return (
            self.best == other.best
            and _same(self.best_objective, other.best_objective)
            and len(self.history) == len(other.history)
            and all(_same(a, b) for a, b in zip(self.history, other.history))
            and self.evaluations == other.evaluations
            and self.evaluation_trace == other.evaluation_trace
        )

    def to_dict(self) -> dict:
        return {
            "solver_name": self.solver_name,
            "seed": self.seed,
            "fitness_mode": self.fitness_mode,
            "best": self.best.rows.tolist(),
            "best_objective": self.best_objective,
            "sum_se": self.sum_se,
            "history": list(self.history),
            "evaluation_trace": list(self.evaluation_trace),
            "local_optima": list(self.local_optima),
            "evaluations": self.evaluations,
            "wall_time": self.wall_time,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SolveResult":
        return cls(
            best=PilotAssignment(data["best"]),
            best_objective=float(data["best_objective"]),
            history=[float(v) for v in data["history"]],
            evaluations=int(data["evaluations"]),
            wall_time=float(data["wall_time"]),
            solver_name=data["solver_name"],
            seed=data.get("seed"),
            sum_se=float(data["sum_se"]),
            fitness_mode=data["fitness_mode"],
            evaluation_trace=[int(v) for v in data.get("evaluation_trace", [])],
            local_optima=[float(v) for v in data.get("local_optima", [])],
        )


def _same(a: float, b: float) -> bool:
    return a == b or (math.isnan(a) and math.isnan(b))
