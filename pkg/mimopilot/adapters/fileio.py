"""Readers and writers for the on-disk formats of scenarios, fading tensors, assignments and solver output."""

import csv
import io
import json
import os
from typing import Union

import numpy as np

from mimopilot.core.encoding import PilotAssignment
from mimopilot.core.errors import AssignmentError, ScenarioError
from mimopilot.core.metrics import SeReport
from mimopilot.core.topology import FadingTensor, Scenario
from mimopilot.solvers.result import SolveResult

PathLike = Union[str, "os.PathLike[str]"]


def _ensure_parent(path: PathLike):
    parent = os.path.dirname(os.fspath(path))
    if parent and not os.path.exists(parent):
        os.makedirs(parent)


def write_scenario_json(scenario: Scenario, path: PathLike):
    _ensure_parent(path)
    with open(path, "w") as f:
        json.dump(scenario.to_dict(), f, indent=2)


def read_scenario_json(path: PathLike) -> Scenario:
    with open(path) as f:
        return Scenario.from_dict(json.load(f))


def fading_to_csv(beta: FadingTensor) -> str:
    """First line `L,K`, then one `i,j,k,beta` row per coefficient at full precision."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow([beta.L, beta.K])
    for (i, j, k), value in np.ndenumerate(beta.beta):
        writer.writerow([i, j, k, repr(float(value))])
    return out.getvalue()


def fading_from_csv(text: str) -> FadingTensor:
    reader = csv.reader(io.StringIO(text))
    try:
        L, K = (int(v) for v in next(reader))
    except (StopIteration, ValueError):
        raise ScenarioError("fading file must start with an `L,K` line") from None
    if L < 1 or K < 1:
        raise ScenarioError(f"fading file needs L, K >= 1, got L={L}, K={K}")
    beta = np.full((L, L, K), np.nan)
    for line, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != 4:
            raise ScenarioError(f"line {line}: expected `i,j,k,beta`, got {len(row)} fields")
        try:
            i, j, k = (int(v) for v in row[:3])
            value = float(row[3])
        except ValueError:
            raise ScenarioError(f"line {line}: cannot parse {row}") from None
        if not (0 <= i < L and 0 <= j < L and 0 <= k < K):
            raise ScenarioError(f"line {line}: index ({i}, {j}, {k}) outside L={L}, K={K}")
        if not np.isnan(beta[i, j, k]):
            raise ScenarioError(f"line {line}: coefficient ({i}, {j}, {k}) defined twice")
        beta[i, j, k] = value
    if np.isnan(beta).any():
        raise ScenarioError(f"fading file does not define all {L * L * K} coefficients")
    return FadingTensor(beta)


def write_fading_csv(beta: FadingTensor, path: PathLike):
    _ensure_parent(path)
    with open(path, "w") as f:
        f.write(fading_to_csv(beta))


def read_fading_csv(path: PathLike) -> FadingTensor:
    with open(path) as f:
        return fading_from_csv(f.read())


def assignment_to_csv(assignment: PilotAssignment) -> str:
    """One line per cell with its comma-separated pilot indices."""
    return "".join(",".join(str(int(p)) for p in row) + "\n" for row in assignment.rows)


def assignment_from_csv(text: str) -> PilotAssignment:
    try:
        rows = [[int(v) for v in line] for line in csv.reader(io.StringIO(text)) if line]
    except ValueError as e:
        raise AssignmentError(f"assignment cells must be integers: {e}") from None
    if len({len(r) for r in rows}) > 1:
        raise AssignmentError("assignment rows differ in length")
    return PilotAssignment(rows, canonical=False)


def write_assignment_csv(assignment: PilotAssignment, path: PathLike):
    _ensure_parent(path)
    with open(path, "w") as f:
        f.write(assignment_to_csv(assignment))


def read_assignment_csv(path: PathLike) -> PilotAssignment:
    with open(path) as f:
        return assignment_from_csv(f.read())


def se_report_to_csv(report: SeReport) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["cell", "pilot", "user", "se"])
    for cell, pilot, user, se in report.rows():
        writer.writerow([cell, pilot, user, repr(se)])
    writer.writerow(["sum", "", "", repr(report.sum_se)])
    return out.getvalue()


def write_se_report_csv(report: SeReport, path: PathLike):
    _ensure_parent(path)
    with open(path, "w") as f:
        f.write(se_report_to_csv(report))


def history_to_csv(result: SolveResult) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["generation", "best_objective"])
    for generation, value in enumerate(result.history):
        writer.writerow([generation, repr(float(value))])
    return out.getvalue()


def write_history_csv(result: SolveResult, path: PathLike):
    _ensure_parent(path)
    with open(path, "w") as f:
        f.write(history_to_csv(result))


def write_solve_result_json(result: SolveResult, path: PathLike):
    _ensure_parent(path)
    with open(path, "w") as f:
        json.dump(result.to_dict(), f, indent=2)


def read_solve_result_json(path: PathLike) -> SolveResult:
    with open(path) as f:
        return SolveResult.from_dict(json.load(f))
