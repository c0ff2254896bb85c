import dataclasses
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from mimopilot.config import (
    DEFAULT_ANTENNAS,
    DEFAULT_CELL_RADIUS,
    DEFAULT_CELLS,
    DEFAULT_MIN_DIST,
    DEFAULT_NOISE_POWER,
    DEFAULT_PATHLOSS_EXPONENT,
    DEFAULT_SEED,
    DEFAULT_SHADOW_SIGMA_DB,
    DEFAULT_USERS,
)
from mimopilot.core.errors import ScenarioError
from mimopilot.util.rng import substream

SQRT3 = math.sqrt(3.0)

LAYOUT_SINGLE = "single"
LAYOUT_SPIRAL = "spiral"
LAYOUT_RECTANGULAR = "rectangular"


@dataclass(frozen=True)
class Scenario:
    """
    Static description of a multi-cell massive MIMO system.

    Attributes:
        L: number of cells.
        K: users per cell, which is also the number of orthogonal pilots per cell.
        M: base station antennas.
        cell_radius: hexagon circumradius in meters.
        alpha: path-loss exponent.
        shadow_sigma_db: log-normal shadowing standard deviation in dB.
        min_dist: minimum distance between a user and its serving base station, in meters.
        noise_power: normalized receiver noise power.
        tau_p: pilot length in symbols (metadata, defaults to K).
        tau_c: coherence interval in symbols (metadata).
        seed: root seed of every random stream of the scenario.
    """

    L: int = DEFAULT_CELLS
    K: int = DEFAULT_USERS
    M: int = DEFAULT_ANTENNAS
    cell_radius: float = DEFAULT_CELL_RADIUS
    alpha: float = DEFAULT_PATHLOSS_EXPONENT
    shadow_sigma_db: float = DEFAULT_SHADOW_SIGMA_DB
    min_dist: float = DEFAULT_MIN_DIST
    noise_power: float = DEFAULT_NOISE_POWER
    tau_p: Optional[int] = None
    tau_c: int = 200
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        if self.tau_p is None:
            object.__setattr__(self, "tau_p", self.K)
        self.validate()

    def validate(self):
        if self.L < 1 or self.K < 1 or self.M < 1:
            raise ScenarioError(f"L, K and M must be >= 1 (got L={self.L}, K={self.K}, M={self.M})")
        if not 0 < self.min_dist < self.cell_radius:
            raise ScenarioError(f"need 0 < min_dist < cell_radius (got {self.min_dist}, {self.cell_radius})")
        if self.alpha <= 0:
            raise ScenarioError(f"alpha must be positive, got {self.alpha}")
        if self.shadow_sigma_db < 0:
            raise ScenarioError(f"shadow_sigma_db must be >= 0, got {self.shadow_sigma_db}")
        if self.noise_power < 0:
            raise ScenarioError(f"noise_power must be >= 0, got {self.noise_power}")
        if self.tau_p < 1 or self.tau_c < 1:
            raise ScenarioError(f"tau_p and tau_c must be >= 1 (got tau_p={self.tau_p}, tau_c={self.tau_c})")
        if self.seed < 0:
            raise ScenarioError(f"seed must be non-negative, got {self.seed}")

    @property
    def inradius(self) -> float:
        return SQRT3 / 2 * self.cell_radius

    def replace(self, **changes) -> "Scenario":
        # keep tau_p tied to K unless it was set explicitly
        if "K" in changes and "tau_p" not in changes and self.tau_p == self.K:
            changes["tau_p"] = None
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "Scenario":
        fields = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - fields
        if unknown:
            raise ScenarioError(f"unknown scenario fields: {sorted(unknown)}")
        return cls(**data)


class CellGrid:
    """
    Hexagonal cell layout: base stations sit at the hexagon centers.
    """

    def __init__(self, centers, cell_radius: float, layout: str):
        self.centers = np.array(centers, dtype=float).reshape(-1, 2)
        self.centers.flags.writeable = False
        self.cell_radius = float(cell_radius)
        self.layout = layout

    @property
    def L(self) -> int:
        return len(self.centers)

    def min_center_distance(self) -> float:
        if self.L < 2:
            return math.inf
        diff = self.centers[:, None, :] - self.centers[None, :, :]
        dist = np.hypot(diff[..., 0], diff[..., 1])
        return float(dist[~np.eye(self.L, dtype=bool)].min())

    def contains(self, cell: int, points) -> np.ndarray:
        """Whether each point lies inside the pointy-top hexagon of `cell` (boundary included)."""
        rel = np.asarray(points, dtype=float) - self.centers[cell]
        return _inside_hexagon(rel, self.cell_radius)

    def __repr__(self):
        return f"CellGrid(L={self.L}, cell_radius={self.cell_radius}, layout={self.layout!r})"


class UserDrop:
    """
    User positions: `positions[j, k]` is the location of user k of cell j, in meters.
    """

    def __init__(self, positions):
        self.positions = np.array(positions, dtype=float)
        if self.positions.ndim != 3 or self.positions.shape[2] != 2:
            raise ScenarioError(f"positions must have shape (L, K, 2), got {self.positions.shape}")
        self.positions.flags.writeable = False

    @property
    def L(self) -> int:
        return self.positions.shape[0]

    @property
    def K(self) -> int:
        return self.positions.shape[1]

    def serving_distances(self, grid: CellGrid) -> np.ndarray:
        rel = self.positions - grid.centers[:, None, :]
        return np.hypot(rel[..., 0], rel[..., 1])

    def validate(self, scenario: Scenario, grid: CellGrid):
        if (self.L, self.K) != (scenario.L, scenario.K) or grid.L != scenario.L:
            raise ScenarioError("drop, grid and scenario disagree on L or K")
        for j in range(self.L):
            if not grid.contains(j, self.positions[j]).all():
                raise ScenarioError(f"a user of cell {j} lies outside its hexagon")
        if (self.serving_distances(grid) < scenario.min_dist).any():
            raise ScenarioError("a user is closer than min_dist to its serving base station")


class FadingTensor:
    """
    Large-scale fading coefficients: `beta[i, j, k]` is the coefficient between base station i and user k of cell j.
    """

    def __init__(self, beta):
        beta = np.array(beta, dtype=float)
        if beta.ndim != 3 or beta.shape[0] != beta.shape[1]:
            raise ScenarioError(f"beta must have shape (L, L, K), got {beta.shape}")
        if not np.isfinite(beta).all() or (beta <= 0).any():
            raise ScenarioError("beta entries must be finite and strictly positive")
        beta.flags.writeable = False
        self.beta = beta

    @property
    def L(self) -> int:
        return self.beta.shape[0]

    @property
    def K(self) -> int:
        return self.beta.shape[2]

    @property
    def shape(self) -> Tuple[int, int, int]:
        return self.beta.shape

    def scaled(self, gamma: float) -> "FadingTensor":
        return FadingTensor(self.beta * gamma)

    def __getitem__(self, index):
        return self.beta[index]

    def __eq__(self, other):
        if not isinstance(other, FadingTensor):
            return NotImplemented
        return np.array_equal(self.beta, other.beta)

    def __repr__(self):
        return f"FadingTensor(L={self.L}, K={self.K})"


class ChannelVector:
    """
    Channel between one user and one base station: `entries` holds M complex values.
    """

    def __init__(self, entries):
        self.entries = np.array(entries, dtype=complex).reshape(-1)
        self.entries.flags.writeable = False

    @property
    def M(self) -> int:
        return len(self.entries)

    def scaled(self, beta: float) -> "ChannelVector":
        """h = g * sqrt(beta)."""
        return ChannelVector(self.entries * math.sqrt(beta))

    def gain(self) -> float:
        """h^H h."""
        return float(np.vdot(self.entries, self.entries).real)


def build_hex_grid(L: int, cell_radius: float = DEFAULT_CELL_RADIUS) -> CellGrid:
    """
    Place L pointy-top hexagon centers.

    Complete hexagonal rings (L = 1, 7, 19, ...) are laid out as a spiral around the origin; any other L fills a
    near-square patch row by row, odd rows shifted by half a cell. Cell 0 is always at the origin.

    Args:
        L (int): number of cells
        cell_radius (float): hexagon circumradius in meters

    Returns:
        CellGrid
    """
    if L < 1:
        raise ScenarioError(f"L must be >= 1, got {L}")
    if L == 1:
        return CellGrid([(0.0, 0.0)], cell_radius, LAYOUT_SINGLE)

    rings = _complete_rings(L)
    if rings is not None:
        axial = _spiral_axial(rings)
        centers = [_axial_to_xy(q, r, cell_radius) for q, r in axial]
        return CellGrid(centers, cell_radius, LAYOUT_SPIRAL)

    cols = math.ceil(math.sqrt(L))
    dx = SQRT3 * cell_radius
    dy = 1.5 * cell_radius
    centers = []
    for n in range(L):
        row, col = divmod(n, cols)
        centers.append((col * dx + (row % 2) * dx / 2, row * dy))
    return CellGrid(centers, cell_radius, LAYOUT_RECTANGULAR)


def drop_users(scenario: Scenario, grid: CellGrid, rng: np.random.Generator) -> UserDrop:
    """
    Drop K users uniformly in every hexagon, rejecting points closer than `min_dist` to the base station.

    Raises:
        ScenarioError: grid does not match the scenario or `min_dist` leaves no room inside the hexagon
    """
    if grid.L != scenario.L:
        raise ScenarioError(f"grid has {grid.L} cells, scenario has {scenario.L}")
    if scenario.min_dist >= scenario.inradius:
        raise ScenarioError(
            f"min_dist={scenario.min_dist} is not below the hexagon inradius {scenario.inradius:.3f}; "
            "placement is impossible"
        )
    positions = np.empty((scenario.L, scenario.K, 2))
    for j in range(scenario.L):
        positions[j] = grid.centers[j] + _sample_hexagon(scenario.K, grid.cell_radius, scenario.min_dist, rng)
    return UserDrop(positions)


def large_scale_fading(
    scenario: Scenario, grid: CellGrid, drop: UserDrop, rng: np.random.Generator
) -> FadingTensor:
    """
    beta[i, j, k] = z_ijk / d_ijk ** alpha with z_ijk = 10 ** (N(0, sigma_db^2) / 10).
    """
    if grid.L != scenario.L or (drop.L, drop.K) != (scenario.L, scenario.K):
        raise ScenarioError("grid, drop and scenario disagree on L or K")
    rel = drop.positions[None, :, :, :] - grid.centers[:, None, None, :]
    distances = np.hypot(rel[..., 0], rel[..., 1])
    return fading_from_distances(distances, scenario.alpha, scenario.shadow_sigma_db, rng)


def fading_from_distances(distances, alpha: float, shadow_sigma_db: float, rng: np.random.Generator) -> FadingTensor:
    distances = np.asarray(distances, dtype=float)
    shadow_db = rng.normal(0.0, shadow_sigma_db, size=distances.shape) if shadow_sigma_db > 0 else 0.0
    z = np.power(10.0, np.asarray(shadow_db) / 10.0)
    return FadingTensor(z / np.power(distances, alpha))


def small_scale_fading(M: int, rng: np.random.Generator) -> ChannelVector:
    """M i.i.d. CN(0, 1) entries."""
    if M < 1:
        raise ScenarioError(f"M must be >= 1, got {M}")
    return ChannelVector(complex_gaussian(rng, (M,)))


def complex_gaussian(rng: np.random.Generator, shape) -> np.ndarray:
    draws = rng.standard_normal(tuple(shape) + (2,))
    return (draws[..., 0] + 1j * draws[..., 1]) / math.sqrt(2.0)


def generate(scenario: Scenario) -> Tuple[CellGrid, UserDrop, FadingTensor]:
    """Build the grid, drop the users and draw the large-scale fading of a scenario from its seed."""
    grid = build_hex_grid(scenario.L, scenario.cell_radius)
    drop = drop_users(scenario, grid, substream(scenario.seed, "drop"))
    beta = large_scale_fading(scenario, grid, drop, substream(scenario.seed, "shadowing"))
    return grid, drop, beta


def _inside_hexagon(rel, radius: float) -> np.ndarray:
    x = np.abs(rel[..., 0])
    y = np.abs(rel[..., 1])
    eps = 1e-9 * radius
    return (x <= SQRT3 / 2 * radius + eps) & (y <= radius - x / SQRT3 + eps)


def _sample_hexagon(count: int, radius: float, min_dist: float, rng: np.random.Generator) -> np.ndarray:
    half_width = SQRT3 / 2 * radius
    accepted = np.empty((0, 2))
    while len(accepted) < count:
        batch = max(2 * (count - len(accepted)), 16)
        points = np.column_stack(
            (rng.uniform(-half_width, half_width, batch), rng.uniform(-radius, radius, batch))
        )
        keep = _inside_hexagon(points, radius) & (np.hypot(points[:, 0], points[:, 1]) >= min_dist)
        accepted = np.vstack((accepted, points[keep]))
    return accepted[:count]


def _complete_rings(L: int) -> Optional[int]:
    rings = 0
    while 1 + 3 * rings * (rings + 1) < L:
        rings += 1
    return rings if 1 + 3 * rings * (rings + 1) == L else None


# axial directions of a pointy-top hex lattice, walked counter-clockwise
_DIRECTIONS = [(1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1)]


def _spiral_axial(rings: int):
    cells = [(0, 0)]
    for ring in range(1, rings + 1):
        q, r = _DIRECTIONS[4][0] * ring, _DIRECTIONS[4][1] * ring
        for side in range(6):
            for _ in range(ring):
                cells.append((q, r))
                q, r = q + _DIRECTIONS[side][0], r + _DIRECTIONS[side][1]
    return cells


def _axial_to_xy(q: int, r: int, radius: float) -> Tuple[float, float]:
    return (SQRT3 * radius * (q + r / 2), 1.5 * radius * r)
