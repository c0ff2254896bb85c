import math
from typing import Callable, List, Mapping, Optional, Sequence, Union

import numpy as np

from mimopilot.config import FITNESS_INTERFERENCE, FITNESS_MAX_MIN, FITNESS_MODES, FITNESS_SUM_SE, SE_CAP
from mimopilot.core.encoding import PilotAssignment
from mimopilot.core.errors import AssignmentError, ClusteringError, ConfigError
from mimopilot.core.kmeans import kmeans
from mimopilot.core.topology import FadingTensor, UserDrop, complex_gaussian

INFINITE = math.inf


class UserClustering:
    """
    Users grouped into C clusters: `labels[j, k]` is the cluster of user k of cell j, in 0..C-1.
    """

    def __init__(self, labels, C: Optional[int] = None):
        labels = np.array(labels, dtype=np.int64)
        if labels.ndim != 2:
            raise ClusteringError(f"labels must be an L x K matrix, got shape {labels.shape}")
        self.C = int(labels.max()) + 1 if C is None else int(C)
        if labels.min() < 0 or labels.max() >= self.C:
            raise ClusteringError(f"cluster ids must lie in 0..{self.C - 1}")
        labels.flags.writeable = False
        self.labels = labels

    def members(self, c: int):
        """(cells, users) index arrays of the users in cluster c."""
        return np.nonzero(self.labels == c)

    def sizes(self) -> np.ndarray:
        return np.bincount(self.labels.ravel(), minlength=self.C)


class SeReport:
    """
    Per-user uplink spectral efficiency: `per_user_se[j, u]` for user u of cell j, in bits/s/Hz.
    """

    def __init__(self, per_user_se, assignment: PilotAssignment):
        self.per_user_se = np.array(per_user_se, dtype=float)
        self.per_user_se.flags.writeable = False
        self.assignment = assignment
        self.sum_se = float(self.per_user_se.sum())

    @property
    def min_se(self) -> float:
        return float(self.per_user_se.min())

    @property
    def mean_se(self) -> float:
        return float(self.per_user_se.mean())

    def rows(self):
        """(cell, pilot, user, se) tuples ordered by cell then pilot."""
        users = self.assignment.users_by_pilot()
        for j in range(users.shape[0]):
            for p in range(users.shape[1]):
                u = int(users[j, p])
                yield j, p, u, float(self.per_user_se[j, u])


def _check(beta: FadingTensor, assignment: PilotAssignment):
    if (assignment.L, assignment.K) != (beta.L, beta.K):
        raise AssignmentError(
            f"assignment is {assignment.L}x{assignment.K} but the fading tensor has L={beta.L}, K={beta.K}"
        )


def _check_index(beta: FadingTensor, cell: int, pilot: int):
    if not (0 <= cell < beta.L and 0 <= pilot < beta.K):
        raise AssignmentError(f"cell {cell} / pilot {pilot} out of range for L={beta.L}, K={beta.K}")


def co_pilot_gains(beta: FadingTensor, assignment: PilotAssignment) -> np.ndarray:
    """gains[i, j, p] = beta at BS i from the user of cell j that holds pilot p."""
    _check(beta, assignment)
    users = assignment.users_by_pilot()
    return beta.beta[:, np.arange(beta.L)[:, None], users]


def _sinr_matrix(beta: FadingTensor, assignment: PilotAssignment) -> np.ndarray:
    gains = co_pilot_gains(beta, assignment) ** 2
    L = beta.L
    own = gains[np.arange(L), np.arange(L), :]
    interference = np.where(~np.eye(L, dtype=bool)[:, :, None], gains, 0.0).sum(axis=1)
    with np.errstate(divide="ignore"):
        return np.where(interference > 0, own / np.where(interference > 0, interference, 1.0), INFINITE)


def asymptotic_sinr(beta: FadingTensor, assignment: PilotAssignment, cell: int, pilot: int) -> float:
    """
    Large-antenna limit of the uplink SINR of the user of `cell` holding `pilot`.

    Returns:
        beta_own^2 / sum of co-pilot beta^2 from the other cells, or INFINITE when there are no interferers.
    """
    _check(beta, assignment)
    _check_index(beta, cell, pilot)
    users = assignment.users_by_pilot()
    own = beta.beta[cell, cell, users[cell, pilot]] ** 2
    interference = sum(beta.beta[cell, j, users[j, pilot]] ** 2 for j in range(beta.L) if j != cell)
    if interference == 0:
        return INFINITE
    return float(own / interference)


def se_from_sinr(sinr, se_cap: float = SE_CAP):
    sinr = np.asarray(sinr, dtype=float)
    se = np.log2(1.0 + np.where(np.isinf(sinr), 0.0, sinr))
    se = np.where(np.isinf(sinr), se_cap, se)
    return float(se) if se.ndim == 0 else se


def user_se(beta: FadingTensor, assignment: PilotAssignment, cell: int, pilot: int, se_cap: float = SE_CAP) -> float:
    """log2(1 + SINR); an interference-free user gets `se_cap`."""
    return se_from_sinr(asymptotic_sinr(beta, assignment, cell, pilot), se_cap)


def sum_se(beta: FadingTensor, assignment: PilotAssignment, se_cap: float = SE_CAP) -> SeReport:
    sinr = _sinr_matrix(beta, assignment)
    se_by_pilot = se_from_sinr(sinr, se_cap)
    # reorder from (cell, pilot) to (cell, user)
    per_user = np.take_along_axis(se_by_pilot, assignment.rows, axis=1)
    return SeReport(per_user, assignment)


def objective(beta: FadingTensor, assignment: PilotAssignment, se_cap: float = SE_CAP) -> float:
    """System sum-rate, the quantity every solver maximizes by default."""
    return float(se_from_sinr(_sinr_matrix(beta, assignment), se_cap).sum())


def min_user_se(beta: FadingTensor, assignment: PilotAssignment, se_cap: float = SE_CAP) -> float:
    return float(se_from_sinr(_sinr_matrix(beta, assignment), se_cap).min())


def finite_m_sinr(
    beta: FadingTensor,
    assignment: PilotAssignment,
    cell: int,
    pilot: int,
    M: int,
    noise_power: float,
    trials: int,
    rng: np.random.Generator,
) -> float:
    """
    Monte-Carlo estimate of the finite-antenna uplink SINR.

    Each trial draws fresh channels h = g * sqrt(beta) and evaluates
    |h_s^H h_s|^2 / (sum over co-pilot interferers |h_l^H h_l|^2 + noise_power * M^2); the mean over trials tends to
    the asymptotic SINR as M grows.

    Raises:
        AssignmentError: invalid cell or pilot index
        ConfigError: M or trials below 1
    """
    _check(beta, assignment)
    _check_index(beta, cell, pilot)
    if M < 1 or trials < 1:
        raise ConfigError(f"M and trials must be >= 1, got M={M}, trials={trials}")
    users = assignment.users_by_pilot()
    gains = beta.beta[cell, np.arange(beta.L), users[:, pilot]]
    interferers = np.arange(beta.L) != cell
    if not interferers.any() and noise_power == 0:
        return INFINITE

    g = complex_gaussian(rng, (trials, beta.L, M))
    power = (gains[None, :] * np.sum(np.abs(g) ** 2, axis=2)) ** 2
    denominator = power[:, interferers].sum(axis=1) + noise_power * float(M) ** 2
    return float(np.mean(power[:, cell] / denominator))


def cluster_interference(
    beta: FadingTensor, clustering: UserClustering, serving: Union[Sequence[int], Mapping[int, int]]
) -> float:
    """
    Inter-cluster interference of a user clustering.

    For every unordered cluster pair (c, c') served by base stations i and j, adds the cross-to-own ratio of mean
    beta at i (cluster c' over cluster c) and at j (cluster c over cluster c').

    Args:
        beta: fading tensor
        clustering: users grouped into C clusters
        serving: serving base station of each cluster

    Raises:
        ClusteringError: empty cluster, missing serving station or zero own-signal average
    """
    if clustering.labels.shape != (beta.L, beta.K):
        raise ClusteringError(f"clustering shape {clustering.labels.shape} does not match L={beta.L}, K={beta.K}")
    try:
        serving = [int(serving[c]) for c in range(clustering.C)]
    except (KeyError, IndexError):
        raise ClusteringError(f"every one of the {clustering.C} clusters needs a serving station") from None
    if any(not 0 <= s < beta.L for s in serving):
        raise ClusteringError(f"serving stations must lie in 0..{beta.L - 1}")
    if (clustering.sizes() == 0).any():
        raise ClusteringError("every cluster must contain at least one user")

    # mean_beta[c, i]: average beta at BS i over the users of cluster c
    mean_beta = np.empty((clustering.C, beta.L))
    for c in range(clustering.C):
        cells, users = clustering.members(c)
        mean_beta[c] = beta.beta[:, cells, users].mean(axis=1)

    total = 0.0
    for c in range(clustering.C):
        i = serving[c]
        for c2 in range(c + 1, clustering.C):
            j = serving[c2]
            if mean_beta[c, i] == 0 or mean_beta[c2, j] == 0:
                raise ClusteringError("own-signal average is zero")
            total += abs(mean_beta[c2, i] / mean_beta[c, i]) + abs(mean_beta[c, j] / mean_beta[c2, j])
    return float(total)


def pilot_clusters(beta: FadingTensor, assignment: PilotAssignment, pilot: int):
    """
    The co-pilot users of one pilot as a one-user-per-cell problem.

    Returns:
        (FadingTensor of shape L x L x 1, UserClustering with cell j's user in cluster j, serving stations 0..L-1)
    """
    gains = co_pilot_gains(beta, assignment)[:, :, pilot]
    clustering = UserClustering(np.arange(beta.L)[:, None], beta.L)
    return FadingTensor(gains[:, :, None]), clustering, list(range(beta.L))


def assignment_interference(beta: FadingTensor, assignment: PilotAssignment) -> float:
    """
    Inter-cluster interference of a pilot assignment.

    Each pilot groups its L co-pilot users into singleton clusters served by their own cells; the result is the sum
    over pilots of `cluster_interference` on those clusters.
    """
    gains = co_pilot_gains(beta, assignment)
    L = beta.L
    own = gains[np.arange(L), np.arange(L), :]
    ratios = gains / own[:, None, :]
    return float(np.where(~np.eye(L, dtype=bool)[:, :, None], ratios, 0.0).sum())


def fitness_function(beta: FadingTensor, mode: str = FITNESS_SUM_SE, se_cap: float = SE_CAP) -> Callable:
    """
    Fitness to maximize for a given mode: sum-rate, negated inter-cluster interference or minimum user SE.
    """
    if mode == FITNESS_SUM_SE:
        return lambda assignment: objective(beta, assignment, se_cap)
    if mode == FITNESS_INTERFERENCE:
        return lambda assignment: -assignment_interference(beta, assignment)
    if mode == FITNESS_MAX_MIN:
        return lambda assignment: min_user_se(beta, assignment, se_cap)
    raise ConfigError(f"fitness mode must be one of {FITNESS_MODES}, got {mode!r}")


def spatial_clustering(drop: UserDrop, C: int, rng: np.random.Generator) -> UserClustering:
    """Group users by position with k-means on their planar coordinates."""
    model = kmeans(drop.positions.reshape(-1, 2), C, rng=rng)
    return UserClustering(model.labels.reshape(drop.L, drop.K), C)


def nearest_serving(beta: FadingTensor, clustering: UserClustering) -> List[int]:
    """Serve every cluster from the base station with the largest mean beta over its users."""
    serving = []
    for c in range(clustering.C):
        cells, users = clustering.members(c)
        if len(cells) == 0:
            raise ClusteringError(f"cluster {c} is empty")
        serving.append(int(np.argmax(beta.beta[:, cells, users].mean(axis=1))))
    return serving
