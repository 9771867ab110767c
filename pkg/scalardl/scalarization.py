"""
Weighted-sum scalarization of the agents/coordinator problem and grid-based
Pareto certificates for small (d <= 3) instances.

All objectives are minimized: lower is better everywhere.
"""

import logging
import math
from dataclasses import dataclass
from typing import Literal, Optional, Sequence, Tuple

import numpy as np

from scalardl.core import (
    DimensionError,
    DomainError,
    ObjectiveVector,
    ParamVector,
    ResourceError,
    as_param,
)
from scalardl.objectives import Objective, SumObjective

logger = logging.getLogger(__name__)

MAX_GRID_POINTS = 1_000_000
MAX_GRID_DIM = 3
DEFAULT_TOL = 1e-9
# rows compared against the running front at once
CULL_BLOCK = 512


def alpha_from_lambda(lam: float, n_coord: int) -> float:
    if not (0.0 <= lam < 1.0):
        raise DomainError(f"lambda must satisfy 0 <= lambda < 1, got {lam}")
    if n_coord < 1:
        raise DomainError("n_coord must be >= 1")
    return lam / ((1.0 - lam) * n_coord)


@dataclass(frozen=True)
class ScalarizationConfig:
    lam: float
    m_agents: int
    n_coord: int

    def __post_init__(self):
        if not (0.0 <= self.lam < 1.0):
            raise DomainError(f"lambda must be < 1 and >= 0, got {self.lam}")
        if self.m_agents < 1:
            raise DomainError("m_agents must be >= 1")
        if self.n_coord < 0:
            raise DomainError("n_coord must be >= 0")
        if self.n_coord == 0 and self.lam != 0.0:
            raise DomainError("lambda > 0 needs at least one coordinator objective")

    @property
    def alpha(self) -> float:
        if self.lam == 0.0:
            return 0.0
        return alpha_from_lambda(self.lam, self.n_coord)


class CompositeObjective:
    """
    F_i = C_i + α·Σ_j S_j and F = (1/M)·Σ_i F_i.
    """

    def __init__(
        self,
        agents: Sequence[Objective],
        coordinators: Sequence[Objective],
        lam: float,
    ):
        if len(agents) == 0:
            raise DomainError("at least one agent objective is required")
        self.agents = tuple(agents)
        self.coordinators = tuple(coordinators)
        self.config = ScalarizationConfig(lam, len(self.agents), len(self.coordinators))
        self.coordinator_sum = SumObjective(self.coordinators)
        dims = {o.dim for o in self.agents + self.coordinators if o.dim is not None}
        if len(dims) > 1:
            raise DimensionError(f"objective dimensions disagree: {sorted(dims)}")
        self.dim: Optional[int] = dims.pop() if dims else None

    @property
    def alpha(self) -> float:
        return self.config.alpha

    @property
    def m(self) -> int:
        return self.config.m_agents

    @property
    def n(self) -> int:
        return self.config.n_coord

    def with_lambda(self, lam: float) -> "CompositeObjective":
        return CompositeObjective(self.agents, self.coordinators, lam)

    def F_i(self, i: int, theta: ParamVector) -> float:
        return self.agents[i].value(theta) + self.alpha * self.coordinator_sum.value(theta)

    def grad_F_i(self, i: int, theta: ParamVector) -> np.ndarray:
        g = self.agents[i].grad(theta)
        if self.alpha == 0.0:
            return g
        return g + self.alpha * self.coordinator_sum.grad(theta)

    def F(self, theta: ParamVector) -> float:
        agent_mean = float(np.mean([c.value(theta) for c in self.agents]))
        return agent_mean + self.alpha * self.coordinator_sum.value(theta)

    def F_many(self, thetas: np.ndarray) -> np.ndarray:
        thetas = np.atleast_2d(thetas)
        out = np.mean([c.values(thetas) for c in self.agents], axis=0)
        if self.alpha != 0.0:
            out = out + self.alpha * self.coordinator_sum.values(thetas)
        return out

    def grad_F(self, theta: ParamVector) -> np.ndarray:
        g = np.mean([c.grad(theta) for c in self.agents], axis=0)
        if self.alpha == 0.0:
            return g
        return g + self.alpha * self.coordinator_sum.grad(theta)

    def objective_vector(self, theta: ParamVector) -> ObjectiveVector:
        return ObjectiveVector(
            tuple(c.value(theta) for c in self.agents),
            tuple(s.value(theta) for s in self.coordinators),
        )

    def objective_matrix(self, thetas: np.ndarray) -> np.ndarray:
        """
        (n_points, M + N) matrix of every objective at every point.
        """
        thetas = np.atleast_2d(thetas)
        cols = [o.values(thetas) for o in self.agents + self.coordinators]
        return np.stack(cols, axis=1)

    def smoothness(self) -> Tuple[float, float]:
        """
        (L_C, L_S): worst agent constant and the constant of Σ_j S_j.
        """
        l_c = max(c.smoothness for c in self.agents)
        l_s = self.coordinator_sum.smoothness if self.coordinators else 0.0
        return l_c, l_s

    def __repr__(self):
        return (
            f"CompositeObjective(M={self.m}, N={self.n}, lambda={self.config.lam}, "
            f"alpha={self.alpha:.6g})"
        )


def scalarized_value(comp: CompositeObjective, theta: ParamVector) -> float:
    lam = comp.config.lam
    agent_part = (1.0 - lam) / comp.m * sum(c.value(theta) for c in comp.agents)
    if comp.n == 0:
        return agent_part
    return agent_part + lam / comp.n * sum(s.value(theta) for s in comp.coordinators)


def scalarized_values(comp: CompositeObjective, thetas: np.ndarray) -> np.ndarray:
    lam = comp.config.lam
    thetas = np.atleast_2d(thetas)
    out = (1.0 - lam) / comp.m * np.sum([c.values(thetas) for c in comp.agents], axis=0)
    if comp.n:
        out = out + lam / comp.n * np.sum([s.values(thetas) for s in comp.coordinators], axis=0)
    return out


def dominates(a, b) -> bool:
    """
    a <= b in every objective and a < b in at least one.
    """
    if isinstance(a, ObjectiveVector) and isinstance(b, ObjectiveVector):
        if a.shape != b.shape:
            raise DimensionError(f"objective shapes differ: {a.shape} vs {b.shape}")
        a, b = a.as_array(), b.as_array()
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionError(f"objective shapes differ: {a.shape} vs {b.shape}")
    return bool(np.all(a <= b) and np.any(a < b))


@dataclass(frozen=True)
class GridSpec:
    """
    Axis-aligned uniform grid, `num[k]` points from lower[k] to upper[k].
    """

    lower: Tuple[float, ...]
    upper: Tuple[float, ...]
    num: Tuple[int, ...]

    def __post_init__(self):
        if not (len(self.lower) == len(self.upper) == len(self.num)):
            raise DimensionError("grid lower/upper/num lengths differ")
        if any(n < 1 for n in self.num):
            raise DomainError("every grid axis needs at least one point")
        if any(lo > hi for lo, hi in zip(self.lower, self.upper)):
            raise DomainError("grid lower bound above upper bound")

    @classmethod
    def from_step(cls, lower, upper, step: float) -> "GridSpec":
        lower, upper = tuple(map(float, lower)), tuple(map(float, upper))
        num = tuple(int(round((hi - lo) / step)) + 1 for lo, hi in zip(lower, upper))
        return cls(lower, upper, num)

    @classmethod
    def single(cls, theta) -> "GridSpec":
        theta = tuple(float(v) for v in np.asarray(theta).reshape(-1))
        return cls(theta, theta, tuple(1 for _ in theta))

    @property
    def dim(self) -> int:
        return len(self.num)

    @property
    def size(self) -> int:
        return math.prod(self.num)

    def points(self) -> np.ndarray:
        if self.dim > MAX_GRID_DIM:
            raise ResourceError(f"grid dimension {self.dim} exceeds {MAX_GRID_DIM}")
        if self.size > MAX_GRID_POINTS:
            raise ResourceError(f"grid of {self.size} points exceeds {MAX_GRID_POINTS}")
        axes = [np.linspace(lo, hi, n) for lo, hi, n in zip(self.lower, self.upper, self.num)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.reshape(-1) for m in mesh], axis=1)


@dataclass(frozen=True)
class ParetoVerdict:
    status: Literal["Dominated", "NonDominated", "WeaklyNonDominated"]
    witness: Optional[ParamVector] = None

    def __post_init__(self):
        if (self.witness is not None) != (self.status == "Dominated"):
            raise DomainError("witness must be present exactly when dominated")

    def to_dict(self):
        return {
            "status": self.status,
            "witness": None if self.witness is None else self.witness.tolist(),
        }


def _grid_for(comp: CompositeObjective, grid: GridSpec) -> np.ndarray:
    if comp.dim is not None and comp.dim != grid.dim:
        raise DimensionError(f"grid dimension {grid.dim} vs parameter dimension {comp.dim}")
    return grid.points()


def _dominated_by(front: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """
    Mask of rows of Y dominated by at least one row of `front`.
    """
    hit = np.zeros(Y.shape[0], dtype=bool)
    for start in range(0, front.shape[0], 8 * CULL_BLOCK):
        f = front[None, start : start + 8 * CULL_BLOCK, :]
        no_worse = np.all(f <= Y[:, None, :], axis=2)
        better = np.any(f < Y[:, None, :], axis=2)
        hit |= np.any(no_worse & better, axis=1)
    return hit


def non_dominated_mask(Y: np.ndarray) -> np.ndarray:
    """
    Mask of rows of Y not dominated by any other row.

    Rows are swept in lexicographic order, so every dominator of a row comes
    before it, and each row is only compared with the front found so far.
    """
    Y = np.asarray(Y, dtype=float)
    n = Y.shape[0]
    keep = np.zeros(n, dtype=bool)
    order = np.lexsort(Y.T[::-1])
    front = np.empty((0, Y.shape[1]))
    for start in range(0, n, CULL_BLOCK):
        idx = order[start : start + CULL_BLOCK]
        rows = Y[idx]
        alive = ~_dominated_by(front, rows)
        added = []
        for i, y in zip(idx[alive], rows[alive]):
            if added and _dominated_by(np.asarray(added), y[None, :])[0]:
                continue
            keep[i] = True
            added.append(y)
        if added:
            front = np.vstack([front, added])
    return keep


def brute_force_front(comp: CompositeObjective, grid: GridSpec) -> np.ndarray:
    points = _grid_for(comp, grid)
    Y = comp.objective_matrix(points)
    front = points[non_dominated_mask(Y)]
    logger.debug(f"front: {front.shape[0]} of {points.shape[0]} grid points")
    return front


def _first_witness(points: np.ndarray, Y: np.ndarray, mask: np.ndarray) -> Optional[ParamVector]:
    hits = np.flatnonzero(mask)
    if hits.size == 0:
        return None
    # anything dominating a dominator also dominates θ, so the dominators'
    # own front is on the grid front; lowest grid index among it wins
    on_front = hits[non_dominated_mask(Y[hits])]
    return as_param(points[on_front[0]])


def check_weak_pareto(
    comp: CompositeObjective, theta: ParamVector, grid: GridSpec, tol: float = DEFAULT_TOL
) -> ParetoVerdict:
    """
    Dominated iff some grid point beats θ by more than tol in every objective.
    """
    points = _grid_for(comp, grid)
    y = comp.objective_vector(theta).as_array()
    Y = comp.objective_matrix(points)
    witness = _first_witness(points, Y, np.all(Y < y - tol, axis=1))
    if witness is not None:
        return ParetoVerdict("Dominated", witness)
    return ParetoVerdict("WeaklyNonDominated")


def check_pareto(
    comp: CompositeObjective,
    theta: ParamVector,
    grid: GridSpec,
    tol: float = DEFAULT_TOL,
    radius: Optional[float] = None,
) -> ParetoVerdict:
    """
    Dominated iff some grid point is no worse than θ (up to tol) in every
    objective and better by more than tol in at least one. With `radius`
    only grid points inside the open ball around θ are considered.
    """
    points = _grid_for(comp, grid)
    if radius is not None:
        inside = np.linalg.norm(points - np.asarray(theta), axis=1) < radius
        points = points[inside]
    if points.shape[0] == 0:
        return ParetoVerdict("NonDominated")
    y = comp.objective_vector(theta).as_array()
    Y = comp.objective_matrix(points)
    mask = np.all(Y <= y + tol, axis=1) & np.any(Y < y - tol, axis=1)
    witness = _first_witness(points, Y, mask)
    if witness is not None:
        return ParetoVerdict("Dominated", witness)
    return ParetoVerdict("NonDominated")


def check_local_pareto(
    comp: CompositeObjective,
    theta: ParamVector,
    grid: GridSpec,
    radius: float,
    tol: float = DEFAULT_TOL,
) -> ParetoVerdict:
    return check_pareto(comp, theta, grid, tol, radius=radius)


def grid_argmin(comp: CompositeObjective, grid: GridSpec) -> ParamVector:
    points = _grid_for(comp, grid)
    return as_param(points[int(np.argmin(scalarized_values(comp, points)))])
