"""
Differentiable objectives for agents (C_i) and the coordinator (S_j).

Each objective knows its value, exact gradient and a Lipschitz constant for
its gradient. Stochastic gradients are the exact gradient plus zero-mean
noise of known total variance, or a minibatch estimate for SoftmaxCE.
"""

import logging
from dataclasses import dataclass, field
from typing import Literal, Optional, Sequence

import numpy as np
from scipy.special import logsumexp, softmax

from scalardl.core import (
    DimensionError,
    DomainError,
    NumericError,
    ParamVector,
    as_generator,
    as_param,
)

logger = logging.getLogger(__name__)

NUM_CLASSES = 10


@dataclass(frozen=True)
class NoiseModel:
    sigma_c: float = 0.0
    sigma_s: float = 0.0
    distribution: Literal["gaussian", "zero"] = "gaussian"
    # minibatch size for data-backed agent objectives; None means full batch
    batch_size: Optional[int] = None

    def __post_init__(self):
        if self.sigma_c < 0 or self.sigma_s < 0:
            raise DomainError("noise standard deviations must be >= 0")
        if self.distribution not in ("gaussian", "zero"):
            raise DomainError(f"unknown noise distribution {self.distribution}")
        if self.batch_size is not None and self.batch_size < 1:
            raise DomainError("batch_size must be >= 1")

    @property
    def silent(self) -> bool:
        return self.distribution == "zero" or (self.sigma_c == 0 and self.sigma_s == 0)


@dataclass(frozen=True)
class DatasetHandle:
    features: np.ndarray
    labels: np.ndarray
    n_classes: int = NUM_CLASSES
    split: Literal["train", "val", "test"] = "train"
    name: str = field(default="", compare=False)

    def __post_init__(self):
        features = np.asarray(self.features, dtype=np.float64)
        labels = np.asarray(self.labels, dtype=np.int64).reshape(-1)
        if features.ndim != 2 or features.shape[0] == 0:
            raise DomainError("dataset needs a non-empty n x p feature matrix")
        if labels.shape[0] != features.shape[0]:
            raise DimensionError(
                f"{features.shape[0]} feature rows but {labels.shape[0]} labels"
            )
        if labels.min() < 0 or labels.max() >= self.n_classes:
            raise DomainError(f"labels must lie in [0, {self.n_classes})")
        if not np.all(np.isfinite(features)):
            raise NumericError("non-finite feature row")
        features.flags.writeable = False
        labels.flags.writeable = False
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def p(self) -> int:
        return self.features.shape[1]

    def subset(self, idx: np.ndarray, split: str) -> "DatasetHandle":
        return DatasetHandle(
            self.features[idx], self.labels[idx], self.n_classes, split, self.name
        )


class Objective:
    """
    Base class. `dim` is None for objectives that accept any dimension.
    """

    kind = "objective"
    dim: Optional[int] = None

    def _check(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=np.float64)
        if self.dim is not None and theta.shape[-1] != self.dim:
            raise DimensionError(
                f"{self.kind}: expected dimension {self.dim}, got {theta.shape[-1]}"
            )
        return theta

    def value(self, theta: ParamVector) -> float:
        raise NotImplementedError

    def grad(self, theta: ParamVector) -> ParamVector:
        raise NotImplementedError

    @property
    def smoothness(self) -> float:
        raise NotImplementedError

    def values(self, thetas: np.ndarray) -> np.ndarray:
        thetas = np.atleast_2d(np.asarray(thetas, dtype=np.float64))
        return np.array([self.value(t) for t in thetas])

    def minibatch_grad(self, theta: ParamVector, batch_size: int, gen) -> ParamVector:
        return self.grad(theta)


class Quadratic(Objective):
    """
    ½·a·‖θ − c‖²
    """

    kind = "quadratic"

    def __init__(self, center, curvature: float = 1.0):
        if curvature <= 0:
            raise DomainError("quadratic curvature must be > 0")
        self.center = as_param(center)
        self.curvature = float(curvature)
        self.dim = self.center.shape[0]

    def value(self, theta):
        diff = self._check(theta) - self.center
        return 0.5 * self.curvature * float(np.dot(diff, diff))

    def values(self, thetas):
        diff = self._check(np.atleast_2d(thetas)) - self.center
        return 0.5 * self.curvature * np.einsum("ij,ij->i", diff, diff)

    def grad(self, theta):
        return self.curvature * (self._check(theta) - self.center)

    @property
    def smoothness(self):
        return self.curvature

    def __repr__(self):
        return f"Quadratic(center={self.center.tolist()}, curvature={self.curvature})"


class ScaledSqNorm(Objective):
    """
    s·‖θ‖², the coordinator criterion used in the MNIST experiments.
    """

    kind = "scaled_sq_norm"

    def __init__(self, scale: float, dim: Optional[int] = None):
        if scale < 0:
            raise DomainError("scale must be >= 0")
        self.scale = float(scale)
        self.dim = dim

    def value(self, theta):
        theta = self._check(theta)
        return self.scale * float(np.dot(theta, theta))

    def values(self, thetas):
        thetas = self._check(np.atleast_2d(thetas))
        return self.scale * np.einsum("ij,ij->i", thetas, thetas)

    def grad(self, theta):
        return 2.0 * self.scale * self._check(theta)

    @property
    def smoothness(self):
        return 2.0 * self.scale

    def __repr__(self):
        return f"ScaledSqNorm(scale={self.scale})"


class SoftmaxCE(Objective):
    """
    Multinomial logistic loss over a dataset, plus (l2/2)·‖θ‖².
    θ is the row-major flattening of a (p, K) weight matrix.
    """

    kind = "softmax_ce"

    def __init__(self, dataset: DatasetHandle, l2: float = 0.0):
        if l2 < 0:
            raise DomainError("l2 must be >= 0")
        self.dataset = dataset
        self.l2 = float(l2)
        self.n_classes = dataset.n_classes
        self.dim = dataset.p * dataset.n_classes
        self._row_norm_sq = float(np.max(np.einsum("ij,ij->i", dataset.features, dataset.features)))

    def weights(self, theta) -> np.ndarray:
        return self._check(theta).reshape(self.dataset.p, self.n_classes)

    def logits(self, theta, features: Optional[np.ndarray] = None) -> np.ndarray:
        features = self.dataset.features if features is None else features
        return features @ self.weights(theta)

    def predict(self, theta, features: Optional[np.ndarray] = None) -> np.ndarray:
        # np.argmax returns the first maximum: ties go to the lowest class id
        return np.argmax(self.logits(theta, features), axis=1)

    def _loss(self, theta, features, labels) -> float:
        z = features @ self.weights(theta)
        picked = z[np.arange(z.shape[0]), labels]
        return float(np.mean(logsumexp(z, axis=1) - picked))

    def _grad(self, theta, features, labels) -> np.ndarray:
        z = features @ self.weights(theta)
        p = softmax(z, axis=1)
        p[np.arange(z.shape[0]), labels] -= 1.0
        return (features.T @ p / features.shape[0]).reshape(-1)

    def value(self, theta):
        theta = self._check(theta)
        data = self.dataset
        return self._loss(theta, data.features, data.labels) + 0.5 * self.l2 * float(
            np.dot(theta, theta)
        )

    def grad(self, theta):
        theta = self._check(theta)
        data = self.dataset
        return self._grad(theta, data.features, data.labels) + self.l2 * theta

    def minibatch_grad(self, theta, batch_size, gen):
        theta = self._check(theta)
        data = self.dataset
        if batch_size >= data.n:
            return self.grad(theta)
        idx = gen.choice(data.n, size=batch_size, replace=False)
        return self._grad(theta, data.features[idx], data.labels[idx]) + self.l2 * theta

    @property
    def smoothness(self):
        # multinomial Hessian is bounded by ½·max‖x‖²
        return 0.5 * self._row_norm_sq + self.l2

    def __repr__(self):
        return f"SoftmaxCE(n={self.dataset.n}, p={self.dataset.p}, l2={self.l2})"


class SumObjective(Objective):
    """
    Σ_j S_j as a single objective; its gradient is what the coordinator
    noise is added to.
    """

    kind = "sum"

    def __init__(self, parts: Sequence[Objective]):
        self.parts = tuple(parts)
        dims = {p.dim for p in self.parts if p.dim is not None}
        if len(dims) > 1:
            raise DimensionError(f"objective dimensions disagree: {sorted(dims)}")
        self.dim = dims.pop() if dims else None

    def value(self, theta):
        theta = self._check(theta)
        return float(sum(p.value(theta) for p in self.parts))

    def values(self, thetas):
        thetas = np.atleast_2d(np.asarray(thetas, dtype=np.float64))
        out = np.zeros(thetas.shape[0])
        for p in self.parts:
            out = out + p.values(thetas)
        return out

    def grad(self, theta):
        theta = self._check(theta)
        out = np.zeros_like(theta)
        for p in self.parts:
            out = out + p.grad(theta)
        return out

    @property
    def smoothness(self):
        return float(sum(p.smoothness for p in self.parts))

    def __repr__(self):
        return f"SumObjective({list(self.parts)})"


def sum_objective(objs: Sequence[Objective]) -> SumObjective:
    return SumObjective(objs)


def value(obj: Objective, theta: ParamVector) -> float:
    return obj.value(theta)


def values(obj: Objective, thetas: np.ndarray) -> np.ndarray:
    return obj.values(thetas)


def grad(obj: Objective, theta: ParamVector) -> ParamVector:
    return obj.grad(theta)


def smoothness_of(obj: Objective) -> float:
    return obj.smoothness


def stoch_grad(
    obj: Objective,
    theta: ParamVector,
    noise: NoiseModel,
    rng,
    role: Literal["agent", "coordinator"] = "agent",
) -> ParamVector:
    """
    Unbiased gradient estimate. Gaussian noise is spread evenly over the d
    components so that E‖ε‖² = σ² exactly. In minibatch mode the agent
    gradient is a subsample estimate and no extra noise is injected.
    """
    sigma = noise.sigma_c if role == "agent" else noise.sigma_s
    if role == "agent" and noise.batch_size is not None and isinstance(obj, SoftmaxCE):
        return obj.minibatch_grad(theta, noise.batch_size, as_generator(rng))
    g = obj.grad(theta)
    if noise.distribution == "zero" or sigma == 0.0:
        return g
    gen = as_generator(rng)
    eps = gen.standard_normal(g.shape[0]) * (sigma / np.sqrt(g.shape[0]))
    return g + eps


def random_quadratics(
    m_agents: int, dim: int, spread: float, rng, curvature: float = 1.0
) -> list:
    """
    Agent losses ½a‖θ − c_i‖² with centers c_i ~ N(0, spread²·I).
    """
    if m_agents < 1 or dim < 1:
        raise DomainError("need at least one agent and one dimension")
    gen = as_generator(rng)
    centers = spread * gen.standard_normal((m_agents, dim))
    return [Quadratic(c, curvature) for c in centers]
