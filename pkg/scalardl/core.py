"""
Numeric building blocks shared by every other module: parameter vectors,
objective-value vectors, keyed random streams and the error types.
"""

import logging
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np
import numpy.typing as npt

logger = logging.getLogger(__name__)

# Read-only float64 array of fixed length d.
ParamVector = npt.NDArray[np.float64]


class DimensionError(ValueError):
    pass


class DomainError(ValueError):
    pass


class NumericError(ArithmeticError):
    def __init__(self, message: str, coords: Optional[Tuple[int, int, int]] = None):
        if coords is not None:
            message = f"{message} at (t={coords[0]}, i={coords[1]}, k={coords[2]})"
        super().__init__(message)
        self.coords = coords


class ContractError(RuntimeError):
    pass


class ResourceError(RuntimeError):
    pass


class DegenerateError(ValueError):
    pass


def as_param(values: Iterable[float]) -> ParamVector:
    """
    Copy values into a frozen float64 vector, rejecting NaN/Inf.
    """
    x = np.array(values, dtype=np.float64).reshape(-1)
    if not np.all(np.isfinite(x)):
        raise NumericError("non-finite entry in parameter vector")
    x.flags.writeable = False
    return x


def _freeze(x: np.ndarray) -> ParamVector:
    if not np.all(np.isfinite(x)):
        raise NumericError("non-finite result")
    x.flags.writeable = False
    return x


def _check_same_length(x: np.ndarray, y: np.ndarray) -> None:
    if x.shape != y.shape:
        raise DimensionError(f"length mismatch: {x.shape[0]} vs {y.shape[0]}")


def vec_axpy(a: float, x: ParamVector, y: ParamVector) -> ParamVector:
    if not np.isfinite(a):
        raise NumericError(f"non-finite scale {a}")
    x, y = np.asarray(x, dtype=np.float64), np.asarray(y, dtype=np.float64)
    _check_same_length(x, y)
    return _freeze(a * x + y)


def vec_norm_sq(x: ParamVector) -> float:
    x = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise NumericError("non-finite input to norm")
    return float(np.dot(x, x))


def vec_mean(xs: Sequence[ParamVector]) -> ParamVector:
    if len(xs) == 0:
        raise DimensionError("mean of an empty sequence")
    first = np.asarray(xs[0])
    for x in xs[1:]:
        _check_same_length(first, np.asarray(x))
    # offsets from the first vector, summed in a fixed order; identical
    # inputs give back the input bit for bit
    base = first.astype(np.float64)
    total = np.zeros_like(base)
    for x in xs[1:]:
        total = total + (x - base)
    return _freeze(base + total / len(xs))


@dataclass(frozen=True)
class ObjectiveVector:
    agent_values: Tuple[float, ...]
    coordinator_values: Tuple[float, ...]

    def __post_init__(self):
        if not all(np.isfinite(v) for v in self.agent_values + self.coordinator_values):
            raise NumericError("non-finite objective value")

    @property
    def shape(self) -> Tuple[int, int]:
        return len(self.agent_values), len(self.coordinator_values)

    def as_array(self) -> np.ndarray:
        return np.array(self.agent_values + self.coordinator_values, dtype=np.float64)


@dataclass(frozen=True)
class RngStream:
    """
    Keyed random stream. The generator depends only on (seed, round, agent,
    epoch, step), never on call order, so agents can run on any thread.
    """

    seed: int
    round: int = 0
    agent: int = 0
    epoch: int = 0
    step: int = 0

    @property
    def stream_id(self) -> Tuple[int, int, int]:
        return self.round, self.agent, self.epoch

    def at(self, round: int, agent: int, epoch: int, step: int = 0) -> "RngStream":
        return RngStream(self.seed, round, agent, epoch, step)

    def generator(self) -> np.random.Generator:
        key = [self.seed & 0xFFFFFFFFFFFFFFFF, self.round, self.agent, self.epoch, self.step]
        return np.random.Generator(np.random.Philox(np.random.SeedSequence(key)))


def as_generator(rng) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError(f"expected RngStream or Generator, got {type(rng).__name__}")
