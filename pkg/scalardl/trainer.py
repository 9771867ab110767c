"""
Decentralized training loop: every round each agent starts from the current
global parameters, runs τ local epochs of stochastic steps on
F_i = C_i + α·Σ_j S_j, and the coordinator averages the local results.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Literal, Optional, Sequence, Tuple

import numpy as np

from scalardl import theory
from scalardl.core import (
    ContractError,
    DimensionError,
    DomainError,
    NumericError,
    ParamVector,
    RngStream,
    as_param,
    vec_mean,
    vec_norm_sq,
)
from scalardl.objectives import NoiseModel, stoch_grad
from scalardl.scalarization import CompositeObjective
from scalardl.utils import Stopwatch, digest_bytes, fmt_float, run_in_threads

logger = logging.getLogger(__name__)

DIVERGENCE_NORM = 1e12


@dataclass(frozen=True)
class TrainConfig:
    rounds: int
    local_epochs: int = 1
    lr: Optional[float] = None
    schedule: Literal["fixed", "theorem2"] = "fixed"
    # when set, must match the composite's lambda
    lam: Optional[float] = None
    seed: int = 0
    parallel_agents: bool = False
    # reset every agent to Θ⁰ each round; rounds then never progress
    restart_from_init: bool = False
    steps_per_epoch: int = 1
    check_lr: bool = False
    record_objective: bool = True
    log_every: int = 0

    def __post_init__(self):
        if self.rounds < 1:
            raise DomainError("rounds (T) must be >= 1")
        if self.local_epochs < 1:
            raise DomainError("local_epochs (tau) must be >= 1")
        if self.steps_per_epoch < 1:
            raise DomainError("steps_per_epoch must be >= 1")
        if self.schedule not in ("fixed", "theorem2"):
            raise DomainError(f"unknown schedule {self.schedule}")
        if self.schedule == "fixed" and (self.lr is None or self.lr < 0):
            raise DomainError("fixed schedule needs lr >= 0")
        if self.lam is not None and not (0.0 <= self.lam < 1.0):
            raise DomainError("lambda must be < 1 and >= 0")


@dataclass(frozen=True)
class AgentState:
    agent_id: int
    theta: ParamVector
    round: int
    epoch: int = 0
    step: int = 0


@dataclass
class RoundRecord:
    round: int
    global_theta: ParamVector
    local_thetas: Tuple[ParamVector, ...]
    # one entry per local epoch k = 1..τ, measured at the averaged parameters
    objective: Tuple[float, ...]
    max_drift: Tuple[float, ...]
    mean_drift: Tuple[float, ...]
    digest: str
    metrics: Dict = field(default_factory=dict)


@dataclass
class RunTrace:
    init: ParamVector
    lr: float
    config: TrainConfig
    records: List[RoundRecord] = field(default_factory=list)
    status: Literal["ok", "diverged"] = "ok"
    error: str = ""

    def __len__(self):
        return len(self.records)

    @property
    def final_theta(self) -> ParamVector:
        return self.records[-1].global_theta if self.records else self.init

    @property
    def global_thetas(self) -> List[ParamVector]:
        return [r.global_theta for r in self.records]

    @property
    def max_drift(self) -> float:
        return max((max(r.max_drift) for r in self.records if r.max_drift), default=0.0)

    def averaged_objective(self) -> float:
        """
        (1/τT)·Σ_t Σ_k F(Θ̄^{t,k}).
        """
        values = [v for r in self.records for v in r.objective]
        if not values:
            raise ContractError("trace was recorded without objective values")
        return float(np.mean(values))

    def to_rows(self, extra: Optional[Dict[str, str]] = None) -> Tuple[List[str], List[List[str]]]:
        dim = self.init.shape[0]
        theta_cols = [f"theta_{j}" for j in range(dim)] if dim <= 10 else []
        header = ["round", "epoch", "objective", "max_drift", "mean_drift", "theta_norm_sq", "digest"]
        header += theta_cols + list(extra or {})
        rows = []
        for r in self.records:
            norm_sq = vec_norm_sq(r.global_theta)
            for k in range(len(r.max_drift)):
                objective = r.objective[k] if r.objective else None
                row = [
                    str(r.round),
                    str(k + 1),
                    fmt_float(objective),
                    fmt_float(r.max_drift[k]),
                    fmt_float(r.mean_drift[k]),
                    fmt_float(norm_sq),
                    r.digest,
                ]
                row += [fmt_float(v) for v in r.global_theta] if theta_cols else []
                row += list((extra or {}).values())
                rows.append(row)
        return header, rows


class DivergenceError(NumericError):
    def __init__(self, message: str, trace: RunTrace, coords=None):
        super().__init__(message, coords)
        self.trace = trace


def resolve_lr(cfg: TrainConfig, comp: CompositeObjective) -> float:
    consts = theory.BoundConstants.from_composite(comp)
    if cfg.schedule == "theorem2":
        return theory.eta_theorem2(consts, cfg.rounds, cfg.local_epochs)
    eta = float(cfg.lr)
    if cfg.check_lr and eta > theory.lr_cap(consts) * (1 + 1e-12):
        raise ContractError(f"lr {eta} exceeds 1/(4L) = {theory.lr_cap(consts):.6g}")
    return eta


def local_step(
    agent: AgentState,
    comp: CompositeObjective,
    noise: NoiseModel,
    eta: float,
    rng: RngStream,
) -> AgentState:
    """
    θ' = θ − η(g + α·h), g estimating ∇C_i and h estimating ∇Σ_j S_j.
    """
    if eta < 0:
        raise DomainError("learning rate must be >= 0")
    theta = agent.theta
    i = agent.agent_id - 1
    gen = None
    if not noise.silent or noise.batch_size is not None:
        gen = rng.generator()
    direction = stoch_grad(comp.agents[i], theta, noise, gen, role="agent")
    if comp.alpha != 0.0:
        h = stoch_grad(comp.coordinator_sum, theta, noise, gen, role="coordinator")
        direction = direction + comp.alpha * h
    new_theta = theta - eta * direction
    if not np.all(np.isfinite(new_theta)):
        raise NumericError("non-finite local update", (agent.round, agent.agent_id, agent.epoch + 1))
    new_theta.flags.writeable = False
    return AgentState(agent.agent_id, new_theta, agent.round, agent.epoch, agent.step + 1)


def local_epoch(
    agent: AgentState,
    comp: CompositeObjective,
    noise: NoiseModel,
    eta: float,
    stream: RngStream,
    steps: int = 1,
) -> AgentState:
    k = agent.epoch + 1
    for s in range(steps):
        agent = local_step(agent, comp, noise, eta, stream.at(agent.round, agent.agent_id, k, s))
    return AgentState(agent.agent_id, agent.theta, agent.round, k, 0)


def aggregate(locals_: Sequence[ParamVector]) -> ParamVector:
    return vec_mean(list(locals_))


def _agent_round(
    agent_id: int,
    start: ParamVector,
    t: int,
    comp: CompositeObjective,
    noise: NoiseModel,
    eta: float,
    cfg: TrainConfig,
) -> List[ParamVector]:
    stream = RngStream(cfg.seed)
    state = AgentState(agent_id, start, t)
    thetas = []
    for _ in range(cfg.local_epochs):
        state = local_epoch(state, comp, noise, eta, stream, cfg.steps_per_epoch)
        thetas.append(state.theta)
    logger.debug(f"round {t} agent {agent_id}: |theta|^2={vec_norm_sq(state.theta):.6g}")
    return thetas


def run(
    comp: CompositeObjective,
    cfg: TrainConfig,
    init: ParamVector,
    noise: NoiseModel,
    on_round: Optional[Callable[[RoundRecord], Dict]] = None,
) -> RunTrace:
    init = as_param(init)
    if comp.dim is not None and init.shape[0] != comp.dim:
        raise DimensionError(f"init has dimension {init.shape[0]}, objectives need {comp.dim}")
    if cfg.lam is not None and cfg.lam != comp.config.lam:
        raise ContractError(f"config lambda {cfg.lam} != composite lambda {comp.config.lam}")
    eta = resolve_lr(cfg, comp)
    trace = RunTrace(init=init, lr=eta, config=cfg)
    M, tau = comp.m, cfg.local_epochs
    sw = Stopwatch()
    executor = ThreadPoolExecutor(max_workers=M) if cfg.parallel_agents and M > 1 else None
    theta = init
    try:
        for t in range(1, cfg.rounds + 1):
            start = init if cfg.restart_from_init else theta

            def work(i, start=start, t=t):
                return _agent_round(i + 1, start, t, comp, noise, eta, cfg)

            if executor is not None:
                per_agent = list(executor.map(work, range(M)))
            else:
                per_agent = [work(i) for i in range(M)]

            # barrier: per-epoch averages and drift
            objective, max_drift, mean_drift = [], [], []
            for k in range(tau):
                locals_k = [per_agent[i][k] for i in range(M)]
                avg = aggregate(locals_k)
                drifts = [vec_norm_sq(x - avg) for x in locals_k]
                max_drift.append(max(drifts))
                mean_drift.append(float(np.mean(drifts)))
                if cfg.record_objective:
                    objective.append(comp.F(avg))
            final_locals = tuple(per_agent[i][-1] for i in range(M))
            theta = aggregate(final_locals)
            record = RoundRecord(
                round=t,
                global_theta=theta,
                local_thetas=final_locals,
                objective=tuple(objective),
                max_drift=tuple(max_drift),
                mean_drift=tuple(mean_drift),
                digest=digest_bytes(*[x for thetas in per_agent for x in thetas]),
            )
            if on_round is not None:
                record.metrics = on_round(record) or {}
            trace.records.append(record)

            if cfg.log_every and t % cfg.log_every == 0:
                last = f"F={objective[-1]:.6g} " if objective else ""
                logger.info(
                    f"round {t}/{cfg.rounds}: {last}drift={max_drift[-1]:.3g} ({sw.elapsed:.2f}s)"
                )
            if vec_norm_sq(theta) > DIVERGENCE_NORM**2:
                trace.status = "diverged"
                trace.error = f"|theta| exceeded {DIVERGENCE_NORM:g} in round {t}"
                raise DivergenceError(trace.error, trace)
    except DivergenceError:
        raise
    except NumericError as e:
        trace.status = "diverged"
        trace.error = str(e)
        raise DivergenceError(str(e), trace, e.coords) from e
    finally:
        if executor is not None:
            executor.shutdown()
    return trace


def replicate(
    comp: CompositeObjective,
    cfg: TrainConfig,
    init: ParamVector,
    noise: NoiseModel,
    seeds: Sequence[int],
    threads: int = 1,
) -> List[RunTrace]:
    """
    Independent runs differing only in seed.
    """
    sw = Stopwatch()

    def one(seed):
        return run(comp, replace(cfg, seed=seed), init, noise)

    traces = run_in_threads(one, list(seeds), threads)
    logger.info(f"{len(traces)} replicates of {comp} done ({sw.elapsed:.2f}s)")
    return traces
