"""
Constants of the convergence analysis and the right-hand sides of the global
rate estimate and the agent-drift bound, plus the empirical check of both
against seed-replicated run traces.
"""

import logging
import math
from dataclasses import asdict, dataclass
from typing import Dict, List, Optional, Sequence

import numpy as np
from scipy.optimize import minimize

from scalardl.core import (
    ContractError,
    DegenerateError,
    DimensionError,
    DomainError,
    ParamVector,
    as_generator,
    as_param,
)
from scalardl.objectives import NoiseModel, Objective, Quadratic, ScaledSqNorm, stoch_grad
from scalardl.scalarization import CompositeObjective, GridSpec

logger = logging.getLogger(__name__)

REL_SLACK = 1e-9


@dataclass(frozen=True)
class BoundConstants:
    L_C: float
    L_S: float
    sigma_C: float
    sigma_S: float
    zeta: float
    alpha: float
    n_coord: int
    D: float

    def __post_init__(self):
        for name in ("L_C", "L_S", "sigma_C", "sigma_S", "zeta", "alpha", "D"):
            if getattr(self, name) < 0:
                raise DomainError(f"{name} must be >= 0")

    @property
    def L(self) -> float:
        return self.L_C + self.alpha * self.L_S

    @property
    def Sigma(self) -> float:
        return self.sigma_C**2 + self.alpha**2 * self.n_coord**2 * self.sigma_S**2

    @classmethod
    def from_composite(
        cls,
        comp: CompositeObjective,
        noise: Optional[NoiseModel] = None,
        zeta: float = 0.0,
        D: float = 0.0,
    ) -> "BoundConstants":
        l_c, l_s = comp.smoothness()
        sigma_c = sigma_s = 0.0
        if noise is not None and noise.distribution != "zero":
            sigma_c, sigma_s = noise.sigma_c, noise.sigma_s
        return cls(l_c, l_s, sigma_c, sigma_s, zeta, comp.alpha, comp.n, D)

    @classmethod
    def from_problem(
        cls,
        comp: CompositeObjective,
        noise: NoiseModel,
        init: ParamVector,
        theta_star: ParamVector,
        probe=None,
    ) -> "BoundConstants":
        D = float(np.linalg.norm(np.asarray(init) - np.asarray(theta_star)))
        if probe is None:
            probe = ball_probe(init, max(2.0 * D, 1.0), 1000, np.random.default_rng(0))
        return cls.from_composite(comp, noise, compute_zeta(comp, probe), D)

    def to_dict(self) -> Dict[str, float]:
        out = asdict(self)
        out.update(L=self.L, Sigma=self.Sigma)
        return out


@dataclass(frozen=True)
class BoundReport:
    theorem2_rhs: float
    drift_rhs: float
    eta_schedule: float
    empirical_lhs: float
    drift_lhs: float
    # same gap measured against F(Θᵀ) instead of F(θ*)
    final_comparator_lhs: float
    theorem2_satisfied: bool
    drift_satisfied: bool
    n_seeds: int
    constants: Dict[str, float]

    @property
    def satisfied(self) -> bool:
        return self.theorem2_satisfied and self.drift_satisfied

    @property
    def margin(self) -> float:
        return self.theorem2_rhs - self.empirical_lhs

    @property
    def drift_margin(self) -> float:
        return self.drift_rhs - self.drift_lhs

    def to_dict(self) -> Dict:
        out = asdict(self)
        out.update(satisfied=self.satisfied, margin=self.margin, drift_margin=self.drift_margin)
        return out


def _within(lhs: float, rhs: float) -> bool:
    return lhs <= rhs * (1.0 + REL_SLACK)


def _probe_points(probe) -> np.ndarray:
    if isinstance(probe, GridSpec):
        points = probe.points()
    else:
        points = np.atleast_2d(np.asarray(probe, dtype=np.float64))
    if points.size == 0:
        raise DomainError("empty probe")
    return points


def compute_zeta(comp: CompositeObjective, probe) -> float:
    """
    max over probe points and agents of ‖∇F_i − ∇F‖. The coordinator term
    is shared by every F_i and cancels, so only agent gradients are needed.
    """
    zeta = 0.0
    for theta in _probe_points(probe):
        grads = np.stack([c.grad(theta) for c in comp.agents])
        gaps = grads - grads.mean(axis=0)
        zeta = max(zeta, float(np.max(np.linalg.norm(gaps, axis=1))))
    return zeta


def ball_probe(center, radius: float, n: int, rng) -> np.ndarray:
    """
    n points uniform in the ball B(center, radius).
    """
    center = np.asarray(center, dtype=np.float64)
    gen = as_generator(rng)
    d = center.shape[0]
    directions = gen.standard_normal((n, d))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    radii = radius * gen.random(n) ** (1.0 / d)
    return center + directions * radii[:, None]


def lr_cap(k: BoundConstants) -> float:
    if k.L <= 0:
        raise DegenerateError("L = 0: objective is flat")
    return 1.0 / (4.0 * k.L)


def eta_theorem2(k: BoundConstants, T: int, tau: int) -> float:
    if k.L <= 0:
        raise DegenerateError("L = 0: objective is flat")
    if T < 1 or tau < 1:
        raise DomainError("T and tau must be >= 1")
    return 1.0 / (4.0 * k.L * tau * math.sqrt(T))


def theorem2_rhs(k: BoundConstants, T: int, tau: int, M: int) -> float:
    """
    2D²L/√T + Σ/(2LMτ√T) + 5ζ²/(8LT) + Σ/(4LτT)
    """
    if k.L <= 0:
        raise DegenerateError("L = 0: objective is flat")
    if T < 1 or tau < 1 or M < 1:
        raise DomainError("T, tau and M must be >= 1")
    L, Sigma, root_t = k.L, k.Sigma, math.sqrt(T)
    return (
        2.0 * k.D**2 * L / root_t
        + Sigma / (2.0 * L * M * tau * root_t)
        + 5.0 * k.zeta**2 / (8.0 * L * T)
        + Sigma / (4.0 * L * tau * T)
    )


def drift_rhs(k: BoundConstants, tau: int, eta: float) -> float:
    """
    10τ²η²ζ² + 4τη²Σ
    """
    return 10.0 * tau**2 * eta**2 * k.zeta**2 + 4.0 * tau * eta**2 * k.Sigma


def _quadratic_parts(objs: Sequence[Objective]):
    """
    (curvature, center) pairs when every objective is a quadratic form,
    None otherwise.
    """
    parts = []
    for o in objs:
        if isinstance(o, Quadratic):
            parts.append((o.curvature, o.center))
        elif isinstance(o, ScaledSqNorm):
            parts.append((2.0 * o.scale, 0.0))
        else:
            return None
    return parts


def minimizer(comp: CompositeObjective, init: Optional[ParamVector] = None) -> ParamVector:
    """
    argmin F. Closed form when every objective is quadratic, L-BFGS otherwise.
    """
    agents = _quadratic_parts(comp.agents)
    coords = _quadratic_parts(comp.coordinators)
    if agents is not None and coords is not None and comp.dim is not None:
        num = sum(a * c for a, c in agents) / comp.m + comp.alpha * sum(
            (b * e for b, e in coords), np.zeros(comp.dim)
        )
        den = sum(a for a, _ in agents) / comp.m + comp.alpha * sum(b for b, _ in coords)
        return as_param(num / den)
    if init is None:
        if comp.dim is None:
            raise DomainError("need an initial point to solve for the minimizer")
        init = np.zeros(comp.dim)
    res = minimize(
        comp.F,
        np.asarray(init, dtype=np.float64),
        jac=comp.grad_F,
        method="L-BFGS-B",
        options={"maxiter": 20000, "gtol": 1e-10, "ftol": 1e-15},
    )
    if not res.success:
        logger.warning(f"minimizer: L-BFGS stopped early: {res.message}")
    return as_param(res.x)


def estimate_sigma(
    obj: Objective,
    thetas: Sequence[ParamVector],
    noise: NoiseModel,
    rng,
    draws: int = 64,
    role: str = "agent",
) -> float:
    """
    sqrt of the largest mean squared deviation of stoch_grad from grad over
    the calibration points.
    """
    gen = as_generator(rng)
    worst = 0.0
    for theta in thetas:
        g = obj.grad(theta)
        dev = [np.sum((stoch_grad(obj, theta, noise, gen, role) - g) ** 2) for _ in range(draws)]
        worst = max(worst, float(np.mean(dev)))
    return math.sqrt(worst)


def constants_sweep(
    comp: CompositeObjective,
    noise: NoiseModel,
    lams: Sequence[float],
    init: ParamVector,
    probe=None,
    theta_stars: Optional[Sequence[ParamVector]] = None,
) -> List[BoundConstants]:
    """
    Constants of `comp` re-weighted at every λ in `lams`. Minimizers are
    solved for unless `theta_stars` (one per λ) is given.
    """
    if theta_stars is not None and len(theta_stars) != len(lams):
        raise DimensionError(f"{len(theta_stars)} minimizers for {len(lams)} lambdas")
    out = []
    for i, lam in enumerate(lams):
        c = comp.with_lambda(lam)
        star = minimizer(c, init) if theta_stars is None else theta_stars[i]
        out.append(BoundConstants.from_problem(c, noise, init, star, probe))
    return out


def check_bounds(
    traces,
    comp: CompositeObjective,
    k: BoundConstants,
    cfg,
    theta_star: ParamVector,
) -> BoundReport:
    """
    Monte-Carlo estimate of both bound LHS over the seed replicates in
    `traces`. The drift LHS is the seed-mean of max_i ‖Θ_i − Θ̄‖², maximized
    over (t, k).
    """
    traces = list(traces)
    if not traces:
        raise ContractError("need at least one trace")
    if cfg.schedule != "theorem2":
        raise ContractError("bound check needs traces produced with the theorem2 schedule")
    if cfg.steps_per_epoch != 1:
        raise ContractError("bound check needs one stochastic step per local epoch")
    if any(t.status != "ok" for t in traces):
        raise ContractError("bound check on a diverged trace")

    f_star = comp.F(theta_star)
    gaps = [t.averaged_objective() - f_star for t in traces]
    final_gaps = [t.averaged_objective() - comp.F(t.final_theta) for t in traces]
    drift = np.array([[r.max_drift for r in t.records] for t in traces])
    drift_lhs = float(np.max(drift.mean(axis=0)))

    eta = traces[0].lr
    t2 = theorem2_rhs(k, cfg.rounds, cfg.local_epochs, comp.m)
    dr = drift_rhs(k, cfg.local_epochs, eta)
    lhs = float(np.mean(gaps))
    report = BoundReport(
        theorem2_rhs=t2,
        drift_rhs=dr,
        eta_schedule=eta,
        empirical_lhs=lhs,
        drift_lhs=drift_lhs,
        final_comparator_lhs=float(np.mean(final_gaps)),
        theorem2_satisfied=_within(lhs, t2),
        drift_satisfied=_within(drift_lhs, dr),
        n_seeds=len(traces),
        constants=k.to_dict(),
    )
    if not report.satisfied:
        logger.warning(
            f"bound violated: gap {lhs:.6g} vs {t2:.6g}, drift {drift_lhs:.6g} vs {dr:.6g}"
        )
    return report
