import numpy as np
import pytest
from conftest import two_quadratics
from numpy.testing import assert_allclose

from scalardl import theory
from scalardl.core import ContractError, DegenerateError, DimensionError, DomainError
from scalardl.data import synth_blobs
from scalardl.objectives import NoiseModel, Quadratic, ScaledSqNorm, SoftmaxCE
from scalardl.scalarization import CompositeObjective, GridSpec
from scalardl.trainer import TrainConfig, replicate, run


def consts(**kw):
    base = dict(L_C=1.0, L_S=1.0, sigma_C=0.0, sigma_S=0.0, zeta=0.0, alpha=1.0, n_coord=1, D=1.0)
    base.update(kw)
    return theory.BoundConstants(**base)


def test_composite_constants():
    k = consts(sigma_C=0.1, sigma_S=0.2, alpha=2.0, n_coord=3)
    assert k.L == 3.0
    assert_allclose(k.Sigma, 0.01 + 4 * 9 * 0.04)
    with pytest.raises(DomainError):
        consts(zeta=-1.0)


def test_from_composite(two_quad):
    k = theory.BoundConstants.from_composite(two_quad, NoiseModel(sigma_c=0.1, sigma_s=0.2))
    assert (k.L_C, k.L_S, k.alpha, k.n_coord) == (1.0, 1.0, 1.0, 1)
    assert k.L == 2.0
    assert (k.sigma_C, k.sigma_S) == (0.1, 0.2)
    zero = theory.BoundConstants.from_composite(two_quad, NoiseModel(0.1, 0.2, "zero"))
    assert zero.Sigma == 0.0


def test_theorem2_rhs():
    k = consts()
    assert_allclose(theory.theorem2_rhs(k, T=4, tau=1, M=2), 2.0)
    assert_allclose(theory.theorem2_rhs(consts(zeta=1.0), T=4, tau=1, M=2), 2.0 + 5 / 64)
    noisy = consts(D=0.0, sigma_C=1.0)
    # Σ/(2LMτ√T) + Σ/(4LτT)
    assert_allclose(theory.theorem2_rhs(noisy, T=4, tau=1, M=2), 1 / 16 + 1 / 32)


def test_drift_rhs():
    assert_allclose(theory.drift_rhs(consts(zeta=1.0, sigma_C=1.0), tau=2, eta=0.1), 0.48)


def test_step_sizes():
    assert_allclose(theory.eta_theorem2(consts(), T=16, tau=1), 1 / 32)
    assert_allclose(theory.eta_theorem2(consts(), T=16, tau=2), 1 / 64)
    assert theory.lr_cap(consts()) == 0.125


def test_flat_objective_is_degenerate():
    flat = consts(L_C=0.0, L_S=0.0)
    with pytest.raises(DegenerateError):
        theory.theorem2_rhs(flat, 4, 1, 2)
    with pytest.raises(DegenerateError):
        theory.eta_theorem2(flat, 4, 1)
    with pytest.raises(DomainError):
        theory.theorem2_rhs(consts(), 0, 1, 2)


def test_zeta_of_unit_quadratics(two_quad):
    probe = GridSpec((-3.0,), (3.0,), (61,))
    assert_allclose(theory.compute_zeta(two_quad, probe), 1.0)
    assert_allclose(theory.compute_zeta(two_quad, np.array([[10.0]])), 1.0)
    with pytest.raises(DomainError):
        theory.compute_zeta(two_quad, np.zeros((0, 1)))


def test_zeta_is_zero_for_identical_agents():
    comp = CompositeObjective([Quadratic([1.0])] * 4, [ScaledSqNorm(0.5)], 0.5)
    assert theory.compute_zeta(comp, np.array([[0.0], [3.0]])) == 0.0


def test_ball_probe_stays_inside():
    pts = theory.ball_probe(np.array([1.0, -1.0, 0.0]), 2.0, 500, np.random.default_rng(0))
    assert pts.shape == (500, 3)
    assert np.all(np.linalg.norm(pts - [1.0, -1.0, 0.0], axis=1) <= 2.0 + 1e-12)


def test_closed_form_minimizer(two_quad, five_quad):
    assert_allclose(theory.minimizer(two_quad), [0.5])
    assert_allclose(theory.minimizer(two_quadratics(0.0)), [1.0])
    star = theory.minimizer(five_quad)
    assert_allclose(five_quad.grad_F(star), np.zeros(5), atol=1e-12)


def test_lbfgs_minimizer():
    blobs = synth_blobs(2, 2, 1.0, 200, np.random.default_rng(0))
    agents = [SoftmaxCE(ds, l2=0.01) for ds in blobs.agents]
    comp = CompositeObjective(agents, [ScaledSqNorm(0.5, agents[0].dim)], 0.25)
    star = theory.minimizer(comp, np.zeros(agents[0].dim))
    assert np.linalg.norm(comp.grad_F(star)) < 1e-5


def test_estimate_sigma_recovers_gaussian_noise():
    q = Quadratic(np.zeros(3))
    thetas = [np.zeros(3), np.ones(3)]
    sigma = theory.estimate_sigma(q, thetas, NoiseModel(sigma_c=0.5), np.random.default_rng(0), draws=4000)
    assert_allclose(sigma, 0.5, rtol=0.05)


def test_constants_grow_with_lambda(two_quad):
    lams = [0.0, 0.25, 0.5, 0.65, 0.75, 0.87]
    sweep = theory.constants_sweep(
        two_quad, NoiseModel(sigma_c=0.1, sigma_s=0.1), lams, np.zeros(1)
    )
    L = [k.L for k in sweep]
    Sigma = [k.Sigma for k in sweep]
    assert all(b > a for a, b in zip(L, L[1:]))
    assert all(b > a for a, b in zip(Sigma, Sigma[1:]))
    assert all(k.zeta == pytest.approx(1.0) for k in sweep)


def test_constants_sweep_reuses_given_minimizers(two_quad):
    lams = [0.0, 0.5]
    noise = NoiseModel(sigma_c=0.1)
    stars = [theory.minimizer(two_quad.with_lambda(lam)) for lam in lams]
    given = theory.constants_sweep(two_quad, noise, lams, np.zeros(1), theta_stars=stars)
    solved = theory.constants_sweep(two_quad, noise, lams, np.zeros(1))
    assert given == solved
    assert given[1].D == pytest.approx(0.5)
    with pytest.raises(DimensionError):
        theory.constants_sweep(two_quad, noise, lams, np.zeros(1), theta_stars=stars[:1])


def test_check_bounds_needs_theorem2_traces(two_quad):
    cfg = TrainConfig(rounds=4, lr=0.1)
    trace = run(two_quad, cfg, np.zeros(1), NoiseModel())
    with pytest.raises(ContractError):
        theory.check_bounds([trace], two_quad, consts(), cfg, np.array([0.5]))
    with pytest.raises(ContractError):
        theory.check_bounds([], two_quad, consts(), TrainConfig(rounds=4, schedule="theorem2"), [0.5])


def test_check_bounds_on_noisy_quadratic(two_quad):
    noise = NoiseModel(sigma_c=0.1)
    star = theory.minimizer(two_quad)
    k = theory.BoundConstants.from_problem(two_quad, noise, np.zeros(1), star)
    cfg = TrainConfig(rounds=32, local_epochs=2, schedule="theorem2")
    traces = replicate(two_quad, cfg, np.zeros(1), noise, seeds=range(8))
    report = theory.check_bounds(traces, two_quad, k, cfg, star)
    assert report.n_seeds == 8
    assert report.satisfied
    assert 0 < report.empirical_lhs < report.theorem2_rhs
    assert report.drift_lhs <= report.drift_rhs
    assert_allclose(report.eta_schedule, theory.eta_theorem2(k, 32, 2))
    d = report.to_dict()
    assert d["satisfied"] is True
    assert d["constants"]["L"] == 2.0
