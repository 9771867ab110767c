import math

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from scalardl.core import DimensionError, DomainError, RngStream
from scalardl.objectives import (
    DatasetHandle,
    NoiseModel,
    Quadratic,
    ScaledSqNorm,
    SoftmaxCE,
    grad,
    random_quadratics,
    smoothness_of,
    stoch_grad,
    sum_objective,
    value,
    values,
)


def numeric_grad(f, theta, h=1e-6):
    out = np.zeros_like(theta)
    for j in range(theta.shape[0]):
        e = np.zeros_like(theta)
        e[j] = h
        out[j] = (f(theta + e) - f(theta - e)) / (2 * h)
    return out


def test_quadratic():
    q = Quadratic([0.0], curvature=2.0)
    assert value(q, np.array([1.0])) == 1.0
    assert_array_equal(grad(q, np.array([1.0])), [2.0])
    assert smoothness_of(q) == 2.0
    assert_allclose(values(q, np.array([[0.0], [1.0], [-2.0]])), [0.0, 1.0, 4.0])


def test_quadratic_checks():
    with pytest.raises(DomainError):
        Quadratic([0.0], curvature=0.0)
    with pytest.raises(DimensionError):
        Quadratic([0.0, 1.0]).value(np.array([1.0]))


def test_scaled_sq_norm():
    s = ScaledSqNorm(100.0)
    assert_allclose(s.value(np.array([0.1, 0.2])), 5.0)
    assert_allclose(s.grad(np.array([0.1, 0.2])), [20.0, 40.0])
    assert s.smoothness == 200.0
    with pytest.raises(DomainError):
        ScaledSqNorm(-1.0)


def test_sum_objective():
    total = sum_objective([Quadratic([1.0]), ScaledSqNorm(0.5)])
    theta = np.array([3.0])
    assert total.value(theta) == 2.0 + 4.5
    assert_array_equal(total.grad(theta), [5.0])
    assert total.smoothness == 2.0


def test_softmax_at_zero_is_log_k(tiny_dataset):
    model = SoftmaxCE(tiny_dataset)
    assert model.dim == 9
    assert_allclose(model.value(np.zeros(9)), math.log(3))


def test_softmax_gradient_matches_finite_differences(tiny_dataset):
    model = SoftmaxCE(tiny_dataset, l2=0.1)
    theta = np.random.default_rng(1).standard_normal(model.dim)
    assert_allclose(model.grad(theta), numeric_grad(model.value, theta), rtol=1e-5, atol=1e-7)


def test_softmax_smoothness(tiny_dataset):
    model = SoftmaxCE(tiny_dataset, l2=0.25)
    r = np.max(np.sum(tiny_dataset.features**2, axis=1))
    assert_allclose(model.smoothness, 0.5 * r + 0.25)


def test_softmax_predict_ties_go_to_lowest_class(tiny_dataset):
    model = SoftmaxCE(tiny_dataset)
    assert_array_equal(model.predict(np.zeros(model.dim)), np.zeros(tiny_dataset.n))


def test_softmax_dimension_check(tiny_dataset):
    with pytest.raises(DimensionError):
        SoftmaxCE(tiny_dataset).value(np.zeros(4))


def test_dataset_validation():
    with pytest.raises(DomainError):
        DatasetHandle(np.zeros((2, 2)), np.array([0, 10]))
    with pytest.raises(DimensionError):
        DatasetHandle(np.zeros((2, 2)), np.array([0]))


def test_gaussian_noise_has_requested_variance():
    q = Quadratic(np.zeros(4))
    theta = np.ones(4)
    noise = NoiseModel(sigma_c=0.3)
    gen = np.random.default_rng(0)
    sq = [np.sum((stoch_grad(q, theta, noise, gen) - q.grad(theta)) ** 2) for _ in range(20000)]
    assert_allclose(np.mean(sq), 0.09, rtol=0.05)


def test_zero_noise_returns_exact_gradient():
    q = Quadratic([1.0, 2.0])
    theta = np.array([0.5, 0.5])
    noise = NoiseModel(sigma_c=1.0, distribution="zero")
    assert_array_equal(stoch_grad(q, theta, noise, RngStream(0)), q.grad(theta))


def test_coordinator_role_uses_sigma_s():
    q = Quadratic([0.0])
    noise = NoiseModel(sigma_c=0.0, sigma_s=1.0)
    theta = np.array([1.0])
    assert_array_equal(stoch_grad(q, theta, noise, RngStream(0), role="agent"), [1.0])
    assert stoch_grad(q, theta, noise, RngStream(0), role="coordinator")[0] != 1.0


def test_minibatch_gradient(tiny_dataset):
    model = SoftmaxCE(tiny_dataset)
    theta = np.random.default_rng(2).standard_normal(model.dim)
    full = NoiseModel(batch_size=tiny_dataset.n)
    assert_allclose(stoch_grad(model, theta, full, RngStream(0)), model.grad(theta))
    small = NoiseModel(batch_size=8)
    a = stoch_grad(model, theta, small, RngStream(0))
    b = stoch_grad(model, theta, small, RngStream(0))
    assert_array_equal(a, b)
    assert not np.allclose(a, model.grad(theta))


def test_noise_model_validation():
    with pytest.raises(DomainError):
        NoiseModel(sigma_c=-1.0)
    with pytest.raises(DomainError):
        NoiseModel(batch_size=0)
    assert NoiseModel().silent
    assert not NoiseModel(sigma_s=0.1).silent


def test_random_quadratics():
    agents = random_quadratics(4, 3, 2.0, np.random.default_rng(0))
    assert len(agents) == 4
    assert all(a.dim == 3 for a in agents)
    with pytest.raises(DomainError):
        random_quadratics(0, 3, 1.0, np.random.default_rng(0))


def objective_of_kind(kind, data):
    if kind == "quadratic":
        return Quadratic(np.array([0.5, -1.0, 2.0]), curvature=1.7)
    if kind == "scaled_sq_norm":
        return ScaledSqNorm(0.8, 3)
    if kind == "softmax_ce":
        return SoftmaxCE(data, l2=0.1)
    return sum_objective([Quadratic(np.ones(3), 0.5), ScaledSqNorm(2.0)])


KINDS = ["quadratic", "scaled_sq_norm", "softmax_ce", "sum"]


def param_dim(obj):
    return 3 if obj.dim is None else obj.dim


@pytest.mark.parametrize("kind", KINDS)
def test_convexity_on_random_chords(kind, tiny_dataset):
    obj = objective_of_kind(kind, tiny_dataset)
    gen = np.random.default_rng(11)
    d = param_dim(obj)
    for _ in range(300):
        x, y = 3.0 * gen.standard_normal((2, d))
        t = gen.uniform()
        lhs = obj.value(t * x + (1 - t) * y)
        rhs = t * obj.value(x) + (1 - t) * obj.value(y)
        assert lhs <= rhs + 1e-10 * (1.0 + abs(rhs))


@pytest.mark.parametrize("kind", KINDS)
def test_gradient_is_lipschitz_with_declared_constant(kind, tiny_dataset):
    obj = objective_of_kind(kind, tiny_dataset)
    gen = np.random.default_rng(12)
    d = param_dim(obj)
    L = smoothness_of(obj)
    for i in range(1000):
        # mix far-apart and nearby pairs
        scale = 5.0 if i % 2 else 0.01
        x = 3.0 * gen.standard_normal(d)
        y = x + scale * gen.standard_normal(d)
        lhs = np.linalg.norm(obj.grad(x) - obj.grad(y))
        assert lhs <= L * np.linalg.norm(x - y) * (1 + 1e-9) + 1e-12


def test_stochastic_gradient_is_unbiased():
    q = Quadratic(np.array([1.0, -2.0, 0.5, 3.0]))
    theta = np.zeros(4)
    sigma, n = 0.3, 100_000
    noise = NoiseModel(sigma_c=sigma)
    gen = np.random.default_rng(5)
    draws = np.array([stoch_grad(q, theta, noise, gen) for _ in range(n)])
    assert np.all(np.abs(draws.mean(axis=0) - q.grad(theta)) <= 3 * sigma / math.sqrt(n))
