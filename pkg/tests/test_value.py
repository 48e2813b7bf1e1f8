import math

import numpy as np
import pytest

from ctrlq import (
    ActionSpace,
    ConfigurationError,
    Estimate,
    GibbsPolicy,
    InvalidArgumentError,
    OutOfDomainError,
    ProblemSpec,
    ValueSurface,
    fit_surface,
    gibbs_policy_from_surface,
    gradient,
    hjb_solve,
    linear_example,
    mc_evaluate,
    mc_evaluate_original,
    tv_distance,
)
from ctrlq._model import tilted_entropy, tilted_mean

LOG_E_MINUS_1 = math.log(math.e - 1)


def tilted(spec, phi):
    return GibbsPolicy(lambda t, x, a: phi * np.asarray(a), 1.0, spec.action_space)


def example_value(B, phi, t, x, T=1.0):
    return x + (B * tilted_mean(phi) + tilted_entropy(phi)) * (T - t)


def test_estimate_from_samples():
    est = Estimate.from_samples([1.0, 2.0, 3.0])

    assert est.value == 2.0
    assert est.stderr == pytest.approx(1 / math.sqrt(3))
    assert est.sample_count == 3
    assert Estimate.from_samples([5.0]).stderr == 0.0


def test_surface_interpolation():
    t = np.array([0.0, 1.0])
    x = np.array([0.0, 1.0, 2.0])
    surface = ValueSurface(t, x, np.array([[0.0, 1.0, 2.0], [10.0, 11.0, 12.0]]))

    assert surface(0.5, 1.5) == pytest.approx(6.5)
    assert surface(1.0, 2.0) == pytest.approx(12.0)
    assert np.allclose(surface(0.0, np.array([0.5, 1.5])), [0.5, 1.5])
    assert gradient(surface, 0.3, 0.7) == pytest.approx(1.0)

    with pytest.raises(OutOfDomainError):
        surface(0.5, 3.0)

    with pytest.raises(OutOfDomainError):
        surface(1.5, 1.0)

    assert gradient(surface, 0.5, 5.0, clamp=True) == pytest.approx(1.0)


def test_bad_surface():
    with pytest.raises(InvalidArgumentError, match='increasing'):
        ValueSurface([0.0, 0.0], [0.0, 1.0], np.zeros((2, 2)))

    with pytest.raises(InvalidArgumentError, match='shape'):
        ValueSurface([0.0, 1.0], [0.0, 1.0], np.zeros((3, 2)))


def test_surface_rows():
    surface = ValueSurface([0.0, 1.0], [0.0], np.array([[1.0], [2.0]]))

    assert surface.to_rows() == [{'t': 0.0, 'x': 0.0, 'v': 1.0}, {'t': 1.0, 'x': 0.0, 'v': 2.0}]


def test_value_at_horizon(example1):
    est = mc_evaluate(example1, GibbsPolicy.uniform(example1.action_space), 1.0, 0.7, 10, 0.1, 0)

    assert est.value == pytest.approx(0.7)
    assert est.stderr == 0.0


@pytest.mark.parametrize('B,phi', [(0.0, 0.0), (1.0, 2.0)])
def test_mc_evaluate_example(B, phi):
    spec = linear_example(B, 1.0)
    est = mc_evaluate(spec, tilted(spec, phi), 0.0, 0.5, 2000, 0.05, 1)

    assert abs(est.value - example_value(B, phi, 0.0, 0.5)) <= 4 * est.stderr


def test_mc_evaluate_original(example1):
    phi = -1.0
    est = mc_evaluate_original(example1, tilted(example1, phi), 0.5, 0.0, 2000, 0.05, 2)

    assert abs(est.value - tilted_mean(phi) * 0.5) <= 4 * est.stderr


def test_mc_evaluate_deterministic(example1):
    policy = tilted(example1, 1.0)
    e1 = mc_evaluate(example1, policy, 0.0, 0.0, 50, 0.1, 3, stream=(2, 0))
    e2 = mc_evaluate(example1, policy, 0.0, 0.0, 50, 0.1, 3, stream=(2, 0))
    e3 = mc_evaluate(example1, policy, 0.0, 0.0, 50, 0.1, 3, stream=(2, 1))

    assert e1 == e2
    assert e1 != e3


def test_mc_evaluate_bad_time(example1):
    with pytest.raises(InvalidArgumentError, match='outside'):
        mc_evaluate(example1, tilted(example1, 0.0), 1.5, 0.0, 10, 0.1, 0)


def test_fit_surface_gradient_is_exact(example1):
    """For a state-independent policy common random numbers make the fitted surface exactly affine in x."""

    surface = fit_surface(example1, tilted(example1, 0.3), [0.0, 0.5, 1.0], [-1.0, 0.0, 1.0], 20, 0.1, 0)

    assert np.allclose(surface.values[-1], [-1.0, 0.0, 1.0])
    assert np.allclose(gradient(surface, [0.0, 0.25, 0.5], [0.0, 0.5, -0.9]), 1.0)


def test_gibbs_policy_from_surface(example1):
    surface = ValueSurface([0.0, 1.0], [-1.0, 1.0], np.array([[-1.0, 1.0], [-1.0, 1.0]]))
    policy = gibbs_policy_from_surface(example1, surface)

    assert policy.stats(0.0, 0.0).mean == pytest.approx(tilted_mean(1.0), abs=1e-5)

    with pytest.raises(OutOfDomainError):
        policy.stats(0.0, 2.0)

    clamped = gibbs_policy_from_surface(example1, surface, clamp=True)
    assert clamped.stats(0.0, 2.0).mean == pytest.approx(tilted_mean(1.0), abs=1e-5)


@pytest.mark.parametrize('scheme', ['imex', 'explicit'])
def test_hjb_linear_example(example1, scheme):
    x = np.linspace(-2.0, 2.0, 41)
    surface = hjb_solve(example1, 200, x, scheme=scheme)

    assert surface(0.0, 0.0) == pytest.approx(LOG_E_MINUS_1, abs=1e-5)
    assert surface(0.5, 1.0) == pytest.approx(1.0 + 0.5 * LOG_E_MINUS_1, abs=1e-5)


def test_hjb_optimal_policy(example1):
    """The oracle's Gibbs policy is the optimal policy proportional to e^a."""

    surface = hjb_solve(example1, 50, np.linspace(-2.0, 2.0, 21), scheme='imex')
    policy = gibbs_policy_from_surface(example1, surface)

    assert tv_distance(policy, tilted(example1, 1.0), 0.0, 0.0) < 1e-6


def test_hjb_cfl(example1):
    x = np.linspace(-2.0, 2.0, 41)

    with pytest.raises(ConfigurationError, match='CFL') as exc:
        hjb_solve(example1, 50, x, scheme='explicit')

    assert exc.value.required == 112
    hjb_solve(example1, 112, x, scheme='explicit')


def test_hjb_bad_arguments(example1):
    with pytest.raises(InvalidArgumentError, match='scheme'):
        hjb_solve(example1, 10, np.linspace(-1, 1, 11), scheme='crank')

    with pytest.raises(InvalidArgumentError, match='uniform'):
        hjb_solve(example1, 10, [0.0, 0.1, 0.3, 0.4], scheme='imex')


def heat_problem() -> ProblemSpec:
    """No control and no running reward: the HJB equation is the backward heat equation."""

    return ProblemSpec(
        drift=lambda t, x, a: 0.0,
        diffusion=lambda t, x: 1.0,
        running_reward=lambda t, x, a: 0.0,
        terminal_reward=lambda x: np.cos(x),
        beta=0.0,
        T=1.0,
        gamma=1.0,
        action_space=ActionSpace(0.0, 1.0),
    )


def test_hjb_grid_convergence():
    """The exact solution is e^(-(T - t)/2) cos x; refining the grid 4x in dt and dx shrinks the error at least 3x."""

    spec = heat_problem()
    exact = math.exp(-0.5)

    coarse = hjb_solve(spec, 50, np.linspace(-8.0, 8.0, 41), scheme='imex')
    fine = hjb_solve(spec, 200, np.linspace(-8.0, 8.0, 161), scheme='imex')

    coarse_error = abs(coarse(0.0, 0.0) - exact)
    fine_error = abs(fine(0.0, 0.0) - exact)
    assert coarse_error < 1e-2
    assert fine_error * 3 <= coarse_error


@pytest.mark.slow
def test_hjb_example_fine_grid(example1):
    x = np.linspace(-3.0, 3.0, 601)
    surface = hjb_solve(example1, 1000, x, scheme='imex')

    assert surface(0.0, 0.0) == pytest.approx(LOG_E_MINUS_1, abs=5e-3)


@pytest.mark.slow
@pytest.mark.parametrize('B', [0.0, 1.0])
def test_mc_evaluate_example_probes(B):
    spec = linear_example(B, 1.0)
    policy = tilted(spec, 0.7)
    for t, x in [(0.0, 0.0), (0.0, 1.0), (0.2, -1.0), (0.5, 0.5), (0.8, 2.0)]:
        est = mc_evaluate(spec, policy, t, x, 10_000, 0.01, 5)
        assert abs(est.value - example_value(B, 0.7, t, x)) <= 3 * est.stderr


def test_hjb_value_dominates(example1):
    """No policy beats the optimal value: each estimate stays below v(0, 0) up to three standard errors."""

    v = hjb_solve(example1, 200, np.linspace(-2.0, 2.0, 41), scheme='imex')(0.0, 0.0)
    policies = [tilted(example1, phi) for phi in [-2.0, 0.0, 0.5, 1.0, 3.0]]
    policies.append(GibbsPolicy(lambda t, x, a: -4.0 * np.asarray(x) * a, 1.0, example1.action_space))

    for i, policy in enumerate(policies):
        est = mc_evaluate(example1, policy, 0.0, 0.0, 4000, 0.05, 30 + i)
        assert est.value <= v + 3 * est.stderr


def test_gradient_of_square():
    x = np.linspace(-2.0, 2.0, 401)
    surface = ValueSurface([0.0, 1.0], x, np.vstack([x**2, x**2]))
    points = np.array([-1.955, -0.5, 0.0, 0.123, 1.0, 1.987])

    assert np.allclose(gradient(surface, 0.5, points), 2 * points, rtol=0, atol=1e-3)
