"""Control problem data: the action space, the problem specification, fixtures and assumption checks."""

import math
from collections.abc import Callable, Mapping
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from ._errors import InvalidArgumentError
from ._util import derive_rng

# Problem functions are numpy-broadcastable callables:
# drift(t, x, a), diffusion(t, x), running_reward(t, x, a), terminal_reward(x).
#
ProblemFunction = Callable[..., Any]

# The window in which assumption checks probe the state.
#
PROBE_X = (-5.0, 5.0)

# Below this magnitude, closed forms in the tilt parameter use their series expansion.
#
SERIES_CUTOFF = 1e-4


def evaluate(func: ProblemFunction, *args) -> np.ndarray:
    """Evaluate a problem function and broadcast the result to the broadcast shape of its arguments.

    This allows functions such as ``lambda t, x, a: 0.0`` to be used as problem data.
    """

    shape = np.broadcast_shapes(*(np.shape(a) for a in args))

    return np.broadcast_to(np.asarray(func(*args), dtype=float), shape)


@dataclass(frozen=True)
class ActionSpace:
    """A compact interval of actions, with the number of points used for quadrature over it."""

    lower: float
    upper: float
    dimension: int = 1
    quadrature_points: int = 513

    def __post_init__(self):
        if not (math.isfinite(self.lower) and math.isfinite(self.upper)):
            raise InvalidArgumentError('Action bounds must be finite')

        if self.lower >= self.upper:
            raise InvalidArgumentError(f'Action space needs lower < upper, got [{self.lower}, {self.upper}]')

        if self.dimension != 1:
            raise InvalidArgumentError('Only one-dimensional action spaces are supported')

        if self.quadrature_points < 3:
            raise InvalidArgumentError('At least three quadrature points are required')

    @property
    def volume(self) -> float:
        return self.upper - self.lower

    def grid(self, points: int | None = None) -> np.ndarray:
        """Uniformly spaced quadrature nodes, including both end points."""

        return np.linspace(self.lower, self.upper, points if points is not None else self.quadrature_points)

    def contains(self, a, *, tol: float = 1e-12) -> np.ndarray:
        a = np.asarray(a, dtype=float)

        return (a >= self.lower - tol) & (a <= self.upper + tol)


@dataclass(frozen=True)
class AssumptionBounds:
    """Declared bounds for the spot-check of the regularity assumptions.

    ``b_bar``, ``sigma_bar`` and ``r_bar`` bound ``|b|``, ``|sigma|`` (from above and, as ``1/sigma_bar``,
    from below) and ``|r|``; ``lipschitz`` bounds the Lipschitz quotients of b, sigma, r, h in x.
    """

    b_bar: float = math.inf
    sigma_bar: float = math.inf
    r_bar: float = math.inf
    lipschitz: float = math.inf


@dataclass(frozen=True)
class ProblemSpec:
    """An entropy-regularized control problem with control in the drift only.

    The state follows dX = b(t, X, a) dt + sigma(t, X) dW; the reward is the discounted running
    reward r plus the terminal reward h, with an entropy bonus weighted by the temperature ``gamma``.

    The problem functions must be pure, deterministic, and accept numpy arrays that broadcast together.
    """

    drift: ProblemFunction
    diffusion: ProblemFunction
    running_reward: ProblemFunction
    terminal_reward: ProblemFunction
    beta: float
    T: float
    gamma: float
    action_space: ActionSpace
    state_dimension: int = 1
    name: str = 'custom'
    bounds: AssumptionBounds = field(default_factory=AssumptionBounds)
    fixture: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if not self.T > 0:
            raise InvalidArgumentError(f'Horizon T must be positive, got {self.T}')

        if not self.gamma > 0:
            raise InvalidArgumentError(f'Temperature gamma must be positive, got {self.gamma}')

        if not self.beta >= 0:
            raise InvalidArgumentError(f'Discount beta must be nonnegative, got {self.beta}')

        if self.state_dimension != 1:
            raise InvalidArgumentError('Only one-dimensional states are supported')


@dataclass(frozen=True)
class AssumptionReport:
    max_abs_b: float
    min_abs_sigma: float
    max_abs_sigma: float
    max_abs_r: float
    max_lipschitz_quotient: float
    passed: bool
    failures: tuple[str, ...] = ()


########
# Closed forms of the tilted uniform density phi/(e^phi - 1) e^(phi a) on [0, 1].
########


def _guarded(phi, exact, series):
    phi = np.asarray(phi, dtype=float)
    small = np.abs(phi) < SERIES_CUTOFF
    safe = np.where(small, 1.0, phi)
    out = np.where(small, series(phi), exact(safe))

    return float(out) if out.ndim == 0 else out


def log_tilt_normalizer(phi):
    """log(phi / (e^phi - 1)), the log of the tilted density's normalizing factor."""

    return _guarded(
        phi,
        lambda p: np.log(p / np.expm1(p)),
        lambda p: np.log(1 - p / 2 + p**2 / 12),
    )


def tilted_mean(phi):
    """The mean E(pi^phi) = 1/(1 - e^-phi) - 1/phi of the tilted density."""

    return _guarded(
        phi,
        lambda p: -1 / np.expm1(-p) - 1 / p,
        lambda p: 0.5 + p / 12 - p**3 / 720,
    )


def tilted_variance(phi):
    """The variance 1/phi^2 - e^phi/(e^phi - 1)^2 of the tilted density."""

    return _guarded(
        phi,
        lambda p: 1 / p**2 + 1 / (np.expm1(p) * np.expm1(-p)),
        lambda p: 1 / 12 - p**2 / 240,
    )


def tilted_entropy(phi):
    """The differential entropy -(phi E(pi^phi) + log(phi/(e^phi - 1))) of the tilted density."""

    return -(np.asarray(phi) * tilted_mean(phi) + log_tilt_normalizer(phi))


########
# Fixtures
########


def linear_example(B: float, T: float) -> ProblemSpec:
    """The one-dimensional linear example: b = B a, sigma = 1, r = 0, h(x) = x, beta = 0, gamma = 1, A = [0, 1].

    For any policy pi, J(t, x; pi) = x + (B E(pi) + Ent(pi)) (T - t) and
    q(t, x, a; pi) = B (a - E(pi)) - Ent(pi). The optimal policy is proportional to e^(B a),
    and the optimal value is x + log(integral of e^(B a) over [0, 1]) (T - t).
    The closed forms are in ``spec.fixture``.
    """

    if not T > 0:
        raise InvalidArgumentError(f'Horizon T must be positive, got {T}')

    B = float(B)
    T = float(T)
    log_partition = -log_tilt_normalizer(B)

    fixture = {
        'B': B,
        'value': lambda t, x, mean, entropy: np.asarray(x) + (B * mean + entropy) * (T - np.asarray(t)),
        'q': lambda t, x, a, mean, entropy: B * (np.asarray(a) - mean) - entropy,
        'optimal_value': lambda t, x: np.asarray(x) + log_partition * (T - np.asarray(t)),
        'optimal_exponent': lambda t, x, a: B * np.asarray(a),
        'phi_star': B,
    }

    return ProblemSpec(
        drift=lambda t, x, a: B * np.asarray(a),
        diffusion=lambda t, x: 1.0,
        running_reward=lambda t, x, a: 0.0,
        terminal_reward=lambda x: np.asarray(x, dtype=float),
        beta=0.0,
        T=T,
        gamma=1.0,
        action_space=ActionSpace(0.0, 1.0),
        name='linear_example',
        bounds=AssumptionBounds(b_bar=abs(B), sigma_bar=1.0, r_bar=0.0, lipschitz=1.0),
        fixture=fixture,
    )


def lq_fixture(a_max: float, state_cost: float, action_cost: float, T: float, gamma: float) -> ProblemSpec:
    """A linear-quadratic problem truncated to a compact action box.

    b = a, sigma = 1, r = -(state_cost x^2 + action_cost a^2)/2, h = 0, beta = 0, A = [-a_max, a_max].
    It differs from the classical LQ problem only by the truncation of the actions.
    """

    for name, v in [('a_max', a_max), ('action_cost', action_cost), ('T', T), ('gamma', gamma)]:
        if not v > 0:
            raise InvalidArgumentError(f'{name} must be positive, got {v}')

    if not state_cost >= 0:
        raise InvalidArgumentError(f'state_cost must be nonnegative, got {state_cost}')

    xm = max(abs(PROBE_X[0]), abs(PROBE_X[1]))

    return ProblemSpec(
        drift=lambda t, x, a: np.asarray(a, dtype=float),
        diffusion=lambda t, x: 1.0,
        running_reward=lambda t, x, a: -(state_cost * np.square(x) + action_cost * np.square(a)) / 2,
        terminal_reward=lambda x: 0.0,
        beta=0.0,
        T=float(T),
        gamma=float(gamma),
        action_space=ActionSpace(-float(a_max), float(a_max)),
        name='lq',
        bounds=AssumptionBounds(
            b_bar=a_max,
            sigma_bar=1.0,
            r_bar=(state_cost * xm**2 + action_cost * a_max**2) / 2,
            lipschitz=state_cost * xm,
        ),
        fixture={'a_max': a_max, 'state_cost': state_cost, 'action_cost': action_cost},
    )


########
# Assumption spot-check
########


def _max_quotient(values: np.ndarray, diag: np.ndarray, dx: np.ndarray) -> float:
    mask = np.abs(dx) > 1e-12
    if not mask.any():
        return 0.0

    return float(np.max(np.abs(values - diag)[mask] / np.abs(dx)[mask]))


def check_assumptions(spec: ProblemSpec, probe_count: int, seed: int) -> AssumptionReport:
    """Evaluate the problem functions on pseudo-random probes and compare them with the declared bounds.

    Probes are drawn uniformly from t in [0, T], x in ``PROBE_X`` and a in the action space.
    Lipschitz quotients in x are computed over all probe pairs, holding (t, a) of the first
    probe of the pair fixed. The result depends only on ``(spec, probe_count, seed)``.
    """

    if probe_count < 2:
        raise InvalidArgumentError(f'probe_count must be at least 2, got {probe_count}')

    rng = derive_rng(seed)
    aspace = spec.action_space
    t = rng.uniform(0.0, spec.T, probe_count)
    x = rng.uniform(*PROBE_X, probe_count)
    a = rng.uniform(aspace.lower, aspace.upper, probe_count)

    b = evaluate(spec.drift, t, x, a)
    sigma = evaluate(spec.diffusion, t, x)
    r = evaluate(spec.running_reward, t, x, a)
    h = evaluate(spec.terminal_reward, x)

    # Pair (i, j) evaluates at (t_i, x_j, a_i); the diagonal is the probe itself.
    #
    ti, xj, ai = t[:, None], x[None, :], a[:, None]
    dx = xj - x[:, None]
    lips = [
        _max_quotient(evaluate(spec.drift, ti, xj, ai), b[:, None], dx),
        _max_quotient(evaluate(spec.diffusion, ti, xj), sigma[:, None], dx),
        _max_quotient(evaluate(spec.running_reward, ti, xj, ai), r[:, None], dx),
        _max_quotient(np.broadcast_to(h[None, :], dx.shape), h[:, None], dx),
    ]

    abs_sigma = np.abs(sigma)
    report = {
        'max_abs_b': float(np.max(np.abs(b))),
        'min_abs_sigma': float(np.min(abs_sigma)),
        'max_abs_sigma': float(np.max(abs_sigma)),
        'max_abs_r': float(np.max(np.abs(r))),
        'max_lipschitz_quotient': float(max(lips)),
    }

    bounds = spec.bounds
    slack = 1 + 1e-9
    failures = []
    if not all(np.isfinite(v) for v in report.values()):
        failures.append('non-finite value on the probe set')
    if report['max_abs_b'] > bounds.b_bar * slack:
        failures.append(f'|b| = {report["max_abs_b"]} exceeds {bounds.b_bar}')
    if report['max_abs_sigma'] > bounds.sigma_bar * slack:
        failures.append(f'|sigma| = {report["max_abs_sigma"]} exceeds {bounds.sigma_bar}')
    if not report['min_abs_sigma'] > 0 or report['min_abs_sigma'] * bounds.sigma_bar * slack < 1:
        failures.append(f'|sigma| = {report["min_abs_sigma"]} is below 1/{bounds.sigma_bar}')
    if report['max_abs_r'] > bounds.r_bar * slack:
        failures.append(f'|r| = {report["max_abs_r"]} exceeds {bounds.r_bar}')
    if report['max_lipschitz_quotient'] > bounds.lipschitz * slack:
        failures.append(f'Lipschitz quotient {report["max_lipschitz_quotient"]} exceeds {bounds.lipschitz}')

    return AssumptionReport(**report, passed=not failures, failures=tuple(failures))
