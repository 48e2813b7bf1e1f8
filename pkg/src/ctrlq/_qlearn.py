"""Martingale-loss learning: residuals, semi-q and full q-learning updates, and the example's mean-field drift."""

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np
import param

from ._errors import DivergenceError, InvalidArgumentError
from ._logger import get_logger
from ._model import ActionSpace, ProblemSpec, evaluate, linear_example, log_tilt_normalizer, tilted_entropy, tilted_mean, tilted_variance
from ._policy import GibbsPolicy
from ._sim import PathBatch, Trajectory, simulate_paths
from ._util import derive_rng
from ._value import Estimate, mc_evaluate

LOGGER = get_logger('qlearn')

FD_STEP = 1e-5

# Stream keys: (INIT_STREAM,) draws initial parameters, (EPISODE_STREAM, n, b) episode b of iteration n,
# (EVAL_STREAM, n) Monte Carlo gap evaluation at iteration n.
#
INIT_STREAM = 0
EPISODE_STREAM = 1
EVAL_STREAM = 2


class Schedule(param.Parameterized):
    """Learning rates alpha_n = A / (n^nu + B)."""

    A = param.Number(default=1.0, bounds=(0, None), inclusive_bounds=(False, True), doc='Numerator of the rate')
    B = param.Number(default=10.0, bounds=(0, None), doc='Offset of the denominator')
    nu = param.Number(default=1.0, bounds=(0, 1), inclusive_bounds=(False, True), doc='Decay exponent')

    def rate(self, n) -> np.ndarray | float:
        n = np.asarray(n, dtype=float)
        if np.any(n < 1):
            raise InvalidArgumentError('Schedule iterations start at 1')

        out = self.A / (n**self.nu + self.B)

        return float(out) if out.ndim == 0 else out

    def as_dict(self) -> dict[str, float]:
        return {'A': self.A, 'B': self.B, 'nu': self.nu}


@dataclass(frozen=True)
class ParamFamily:
    """A parametrized value function J(theta; t, x) and q-function q(phi; t, x, a).

    Gradient callables return arrays with a trailing parameter axis. When one is missing,
    central finite differences with step ``fd_step`` are used.
    """

    value: Callable[..., Any]
    q_function: Callable[..., Any]
    theta_dim: int
    phi_dim: int
    grad_theta: Callable[..., Any] | None = None
    grad_phi: Callable[..., Any] | None = None
    name: str = 'custom'
    fd_step: float = FD_STEP

    def J(self, theta, t, x) -> np.ndarray:
        return evaluate(lambda t_, x_: self.value(np.asarray(theta, dtype=float), t_, x_), t, x)

    def q(self, phi, t, x, a) -> np.ndarray:
        return evaluate(lambda t_, x_, a_: self.q_function(np.asarray(phi, dtype=float), t_, x_, a_), t, x, a)

    @staticmethod
    def _fd(func, params: np.ndarray, step: float) -> np.ndarray:
        columns = []
        for i in range(len(params)):
            e = np.zeros(len(params))
            e[i] = step
            columns.append((func(params + e) - func(params - e)) / (2 * step))

        return np.stack(columns, axis=-1)

    def dJ_dtheta(self, theta, t, x, *, analytic: bool = True) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        shape = np.broadcast_shapes(np.shape(t), np.shape(x)) + (self.theta_dim,)
        if analytic and self.grad_theta is not None:
            return np.broadcast_to(np.asarray(self.grad_theta(theta, t, x), dtype=float), shape)

        return np.broadcast_to(self._fd(lambda p: self.J(p, t, x), theta, self.fd_step), shape)

    def dq_dphi(self, phi, t, x, a, *, analytic: bool = True) -> np.ndarray:
        phi = np.asarray(phi, dtype=float)
        shape = np.broadcast_shapes(np.shape(t), np.shape(x), np.shape(a)) + (self.phi_dim,)
        if analytic and self.grad_phi is not None:
            return np.broadcast_to(np.asarray(self.grad_phi(phi, t, x, a), dtype=float), shape)

        return np.broadcast_to(self._fd(lambda p: self.q(p, t, x, a), phi, self.fd_step), shape)

    def check_gradients(self, theta, phi, t, x, a, *, rtol: float = 1e-4) -> bool:
        """Whether the supplied analytic gradients agree with finite differences at the probe points."""

        ok = True
        if self.grad_theta is not None and self.theta_dim:
            an = self.dJ_dtheta(theta, t, x)
            fd = self.dJ_dtheta(theta, t, x, analytic=False)
            ok &= bool(np.allclose(an, fd, rtol=rtol, atol=rtol * 1e-4))

        if self.grad_phi is not None:
            an = self.dq_dphi(phi, t, x, a)
            fd = self.dq_dphi(phi, t, x, a, analytic=False)
            ok &= bool(np.allclose(an, fd, rtol=rtol, atol=rtol * 1e-4))

        return ok

    def policy(self, phi, gamma: float, action_space: ActionSpace, **kwargs) -> GibbsPolicy:
        """The Gibbs policy proportional to exp(q(phi; t, x, a) / gamma)."""

        phi = np.array(phi, dtype=float)

        return GibbsPolicy(lambda t, x, a: self.q_function(phi, t, x, a), gamma, action_space, **kwargs)


def example_q_family(T: float = 1.0) -> ParamFamily:
    """The linear example's family: q(phi; a) = phi a + log(phi/(e^phi - 1)) and J(theta; t, x) = x + theta (T - t).

    exp(q) is a normalized density on [0, 1] for every phi, and dq/dphi = a - E(pi^phi).
    """

    return ParamFamily(
        value=lambda theta, t, x: np.asarray(x, dtype=float) + theta[0] * (T - np.asarray(t, dtype=float)),
        q_function=lambda phi, t, x, a: phi[0] * np.asarray(a, dtype=float) + log_tilt_normalizer(phi[0]),
        theta_dim=1,
        phi_dim=1,
        grad_theta=lambda theta, t, x: (T - np.asarray(t, dtype=float))[..., None],
        grad_phi=lambda phi, t, x, a: (np.asarray(a, dtype=float) - tilted_mean(phi[0]))[..., None],
        name='example',
    )


def example_value_oracle(spec: ProblemSpec) -> Callable[[np.ndarray, Any, Any], np.ndarray]:
    """J(t, x; pi^phi) for the linear example and the example family, as a function of (phi, t, x)."""

    value = spec.fixture.get('value')
    if value is None or spec.gamma != 1.0:
        raise InvalidArgumentError(f'Problem {spec.name!r} has no closed-form value for the example family')

    return lambda phi, t, x: value(t, x, tilted_mean(phi[0]), tilted_entropy(phi[0]))


########
# Residuals and increments
########


def _paths(trajectory: Trajectory | PathBatch) -> PathBatch:
    if isinstance(trajectory, PathBatch):
        return trajectory

    return PathBatch(
        times=trajectory.times,
        states=trajectory.states[None, :],
        actions=trajectory.actions[None, :],
        rewards=trajectory.rewards[None, :],
        log_densities=np.zeros((1, trajectory.steps)) if trajectory.log_densities is None else trajectory.log_densities[None, :],
        terminal_values=np.array([trajectory.terminal_value]),
    )


def _suffix_sums(values: np.ndarray, decay: float) -> np.ndarray:
    """S_k = values_k + decay S_k+1 along axis 1, with S_N = 0; the result has one more column."""

    shape = list(values.shape)
    shape[1] += 1
    out = np.zeros(shape)
    for k in range(values.shape[1] - 1, -1, -1):
        out[:, k] = values[:, k] + decay * out[:, k + 1]

    return out


def martingale_residuals(batch: PathBatch, J: Callable, q: Callable, beta: float) -> np.ndarray:
    """G_k for every path and every k = 0..N.

    G_k = e^(-beta (T - t_k)) h(X_N) - J(t_k, X_k) + sum_j>=k e^(-beta (t_j - t_k)) (r_j - q(t_j, X_j, a_j)) dt.
    """

    times = batch.times
    dt = batch.dt
    t_left = times[None, :-1]
    c = batch.rewards - evaluate(q, t_left, batch.states[:, :-1], batch.actions)
    s = _suffix_sums(c * dt, math.exp(-beta * dt))
    terminal = np.exp(-beta * (times[-1] - times))[None, :] * batch.terminal_values[:, None]

    return terminal - evaluate(J, times[None, :], batch.states) + s


def martingale_residual(trajectory: Trajectory, J: Callable, q: Callable, beta: float, k: int) -> float:
    """The discretized martingale residual G_k of one trajectory; J(t, x) and q(t, x, a) are plain functions."""

    if not 0 <= k <= trajectory.steps:
        raise InvalidArgumentError(f'Index {k} is outside [0, {trajectory.steps}]')

    return float(martingale_residuals(_paths(trajectory), J, q, beta)[0, k])


def _phi_increments(batch: PathBatch, G: np.ndarray, dq: np.ndarray, beta: float, normalize_by_dt: bool) -> np.ndarray:
    """Per-path sum_k dt I_k G_k with I_k = sum_j>=k e^(-beta (t_j - t_k)) dq_j dt."""

    dt = batch.dt
    inner = _suffix_sums(dq * dt, math.exp(-beta * dt))[:, :-1]
    out = (inner * G[:, :-1, None]).sum(axis=1) * dt

    return out / dt if normalize_by_dt else out


def _theta_increments(batch: PathBatch, G: np.ndarray, dJ: np.ndarray) -> np.ndarray:
    return (dJ * G[:, :-1, None]).sum(axis=1) * batch.dt


def _semi_increment(phi, family, J, batch, beta, normalize_by_dt) -> np.ndarray:
    q = lambda t, x, a: family.q(phi, t, x, a)  # noqa: E731
    G = martingale_residuals(batch, J, q, beta)
    dq = family.dq_dphi(phi, batch.times[None, :-1], batch.states[:, :-1], batch.actions)

    return _phi_increments(batch, G, dq, beta, normalize_by_dt)


def _check_finite(n, phi, *arrays):
    if not all(np.all(np.isfinite(a)) for a in arrays):
        LOGGER.error('Non-finite parameter update at iteration %s', n)
        raise DivergenceError(f'Non-finite parameter update at iteration {n}', n=n, phi=np.array(phi))


def sgd_step_semi(
    phi,
    family: ParamFamily,
    J_oracle: Callable,
    trajectory: Trajectory | PathBatch,
    alpha_n: float,
    beta: float,
    *,
    normalize_by_dt: bool = True,
    n: int | None = None,
) -> np.ndarray:
    """One semi-q-learning update with the value function given by ``J_oracle(t, x)``.

    phi' = phi + alpha_n sum_k dt (sum_j>=k e^(-beta (t_j - t_k)) dq/dphi_j dt) G_k, averaged over the
    episodes of a batch. The increment is divided by dt unless ``normalize_by_dt`` is false,
    so its mean tracks the closed-form drift h(phi) rather than dt h(phi).
    """

    if not alpha_n > 0:
        raise InvalidArgumentError(f'Learning rate must be positive, got {alpha_n}')

    phi = np.asarray(phi, dtype=float)
    inc = _semi_increment(phi, family, J_oracle, _paths(trajectory), beta, normalize_by_dt).mean(axis=0)
    new = phi + alpha_n * inc
    _check_finite(n, phi, new)

    return new


def sgd_step_full(
    theta,
    phi,
    family: ParamFamily,
    trajectory: Trajectory | PathBatch,
    alpha_theta_n: float,
    alpha_phi_n: float,
    beta: float,
    *,
    normalize_by_dt: bool = True,
    n: int | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """One q-learning update of both parameters from the same episodes and the same residuals.

    theta' = theta + alpha_theta sum_k dt dJ/dtheta(t_k, X_k) G_k; phi' as in :func:`sgd_step_semi` with J = J(theta; .).
    """

    if not (alpha_theta_n > 0 and alpha_phi_n > 0):
        raise InvalidArgumentError('Learning rates must be positive')

    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    batch = _paths(trajectory)

    J = lambda t, x: family.J(theta, t, x)  # noqa: E731
    q = lambda t, x, a: family.q(phi, t, x, a)  # noqa: E731
    G = martingale_residuals(batch, J, q, beta)
    t_left = batch.times[None, :-1]
    dq = family.dq_dphi(phi, t_left, batch.states[:, :-1], batch.actions)
    dJ = family.dJ_dtheta(theta, t_left, batch.states[:, :-1])

    new_theta = theta + alpha_theta_n * _theta_increments(batch, G, dJ).mean(axis=0)
    new_phi = phi + alpha_phi_n * _phi_increments(batch, G, dq, beta, normalize_by_dt).mean(axis=0)
    _check_finite(n, phi, new_theta, new_phi)

    return new_theta, new_phi


########
# Learning loops
########


@dataclass
class LearnTrace:
    """Per-iteration parameters, gaps and learning rates of a learning run.

    Row n holds the parameters used for episode n, and the rate and clamp of the update that followed it.
    """

    algorithm: str
    schedule: dict[str, float]
    schedule_theta: dict[str, float] | None = None
    n: list[int] = field(default_factory=list)
    theta: list[np.ndarray] = field(default_factory=list)
    phi: list[np.ndarray] = field(default_factory=list)
    value_gap: list[float] = field(default_factory=list)
    phi_error: list[float] = field(default_factory=list)
    alpha_n: list[float] = field(default_factory=list)
    clamped: list[bool] = field(default_factory=list)
    final_theta: np.ndarray | None = None
    final_phi: np.ndarray | None = None

    def __len__(self):
        return len(self.n)

    def to_rows(self) -> list[dict]:
        rows = []
        for i, n in enumerate(self.n):
            row: dict[str, Any] = {'n': n}
            row.update({f'theta_{j}': v for j, v in enumerate(self.theta[i])})
            row.update({f'phi_{j}': v for j, v in enumerate(self.phi[i])})
            row.update({
                'value_gap': self.value_gap[i],
                'phi_error': self.phi_error[i],
                'alpha_n': self.alpha_n[i],
                'clamped': self.clamped[i],
            })
            rows.append(row)

        return rows


def closed_form_gap(spec: ProblemSpec, probe: tuple[float, float]) -> Callable[[GibbsPolicy, int], float]:
    """|J* - J(pi)| at the probe from the problem's closed forms, for state-independent policies.

    Problems without closed forms give NaN gaps.
    """

    t0, x0 = probe
    value = spec.fixture.get('value')
    optimal = spec.fixture.get('optimal_value')
    if value is None or optimal is None:
        return lambda policy, n: math.nan

    j_star = float(optimal(t0, x0))

    def gap(policy: GibbsPolicy, n: int) -> float:
        st = policy.stats(t0, x0)
        return abs(j_star - float(value(t0, x0, st.mean, st.entropy)))

    return gap


def mc_gap(
    spec: ProblemSpec, probe: tuple[float, float], optimal_value: float, n_paths: int, dt: float, base_seed: int
) -> Callable[[GibbsPolicy, int], float]:
    """|J* - J(pi)| at the probe with J(pi) by Monte Carlo on stream (EVAL_STREAM, n)."""

    t0, x0 = probe

    def gap(policy: GibbsPolicy, n: int) -> float:
        est = mc_evaluate(spec, policy, t0, x0, n_paths, dt, base_seed, stream=(EVAL_STREAM, n))
        return abs(optimal_value - est.value)

    return gap


def initial_phi(family: ParamFamily, base_seed: int) -> np.ndarray:
    """phi_1 drawn uniformly from [-1, 1] per component on the initialization stream."""

    return derive_rng(base_seed, INIT_STREAM).uniform(-1.0, 1.0, family.phi_dim)


def _learning_loop(
    spec: ProblemSpec,
    family: ParamFamily,
    value_fn: Callable[[np.ndarray, np.ndarray], Callable],
    theta: np.ndarray,
    schedule_theta: Schedule | None,
    schedule_phi: Schedule,
    n_iters: int,
    dt: float,
    probe: tuple[float, float],
    base_seed: int,
    *,
    algorithm: str,
    batch: int,
    phi0,
    clamp: float,
    normalize_by_dt: bool,
    gap_fn: Callable[[GibbsPolicy, int], float] | None,
    phi_star,
) -> LearnTrace:
    if n_iters < 1:
        raise InvalidArgumentError(f'n_iters must be at least 1, got {n_iters}')

    if batch < 1:
        raise InvalidArgumentError(f'Batch size must be at least 1, got {batch}')

    if not clamp > 0:
        raise InvalidArgumentError(f'Clamp must be positive, got {clamp}')

    phi = initial_phi(family, base_seed) if phi0 is None else np.array(phi0, dtype=float).reshape(family.phi_dim)
    gap_fn = gap_fn if gap_fn is not None else closed_form_gap(spec, probe)
    if phi_star is None and family.name == 'example':
        phi_star = spec.fixture.get('phi_star')

    trace = LearnTrace(
        algorithm=algorithm,
        schedule=schedule_phi.as_dict(),
        schedule_theta=schedule_theta.as_dict() if schedule_theta is not None else None,
    )

    x0 = probe[1]
    for n in range(1, n_iters + 1):
        policy = family.policy(phi, spec.gamma, spec.action_space)
        paths = simulate_paths(spec, policy, x0, dt, batch, base_seed, stream=(EPISODE_STREAM, n))

        J = value_fn(theta, phi)
        q = lambda t, x, a, phi=phi: family.q(phi, t, x, a)  # noqa: E731
        G = martingale_residuals(paths, J, q, spec.beta)
        t_left = paths.times[None, :-1]
        dq = family.dq_dphi(phi, t_left, paths.states[:, :-1], paths.actions)
        alpha = schedule_phi.rate(n)
        new_phi = phi + alpha * _phi_increments(paths, G, dq, spec.beta, normalize_by_dt).mean(axis=0)

        new_theta = theta
        if schedule_theta is not None:
            dJ = family.dJ_dtheta(theta, t_left, paths.states[:, :-1])
            new_theta = theta + schedule_theta.rate(n) * _theta_increments(paths, G, dJ).mean(axis=0)

        trace.n.append(n)
        trace.theta.append(theta.copy())
        trace.phi.append(phi.copy())
        trace.value_gap.append(float(gap_fn(policy, n)))
        trace.phi_error.append(float(np.linalg.norm(phi - phi_star)) if phi_star is not None else math.nan)
        trace.alpha_n.append(alpha)

        try:
            _check_finite(n, phi, new_phi, new_theta)
        except DivergenceError as e:
            trace.clamped.append(False)
            e.trace = trace
            raise

        clipped = np.clip(new_phi, -clamp, clamp)
        was_clamped = bool(np.any(clipped != new_phi))
        if was_clamped:
            LOGGER.warning('Iteration %d: phi %s clamped to [-%g, %g]', n, new_phi, clamp, clamp)

        trace.clamped.append(was_clamped)
        LOGGER.debug('Iteration %d: phi=%s theta=%s gap=%.4g', n, phi, theta, trace.value_gap[-1])

        phi = clipped
        theta = new_theta

    trace.final_phi = phi
    trace.final_theta = theta
    LOGGER.info('%s: %d iterations, final phi %s', algorithm, n_iters, phi)

    return trace


def run_semi_q(
    spec: ProblemSpec,
    family: ParamFamily,
    J_oracle: Callable,
    schedule: Schedule,
    n_iters: int,
    dt: float,
    probe: tuple[float, float],
    base_seed: int,
    *,
    batch: int = 1,
    phi0=None,
    clamp: float = 50.0,
    normalize_by_dt: bool = True,
    gap_fn: Callable[[GibbsPolicy, int], float] | None = None,
    phi_star=None,
) -> LearnTrace:
    """Semi-q-learning: learn phi with the value of the current policy supplied by ``J_oracle(phi, t, x)``.

    Each iteration rolls out ``batch`` episodes from (0, probe x) under pi^phi_n on stream (1, n),
    applies the update, and clamps phi to [-clamp, clamp]. A divergence error carries the partial trace.
    """

    return _learning_loop(
        spec,
        family,
        lambda theta, phi: (lambda t, x: J_oracle(phi, t, x)),
        np.zeros(0),
        None,
        schedule,
        n_iters,
        dt,
        probe,
        base_seed,
        algorithm='semi-q',
        batch=batch,
        phi0=phi0,
        clamp=clamp,
        normalize_by_dt=normalize_by_dt,
        gap_fn=gap_fn,
        phi_star=phi_star,
    )


def run_q_learning(
    spec: ProblemSpec,
    family: ParamFamily,
    schedule_theta: Schedule,
    schedule_phi: Schedule,
    n_iters: int,
    dt: float,
    probe: tuple[float, float],
    base_seed: int,
    *,
    theta0: Sequence[float] | None = None,
    batch: int = 1,
    phi0=None,
    clamp: float = 50.0,
    normalize_by_dt: bool = True,
    gap_fn: Callable[[GibbsPolicy, int], float] | None = None,
    phi_star=None,
) -> LearnTrace:
    """Full q-learning: learn theta and phi together, with J(theta; .) in the residuals.

    Episodes, seeding and clamping are as in :func:`run_semi_q`, so a family whose value ignores theta
    reproduces semi-q-learning with that value as the oracle.
    """

    theta = np.zeros(family.theta_dim) if theta0 is None else np.array(theta0, dtype=float).reshape(family.theta_dim)

    return _learning_loop(
        spec,
        family,
        lambda theta, phi: (lambda t, x: family.J(theta, t, x)),
        theta,
        schedule_theta,
        schedule_phi,
        n_iters,
        dt,
        probe,
        base_seed,
        algorithm='q-learn',
        batch=batch,
        phi0=phi0,
        clamp=clamp,
        normalize_by_dt=normalize_by_dt,
        gap_fn=gap_fn,
        phi_star=phi_star,
    )


########
# Mean-field drift of the example
########


def mean_field_h_closed(phi, T: float):
    """The example's mean-field drift h(phi) = -(phi/2) Var(pi^phi) T, with Var = 1/phi^2 - e^phi/(e^phi - 1)^2."""

    out = -0.5 * np.asarray(phi, dtype=float) * tilted_variance(phi) * T

    return float(out) if np.ndim(out) == 0 else out


def mean_field_h_mc(
    phi: float,
    spec: ProblemSpec | None = None,
    family: ParamFamily | None = None,
    n_episodes: int = 10_000,
    dt: float = 0.01,
    base_seed: int = 0,
    *,
    normalize_by_dt: bool = True,
    J_oracle: Callable | None = None,
    x0: float = 0.0,
) -> Estimate:
    """Monte Carlo estimate of the mean semi-q increment (the update divided by the learning rate) under pi^phi.

    The defaults are the linear example with B = 0, T = 1, the example family and its exact value.
    Without ``normalize_by_dt`` the mean is h(phi) dt (T + dt)/T for the example; with it, h(phi) (T + dt)/T.
    """

    if n_episodes < 1:
        raise InvalidArgumentError(f'n_episodes must be at least 1, got {n_episodes}')

    spec = spec if spec is not None else linear_example(0.0, 1.0)
    family = family if family is not None else example_q_family(spec.T)
    J_oracle = J_oracle if J_oracle is not None else example_value_oracle(spec)

    phi_v = np.atleast_1d(np.asarray(phi, dtype=float))
    policy = family.policy(phi_v, spec.gamma, spec.action_space)
    paths = simulate_paths(spec, policy, x0, dt, n_episodes, base_seed)
    inc = _semi_increment(phi_v, family, lambda t, x: J_oracle(phi_v, t, x), paths, spec.beta, normalize_by_dt)

    return Estimate.from_samples(inc[:, 0])


def predicted_mc_ratio(dt: float, T: float, *, normalize_by_dt: bool) -> float:
    """The ratio E[h_mc] / h_closed for the example at step dt."""

    ratio = (T + dt) / T

    return ratio if normalize_by_dt else ratio * dt


def robbins_monro(
    schedule: Schedule,
    n_iters: int,
    *,
    T: float = 1.0,
    noise_sd: float = 0.1,
    phi0: Sequence[float] | None = None,
    seeds: int = 1,
    base_seed: int = 0,
) -> np.ndarray:
    """Iterate phi_n+1 = phi_n + alpha_n (h(phi_n) + noise_n) with the closed-form drift.

    Returns an array of shape (seeds, n_iters + 1) whose column n - 1 is phi_n. Seed s draws its
    initial value uniformly from [-1, 1] (unless ``phi0`` is given) and then its noise from the
    stream (base_seed, s).
    """

    if n_iters < 1 or seeds < 1:
        raise InvalidArgumentError('n_iters and seeds must be at least 1')

    start = np.empty(seeds)
    noise = np.empty((seeds, n_iters))
    for s in range(seeds):
        rng = derive_rng(base_seed, s)
        start[s] = rng.uniform(-1.0, 1.0)
        noise[s] = noise_sd * rng.standard_normal(n_iters)

    if phi0 is not None:
        start = np.broadcast_to(np.asarray(phi0, dtype=float), (seeds,)).copy()

    out = np.empty((seeds, n_iters + 1))
    out[:, 0] = start
    rates = schedule.rate(np.arange(1, n_iters + 1))
    phi = start
    for n in range(n_iters):
        phi = phi + rates[n] * (mean_field_h_closed(phi, T) + noise[:, n])
        out[:, n + 1] = phi

    return out


def estimate_delta(family: ParamFamily, phi, q_true: Callable, grid: tuple) -> float:
    """The function-approximation gap max |q_true(t, x, a) - q(phi; t, x, a)| over a (t, x, a) grid."""

    t, x, a = np.meshgrid(*(np.asarray(g, dtype=float) for g in grid), indexing='ij')

    return float(np.max(np.abs(evaluate(q_true, t, x, a) - family.q(phi, t, x, a))))
