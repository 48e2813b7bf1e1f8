"""Policy evaluation, value surfaces, and the finite-difference oracle for the optimal exploratory value."""

import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse import linalg as splinalg
from scipy.special import logsumexp

from ._errors import ConfigurationError, EvaluationError, InvalidArgumentError, OutOfDomainError
from ._logger import get_logger
from ._model import ProblemSpec, evaluate
from ._policy import GibbsPolicy
from ._sim import PathBatch, simulate_paths

LOGGER = get_logger('value')

# Explicit HJB steps must satisfy dt <= CFL_SAFETY * dx^2 / sigma_bar^2.
#
CFL_SAFETY = 0.9

SCHEMES = ('explicit', 'imex')


@dataclass(frozen=True)
class Estimate:
    """A Monte Carlo estimate; ``stderr`` is the sample standard deviation over sqrt(sample_count)."""

    value: float
    stderr: float
    sample_count: int

    @classmethod
    def from_samples(cls, samples: np.ndarray) -> 'Estimate':
        samples = np.asarray(samples, dtype=float)
        n = len(samples)
        stderr = float(np.std(samples, ddof=1) / math.sqrt(n)) if n > 1 else 0.0

        return cls(float(np.mean(samples)), stderr, n)


@dataclass(frozen=True)
class ValueSurface:
    """A value function tabulated on a (t, x) grid, with bilinear interpolation.

    ``values[i, j]`` is the value at ``(t_grid[i], x_grid[j])``.
    """

    t_grid: np.ndarray
    x_grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.t_grid, dtype=float)
        x = np.asarray(self.x_grid, dtype=float)
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, 't_grid', t)
        object.__setattr__(self, 'x_grid', x)
        object.__setattr__(self, 'values', v)

        if t.ndim != 1 or x.ndim != 1 or len(t) == 0 or len(x) == 0:
            raise InvalidArgumentError('Surface grids must be non-empty vectors')

        if np.any(np.diff(t) <= 0) or np.any(np.diff(x) <= 0):
            raise InvalidArgumentError('Surface grids must be strictly increasing')

        if v.shape != (len(t), len(x)):
            raise InvalidArgumentError(f'Surface values have shape {v.shape}, expected {(len(t), len(x))}')

        if not np.all(np.isfinite(v)):
            raise EvaluationError('Surface values must be finite')

    def _check(self, t: np.ndarray, x: np.ndarray, clamp: bool) -> tuple[np.ndarray, np.ndarray]:
        tol = 1e-12
        t0, t1 = self.t_grid[0], self.t_grid[-1]
        x0, x1 = self.x_grid[0], self.x_grid[-1]
        if np.any(t < t0 - tol) or np.any(t > t1 + tol):
            raise OutOfDomainError(f'Time outside the surface grid [{t0}, {t1}]')

        if not clamp and (np.any(x < x0 - tol) or np.any(x > x1 + tol)):
            raise OutOfDomainError(f'State outside the surface grid [{x0}, {x1}]')

        return np.clip(t, t0, t1), np.clip(x, x0, x1)

    def __call__(self, t, x):
        """Bilinear interpolation of the surface."""

        t, x = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(x, dtype=float))
        t, x = self._check(t, x, clamp=False)
        out = _bilinear(self.t_grid, self.x_grid, self.values, t, x)

        return float(out) if out.ndim == 0 else out

    def to_rows(self) -> list[dict]:
        """Long-format rows ``t, x, v``."""

        return [
            {'t': t, 'x': x, 'v': self.values[i, j]} for i, t in enumerate(self.t_grid) for j, x in enumerate(self.x_grid)
        ]


def _locate(grid: np.ndarray, v: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    if len(grid) == 1:
        zero = np.zeros(v.shape, dtype=int)
        return zero, zero, np.zeros(v.shape)

    i = np.clip(np.searchsorted(grid, v, side='right') - 1, 0, len(grid) - 2)
    w = (v - grid[i]) / (grid[i + 1] - grid[i])

    return i, i + 1, w


def _bilinear(t_grid, x_grid, table, t, x) -> np.ndarray:
    i0, i1, wt = _locate(t_grid, t)
    j0, j1, wx = _locate(x_grid, x)
    lower = (1 - wx) * table[i0, j0] + wx * table[i0, j1]
    upper = (1 - wx) * table[i1, j0] + wx * table[i1, j1]

    return (1 - wt) * lower + wt * upper


def gradient(surface: ValueSurface, t, x, *, clamp: bool = False):
    """The x-derivative of a surface at (t, x).

    Central differences are taken at the grid columns (one-sided at the two edge columns),
    interpolated linearly in time, then linearly in x. The result is exact for surfaces that
    are affine, or quadratic, in x.

    If ``clamp`` is set, states outside the x grid use the derivative at the nearest edge;
    otherwise they raise :class:`OutOfDomainError`.
    """

    if len(surface.x_grid) < 2:
        raise OutOfDomainError('A surface needs at least two x nodes for a gradient')

    t, x = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(x, dtype=float))
    t, x = surface._check(t, x, clamp)
    slopes = np.gradient(surface.values, surface.x_grid, axis=1, edge_order=1)
    out = _bilinear(surface.t_grid, surface.x_grid, slopes, t, x)

    return float(out) if out.ndim == 0 else out


########
# Monte Carlo evaluation
########


def discounted_returns(spec: ProblemSpec, batch: PathBatch, *, entropy: bool = True) -> np.ndarray:
    """Per-path discounted returns of a batch from its start time.

    Left-end-point sums of e^(-beta (t_k - t)) (r_k - gamma log pi_k) dt plus the discounted terminal reward.
    """

    t = batch.times[0]
    discount = np.exp(-spec.beta * (batch.times - t))
    running = batch.rewards
    if entropy:
        running = running - spec.gamma * batch.log_densities

    return (running * discount[:-1]).sum(axis=1) * batch.dt + discount[-1] * batch.terminal_values


def _check_time(spec: ProblemSpec, t: float):
    if not -1e-12 <= t <= spec.T + 1e-12:
        raise InvalidArgumentError(f'Evaluation time {t} is outside [0, {spec.T}]')


def _evaluate(spec, policy, t, x, n_paths, dt, base_seed, stream, entropy) -> Estimate:
    _check_time(spec, t)
    if n_paths < 1:
        raise InvalidArgumentError(f'Path count must be at least 1, got {n_paths}')

    if abs(spec.T - t) <= 1e-12:
        h = float(evaluate(spec.terminal_reward, float(x)))
        return Estimate(h, 0.0, n_paths)

    batch = simulate_paths(spec, policy, x, dt, n_paths, base_seed, t0=t, stream=stream)

    return Estimate.from_samples(discounted_returns(spec, batch, entropy=entropy))


def mc_evaluate(
    spec: ProblemSpec,
    policy: GibbsPolicy,
    t: float,
    x: float,
    n_paths: int,
    dt: float,
    base_seed: int,
    *,
    stream: Sequence[int] = (),
) -> Estimate:
    """Monte Carlo estimate of the entropy-regularized value J(t, x; pi).

    Each path contributes its discounted running reward plus the entropy bonus
    -gamma log pi(a_k | t_k, X_k) at the sampled actions, plus the discounted terminal reward.
    """

    return _evaluate(spec, policy, t, x, n_paths, dt, base_seed, stream, entropy=True)


def mc_evaluate_original(
    spec: ProblemSpec,
    policy: GibbsPolicy,
    t: float,
    x: float,
    n_paths: int,
    dt: float,
    base_seed: int,
    *,
    stream: Sequence[int] = (),
) -> Estimate:
    """Monte Carlo estimate of the value of the original (unregularized) objective under a relaxed policy."""

    return _evaluate(spec, policy, t, x, n_paths, dt, base_seed, stream, entropy=False)


def fit_surface(
    spec: ProblemSpec,
    policy: GibbsPolicy,
    t_grid,
    x_grid,
    n_paths: int,
    dt: float,
    base_seed: int,
    *,
    stream: Sequence[int] = (),
) -> ValueSurface:
    """Tabulate :func:`mc_evaluate` on a grid.

    Every node uses the same noise paths (common random numbers), so differences between
    nodes are free of independent Monte Carlo noise. The row at t = T is exactly h(x).
    """

    t_grid = np.asarray(t_grid, dtype=float)
    x_grid = np.asarray(x_grid, dtype=float)
    if len(t_grid) == 0 or len(x_grid) == 0:
        raise InvalidArgumentError('Surface grids must be non-empty')

    values = np.empty((len(t_grid), len(x_grid)))
    for i, t in enumerate(t_grid):
        _check_time(spec, t)
        if abs(spec.T - t) <= 1e-12:
            values[i] = evaluate(spec.terminal_reward, x_grid)
            continue

        batch = simulate_paths(spec, policy, x_grid, dt, n_paths, base_seed, t0=t, stream=stream)
        returns = discounted_returns(spec, batch).reshape(len(x_grid), n_paths)
        values[i] = returns.mean(axis=1)

    LOGGER.debug('Fitted a %dx%d surface with %d paths per node', len(t_grid), len(x_grid), n_paths)

    return ValueSurface(t_grid, x_grid, values)


def gibbs_policy_from_surface(spec: ProblemSpec, surface: ValueSurface, *, clamp: bool = False, **kwargs) -> GibbsPolicy:
    """The Gibbs policy with exponent b(t, x, a) dJ/dx(t, x) + r(t, x, a) and the problem's temperature.

    With ``clamp`` set, states beyond the surface's x grid use the edge gradient instead of raising.
    """

    def exponent(t, x, a):
        p = gradient(surface, t, x, clamp=clamp)
        return evaluate(spec.drift, t, x, a) * p + evaluate(spec.running_reward, t, x, a)

    return GibbsPolicy(exponent, spec.gamma, spec.action_space, **kwargs)


optimal_policy = gibbs_policy_from_surface


########
# HJB oracle
########


def _gibbs_term(spec: ProblemSpec, t: float, x: np.ndarray, p: np.ndarray, nodes: np.ndarray, log_w: np.ndarray) -> np.ndarray:
    """gamma log integral exp((b p + r)/gamma) da at every x, by trapezoid weights in log space."""

    xs = x[:, None]
    e = (evaluate(spec.drift, t, xs, nodes) * p[:, None] + evaluate(spec.running_reward, t, xs, nodes)) / spec.gamma

    return spec.gamma * logsumexp(e + log_w, axis=1)


def hjb_solve(spec: ProblemSpec, t_steps: int, x_grid, *, scheme: str = 'explicit') -> ValueSurface:
    """Solve the exploratory HJB equation backward from v(T, .) = h on a uniform x grid.

    v_t + (1/2) sigma^2 v_xx + gamma log integral exp((b v_x + r)/gamma) da - beta v = 0.

    The action integral uses trapezoid quadrature on the problem's action grid. At both x ends the
    second derivative is set to zero (linear extrapolation).

    ``scheme='explicit'`` steps everything explicitly and requires dt <= 0.9 dx^2 / sigma_bar^2;
    ``scheme='imex'`` treats diffusion and discount implicitly with a sparse solve and the
    Gibbs term explicitly, with no step restriction.
    """

    if scheme not in SCHEMES:
        raise InvalidArgumentError(f'Unknown HJB scheme {scheme!r}; expected one of {SCHEMES}')

    if t_steps < 1:
        raise InvalidArgumentError(f't_steps must be at least 1, got {t_steps}')

    x = np.asarray(x_grid, dtype=float)
    if x.ndim != 1 or len(x) < 3:
        raise InvalidArgumentError('The HJB x grid needs at least three points')

    dx = (x[-1] - x[0]) / (len(x) - 1)
    if dx <= 0 or np.max(np.abs(np.diff(x) - dx)) > 1e-9 * max(1.0, abs(dx)):
        raise InvalidArgumentError('The HJB x grid must be increasing and uniform')

    T = spec.T
    dt = T / t_steps
    t_grid = np.linspace(0.0, T, t_steps + 1)

    tt, xx = np.meshgrid(t_grid, x, indexing='ij')
    sigma2 = np.square(evaluate(spec.diffusion, tt, xx))
    sigma_bar2 = float(sigma2.max())
    if scheme == 'explicit' and dt > CFL_SAFETY * dx**2 / max(sigma_bar2, 1e-300):
        required = math.ceil(T * sigma_bar2 / (CFL_SAFETY * dx**2))
        raise ConfigurationError(f'Explicit HJB step violates the CFL condition; use at least {required} t_steps', required=required)

    nodes = spec.action_space.grid()
    w = np.full(len(nodes), nodes[1] - nodes[0])
    w[[0, -1]] *= 0.5
    log_w = np.log(w)

    values = np.empty((t_steps + 1, len(x)))
    values[-1] = evaluate(spec.terminal_reward, x)
    m = len(x)

    for n in range(t_steps, 0, -1):
        v = values[n]
        t = t_grid[n]
        p = np.gradient(v, dx, edge_order=2)
        g = _gibbs_term(spec, t, x, p, nodes, log_w)

        if scheme == 'explicit':
            vxx = np.zeros(m)
            vxx[1:-1] = (v[2:] - 2 * v[1:-1] + v[:-2]) / dx**2
            new = v + dt * (0.5 * sigma2[n] * vxx + g - spec.beta * v)
            new[0] = 2 * new[1] - new[2]
            new[-1] = 2 * new[-2] - new[-3]
        else:
            c = 0.5 * sigma2[n - 1] / dx**2
            main = 1 + dt * (2 * c + spec.beta)
            lower = -dt * c[1:]
            upper = -dt * c[:-1]
            main[[0, -1]] = 1.0
            upper[0] = -2.0
            lower[-1] = -2.0
            far_upper = np.zeros(m - 2)
            far_lower = np.zeros(m - 2)
            far_upper[0] = 1.0
            far_lower[-1] = 1.0

            # Rows 0 and m-1 are v0 - 2 v1 + v2 = 0 and its mirror.
            #
            a = sparse.diags([far_lower, lower, main, upper, far_upper], [-2, -1, 0, 1, 2], format='csc')
            rhs = v + dt * g
            rhs[[0, -1]] = 0.0
            new = splinalg.spsolve(a, rhs)

        if not np.all(np.isfinite(new)):
            raise EvaluationError(f'HJB solution became non-finite at t = {t_grid[n - 1]}')

        values[n - 1] = new

    LOGGER.debug('Solved HJB with %d t steps on %d x nodes (%s)', t_steps, m, scheme)

    return ValueSurface(t_grid, x, values)
