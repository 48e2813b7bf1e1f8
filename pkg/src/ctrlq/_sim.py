"""Euler-Maruyama simulation of the controlled state with actions sampled from a policy at every step."""

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from ._errors import InvalidArgumentError, SimulationBlowUpError
from ._logger import get_logger
from ._model import ProblemSpec, evaluate
from ._policy import GibbsPolicy
from ._util import derive_rng, map_ordered

LOGGER = get_logger('sim')

# States beyond this magnitude are treated as a blow-up.
#
BLOW_UP = 1e8

# Paths are simulated in chunks of this many rows; chunking never changes a row's result.
#
CHUNK = 1024

TRAJECTORY_COLUMNS = ('traj_id', 'k', 't', 'x', 'a', 'r')


@dataclass(frozen=True)
class Trajectory:
    """One discretized episode.

    ``actions[k]`` is applied on [t_k, t_k+1); ``rewards[k]`` is the running reward at the left end point.
    ``log_densities[k]`` is log pi(a_k | t_k, X_k) under the policy that generated the episode.
    """

    times: np.ndarray
    states: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray
    terminal_value: float
    log_densities: np.ndarray | None = None

    def __post_init__(self):
        n = len(self.actions)
        if not (len(self.times) == len(self.states) == n + 1 == len(self.rewards) + 1):
            raise InvalidArgumentError('Trajectory lengths are inconsistent')

        if self.log_densities is not None and len(self.log_densities) != n:
            raise InvalidArgumentError('Trajectory log densities do not match the actions')

    @property
    def steps(self) -> int:
        return len(self.actions)

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0]) if self.steps else 0.0

    def to_rows(self, traj_id: int | None = None) -> list[dict]:
        """Long-format rows ``traj_id, k, t, x, a, r``; the final row has no action or reward."""

        rows = []
        for k, (t, x) in enumerate(zip(self.times, self.states)):
            row = {'traj_id': traj_id, 'k': k, 't': t, 'x': x, 'a': None, 'r': None}
            if k < self.steps:
                row['a'] = self.actions[k]
                row['r'] = self.rewards[k]

            rows.append(row)

        return rows


@dataclass(frozen=True)
class PathBatch:
    """Many episodes on a common time grid, one per row."""

    times: np.ndarray
    states: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray
    log_densities: np.ndarray
    terminal_values: np.ndarray

    @property
    def count(self) -> int:
        return self.states.shape[0]

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0]) if len(self.times) > 1 else 0.0

    def trajectory(self, i: int) -> Trajectory:
        return Trajectory(
            times=self.times,
            states=self.states[i],
            actions=self.actions[i],
            rewards=self.rewards[i],
            terminal_value=float(self.terminal_values[i]),
            log_densities=self.log_densities[i],
        )

    def trajectories(self) -> list[Trajectory]:
        return [self.trajectory(i) for i in range(self.count)]

    @classmethod
    def concatenate(cls, batches: Sequence['PathBatch']) -> 'PathBatch':
        return cls(
            times=batches[0].times,
            states=np.concatenate([b.states for b in batches]),
            actions=np.concatenate([b.actions for b in batches]),
            rewards=np.concatenate([b.rewards for b in batches]),
            log_densities=np.concatenate([b.log_densities for b in batches]),
            terminal_values=np.concatenate([b.terminal_values for b in batches]),
        )


def time_grid(T: float, dt: float, t0: float = 0.0) -> np.ndarray:
    """The uniform grid t0 < ... < T with step dt; dt must divide T - t0 within 1e-9."""

    if not dt > 0:
        raise InvalidArgumentError(f'Time step must be positive, got {dt}')

    if not 0 <= t0 <= T:
        raise InvalidArgumentError(f'Start time {t0} is outside [0, {T}]')

    span = T - t0
    n = int(round(span / dt))
    if abs(n * dt - span) > 1e-9:
        raise InvalidArgumentError(f'Time step {dt} does not divide the horizon {span}')

    return np.linspace(t0, T, n + 1)


def draw_noise(base_seed: int, count: int, steps: int, stream: Sequence[int] = ()) -> tuple[np.ndarray, np.ndarray]:
    """The action uniforms and Brownian normals of ``count`` paths.

    Path i draws ``steps`` uniforms then ``steps`` standard normals from the stream
    derived from ``(base_seed, *stream, i)``.
    """

    uniforms = np.empty((count, steps))
    normals = np.empty((count, steps))
    for i in range(count):
        rng = derive_rng(base_seed, *stream, i)
        uniforms[i] = rng.random(steps)
        normals[i] = rng.standard_normal(steps)

    return uniforms, normals


def _simulate(
    spec: ProblemSpec, policy: GibbsPolicy, x0: np.ndarray, times: np.ndarray, uniforms: np.ndarray, normals: np.ndarray
) -> PathBatch:
    rows = len(x0)
    n = len(times) - 1
    dt = (times[-1] - times[0]) / n if n else 0.0
    sqrt_dt = np.sqrt(dt)

    states = np.empty((rows, n + 1))
    actions = np.empty((rows, n))
    rewards = np.empty((rows, n))
    log_densities = np.empty((rows, n))
    states[:, 0] = x0

    x = states[:, 0]
    for k in range(n):
        t = times[k]
        a, logp = policy.quantile(t, x, uniforms[:, k], with_log_density=True)
        b = evaluate(spec.drift, t, x, a)
        sigma = evaluate(spec.diffusion, t, x)
        rewards[:, k] = evaluate(spec.running_reward, t, x, a)
        actions[:, k] = a
        log_densities[:, k] = logp

        x = x + b * dt + sigma * sqrt_dt * normals[:, k]
        if not np.all(np.isfinite(x)) or np.any(np.abs(x) > BLOW_UP):
            LOGGER.error('State blew up at step %d', k + 1)
            raise SimulationBlowUpError(f'Simulated state is non-finite or exceeds {BLOW_UP:g} at step {k + 1}', step=k + 1)

        states[:, k + 1] = x

    terminal = evaluate(spec.terminal_reward, states[:, -1])

    return PathBatch(times, states, actions, rewards, log_densities, np.array(terminal, dtype=float))


def simulate_paths(
    spec: ProblemSpec,
    policy: GibbsPolicy,
    x0,
    dt: float,
    count: int,
    base_seed: int,
    *,
    t0: float = 0.0,
    stream: Sequence[int] = (),
) -> PathBatch:
    """Simulate ``count`` paths from each start state in ``x0``.

    If ``x0`` is a vector of m states, the result has m * count rows ordered state-major,
    and every start state reuses the same ``count`` noise paths (common random numbers).
    Rows are simulated in fixed-size chunks, possibly in worker threads; the result
    depends only on the arguments.
    """

    if count < 1:
        raise InvalidArgumentError(f'Path count must be at least 1, got {count}')

    times = time_grid(spec.T, dt, t0)
    steps = len(times) - 1
    starts = np.atleast_1d(np.asarray(x0, dtype=float))

    uniforms, normals = draw_noise(base_seed, count, steps, stream)
    rows_x0 = np.repeat(starts, count)
    rows_u = np.tile(uniforms, (len(starts), 1))
    rows_z = np.tile(normals, (len(starts), 1))

    chunks = [slice(i, i + CHUNK) for i in range(0, len(rows_x0), CHUNK)]
    batches = map_ordered(lambda s: _simulate(spec, policy, rows_x0[s], times, rows_u[s], rows_z[s]), chunks)

    return PathBatch.concatenate(batches)


def rollout(spec: ProblemSpec, policy: GibbsPolicy, x0: float, dt: float, rng: np.random.Generator, *, t0: float = 0.0) -> Trajectory:
    """Simulate one episode from (t0, x0) with an Euler-Maruyama step of size dt.

    X_k+1 = X_k + b(t_k, X_k, a_k) dt + sigma(t_k, X_k) sqrt(dt) xi_k, with a_k drawn from pi(. | t_k, X_k).
    The generator supplies all action uniforms first, then all normals.
    """

    times = time_grid(spec.T, dt, t0)
    steps = len(times) - 1
    uniforms = rng.random(steps)[None, :]
    normals = rng.standard_normal(steps)[None, :]

    return _simulate(spec, policy, np.array([float(x0)]), times, uniforms, normals).trajectory(0)


def rollout_batch(
    spec: ProblemSpec, policy: GibbsPolicy, x0: float, dt: float, count: int, base_seed: int, *, t0: float = 0.0
) -> list[Trajectory]:
    """Simulate ``count`` independent episodes; episode i uses the stream derived from (base_seed, i)."""

    return simulate_paths(spec, policy, x0, dt, count, base_seed, t0=t0).trajectories()
