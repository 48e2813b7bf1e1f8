"""Gibbs (relaxed) feedback policies over a compact action interval."""

from collections.abc import Callable
from dataclasses import dataclass
from typing import Any

import numpy as np
from scipy import integrate, stats as sstats

from ._errors import EvaluationError, InvalidArgumentError
from ._model import ActionSpace, evaluate

RULES = ('trapezoid', 'simpson')


@dataclass(frozen=True)
class PolicyStats:
    mean: float
    entropy: float
    normalizing_constant: float
    variance: float


@dataclass(frozen=True)
class _Grid:
    """The unnormalized density of a policy on the quadrature nodes at one or more states.

    ``shifted`` is ``g/gamma - shift``; ``weights = exp(shifted)`` is at most 1.
    """

    nodes: np.ndarray
    shift: np.ndarray
    shifted: np.ndarray
    weights: np.ndarray
    cdf: np.ndarray
    log_mass: np.ndarray


@dataclass(frozen=True)
class GibbsPolicy:
    """A relaxed feedback policy pi(a | t, x) proportional to exp(g(t, x, a) / gamma) on an action interval.

    The normalizing constant is computed by composite quadrature on ``quadrature_points``
    uniformly spaced nodes. The exponent must accept numpy arrays: t and x with a trailing
    axis of length 1 are broadcast against a vector of actions.

    Parameters
    ----------
    exponent: callable
        g(t, x, a), the unnormalized log preference.
    gamma: float
        The temperature.
    action_space: ActionSpace
        The compact action interval.
    quadrature_points: int | None
        The number of quadrature nodes; defaults to ``action_space.quadrature_points``.
    rule: str
        ``'trapezoid'`` or ``'simpson'``; the rule used for the normalizing constant and moments.
        Sampling always inverts the cumulative trapezoid, which is monotone.
    """

    exponent: Callable[..., Any]
    gamma: float
    action_space: ActionSpace
    quadrature_points: int | None = None
    rule: str = 'trapezoid'

    def __post_init__(self):
        if not self.gamma > 0:
            raise InvalidArgumentError(f'Temperature gamma must be positive, got {self.gamma}')

        if self.rule not in RULES:
            raise InvalidArgumentError(f'Unknown quadrature rule {self.rule!r}; expected one of {RULES}')

        if self.quadrature_points is not None and self.quadrature_points < 3:
            raise InvalidArgumentError('At least three quadrature points are required')

    @classmethod
    def uniform(cls, action_space: ActionSpace, gamma: float = 1.0, **kwargs) -> 'GibbsPolicy':
        """The uniform policy on the action space."""

        return cls(lambda t, x, a: 0.0, gamma, action_space, **kwargs)

    @property
    def nodes(self) -> np.ndarray:
        return self.action_space.grid(self.quadrature_points)

    def _integrate(self, y: np.ndarray, nodes: np.ndarray) -> np.ndarray:
        if self.rule == 'simpson':
            return integrate.simpson(y, x=nodes, axis=-1)

        return integrate.trapezoid(y, x=nodes, axis=-1)

    def _grid(self, t, x) -> _Grid:
        nodes = self.nodes
        t = np.asarray(t, dtype=float)
        x = np.asarray(x, dtype=float)
        shape = np.broadcast_shapes(t.shape, x.shape)

        g = evaluate(self.exponent, t[..., None], x[..., None], nodes) / self.gamma
        g = np.broadcast_to(g, shape + nodes.shape)
        if not np.all(np.isfinite(g)):
            raise EvaluationError('Policy exponent is not finite on the action grid')

        shift = g.max(axis=-1)
        shifted = g - shift[..., None]
        weights = np.exp(shifted)
        cdf = integrate.cumulative_trapezoid(weights, nodes, axis=-1, initial=0)
        if self.rule == 'trapezoid':
            mass = cdf[..., -1]
        else:
            mass = self._integrate(weights, nodes)

        return _Grid(nodes, shift, shifted, weights, cdf, np.log(mass))

    def _log_density_given(self, grid: _Grid, t, x, a) -> np.ndarray:
        g = evaluate(self.exponent, t, x, a) / self.gamma
        if not np.all(np.isfinite(g)):
            raise EvaluationError('Policy exponent is not finite at the requested action')

        return g - grid.shift - grid.log_mass

    def log_density(self, t, x, a) -> np.ndarray | float:
        """The log density log pi(a | t, x); t, x and a broadcast together."""

        a = np.asarray(a, dtype=float)
        if not np.all(self.action_space.contains(a)):
            raise InvalidArgumentError('Action lies outside the action space')

        grid = self._grid(t, x)
        out = self._log_density_given(grid, t, x, a)

        return float(out) if np.ndim(out) == 0 else out

    def density(self, t, x, a) -> np.ndarray | float:
        """The density exp(g(t, x, a)/gamma) / Z(t, x)."""

        return np.exp(self.log_density(t, x, a))

    def grid_density(self, t, x) -> tuple[np.ndarray, np.ndarray]:
        """The quadrature nodes and the normalized density on them."""

        grid = self._grid(t, x)

        return grid.nodes, np.exp(grid.shifted - grid.log_mass[..., None])

    def cdf(self, t: float, x: float, a) -> np.ndarray:
        """The cumulative trapezoid distribution function at a single state, linear between nodes.

        This is the exact law of :meth:`sample`.
        """

        grid = self._grid(t, x)

        return np.interp(a, grid.nodes, grid.cdf / grid.cdf[-1])

    def quantile(self, t, x, u, *, with_log_density: bool = False):
        """Invert the cumulative trapezoid at probabilities u in [0, 1).

        t, x and u broadcast together. Within a cell the inverse is linear.
        If ``with_log_density`` is set, the exact log density at the returned actions is also returned.
        """

        u = np.asarray(u, dtype=float)

        # The grid is built once per distinct state; u may carry extra draws per state.
        #
        grid = self._grid(t, x)
        nodes = grid.nodes
        shape = np.broadcast_shapes(grid.shift.shape, u.shape)
        cdf = np.broadcast_to(grid.cdf, shape + nodes.shape)
        target = u * cdf[..., -1]

        k = np.clip((cdf < target[..., None]).sum(axis=-1) - 1, 0, len(nodes) - 2)
        lo = np.take_along_axis(cdf, k[..., None], axis=-1)[..., 0]
        hi = np.take_along_axis(cdf, k[..., None] + 1, axis=-1)[..., 0]
        width = hi - lo
        frac = np.clip(np.where(width > 0, (target - lo) / np.where(width > 0, width, 1.0), 0.0), 0.0, 1.0)
        a = np.minimum(nodes[k] + frac * (nodes[k + 1] - nodes[k]), self.action_space.upper)

        if with_log_density:
            return a, self._log_density_given(grid, t, x, a)

        return a

    def sample(self, t: float, x: float, rng: np.random.Generator) -> float:
        """Draw one action from pi(. | t, x) using one uniform from ``rng``."""

        return float(self.quantile(t, x, rng.random()))

    def sample_many(self, t, x, rng: np.random.Generator) -> np.ndarray:
        """Draw one action per state; t and x broadcast, and ``rng`` supplies one uniform per state."""

        shape = np.broadcast_shapes(np.shape(t), np.shape(x))

        return self.quantile(t, x, rng.random(shape))

    def stats(self, t: float, x: float) -> PolicyStats:
        """Mean, entropy, normalizing constant and variance at a single state, by the policy's quadrature rule."""

        grid = self._grid(t, x)
        nodes = grid.nodes
        p = np.exp(grid.shifted - grid.log_mass)
        log_p = grid.shifted - grid.log_mass

        mean = float(self._integrate(nodes * p, nodes))
        variance = float(self._integrate((nodes - mean) ** 2 * p, nodes))
        entropy = float(-self._integrate(p * log_p, nodes))
        z = float(np.exp(grid.shift + grid.log_mass))

        return PolicyStats(mean=mean, entropy=entropy, normalizing_constant=z, variance=variance)


def tv_distance(p: GibbsPolicy, q: GibbsPolicy, t: float, x: float) -> float:
    """Total variation distance (1/2) integral |p - q| da at (t, x), by quadrature on the finer of the two grids."""

    if p.action_space.lower != q.action_space.lower or p.action_space.upper != q.action_space.upper:
        raise InvalidArgumentError('Policies are defined on different action spaces')

    points = max(len(p.nodes), len(q.nodes))
    nodes = p.action_space.grid(points)
    dp = np.exp(p.log_density(t, x, nodes))
    dq = np.exp(q.log_density(t, x, nodes))
    d = 0.5 * float(integrate.trapezoid(np.abs(dp - dq), x=nodes))

    return min(max(d, 0.0), 1.0)


def ks_statistic(policy: GibbsPolicy, t: float, x: float, samples):
    """One-sample Kolmogorov-Smirnov test of samples against the policy's distribution at (t, x).

    Returns the scipy test result; ``statistic`` and ``pvalue`` are the useful fields.
    """

    return sstats.kstest(np.asarray(samples, dtype=float), lambda a: policy.cdf(t, x, a))
