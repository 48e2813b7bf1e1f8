"""Model-based exploratory policy improvement and the fit of its contraction rate."""

import math
from dataclasses import dataclass, field

import numpy as np
import param
from scipy import stats

from ._errors import InsufficientDataError, InvalidArgumentError
from ._logger import get_logger
from ._model import ProblemSpec
from ._policy import GibbsPolicy, tv_distance
from ._value import ValueSurface, fit_surface, gibbs_policy_from_surface, hjb_solve, mc_evaluate

LOGGER = get_logger('improve')

# Gaps within this many standard errors of zero measure Monte Carlo error, not contraction.
#
NOISE_FLOOR = 3.0


class MCConfig(param.Parameterized):
    """Monte Carlo and grid settings for policy improvement."""

    t_points = param.Integer(default=11, bounds=(2, None), doc='Number of time nodes of fitted surfaces, from 0 to T')
    x_min = param.Number(default=-3.0, doc='Lower end of the fitted surface x grid')
    x_max = param.Number(default=3.0, doc='Upper end of the fitted surface x grid')
    x_points = param.Integer(default=13, bounds=(2, None), doc='Number of x nodes of fitted surfaces')
    n_paths = param.Integer(default=200, bounds=(1, None), doc='Paths per surface node')
    probe_paths = param.Integer(default=2000, bounds=(1, None), doc='Paths for the value at the probe point')
    dt = param.Number(default=0.02, bounds=(0, None), inclusive_bounds=(False, True), doc='Simulation time step')
    oracle_t_steps = param.Integer(default=400, bounds=(1, None), doc='HJB oracle time steps')
    oracle_x_min = param.Number(default=-6.0, doc='Lower end of the HJB oracle x grid')
    oracle_x_max = param.Number(default=6.0, doc='Upper end of the HJB oracle x grid')
    oracle_x_points = param.Integer(default=241, bounds=(3, None), doc='HJB oracle x nodes')
    oracle_scheme = param.Selector(objects=['imex', 'explicit'], default='imex', doc='HJB oracle scheme')

    def t_grid(self, T: float) -> np.ndarray:
        return np.linspace(0.0, T, self.t_points)

    def x_grid(self) -> np.ndarray:
        if not self.x_min < self.x_max:
            raise InvalidArgumentError(f'x_min {self.x_min} must be below x_max {self.x_max}')

        return np.linspace(self.x_min, self.x_max, self.x_points)

    def oracle_x_grid(self) -> np.ndarray:
        return np.linspace(self.oracle_x_min, self.oracle_x_max, self.oracle_x_points)


@dataclass
class PiTrace:
    """Per-iteration values, gaps and policy distances of a policy improvement run at a probe point."""

    probe: tuple[float, float]
    optimal_value: float
    n: list[int] = field(default_factory=list)
    value: list[float] = field(default_factory=list)
    stderr: list[float] = field(default_factory=list)
    gap: list[float] = field(default_factory=list)
    tv_to_optimal: list[float] = field(default_factory=list)

    def __len__(self):
        return len(self.n)

    def append(self, n: int, value: float, stderr: float, tv: float):
        self.n.append(n)
        self.value.append(value)
        self.stderr.append(stderr)
        self.gap.append(abs(self.optimal_value - value))
        self.tv_to_optimal.append(tv)

    def to_rows(self) -> list[dict]:
        return [
            {'n': n, 'J_n': v, 'stderr': s, 'gap': g, 'tv_to_opt': tv}
            for n, v, s, g, tv in zip(self.n, self.value, self.stderr, self.gap, self.tv_to_optimal)
        ]


@dataclass(frozen=True)
class ContractionFit:
    eta_hat: float
    r_squared: float
    contractive: bool
    points: int


def improvement_step(
    spec: ProblemSpec,
    current_policy: GibbsPolicy,
    mc_config: MCConfig | None = None,
    base_seed: int = 0,
    *,
    stream: tuple[int, ...] = (),
) -> GibbsPolicy:
    """One policy improvement: fit the value surface of the current policy, then take its Gibbs policy.

    The new policy is proportional to exp((b dJ/dx + r)/gamma). States beyond the fitted x grid
    use the gradient at the nearest edge.
    """

    mc = mc_config if mc_config is not None else MCConfig()
    surface = fit_surface(spec, current_policy, mc.t_grid(spec.T), mc.x_grid(), mc.n_paths, mc.dt, base_seed, stream=stream)

    return gibbs_policy_from_surface(
        spec,
        surface,
        clamp=True,
        quadrature_points=current_policy.quadrature_points,
        rule=current_policy.rule,
    )


def optimal_reference(spec: ProblemSpec, mc_config: MCConfig) -> tuple[ValueSurface, GibbsPolicy]:
    """The HJB oracle surface and its Gibbs policy."""

    surface = hjb_solve(spec, mc_config.oracle_t_steps, mc_config.oracle_x_grid(), scheme=mc_config.oracle_scheme)

    return surface, gibbs_policy_from_surface(spec, surface, clamp=True)


def run_pi(
    spec: ProblemSpec,
    initial_policy: GibbsPolicy | None,
    n_iters: int,
    probe: tuple[float, float],
    mc_config: MCConfig | None,
    base_seed: int,
) -> PiTrace:
    """Iterate evaluation and improvement, recording the value at the probe against the HJB oracle.

    Iteration n evaluates pi^n at the probe with stream (n, 0) and fits its surface with stream (n, 1),
    so no samples are shared between iterations. ``initial_policy=None`` starts from the uniform policy.
    """

    if n_iters < 1:
        raise InvalidArgumentError(f'n_iters must be at least 1, got {n_iters}')

    mc = mc_config if mc_config is not None else MCConfig()
    t0, x0 = probe
    oracle, pi_star = optimal_reference(spec, mc)
    j_star = oracle(t0, x0)
    trace = PiTrace(probe=(t0, x0), optimal_value=j_star)

    policy = initial_policy if initial_policy is not None else GibbsPolicy.uniform(spec.action_space, spec.gamma)
    for n in range(1, n_iters + 1):
        est = mc_evaluate(spec, policy, t0, x0, mc.probe_paths, mc.dt, base_seed, stream=(n, 0))
        tv = tv_distance(policy, pi_star, t0, x0)
        trace.append(n, est.value, est.stderr, tv)
        LOGGER.debug('PI iteration %d: J=%.6g +/- %.2g, gap=%.3g, tv=%.3g', n, est.value, est.stderr, trace.gap[-1], tv)

        if n < n_iters:
            policy = improvement_step(spec, policy, mc, base_seed, stream=(n, 1))

    LOGGER.info('Policy improvement: %d iterations, final gap %.3g', n_iters, trace.gap[-1])

    return trace


def fit_contraction(trace: PiTrace) -> ContractionFit:
    """Fit log(gap_n^2) = c + n log(eta) by least squares.

    Gaps at or below three standard errors are excluded. ``contractive`` is set when eta_hat < 1
    and the slope is negative beyond its own standard error.
    """

    n = np.asarray(trace.n, dtype=float)
    gap = np.asarray(trace.gap, dtype=float)
    stderr = np.asarray(trace.stderr, dtype=float)
    if len(n) < 4:
        raise InsufficientDataError(f'A contraction fit needs at least 4 iterations, got {len(n)}')

    usable = (gap > 0) & (gap > NOISE_FLOOR * stderr)
    if usable.sum() < 4:
        raise InsufficientDataError(f'Only {int(usable.sum())} gaps are above the noise floor; at least 4 are needed')

    fit = stats.linregress(n[usable], np.log(gap[usable] ** 2))
    eta = math.exp(fit.slope)
    r2 = fit.rvalue**2
    contractive = eta < 1 and fit.slope + fit.stderr < 0

    return ContractionFit(eta_hat=eta, r_squared=r2, contractive=bool(contractive), points=int(usable.sum()))
