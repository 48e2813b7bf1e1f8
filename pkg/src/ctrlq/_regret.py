"""Regret curves, empirical rate exponents, and the shapes of the theoretical regret envelopes."""

import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from scipy import stats

from ._errors import InsufficientDataError, InvalidArgumentError

MODES = ('semi_q', 'q_value', 'original', 'pi_perturbed')
REGIMES = ('sublinear_power', 'polylog', 'bounded')

MIN_FIT_POINTS = 10

# Critical value of nu * rho at which each envelope leaves the power regime.
#
_THRESHOLDS = {'semi_q': 4.0, 'q_value': 2.0, 'original': 4.0, 'pi_perturbed': 2.0}


@dataclass(frozen=True)
class RegretReport:
    gaps: np.ndarray
    cumulative: np.ndarray
    fitted_exponent: float
    fit_r_squared: float
    envelope_exponent: float
    envelope_regime: str
    window: tuple[int, int]
    envelope: np.ndarray

    def summary(self) -> dict:
        return {
            'fitted_exponent': self.fitted_exponent,
            'r_squared': self.fit_r_squared,
            'envelope_exponent': self.envelope_exponent,
            'regime': self.envelope_regime,
            'window': list(self.window),
        }

    def to_rows(self) -> list[dict]:
        return [
            {'k': k, 'gap': g, 'cumulative': c, 'envelope': e}
            for k, (g, c, e) in enumerate(zip(self.gaps, self.cumulative, self.envelope), start=1)
        ]


def accumulate(gaps) -> np.ndarray:
    """The running sum of per-iteration gaps."""

    gaps = np.asarray(gaps, dtype=float)
    if gaps.size and (np.any(gaps < 0) or not np.all(np.isfinite(gaps))):
        raise InvalidArgumentError('Gaps must be finite and nonnegative')

    return np.cumsum(gaps)


def default_window(n: int) -> tuple[int, int]:
    """The fit window [n/10, n], in 1-based iteration numbers."""

    return max(1, n // 10), n


def fit_exponent(cumulative, window: tuple[int, int] | None = None) -> tuple[float, float]:
    """Least-squares slope of log(cumulative) against log(k) over a 1-based inclusive window.

    Returns the slope and R^2.
    """

    cumulative = np.asarray(cumulative, dtype=float)
    k_min, k_max = window if window is not None else default_window(len(cumulative))
    if k_min < 1 or k_max < k_min:
        raise InvalidArgumentError(f'Invalid fit window {(k_min, k_max)}')

    k = np.arange(k_min, min(k_max, len(cumulative)) + 1)
    c = cumulative[k - 1]
    usable = c > 0
    if usable.sum() < MIN_FIT_POINTS:
        raise InsufficientDataError(f'The fit window has {int(usable.sum())} usable points; at least {MIN_FIT_POINTS} are needed')

    fit = stats.linregress(np.log(k[usable]), np.log(c[usable]))

    return float(fit.slope), float(fit.rvalue**2)


def envelope_regime(nu: float, rho: float, mode: str) -> tuple[str, float]:
    """The regime and the power exponent of an envelope; polylog and bounded regimes have exponent 0."""

    if mode not in MODES:
        raise InvalidArgumentError(f'Unknown envelope mode {mode!r}; expected one of {MODES}')

    if not 0 < nu <= 1:
        raise InvalidArgumentError(f'nu must lie in (0, 1], got {nu}')

    if not rho > 0:
        raise InvalidArgumentError(f'rho must be positive, got {rho}')

    threshold = _THRESHOLDS[mode]
    product = nu * rho
    if product < threshold:
        return 'sublinear_power', 1 - product / threshold

    if product == threshold:
        return 'polylog', 0.0

    return 'bounded', 0.0


def envelope(nu: float, rho: float, n_values, mode: str, *, linear_slope: float = 0.0) -> np.ndarray:
    """The shape of the theoretical regret bound at iteration counts ``n_values``, without constants.

    ``semi_q`` and ``original``: n^(1 - nu rho/4) (ln n)^(1/2), (ln n)^(3/2) at nu rho = 4, else 1.
    ``q_value``: n^(1 - nu rho/2), ln n at nu rho = 2, else 1.
    ``pi_perturbed``: n^(1 - rho/2) (ln n)^(1/2), (ln n)^(3/2) at rho = 2, else 1, with nu = 1.
    ``original`` adds ``linear_slope * n`` for the approximation, discount and exploration terms.
    """

    if mode == 'pi_perturbed' and nu != 1:
        raise InvalidArgumentError('The pi_perturbed envelope takes nu = 1')

    regime, exponent = envelope_regime(nu, rho, mode)
    n = np.asarray(n_values, dtype=float)
    if np.any(n < 1):
        raise InvalidArgumentError('Envelope iteration counts start at 1')

    if linear_slope < 0:
        raise InvalidArgumentError(f'linear_slope must be nonnegative, got {linear_slope}')

    log_n = np.log(n)
    with_log_factor = mode != 'q_value'
    if regime == 'sublinear_power':
        shape = n**exponent * (np.sqrt(log_n) if with_log_factor else 1.0)
    elif regime == 'polylog':
        shape = log_n**1.5 if with_log_factor else log_n
    else:
        shape = np.ones_like(n)

    if mode == 'original':
        shape = shape + linear_slope * n

    return shape


def normalize_envelope(shape, cumulative, k_mid: int | None = None) -> np.ndarray:
    """Scale an envelope so that it matches the empirical cumulative regret at k_mid (1-based, default the midpoint)."""

    shape = np.asarray(shape, dtype=float)
    cumulative = np.asarray(cumulative, dtype=float)
    k_mid = k_mid if k_mid is not None else max(1, (len(cumulative) + 1) // 2)
    base = shape[k_mid - 1]
    if base == 0:
        return shape

    return shape * (cumulative[k_mid - 1] / base)


def quantile_curve(gap_matrix, eps: float) -> np.ndarray:
    """The cross-seed (1 - eps) quantile of per-iteration gaps; rows are seeds."""

    if not 0 < eps < 1:
        raise InvalidArgumentError(f'eps must lie in (0, 1), got {eps}')

    gaps = np.asarray(gap_matrix, dtype=float)
    if gaps.ndim != 2 or gaps.shape[0] < 1:
        raise InvalidArgumentError('The gap matrix must have one row per seed')

    return np.quantile(gaps, 1 - eps, axis=0)


def regret_report(
    gaps: Sequence[float],
    *,
    nu: float = 1.0,
    rho: float = 1.0,
    mode: str = 'semi_q',
    window: tuple[int, int] | None = None,
    linear_slope: float = 0.0,
) -> RegretReport:
    """Accumulate gaps, fit the regret exponent, and overlay the normalized theoretical envelope."""

    gaps = np.asarray(gaps, dtype=float)
    cumulative = accumulate(gaps)
    window = (int(window[0]), int(window[1])) if window is not None else default_window(len(gaps))
    exponent, r2 = fit_exponent(cumulative, window)
    regime, env_exponent = envelope_regime(nu, rho, mode)
    k = np.arange(1, len(gaps) + 1)
    shape = envelope(nu, rho, k, mode, linear_slope=linear_slope)
    mid = max(1, (window[0] + min(window[1], len(gaps))) // 2)
    env = normalize_envelope(shape, cumulative, mid)

    if not math.isfinite(exponent):
        raise InsufficientDataError('The fitted exponent is not finite')

    return RegretReport(
        gaps=gaps,
        cumulative=cumulative,
        fitted_exponent=exponent,
        fit_r_squared=r2,
        envelope_exponent=env_exponent,
        envelope_regime=regime,
        window=window,
        envelope=env,
    )
