"""Experiment configuration: typed sections read from the ctrlq ini file, the environment and the command line."""

import ast
import configparser
import io
import numbers
import os
from collections.abc import Iterable, Mapping
from typing import Any

import numpy as np
import param

from ._config import CTRLQ_INI, Config, _Config
from ._errors import ConfigurationError
from ._improve import MCConfig
from ._library import Library
from ._logger import get_logger
from ._model import ProblemSpec
from ._qlearn import Schedule
from ._regret import MODES

LOGGER = get_logger('config')

ALGORITHMS = ('improve', 'semi-q', 'q-learn', 'hjb-oracle', 'regret', 'meanfield-h', 'check-assumptions')

SECTIONS = ('experiment', 'problem', 'schedule', 'schedule_theta', 'improve', 'hjb', 'qlearn', 'regret', 'meanfield')

ENV_PREFIX = 'CTRLQ_'

# Fixture parameters used when the config does not give them.
#
FIXTURE_DEFAULTS = {
    'linear_example': {'B': 1.0, 'T': 1.0},
    'lq': {'a_max': 2.0, 'state_cost': 1.0, 'action_cost': 1.0, 'T': 1.0, 'gamma': 1.0},
}

# The [improve] keys are the surface settings of MCConfig; the time step comes from
# [experiment] and the oracle settings from [hjb].
#
IMPROVE_KEYS = ('t_points', 'x_min', 'x_max', 'x_points', 'n_paths', 'probe_paths')


class ExperimentSection(param.Parameterized):
    """[experiment]: what to run and where the artifacts go."""

    algorithm = param.Selector(objects=list(ALGORITHMS), default='improve')
    n_iters = param.Integer(default=10, bounds=(1, None), doc='Iterations of improvement or learning')
    dt = param.Number(default=0.01, bounds=(0, None), inclusive_bounds=(False, True), doc='Simulation time step')
    probe = param.NumericTuple(default=(0.0, 0.0), length=2, doc='The probe point (t, x)')
    seeds = param.List(default=[0], item_type=int, doc='Experiment seeds; two or more run a sweep')
    batch = param.Integer(default=1, bounds=(1, None), doc='Episodes per learning update')
    eps = param.List(default=[0.1], item_type=numbers.Real, doc='Sweep quantile levels; the curve is the (1 - eps) quantile')
    out = param.String(default='.', doc='Output directory')
    threads = param.Integer(default=1, bounds=(1, None), doc='Worker threads')
    x0 = param.Number(default=None, allow_None=True, doc='Start state of mean-field episodes; defaults to the probe x')
    probe_count = param.Integer(default=1000, bounds=(2, None), doc='Probe points of assumption checks')


class HjbSection(param.Parameterized):
    """[hjb]: the finite-difference oracle grid."""

    tsteps = param.Integer(default=400, bounds=(1, None), doc='Time steps')
    xmin = param.Number(default=-6.0)
    xmax = param.Number(default=6.0)
    xsteps = param.Integer(default=240, bounds=(2, None), doc='Space intervals; the grid has xsteps + 1 nodes')
    scheme = param.Selector(objects=['imex', 'explicit'], default='imex')


class QlearnSection(param.Parameterized):
    """[qlearn]: options of the learning loops."""

    normalize_by_dt = param.Boolean(default=True, doc='Divide the phi increment by dt; false keeps the raw double sum')
    phi0 = param.Number(default=None, allow_None=True, doc='Initial phi; drawn from [-1, 1] when unset')
    theta0 = param.Number(default=None, allow_None=True, doc='Initial theta; zero when unset')
    clamp = param.Number(default=50.0, bounds=(0, None), inclusive_bounds=(False, True), doc='Projection bound of phi')
    eval_paths = param.Integer(default=0, bounds=(0, None), doc='Monte Carlo paths per gap; 0 uses the closed form')


class RegretSection(param.Parameterized):
    """[regret]: regret fits and envelopes."""

    inputs = param.List(default=[], item_type=str, doc='Trace CSV files for the regret subcommand')
    nu = param.Number(default=1.0, bounds=(0, 1), inclusive_bounds=(False, True))
    rho = param.Number(default=1.0, bounds=(0, None), inclusive_bounds=(False, True))
    mode = param.Selector(objects=list(MODES), default='semi_q')
    window = param.NumericTuple(default=None, length=2, allow_None=True, doc='1-based inclusive fit window')
    linear_slope = param.Number(default=0.0, bounds=(0, None))


class MeanfieldSection(param.Parameterized):
    """[meanfield]: the mean-field drift table."""

    phis = param.List(default=[-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0], item_type=numbers.Real)
    dts = param.List(default=[0.1, 0.05, 0.01, 0.005], item_type=numbers.Real)
    episodes = param.Integer(default=10_000, bounds=(1, None))


def _literal(text: str, where: str) -> Any:
    try:
        return ast.literal_eval(text)
    except (ValueError, SyntaxError) as e:
        raise ConfigurationError(f'{where}: cannot eval {text!r}') from e


def _plain(v):
    """Convert a parameter value to plain Python types for JSON and ini output."""

    if isinstance(v, (tuple, list)):
        return [_plain(x) for x in v]

    if isinstance(v, np.generic):
        return v.item()

    return v


class ExperimentConfig:
    """The validated settings of one experiment.

    Values come, in increasing precedence, from the section defaults, the config file,
    ``CTRLQ_<SECTION>_<KEY>`` environment variables and command-line overrides.
    Keys are matched case-insensitively, so ``B`` and ``b`` are the same key.
    """

    def __init__(self):
        self.experiment = ExperimentSection()
        self.schedule = Schedule()
        self.schedule_theta = Schedule()
        self.improve = MCConfig()
        self.hjb = HjbSection()
        self.qlearn = QlearnSection()
        self.regret = RegretSection()
        self.meanfield = MeanfieldSection()

        self._fixture = 'linear_example'
        self._fixture_params: dict[str, Any] = {}

    @classmethod
    def load(
        cls,
        config: _Config = Config,
        *,
        environ: Mapping[str, str] | None = None,
        overrides: Iterable[tuple[str, str, Any]] = (),
    ) -> 'ExperimentConfig':
        """Build and validate a config; nothing is computed if this raises ``ConfigurationError``."""

        ec = cls()
        for section in config.sections():
            for key, value in config[section].items():
                ec.set(section, key, value)

        environ = os.environ if environ is None else environ
        for section, key, value in _env_overrides(environ):
            ec.set(section, key, value)

        for section, key, value in overrides:
            ec.set(section, key, value)

        ec.validate()

        return ec

    def _param_section(self, section: str) -> param.Parameterized:
        return getattr(self, section)

    def set(self, section: str, key: str, value: Any):
        """Set one value, checking the section, the key and the value's type."""

        section = section.lower()
        if section not in SECTIONS:
            raise ConfigurationError(f'Unknown config section [{section}]; expected one of {SECTIONS}')

        if section == 'problem':
            self._set_problem(key, value)
            return

        obj = self._param_section(section)
        names = {n.lower(): n for n in self._keys(section)}
        name = names.get(key.lower())
        if name is None:
            raise ConfigurationError(f'Unknown key {key!r} in [{section}]; expected one of {sorted(names.values())}')

        p = obj.param[name]
        if isinstance(p, param.List) and isinstance(value, tuple):
            value = list(value)
        elif isinstance(p, param.NumericTuple) and isinstance(value, list):
            value = tuple(value)

        if isinstance(p, (param.Number, param.NumericTuple)) and _has_bool(value):
            raise ConfigurationError(f'[{section}] {key} must be numeric, got {value!r}')

        try:
            setattr(obj, name, value)
        except (ValueError, TypeError) as e:
            raise ConfigurationError(f'[{section}] {key}: {e}') from e

    def _keys(self, section: str) -> list[str]:
        if section == 'improve':
            return list(IMPROVE_KEYS)

        return [n for n in self._param_section(section).param if n != 'name']

    def _set_problem(self, key: str, value: Any):
        if key.lower() == 'problem':
            if not isinstance(value, str):
                raise ConfigurationError(f'[problem] problem must be a fixture name string, got {value!r}')

            self._fixture = value
            return

        if isinstance(value, bool) or not isinstance(value, numbers.Real):
            raise ConfigurationError(f'[problem] {key} must be a number, got {value!r}')

        self._fixture_params[key.lower()] = value

    def problem_params(self) -> dict[str, Any]:
        """The fixture parameters, with the defaults filled in and names as the fixture spells them."""

        names = {n.lower(): n for n in Library.fixture_parameters(self._fixture)}
        params = dict(FIXTURE_DEFAULTS.get(self._fixture, {}))
        for k, v in self._fixture_params.items():
            if k not in names:
                raise ConfigurationError(f'Fixture {self._fixture} has no parameter {k!r}; expected one of {sorted(names.values())}')

            params[names[k]] = v

        return params

    @property
    def fixture(self) -> str:
        return self._fixture

    def build_problem(self) -> ProblemSpec:
        try:
            return Library.build(self._fixture, self.problem_params())
        except ValueError as e:
            raise ConfigurationError(f'[problem] {e}') from e

    def validate(self):
        """Check cross-key constraints; any problem raises ``ConfigurationError``."""

        spec = self.build_problem()
        ex = self.experiment
        t0, x0 = ex.probe
        if not 0 <= t0 < spec.T:
            raise ConfigurationError(f'[experiment] probe time {t0} must lie in [0, {spec.T})')

        span = spec.T - t0
        if abs(round(span / ex.dt) * ex.dt - span) > 1e-9:
            raise ConfigurationError(f'[experiment] dt {ex.dt} does not divide the horizon {span}')

        if not ex.seeds or any(s < 0 for s in ex.seeds):
            raise ConfigurationError('[experiment] seeds must be a non-empty list of non-negative integers')

        if len(set(ex.seeds)) != len(ex.seeds):
            raise ConfigurationError('[experiment] seeds must be distinct')

        if any(not 0 < e < 1 for e in ex.eps):
            raise ConfigurationError('[experiment] eps levels must lie in (0, 1)')

        if not self.improve.x_min < self.improve.x_max:
            raise ConfigurationError('[improve] x_min must be below x_max')

        if not self.hjb.xmin < self.hjb.xmax:
            raise ConfigurationError('[hjb] xmin must be below xmax')

        if ex.algorithm in ('semi-q', 'q-learn', 'meanfield-h') and self._fixture != 'linear_example':
            raise ConfigurationError(f'{ex.algorithm} learns the linear example family; [problem] problem must be linear_example')

        if self.regret.mode == 'pi_perturbed' and self.regret.nu != 1:
            raise ConfigurationError('[regret] the pi_perturbed envelope takes nu = 1')

        if ex.algorithm == 'regret' and not self.regret.inputs:
            raise ConfigurationError('[regret] inputs names no trace files; pass them on the command line or in the config')

    def mc_config(self) -> MCConfig:
        """The Monte Carlo settings of policy improvement."""

        values = {k: getattr(self.improve, k) for k in IMPROVE_KEYS}

        return MCConfig(
            **values,
            dt=self.experiment.dt,
            oracle_t_steps=self.hjb.tsteps,
            oracle_x_min=self.hjb.xmin,
            oracle_x_max=self.hjb.xmax,
            oracle_x_points=self.hjb.xsteps + 1,
            oracle_scheme=self.hjb.scheme,
        )

    def hjb_grid(self) -> np.ndarray:
        return np.linspace(self.hjb.xmin, self.hjb.xmax, self.hjb.xsteps + 1)

    def resolved(self) -> dict[str, dict[str, Any]]:
        """Every setting, including defaults, as plain Python values."""

        out: dict[str, dict[str, Any]] = {}
        for section in SECTIONS:
            if section == 'problem':
                out[section] = {'problem': self._fixture, **self.problem_params()}
            else:
                obj = self._param_section(section)
                out[section] = {k: _plain(getattr(obj, k)) for k in self._keys(section)}

        return out

    def to_ini(self) -> str:
        """The resolved config as ini text; loading it gives the same settings."""

        cp = configparser.ConfigParser()
        for section, values in self.resolved().items():
            cp[section] = {k: repr(v) for k, v in values.items()}

        buf = io.StringIO()
        cp.write(buf)

        return buf.getvalue()


def _has_bool(value) -> bool:
    if isinstance(value, bool):
        return True

    return isinstance(value, (list, tuple)) and any(isinstance(v, bool) for v in value)


def _env_overrides(environ: Mapping[str, str]) -> list[tuple[str, str, Any]]:
    """Parse ``CTRLQ_<SECTION>_<KEY>`` variables; values are Python literals.

    Longer section names are matched first, so ``CTRLQ_SCHEDULE_THETA_A`` sets [schedule_theta] A.
    Variables that name no section are left alone.
    """

    by_length = sorted(SECTIONS, key=len, reverse=True)
    out = []
    for name in sorted(environ):
        if not name.startswith(ENV_PREFIX) or name == CTRLQ_INI:
            continue

        rest = name[len(ENV_PREFIX) :].lower()
        section = next((s for s in by_length if rest.startswith(f'{s}_')), None)
        if section is None:
            LOGGER.debug('Ignoring %s: it does not name a config section', name)
            continue

        key = rest[len(section) + 1 :]
        out.append((section, key, _literal(environ[name], name)))

    return out
