import logging

import numpy as np
import pytest

from ctrlq import Config, ConfigurationError, ExperimentConfig
from ctrlq._config import _Config


def config_from(ini: str) -> _Config:
    config = _Config()
    config._load_string(ini)

    return config


def load(ini: str = '', environ=None, overrides=()) -> ExperimentConfig:
    return ExperimentConfig.load(config_from(ini), environ=environ or {}, overrides=overrides)


def test_config():
    INI = '''
[meanfield]
string1 = 'one'
int1 = 1
bool1 = True
float1 = 1.0

[qlearn]
'''

    Config._clear()
    Config._load_string(INI)

    try:
        assert Config['schedule'] == {}
        assert Config['qlearn'] == {}

        conf = Config['meanfield']

        string1 = conf['string1']
        assert string1 == 'one' and type(string1) is str

        int1 = conf['int1']
        assert int1 == 1 and type(int1) is int

        bool1 = conf['bool1']
        assert bool1 is True and type(bool1) is bool

        float1 = conf['float1']
        assert float1 == 1.0 and type(float1) is float
    finally:
        Config._clear()


def test_bad_value():
    config = config_from('''
[experiment]
algorithm = improve
n_iters = 1
''')

    with pytest.raises(ConfigurationError, match=r'Cannot eval section \[experiment\], key algorithm'):
        config['experiment']


def test_config_file(tmp_path):
    path = tmp_path / 'ctrlq.ini'
    path.write_text('[experiment]\nn_iters = 4\n')

    config = _Config()
    config.location = path
    assert config['experiment'] == {'n_iters': 4}

    with pytest.raises(ConfigurationError, match='already loaded'):
        config.location = tmp_path / 'other.ini'


def test_missing_config_file_is_empty(tmp_path):
    config = _Config()
    config.location = tmp_path / 'absent.ini'

    assert config.sections() == []


def test_config_location_from_environment(monkeypatch, tmp_path):
    monkeypatch.setenv('CTRLQ_INI', str(tmp_path / 'x.ini'))

    assert _Config().location == tmp_path / 'x.ini'


def test_defaults():
    ec = load()

    assert ec.experiment.algorithm == 'improve'
    assert ec.experiment.seeds == [0]
    assert ec.fixture == 'linear_example'
    assert ec.problem_params() == {'B': 1.0, 'T': 1.0}
    assert ec.hjb.scheme == 'imex'
    assert ec.schedule.A == 1.0
    assert ec.qlearn.normalize_by_dt


def test_file_values():
    ec = load('''
[experiment]
algorithm = 'semi-q'
n_iters = 25
probe = (0.0, 0.5)
seeds = [3, 1]

[problem]
problem = 'linear_example'
B = 2.0

[schedule]
A = 30.0
B = 10.0
''')

    assert ec.experiment.algorithm == 'semi-q'
    assert ec.experiment.n_iters == 25
    assert ec.experiment.probe == (0.0, 0.5)
    assert ec.experiment.seeds == [3, 1]
    assert ec.problem_params() == {'B': 2.0, 'T': 1.0}
    assert ec.build_problem().fixture['phi_star'] == 2.0
    assert ec.schedule.A == 30.0


def test_precedence():
    """The environment overrides the file, and explicit overrides beat both."""

    ini = '[experiment]\nn_iters = 5\ndt = 0.1\n'
    environ = {'CTRLQ_EXPERIMENT_N_ITERS': '3', 'CTRLQ_SCHEDULE_THETA_A': '2.5', 'CTRLQ_INI': '/nowhere/ctrlq.ini'}

    ec = load(ini, environ=environ)
    assert ec.experiment.n_iters == 3
    assert ec.experiment.dt == 0.1
    assert ec.schedule_theta.A == 2.5
    assert ec.schedule.A == 1.0

    ec = load(ini, environ=environ, overrides=[('experiment', 'n_iters', 7)])
    assert ec.experiment.n_iters == 7


def test_unrelated_environment_is_ignored(caplog):
    with caplog.at_level(logging.DEBUG, logger='ctrlq'):
        ec = load(environ={'CTRLQ_NOPE_X': '1', 'CTRLQ_HOME': '/tmp', 'CTRLQ_EXPERIMENT_N_ITERS': '4'})

    assert ec.experiment.n_iters == 4
    assert 'Ignoring CTRLQ_HOME' in caplog.text
    assert 'Ignoring CTRLQ_NOPE_X' in caplog.text


def test_bad_environment():
    with pytest.raises(ConfigurationError, match='Unknown key'):
        load(environ={'CTRLQ_EXPERIMENT_ITERATIONS': '3'})

    with pytest.raises(ConfigurationError, match='cannot eval'):
        load(environ={'CTRLQ_EXPERIMENT_N_ITERS': 'ten'})


@pytest.mark.parametrize(
    'ini,match',
    [
        ('[bogus]\nx = 1\n', 'Unknown config section'),
        ('[experiment]\niterations = 3\n', 'Unknown key'),
        ('[experiment]\ndt = True\n', 'must be numeric'),
        ("[experiment]\nn_iters = 'ten'\n", 'n_iters'),
        ("[experiment]\nalgorithm = 'sarsa'\n", 'algorithm'),
        ('[experiment]\ndt = 0.3\n', 'does not divide'),
        ('[experiment]\nprobe = (1.0, 0.0)\n', 'probe time'),
        ('[experiment]\nseeds = [1, 1]\n', 'distinct'),
        ('[experiment]\nseeds = [-1]\n', 'non-negative'),
        ('[experiment]\neps = [1.5]\n', 'eps'),
        ('[improve]\nx_min = 2.0\nx_max = 1.0\n', 'x_min'),
        ('[improve]\ndt = 0.1\n', 'Unknown key'),
        ('[hjb]\nxmin = 2.0\nxmax = -2.0\n', 'xmin'),
        ("[problem]\nproblem = 'pendulum'\n", 'not in the library'),
        ('[problem]\nsigma = 2.0\n', 'no parameter'),
        ('[problem]\nT = 0.0\n', 'Horizon'),
        ("[problem]\nB = 'one'\n", 'must be a number'),
        ("[experiment]\nalgorithm = 'semi-q'\n[problem]\nproblem = 'lq'\n", 'linear_example'),
        ("[regret]\nmode = 'pi_perturbed'\nnu = 0.5\n", 'nu = 1'),
        ("[experiment]\nalgorithm = 'regret'\n", 'inputs'),
    ],
)
def test_validation_errors(ini, match):
    with pytest.raises(ConfigurationError, match=match):
        load(ini)


def test_set():
    ec = ExperimentConfig()
    ec.set('EXPERIMENT', 'N_ITERS', 9)
    ec.set('regret', 'window', [5, 50])
    ec.set('meanfield', 'phis', (0.5, 1.0))

    assert ec.experiment.n_iters == 9
    assert ec.regret.window == (5, 50)
    assert ec.meanfield.phis == [0.5, 1.0]


def test_mc_config():
    ec = load('[experiment]\ndt = 0.05\n[improve]\nn_paths = 30\n[hjb]\nxsteps = 60\nscheme = \'explicit\'\n')
    mc = ec.mc_config()

    assert mc.dt == 0.05
    assert mc.n_paths == 30
    assert mc.oracle_x_points == 61
    assert mc.oracle_scheme == 'explicit'
    assert len(ec.hjb_grid()) == 61
    assert np.isclose(ec.hjb_grid()[1] - ec.hjb_grid()[0], 0.2)


def test_resolved_round_trip():
    """Loading the resolved ini text gives the same settings."""

    ec = load('''
[experiment]
algorithm = 'q-learn'
seeds = [2, 4]
eps = [0.1, 0.25]

[problem]
B = 0.5

[schedule_theta]
nu = 0.75

[regret]
window = (2, 8)
''')
    again = load(ec.to_ini())

    assert again.resolved() == ec.resolved()
    assert again.resolved()['problem'] == {'problem': 'linear_example', 'B': 0.5, 'T': 1.0}
    assert again.resolved()['regret']['window'] == [2, 8]
