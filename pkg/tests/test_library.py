import numpy as np
import pytest

from ctrlq import ActionSpace, ConfigurationError, ProblemSpec, linear_example


def constant_drift(c: float, T: float = 1.0) -> ProblemSpec:
    """A constant drift problem."""

    return ProblemSpec(
        drift=lambda t, x, a: c + 0.0 * np.asarray(a),
        diffusion=lambda t, x: 1.0,
        running_reward=lambda t, x, a: 0.0,
        terminal_reward=lambda x: np.asarray(x, dtype=float),
        beta=0.0,
        T=T,
        gamma=1.0,
        action_space=ActionSpace(0.0, 1.0),
        name='constant_drift',
    )


def test_builtin_fixtures(clean_library):
    keys = [info.key for info in clean_library.fixtures()]

    assert 'linear_example' in keys
    assert 'lq' in keys
    assert clean_library.get_fixture('linear_example') is linear_example

    docs = {info.key: info.doc for info in clean_library.fixtures()}
    assert docs['lq'] == 'A linear-quadratic problem truncated to a compact action box.'


def test_fixture_parameters(clean_library):
    assert clean_library.fixture_parameters('linear_example') == ['B', 'T']
    assert clean_library.fixture_parameters('lq') == ['a_max', 'state_cost', 'action_cost', 'T', 'gamma']


def test_build_matches_names_case_insensitively(clean_library):
    spec = clean_library.build('linear_example', {'b': 2.0, 't': 0.5})

    assert spec.T == 0.5
    assert spec.fixture['B'] == 2.0


def test_build_missing_and_unknown(clean_library):
    with pytest.raises(ConfigurationError, match='requires parameters') as exc:
        clean_library.build('linear_example', {'B': 1.0})

    assert exc.value.required == ['T']

    with pytest.raises(ConfigurationError, match='no parameter'):
        clean_library.build('linear_example', {'B': 1.0, 'T': 1.0, 'sigma': 2.0})

    with pytest.raises(ConfigurationError, match='not in the library'):
        clean_library.get_fixture('pendulum')


def test_add_fixture(clean_library):
    clean_library.add_fixture(constant_drift)

    spec = clean_library.build('constant_drift', {'c': 0.5})
    assert spec.name == 'constant_drift'
    assert 'constant_drift' in [info.key for info in clean_library.fixtures()]

    with pytest.raises(ConfigurationError, match='already in the library'):
        clean_library.add_fixture(constant_drift)

    clean_library.add_fixture(constant_drift, key='drift2')
    assert clean_library.fixture_parameters('drift2') == ['c', 'T']

    with pytest.raises(ConfigurationError, match='not callable'):
        clean_library.add_fixture('constant_drift', key='bad')
