import pytest

from ctrlq import Dag, Library, linear_example


def pytest_addoption(parser):
    parser.addoption('--runslow', action='store_true', default=False, help='Run the long statistical tests')


def pytest_collection_modifyitems(config, items):
    if config.getoption('--runslow'):
        return

    skip_slow = pytest.mark.skip(reason='Needs --runslow')
    for item in items:
        if 'slow' in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def Dag_f():
    """Ensure that each test starts with a clear dag."""

    return lambda connections: Dag(connections, doc='test-dag', title='tests')


@pytest.fixture
def clean_library():
    Library.clear()
    yield Library
    Library.clear()


@pytest.fixture
def example1():
    return linear_example(1.0, 1.0)


@pytest.fixture
def example0():
    return linear_example(0.0, 1.0)
