import inspect
import warnings
from collections.abc import Callable, Iterable
from dataclasses import dataclass
from importlib.metadata import EntryPoint, entry_points
from typing import cast

from ._errors import ConfigurationError
from ._model import ProblemSpec
from ._util import _import_item, first_line

FIXTURE_GROUP = 'ctrlq.fixtures'

# Fixtures that are always available, even when the package is not installed.
#
_BUILTIN = {
    'linear_example': 'ctrlq._model:linear_example',
    'lq': 'ctrlq._model:lq_fixture',
}

# Map a fixture name to its factory, or to the import key of a factory that is not loaded yet.
#
_fixture_library: dict[str, Callable[..., ProblemSpec] | str] = {}


@dataclass
class Info:
    key: str
    doc: str


def _find_fixtures() -> Iterable[tuple[EntryPoint | None, str, str]]:
    """Yield (entry point, name, import key) for the built-in fixtures and the ``ctrlq.fixtures`` entry points.

    Entry points are not loaded here; the factory module is imported when the fixture is first used.
    """

    for name, key in _BUILTIN.items():
        yield None, name, key

    for entry_point in entry_points(group=FIXTURE_GROUP):
        yield entry_point, entry_point.name, entry_point.value


class Library:
    @staticmethod
    def collect_fixtures():
        """Collect the fixture names without importing the factories."""

        for entry_point, name, key in _find_fixtures():
            known = _fixture_library.get(name)
            if known is None:
                _fixture_library[name] = key
            elif known != key and not callable(known):
                warnings.warn(f'Fixture plugin {entry_point}: name {name} already in library')

    @staticmethod
    def add_fixture(factory: Callable[..., ProblemSpec], key: str | None = None):
        """Add a local fixture factory to the library.

        Parameters
        ----------
        factory: Callable[..., ProblemSpec]
            A function taking keyword fixture parameters and returning a ProblemSpec.
        key: str
            The fixture's name. Defaults to the factory's ``__name__``.
        """

        if not callable(factory):
            raise ConfigurationError(f'Fixture {key} is not callable')

        if not _fixture_library:
            Library.collect_fixtures()

        key_ = key if key else factory.__name__
        if key_ in _fixture_library:
            raise ConfigurationError(f'Fixture {key_} is already in the library')

        _fixture_library[key_] = factory

    @staticmethod
    def get_fixture(key: str) -> Callable[..., ProblemSpec]:
        """Return the factory of the named fixture."""

        if not _fixture_library:
            Library.collect_fixtures()

        if key not in _fixture_library:
            raise ConfigurationError(f'Fixture {key!r} is not in the library; known fixtures are {sorted(_fixture_library)}')

        factory = _fixture_library[key]
        if isinstance(factory, str):
            factory = _import_item(factory)
            if not callable(factory):
                raise ConfigurationError(f'Fixture {key} does not name a function')

            _fixture_library[key] = factory

        return cast(Callable[..., ProblemSpec], factory)

    @staticmethod
    def fixture_parameters(key: str) -> list[str]:
        """The keyword parameters of the named fixture's factory; these are its config keys."""

        return list(inspect.signature(Library.get_fixture(key)).parameters)

    @staticmethod
    def build(key: str, params: dict) -> ProblemSpec:
        """Build a fixture from config values, matching parameter names case-insensitively.

        Unknown or missing parameters raise ``ConfigurationError``.
        """

        names = {name.lower(): name for name in Library.fixture_parameters(key)}
        kwargs = {}
        for k, v in params.items():
            if k.lower() not in names:
                raise ConfigurationError(f'Fixture {key} has no parameter {k!r}; expected one of {sorted(names.values())}')

            kwargs[names[k.lower()]] = v

        signature = inspect.signature(Library.get_fixture(key))
        missing = [name for name, p in signature.parameters.items() if name not in kwargs and p.default is p.empty]
        if missing:
            raise ConfigurationError(f'Fixture {key} requires parameters {missing}', required=missing)

        return Library.get_fixture(key)(**kwargs)

    @staticmethod
    def fixtures() -> list[Info]:
        if not _fixture_library:
            Library.collect_fixtures()

        return [Info(key, first_line(Library.get_fixture(key))) for key in sorted(_fixture_library)]

    @staticmethod
    def clear():
        _fixture_library.clear()
