# The ini file reader behind ExperimentConfig.
#

import ast
import configparser
import os
from pathlib import Path
from typing import Any

from ._errors import ConfigurationError

# Environment variable naming an explicit config file.
#
CTRLQ_INI = 'CTRLQ_INI'


def _default_config_file() -> Path:
    """Determine the location of the config file ctrlq.ini.

    If the environment variable ``CTRLQ_INI`` is set,
    it specifies the path of the config file.

    Otherwise, if Windows, use ``$env:APPDATA/ctrlq/ctrlq.ini``.

    Otherwise, if ``XDG_CONFIG_HOME`` is set, use ``$XDG_CONFIG_HOME/ctrlq/ctrlq.ini``.

    Otherwise, use ``$HOME/.config/ctrlq/ctrlq.ini``.

    Nothing is created: a missing file is an empty config.
    """

    ini = os.environ.get(CTRLQ_INI, None)
    if ini:
        return Path(ini)

    if os.name == 'nt':
        prdir = Path(os.environ['APPDATA'])
    else:
        xdg = os.environ.get('XDG_CONFIG_HOME', None)
        prdir = Path(xdg) if xdg else Path.home() / '.config'

    return prdir / 'ctrlq' / 'ctrlq.ini'


class _Config:
    """This class is for internal use.

    A single instance of this class is exposed publicly as ``Config``.
    """

    def __init__(self):
        self._clear()

    def _clear(self):
        self._location = _default_config_file()
        self._config = configparser.ConfigParser()
        self._loaded = False

    @property
    def location(self) -> Path:
        """Get or set the config file location.

        The location cannot be set if the config file has already been loaded.
        """

        return self._location

    @location.setter
    def location(self, config_file: Path | str):
        if self._loaded:
            raise ConfigurationError('Config is already loaded')

        self._location = Path(config_file)

    def _load(self):
        """Load the config.

        Overwrites any previous config. If the location does not exist, the config will be empty.
        """

        self._config = configparser.ConfigParser()
        try:
            self._config.read(self._location, encoding='utf-8')
        except configparser.Error as e:
            raise ConfigurationError(f'Config file {self._location}: {e}') from e

        self._loaded = True

    def _load_string(self, sconfig: str):
        """Load the config from a string; the CLI tests use this."""

        self._config = configparser.ConfigParser()
        try:
            self._config.read_string(sconfig)
        except configparser.Error as e:
            raise ConfigurationError(f'Config: {e}') from e

        self._loaded = True

    def sections(self) -> list[str]:
        if not self._loaded:
            self._load()

        return self._config.sections()

    @staticmethod
    def _eval(section_name: str, key: str, v: str) -> Any:
        try:
            return ast.literal_eval(v)
        except (ValueError, SyntaxError) as e:
            raise ConfigurationError(f'Cannot eval section [{section_name}], key {key}, value {v}') from e

    def __getitem__(self, section_name: str) -> dict[str, Any]:
        """Get the config values of a section.

        The config file is lazily loaded. Non-existence of the file is normal.

        Since configparser always returns values as strings, the values are evaluated
        using :func:`ast.literal_eval` to be correctly typed. This means that strings in the
        .ini file must be surrounded by quotes.

        The section need not exist; if it doesn't, an empty dictionary is returned.
        """

        if not self._loaded:
            self._load()

        if section_name not in self._config:
            return {}

        return {key: self._eval(section_name, key, v) for key, v in self._config[section_name].items()}


Config = _Config()
