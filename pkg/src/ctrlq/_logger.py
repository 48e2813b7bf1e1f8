import logging

_FORMATTER = logging.Formatter('%(asctime)s %(levelname)s [%(block_name)s] %(message)s', datefmt='%H:%M:%S')


class ComponentAdapter(logging.LoggerAdapter):
    """An adapter for log messages from a component (an algorithm module or a block).

    Each component has its own adapter, so the log automatically includes the component name.
    """

    def __init__(self, logger, block_name: str, block_state=None):
        super().__init__(logger, {})
        self.block_name = block_name
        self.block_state = block_state

    def process(self, msg, kwargs):
        extra = kwargs.setdefault('extra', {})
        extra.setdefault('block_name', self.block_name)
        extra.setdefault('block_state', self.block_state if self.block_state is not None else '?')

        return msg, kwargs


_logger = logging.getLogger('ctrlq')
_logger.setLevel(logging.INFO)

_ph = logging.StreamHandler()
_ph.setFormatter(_FORMATTER)
_ph.setLevel(logging.DEBUG)

_logger.addHandler(_ph)


def get_logger(block_name: str, block_state=None) -> ComponentAdapter:
    return ComponentAdapter(_logger, block_name, block_state)


def set_level(level: int):
    """Set the level of the package logger; the CLI uses this for ``--verbose`` and ``--quiet``."""

    _logger.setLevel(level)
