from enum import StrEnum
from typing import Any

import param

from . import _logger


class BlockError(Exception):
    """Raised if a Block or a pipeline is wired incorrectly, or if a block fails while executing.

    When a dag executes a block, any other exception is re-raised as a ``BlockError``
    chained to the original, so the caller can inspect ``__cause__``.
    """


class BlockState(StrEnum):
    """The current state of a block; also used for logging."""

    DAG = 'DAG'
    BLOCK = 'BLOCK'
    READY = 'READY'
    EXECUTING = 'EXECUTING'
    SUCCESSFUL = 'SUCCESSFUL'
    ERROR = 'ERROR'


class Block(param.Parameterized):
    """The base class for pipeline blocks.

    A block is implemented as:

    .. code-block:: python

        class MyBlock(Block):
            ...

    The ``Block`` class inherits from ``param.Parameterized``.
    There are two kinds of pipeline parameters:

    * Input parameters start with ``in_``. These parameters are set before a block is executed.
    * Output parameters start with ``out_``. The block sets these in its ``execute()`` method.

    .. code-block:: python

        class Estimate(Block):
            \"""Estimate a policy value.\"""

            in_spec = param.ClassSelector(class_=ProblemSpec)
            out_value = param.Number()

            def execute(self):
                self.out_value = mc_evaluate(self.in_spec, ...).value

    Every block class must have a docstring; the CLI shows its first line.
    """

    _block_state = param.String(default=BlockState.READY)

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)

        if not self.__doc__:
            raise BlockError(f'Class {self.__class__} must have a docstring')

        self.logger = _logger.get_logger(self.name)

        # Map "source block + output param" -> "input param" for the dag's watchers.
        #
        self._block_name_map: dict[tuple[str, str], str] = {}

        # Blocks listed first in a dag's connections sort first.
        #
        self._sort_key: int | None = None

    def prepare(self):
        """Called by a dag before :func:`~ctrlq.Block.execute`; a place to validate inputs."""

    def execute(self, *_, **__):
        """Override this method in a Block subclass to compute the ``out_`` params."""

    def __call__(self, **kwargs) -> dict[str, Any]:
        """Call a block directly and return the output params as a dictionary.

        The arguments must be the block's input ("in\\_") params. Not all input params need to be specified.
        Calling the block calls :func:`~ctrlq.Block.prepare`, then :func:`~ctrlq.Block.execute`.
        """

        in_names = [name for name in self.__class__.param if name.startswith('in_')]
        if any(name not in in_names for name in kwargs):
            raise BlockError('Only input params can be specified')

        for name, value in kwargs.items():
            setattr(self, name, value)

        self.prepare()
        self.execute()

        out_names = [name for name in self.__class__.param if name.startswith('out_')]

        return {name: getattr(self, name) for name in out_names}


class BlockValidateError(BlockError):
    """Raised if :func:`~ctrlq.Block.prepare` or :func:`~ctrlq.Block.execute` determines that input data is invalid."""

    def __init__(self, *, block_name: str, message: str):
        """
        Parameters
        ----------
        block_name: str
            The name of the block where the error occured.
        message: str
            A message describing the error.
        """

        super().__init__(message)
        self.block_name = block_name
