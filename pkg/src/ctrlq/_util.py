import importlib
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from ._errors import InvalidArgumentError


def _import_item(key):
    """Look up an object by key.

    The returned object is typically a fixture factory function.

    See the Entry points specification at
    https://packaging.python.org/en/latest/specifications/entry-points/#entry-points.
    """

    modname, qualname_separator, qualname = key.partition(':')
    try:
        obj = importlib.import_module(modname)
        if qualname_separator:
            for attr in qualname.split('.'):
                obj = getattr(obj, attr)

        return obj
    except ModuleNotFoundError as e:
        msg = str(e)
        if not qualname_separator:
            msg = f'{msg}. Is there a \':\' missing?'
        raise InvalidArgumentError(msg) from e


########
# Random streams
########


def derive_rng(base_seed: int, *keys: int) -> np.random.Generator:
    """Return an independent random stream derived from ``base_seed`` and a path of integer keys.

    The same ``(base_seed, keys)`` always gives the same stream, no matter which
    thread asks for it or in which order, so work can be split across workers
    without changing any result.

    Parameters
    ----------
    base_seed: int
        The experiment seed.
    keys: int
        Non-negative integers identifying the task, e.g. (iteration, trajectory).
    """

    if base_seed < 0 or any(k < 0 for k in keys):
        raise InvalidArgumentError(f'Seeds and stream keys must be non-negative: {base_seed}, {keys}')

    ss = np.random.SeedSequence(int(base_seed), spawn_key=tuple(int(k) for k in keys))

    return np.random.Generator(np.random.PCG64(ss))


########
# Formatting
########


def fmt_number(v) -> str:
    """Format a number with 17 significant digits, so CSV values round-trip exactly."""

    if isinstance(v, (bool, np.bool_)):
        return str(int(v))

    if isinstance(v, (int, np.integer)):
        return str(int(v))

    return f'{float(v):.17g}'


########
# Documentation utilities
########


def trim(docstring):
    """From PEP-257: Fix docstring indentation"""

    if not docstring:
        return ''
    # Convert tabs to spaces (following the normal Python rules)
    # and split into a list of lines:
    lines = docstring.expandtabs().splitlines()
    # Determine minimum indentation (first line doesn't count):
    indent = sys.maxsize
    for line in lines[1:]:
        stripped = line.lstrip()
        if stripped:
            indent = min(indent, len(line) - len(stripped))
    # Remove indentation (first line is special):
    trimmed = [lines[0].strip()]
    if indent < sys.maxsize:
        for line in lines[1:]:
            trimmed.append(line[indent:].rstrip())
    # Strip off trailing and leading blank lines:
    while trimmed and not trimmed[-1]:
        trimmed.pop()
    while trimmed and not trimmed[0]:
        trimmed.pop(0)
    # Return a single string:
    return '\n'.join(trimmed)


def first_line(obj) -> str:
    """The first line of an object's docstring."""

    return trim(obj.__doc__).split('\n')[0].strip()


########
# Worker threads
########

_threads = 1


def set_threads(n: int):
    """Set the number of worker threads used for Monte Carlo work. Results do not depend on it."""

    global _threads

    if n < 1:
        raise InvalidArgumentError(f'Thread count must be at least 1, got {n}')

    _threads = int(n)


def map_ordered(func, items) -> list:
    """Apply func to each item, possibly in worker threads, returning results in item order."""

    items = list(items)
    if _threads == 1 or len(items) < 2:
        return [func(item) for item in items]

    with ThreadPoolExecutor(max_workers=_threads) as pool:
        return list(pool.map(func, items))
