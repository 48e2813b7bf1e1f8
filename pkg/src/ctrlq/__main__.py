import argparse
import json
import logging
import sys
from pathlib import Path

from ._config import Config, _Config
from ._errors import (
    ConfigurationError,
    DivergenceError,
    EvaluationError,
    InvalidArgumentError,
    SimulationBlowUpError,
)
from ._experiment import ExperimentConfig
from ._library import Library
from ._logger import set_level
from ._regret import MODES
from ._runner import root_cause, run

# Exit status by error class; the first match wins.
#
EXIT_CODES = [
    ((ConfigurationError, InvalidArgumentError), 2),
    ((DivergenceError, SimulationBlowUpError, EvaluationError), 3),
    ((OSError,), 4),
]

# Command-line flags that set config keys: dest -> (section, key).
#
_FLAG_KEYS = {
    'out': ('experiment', 'out'),
    'threads': ('experiment', 'threads'),
    'iters': ('experiment', 'n_iters'),
    'dt': ('experiment', 'dt'),
    'batch': ('experiment', 'batch'),
    'probes': ('experiment', 'probe_count'),
    'A': ('schedule', 'A'),
    'B': ('schedule', 'B'),
    'nu': ('schedule', 'nu'),
    'tsteps': ('hjb', 'tsteps'),
    'xmin': ('hjb', 'xmin'),
    'xmax': ('hjb', 'xmax'),
    'xsteps': ('hjb', 'xsteps'),
    'scheme': ('hjb', 'scheme'),
    'episodes': ('meanfield', 'episodes'),
    'inputs': ('regret', 'inputs'),
    'regret_nu': ('regret', 'nu'),
    'rho': ('regret', 'rho'),
    'mode': ('regret', 'mode'),
}


def exit_code(exc: BaseException) -> int:
    for classes, code in EXIT_CODES:
        if isinstance(exc, classes):
            return code

    return 1


def _overrides(args) -> list[tuple]:
    out = [('experiment', 'algorithm', args.command)]
    for dest, (section, key) in _FLAG_KEYS.items():
        value = getattr(args, dest, None)
        if value is not None:
            out.append((section, key, value))

    if args.seed is not None:
        out.append(('experiment', 'seeds', [args.seed]))

    return out


def _load_config(args) -> ExperimentConfig:
    config = Config
    if args.config:
        path = Path(args.config)
        if not path.is_file():
            raise ConfigurationError(f'Config file {path} does not exist')

        config = _Config()
        config.location = path

    return ExperimentConfig.load(config, overrides=_overrides(args))


def _digest(summary: dict, path: Path) -> str:
    seeds = summary['seeds']
    failures = summary.get('failures', {})
    text = f'{summary["algorithm"]}: {len(seeds)} run(s)'
    if failures:
        text += f', {len(failures)} failed'

    finals = [s['final_gap'] for s in seeds.values() if s.get('final_gap') is not None]
    if finals:
        text += f', final gap {max(finals, key=abs):.6g}'

    return f'{text} -> {path}'


def run_cmd(args) -> int:
    config = _load_config(args)
    summary, path = run(config)
    print(_digest(summary, path))

    return 0


def fixtures_cmd(args) -> int:
    """Display the problem fixtures in the library."""

    for info in Library.fixtures():
        print(f'  {info.key}: {info.doc}')

    return 0


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('-C', '--config', default=None, help='Use this config file (default to personal config file)')
    common.add_argument('--out', default=None, help='Output directory')
    common.add_argument('--seed', type=int, default=None, help='Run this single seed')
    common.add_argument('--threads', type=int, default=None, help='Worker threads')
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument('-v', '--verbose', action='store_true', help='Log at DEBUG level')
    verbosity.add_argument('-q', '--quiet', action='store_true', help='Log warnings and errors only')

    parser = argparse.ArgumentParser(prog='ctrlq', description='Continuous-time q-learning experiments')
    subparsers = parser.add_subparsers(dest='command', help='sub-command help')

    improve = subparsers.add_parser('improve', parents=[common], help='Exploratory policy improvement')
    improve.add_argument('--iters', type=int, default=None, help='Improvement iterations')

    for name, text in [('semi-q', 'Semi-q-learning'), ('q-learn', 'Full q-learning')]:
        learn = subparsers.add_parser(name, parents=[common], help=text)
        learn.add_argument('--iters', type=int, default=None, help='Learning iterations')
        learn.add_argument('--dt', type=float, default=None, help='Simulation time step')
        learn.add_argument('--nu', type=float, default=None, help='Schedule exponent')
        learn.add_argument('--A', type=float, default=None, help='Schedule numerator')
        learn.add_argument('--B', type=float, default=None, help='Schedule offset')
        learn.add_argument('--batch', type=int, default=None, help='Episodes per update')

    hjb = subparsers.add_parser('hjb-oracle', parents=[common], help='Solve the exploratory HJB equation')
    hjb.add_argument('--tsteps', type=int, default=None, help='Time steps')
    hjb.add_argument('--xmin', type=float, default=None)
    hjb.add_argument('--xmax', type=float, default=None)
    hjb.add_argument('--xsteps', type=int, default=None, help='Space intervals')
    hjb.add_argument('--scheme', choices=['imex', 'explicit'], default=None)

    regret = subparsers.add_parser('regret', parents=[common], help='Regret of trace CSV files')
    regret.add_argument('inputs', nargs='*', default=None, help='Trace CSV files (default: [regret] inputs)')
    regret.add_argument('--nu', dest='regret_nu', type=float, default=None, help='Schedule exponent of the envelope')
    regret.add_argument('--rho', type=float, default=None, help='Smoothness exponent of the envelope')
    regret.add_argument('--mode', choices=list(MODES), default=None)

    meanfield = subparsers.add_parser('meanfield-h', parents=[common], help='Tabulate the mean-field drift')
    meanfield.add_argument('--episodes', type=int, default=None, help='Episodes per Monte Carlo estimate')

    check = subparsers.add_parser('check-assumptions', parents=[common], help='Probe the problem against its bounds')
    check.add_argument('--probes', type=int, default=None, help='Probe points')

    for sub in subparsers.choices.values():
        sub.set_defaults(func=run_cmd)

    fixtures = subparsers.add_parser('fixtures', help='Show available problem fixtures')
    fixtures.set_defaults(func=fixtures_cmd)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _parser()
    args = parser.parse_args(argv)
    if 'func' not in args:
        parser.print_help()
        return 0

    if getattr(args, 'verbose', False):
        set_level(logging.DEBUG)
    elif getattr(args, 'quiet', False):
        set_level(logging.WARNING)
    else:
        set_level(logging.INFO)

    if getattr(args, 'inputs', None) == []:
        args.inputs = None

    try:
        return args.func(args)
    except Exception as e:
        cause = root_cause(e)
        code = exit_code(cause)
        error = {'error': type(cause).__name__, 'message': str(cause), 'exit': code}
        print(json.dumps(error), file=sys.stderr)

        return code


if __name__ == '__main__':
    sys.exit(main())
