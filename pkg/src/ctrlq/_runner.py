"""Run an experiment: one pipeline per seed, CSV artifacts, and an aggregate JSON summary."""

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._block import BlockError
from ._dag import Dag, DagTrace
from ._errors import InsufficientDataError, InvalidArgumentError
from ._experiment import ExperimentConfig
from ._logger import get_logger
from ._regret import quantile_curve, regret_report
from ._util import map_ordered, set_threads
from .blocks import ALGORITHM_BLOCKS, ArtifactWriterBlock, GapsBlock, ProblemBlock, RegretBlock
from .etc import write_json
from .etc._io import GAP_COLUMNS

LOGGER = get_logger('runner')


@dataclass
class SeedResult:
    seed: int
    artifact: str
    rows: list[dict]
    summary: dict


def root_cause(exc: BaseException) -> BaseException:
    """Unwrap the BlockError a dag raises around the original exception."""

    while isinstance(exc, BlockError) and exc.__cause__ is not None:
        exc = exc.__cause__

    return exc


def build_dag(config: ExperimentConfig, seed: int, directory: Path | str) -> tuple[Dag, ArtifactWriterBlock]:
    """The pipeline of one run: problem (or trace gaps) -> algorithm -> artifact writer."""

    algorithm = config.experiment.algorithm
    writer = ArtifactWriterBlock(name='writer', directory=str(directory))

    if algorithm == 'regret':
        source = GapsBlock(name='gaps', in_config=config)
        block = RegretBlock(name='regret')
        connections = [
            (source.param.out_gaps, block.param.in_gaps),
            (source.param.out_config, block.param.in_config),
            (source.param.out_sources, block.param.in_sources),
        ]
    else:
        source = ProblemBlock(name='problem', in_config=config, in_seed=seed)
        block = ALGORITHM_BLOCKS[algorithm](name=algorithm)
        connections = [
            (source.param.out_spec, block.param.in_spec),
            (source.param.out_config, block.param.in_config),
            (source.param.out_seed, block.param.in_seed),
        ]

    connections += [
        (block.param.out_rows, writer.param.in_rows),
        (block.param.out_columns, writer.param.in_columns),
        (block.param.out_summary, writer.param.in_summary),
        (block.param.out_name, writer.param.in_name),
    ]

    trace = DagTrace.QUEUE | DagTrace.INPUTS if LOGGER.isEnabledFor(logging.DEBUG) else DagTrace(0)
    dag = Dag(connections, title=algorithm, doc=type(block).__doc__, trace=trace)

    return dag, writer


def run_seed(config: ExperimentConfig, seed: int, directory: Path | str) -> SeedResult:
    dag, writer = build_dag(config, seed, directory)
    dag.execute()

    return SeedResult(seed=seed, artifact=Path(writer.out_path).name, rows=writer.in_rows, summary=writer.out_summary)


def _is_seeded(config: ExperimentConfig) -> bool:
    algorithm = config.experiment.algorithm

    return algorithm in ALGORITHM_BLOCKS and ALGORITHM_BLOCKS[algorithm].seeded


def _gap_column(rows: list[dict]) -> str | None:
    return next((c for c in GAP_COLUMNS if rows and c in rows[0]), None)


def _quantiles(config: ExperimentConfig, results: list[SeedResult]) -> dict:
    """The (1 - eps) quantile gap curves over seeds, with the regret fit of each curve."""

    column = _gap_column(results[0].rows)
    if column is None:
        return {}

    n = min(len(r.rows) for r in results)
    matrix = np.array([[float(row[column]) for row in r.rows[:n]] for r in results])
    rg = config.regret
    out = {}
    for eps in config.experiment.eps:
        curve = quantile_curve(matrix, eps)
        entry = {'level': 1 - eps, 'curve': curve, 'regret': None}
        if np.all(np.isfinite(curve)):
            try:
                report = regret_report(curve, nu=rg.nu, rho=rg.rho, mode=rg.mode, window=rg.window, linear_slope=rg.linear_slope)
                entry['regret'] = report.summary()
            except InsufficientDataError as e:
                LOGGER.info('No regret fit of the %g quantile curve: %s', 1 - eps, e)

        out[f'{eps:g}'] = entry

    return out


def sweep(config: ExperimentConfig, seeds: list[int]) -> dict:
    """Run every seed and aggregate the successes.

    Seeds are run in sorted order (possibly concurrently), so reordering the list changes nothing.
    Failed seeds are reported; the aggregate needs at least two successes.
    """

    if len(seeds) < 2:
        raise InvalidArgumentError(f'A sweep needs at least 2 seeds, got {len(seeds)}')

    seeds = sorted(seeds)
    directory = Path(config.experiment.out)

    def attempt(seed: int) -> SeedResult | BlockError:
        try:
            return run_seed(config, seed, directory)
        except BlockError as e:
            return e

    outcomes = map_ordered(attempt, seeds)
    results = [r for r in outcomes if isinstance(r, SeedResult)]
    failures = {}
    for seed, outcome in zip(seeds, outcomes):
        if isinstance(outcome, BlockError):
            cause = root_cause(outcome)
            LOGGER.warning('Seed %d failed: %s', seed, cause)
            failures[str(seed)] = {'error': type(cause).__name__, 'message': str(cause)}

    if len(results) < 2:
        first = next(o for o in outcomes if isinstance(o, BlockError))
        raise first

    return {
        'algorithm': config.experiment.algorithm,
        'config': config.resolved(),
        'seeds': {str(r.seed): r.summary for r in results},
        'artifacts': [r.artifact for r in results],
        'failures': failures,
        'quantiles': _quantiles(config, results),
    }


def run(config: ExperimentConfig) -> tuple[dict, Path]:
    """Run the configured experiment and write ``<algorithm>_summary.json``.

    Returns the summary and its path.
    """

    ex = config.experiment
    set_threads(ex.threads)
    directory = Path(ex.out)
    directory.mkdir(parents=True, exist_ok=True)

    if _is_seeded(config) and len(ex.seeds) > 1:
        summary = sweep(config, list(ex.seeds))
    else:
        result = run_seed(config, ex.seeds[0], directory)
        summary = {
            'algorithm': ex.algorithm,
            'config': config.resolved(),
            'seeds': {str(result.seed): result.summary},
            'artifacts': [result.artifact],
            'failures': {},
        }

    path = write_json(directory / f'{ex.algorithm}_summary.json', summary)
    LOGGER.info('Wrote %s', path)

    return summary, path
