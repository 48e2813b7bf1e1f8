import math
from dataclasses import asdict

import numpy as np
import param

from .._block import Block, BlockValidateError
from .._errors import InsufficientDataError
from .._experiment import ExperimentConfig
from .._improve import fit_contraction, run_pi
from .._model import ProblemSpec, check_assumptions
from .._qlearn import (
    LearnTrace,
    closed_form_gap,
    example_q_family,
    example_value_oracle,
    mc_gap,
    mean_field_h_closed,
    mean_field_h_mc,
    predicted_mc_ratio,
    run_q_learning,
    run_semi_q,
)
from .._regret import regret_report
from .._value import hjb_solve


class AlgorithmBlock(Block):
    """Run one algorithm on a problem and tabulate the result.

    Subclasses implement ``run()``, returning the table rows, the column order and a summary.
    """

    algorithm = ''
    seeded = True

    in_spec = param.ClassSelector(class_=ProblemSpec)
    in_config = param.ClassSelector(class_=ExperimentConfig)
    in_seed = param.Integer(default=0, bounds=(0, None))

    out_rows = param.List(default=[], doc='Table rows as dictionaries')
    out_columns = param.List(default=[], item_type=str)
    out_summary = param.Dict(default={})
    out_name = param.String(default='', doc='The artifact file stem')

    def prepare(self):
        if self.in_spec is None or self.in_config is None:
            raise BlockValidateError(block_name=self.name, message='A problem and a config are required')

    def run(self, spec: ProblemSpec, config: ExperimentConfig, seed: int) -> tuple[list[dict], list[str], dict]:
        raise NotImplementedError

    def execute(self):
        rows, columns, summary = self.run(self.in_spec, self.in_config, self.in_seed)
        name = f'{self.algorithm}_seed{self.in_seed}' if self.seeded else self.algorithm

        self.param.update(out_rows=rows, out_columns=columns, out_summary=summary, out_name=name)


class ImproveBlock(AlgorithmBlock):
    """Exploratory policy improvement from the uniform policy, measured against the HJB oracle."""

    algorithm = 'improve'

    def run(self, spec, config, seed):
        ex = config.experiment
        trace = run_pi(spec, None, ex.n_iters, tuple(ex.probe), config.mc_config(), seed)

        try:
            contraction = asdict(fit_contraction(trace))
        except InsufficientDataError as e:
            self.logger.info('No contraction fit: %s', e)
            contraction = None

        summary = {
            'optimal_value': trace.optimal_value,
            'final_value': trace.value[-1],
            'final_gap': trace.gap[-1],
            'final_tv_to_optimal': trace.tv_to_optimal[-1],
            'contraction': contraction,
        }

        return trace.to_rows(), ['n', 'J_n', 'stderr', 'gap', 'tv_to_opt'], summary


def _learn_summary(trace: LearnTrace, config: ExperimentConfig) -> dict:
    summary = {
        'final_phi': trace.final_phi,
        'final_theta': trace.final_theta,
        'final_gap': trace.value_gap[-1],
        'final_phi_error': trace.phi_error[-1],
        'clamped_iterations': int(sum(trace.clamped)),
        'schedule': trace.schedule,
        'schedule_theta': trace.schedule_theta,
        'regret': None,
    }

    gaps = np.asarray(trace.value_gap, dtype=float)
    if np.all(np.isfinite(gaps)):
        rg = config.regret
        try:
            report = regret_report(gaps, nu=rg.nu, rho=rg.rho, mode=rg.mode, window=rg.window, linear_slope=rg.linear_slope)
            summary['regret'] = {**report.summary(), 'cumulative': float(report.cumulative[-1])}
        except InsufficientDataError:
            pass

    return summary


class _LearnBlock(AlgorithmBlock):
    """Shared settings of the learning blocks."""

    def gap_fn(self, spec: ProblemSpec, config: ExperimentConfig, seed: int):
        ex = config.experiment
        probe = tuple(ex.probe)
        if config.qlearn.eval_paths == 0:
            return closed_form_gap(spec, probe)

        optimal = float(spec.fixture['optimal_value'](*probe))

        return mc_gap(spec, probe, optimal, config.qlearn.eval_paths, ex.dt, seed)

    def options(self, config: ExperimentConfig) -> dict:
        q = config.qlearn

        return {
            'batch': config.experiment.batch,
            'phi0': q.phi0,
            'clamp': q.clamp,
            'normalize_by_dt': q.normalize_by_dt,
        }


class SemiQBlock(_LearnBlock):
    """Semi-q-learning of the example family, with the exact value of the current policy as oracle."""

    algorithm = 'semi-q'

    def run(self, spec, config, seed):
        ex = config.experiment
        trace = run_semi_q(
            spec,
            example_q_family(spec.T),
            example_value_oracle(spec),
            config.schedule,
            ex.n_iters,
            ex.dt,
            tuple(ex.probe),
            seed,
            gap_fn=self.gap_fn(spec, config, seed),
            **self.options(config),
        )
        rows = trace.to_rows()

        return rows, list(rows[0]), _learn_summary(trace, config)


class QLearnBlock(_LearnBlock):
    """Full q-learning of the example family, learning J(theta) and q(phi) together."""

    algorithm = 'q-learn'

    def run(self, spec, config, seed):
        ex = config.experiment
        theta0 = None if config.qlearn.theta0 is None else [config.qlearn.theta0]
        trace = run_q_learning(
            spec,
            example_q_family(spec.T),
            config.schedule_theta,
            config.schedule,
            ex.n_iters,
            ex.dt,
            tuple(ex.probe),
            seed,
            theta0=theta0,
            gap_fn=self.gap_fn(spec, config, seed),
            **self.options(config),
        )
        rows = trace.to_rows()

        return rows, list(rows[0]), _learn_summary(trace, config)


class HjbOracleBlock(AlgorithmBlock):
    """Solve the exploratory HJB equation on the configured grid."""

    algorithm = 'hjb-oracle'
    seeded = False

    def run(self, spec, config, seed):
        hjb = config.hjb
        surface = hjb_solve(spec, hjb.tsteps, config.hjb_grid(), scheme=hjb.scheme)
        t0, x0 = config.experiment.probe
        summary = {
            'value_at_probe': surface(t0, x0),
            'scheme': hjb.scheme,
            'tsteps': hjb.tsteps,
            'dx': (hjb.xmax - hjb.xmin) / hjb.xsteps,
        }

        return surface.to_rows(), ['t', 'x', 'v'], summary


def _dt_label(dt: float) -> str:
    return f'dt{dt:g}'


class MeanfieldBlock(AlgorithmBlock):
    """Tabulate the example's mean-field drift in closed form and by Monte Carlo at several time steps."""

    algorithm = 'meanfield-h'

    def run(self, spec, config, seed):
        mf = config.meanfield
        normalize = config.qlearn.normalize_by_dt
        x0 = config.experiment.x0 if config.experiment.x0 is not None else config.experiment.probe[1]
        family = example_q_family(spec.T)

        columns = ['phi', 'h_closed']
        for dt in mf.dts:
            label = _dt_label(dt)
            columns += [f'h_mc_{label}', f'stderr_{label}', f'ratio_{label}']

        rows = []
        for phi in mf.phis:
            closed = mean_field_h_closed(phi, spec.T)
            row = {'phi': phi, 'h_closed': closed}
            for dt in mf.dts:
                est = mean_field_h_mc(phi, spec, family, mf.episodes, dt, seed, normalize_by_dt=normalize, x0=x0)
                label = _dt_label(dt)
                row[f'h_mc_{label}'] = est.value
                row[f'stderr_{label}'] = est.stderr
                row[f'ratio_{label}'] = est.value / closed if closed != 0 else math.nan

            self.logger.debug('phi=%g: h=%.6g', phi, closed)
            rows.append(row)

        summary = {
            'normalize_by_dt': normalize,
            'predicted_ratio': {_dt_label(dt): predicted_mc_ratio(dt, spec.T, normalize_by_dt=normalize) for dt in mf.dts},
        }

        return rows, columns, summary


class CheckAssumptionsBlock(AlgorithmBlock):
    """Probe the problem functions against their declared bounds."""

    algorithm = 'check-assumptions'

    def run(self, spec, config, seed):
        report = asdict(check_assumptions(spec, config.experiment.probe_count, seed))
        if not report['passed']:
            self.logger.warning('Assumption check failed: %s', '; '.join(report['failures']))

        row = {k: v for k, v in report.items() if k != 'failures'}
        report['failures'] = list(report['failures'])

        return [row], list(row), report


class RegretBlock(Block):
    """Accumulate a gap curve, fit its regret exponent and overlay the theoretical envelope."""

    in_gaps = param.Array()
    in_config = param.ClassSelector(class_=ExperimentConfig)
    in_sources = param.List(default=[], item_type=str)

    out_rows = param.List(default=[])
    out_columns = param.List(default=[], item_type=str)
    out_summary = param.Dict(default={})
    out_name = param.String(default='regret')

    def prepare(self):
        if self.in_gaps is None or self.in_config is None:
            raise BlockValidateError(block_name=self.name, message='A gap curve and a config are required')

    def execute(self):
        rg = self.in_config.regret
        report = regret_report(self.in_gaps, nu=rg.nu, rho=rg.rho, mode=rg.mode, window=rg.window, linear_slope=rg.linear_slope)
        self.logger.info('Regret exponent %.4f (R^2 %.4f), envelope %s', report.fitted_exponent, report.fit_r_squared, report.envelope_regime)

        self.param.update(
            out_rows=report.to_rows(),
            out_columns=['k', 'gap', 'cumulative', 'envelope'],
            out_summary={**report.summary(), 'sources': self.in_sources},
            out_name='regret',
        )
