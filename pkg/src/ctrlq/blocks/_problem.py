import numpy as np
import param

from .._block import Block, BlockValidateError
from .._experiment import ExperimentConfig
from .._model import ProblemSpec
from .._regret import quantile_curve
from ..etc import read_gaps


class ProblemBlock(Block):
    """Build the control problem named by the experiment config."""

    in_config = param.ClassSelector(class_=ExperimentConfig, doc='The validated experiment config')
    in_seed = param.Integer(default=0, bounds=(0, None), doc='The seed of this run')

    out_spec = param.ClassSelector(class_=ProblemSpec)
    out_config = param.ClassSelector(class_=ExperimentConfig)
    out_seed = param.Integer(default=0)

    def prepare(self):
        if self.in_config is None:
            raise BlockValidateError(block_name=self.name, message='No experiment config')

    def execute(self):
        spec = self.in_config.build_problem()
        self.logger.debug('Problem %s: T=%g gamma=%g beta=%g', spec.name, spec.T, spec.gamma, spec.beta)

        self.param.update(out_spec=spec, out_config=self.in_config, out_seed=self.in_seed)


class GapsBlock(Block):
    """Read per-iteration gaps from trace CSV files; several files give their cross-file quantile curve."""

    in_config = param.ClassSelector(class_=ExperimentConfig)

    out_gaps = param.Array(doc='The gap curve')
    out_config = param.ClassSelector(class_=ExperimentConfig)
    out_sources = param.List(default=[], item_type=str)

    def prepare(self):
        if self.in_config is None or not self.in_config.regret.inputs:
            raise BlockValidateError(block_name=self.name, message='[regret] inputs names no trace files')

    def execute(self):
        inputs = self.in_config.regret.inputs
        curves = [read_gaps(path) for path in inputs]
        if len(curves) == 1:
            gaps = curves[0]
        else:
            n = min(len(c) for c in curves)
            eps = self.in_config.experiment.eps[0]
            gaps = quantile_curve(np.stack([c[:n] for c in curves]), eps)
            self.logger.info('Gap curve: %g quantile of %d traces over %d iterations', 1 - eps, len(curves), n)

        self.param.update(out_gaps=gaps, out_config=self.in_config, out_sources=list(inputs))
