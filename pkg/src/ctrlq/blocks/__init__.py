from ._algorithms import (
    AlgorithmBlock,
    CheckAssumptionsBlock,
    HjbOracleBlock,
    ImproveBlock,
    MeanfieldBlock,
    QLearnBlock,
    RegretBlock,
    SemiQBlock,
)
from ._problem import GapsBlock, ProblemBlock
from ._writer import ArtifactWriterBlock

ALGORITHM_BLOCKS = {
    'improve': ImproveBlock,
    'semi-q': SemiQBlock,
    'q-learn': QLearnBlock,
    'hjb-oracle': HjbOracleBlock,
    'meanfield-h': MeanfieldBlock,
    'check-assumptions': CheckAssumptionsBlock,
}

__all__ = [
    'ALGORITHM_BLOCKS',
    'AlgorithmBlock',
    'ArtifactWriterBlock',
    'CheckAssumptionsBlock',
    'GapsBlock',
    'HjbOracleBlock',
    'ImproveBlock',
    'MeanfieldBlock',
    'ProblemBlock',
    'QLearnBlock',
    'RegretBlock',
    'SemiQBlock',
]
