from pathlib import Path

import param

from .._block import Block, BlockValidateError
from ..etc import write_csv


class ArtifactWriterBlock(Block):
    """Write a result table as CSV into the output directory."""

    in_rows = param.List(default=[])
    in_columns = param.List(default=[], item_type=str)
    in_summary = param.Dict(default={})
    in_name = param.String(default='')

    directory = param.String(default='.', doc='The output directory')

    out_path = param.String(default='', doc='The CSV file written')
    out_summary = param.Dict(default={})

    def prepare(self):
        if not self.in_name:
            raise BlockValidateError(block_name=self.name, message='No artifact name')

        if not self.in_columns:
            raise BlockValidateError(block_name=self.name, message=f'Artifact {self.in_name} has no columns')

    def execute(self):
        path = write_csv(Path(self.directory) / f'{self.in_name}.csv', self.in_rows, self.in_columns)
        self.logger.debug('Wrote %d rows to %s', len(self.in_rows), path)

        self.param.update(out_path=str(path), out_summary=self.in_summary)
