from ._io import read_gaps, read_rows, write_csv, write_json

__all__ = ['read_gaps', 'read_rows', 'write_csv', 'write_json']
