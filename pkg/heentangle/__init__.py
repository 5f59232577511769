__all__ = ['basis', 'integrals', 'eigensolver', 'stabilization', 'schmidt',
           'oracle', 'cli', 'util', 'viz']
from heentangle._version import __version__
