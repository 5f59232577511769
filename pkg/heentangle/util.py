"""Shared helpers: exceptions, atomic persistence, hashing and thread caps."""
import io
import os
import csv
import json
import hashlib
import logging
import tempfile

import numpy as np

from heentangle._version import __version__

logger = logging.getLogger(__name__)

# Environment variable capping the number of parallel workers
THREADS_ENV = 'HE_ENTANGLE_THREADS'


class ConfigError(ValueError):
    """Invalid configuration value, tagged with the offending field."""

    def __init__(self, field, message):
        super().__init__('{}: {}'.format(field, message))
        self.field = field


class NumericalFailure(RuntimeError):
    """
    Numerical breakdown in a solver, fit or integration.

    Parameters
    ----------
    message : str
        Description of the failure.
    alpha : float, optional
        Nonlinear parameter at which the failure occurred.
    partial : object, optional
        Partial result computed before the failure.

    """

    def __init__(self, message, alpha=None, partial=None):
        super().__init__(message)
        self.alpha = alpha
        self.partial = partial


class SumRuleError(NumericalFailure):
    """Occupation numbers do not sum to one within tolerance."""

    def __init__(self, deficit, tolerance):
        super().__init__('Sum rule violated: deficit {:.3e} exceeds '
                         'tolerance {:.1e}.'.format(deficit, tolerance))
        self.deficit = deficit
        self.tolerance = tolerance


class FitError(NumericalFailure):
    """Lorentzian least-squares fit did not converge."""


def num_threads():
    """
    Number of parallel workers allowed.

    Returns
    -------
    int
        Value of HE_ENTANGLE_THREADS if set, else -1 (all cores, joblib
        convention).

    """
    value = os.environ.get(THREADS_ENV, '').strip()
    if not value:
        return -1

    try:
        threads = int(value)
    except ValueError:
        raise ValueError('{} must be an integer, got {!r}.'.format(
            THREADS_ENV, value))

    if threads < 1:
        raise ValueError('{} must be positive.'.format(THREADS_ENV))

    return threads


def hash_dict(record, length=16):
    """
    Hash a JSON-serializable dictionary.

    Parameters
    ----------
    record : dict
        Dictionary to hash; keys are sorted before hashing.
    length : int
        Number of hexadecimal digits to keep, (def=16).

    Returns
    -------
    str
        Truncated SHA-256 digest of the canonical JSON encoding.

    """
    canonical = json.dumps(record, sort_keys=True, separators=(',', ':'))
    return hashlib.sha256(canonical.encode('utf-8')).hexdigest()[:length]


def provenance(config_hash):
    """Provenance record attached to every output."""
    return {'config_hash': config_hash, 'version': __version__}


def _to_builtin(obj):
    """Map numpy scalars and arrays to JSON-friendly Python objects."""
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError('Object of type {} is not JSON serializable.'.format(
        type(obj).__name__))


def atomic_write(path, text):
    """
    Write text to a file atomically.

    The text goes to a temporary file in the target directory, which then
    replaces the destination in one rename.

    Parameters
    ----------
    path : str
        Destination filename.
    text : str
        File contents.

    Returns
    -------
    str
        The destination filename.

    """
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)

    # Write next to the destination so the rename stays on one filesystem
    fd, tmp = tempfile.mkstemp(dir=directory, prefix='.tmp-', suffix='.part')
    try:
        with os.fdopen(fd, 'w', newline='') as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise

    logger.debug('Wrote %s', path)
    return path


def write_json(path, record):
    """Atomically write a dictionary as sorted, indented JSON."""
    text = json.dumps(record, sort_keys=True, indent=2, default=_to_builtin)
    return atomic_write(path, text + '\n')


def read_json(path):
    """Read a JSON record."""
    with open(path, 'r') as handle:
        return json.load(handle)


def write_csv(path, header, rows, config_hash='', status=None):
    """
    Atomically write a table as CSV with a provenance comment line.

    Parameters
    ----------
    path : str
        Destination filename.
    header : list[str]
        Column names.
    rows : array
        Table body, number of rows by len(header).
    config_hash : str
        Hash of the configuration that produced the table.
    status : str, optional
        Extra status comment, e.g. 'partial failed_alpha=0.25'.

    Returns
    -------
    str
        The destination filename.

    """
    buffer = io.StringIO()
    buffer.write('# heentangle {} config={}\n'.format(__version__,
                                                      config_hash))
    if status:
        buffer.write('# status={}\n'.format(status))

    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(header)
    writer.writerows([_format_cell(value) for value in row] for row in rows)

    return atomic_write(path, buffer.getvalue())


def _format_cell(value):
    """Format one CSV cell; floats keep full round-trip precision."""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def read_csv(path):
    """
    Read a CSV table written by write_csv.

    Returns
    -------
    header : list[str]
        Column names.
    table : array
        Numeric table body, number of rows by number of columns.
    comments : list[str]
        Comment lines without the leading '#'.

    """
    comments = []
    header = None
    skip = 0
    has_rows = False
    with open(path, 'r', newline='') as handle:
        for line in handle:
            if header is None:
                skip += 1
                if line.startswith('#'):
                    comments.append(line[1:].strip())
                elif line.strip():
                    header = next(csv.reader([line]))
            elif line.strip():
                has_rows = True
                break

    if header is None:
        raise ValueError('No header found in {}.'.format(path))
    if not has_rows:
        return header, np.empty((0, len(header))), comments

    table = np.loadtxt(path, delimiter=',', comments='#', skiprows=skip,
                       ndmin=2, dtype='float64')
    if table.shape[1] != len(header):
        raise ValueError('{} has {} columns under a {}-column header.'.format(
            path, table.shape[1], len(header)))
    return header, table, comments
