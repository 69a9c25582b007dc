"""CSV reading and writing.

Data files are UTF-8 CSV with a required header row.  Lines starting with
``#`` are comments (the tables written here put their metadata there).
"""

import csv
import io
import sys

import numpy as np

from .errors import ValidationError
from .estimation import IvDataset
from .spectroscopy import SpectrumTrace

SPECTRUM_COLUMNS = ("detuning_hz", "magnitude")
IV_COLUMNS = ("v_dc_volts", "current_amps")


def _data_lines(fh):
    for line in fh:
        if line.lstrip().startswith("#") or not line.strip():
            continue
        yield line


def read_columns(source, expected):
    """Read a numeric CSV whose header must equal ``expected``.

    ``source`` is a path or an open text file.  Returns one float array per
    column.
    """
    if hasattr(source, "read"):
        return _read_columns(source, expected, getattr(source, "name", "<stream>"))
    with open(source, encoding="utf-8", newline="") as fh:
        return _read_columns(fh, expected, str(source))


def _read_columns(fh, expected, label):
    reader = csv.reader(_data_lines(fh))
    header = next(reader, None)
    if header is None:
        raise ValidationError(f"{label}: empty file, expected header {','.join(expected)}")
    header = tuple(h.strip() for h in header)
    if header != tuple(expected):
        raise ValidationError(
            f"{label}: header {','.join(header)!r} does not match {','.join(expected)!r}"
        )
    rows = []
    for lineno, row in enumerate(reader, start=2):
        if len(row) != len(expected):
            raise ValidationError(f"{label}: row {lineno} has {len(row)} fields")
        try:
            rows.append([float(v) for v in row])
        except ValueError:
            raise ValidationError(f"{label}: row {lineno} is not numeric: {row!r}") from None
    if not rows:
        raise ValidationError(f"{label}: no data rows")
    data = np.array(rows)
    return [data[:, j] for j in range(len(expected))]


def read_spectrum(source):
    detuning, magnitude = read_columns(source, SPECTRUM_COLUMNS)
    return SpectrumTrace(detuning, magnitude)


def read_iv(source, **meta):
    """Read an IV curve; ``meta`` is forwarded to :class:`IvDataset`."""
    v, i = read_columns(source, IV_COLUMNS)
    return IvDataset(v, i, **meta)


def format_value(x):
    """Deterministic text form of a table cell."""
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return f"{float(x) + 0.0:.12g}"  # + 0.0 folds -0 into 0


def format_table(columns, rows, meta=None):
    """CSV text with ``#``-prefixed ``key: value`` metadata lines on top."""
    buf = io.StringIO()
    for key, value in (meta or {}).items():
        buf.write(f"# {key}: {value}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_value(v) for v in row])
    return buf.getvalue()


def write_text(text, path):
    """Write to ``path``, or to standard output when ``path`` is ``-`` or None."""
    if path in (None, "-"):
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def write_spectrum(trace, path, meta=None):
    rows = zip(trace.detuning, trace.magnitude)
    write_text(format_table(SPECTRUM_COLUMNS, rows, meta), path)


def write_iv(v_dc, current, path, meta=None):
    write_text(format_table(IV_COLUMNS, zip(v_dc, current), meta), path)
