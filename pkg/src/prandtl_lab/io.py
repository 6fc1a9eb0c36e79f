"""CSV and SVG artifact writers."""

import csv
import json
from pathlib import Path

import numpy as np


def write_csv(path, columns, rows, notes=()):
    """Write ``rows`` under a ``# ``-prefixed preamble of ``notes``.

    Floats use ``repr`` so that identical inputs give byte-identical files.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        for note in notes:
            fh.write(f"# {note}\n")
        w = csv.writer(fh)
        w.writerow(columns)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    return path


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return int(v)
    return v


def read_csv(path):
    """Return ``(notes, columns, rows)`` with numeric cells parsed as floats."""
    notes, body = [], []
    for line in Path(path).read_text().splitlines():
        (notes if line.startswith("#") else body).append(line)
    reader = csv.reader(body)
    columns = next(reader)
    rows = [[_num(c) for c in r] for r in reader]
    return [n[2:] for n in notes], columns, rows


def _num(c):
    try:
        return float(c)
    except ValueError:
        return c


def complex_columns(name, values):
    """Split a complex array into ``re_name`` and ``im_name`` columns."""
    values = np.asarray(values)
    return {f"re_{name}": values.real, f"im_{name}": values.imag}


def write_json(path, record):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(record, indent=2, sort_keys=True, default=str) + "\n")
    return path


def save_svg(fig, path):
    """Save a matplotlib figure as a single SVG file and close it."""
    import matplotlib.pyplot as plt

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path


def figure(nrows=1, ncols=1, **kw):
    """A figure on the non-interactive Agg backend."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt.subplots(nrows, ncols, **kw)
