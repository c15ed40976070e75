"""CSV and OBJ writers for point clouds."""

import contextlib
import csv
import sys

import numpy as np

from .errors import ValidationError

FORMATS = ("csv", "obj")


@contextlib.contextmanager
def _open(path):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _cell(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path, header, rows):
    """Write ``rows`` (an iterable of sequences) under ``header``; ``-`` or None is stdout."""
    with _open(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_cell(v) for v in row])


def write_obj(path, points, comment=None):
    """Vertex-only OBJ of an (m, 3) point cloud."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise ValidationError(f"OBJ export needs 3-dimensional points, got shape {pts.shape}", "format")
    with _open(path) as fh:
        if comment:
            for line in str(comment).splitlines():
                fh.write(f"# {line}\n")
        for x, y, z in pts:
            fh.write(f"v {float(x)!r} {float(y)!r} {float(z)!r}\n")


def read_csv(path):
    """Header and float/str rows back from :func:`write_csv` (for round trips)."""
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        return header, [row for row in r]
