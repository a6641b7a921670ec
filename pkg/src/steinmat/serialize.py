"""Plain-text serialization for points, samples and reports.

Matrices are written as row-major JSON arrays.  Floats go through Python's
shortest-repr formatting (<= 17 significant digits), which round-trips
bit-exactly.  Sample files are JSON Lines: a header object followed by one
point record per line.
"""

import json

import numpy as np

from .errors import DimensionError, DomainError


def matrix_to_lists(m):
    return [[float(v) for v in row] for row in np.asarray(m, float)]


def matrix_from_lists(rows):
    m = np.asarray(rows, float)
    if m.ndim != 2:
        raise DimensionError("matrix block must be a list of rows")
    return m


def _jsonify(obj):
    if isinstance(obj, np.ndarray):
        return matrix_to_lists(obj) if obj.ndim == 2 else [float(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, dict):
        return {k: _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    return obj


def dump_json(obj, path):
    with open(path, "w") as fh:
        json.dump(_jsonify(obj), fh, indent=2)
        fh.write("\n")


def write_samples(path, header, points):
    """Sample file: header {manifold, N, r, family, params, seed, method}."""
    with open(path, "w") as fh:
        fh.write(json.dumps(_jsonify(header)) + "\n")
        for p in points:
            fh.write(json.dumps({"matrix": matrix_to_lists(p)}) + "\n")


def read_samples(path):
    with open(path) as fh:
        lines = [ln for ln in fh.read().splitlines() if ln.strip()]
    if not lines:
        raise DomainError(f"empty sample file {path}")
    header = json.loads(lines[0])
    points = np.stack(
        [matrix_from_lists(json.loads(ln)["matrix"]) for ln in lines[1:]]
    ) if len(lines) > 1 else np.empty((0, 0, 0))
    return header, points


def write_csv(path, fieldnames, rows):
    import csv

    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fieldnames)
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
