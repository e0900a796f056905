"""File formats: edge lists, sidecars, decompositions, result tables.

Floats are written with 12 significant digits everywhere so output files
are byte-stable across platforms.
"""

import csv
import json
import math
from pathlib import Path

import numpy as np

from .graph import PairGraph


def fmt(x):
    """Format a number with 12 significant digits."""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    out = f"{x:.12g}"
    return "0" if out == "-0" else out


def _round(obj):
    if isinstance(obj, dict):
        return {k: _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_round(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return None
        return float(fmt(x)) + 0.0
    return obj


def dumps(obj):
    """Serialize to JSON with rounded floats and sorted keys."""
    return json.dumps(_round(obj), indent=2, sort_keys=True) + "\n"


def write_json(path, obj):
    Path(path).write_text(dumps(obj), encoding="utf-8")


def write_table(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([v if isinstance(v, str) else fmt(v) for v in row])


def sidecar_path(path):
    return Path(path).with_suffix(".json")


def write_graph(path, graph, meta=None, with_means=False):
    """Write ``i,j,weight`` (plus ``mean`` when requested) and an optional JSON sidecar."""
    header = ["i", "j", "weight"] + (["mean"] if with_means else [])
    rows = []
    for (i, j), w, y in zip(graph.edges.tolist(), graph.weights, graph.means):
        rows.append([i, j, w] + ([y] if with_means else []))
    write_table(path, header, rows)
    if meta is not None:
        write_json(sidecar_path(path), meta)


def read_graph(path, n=None):
    """Read an edge-list CSV written by :func:`write_graph`.

    ``n`` falls back to the sidecar's ``n`` and then to the largest index + 1.
    A ``mean`` column, when present, supplies the mean scores.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = [h.strip() for h in next(reader, [])]
        if header[:3] != ["i", "j", "weight"]:
            raise ValueError(f"{path}: line 1: expected header i,j,weight[,mean]")
        has_mean = header[3:4] == ["mean"]
        edges, weights, means = [], [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                edges.append((int(row[0]), int(row[1])))
                weights.append(float(row[2]))
                means.append(float(row[3]) if has_mean else 0.0)
            except (ValueError, IndexError):
                raise ValueError(f"{path}: line {lineno}: cannot parse {row!r}") from None
    if n is None:
        side = sidecar_path(path)
        if side.exists():
            n = int(json.loads(side.read_text(encoding="utf-8"))["n"])
        else:
            n = max((max(e) for e in edges), default=-1) + 1
    return PairGraph.from_edges(n, edges, weights, means)
