"""Readers and writers for the delimited-text and JSON formats used by the CLI."""

import json
import os

import numpy as np

from .complex import export_complex, import_complex
from .errors import DimensionMismatch, ParseError
from .features import FeatureSet, PointTable


def _delimiter(path, first_line):
    ext = os.path.splitext(str(path))[1].lower()
    if ext in (".tsv", ".tab", ".txt") or "\t" in first_line:
        return "\t"
    return ","


def _is_number(s):
    try:
        float(s)
    except ValueError:
        return False
    return True


def read_rows(path):
    """Non-blank rows as ``(line_number, fields)``; delimiter from extension or content."""
    with open(path, newline="") as fh:
        lines = fh.read().splitlines()
    content = [(i + 1, ln) for i, ln in enumerate(lines) if ln.strip() and not ln.startswith("#")]
    if not content:
        raise ParseError(f"{path}: file is empty")
    delim = _delimiter(path, content[0][1])
    return [(no, [c.strip() for c in ln.split(delim)]) for no, ln in content]


def read_matrix(path):
    """Numeric matrix with an optional header row and optional row-label column."""
    rows = read_rows(path)
    first = rows[0][1]
    header = not all(_is_number(c) for c in first[1:]) or (len(first) == 1 and not _is_number(first[0]))
    if header:
        rows = rows[1:]
    if not rows:
        raise ParseError(f"{path}: no data rows")
    labelled = not _is_number(rows[0][1][0])
    width = None
    data = []
    for no, fields in rows:
        if labelled:
            fields = fields[1:]
        if width is None:
            width = len(fields)
        if len(fields) != width:
            raise ParseError(f"{path}:{no}: expected {width} values, found {len(fields)}")
        vals = []
        for j, c in enumerate(fields):
            try:
                vals.append(float(c))
            except ValueError:
                raise ParseError(f"{path}:{no}: column {j + 1}: {c!r} is not a number") from None
        data.append(vals)
    return np.array(data, dtype=np.float64), [no for no, _ in rows]


def read_points(path):
    return read_matrix(path)[0]


def read_distance_matrix(path, atol=1e-9):
    """Square symmetric nonnegative matrix with zero diagonal; errors name the cell."""
    d, lines = read_matrix(path)
    n, p = d.shape
    if n != p:
        raise ParseError(f"{path}: distance matrix must be square, got {n} rows and {p} columns")
    scale = max(1.0, float(np.abs(d).max()))
    for i in range(n):
        if abs(d[i, i]) > atol * scale:
            raise ParseError(f"{path}:{lines[i]}: diagonal cell ({i}, {i}) is {d[i, i]!r}, expected 0")
    bad = np.argwhere(np.abs(d - d.T) > atol * scale)
    if len(bad):
        i, j = (int(x) for x in bad[0])
        raise ParseError(
            f"{path}:{lines[i]}: cell ({i}, {j}) = {d[i, j]!r} differs from cell ({j}, {i}) = {d[j, i]!r}; "
            "matrix is not symmetric")
    neg = np.argwhere(d < 0)
    if len(neg):
        i, j = (int(x) for x in neg[0])
        raise ParseError(f"{path}:{lines[i]}: cell ({i}, {j}) is negative")
    d = 0.5 * (d + d.T)
    np.fill_diagonal(d, 0.0)
    return d


def read_point_features(path):
    """1-point features: one row per feature, first column the name, then samples."""
    rows = read_rows(path)
    if not all(_is_number(c) for c in rows[0][1][1:]):
        rows = rows[1:]
    names, values = [], []
    width = None
    for no, fields in rows:
        if len(fields) < 2:
            raise ParseError(f"{path}:{no}: a feature row needs a name and at least one value")
        if width is None:
            width = len(fields)
        if len(fields) != width:
            raise ParseError(f"{path}:{no}: feature {fields[0]!r} has {len(fields) - 1} values, "
                             f"expected {width - 1}")
        try:
            values.append([float(c) for c in fields[1:]])
        except ValueError:
            raise ParseError(f"{path}:{no}: feature {fields[0]!r} has a non-numeric value") from None
        names.append(fields[0])
    if not names:
        raise ParseError(f"{path}: no features")
    return FeatureSet(names, np.array(values), arity=1)


def read_pair_features(path, n_samples):
    """2-point features as ``i j value`` triplets (one feature) or ``name i j value``."""
    rows = read_rows(path)
    first = rows[0][1]
    if not _is_number(first[-1]) or not _is_number(first[-2]):
        rows = rows[1:]
    tables = {}
    default = os.path.splitext(os.path.basename(str(path)))[0]
    for no, fields in rows:
        if len(fields) == 3:
            name, rest = default, fields
        elif len(fields) == 4:
            name, rest = fields[0], fields[1:]
        else:
            raise ParseError(f"{path}:{no}: expected 3 or 4 columns, found {len(fields)}")
        try:
            i, j, v = int(rest[0]), int(rest[1]), float(rest[2])
        except ValueError:
            raise ParseError(f"{path}:{no}: malformed triplet {rest!r}") from None
        if not 0 <= i < j < n_samples:
            raise ParseError(f"{path}:{no}: need 0 <= i < j < {n_samples}, got ({i}, {j})")
        table = tables.setdefault(name, {})
        if (i, j) in table:
            raise ParseError(f"{path}:{no}: duplicate pair ({i}, {j}) for feature {name!r}")
        table[(i, j)] = v
    names = list(tables)
    return FeatureSet(names, [PointTable.from_dict(tables[nm], n_samples) for nm in names],
                      arity=2, n_samples=n_samples)


def load_complex(path, scheme=None):
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}:{exc.lineno}: invalid JSON: {exc.msg}") from None
    return import_complex(doc, scheme)


def dump_complex(k):
    return json.dumps(export_complex(k), indent=None, separators=(",", ":")) + "\n"


def simplex_id(row):
    return "-".join(str(int(v)) for v in row)


def eigenmap_tsv(k, q, Y):
    Y = np.asarray(Y)
    if Y.shape[0] != k.n_simplices(q):
        raise DimensionMismatch("eigenmap rows do not match the simplices")
    lines = ["simplex\t" + "\t".join(f"y{i + 1}" for i in range(Y.shape[1]))]
    for row, coords in zip(k.simplices_at(q), Y):
        lines.append(simplex_id(row) + "\t" + "\t".join(repr(float(x)) for x in coords))
    return "\n".join(lines) + "\n"


def skeleton_dot(k):
    lines = ["graph complex {"]
    lines += [f"  {v};" for v in range(k.vertex_count)]
    w1 = k.weights[1] if k.weights is not None and k.dim >= 1 else None
    for e, (i, j) in enumerate(k.simplices[1].tolist() if k.dim >= 1 else []):
        attr = f" [weight={float(w1[e])!r}]" if w1 is not None else ""
        lines.append(f"  {i} -- {j}{attr};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def skeleton_json(k):
    edges = k.simplices[1].tolist() if k.dim >= 1 else []
    doc = {"nodes": list(range(k.vertex_count)), "edges": edges}
    if k.weights is not None:
        doc["node_weights"] = k.weights[0].tolist()
        if k.dim >= 1:
            doc["edge_weights"] = k.weights[1].tolist()
    return json.dumps(doc) + "\n"
