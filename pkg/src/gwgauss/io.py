"""JSON and CSV interchange formats.

Gaussian::

    {"mean": [m1, ..., md], "cov": [[c11, ..., c1d], ..., [cd1, ..., cdd]]}

Point cloud CSV: one point per row, comma separated. An optional header row
is allowed; if its last field is ``weight`` the last column holds the atom
weights, otherwise weights are uniform. Point cloud JSON is either a bare list
of points or ``{"points": [[...]], "weights": [...]}``.

Floats are written with ``repr``, the shortest string that round-trips.
"""

import csv
import io
import json
import math

import numpy as np

from .closed_form import GwBounds
from .errors import SchemaError
from .gaussian import AffineMap, PointCloud, make_gaussian


def fmt(x):
    return repr(float(x))


def _number(value, where):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(f"expected a number, got {type(value).__name__}", where)
    if not math.isfinite(value):
        raise SchemaError("non-finite number", where)
    return float(value)


def _vector(value, where):
    if not isinstance(value, list):
        raise SchemaError("expected a list of numbers", where)
    return np.array([_number(v, f"{where}[{i}]") for i, v in enumerate(value)], dtype=np.float64)


def _matrix(value, where, rows=None, cols=None):
    if not isinstance(value, list) or not value:
        raise SchemaError("expected a non-empty list of rows", where)
    out = [_vector(r, f"{where}[{i}]") for i, r in enumerate(value)]
    width = out[0].size if cols is None else cols
    for i, r in enumerate(out):
        if r.size != width:
            raise SchemaError(f"row has {r.size} entries, expected {width}", f"{where}[{i}]")
    if rows is not None and len(out) != rows:
        raise SchemaError(f"expected {rows} rows, got {len(out)}", where)
    return np.vstack(out)


def _object(value, keys, where="$"):
    if not isinstance(value, dict):
        raise SchemaError("expected a JSON object", where)
    missing = [k for k in keys if k not in value]
    if missing:
        raise SchemaError(f"missing field(s) {', '.join(missing)}", where)
    return value


def loads(text, where="$"):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc.msg}", f"line {exc.lineno}") from None


def gaussian_from_dict(d):
    _object(d, ("mean", "cov"))
    mean = _vector(d["mean"], "$.mean")
    if mean.size == 0:
        raise SchemaError("mean must be non-empty", "$.mean")
    cov = _matrix(d["cov"], "$.cov", rows=mean.size, cols=mean.size)
    return make_gaussian(mean, cov)


def gaussian_to_dict(g):
    return {"mean": g.mean.tolist(), "cov": g.cov.tolist()}


def affine_map_to_dict(t):
    return {"matrix": t.matrix.tolist(), "offset": t.offset.tolist()}


def affine_map_from_dict(d):
    _object(d, ("matrix", "offset"))
    offset = _vector(d["offset"], "$.offset")
    matrix = _matrix(d["matrix"], "$.matrix", rows=offset.size)
    return AffineMap(matrix, offset)


def bounds_to_dict(b):
    return {
        "lower": b.lower,
        "upper": b.upper,
        "exact": b.exact,
        "gap": b.gap,
        "gap_cap": b.gap_cap,
        "swapped": b.swapped,
        "source_rank": b.source_rank,
        "target_rank": b.target_rank,
    }


def bounds_from_dict(d):
    _object(d, ("lower", "upper", "exact", "gap", "gap_cap"))
    exact = None if d["exact"] is None else _number(d["exact"], "$.exact")
    return GwBounds(
        lower=_number(d["lower"], "$.lower"),
        upper=_number(d["upper"], "$.upper"),
        exact=exact,
        gap=_number(d["gap"], "$.gap"),
        gap_cap=_number(d["gap_cap"], "$.gap_cap"),
        swapped=bool(d.get("swapped", False)),
        source_rank=int(d.get("source_rank", 0)),
        target_rank=int(d.get("target_rank", 0)),
    )


REPORT_FIELDS = ("objective", "iterations", "converged", "marginal_error")


def report_to_dict(r):
    return {
        "objective": r.objective,
        "iterations": r.iterations,
        "converged": r.converged,
        "marginal_error": r.marginal_error,
        "epsilon": r.epsilon,
        "restarts": r.restarts,
    }


def report_from_dict(d):
    """Validate a serialized solve report; returns the dict with typed fields."""
    _object(d, REPORT_FIELDS)
    if not isinstance(d["converged"], bool):
        raise SchemaError("expected a boolean", "$.converged")
    if isinstance(d["iterations"], bool) or not isinstance(d["iterations"], int):
        raise SchemaError("expected an integer", "$.iterations")
    return {
        "objective": _number(d["objective"], "$.objective"),
        "iterations": d["iterations"],
        "converged": d["converged"],
        "marginal_error": _number(d["marginal_error"], "$.marginal_error"),
    }


def read_gaussian(path):
    with open(path) as fh:
        return gaussian_from_dict(loads(fh.read()))


def parse_cloud_csv(text, where="<csv>"):
    rows = [(i + 1, [f.strip() for f in r]) for i, r in enumerate(csv.reader(io.StringIO(text))) if r]
    rows = [(i, r) for i, r in rows if not r[0].startswith("#")]
    if not rows:
        raise SchemaError("empty file", where)
    weighted = False
    first = rows[0][1]
    try:
        [float(v) for v in first]
    except ValueError:
        weighted = first[-1].lower() == "weight"
        rows = rows[1:]
    if not rows:
        raise SchemaError("no points", where)
    return _cloud_from_rows(rows, weighted, where)


def _cloud_from_rows(numbered, weighted, where):
    width = len(numbered[0][1])
    values = []
    for lineno, row in numbered:
        if len(row) != width:
            raise SchemaError(f"expected {width} fields, got {len(row)}", f"{where}:{lineno}")
        try:
            values.append([float(v) for v in row])
        except ValueError:
            raise SchemaError("non-numeric field", f"{where}:{lineno}") from None
    arr = np.array(values, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise SchemaError("non-finite value", where)
    if weighted:
        if arr.shape[1] < 2:
            raise SchemaError("weighted cloud needs at least one coordinate column", where)
        w = arr[:, -1]
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-9:
            raise SchemaError("weights must be nonnegative and sum to 1", f"{where}: weight column")
        return PointCloud(arr[:, :-1], w / w.sum())
    return PointCloud.uniform(arr)


def cloud_from_json(d, where="$"):
    if isinstance(d, list):
        return PointCloud.uniform(_matrix(d, where))
    _object(d, ("points",), where)
    pts = _matrix(d["points"], f"{where}.points")
    if "weights" not in d:
        return PointCloud.uniform(pts)
    w = _vector(d["weights"], f"{where}.weights")
    if w.size != pts.shape[0]:
        raise SchemaError("one weight per point is required", f"{where}.weights")
    if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-9:
        raise SchemaError("weights must be nonnegative and sum to 1", f"{where}.weights")
    return PointCloud(pts, w / w.sum())


def read_cloud(path):
    with open(path) as fh:
        text = fh.read()
    if path.endswith(".json"):
        return cloud_from_json(loads(text))
    return parse_cloud_csv(text, path)


def write_csv(fh, header, rows):
    fh.write(",".join(header) + "\n")
    for row in rows:
        fh.write(",".join(fmt(v) for v in row) + "\n")


def cloud_to_csv(cloud):
    out = io.StringIO()
    d = cloud.dim
    write_csv(out, [f"x{i}" for i in range(d)] + ["weight"], np.column_stack([cloud.points, cloud.weights]))
    return out.getvalue()


def plan_to_csv(plan):
    out = io.StringIO()
    for row in plan.matrix:
        out.write(",".join(fmt(v) for v in row) + "\n")
    return out.getvalue()
