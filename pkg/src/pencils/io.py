"""JSON readers and writers for spaces, graphs, currents and pencils."""
from __future__ import annotations

import json
import os
import tempfile
from fractions import Fraction

import numpy as np

from .current import DiscreteCurrent
from .exceptions import InvalidInputError
from .netgraph import NetGraph
from .pencil import Curve, Pencil
from .space import Space


def rational(q) -> str:
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def parse_rational(s) -> Fraction:
    if isinstance(s, (int, Fraction)):
        return Fraction(s)
    if isinstance(s, float):
        raise InvalidInputError("rationals must be given as 'num/den' strings or integers")
    return Fraction(str(s))


def real(x, digits: int = 12):
    """Round to ``digits`` significant digits; non-finite values become None."""
    x = float(x)
    if not np.isfinite(x):
        return None
    return float(f"{x:.{digits}g}")


def write_json_atomic(path, obj) -> None:
    """Write JSON through a temporary file in the target directory, then rename."""
    text = json.dumps(obj, indent=2) + "\n"
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=directory)
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidInputError(f"cannot read {path}: {exc}") from None


def space_from_dict(data: dict) -> Space:
    points = data.get("points")
    matrix = data.get("dist_matrix")
    if (points is None) == (matrix is None):
        raise InvalidInputError("space file needs exactly one of 'points' and 'dist_matrix'")
    metric = data.get("metric", "euclidean" if points is not None else "matrix")
    weights = data.get("weights")
    n = len(points if points is not None else matrix)
    if weights is None or len(weights) != n:
        raise InvalidInputError(f"'weights' must list one mass per point ({n})")
    if points is not None:
        if metric != "euclidean":
            raise InvalidInputError("'points' requires metric 'euclidean'")
        return Space.from_points(points, weights)
    if metric != "matrix":
        raise InvalidInputError("'dist_matrix' requires metric 'matrix'")
    return Space.from_matrix(matrix, weights)


def space_to_dict(space: Space) -> dict:
    if space.coords is not None:
        return {"points": space.coords.tolist(), "dist_matrix": None,
                "weights": space.weights.tolist(), "metric": "euclidean"}
    return {"points": None, "dist_matrix": space.dist.tolist(),
            "weights": space.weights.tolist(), "metric": "matrix"}


def load_space(path) -> Space:
    return space_from_dict(_read_json(path))


def save_space(space: Space, path) -> None:
    write_json_atomic(path, space_to_dict(space))


def graph_to_dict(graph: NetGraph, space: Space = None) -> dict:
    verts = []
    for v in graph.vertices:
        item = {"id": v}
        if space is not None and space.coords is not None:
            item["position"] = [real(c) for c in space.coords[v]]
        verts.append(item)
    edges = [
        [i, j, graph.capacity[(i, j)].numerator, graph.capacity[(i, j)].denominator,
         real(graph.length[(i, j)])]
        for i, j in graph.edges
    ]
    return {
        "source": graph.source,
        "sink": graph.sink,
        "scale": real(graph.scale) if graph.scale is not None else None,
        "vertices": verts,
        "edges": edges,
    }


def graph_from_dict(data: dict) -> NetGraph:
    caps, lengths = {}, {}
    for i, j, num, den, length in data["edges"]:
        caps[(i, j)] = Fraction(num, den)
        lengths[(i, j)] = length
    return NetGraph.from_capacities([v["id"] for v in data["vertices"]], caps,
                                    data["source"], data["sink"], lengths)


def current_to_list(current: DiscreteCurrent) -> list:
    return [{"x": sg.tail, "y": sg.head, "length": real(sg.length), "weight": rational(sg.weight)}
            for sg in current.segments]


def boundary_to_dict(atoms: dict) -> dict:
    return {str(v): rational(a) for v, a in sorted(atoms.items())}


def pencil_to_dict(pencil: Pencil) -> dict:
    return {
        "curves": [
            {"path": list(c.path), "weight_num": c.weight.numerator,
             "weight_den": c.weight.denominator, "length": real(c.length)}
            for c in pencil.curves
        ],
        "normalized": pencil.normalized,
    }


def pencil_from_dict(data: dict) -> Pencil:
    try:
        curves = tuple(
            Curve(tuple(c["path"]), Fraction(c["weight_num"], c["weight_den"]), float(c["length"]))
            for c in data["curves"]
        )
    except (KeyError, TypeError, ZeroDivisionError) as exc:
        raise InvalidInputError(f"malformed pencil: {exc}") from None
    if not curves:
        raise InvalidInputError("pencil has no curves")
    s, t = curves[0].path[0], curves[0].path[-1]
    if any(c.path[0] != s or c.path[-1] != t for c in curves):
        raise InvalidInputError("pencil curves do not share endpoints")
    return Pencil(curves, s, t, bool(data.get("normalized", False)))


def load_pencil(path) -> Pencil:
    return pencil_from_dict(_read_json(path))


def save_pencil(pencil: Pencil, path) -> None:
    write_json_atomic(path, pencil_to_dict(pencil))
