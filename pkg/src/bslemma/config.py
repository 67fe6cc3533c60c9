"""JSON configuration files and CSV/JSON record output.

A configuration file is a JSON object::

    {"space": "euclidean", "points": [[0, 0], [3, 4]]}
    {"space": "equilateral", "n": 10}
    {"space": "matrix", "matrix_csv": "d.csv"}
    {"space": {"type": "snowflake", "epsilon": "1/2",
               "base": {"type": "euclidean", "dimension": 1}},
     "points": [0, 4, 9]}
    {"generator": {"family": "uniform-square", "n": 500, "seed": 42}}

``space`` is a type name or a descriptor object; for a bare name the sibling
keys ``dimension``, ``n``, ``matrix`` and ``matrix_csv`` fill in its
parameters.  Paths are resolved against the configuration file's directory.
"""

from __future__ import annotations

import csv
import io
import json
import sys
from dataclasses import asdict, fields, is_dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from .errors import ConfigError, ValidationError
from .metric import (
    DistanceMatrix,
    Equilateral,
    Euclidean,
    GeneratorSpec,
    HeisenbergGauge,
    HyperbolicHalfPlane,
    MetricSpace,
    PointConfiguration,
    Scaled,
    Snowflake,
)

_ALIASES = {
    "euclidean": "euclidean",
    "matrix": "matrix",
    "distance-matrix": "matrix",
    "snowflake": "snowflake",
    "scaled": "scaled",
    "hyperbolic": "hyperbolic",
    "hyperbolic-half-plane": "hyperbolic",
    "heisenberg": "heisenberg",
    "heisenberg-gauge": "heisenberg",
    "equilateral": "equilateral",
}


def parse_real(value) -> float:
    """Float from a JSON number or a decimal / rational string such as ``"1/20"``."""
    if isinstance(value, bool):
        raise ValidationError(f"expected a number, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    try:
        return float(Fraction(str(value).strip()))
    except (ValueError, ZeroDivisionError) as exc:
        raise ValidationError(f"cannot parse {value!r} as a real number") from exc


def read_matrix_csv(path) -> np.ndarray:
    try:
        m = np.loadtxt(path, delimiter=",", dtype=float, ndmin=2)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return m


def parse_space(desc, context: dict | None = None, root: Path = Path(".")) -> MetricSpace:
    context = context or {}
    if isinstance(desc, str):
        desc = {"type": desc, **{k: v for k, v in context.items() if k in ("dimension", "n", "matrix", "matrix_csv")}}
    if not isinstance(desc, dict) or "type" not in desc:
        raise ConfigError(f"space descriptor must be a name or an object with 'type', got {desc!r}")
    kind = _ALIASES.get(str(desc["type"]).lower())
    if kind is None:
        raise ConfigError(f"unknown space type {desc['type']!r}")
    if kind == "euclidean":
        dim = desc.get("dimension")
        if dim is None:
            dim = _infer_dimension(context.get("points"))
        return Euclidean(int(dim))
    if kind == "equilateral":
        n = desc.get("n", desc.get("size"))
        if n is None:
            raise ConfigError("equilateral space needs 'n'")
        return Equilateral(int(n))
    if kind == "matrix":
        if "matrix" in desc:
            return DistanceMatrix(np.asarray(desc["matrix"], dtype=float))
        csv_path = desc.get("matrix_csv", desc.get("csv"))
        if csv_path is None:
            raise ConfigError("matrix space needs 'matrix' or 'matrix_csv'")
        return DistanceMatrix(read_matrix_csv(root / csv_path))
    if kind == "hyperbolic":
        return HyperbolicHalfPlane()
    if kind == "heisenberg":
        return HeisenbergGauge()
    if "base" not in desc:
        raise ConfigError(f"{kind} space needs a 'base' descriptor")
    base = parse_space(desc["base"], context, root)
    if kind == "snowflake":
        return Snowflake(base, parse_real(desc.get("epsilon")))
    return Scaled(base, parse_real(desc.get("lambda", desc.get("scale"))))


def _infer_dimension(points) -> int:
    if not points:
        raise ConfigError("euclidean space needs 'dimension' or a point list")
    first = points[0]
    return 1 if isinstance(first, (int, float)) else len(first)


def parse_generator(desc: dict) -> GeneratorSpec:
    if not isinstance(desc, dict) or "family" not in desc:
        raise ConfigError("generator needs a 'family'")
    count = desc.get("n", desc.get("count"))
    if count is None:
        raise ConfigError("generator needs 'n'")
    return GeneratorSpec(
        family=desc["family"],
        count=int(count),
        seed=int(desc.get("seed", 0)),
        dimension=int(desc.get("dimension", 2)),
        radius=parse_real(desc.get("radius", 1.0)),
    )


def parse_config(data: dict, root: Path = Path(".")) -> tuple[MetricSpace, PointConfiguration | GeneratorSpec]:
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a JSON object")
    if "generator" in data:
        gen = parse_generator(data["generator"])
        return gen.space(), gen
    if "space" not in data:
        raise ConfigError("configuration needs 'space' or 'generator'")
    space = parse_space(data["space"], data, root)
    points = data.get("points")
    if points is None:
        if space.is_coordinate:
            raise ConfigError("coordinate spaces need a 'points' list")
        points = np.arange(space.size)
    return space, PointConfiguration(space, points)


def load_config(path) -> tuple[MetricSpace, PointConfiguration | GeneratorSpec]:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return parse_config(data, path.parent)


def space_to_json(space: MetricSpace) -> dict:
    if isinstance(space, Euclidean):
        return {"type": "euclidean", "dimension": space.dimension}
    if isinstance(space, Equilateral):
        return {"type": "equilateral", "n": space.size}
    if isinstance(space, DistanceMatrix):
        return {"type": "matrix", "matrix": space.matrix.tolist()}
    if isinstance(space, HyperbolicHalfPlane):
        return {"type": "hyperbolic"}
    if isinstance(space, HeisenbergGauge):
        return {"type": "heisenberg"}
    if isinstance(space, Snowflake):
        return {"type": "snowflake", "epsilon": space.epsilon, "base": space_to_json(space.base)}
    if isinstance(space, Scaled):
        return {"type": "scaled", "lambda": space.scale, "base": space_to_json(space.base)}
    raise TypeError(f"cannot serialise {space!r}")


def config_to_json(config: PointConfiguration) -> dict:
    return {"space": space_to_json(config.space), "points": config.points.tolist()}


def dump_config(config: PointConfiguration, path) -> None:
    Path(path).write_text(json.dumps(config_to_json(config)) + "\n")


# --- record output ---------------------------------------------------------


def _cell(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (np.integer,)):
        return str(int(value))
    return str(value)


def _as_dict(record) -> dict:
    if is_dataclass(record):
        return asdict(record)
    return dict(record)


def records_to_csv(records, field_names=None) -> str:
    records = list(records)
    if field_names is None:
        if not records:
            raise ValueError("field names are required for an empty record list")
        first = records[0]
        field_names = [f.name for f in fields(first)] if is_dataclass(first) else list(first)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(field_names)
    for rec in records:
        row = _as_dict(rec)
        writer.writerow([_cell(row[name]) for name in field_names])
    return buf.getvalue()


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, (np.bool_,)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        # JSON has no infinities; an unbounded separation serialises as null
        return float(value) if np.isfinite(value) else None
    if isinstance(value, Fraction):
        return str(value)
    if is_dataclass(value):
        return _jsonable(asdict(value))
    return value


def to_json_text(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, allow_nan=False) + "\n"


def write_text(text: str, path) -> None:
    if path is None or str(path) == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def write_records(records, path, fmt: str = "csv", field_names=None) -> None:
    """Write records as CSV (header row first) or a JSON list.  Floats use the
    shortest round-trip representation, so identical inputs give identical bytes."""
    records = list(records)
    if fmt == "csv":
        text = records_to_csv(records, field_names)
    elif fmt == "json":
        text = to_json_text([_as_dict(r) for r in records])
    else:
        raise ValidationError(f"unknown output format {fmt!r}")
    write_text(text, path)
