"""JSON and CSV serialization for instances, reports and suite outcomes.

Scalars follow the instance-file convention: complex entries are always
two-element ``[re, im]`` arrays, real-field files may use bare numbers
(both forms are accepted on input).  CSV numbers carry 17 significant
digits with a ``.`` decimal separator so values round-trip exactly.
"""

from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .bounds import CoefficientBox
from .generate import Instance, PairInstance
from .quadrature import (
    DiscretizedMeasureSpace,
    WeightedL2Context,
    sampled,
)
from .space import (
    COMPLEX,
    DEFAULT_ORTHO_TOL,
    OrthonormalFamily,
    REAL,
    SpaceContext,
    Vector,
    as_vector,
)

CSV_DIGITS = 17


def format_float(value: float) -> str:
    return f"{float(value):.{CSV_DIGITS}g}"


def encode_scalar(value: complex, field: str) -> float | list[float]:
    z = complex(value)
    if field == REAL:
        return z.real
    return [z.real, z.imag]


def decode_scalar(value) -> complex:
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, Sequence) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    raise ValueError(f"cannot decode scalar from {value!r}")


def encode_vector(vector: Vector, field: str) -> list:
    return [encode_scalar(z, field) for z in np.asarray(vector, dtype=np.complex128)]


def decode_vector(values: Iterable) -> list[complex]:
    return [decode_scalar(v) for v in values]


def instance_to_dict(instance: Instance | PairInstance) -> dict:
    ctx = instance.ctx
    fam = instance.family
    payload = {
        "field": ctx.field,
        "dimension": ctx.dimension,
        "vectors": [encode_vector(row, ctx.field) for row in fam.members],
        "tolerance": fam.tolerance,
        "indices": list(instance.indices),
        "x": encode_vector(instance.x, ctx.field),
    }
    if isinstance(instance, PairInstance):
        payload["box"] = _box_to_dict(instance.box_x, ctx.field)
        payload["y"] = encode_vector(instance.y, ctx.field)
        payload["box_y"] = _box_to_dict(instance.box_y, ctx.field)
    else:
        payload["box"] = _box_to_dict(instance.box, ctx.field)
    return payload


def instance_from_dict(payload: Mapping) -> Instance | PairInstance:
    field = payload["field"]
    if field not in (REAL, COMPLEX):
        raise ValueError(f"unknown field tag {field!r}")
    ctx = SpaceContext(field, int(payload["dimension"]))
    fam = OrthonormalFamily.from_members(
        ctx,
        [decode_vector(row) for row in payload["vectors"]],
        float(payload.get("tolerance", DEFAULT_ORTHO_TOL)),
    )
    indices = tuple(int(i) for i in payload["indices"])
    x = as_vector(ctx, decode_vector(payload["x"]))
    box = _box_from_dict(payload["box"], indices)
    if "y" in payload:
        y = as_vector(ctx, decode_vector(payload["y"]))
        box_y = _box_from_dict(payload.get("box_y", payload["box"]), indices)
        return PairInstance(ctx, x, y, fam, indices, box, box_y)
    return Instance(ctx, x, fam, indices, box)


def _box_to_dict(box: CoefficientBox, field: str) -> dict:
    return {
        "lower": [encode_scalar(v, field) for v in box.lower],
        "upper": [encode_scalar(v, field) for v in box.upper],
    }


def _box_from_dict(payload: Mapping, indices: tuple[int, ...]) -> CoefficientBox:
    lower = decode_vector(payload["lower"])
    upper = decode_vector(payload["upper"])
    return CoefficientBox(indices, tuple(lower), tuple(upper))


def l2_instance_to_dict(
    ctx: WeightedL2Context, functions: Mapping[str, Vector]
) -> dict:
    return {
        "kind": ctx.space.kind,
        "field": ctx.field,
        "nodes": [float(s) for s in ctx.space.nodes],
        "weights": [float(w) for w in ctx.space.weights],
        "rho": [float(r) for r in ctx.rho],
        "functions": {
            name: encode_vector(values, ctx.field) for name, values in functions.items()
        },
    }


def l2_instance_from_dict(payload: Mapping) -> tuple[WeightedL2Context, dict[str, Vector]]:
    space = DiscretizedMeasureSpace(
        np.asarray(payload["nodes"], dtype=float),
        np.asarray(payload["weights"], dtype=float),
        payload["kind"],
    )
    ctx = WeightedL2Context(
        space, np.asarray(payload["rho"], dtype=float), payload.get("field", REAL)
    )
    functions = {
        name: sampled(ctx, decode_vector(values))
        for name, values in payload.get("functions", {}).items()
    }
    return ctx, functions


def digest(payload: Mapping) -> str:
    """Stable content hash of a JSON-serializable mapping."""
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def report_payload(report, instance_payload: Mapping) -> dict:
    """Report dict carrying the digest of the instance it was computed from."""
    body = dict(report.to_dict())
    body["digest"] = digest(instance_payload)
    return body


def dump_json(payload, path: str | Path | None) -> str:
    text = json.dumps(payload, indent=2, sort_keys=True)
    if path is not None:
        Path(path).write_text(text + "\n", encoding="utf-8")
    return text


def load_json(path: str | Path):
    return json.loads(Path(path).read_text(encoding="utf-8"))


def write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        for row in rows:
            writer.writerow(
                [format_float(v) if isinstance(v, float) else v for v in row]
            )
