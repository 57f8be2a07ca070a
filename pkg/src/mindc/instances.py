"""Builders for sphere packing and kissing instances, and a JSON file format.

Variable layout of every built instance: the point matrix ``X`` occupies
indices ``0 .. n*dim-1`` row by row, followed by the objective radius ``r``
and the auxiliary distance variable ``d2 = 2 r`` used as the minimum
distance of every pair.
"""

from __future__ import annotations

import enum
import itertools
import json
import math
from dataclasses import dataclass
from pathlib import Path

import jsonschema
import numpy as np

from .engine.model import BallContainment, Instance, SphereMembership, VariableLink
from .geometry import BoxDomain, LinearCut
from .single import MinDC
from .symmetry import PointMatrixLayout

FORMAT_VERSION = 1


class ProblemKind(str, enum.Enum):
    PACK_IN_SPHERE = "pack-sphere"
    PACK_IN_BOX = "pack-box"
    KISSING = "kissing"


@dataclass(frozen=True)
class ProblemSpec:
    kind: ProblemKind
    n: int
    dim: int
    reflection: bool = False
    lex_rows: bool = True

    def __post_init__(self):
        object.__setattr__(self, "kind", ProblemKind(self.kind))
        if self.n < 2:
            raise ValueError("need at least two spheres")
        if self.dim not in (2, 3):
            raise ValueError("dim must be 2 or 3")

    def build(self) -> Instance:
        if self.kind is ProblemKind.PACK_IN_SPHERE:
            return build_pack_in_sphere(self.n, self.dim, reflection=self.reflection,
                                        lex_rows=self.lex_rows)
        if self.kind is ProblemKind.PACK_IN_BOX:
            return build_pack_in_box(self.n, self.dim, lex_rows=self.lex_rows)
        return build_kissing(self.n, self.dim, lex_rows=self.lex_rows)


def _check(n, dim):
    if n < 2:
        raise ValueError("need at least two spheres")
    if dim < 1:
        raise ValueError("dim must be positive")


def _pairwise(layout: PointMatrixLayout, d2: int) -> list[MinDC]:
    return [MinDC(layout.row(i), layout.row(k), delta_var=d2)
            for i, k in itertools.combinations(range(layout.n), 2)]


def _common(n, dim, x_lo, x_hi, r_lo, r_hi):
    layout = PointMatrixLayout.contiguous(n, dim)
    r = n * dim
    d2 = r + 1
    lo = np.full(n * dim + 2, float(x_lo))
    hi = np.full(n * dim + 2, float(x_hi))
    lo[r], hi[r] = r_lo, r_hi
    lo[d2], hi[d2] = 2.0 * r_lo, 2.0 * r_hi
    return layout, r, d2, lo, hi


def build_pack_in_sphere(n: int, dim: int, reflection: bool = False, lex_rows: bool = True,
                         r_min: float = 0.0) -> Instance:
    """``n`` equal spheres of radius ``r`` inside the unit sphere; maximize ``r``."""
    _check(n, dim)
    layout, r, d2, lo, hi = _common(n, dim, -1.0, 1.0, r_min, 1.0)
    if reflection:
        lo[list(layout.row(0))] = 0.0
    balls = [BallContainment(layout.row(i), [0.0] * dim, 1.0, -1.0, r) for i in range(n)]
    return Instance(
        num_vars=n * dim + 2,
        bounds=BoxDomain(lo, hi),
        objective_var=r,
        mindcs=_pairwise(layout, d2),
        balls=balls,
        links=[VariableLink(d2, r, 2.0)],
        layout=layout,
        lex_rows=lex_rows,
        lex_cols=False,
        rotation_symmetric=True,
        name=f"pack-sphere_n{n}_d{dim}",
    )


def build_kissing(n: int, dim: int, lex_rows: bool = True, r_min: float = 0.0) -> Instance:
    """``n`` centers on the sphere of radius 2, pairwise at least ``2 r`` apart; maximize ``r``.

    With unit spheres kissing a central unit sphere the centers lie at
    distance 2 from the origin, so ``r >= 1`` certifies that ``n`` spheres fit.
    """
    _check(n, dim)
    layout, r, d2, lo, hi = _common(n, dim, -2.0, 2.0, r_min, 2.0)
    spheres = [SphereMembership(layout.row(i), [0.0] * dim, 2.0) for i in range(n)]
    return Instance(
        num_vars=n * dim + 2,
        bounds=BoxDomain(lo, hi),
        objective_var=r,
        mindcs=_pairwise(layout, d2),
        spheres=spheres,
        links=[VariableLink(d2, r, 2.0)],
        layout=layout,
        lex_rows=lex_rows,
        lex_cols=False,
        rotation_symmetric=True,
        name=f"kissing_n{n}_d{dim}",
    )


def build_pack_in_box(n: int, dim: int, lex_rows: bool = True, sides=None) -> Instance:
    """``n`` equal spheres of radius ``r`` in a box with the given sides (unit cube by default)."""
    _check(n, dim)
    sides = [1.0] * dim if sides is None else [float(s) for s in sides]
    if len(sides) != dim or min(sides) <= 0:
        raise ValueError("need one positive side length per dimension")
    layout, r, d2, lo, hi = _common(n, dim, 0.0, 1.0, 0.0, 0.5 * min(sides))
    for j, s in enumerate(sides):
        lo[list(layout.column(j))] = 0.0
        hi[list(layout.column(j))] = s
    cuts = []
    for i in range(n):
        for j in range(dim):
            v = layout.var_of(i, j)
            cuts.append(LinearCut((v, r), (1.0, -1.0), 0.0, origin="wall"))
            cuts.append(LinearCut((v, r), (-1.0, -1.0), -sides[j], origin="wall"))
    return Instance(
        num_vars=n * dim + 2,
        bounds=BoxDomain(lo, hi),
        objective_var=r,
        mindcs=_pairwise(layout, d2),
        links=[VariableLink(d2, r, 2.0)],
        static_cuts=cuts,
        layout=layout,
        lex_rows=lex_rows,
        lex_cols=len(set(sides)) == 1,
        rotation_symmetric=False,
        name=f"pack-box_n{n}_d{dim}",
    )


# --------------------------------------------------------------------------
# JSON format

_index_list = {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 1}
_point = {"type": "array", "items": {"type": "number"}, "minItems": 1}

SCHEMA = {
    "type": "object",
    "required": ["version", "num_vars", "bounds", "objective_var"],
    "additionalProperties": False,
    "properties": {
        "version": {"const": FORMAT_VERSION},
        "name": {"type": "string"},
        "num_vars": {"type": "integer", "minimum": 1},
        "bounds": {
            "type": "array",
            "items": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
        },
        "objective_var": {"type": "integer", "minimum": 0},
        "mindcs": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["y", "z", "delta"],
                "additionalProperties": False,
                "properties": {
                    "y": _index_list,
                    "z": _index_list,
                    "delta": {
                        "type": "object",
                        "oneOf": [
                            {"required": ["const"], "additionalProperties": False,
                             "properties": {"const": {"type": "number", "minimum": 0}}},
                            {"required": ["var"], "additionalProperties": False,
                             "properties": {"var": {"type": "integer", "minimum": 0}}},
                        ],
                    },
                },
            },
        },
        "balls": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["vars", "center", "radius"],
                "additionalProperties": False,
                "properties": {
                    "vars": _index_list,
                    "center": _point,
                    "radius": {"type": "number", "minimum": 0},
                    "radius_coef": {"type": "number"},
                    "radius_var": {"type": "integer", "minimum": 0},
                },
            },
        },
        "spheres": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["vars", "center", "radius"],
                "additionalProperties": False,
                "properties": {
                    "vars": _index_list,
                    "center": _point,
                    "radius": {"type": "number", "minimum": 0},
                    "band": {"type": "number", "minimum": 0},
                },
            },
        },
        "links": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["var", "source", "scale"],
                "additionalProperties": False,
                "properties": {
                    "var": {"type": "integer", "minimum": 0},
                    "source": {"type": "integer", "minimum": 0},
                    "scale": {"type": "number", "exclusiveMinimum": 0},
                },
            },
        },
        "cuts": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["vars", "coefs", "rhs"],
                "additionalProperties": False,
                "properties": {
                    "vars": _index_list,
                    "coefs": _point,
                    "rhs": {"type": "number"},
                },
            },
        },
        "lex": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"rows": {"type": "boolean"}, "cols": {"type": "boolean"}},
        },
        "rotation_symmetric": {"type": "boolean"},
        "layout": {
            "type": "object",
            "required": ["n", "dim", "vars"],
            "additionalProperties": False,
            "properties": {
                "n": {"type": "integer", "minimum": 1},
                "dim": {"type": "integer", "minimum": 1},
                "vars": {"type": "array", "items": _index_list},
            },
        },
    },
}


class InstanceFormatError(ValueError):
    """Schema or consistency violation in an instance document; ``path`` names the field."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


def to_document(inst: Instance) -> dict:
    doc = {
        "version": FORMAT_VERSION,
        "name": inst.name,
        "num_vars": inst.num_vars,
        "bounds": [[float(a), float(b)] for a, b in zip(inst.bounds.lo, inst.bounds.hi)],
        "objective_var": inst.objective_var,
        "mindcs": [
            {"y": list(c.y), "z": list(c.z),
             "delta": {"const": float(c.delta)} if c.delta_var is None else {"var": c.delta_var}}
            for c in inst.mindcs
        ],
        "balls": [],
        "spheres": [
            {"vars": list(s.vars), "center": list(s.center), "radius": s.radius, "band": s.band}
            for s in inst.spheres
        ],
        "links": [{"var": k.var, "source": k.source, "scale": k.scale} for k in inst.links],
        "cuts": [{"vars": list(c.vars), "coefs": c.coefs.tolist(), "rhs": c.rhs} for c in inst.static_cuts],
        "lex": {"rows": inst.lex_rows, "cols": inst.lex_cols},
        "rotation_symmetric": inst.rotation_symmetric,
    }
    for b in inst.balls:
        item = {"vars": list(b.vars), "center": list(b.center), "radius": b.radius_const}
        if b.radius_var is not None:
            item["radius_coef"] = b.radius_coef
            item["radius_var"] = b.radius_var
        doc["balls"].append(item)
    if inst.layout is not None:
        lay = inst.layout
        doc["layout"] = {"n": lay.n, "dim": lay.dim, "vars": [list(r) for r in lay.vars]}
    return doc


def _path(err) -> str:
    parts = ["$"] + [f"[{p}]" if isinstance(p, int) else f".{p}" for p in err.absolute_path]
    return "".join(parts)


def from_document(doc: dict) -> Instance:
    errors = sorted(jsonschema.Draft202012Validator(SCHEMA).iter_errors(doc),
                    key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        raise InstanceFormatError(_path(err), err.message)
    mindcs = []
    for c in doc.get("mindcs", []):
        delta = c["delta"]
        mindcs.append(MinDC(c["y"], c["z"], float(delta.get("const", 0.0)), delta.get("var")))
    balls = []
    for k, b in enumerate(doc.get("balls", [])):
        if "radius_var" in b and "radius_coef" not in b:
            raise InstanceFormatError(f"$.balls[{k}].radius_coef", "required with radius_var")
        balls.append(BallContainment(b["vars"], b["center"], float(b["radius"]),
                                     float(b.get("radius_coef", 0.0)), b.get("radius_var")))
    spheres = [SphereMembership(s["vars"], s["center"], float(s["radius"]),
                                float(s.get("band", 1e-6))) for s in doc.get("spheres", [])]
    links = [VariableLink(k["var"], k["source"], float(k["scale"])) for k in doc.get("links", [])]
    cuts = [LinearCut(c["vars"], c["coefs"], c["rhs"]) for c in doc.get("cuts", [])]
    layout = None
    if "layout" in doc:
        lay = doc["layout"]
        layout = PointMatrixLayout(lay["n"], lay["dim"], tuple(tuple(r) for r in lay["vars"]))
    if len(doc["bounds"]) != doc["num_vars"]:
        raise InstanceFormatError("$.bounds", "length differs from num_vars")
    lex = doc.get("lex", {})
    try:
        return Instance(
            num_vars=doc["num_vars"],
            bounds=BoxDomain.from_intervals(doc["bounds"]),
            objective_var=doc["objective_var"],
            mindcs=mindcs,
            balls=balls,
            spheres=spheres,
            links=links,
            static_cuts=cuts,
            layout=layout,
            lex_rows=bool(lex.get("rows", False)),
            lex_cols=bool(lex.get("cols", False)),
            rotation_symmetric=bool(doc.get("rotation_symmetric", False)),
            name=doc.get("name", "instance"),
        )
    except ValueError as exc:
        raise InstanceFormatError("$", str(exc)) from exc


def load_instance(path) -> Instance:
    with open(path, encoding="utf-8") as fh:
        return from_document(json.load(fh))


def save_instance(instance: Instance, path) -> None:
    Path(path).write_text(json.dumps(to_document(instance), indent=1) + "\n", encoding="utf-8")


# --------------------------------------------------------------------------
# known optima used as reference values

def pack_in_sphere_optimum_2d(n: int) -> float:
    """Optimal radius for ``n`` in {2, 3, 4} equal circles in the unit circle (ring placement)."""
    if n not in (2, 3, 4):
        raise ValueError("closed form only for n in 2..4")
    s = math.sin(math.pi / n)
    return s / (1.0 + s)
