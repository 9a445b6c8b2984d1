"""JSON fixtures: matrix paths, unit tuples and GL_r cocycles.

Polynomial entries are strings over the declared variables, e.g. ``"1 + x1*y"``.
Invertibility is never inferred; every matrix carries a certificate block
``{"kind": "unipotent" | "elementary" | "explicit", "data": ...}``.
"""

from __future__ import annotations

import json

from gmpy2 import mpq

from .chern_weil import GLCocycle, MatrixPath, certify
from .exact import CertificateError
from .forms import Chart
from .padic import UnitGroupElement
from .simplicial import FiniteSimplicialSet, boundary_simplex, nerve_z2, standard_simplex


class FixtureError(ValueError):
    pass


def load_json(path_or_data):
    if isinstance(path_or_data, (dict, list)):
        return path_or_data
    try:
        with open(path_or_data, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise FixtureError(f"cannot read {path_or_data}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise FixtureError(f"invalid JSON in {path_or_data}: {exc}") from None


def _require(data: dict, key: str, kind: str):
    if key not in data:
        raise FixtureError(f"{kind} fixture is missing {key!r}")
    return data[key]


def load_matrix_path(data) -> MatrixPath:
    data = load_json(data)
    if data.get("kind") != "matrix_path":
        raise FixtureError("expected a fixture of kind 'matrix_path'")
    q = int(_require(data, "q", "matrix_path"))
    cert = data.get("certificate")
    if not cert:
        raise CertificateError("matrix path has no certificate")
    rows = data.get("rows")
    if rows is None and cert.get("kind") != "elementary":
        raise FixtureError("matrix path needs 'rows' unless given by elementary factors")
    r = len(rows) if rows is not None else int(_require(data, "r", "matrix_path"))
    return MatrixPath(q, certify(Chart(q), r, cert, rows))


def load_unit_tuple(data) -> list:
    data = load_json(data)
    if data.get("kind") != "unit_tuple":
        raise FixtureError("expected a fixture of kind 'unit_tuple'")
    p = int(_require(data, "p", "unit_tuple"))
    mats = _require(data, "matrices", "unit_tuple")
    try:
        return [UnitGroupElement.from_rows([[mpq(str(a)) for a in row] for row in m], p) for m in mats]
    except (ValueError, TypeError) as exc:
        raise FixtureError(f"bad matrix entry: {exc}") from None


def load_base(desc) -> FiniteSimplicialSet:
    if "standard" in desc:
        return standard_simplex(int(desc["standard"]), int(desc.get("N", 2)))
    if "boundary" in desc:
        return boundary_simplex(int(desc["boundary"]), int(desc.get("N", 2)))
    if desc.get("nerve") == "Z/2":
        return nerve_z2(int(desc.get("N", 2)))
    return FiniteSimplicialSet.from_json(desc)


def load_gl_cocycle(data) -> GLCocycle:
    data = load_json(data)
    if data.get("kind") != "gl_cocycle":
        raise FixtureError("expected a fixture of kind 'gl_cocycle'")
    X = load_base(_require(data, "base", "gl_cocycle"))
    r = int(_require(data, "r", "gl_cocycle"))
    fiber = Chart(0, (), tuple(data.get("params", ())), tuple(data.get("nilpotents", ())))
    edges = {}
    for label, e in _require(data, "edges", "gl_cocycle").items():
        cert = e.get("certificate")
        if not cert:
            raise CertificateError(f"edge {label!r} has no certificate")
        edges[label] = certify(fiber, r, cert, e.get("rows"))
    return GLCocycle(X, r, fiber, edges)
