"""JSON scene format: {"set": {...}, "domain": {...}}.

Shape objects (dimension inferred from vectors):

    {"type": "halfspace", "normal": [0, 1], "offset": 0.0}
    {"type": "ball", "center": [0, 0], "radius": 1.0}
    {"type": "annulus", "center": [0, 0], "r_inner": 0.5, "r_outer": 2.0}
    {"type": "cone-sector", "k": 2, "phase": 0.0}
    {"type": "pie-glued", "inner": {...}, "radius": 1.0}
    {"type": "corner-pair", "theta1": 0.3, "theta2": -0.3}
    {"type": "lawson-cone", "n": 2, "m": 1, "alpha": 1.0}
    {"type": "complement", "base": {...}}
    {"type": "union", "parts": [{...}, ...]}
    {"type": "intersection", "parts": [{...}, ...]}

Domains: {"type": "ball", ...} or {"type": "halfspace", ...} with an
optional "tubular" radius.
"""

from __future__ import annotations

import json

from .geometry import (
    Annulus,
    Ball,
    Complement,
    ConeSector2D,
    Domain,
    HalfSpace,
    Intersection,
    LawsonCone,
    PieGlued,
    PlanarCornerPair,
    Union,
)


class SceneError(ValueError):
    """Malformed scene description; the message carries the JSON path."""


def _need(d, key, path):
    if key not in d:
        raise SceneError(f"at {path}: missing field {key!r}")
    return d[key]


def shape_from_dict(d, path="set"):
    if not isinstance(d, dict):
        raise SceneError(f"at {path}: expected an object, got {type(d).__name__}")
    kind = _need(d, "type", path)
    try:
        if kind == "halfspace":
            return HalfSpace(tuple(_need(d, "normal", path)), float(d.get("offset", 0.0)))
        if kind == "ball":
            return Ball(tuple(_need(d, "center", path)), float(_need(d, "radius", path)))
        if kind == "annulus":
            return Annulus(
                tuple(_need(d, "center", path)),
                float(_need(d, "r_inner", path)),
                float(_need(d, "r_outer", path)),
            )
        if kind == "cone-sector":
            return ConeSector2D(int(_need(d, "k", path)), float(d.get("phase", 0.0)))
        if kind == "pie-glued":
            return PieGlued(
                shape_from_dict(_need(d, "inner", path), path + ".inner"),
                float(_need(d, "radius", path)),
            )
        if kind == "corner-pair":
            return PlanarCornerPair(float(_need(d, "theta1", path)), float(_need(d, "theta2", path)))
        if kind == "lawson-cone":
            return LawsonCone(
                int(_need(d, "n", path)), int(_need(d, "m", path)), float(_need(d, "alpha", path))
            )
        if kind == "complement":
            return Complement(shape_from_dict(_need(d, "base", path), path + ".base"))
        if kind in ("union", "intersection"):
            parts = _need(d, "parts", path)
            if not isinstance(parts, list) or not parts:
                raise SceneError(f"at {path}.parts: expected a nonempty list")
            built = tuple(
                shape_from_dict(p, f"{path}.parts[{i}]") for i, p in enumerate(parts)
            )
            return Union(built) if kind == "union" else Intersection(built)
    except SceneError:
        raise
    except Exception as exc:
        raise SceneError(f"at {path}: {exc}") from exc
    raise SceneError(f"at {path}: unknown shape type {kind!r}")


def shape_to_dict(shape):
    if isinstance(shape, HalfSpace):
        return {"type": "halfspace", "normal": list(shape.normal), "offset": shape.offset}
    if isinstance(shape, Ball):
        return {"type": "ball", "center": list(shape.center), "radius": shape.radius}
    if isinstance(shape, Annulus):
        return {
            "type": "annulus",
            "center": list(shape.center),
            "r_inner": shape.r_inner,
            "r_outer": shape.r_outer,
        }
    if isinstance(shape, ConeSector2D):
        return {"type": "cone-sector", "k": shape.k, "phase": shape.phase}
    if isinstance(shape, PieGlued):
        return {"type": "pie-glued", "inner": shape_to_dict(shape.inner), "radius": shape.radius}
    if isinstance(shape, PlanarCornerPair):
        return {"type": "corner-pair", "theta1": shape.theta1, "theta2": shape.theta2}
    if isinstance(shape, LawsonCone):
        return {"type": "lawson-cone", "n": shape.n, "m": shape.m, "alpha": shape.alpha}
    if isinstance(shape, Complement):
        return {"type": "complement", "base": shape_to_dict(shape.base)}
    if isinstance(shape, Union):
        return {"type": "union", "parts": [shape_to_dict(p) for p in shape.parts]}
    if isinstance(shape, Intersection):
        return {"type": "intersection", "parts": [shape_to_dict(p) for p in shape.parts]}
    raise SceneError(f"unserializable shape {type(shape).__name__}")


def domain_from_dict(d, path="domain"):
    kind = _need(d, "type", path)
    if kind not in ("ball", "halfspace"):
        raise SceneError(f"at {path}: domain must be a ball or a halfspace, got {kind!r}")
    shape = shape_from_dict(d, path)
    return Domain(shape, tubular=float(d.get("tubular", 0.1)))


def load_scene(text_or_path):
    """Parse a scene (JSON text or a file path) into (set, domain)."""
    text = text_or_path
    if "\n" not in text and not text.lstrip().startswith("{"):
        with open(text_or_path, "r", encoding="utf-8") as fh:
            text = fh.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SceneError(f"malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}")
    if not isinstance(doc, dict) or "set" not in doc:
        raise SceneError("scene must be an object with a 'set' field")
    E = shape_from_dict(doc["set"], "set")
    omega = domain_from_dict(doc["domain"], "domain") if "domain" in doc else None
    return E, omega
