"""Scene model, the ``aip-scene/1`` JSON format, and the structure graph.

Contact normals follow one convention throughout: ``normal`` is the normal
on object ``a`` and points from ``b`` into ``a``.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from typing import Any, Iterable, Mapping, Sequence

from .dynamics import (
    ContactGeometry,
    ObjectState,
    QualitativeForce,
    StateChange,
    gravity,
    inverse,
    is_vanishing_point,
    state_change,
)
from .signs import NONZERO_DEFINITE, ALL_DEFINITE, SignVec, quantize

FORMAT = "aip-scene/1"
GEOMETRY_EPSILON = 1e-9


class SceneError(ValueError):
    """Malformed or inconsistent scene; the message names the offending field."""


class UnknownObject(SceneError):
    pass


class DuplicateId(SceneError):
    pass


@dataclass(frozen=True)
class SceneObject:
    id: str
    state_before: ObjectState = ObjectState()
    state_after: ObjectState = ObjectState()
    mass_center: tuple[float, float, float] | None = None
    is_static: bool = False

    def __post_init__(self) -> None:
        if self.is_static and not (self.state_before.at_rest and self.state_after.at_rest):
            raise SceneError(f"objects[{self.id}]: static objects must be at rest before and after")

    @property
    def change(self) -> StateChange:
        return state_change(self.state_before, self.state_after)


@dataclass(frozen=True)
class Contact:
    object_a: str
    object_b: str
    geometry: ContactGeometry
    point_id: str
    point: tuple[float, float, float] | None = None

    def __post_init__(self) -> None:
        if self.object_a == self.object_b:
            raise SceneError(f"contacts[{self.point_id}]: a contact needs two distinct objects")

    def other(self, obj: str) -> str:
        return self.object_b if obj == self.object_a else self.object_a

    def side_of(self, obj: str) -> str:
        if obj == self.object_a:
            return "a"
        if obj == self.object_b:
            return "b"
        raise KeyError(obj)

    def qr_on(self, obj: str) -> SignVec:
        return self.geometry.qr_on_a if self.side_of(obj) == "a" else self.geometry.qr_on_b

    def normal_on(self, obj: str) -> SignVec:
        return self.geometry.normal_on(self.side_of(obj))


@dataclass(frozen=True)
class Scene:
    objects: tuple[SceneObject, ...]
    contacts: tuple[Contact, ...] = ()
    gravity: bool = True

    def __post_init__(self) -> None:
        seen: set[str] = set()
        for o in self.objects:
            if o.id in seen:
                raise DuplicateId(f"objects: duplicate id {o.id!r}")
            seen.add(o.id)
        pids: set[str] = set()
        for c in self.contacts:
            if c.point_id in pids:
                raise DuplicateId(f"contacts: duplicate point id {c.point_id!r}")
            pids.add(c.point_id)
            for side, oid in (("a", c.object_a), ("b", c.object_b)):
                if oid not in seen:
                    raise UnknownObject(f"contacts[{c.point_id}].{side}: unknown object {oid!r}")

    def object(self, oid: str) -> SceneObject:
        for o in self.objects:
            if o.id == oid:
                return o
        raise UnknownObject(f"unknown object {oid!r}")

    @property
    def movable(self) -> list[SceneObject]:
        return sorted((o for o in self.objects if not o.is_static), key=lambda o: o.id)

    def changes(self) -> dict[str, StateChange]:
        return {o.id: o.change for o in self.objects}

    def without_contacts(self, point_ids: Iterable[str]) -> Scene:
        drop = set(point_ids)
        return replace(self, contacts=tuple(c for c in self.contacts if c.point_id not in drop))


def count_candidate_actions(objects: Sequence[SceneObject]) -> int:
    """Nonzero directions x loci x movable objects."""
    return len(NONZERO_DEFINITE) * len(ALL_DEFINITE) * sum(1 for o in objects if not o.is_static)


# -- JSON ---------------------------------------------------------------------------

_OBJECT_KEYS = {"id", "static", "state_before", "state_after", "mass_center"}
_CONTACT_KEYS = {"id", "a", "b", "normal", "normal_q", "qr_a", "qr_b", "point"}
_TOP_KEYS = {"format", "objects", "contacts", "gravity"}


def _reject_unknown(data: Mapping, allowed: set[str], where: str) -> None:
    extra = sorted(set(data) - allowed)
    if extra:
        raise SceneError(f"{where}: unknown field(s) {', '.join(extra)}")


def _signvec(value: Any, where: str) -> SignVec:
    try:
        return SignVec.parse(value)
    except (ValueError, TypeError) as exc:
        raise SceneError(f"{where}: {exc}") from None


def _numeric3(value: Any, where: str) -> tuple[float, float, float]:
    if not isinstance(value, (list, tuple)) or len(value) != 3:
        raise SceneError(f"{where}: expected a numeric 3-array")
    try:
        out = tuple(float(v) for v in value)
    except (TypeError, ValueError):
        raise SceneError(f"{where}: expected a numeric 3-array") from None
    if any(isinstance(v, bool) for v in value):
        raise SceneError(f"{where}: expected a numeric 3-array")
    return out  # type: ignore[return-value]


def _state(value: Any, where: str) -> ObjectState:
    if not isinstance(value, Mapping):
        raise SceneError(f"{where}: expected an object with qv and qw")
    _reject_unknown(value, {"qv", "qw"}, where)
    for k in ("qv", "qw"):
        if k not in value:
            raise SceneError(f"{where}.{k}: missing")
    return ObjectState(_signvec(value["qv"], f"{where}.qv"), _signvec(value["qw"], f"{where}.qw"))


def scene_from_dict(data: Any, epsilon: float = GEOMETRY_EPSILON) -> Scene:
    if not isinstance(data, Mapping):
        raise SceneError("scene: expected a JSON object")
    _reject_unknown(data, _TOP_KEYS, "scene")
    if data.get("format") != FORMAT:
        raise SceneError(f"format: expected {FORMAT!r}, got {data.get('format')!r}")
    if not isinstance(data.get("objects"), list):
        raise SceneError("objects: expected a list")
    grav = data.get("gravity", True)
    if not isinstance(grav, bool):
        raise SceneError("gravity: expected a boolean")

    objects = []
    for i, od in enumerate(data["objects"]):
        where = f"objects[{i}]"
        if not isinstance(od, Mapping):
            raise SceneError(f"{where}: expected an object")
        _reject_unknown(od, _OBJECT_KEYS, where)
        oid = od.get("id")
        if not isinstance(oid, str) or not oid:
            raise SceneError(f"{where}.id: expected a nonempty string")
        static = od.get("static", False)
        if not isinstance(static, bool):
            raise SceneError(f"{where}.static: expected a boolean")
        if static:
            before = _state(od["state_before"], f"{where}.state_before") if "state_before" in od else ObjectState()
            after = _state(od["state_after"], f"{where}.state_after") if "state_after" in od else ObjectState()
        else:
            for k in ("state_before", "state_after"):
                if k not in od:
                    raise SceneError(f"{where}.{k}: missing")
            before = _state(od["state_before"], f"{where}.state_before")
            after = _state(od["state_after"], f"{where}.state_after")
        mc = _numeric3(od["mass_center"], f"{where}.mass_center") if od.get("mass_center") is not None else None
        try:
            objects.append(SceneObject(oid, before, after, mc, static))
        except SceneError as exc:
            raise SceneError(f"{where}: {exc}") from None

    centers = {o.id: o.mass_center for o in objects}
    contacts = []
    raw_contacts = data.get("contacts", [])
    if not isinstance(raw_contacts, list):
        raise SceneError("contacts: expected a list")
    for i, cd in enumerate(raw_contacts):
        where = f"contacts[{i}]"
        if not isinstance(cd, Mapping):
            raise SceneError(f"{where}: expected an object")
        _reject_unknown(cd, _CONTACT_KEYS, where)
        a, b = cd.get("a"), cd.get("b")
        for side, oid in (("a", a), ("b", b)):
            if not isinstance(oid, str):
                raise SceneError(f"{where}.{side}: expected an object id")
            if oid not in centers:
                raise UnknownObject(f"{where}.{side}: unknown object {oid!r}")
        pid = cd.get("id", f"c{i}")
        if not isinstance(pid, str) or not pid:
            raise SceneError(f"{where}.id: expected a nonempty string")
        numeric_normal = _numeric3(cd["normal"], f"{where}.normal") if "normal" in cd else None
        if "normal_q" in cd:
            normal_q = _signvec(cd["normal_q"], f"{where}.normal_q")
        elif numeric_normal is not None:
            normal_q = quantize(numeric_normal, 0.0)
        else:
            raise SceneError(f"{where}: needs 'normal' or 'normal_q'")
        point = _numeric3(cd["point"], f"{where}.point") if "point" in cd else None
        qrs = []
        for side, oid in (("a", a), ("b", b)):
            key = f"qr_{side}"
            if key in cd:
                qrs.append(_signvec(cd[key], f"{where}.{key}"))
            elif point is not None and centers[oid] is not None:
                qrs.append(quantize([p - m for p, m in zip(point, centers[oid])], epsilon))
            else:
                raise SceneError(f"{where}.{key}: missing, and no point + mass_center to derive it from")
        try:
            geom = ContactGeometry(normal_q, qrs[0], qrs[1], numeric_normal)
            contacts.append(Contact(a, b, geom, pid, point))
        except SceneError:
            raise
        except ValueError as exc:
            raise SceneError(f"{where}.normal: {exc}") from None
    return Scene(tuple(objects), tuple(contacts), grav)


def scene_to_dict(scene: Scene) -> dict:
    objs = []
    for o in scene.objects:
        d: dict[str, Any] = {"id": o.id, "static": o.is_static}
        d["state_before"] = {"qv": o.state_before.qv.encode(), "qw": o.state_before.qw.encode()}
        d["state_after"] = {"qv": o.state_after.qv.encode(), "qw": o.state_after.qw.encode()}
        if o.mass_center is not None:
            d["mass_center"] = list(o.mass_center)
        objs.append(d)
    contacts = []
    for c in scene.contacts:
        d = {"id": c.point_id, "a": c.object_a, "b": c.object_b}
        if c.geometry.numeric_normal is not None:
            d["normal"] = list(c.geometry.numeric_normal)
        d["normal_q"] = c.geometry.normal_q.encode()
        d["qr_a"] = c.geometry.qr_on_a.encode()
        d["qr_b"] = c.geometry.qr_on_b.encode()
        if c.point is not None:
            d["point"] = list(c.point)
        contacts.append(d)
    return {"format": FORMAT, "objects": objs, "contacts": contacts, "gravity": scene.gravity}


def dumps(scene: Scene) -> str:
    return json.dumps(scene_to_dict(scene), indent=2) + "\n"


def loads(text: str, epsilon: float = GEOMETRY_EPSILON) -> Scene:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SceneError(f"scene: invalid JSON ({exc})") from None
    return scene_from_dict(data, epsilon)


def load(path, epsilon: float = GEOMETRY_EPSILON) -> Scene:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read(), epsilon)


def save(scene: Scene, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(scene))


def digest(scene: Scene) -> str:
    canon = json.dumps(scene_to_dict(scene), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


# -- structure graph ----------------------------------------------------------------

GRAVITY, ACTION, CONTACT = "gravity", "action", "contact"


@dataclass(frozen=True)
class KnownForce:
    var_id: str
    force: QualitativeForce
    kind: str
    resistant: bool = False


@dataclass(frozen=True)
class Vertex:
    id: str
    label: ObjectState
    checked: bool = False
    known: tuple[KnownForce, ...] = ()
    is_static: bool = False

    @property
    def has_assigned_forces(self) -> bool:
        return any(k.kind != GRAVITY for k in self.known)


@dataclass(frozen=True)
class Edge:
    """Directed edge ``source -> target``: the contact force on ``target``."""

    source: str
    target: str
    contact: Contact
    label: KnownForce | None = None

    @property
    def var_id(self) -> str:
        return edge_var_id(self.contact.point_id, self.target)


def edge_var_id(point_id: str, target: str) -> str:
    return f"{point_id}:{target}"


@dataclass
class StructureGraph:
    vertices: dict[str, Vertex]
    edges: dict[tuple[str, str], Edge]
    vanished: frozenset[str] = field(default_factory=frozenset)

    def copy(self) -> StructureGraph:
        return StructureGraph(dict(self.vertices), dict(self.edges), self.vanished)

    def incoming(self, vid: str) -> list[Edge]:
        return [e for (pid, tgt), e in sorted(self.edges.items()) if tgt == vid]

    def pair(self, edge: Edge) -> Edge:
        return self.edges[edge.contact.point_id, edge.source]

    def rule3_consistent(self) -> bool:
        for e in self.edges.values():
            back = self.pair(e)
            if e.label is not None and back.label is not None:
                if inverse(e.label.force.qd) != back.label.force.qd:
                    return False
        return True


def build_graph(
    objects: Sequence[SceneObject],
    contacts: Sequence[Contact],
    include_gravity: bool = True,
) -> StructureGraph:
    ids = [o.id for o in objects]
    if len(set(ids)) != len(ids):
        dup = sorted({i for i in ids if ids.count(i) > 1})
        raise DuplicateId(f"objects: duplicate id(s) {dup}")
    vertices = {}
    for o in sorted(objects, key=lambda o: o.id):
        known = ()
        if include_gravity and not o.is_static:
            known = (KnownForce(f"gravity:{o.id}", gravity(o.id), GRAVITY),)
        vertices[o.id] = Vertex(o.id, o.state_before, False, known, o.is_static)
    edges = {}
    for c in sorted(contacts, key=lambda c: c.point_id):
        for oid in (c.object_a, c.object_b):
            if oid not in vertices:
                raise UnknownObject(f"contact {c.point_id}: unknown object {oid!r}")
        if (c.point_id, c.object_a) in edges:
            raise DuplicateId(f"contacts: duplicate point id {c.point_id!r}")
        edges[c.point_id, c.object_a] = Edge(c.object_b, c.object_a, c)
        edges[c.point_id, c.object_b] = Edge(c.object_a, c.object_b, c)
    return StructureGraph(vertices, edges)


def scene_graph(scene: Scene) -> StructureGraph:
    return build_graph(scene.objects, scene.contacts, scene.gravity)


def contact_vanishes(graph: StructureGraph, contact: Contact) -> bool:
    va = graph.vertices[contact.object_a]
    vb = graph.vertices[contact.object_b]
    return is_vanishing_point(va.label, vb.label, contact.geometry)


def prune_vanishing(graph: StructureGraph) -> StructureGraph:
    """Drop both edges of every contact whose objects move apart at the point."""
    out = graph.copy()
    gone = set(graph.vanished)
    for (pid, tgt), e in graph.edges.items():
        if tgt == e.contact.object_a and contact_vanishes(graph, e.contact):
            gone.add(pid)
    out.edges = {k: e for k, e in graph.edges.items() if k[0] not in gone}
    out.vanished = frozenset(gone)
    return out


__all__ = [
    "Contact",
    "DuplicateId",
    "Edge",
    "KnownForce",
    "Scene",
    "SceneError",
    "SceneObject",
    "StructureGraph",
    "UnknownObject",
    "Vertex",
    "build_graph",
    "count_candidate_actions",
    "digest",
    "dumps",
    "load",
    "loads",
    "prune_vanishing",
    "save",
    "scene_from_dict",
    "scene_graph",
    "scene_to_dict",
]
