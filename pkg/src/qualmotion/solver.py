"""Depth-first search over the structure graph for actions explaining a scene.

The root branches over candidate actions.  Each intermediate node picks one
unchecked vertex, assigns grouped contact forces to the edges arriving from
unchecked neighbours, keeps the assignments under which the vertex's
observed change lies in its envelope, and pushes the reactions onto the
neighbours.  A node with every movable vertex checked is a solution.
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field, replace
from functools import cached_property, lru_cache
from typing import Iterable, Iterator

from .dynamics import (
    DEFAULT_CAP,
    CapExceeded,
    QualitativeAction,
    QualitativeForce,
    StateChange,
    change_masks,
    change_entailed,
    force_key,
    gravity,
    inverse,
    no_attraction_region,
    reachable_sums,
    net_effect,
    satisfies_no_attraction,
    witness_keys,
)
from .scene import (
    ACTION,
    CONTACT,
    GRAVITY,
    Edge,
    KnownForce,
    Scene,
    StructureGraph,
    Vertex,
    edge_var_id,
    prune_vanishing,
    scene_graph,
)
from .signs import ALL_DEFINITE, NONZERO_DEFINITE, STAR, SignVec

ACTION_VAR = "action"


class Heuristic(str, enum.Enum):
    H1 = "h1"  # resistant forces only cancel
    H2 = "h2"  # the action acts on a moved object


class VertexOrder(str, enum.Enum):
    CANONICAL = "canonical"
    PREFER_KNOWN = "prefer_known"


class NoMovedObject(ValueError):
    pass


class AllChecked(Exception):
    """No unchecked movable vertex remains: the node is a leaf."""


_FLAGS = {
    "none": frozenset(),
    "h1": frozenset({Heuristic.H1}),
    "h2": frozenset({Heuristic.H2}),
    "h1h2": frozenset({Heuristic.H1, Heuristic.H2}),
}


@dataclass(frozen=True)
class SolverConfig:
    heuristics: frozenset = frozenset({Heuristic.H1, Heuristic.H2})
    subset_cap: int = DEFAULT_CAP
    max_solutions: int | None = None
    vertex_order: VertexOrder = VertexOrder.PREFER_KNOWN
    grouping: bool = True
    group_actions: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "heuristics", frozenset(Heuristic(h) for h in self.heuristics))
        object.__setattr__(self, "vertex_order", VertexOrder(self.vertex_order))
        if self.subset_cap < 1:
            raise ValueError(f"subset_cap must be >= 1, got {self.subset_cap}")
        if self.max_solutions is not None and self.max_solutions < 1:
            raise ValueError(f"max_solutions must be >= 1, got {self.max_solutions}")

    @classmethod
    def from_flag(cls, flag: str, **kwargs) -> SolverConfig:
        try:
            return cls(heuristics=_FLAGS[flag], **kwargs)
        except KeyError:
            raise ValueError(f"unknown heuristics flag {flag!r}; choose from {sorted(_FLAGS)}") from None

    @property
    def h1(self) -> bool:
        return Heuristic.H1 in self.heuristics

    @property
    def h2(self) -> bool:
        return Heuristic.H2 in self.heuristics

    @property
    def flag(self) -> str:
        return "".join(h.value for h in sorted(self.heuristics, key=lambda h: h.value)) or "none"

    def describe(self) -> dict:
        return {
            "heuristics": self.flag,
            "subset_cap": self.subset_cap,
            "max_solutions": self.max_solutions,
            "vertex_order": self.vertex_order.value,
            "grouping": self.grouping,
            "group_actions": self.group_actions,
        }


@dataclass(frozen=True)
class ForceVariable:
    var_id: str
    kind: str
    domain: tuple[QualitativeForce, ...]

    def __post_init__(self) -> None:
        if not self.domain:
            raise ValueError(f"variable {self.var_id} has an empty domain")


@dataclass(frozen=True)
class GroupedAssignment:
    var_id: str
    kind: str
    value: QualitativeForce
    resistant: bool = False

    def denotation(self) -> set[QualitativeForce]:
        return {QualitativeForce(qd, self.value.qr, self.value.object) for qd in self.value.qd.denotation()}


@dataclass(frozen=True)
class TraceEntry:
    """How one object's observed change is explained."""

    object: str
    change: StateChange
    forces: tuple[str, ...]
    subset: tuple[str, ...]
    net_linear: SignVec
    net_angular: SignVec


@dataclass(frozen=True)
class Solution:
    action: QualitativeAction
    assignments: tuple[GroupedAssignment, ...]
    changes: tuple[tuple[str, StateChange], ...]
    resistant_heuristic: bool = False

    @property
    def assignment_map(self) -> dict[str, GroupedAssignment]:
        return {a.var_id: a for a in self.assignments}

    def forces_on(self, obj: str) -> list[GroupedAssignment]:
        return [a for a in self.assignments if a.value.object == obj]

    @cached_property
    def trace(self) -> tuple[TraceEntry, ...]:
        out = []
        for obj, change in self.changes:
            forces = self.forces_on(obj)
            keys = tuple(force_key(a.value, self.resistant_heuristic and a.resistant) for a in forces)
            w = witness_keys(change_masks(change), keys)
            if w is None:
                raise ValueError(f"solution does not explain the change of {obj}")
            out.append(TraceEntry(
                obj, change, tuple(a.var_id for a in forces),
                tuple(forces[i].var_id for i in w.subset), w.net_linear, w.net_angular,
            ))
        return tuple(out)


def action_sort_key(action: QualitativeAction) -> tuple:
    return (action.object, tuple(action.qr), tuple(action.qd))


# -- search ---------------------------------------------------------------------------

class _Context:
    def __init__(self, scene: Scene, cfg: SolverConfig):
        self.scene = scene
        self.cfg = cfg
        self.changes = {o.id: o.change for o in scene.objects if not o.is_static}
        self.targets = {k: change_masks(v) for k, v in self.changes.items()}
        self.after = {o.id: o.state_after for o in scene.objects}
        self.graph = prune_vanishing(scene_graph(scene))
        self._domains: dict[tuple[str, str], tuple[SignVec, ...]] = {}
        self.incoming = {vid: [k for k in sorted(self.graph.edges) if k[1] == vid] for vid in self.graph.vertices}
        self.memo: dict[tuple, SearchNode | None] = {}
        self.h1 = cfg.h1
        self.change_items = tuple(sorted(self.changes.items()))
        self.leaf_assignments: dict[frozenset, tuple] = {}
        self.label_cache: dict[tuple, frozenset] = {}
        self.keyed_domains: dict[tuple, list] = {}

    def domain(self, edge: Edge) -> tuple[SignVec, ...]:
        key = (edge.contact.point_id, edge.target)
        if key not in self._domains:
            self._domains[key] = contact_domain(edge.contact.normal_on(edge.target), self.cfg.grouping)
        return self._domains[key]


def contact_domain(normal: SignVec, grouping: bool = True) -> tuple[SignVec, ...]:
    """Directions allowed for a contact force against ``normal``.

    Grouped: the sign boxes covering the no-attraction region.  Ungrouped:
    its definite members one by one.
    """
    if grouping:
        return tuple(no_attraction_region(normal))
    return tuple(v for v in ALL_DEFINITE if satisfies_no_attraction(v, normal))


@dataclass
class SearchNode:
    graph: StructureGraph
    action: QualitativeAction
    ctx: _Context = field(repr=False)
    checked: frozenset = frozenset()
    labels: frozenset = frozenset()

    @property
    def signature(self) -> tuple:
        """What the subtree below this node depends on."""
        act = None if self.action.object in self.checked else self.action
        return self.checked, self.labels, act


def action_domain(obj: str, group_actions: bool = False) -> list[QualitativeAction]:
    directions = (SignVec(STAR, STAR, STAR),) if group_actions else NONZERO_DEFINITE
    return [
        QualitativeAction(QualitativeForce(qd, qr, obj))
        for qr in ALL_DEFINITE
        for qd in directions
    ]


def action_objects(scene: Scene, cfg: SolverConfig) -> list[str]:
    """Objects the action may act on, moved ones first."""
    movable = scene.movable
    moved = [o.id for o in movable if not o.change.is_zero]
    if cfg.h2:
        if not moved:
            raise NoMovedObject("heuristic 2 needs an object whose state changed; none did")
        return moved
    return moved + [o.id for o in movable if o.change.is_zero]


def branch_root(scene: Scene, cfg: SolverConfig, ctx: _Context | None = None) -> list[SearchNode]:
    ctx = ctx or _Context(scene, cfg)
    nodes = []
    for obj in action_objects(scene, cfg):
        for action in action_domain(obj, cfg.group_actions):
            g = ctx.graph.copy()
            v = g.vertices[obj]
            g.vertices[obj] = Vertex(v.id, v.label, v.checked, v.known + (KnownForce(ACTION_VAR, action.force, ACTION),), v.is_static)
            nodes.append(SearchNode(g, action, ctx))
    return nodes


def select_vertex(node: SearchNode) -> str:
    cands = [vid for vid, v in sorted(node.graph.vertices.items()) if not v.checked and not v.is_static]
    if not cands:
        raise AllChecked
    if node.ctx.cfg.vertex_order is VertexOrder.PREFER_KNOWN:
        for vid in cands:
            if node.graph.vertices[vid].has_assigned_forces:
                return vid
    return cands[0]


@lru_cache(maxsize=1 << 18)
def _entailed(target: tuple[int, ...], keys: tuple) -> bool:
    for s in reachable_sums(keys):
        net = net_effect(s)
        if net[0] & target[0] and net[1] & target[1] and net[2] & target[2] \
                and net[3] & target[3] and net[4] & target[4] and net[5] & target[5]:
            return True
    return False


def _assignments(node: SearchNode, vertex: str) -> Iterator[tuple[list[Edge], tuple[SignVec, ...], frozenset]]:
    """Grouped assignments to the free incoming edges of ``vertex`` that pass C1.

    Yields the free edges, their assigned directions and the child's edge labels.
    """
    ctx = node.ctx
    g = node.graph
    v = g.vertices[vertex]
    if v.checked or v.is_static:
        raise ValueError(f"vertex {vertex} is not a movable unchecked vertex")
    h1 = ctx.h1
    free = [e for e in (g.edges[k] for k in ctx.incoming[vertex]) if e.label is None and not g.vertices[e.source].checked]
    count = len(v.known) + len(free)
    if count > ctx.cfg.subset_cap:
        raise CapExceeded(count, ctx.cfg.subset_cap, vertex)
    base = [force_key(k.force, h1 and k.resistant) for k in v.known]
    target = ctx.targets[vertex]
    dkey = (vertex, tuple(e.contact.point_id for e in free))
    domains = ctx.keyed_domains.get(dkey)
    if domains is None:
        domains = ctx.keyed_domains[dkey] = [
            [(qd, force_key(QualitativeForce(qd, e.contact.qr_on(vertex), vertex), h1)) for qd in ctx.domain(e)]
            for e in free
        ]
    for combo in itertools.product(*domains):
        keys = tuple(sorted(base + [k for _, k in combo]))
        if not _entailed(target, keys):
            continue
        qds = tuple(qd for qd, _ in combo)
        lkey = (node.labels, vertex, qds)
        labels = ctx.label_cache.get(lkey)
        if labels is None:
            labels = ctx.label_cache[lkey] = _child_labels(node, vertex, free, qds)
        yield free, qds, labels


def _child_labels(node: SearchNode, vertex: str, free: list[Edge], qds: tuple[SignVec, ...]) -> frozenset:
    added = []
    for e, qd in zip(free, qds):
        pid = e.contact.point_id
        added.append(((pid, vertex), qd, True))
        added.append(((pid, e.source), inverse(qd), False))
    return node.labels | frozenset(added)


def _make_child(node: SearchNode, vertex: str, free: list[Edge], qds: tuple[SignVec, ...], labels: frozenset) -> SearchNode:
    ctx = node.ctx
    g = node.graph
    v = g.vertices[vertex]
    vertices = dict(g.vertices)
    edges = dict(g.edges)
    new = tuple(
        KnownForce(e.var_id, QualitativeForce(qd, e.contact.qr_on(vertex), vertex), CONTACT, True)
        for e, qd in zip(free, qds)
    )
    vertices[vertex] = Vertex(vertex, ctx.after[vertex], True, v.known + new, False)
    for e, k in zip(free, new):
        pid = e.contact.point_id
        edges[pid, vertex] = Edge(e.source, e.target, e.contact, k)
        back = g.edges[pid, e.source]
        react = KnownForce(
            back.var_id,
            QualitativeForce(inverse(k.force.qd), e.contact.qr_on(e.source), e.source),
            CONTACT,
            False,
        )
        edges[pid, e.source] = Edge(back.source, back.target, back.contact, react)
        sv = vertices[e.source]
        vertices[e.source] = Vertex(sv.id, sv.label, sv.checked, sv.known + (react,), sv.is_static)
    return SearchNode(StructureGraph(vertices, edges, g.vanished), node.action, ctx, node.checked | {vertex}, labels)


def branch_intermediate(node: SearchNode, vertex: str) -> list[SearchNode]:
    """All children of ``node`` obtained by checking ``vertex``; empty means backtrack."""
    return [_make_child(node, vertex, free, qds, labels) for free, qds, labels in _assignments(node, vertex)]


def _with_action(graph: StructureGraph, action: QualitativeAction) -> StructureGraph:
    v = graph.vertices[action.object]
    known = tuple(KnownForce(ACTION_VAR, action.force, ACTION) if k.kind == ACTION else k for k in v.known)
    out = graph.copy()
    out.vertices[action.object] = Vertex(v.id, v.label, v.checked, known, v.is_static)
    return out


def _rebind(hit: SearchNode | None, node: SearchNode) -> SearchNode | None:
    # a memoized leaf reached under another action differs only in the action force
    if hit is None or hit.action == node.action:
        return hit
    return SearchNode(_with_action(hit.graph, node.action), node.action, node.ctx, hit.checked, hit.labels)


def _dfs(node: SearchNode) -> SearchNode | None:
    """First leaf below ``node`` in canonical order, memoized on subtree signatures."""
    try:
        vertex = select_vertex(node)
    except AllChecked:
        return node
    memo = node.ctx.memo
    sig = node.signature
    if sig in memo:
        return _rebind(memo[sig], node)
    result = None
    checked = node.checked | {vertex}
    act = None if node.action.object in checked else node.action
    for free, qds, labels in _assignments(node, vertex):
        csig = (checked, labels, act)
        if csig in memo:
            result = _rebind(memo[csig], node)
        else:
            result = _dfs(_make_child(node, vertex, free, qds, labels))
        if result is not None:
            break
    memo[sig] = result
    return result


def _to_solution(leaf: SearchNode) -> Solution:
    ctx = leaf.ctx
    rest = ctx.leaf_assignments.get(leaf.labels)
    if rest is None:
        found = {}
        for v in leaf.graph.vertices.values():
            for k in v.known:
                if k.kind != ACTION:
                    found[k.var_id] = GroupedAssignment(k.var_id, k.kind, k.force, k.resistant)
        rest = ctx.leaf_assignments[leaf.labels] = tuple(found.values())
    act = GroupedAssignment(ACTION_VAR, ACTION, leaf.action.force, False)
    return Solution(
        leaf.action,
        tuple(sorted((act,) + rest, key=lambda a: a.var_id)),
        ctx.change_items,
        ctx.h1,
    )


def solve(scene: Scene, cfg: SolverConfig | None = None) -> list[Solution]:
    """Every action admitting a consistent force assignment, one witness each.

    Solutions are sorted by (object, locus, direction).
    """
    cfg = cfg or SolverConfig()
    ctx = _Context(scene, cfg)
    out = []
    for root in branch_root(scene, cfg, ctx):
        leaf = _dfs(root)
        if leaf is not None:
            out.append(_to_solution(leaf))
            if cfg.max_solutions is not None and len(out) >= cfg.max_solutions:
                break
    return sorted(out, key=lambda s: action_sort_key(s.action))


def solution_actions(solutions: Iterable[Solution]) -> set[QualitativeAction]:
    return {s.action for s in solutions}


def leaf_rule3_consistent(node: SearchNode) -> bool:
    return node.graph.rule3_consistent()


# -- independent re-check -----------------------------------------------------------------

def validate_solution(scene: Scene, sol: Solution, cfg: SolverConfig | None = None) -> bool:
    """Re-check every constraint of ``sol`` against ``scene`` from scratch."""
    cap = cfg.subset_cap if cfg else DEFAULT_CAP
    try:
        amap = sol.assignment_map
        act = sol.action
        obj = scene.object(act.object)
        if obj.is_static or act.qd == SignVec.of("000"):
            return False
        got = amap.get(ACTION_VAR)
        if got is None or got.value != act.force or got.resistant:
            return False
        expected = {ACTION_VAR}
        statics = {o.id for o in scene.objects if o.is_static}
        if scene.gravity:
            for o in scene.movable:
                vid = f"gravity:{o.id}"
                expected.add(vid)
                a = amap.get(vid)
                if a is None or a.value != gravity(o.id) or a.resistant:
                    return False
        graph = prune_vanishing(scene_graph(scene))
        for c in scene.contacts:
            if c.object_a in statics and c.object_b in statics:
                continue
            va, vb = edge_var_id(c.point_id, c.object_a), edge_var_id(c.point_id, c.object_b)
            if c.point_id in graph.vanished:
                continue
            expected |= {va, vb}
            fa, fb = amap.get(va), amap.get(vb)
            if fa is None or fb is None:
                return False
            for a, oid in ((fa, c.object_a), (fb, c.object_b)):
                if a.value.object != oid or a.value.qr != c.qr_on(oid):
                    return False
                if not satisfies_no_attraction(a.value.qd, c.normal_on(oid)):
                    return False
            if inverse(fa.value.qd) != fb.value.qd or (fa.resistant and fb.resistant):
                return False
        if set(amap) != expected:
            return False
        if dict(sol.changes) != {o.id: o.change for o in scene.movable}:
            return False
        for o in scene.movable:
            forces = sol.forces_on(o.id)
            flags = [sol.resistant_heuristic and a.resistant for a in forces]
            if not change_entailed(o.change, [a.value for a in forces], cap, flags):
                return False
    except (KeyError, ValueError):
        return False
    return True


__all__ = [
    "AllChecked",
    "ForceVariable",
    "GroupedAssignment",
    "Heuristic",
    "NoMovedObject",
    "SearchNode",
    "Solution",
    "SolverConfig",
    "TraceEntry",
    "VertexOrder",
    "action_domain",
    "action_objects",
    "branch_intermediate",
    "branch_root",
    "contact_domain",
    "select_vertex",
    "solution_actions",
    "solve",
    "validate_solution",
]
