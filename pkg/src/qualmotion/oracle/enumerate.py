"""Brute-force reference for the action inference search.

Everything here is evaluated directly: explicit power sets, explicit
products over contact groups, and every candidate action tried one by
one.  Only the sign tables and the contact groups themselves are shared
with the solver, since they define the problem rather than solve it.
"""
from __future__ import annotations

import itertools
from typing import Iterable

from ..dynamics import (
    CapExceeded,
    QualitativeAction,
    QualitativeForce,
    gravity,
    heuristic_resistant_add_vec,
    is_vanishing_point,
)
from ..scene import Contact, Scene
from ..signs import ALL_DEFINITE, NONZERO_DEFINITE, STAR, SignVec, big_sum, inverse, vec_add, vec_cross
from ..solver import SolverConfig, VertexOrder, contact_domain

MAX_OBJECTS = 3


def _contains(net: tuple[SignVec, SignVec], lin: SignVec, ang: SignVec) -> bool:
    # set-valued members match on any overlap
    return all(int(n) & int(t) for n, t in zip((*net[0], *net[1]), (*lin, *ang)))


def subset_sums(forces: list[tuple[QualitativeForce, bool]], h1: bool) -> set[tuple[SignVec, ...]]:
    """(resistant lin, resistant ang, other lin, other ang) sums of every subset."""
    out = set()
    for mask in range(1 << len(forces)):
        chosen = [forces[i] for i in range(len(forces)) if mask >> i & 1]
        res = [f for f, r in chosen if h1 and r]
        oth = [f for f, r in chosen if not (h1 and r)]
        out.add((
            big_sum(f.qd for f in res),
            big_sum(vec_cross(f.qr, f.qd) for f in res),
            big_sum(f.qd for f in oth),
            big_sum(vec_cross(f.qr, f.qd) for f in oth),
        ))
    return out


def combine(sums: tuple[SignVec, ...]) -> tuple[SignVec, SignVec]:
    res_lin, res_ang, lin, ang = sums
    return heuristic_resistant_add_vec(res_lin, lin), heuristic_resistant_add_vec(res_ang, ang)


def subset_nets(forces: list[tuple[QualitativeForce, bool]], h1: bool) -> set[tuple[SignVec, SignVec]]:
    """Net (linear, angular) sign vectors of every subset of ``forces``.

    Without resistant forces the resistant sums are zero and ``combine``
    reduces to plain addition.
    """
    return {combine(s) for s in subset_sums(forces, h1)}


def visit_order(scene: Scene, start: str, live: list[Contact], order: VertexOrder) -> list[str]:
    movable = sorted(o.id for o in scene.movable)
    if order is VertexOrder.CANONICAL:
        return movable
    seen = [start]
    while len(seen) < len(movable):
        rest = [m for m in movable if m not in seen]
        near = [m for m in rest if any(m in (c.object_a, c.object_b) and c.other(m) in seen for c in live)]
        seen.append(min(near) if near else rest[0])
    return seen


def _actions_for(obj: str, group_actions: bool) -> Iterable[QualitativeAction]:
    dirs = (SignVec(STAR, STAR, STAR),) if group_actions else NONZERO_DEFINITE
    for qr in ALL_DEFINITE:
        for qd in dirs:
            yield QualitativeAction(QualitativeForce(qd, qr, obj))


def enumerate_actions(scene: Scene, cfg: SolverConfig | None = None, max_objects: int = MAX_OBJECTS) -> set[QualitativeAction]:
    """All candidate actions for which some grouped contact assignment satisfies every constraint."""
    cfg = cfg or SolverConfig()
    movable = scene.movable
    if len(movable) > max_objects:
        raise CapExceeded(len(movable), max_objects)
    statics = {o.id for o in scene.objects if o.is_static}
    states = {o.id: o.state_before for o in scene.objects}
    changes = {o.id: o.change for o in movable}
    moved = [o.id for o in movable if not o.change.is_zero]
    candidates = moved if cfg.h2 else [o.id for o in movable]
    live = [
        c for c in scene.contacts
        if not (c.object_a in statics and c.object_b in statics)
        and not is_vanishing_point(states[c.object_a], states[c.object_b], c.geometry)
    ]
    h1 = cfg.h1
    found: set[QualitativeAction] = set()
    for obj in candidates:
        order = visit_order(scene, obj, live, cfg.vertex_order)
        rank = {o: i for i, o in enumerate(order)}
        # the side assigned first carries the resistant force
        sides = []
        for c in live:
            ra = rank.get(c.object_a, len(rank))
            rb = rank.get(c.object_b, len(rank))
            first = c.object_a if ra < rb else c.object_b
            sides.append((c, first, c.other(first)))
        domains = [contact_domain(c.normal_on(first), cfg.grouping) for c, first, _ in sides]
        ok_actions: set[QualitativeAction] = set()
        for combo in itertools.product(*domains):
            per_obj: dict[str, list[tuple[QualitativeForce, bool]]] = {o.id: [] for o in movable}
            if scene.gravity:
                for o in movable:
                    per_obj[o.id].append((gravity(o.id), False))
            for (c, first, second), qd in zip(sides, combo):
                if first in per_obj:
                    per_obj[first].append((QualitativeForce(qd, c.qr_on(first), first), True))
                if second in per_obj:
                    per_obj[second].append((QualitativeForce(inverse(qd), c.qr_on(second), second), False))
            for o, fs in per_obj.items():
                if len(fs) + (o == obj) > cfg.subset_cap:
                    raise CapExceeded(len(fs) + (o == obj), cfg.subset_cap, o)
            if not all(
                any(_contains(n, changes[o].dqv, changes[o].dqw) for n in subset_nets(per_obj[o], h1))
                for o in per_obj if o != obj
            ):
                continue
            ch = changes[obj]
            sums = subset_sums(per_obj[obj], h1)
            if any(_contains(combine(t), ch.dqv, ch.dqw) for t in sums):
                ok_actions.update(_actions_for(obj, cfg.group_actions))
                break
            for action in _actions_for(obj, cfg.group_actions):
                if action in ok_actions:
                    continue
                lin, ang = action.qd, vec_cross(action.qr, action.qd)
                for rl, ra, ol, oa in sums:
                    if _contains(combine((rl, ra, vec_add(ol, lin), vec_add(oa, ang))), ch.dqv, ch.dqw):
                        ok_actions.add(action)
                        break
        found |= ok_actions
    return found


__all__ = ["MAX_OBJECTS", "combine", "enumerate_actions", "subset_nets", "subset_sums", "visit_order"]
