"""Qualitative forces, object states and the envelope of reachable state changes.

The envelope of a force set ``D`` on one object is the union, over every
subset of ``D``, of the Cartesian product of the subset's summed directions
(linear part) and summed torques ``qr x qd`` (angular part).  Subset sums
are enumerated incrementally: the set of distinct partial sums is extended
one force at a time, which visits every subset while collapsing duplicates.

Resistant forces (contact forces picked by the search rather than implied
by Newton's third law) may be combined with :func:`heuristic_resistant_add`
instead of plain addition; see :func:`change_entailed`.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

from .signs import (
    ADD,
    ANY,
    M,
    P,
    SUB,
    Z,
    SignSet,
    SignVec,
    ZERO_VEC,
    add_masks,
    cross_masks,
    dot_mask,
    inverse,
    quantize,
)

ObjectId = str

DEFAULT_CAP = 12


class CapExceeded(ValueError):
    def __init__(self, count: int, cap: int, obj: str | None = None):
        self.count = count
        self.cap = cap
        self.obj = obj
        where = f" on object {obj!r}" if obj else ""
        super().__init__(f"{count} forces{where} exceed the power-set cap of {cap}")


@dataclass(frozen=True)
class QualitativeForce:
    qd: SignVec
    qr: SignVec
    object: ObjectId

    @property
    def torque(self) -> SignVec:
        return SignVec.from_masks(cross_masks(self.qr, self.qd))

    def __str__(self) -> str:
        return f"<{self.qd}, {self.qr}, {self.object}>"


GRAVITY_DIRECTION = SignVec.of("00-")


def gravity(obj: ObjectId) -> QualitativeForce:
    return QualitativeForce(GRAVITY_DIRECTION, ZERO_VEC, obj)


@dataclass(frozen=True)
class ObjectState:
    qv: SignVec = ZERO_VEC
    qw: SignVec = ZERO_VEC

    @property
    def at_rest(self) -> bool:
        return self.qv == ZERO_VEC and self.qw == ZERO_VEC


@dataclass(frozen=True)
class StateChange:
    dqv: SignVec = ZERO_VEC
    dqw: SignVec = ZERO_VEC

    @property
    def is_zero(self) -> bool:
        return self.dqv == ZERO_VEC and self.dqw == ZERO_VEC

    @property
    def is_definite(self) -> bool:
        return self.dqv.is_definite and self.dqw.is_definite

    def __str__(self) -> str:
        return f"<{self.dqv}, {self.dqw}>"


NO_CHANGE = StateChange()


def state_change(before: ObjectState, after: ObjectState) -> StateChange:
    """Qualitative difference ``after - before`` of two observed states."""
    sub = lambda a, b: SignVec.from_masks((SUB[a[0]][b[0]], SUB[a[1]][b[1]], SUB[a[2]][b[2]]))  # noqa: E731
    return StateChange(sub(after.qv, before.qv), sub(after.qw, before.qw))


def numeric_state_change(v1, v2, w1, w2, epsilon: float = 0.0) -> StateChange:
    dv = [b - a for a, b in zip(v1, v2)]
    dw = [b - a for a, b in zip(w1, w2)]
    return StateChange(quantize(dv, epsilon), quantize(dw, epsilon))


@dataclass(frozen=True)
class QualitativeAction:
    force: QualitativeForce

    def __post_init__(self) -> None:
        if self.force.qd == ZERO_VEC:
            raise ValueError("an action needs a nonzero impulse direction")

    @property
    def object(self) -> ObjectId:
        return self.force.object

    @property
    def qd(self) -> SignVec:
        return self.force.qd

    @property
    def qr(self) -> SignVec:
        return self.force.qr

    def __str__(self) -> str:
        return f"push object {self.object} in direction {self.qd} at locus {self.qr}"


@dataclass(frozen=True)
class ContactGeometry:
    """Contact normal and lever directions at one contact point.

    ``normal_q`` is the normal on object ``a``: it points from ``b`` into ``a``.
    """

    normal_q: SignVec
    qr_on_a: SignVec
    qr_on_b: SignVec
    numeric_normal: tuple[float, float, float] | None = field(default=None)

    def __post_init__(self) -> None:
        if self.numeric_normal is not None:
            q = quantize(self.numeric_normal, 0.0)
            if q != self.normal_q:
                raise ValueError(f"numeric normal {self.numeric_normal} quantizes to {q}, not {self.normal_q}")

    def normal_on(self, side: str) -> SignVec:
        return self.normal_q if side == "a" else inverse(self.normal_q)


# -- resistant-force heuristic ----------------------------------------------------

def _hadd_definite(r: int, o: int) -> int:
    if o == Z:
        return Z
    if r == Z or r == o:
        return o
    return o | Z  # opposing: may cancel to zero, never flip


HADD = [[0] * 8 for _ in range(8)]
for _r in range(8):
    for _o in range(8):
        acc = 0
        for rb in (P, Z, M):
            for ob in (P, Z, M):
                if _r & rb and _o & ob:
                    acc |= _hadd_definite(rb, ob)
        HADD[_r][_o] = acc


def heuristic_resistant_add(resistant: int, other: int) -> SignSet:
    """Combine a resistant component with the sum of the other forces."""
    return SignSet(HADD[resistant][other])


def heuristic_resistant_add_vec(resistant: SignVec, other: SignVec) -> SignVec:
    return SignVec.from_masks(tuple(HADD[r][o] for r, o in zip(resistant, other)))


# -- envelope -------------------------------------------------------------------

# A force key is (lin0, lin1, lin2, tor0, tor1, tor2, resistant); a partial sum
# state is 12 masks: resistant lin/tor sums followed by other lin/tor sums.
ForceKey = tuple
_ZERO_STATE = (Z,) * 12


def force_key(f: QualitativeForce, resistant: bool = False) -> ForceKey:
    return (*f.qd, *cross_masks(f.qr, f.qd), bool(resistant))


def _extend(states: Iterable[tuple], key: ForceKey) -> set[tuple]:
    out = set(states)
    if key[6]:
        for s in list(out):
            out.add((
                ADD[s[0]][key[0]], ADD[s[1]][key[1]], ADD[s[2]][key[2]],
                ADD[s[3]][key[3]], ADD[s[4]][key[4]], ADD[s[5]][key[5]],
            ) + s[6:])
    else:
        for s in list(out):
            out.add(s[:6] + (
                ADD[s[6]][key[0]], ADD[s[7]][key[1]], ADD[s[8]][key[2]],
                ADD[s[9]][key[3]], ADD[s[10]][key[4]], ADD[s[11]][key[5]],
            ))
    return out


@lru_cache(maxsize=1 << 16)
def reachable_sums(keys: tuple[ForceKey, ...]) -> frozenset:
    """Distinct partial-sum states over all subsets of ``keys`` (prefix-memoized)."""
    if not keys:
        return frozenset((_ZERO_STATE,))
    return frozenset(_extend(reachable_sums(keys[:-1]), keys[-1]))


def net_effect(state: Sequence[int]) -> tuple[int, ...]:
    """Six masks (lin, ang) after folding resistant sums into the others."""
    return tuple(HADD[state[i]][state[6 + i]] for i in range(6))


def change_masks(change: StateChange) -> tuple[int, ...]:
    return (*change.dqv, *change.dqw)


def _contains(net: Sequence[int], target: Sequence[int]) -> bool:
    # set-valued targets are satisfied by any member
    return all(n & t for n, t in zip(net, target))


def entailed_keys(target: tuple[int, ...], keys: tuple[ForceKey, ...]) -> bool:
    for s in reachable_sums(keys):
        if _contains(net_effect(s), target):
            return True
    return False


def _keys(forces: Sequence[QualitativeForce], resistant: Sequence[bool] | None, cap: int) -> tuple:
    if len(forces) > cap:
        objs = {f.object for f in forces}
        raise CapExceeded(len(forces), cap, objs.pop() if len(objs) == 1 else None)
    if resistant is None:
        resistant = [False] * len(forces)
    if len(resistant) != len(forces):
        raise ValueError("resistant flags must parallel the force list")
    return tuple(force_key(f, r) for f, r in zip(forces, resistant))


def _check_same_object(forces: Sequence[QualitativeForce]) -> None:
    if len({f.object for f in forces}) > 1:
        raise ValueError("all forces in an envelope must act on the same object")


def delta_envelope(
    forces: Sequence[QualitativeForce],
    cap: int = DEFAULT_CAP,
    resistant: Sequence[bool] | None = None,
) -> set[StateChange]:
    """All definite state changes producible by some subset of ``forces``."""
    forces = list(forces)
    _check_same_object(forces)
    keys = _keys(forces, resistant, cap)
    nets = {net_effect(s) for s in reachable_sums(keys)}
    out: set[StateChange] = set()
    for net in nets:
        for combo in itertools.product(*(tuple(b for b in (P, Z, M) if m & b) for m in net)):
            out.add(StateChange(SignVec.from_masks(combo[:3]), SignVec.from_masks(combo[3:])))
    return out


def change_entailed(
    change: StateChange,
    forces: Sequence[QualitativeForce],
    cap: int = DEFAULT_CAP,
    resistant: Sequence[bool] | None = None,
) -> bool:
    """True iff ``change`` lies in the envelope of ``forces``.

    Stops at the first partial sum whose net effect covers the change.  With
    ``resistant`` flags, resistant forces are summed among themselves and
    then folded into the sum of the remaining forces component-wise with
    :func:`heuristic_resistant_add`.
    """
    forces = list(forces)
    _check_same_object(forces)
    keys = _keys(forces, resistant, cap)
    target = change_masks(change)
    if _contains((Z,) * 6, target):
        return True  # the empty subset
    states = {_ZERO_STATE}
    for key in keys:
        grown = _extend(states, key)
        if any(_contains(net_effect(s), target) for s in grown - states):
            return True
        states = grown
    return False


@dataclass(frozen=True)
class Witness:
    """A subset of a force list whose net effect covers an observed change."""

    subset: tuple[int, ...]
    net_linear: SignVec
    net_angular: SignVec


@lru_cache(maxsize=1 << 14)
def witness_keys(target: tuple[int, ...], keys: tuple[ForceKey, ...]) -> Witness | None:
    parent: dict[tuple, tuple | None] = {_ZERO_STATE: None}
    order = [_ZERO_STATE]
    for idx, key in enumerate(keys):
        for s in list(order):
            for n in _extend((s,), key):
                if n not in parent:
                    parent[n] = (s, idx)
                    order.append(n)
    for s in order:
        net = net_effect(s)
        if _contains(net, target):
            subset = []
            cur = s
            while parent[cur] is not None:
                prev, idx = parent[cur]
                subset.append(idx)
                cur = prev
            return Witness(tuple(sorted(subset)), SignVec.from_masks(net[:3]), SignVec.from_masks(net[3:]))
    return None


def find_witness(
    change: StateChange,
    forces: Sequence[QualitativeForce],
    cap: int = DEFAULT_CAP,
    resistant: Sequence[bool] | None = None,
) -> Witness | None:
    forces = list(forces)
    keys = _keys(forces, resistant, cap)
    return witness_keys(change_masks(change), keys)


# -- physical rules ---------------------------------------------------------------

def point_velocity(state: ObjectState, qr: SignVec) -> SignVec:
    """Qualitative velocity ``qv + qw x qr`` of the point at ``qr``."""
    return SignVec.from_masks(add_masks(state.qv, cross_masks(state.qw, qr)))


def is_vanishing_point(
    state_a: ObjectState,
    state_b: ObjectState,
    geom: ContactGeometry,
    point_velocities: tuple[Sequence[float], Sequence[float]] | None = None,
) -> bool:
    """Whether the two objects are moving apart at the contact point.

    With numeric point velocities ``(x_a, x_b)`` and a numeric normal the
    numeric test ``n . (x_a - x_b) > 0`` decides; otherwise the qualitative
    one, which reports vanishing only when no member of
    ``normal_q . (qx_a - qx_b)`` is ``-`` or ``0``.
    """
    if point_velocities is not None:
        if geom.numeric_normal is None:
            raise ValueError("numeric point velocities need a numeric contact normal")
        xa, xb = point_velocities
        return sum(n * (a - b) for n, a, b in zip(geom.numeric_normal, xa, xb)) > 0
    qx_a = point_velocity(state_a, geom.qr_on_a)
    qx_b = point_velocity(state_b, geom.qr_on_b)
    rel = SignVec.from_masks((SUB[qx_a[0]][qx_b[0]], SUB[qx_a[1]][qx_b[1]], SUB[qx_a[2]][qx_b[2]]))
    seen = 0
    for qdelta in rel.denotation():
        seen |= dot_mask(geom.normal_q, qdelta)
    return seen & (M | Z) == 0


def satisfies_no_attraction(
    qd: SignVec,
    geom: ContactGeometry | SignVec,
    side: str = "a",
    numeric_direction: Sequence[float] | None = None,
) -> bool:
    """No-attraction rule: some member of ``qd . n`` is ``+`` or ``0``.

    ``geom`` may be a contact (normal taken for ``side``) or a bare normal.
    ``numeric_direction`` switches to the numeric test ``f . n >= 0``.
    """
    if isinstance(geom, ContactGeometry):
        normal = geom.normal_on(side)
        numeric_normal = geom.numeric_normal
        if numeric_normal is not None and side != "a":
            numeric_normal = tuple(-c for c in numeric_normal)
    else:
        normal, numeric_normal = geom, None
    if numeric_direction is not None:
        if numeric_normal is None:
            raise ValueError("numeric direction needs a numeric contact normal")
        return sum(f * n for f, n in zip(numeric_direction, numeric_normal)) >= 0
    return dot_mask(qd, normal) & (P | Z) != 0


def third_law_pair(qd: SignVec) -> SignVec:
    return inverse(qd)


def no_attraction_region(normal: SignVec) -> list[SignVec]:
    """Cover the definite directions allowed against ``normal`` with sign boxes.

    Axes where the normal is zero stay fully indefinite; the others are
    merged greedily into maximal boxes.  The union of the boxes is exactly
    the set of definite directions passing the no-attraction rule, so an
    axis-aligned normal yields a single box.
    """
    bound = [i for i in range(3) if normal[i] != Z]

    def expand(masks):
        return itertools.product(*(tuple(b for b in (P, Z, M) if m & b) for m in masks))

    def ok(combo) -> bool:
        rep = [Z, Z, Z]
        for i, b in zip(bound, combo):
            rep[i] = b
        return dot_mask(rep, normal) & (P | Z) != 0

    feasible = {c for c in itertools.product((P, Z, M), repeat=len(bound)) if ok(c)}
    remaining = set(feasible)
    out = []
    while remaining:
        box = list(min(remaining))
        for axis in range(len(bound)):
            for b in (P, Z, M):
                trial = list(box)
                trial[axis] |= b
                if all(c in feasible for c in expand(trial)):
                    box = trial
        remaining -= set(expand(box))
        masks = [ANY, ANY, ANY]
        for i, b in zip(bound, box):
            masks[i] = b
        out.append(SignVec.from_masks(masks))
    return sorted(out)


__all__ = [
    "CapExceeded",
    "ContactGeometry",
    "DEFAULT_CAP",
    "NO_CHANGE",
    "ObjectId",
    "ObjectState",
    "QualitativeAction",
    "QualitativeForce",
    "StateChange",
    "Witness",
    "change_entailed",
    "delta_envelope",
    "find_witness",
    "gravity",
    "heuristic_resistant_add",
    "heuristic_resistant_add_vec",
    "is_vanishing_point",
    "no_attraction_region",
    "numeric_state_change",
    "satisfies_no_attraction",
    "state_change",
    "third_law_pair",
]
