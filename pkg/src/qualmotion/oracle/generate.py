"""Build box stacks, simulate an impulse, and quantize the result into a scene."""
from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..dynamics import DEFAULT_CAP, ContactGeometry, ObjectState, QualitativeAction, QualitativeForce
from ..scene import Contact, Scene, SceneObject
from ..signs import quantize
from .simulator import ImpulseEvent, RigidBody, World, box_contacts, step

GROUND_ID = "ground"
GROUND_HALF = (50.0, 50.0, 0.5)
GEOMETRY_EPSILON = 1e-9


class UnstableInitialStack(RuntimeError):
    def __init__(self, message: str, max_speed: float, max_drift: float):
        super().__init__(message)
        self.max_speed = max_speed
        self.max_drift = max_drift


@dataclass(frozen=True)
class BoxSpec:
    id: str
    half_extents: tuple[float, float, float]
    center: tuple[float, float, float]


@dataclass(frozen=True)
class StackSpec:
    boxes: tuple[BoxSpec, ...]
    density: float = 100.0

    def box(self, box_id: str) -> BoxSpec:
        for b in self.boxes:
            if b.id == box_id:
                return b
        raise KeyError(box_id)


@dataclass
class GeneratedScene:
    scene: Scene
    action: QualitativeAction | None
    epsilon: float
    impulse: ImpulseEvent
    jitter: float
    velocities: dict[str, tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]] = field(repr=False, default_factory=dict)


def tower(n: int, half: float = 0.2, offsets: Sequence[tuple[float, float]] | None = None) -> StackSpec:
    """``n`` equal cubes stacked on the ground, ids ``b0`` (bottom) upward."""
    boxes = []
    for i in range(n):
        dx, dy = offsets[i] if offsets else (0.0, 0.0)
        boxes.append(BoxSpec(f"b{i}", (half, half, half), (dx, dy, half * (2 * i + 1))))
    return StackSpec(tuple(boxes))


def random_stack(rng: random.Random, n_boxes: int) -> StackSpec:
    """Columns of boxes on the ground; neighbouring columns touch or stand apart."""
    n_cols = rng.randint(1, n_boxes)
    counts = [1] * n_cols
    for _ in range(n_boxes - n_cols):
        counts[rng.randrange(n_cols)] += 1
    boxes = []
    x_edge = 0.0
    k = 0
    for col, count in enumerate(counts):
        width = rng.choice((0.15, 0.2, 0.25))
        if col:
            x_edge += rng.choice((0.0, 0.1))
        cx = x_edge + width
        z = 0.0
        for level in range(count):
            hx = width if level == 0 else rng.choice((width, width * 0.75))
            hy = rng.choice((0.15, 0.2, 0.25))
            hz = rng.choice((0.1, 0.15, 0.2))
            dx = 0.0 if level == 0 else rng.choice((-0.4, 0.0, 0.4)) * (width - hx)
            dy = rng.choice((-0.05, 0.0, 0.05)) if level else 0.0
            boxes.append(BoxSpec(f"b{k}", (hx, hy, hz), (cx + dx, dy, z + hz)))
            z += 2 * hz
            k += 1
        x_edge = cx + width
    return StackSpec(tuple(boxes))


def _face_point(rng: random.Random, box: BoxSpec) -> tuple[float, float, float]:
    axis = rng.randrange(3)
    side = rng.choice((-1.0, 1.0))
    local = [0.0, 0.0, 0.0]
    for i in range(3):
        h = box.half_extents[i]
        local[i] = side * h if i == axis else rng.choice((-h, -h / 2, 0.0, h / 2, h))
    return tuple(c + l for c, l in zip(box.center, local))


def random_impulse(rng: random.Random, stack: StackSpec, magnitude: float = 1.0) -> ImpulseEvent:
    box = rng.choice(stack.boxes)
    point = _face_point(rng, box)
    mass = stack.density * 8 * float(np.prod(box.half_extents))
    while True:
        signs = [rng.choice((-1, 0, 1)) for _ in range(3)]
        if any(signs):
            break
    impulse = tuple(s * rng.uniform(0.5, 1.5) * magnitude * mass for s in signs)
    return ImpulseEvent(box.id, point, impulse, 0)


def build_world(stack: StackSpec) -> World:
    ground = RigidBody.box(GROUND_ID, GROUND_HALF, (0.0, 0.0, -GROUND_HALF[2]), is_static=True)
    bodies = {GROUND_ID: ground}
    for b in stack.boxes:
        bodies[b.id] = RigidBody.box(b.id, b.half_extents, b.center, stack.density)
    contacts = []
    ids = sorted(bodies)
    for i, a in enumerate(ids):
        for b in ids[i + 1:]:
            A, B = bodies[a], bodies[b]
            found = box_contacts(A, B)
            if not found:
                found = box_contacts(B, A)
            contacts.extend(found)
    # static bodies go on the b side so that a is always movable
    fixed = []
    for c in contacts:
        if bodies[c.a].is_static:
            c = type(c)(c.b, c.a, c.local_b, c.local_a, bodies[c.a].orientation.T @ -(bodies[c.b].orientation @ c.normal_b))
        fixed.append(c)
    return World(bodies, fixed)


def _snapshot(world: World) -> dict[str, tuple[np.ndarray, np.ndarray]]:
    return {bid: (b.velocity.copy(), b.angular_velocity.copy()) for bid, b in world.bodies.items() if not b.is_static}


def generate_scene(
    spec: StackSpec,
    impulse: ImpulseEvent,
    horizon: int = 1,
    *,
    dt: float = 1e-3,
    preroll: int = 20,
    epsilon: float | None = None,
    unstable_speed: float = 1e-6,
) -> GeneratedScene:
    """Settle ``spec``, apply ``impulse`` at the first observed step, observe after ``horizon`` steps."""
    if horizon < 1:
        raise ValueError("horizon must be at least one step")
    world = build_world(spec)
    start = {bid: b.position.copy() for bid, b in world.bodies.items()}
    for _ in range(preroll):
        step(world, dt)
    speed = max((float(np.max(np.abs(np.concatenate([b.velocity, b.angular_velocity]))))
                 for b in world.bodies.values() if not b.is_static), default=0.0)
    drift = max((float(np.max(np.abs(b.position - start[bid]))) for bid, b in world.bodies.items()), default=0.0)
    if speed > unstable_speed or drift > unstable_speed:
        raise UnstableInitialStack(
            f"stack moved during settling: max speed {speed:.3g}, max drift {drift:.3g}", speed, drift
        )
    jitter = speed
    eps = epsilon if epsilon is not None else max(10.0 * jitter, 1e-8)

    positions = {bid: b.position.copy() for bid, b in world.bodies.items()}
    contacts = []
    for i, c in enumerate(world.contacts):
        point, _, normal = world.contact_world(c)
        normal = tuple(float(round(x)) if abs(x - round(x)) < 1e-12 else float(x) for x in normal)
        qa = quantize(point - positions[c.a], GEOMETRY_EPSILON)
        qb = quantize(point - positions[c.b], GEOMETRY_EPSILON)
        geom = ContactGeometry(quantize(normal, 0.0), qa, qb, normal)
        contacts.append(Contact(c.a, c.b, geom, f"p{i}", tuple(float(x) for x in point)))
    before = _snapshot(world)
    t0 = world.time
    event = ImpulseEvent(impulse.body, impulse.application_point, impulse.impulse, t0 + impulse.time)
    if impulse.body not in world.bodies or world.bodies[impulse.body].is_static:
        raise ValueError(f"impulse targets unknown or static body {impulse.body!r}")
    if not world.bodies[impulse.body].on_boundary(impulse.application_point):
        raise ValueError(f"application point {impulse.application_point} is not on the surface of {impulse.body}")
    for _ in range(horizon):
        step(world, dt, (event,))
    after = _snapshot(world)

    objects = [SceneObject(GROUND_ID, mass_center=tuple(positions[GROUND_ID]), is_static=True)]
    for b in spec.boxes:
        v1, w1 = before[b.id]
        v2, w2 = after[b.id]
        objects.append(SceneObject(
            b.id,
            ObjectState(quantize(v1, eps), quantize(w1, eps)),
            ObjectState(quantize(v2, eps), quantize(w2, eps)),
            tuple(float(x) for x in positions[b.id]),
        ))
    scene = Scene(tuple(objects), tuple(contacts), True)

    action = None
    if any(impulse.impulse):
        body = spec.box(impulse.body)
        lever = np.asarray(impulse.application_point) - np.asarray(positions[impulse.body])
        action = QualitativeAction(QualitativeForce(
            quantize(impulse.impulse, 0.0), quantize(lever, GEOMETRY_EPSILON), body.id
        ))
    velocities = {bid: (*before[bid], *after[bid]) for bid in before}
    return GeneratedScene(scene, action, eps, impulse, jitter, velocities)


def max_forces_per_object(stack: StackSpec) -> int:
    """Gravity, one force per contact point and the action, for the busiest box."""
    world = build_world(stack)
    counts = {b.id: 2 for b in stack.boxes}
    for c in world.contacts:
        for bid in (c.a, c.b):
            if bid in counts:
                counts[bid] += 1
    return max(counts.values(), default=0)


def random_scene(
    seed: int,
    n_boxes: int | None = None,
    horizon: int = 1,
    max_tries: int = 100,
    cap: int = DEFAULT_CAP,
    require_motion: bool = True,
) -> GeneratedScene:
    """A stable random stack with a random impulse.

    Unstable stacks and stacks where some box would carry more than ``cap``
    forces are redrawn.  With ``require_motion`` so are impulses that leave
    the pushed box at rest (a downward push on a grounded box, say).
    """
    rng = random.Random(seed)
    for _ in range(max_tries):
        n = n_boxes if n_boxes is not None else rng.randint(1, 5)
        stack = random_stack(rng, n)
        impulse = random_impulse(rng, stack)
        if max_forces_per_object(stack) > cap:
            continue
        try:
            gen = generate_scene(stack, impulse, horizon)
        except UnstableInitialStack:
            continue
        if require_motion and gen.scene.object(impulse.body).change.is_zero:
            continue
        return gen
    raise UnstableInitialStack(f"no stable stack after {max_tries} tries (seed {seed})", float("nan"), float("nan"))


def sidecar(action: QualitativeAction | None) -> dict:
    if action is None:
        return {"action": None}
    return {"action": {"object": action.object, "qd": action.qd.encode(), "qr": action.qr.encode()}}


def sidecar_dumps(action: QualitativeAction | None) -> str:
    return json.dumps(sidecar(action), indent=2) + "\n"


def load_sidecar(data: dict) -> QualitativeAction | None:
    from ..signs import SignVec

    if not isinstance(data, dict) or set(data) != {"action"}:
        raise ValueError("sidecar: expected exactly one field 'action'")
    a = data["action"]
    if a is None:
        return None
    if not isinstance(a, dict) or set(a) != {"object", "qd", "qr"}:
        raise ValueError("sidecar.action: expected fields object, qd, qr")
    return QualitativeAction(QualitativeForce(SignVec.parse(a["qd"]), SignVec.parse(a["qr"]), a["object"]))


__all__ = [
    "BoxSpec",
    "GeneratedScene",
    "StackSpec",
    "UnstableInitialStack",
    "build_world",
    "generate_scene",
    "load_sidecar",
    "max_forces_per_object",
    "random_impulse",
    "random_scene",
    "random_stack",
    "sidecar",
    "sidecar_dumps",
    "tower",
]
