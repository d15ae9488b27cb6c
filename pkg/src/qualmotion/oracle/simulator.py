"""Minimal impulse-based rigid-body simulator for axis-aligned boxes.

Contacts are frictionless point contacts with non-negative normal
impulses, resolved each step by projected Gauss-Seidel on the contact
Delassus matrix.  The simulator only manufactures ground truth; it makes
no attempt at realism beyond what the tests need.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

GRAVITY = np.array([0.0, 0.0, -9.81])


class NumericBlowup(RuntimeError):
    pass


@dataclass
class RigidBody:
    id: str
    mass: float
    inertia: np.ndarray  # diagonal, body frame
    position: np.ndarray
    half_extents: np.ndarray
    velocity: np.ndarray = field(default_factory=lambda: np.zeros(3))
    angular_velocity: np.ndarray = field(default_factory=lambda: np.zeros(3))
    orientation: np.ndarray = field(default_factory=lambda: np.eye(3))
    is_static: bool = False

    def __post_init__(self) -> None:
        self.inertia = np.asarray(self.inertia, dtype=float)
        self.position = np.asarray(self.position, dtype=float)
        self.half_extents = np.asarray(self.half_extents, dtype=float)
        self.velocity = np.asarray(self.velocity, dtype=float)
        self.angular_velocity = np.asarray(self.angular_velocity, dtype=float)
        self.orientation = np.asarray(self.orientation, dtype=float)
        if not self.mass > 0:
            raise ValueError(f"body {self.id}: mass must be positive")
        if self.inertia.shape != (3,) or not np.all(self.inertia > 0):
            raise ValueError(f"body {self.id}: inertia must be three positive diagonal entries")

    @classmethod
    def box(cls, id: str, half_extents: Sequence[float], position: Sequence[float],
            density: float = 100.0, is_static: bool = False) -> RigidBody:
        h = np.asarray(half_extents, dtype=float)
        mass = density * 8.0 * float(np.prod(h))
        a, b, c = 2 * h
        inertia = mass / 12.0 * np.array([b * b + c * c, a * a + c * c, a * a + b * b])
        return cls(id, mass, inertia, np.asarray(position, dtype=float), h, is_static=is_static)

    @property
    def inv_mass(self) -> float:
        return 0.0 if self.is_static else 1.0 / self.mass

    def inv_inertia_world(self) -> np.ndarray:
        if self.is_static:
            return np.zeros((3, 3))
        R = self.orientation
        return R @ np.diag(1.0 / self.inertia) @ R.T

    def to_world(self, local: np.ndarray) -> np.ndarray:
        return self.position + self.orientation @ local

    def to_local(self, point: np.ndarray) -> np.ndarray:
        return self.orientation.T @ (np.asarray(point, dtype=float) - self.position)

    def point_velocity(self, point: np.ndarray) -> np.ndarray:
        return self.velocity + np.cross(self.angular_velocity, point - self.position)

    def apply_impulse(self, impulse: np.ndarray, point: np.ndarray) -> None:
        if self.is_static:
            return
        self.velocity = self.velocity + impulse * self.inv_mass
        self.angular_velocity = self.angular_velocity + self.inv_inertia_world() @ np.cross(point - self.position, impulse)

    def on_boundary(self, point: Sequence[float], tol: float = 1e-9) -> bool:
        local = np.abs(self.to_local(np.asarray(point, dtype=float)))
        inside = np.all(local <= self.half_extents + tol)
        return bool(inside and np.any(np.abs(local - self.half_extents) <= tol))


@dataclass
class ContactPoint:
    """Point contact; ``normal`` is fixed in b's frame and points from b into a."""

    a: str
    b: str
    local_a: np.ndarray
    local_b: np.ndarray
    normal_b: np.ndarray


@dataclass(frozen=True)
class ImpulseEvent:
    body: str
    application_point: tuple[float, float, float]
    impulse: tuple[float, float, float]
    time: int = 0


@dataclass
class World:
    bodies: dict[str, RigidBody]
    contacts: list[ContactPoint] = field(default_factory=list)
    gravity: np.ndarray = field(default_factory=lambda: GRAVITY.copy())
    bound: float = 1e6
    active_gap: float = 1e-7
    tolerance: float = 1e-13
    max_iterations: int = 5000
    time: int = 0
    explicit: bool = False
    _warm: np.ndarray | None = field(default=None, repr=False)

    def contact_world(self, c: ContactPoint) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        A, B = self.bodies[c.a], self.bodies[c.b]
        return A.to_world(c.local_a), B.to_world(c.local_b), B.orientation @ c.normal_b

    def momentum(self) -> np.ndarray:
        return sum((b.mass * b.velocity for b in self.bodies.values() if not b.is_static), np.zeros(3))


def _solve_contacts(world: World) -> np.ndarray:
    """Projected Gauss-Seidel for non-negative normal impulses; returns them."""
    rows = []
    for c in world.contacts:
        pa, pb, n = world.contact_world(c)
        if float(n @ (pa - pb)) > world.active_gap:
            rows.append(None)
            continue
        rows.append((c, pa, pb, n))
    live = [r for r in rows if r is not None]
    if not live:
        return np.zeros(len(rows))
    bodies = [b for b in world.bodies.values() if not b.is_static]
    index = {b.id: i for i, b in enumerate(bodies)}
    J = np.zeros((len(live), 6 * len(bodies)))
    for k, (c, pa, pb, n) in enumerate(live):
        for bid, p, sgn in ((c.a, pa, 1.0), (c.b, pb, -1.0)):
            if bid in index:
                body = world.bodies[bid]
                i = 6 * index[bid]
                J[k, i:i + 3] += sgn * n
                J[k, i + 3:i + 6] += sgn * np.cross(p - body.position, n)
    Minv = np.zeros((6 * len(bodies), 6 * len(bodies)))
    for b, i in index.items():
        body = world.bodies[b]
        Minv[6 * i:6 * i + 3, 6 * i:6 * i + 3] = np.eye(3) * body.inv_mass
        Minv[6 * i + 3:6 * i + 6, 6 * i + 3:6 * i + 6] = body.inv_inertia_world()
    W = J @ Minv @ J.T
    u = np.concatenate([np.concatenate([world.bodies[b.id].velocity, world.bodies[b.id].angular_velocity]) for b in bodies])
    rel = J @ u
    lam = np.zeros(len(live))
    diag = np.diag(W).copy()
    for _ in range(world.max_iterations):
        worst = 0.0
        for k in range(len(live)):
            if diag[k] <= 0:
                continue
            vk = rel[k] + W[k] @ lam
            new = max(0.0, lam[k] - vk / diag[k])
            d = new - lam[k]
            if d:
                lam[k] = new
                worst = max(worst, abs(d) * diag[k])
        if worst <= world.tolerance:
            break
    du = Minv @ J.T @ lam
    for b, i in index.items():
        body = world.bodies[b]
        body.velocity = body.velocity + du[6 * i:6 * i + 3]
        body.angular_velocity = body.angular_velocity + du[6 * i + 3:6 * i + 6]
    out = np.zeros(len(rows))
    it = iter(lam)
    for k, r in enumerate(rows):
        if r is not None:
            out[k] = next(it)
    return out


def _rotation(omega: np.ndarray, dt: float) -> np.ndarray:
    theta = float(np.linalg.norm(omega)) * dt
    if theta == 0.0:
        return np.eye(3)
    k = omega / np.linalg.norm(omega)
    K = np.array([[0, -k[2], k[1]], [k[2], 0, -k[0]], [-k[1], k[0], 0]])
    return np.eye(3) + np.sin(theta) * K + (1 - np.cos(theta)) * K @ K


def _project(world: World) -> None:
    for c in world.contacts:
        pa, pb, n = world.contact_world(c)
        gap = float(n @ (pa - pb))
        if gap >= 0:
            continue
        A, B = world.bodies[c.a], world.bodies[c.b]
        wa, wb = A.inv_mass, B.inv_mass
        if wa + wb == 0:
            continue
        A.position = A.position - gap * n * wa / (wa + wb)
        B.position = B.position + gap * n * wb / (wa + wb)


def step(world: World, dt: float, impulses: Sequence[ImpulseEvent] = ()) -> World:
    """Advance ``world`` in place by one step of length ``dt`` and return it."""
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    moving = [b for b in world.bodies.values() if not b.is_static]
    old_v = {b.id: b.velocity.copy() for b in moving}
    for b in moving:
        b.velocity = b.velocity + world.gravity * dt
    for ev in impulses:
        if ev.time == world.time:
            world.bodies[ev.body].apply_impulse(np.asarray(ev.impulse, dtype=float), np.asarray(ev.application_point, dtype=float))
    if world.contacts:
        _solve_contacts(world)
    for b in moving:
        v = old_v[b.id] if world.explicit else b.velocity
        b.position = b.position + v * dt
        b.orientation = _rotation(b.angular_velocity, dt) @ b.orientation
    _project(world)
    world.time += 1
    for b in moving:
        for arr in (b.velocity, b.angular_velocity, b.position):
            if not np.all(np.isfinite(arr)) or np.any(np.abs(arr) > world.bound):
                raise NumericBlowup(f"body {b.id} state left the bound {world.bound} at step {world.time}")
    return world


def box_contacts(a: RigidBody, b: RigidBody, tol: float = 1e-9) -> list[ContactPoint]:
    """Corner points of the touching face region of two unrotated boxes."""
    lo_a, hi_a = a.position - a.half_extents, a.position + a.half_extents
    lo_b, hi_b = b.position - b.half_extents, b.position + b.half_extents
    for axis in range(3):
        if abs(lo_a[axis] - hi_b[axis]) <= tol:
            sign, plane = 1.0, lo_a[axis]
        elif abs(hi_a[axis] - lo_b[axis]) <= tol:
            sign, plane = -1.0, hi_a[axis]
        else:
            continue
        others = [i for i in range(3) if i != axis]
        spans = []
        for i in others:
            lo, hi = max(lo_a[i], lo_b[i]), min(hi_a[i], hi_b[i])
            if hi - lo <= tol:
                return []
            spans.append((lo, hi))
        normal = np.zeros(3)
        normal[axis] = sign
        points = []
        for u in spans[0]:
            for v in spans[1]:
                p = np.zeros(3)
                p[axis] = plane
                p[others[0]], p[others[1]] = u, v
                points.append(p)
        return [ContactPoint(a.id, b.id, a.to_local(p), b.to_local(p), b.orientation.T @ normal) for p in points]
    return []


__all__ = [
    "ContactPoint",
    "GRAVITY",
    "ImpulseEvent",
    "NumericBlowup",
    "RigidBody",
    "World",
    "box_contacts",
    "step",
]
