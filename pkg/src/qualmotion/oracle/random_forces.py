"""Random numeric force sets and rule configurations for the property suites."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..dynamics import ContactGeometry, ObjectState, QualitativeForce, StateChange
from ..signs import quantize


def _sparse_vector(rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    """Random vector whose components are exactly zero a third of the time."""
    v = rng.normal(0.0, scale, 3)
    v[rng.random(3) < 1 / 3] = 0.0
    return v


@dataclass(frozen=True)
class NumericForceSet:
    forces: tuple[np.ndarray, ...]
    levers: tuple[np.ndarray, ...]
    mass: float
    inertia: np.ndarray
    dt: float

    def qualitative(self, obj: str = "o") -> list[QualitativeForce]:
        return [QualitativeForce(quantize(f, 0.0), quantize(r, 0.0), obj) for f, r in zip(self.forces, self.levers)]

    def change(self) -> StateChange:
        """Quantized change of velocity and angular velocity under all forces."""
        dv = sum(self.forces) * self.dt / self.mass
        dw = sum(np.cross(r, f) for r, f in zip(self.levers, self.forces)) * self.dt / self.inertia
        return StateChange(quantize(dv, 0.0), quantize(dw, 0.0))


def random_force_set(rng: np.random.Generator, min_forces: int = 1, max_forces: int = 6) -> NumericForceSet:
    n = int(rng.integers(min_forces, max_forces + 1))
    forces = tuple(_sparse_vector(rng) for _ in range(n))
    levers = tuple(_sparse_vector(rng) for _ in range(n))
    inertia = rng.uniform(0.1, 2.0, 3)
    return NumericForceSet(forces, levers, float(rng.uniform(0.1, 10.0)), inertia, float(rng.uniform(1e-3, 0.1)))


@dataclass(frozen=True)
class VanishingConfig:
    """Two bodies at a contact, with numeric velocities and levers."""

    v_a: np.ndarray
    w_a: np.ndarray
    r_a: np.ndarray
    v_b: np.ndarray
    w_b: np.ndarray
    r_b: np.ndarray
    normal: np.ndarray

    def point_velocities(self) -> tuple[np.ndarray, np.ndarray]:
        return self.v_a + np.cross(self.w_a, self.r_a), self.v_b + np.cross(self.w_b, self.r_b)

    def numeric_vanishing(self) -> bool:
        xa, xb = self.point_velocities()
        return float(self.normal @ (xa - xb)) > 0

    def qualitative(self) -> tuple[ObjectState, ObjectState, ContactGeometry]:
        geom = ContactGeometry(quantize(self.normal, 0.0), quantize(self.r_a, 0.0), quantize(self.r_b, 0.0))
        return (
            ObjectState(quantize(self.v_a, 0.0), quantize(self.w_a, 0.0)),
            ObjectState(quantize(self.v_b, 0.0), quantize(self.w_b, 0.0)),
            geom,
        )


def random_vanishing_config(rng: np.random.Generator) -> VanishingConfig:
    return VanishingConfig(*(_sparse_vector(rng) for _ in range(7)))


def random_attraction_config(rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """A (force, normal) pair; the caller filters by the numeric rule."""
    return _sparse_vector(rng), _sparse_vector(rng)


def random_qualitative_scene(rng, n_objects: int, n_contacts: int, with_ground: bool = True):
    """Random sign-level scene: states, contacts and levers drawn independently.

    The scene need not be physically realizable; it exercises the search
    on constrained cases (vanishing points, unsupported objects) that
    simulated stacks rarely produce.
    """
    from ..scene import Contact, Scene, SceneObject
    from ..signs import ALL_DEFINITE, SignVec

    def state():
        if rng.random() < 0.5:
            return ObjectState()
        return ObjectState(ALL_DEFINITE[int(rng.integers(27))], ALL_DEFINITE[int(rng.integers(27))])

    objects = [SceneObject(f"o{i}", state(), state()) for i in range(n_objects)]
    ids = [o.id for o in objects]
    if with_ground:
        objects.append(SceneObject("ground", is_static=True))
        ids.append("ground")
    axes = [SignVec.of(s) for s in ("00+", "00-", "+00", "-00", "0+0", "0-0")]
    contacts = []
    for i in range(n_contacts):
        a = ids[int(rng.integers(n_objects))]
        b = a
        while b == a:
            b = ids[int(rng.integers(len(ids)))]
        geom = ContactGeometry(
            axes[int(rng.integers(len(axes)))],
            ALL_DEFINITE[int(rng.integers(27))],
            ALL_DEFINITE[int(rng.integers(27))],
        )
        contacts.append(Contact(a, b, geom, f"k{i}"))
    return Scene(tuple(objects), tuple(contacts), bool(rng.random() < 0.8))


__all__ = [
    "NumericForceSet",
    "VanishingConfig",
    "random_attraction_config",
    "random_force_set",
    "random_qualitative_scene",
    "random_vanishing_config",
]
