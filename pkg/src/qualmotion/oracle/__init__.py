"""Ground-truth machinery: a small impulse simulator and a brute-force enumerator."""
from __future__ import annotations

from .enumerate import enumerate_actions
from .generate import (
    GeneratedScene,
    StackSpec,
    UnstableInitialStack,
    generate_scene,
    random_scene,
    random_stack,
    sidecar,
    tower,
)
from .simulator import ImpulseEvent, NumericBlowup, RigidBody, World, step

__all__ = [
    "GeneratedScene",
    "ImpulseEvent",
    "NumericBlowup",
    "RigidBody",
    "StackSpec",
    "UnstableInitialStack",
    "World",
    "enumerate_actions",
    "generate_scene",
    "random_scene",
    "random_stack",
    "sidecar",
    "step",
    "tower",
]
