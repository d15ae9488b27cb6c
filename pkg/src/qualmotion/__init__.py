"""Qualitative action inference for rigid-body scenes."""
from __future__ import annotations

from .signs import Sign, SignSet, SignVec, quantize
from .dynamics import (
    ContactGeometry,
    ObjectState,
    QualitativeAction,
    QualitativeForce,
    StateChange,
    change_entailed,
    delta_envelope,
)
from .scene import Contact, Scene, SceneObject

__version__ = "0.1.0"

__all__ = [
    "Contact",
    "ContactGeometry",
    "ObjectState",
    "QualitativeAction",
    "QualitativeForce",
    "Scene",
    "SceneObject",
    "Sign",
    "SignSet",
    "SignVec",
    "StateChange",
    "change_entailed",
    "delta_envelope",
    "quantize",
]
