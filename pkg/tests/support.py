"""Small scene builders shared by the test modules."""
from __future__ import annotations

from qualmotion.dynamics import ContactGeometry, ObjectState
from qualmotion.scene import Contact, Scene, SceneObject
from qualmotion.signs import SignVec

UP = SignVec.of("00+")
REST = ObjectState()


def V(text: str) -> SignVec:
    return SignVec.of(text)


def state(qv: str = "000", qw: str = "000") -> ObjectState:
    return ObjectState(V(qv), V(qw))


def ground_contacts(obj: str, below: str = "ground", prefix: str = "g") -> list[Contact]:
    """Four bottom-corner contacts of ``obj`` resting on ``below``."""
    out = []
    for i, (x, y) in enumerate(("++", "+-", "-+", "--")):
        geom = ContactGeometry(UP, V(x + y + "-"), V(x + y + "+") if below != "ground" else V(x + y + "0"))
        out.append(Contact(obj, below, geom, f"{prefix}{i}"))
    return out


def block_on_ground(after: ObjectState = REST, before: ObjectState = REST) -> Scene:
    objects = (SceneObject("ground", is_static=True), SceneObject("box", before, after))
    return Scene(objects, tuple(ground_contacts("box")))


def two_stack(after_top: ObjectState = REST, after_bottom: ObjectState = REST) -> Scene:
    objects = (
        SceneObject("ground", is_static=True),
        SceneObject("a", REST, after_bottom),
        SceneObject("b", REST, after_top),
    )
    return Scene(objects, tuple(ground_contacts("a") + ground_contacts("b", below="a", prefix="s")))


#: criterion number -> one-line verdict, printed at the end of the run
ACCEPTANCE_LINES: dict[int, str] = {}


def record(number: int, ok: bool, detail: str) -> None:
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'} | {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)
