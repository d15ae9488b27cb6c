"""Command-line front end: ``aip validate|infer|predict|generate|check``."""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Sequence

from .dynamics import CapExceeded, QualitativeAction, QualitativeForce, StateChange, delta_envelope
from .scene import GEOMETRY_EPSILON, Scene, SceneError, digest, dumps, load
from .signs import SignVec
from .solver import NoMovedObject, Solution, SolverConfig, solve

EXIT_OK, EXIT_INPUT, EXIT_NO_SOLUTION, EXIT_CHECK = 0, 2, 3, 4
FORCES_FORMAT = "aip-forces/1"


class InputError(ValueError):
    pass


def _action_dict(action: QualitativeAction) -> dict:
    return {"object": action.object, "qd": action.qd.encode(), "qr": action.qr.encode()}


def _change_dict(change: StateChange) -> dict:
    return {"dqv": change.dqv.encode(), "dqw": change.dqw.encode()}


def describe_action(a: dict) -> str:
    qd = "(" + ",".join(a["qd"]) + ")"
    qr = "(" + ",".join(a["qr"]) + ")"
    return f"push object {a['object']} in direction {qd} at locus {qr}"


def solution_dict(sol: Solution) -> dict:
    return {
        "action": _action_dict(sol.action),
        "trace": [
            {
                "object": t.object,
                "change": _change_dict(t.change),
                "forces": list(t.forces),
                "subset": list(t.subset),
                "net_linear": t.net_linear.encode(),
                "net_angular": t.net_angular.encode(),
            }
            for t in sol.trace
        ],
        "assignments": {
            a.var_id: {"qd": a.value.qd.encode(), "qr": a.value.qr.encode(), "object": a.value.object,
                       "kind": a.kind, "resistant": a.resistant}
            for a in sol.assignments
        },
    }


@dataclass
class RunReport:
    scene_digest: str
    config: dict
    solution_count: int
    solutions: list[dict] = field(default_factory=list)
    wall_time: float = 0.0
    message: str | None = None

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> RunReport:
        return cls(**json.loads(text))

    def actions(self) -> list[str]:
        return [describe_action(s["action"]) for s in self.solutions]

    def to_text(self) -> str:
        lines = [
            f"scene     {self.scene_digest}",
            "config    " + " ".join(f"{k}={v}" for k, v in sorted(self.config.items())),
            f"solutions {self.solution_count}",
            f"time      {self.wall_time:.3f}s",
        ]
        if self.message:
            lines.append(f"note      {self.message}")
        for i, s in enumerate(self.solutions, 1):
            lines.append("")
            lines.append(f"[{i}] {describe_action(s['action'])}")
            width = max((len(t["object"]) for t in s["trace"]), default=0)
            for t in s["trace"]:
                subset = ", ".join(t["subset"]) or "no forces"
                lin = "(" + ",".join(t["net_linear"]) + ")"
                ang = "(" + ",".join(t["net_angular"]) + ")"
                dv = "(" + ",".join(t["change"]["dqv"]) + ")"
                dw = "(" + ",".join(t["change"]["dqw"]) + ")"
                lines.append(f"    {t['object']:<{width}}  {{{subset}}} -> net {lin} {ang} -> change {dv} {dw}")
        return "\n".join(lines) + "\n"


# -- helpers --------------------------------------------------------------------------

def _threads() -> int:
    raw = os.environ.get("AIP_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise InputError(f"AIP_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise InputError(f"AIP_THREADS must be a positive integer, got {raw!r}")
    return n


def _load_scene(path: str, epsilon: float | None) -> Scene:
    try:
        return load(path, GEOMETRY_EPSILON if epsilon is None else epsilon)
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None
    except SceneError as exc:
        raise InputError(f"{path}: {exc}") from None


def _config(args: argparse.Namespace) -> SolverConfig:
    try:
        return SolverConfig.from_flag(args.heuristics, subset_cap=args.cap, max_solutions=args.max_solutions)
    except ValueError as exc:
        raise InputError(str(exc)) from None


def _emit(report: RunReport, fmt: str, out) -> None:
    out.write(report.to_json() if fmt == "json" else report.to_text())


def load_forces(path: str) -> list[QualitativeForce]:
    """Read an ``aip-forces/1`` file: ``{"format":..., "forces":[{"object","qd","qr"}]}``."""
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(data, dict) or set(data) - {"format", "forces"}:
        raise InputError(f"{path}: expected fields 'format' and 'forces' only")
    if data.get("format") != FORCES_FORMAT:
        raise InputError(f"{path}: format must be {FORCES_FORMAT!r}")
    if not isinstance(data.get("forces"), list):
        raise InputError(f"{path}: forces: expected a list")
    out = []
    for i, f in enumerate(data["forces"]):
        where = f"{path}: forces[{i}]"
        if not isinstance(f, dict) or set(f) != {"object", "qd", "qr"}:
            raise InputError(f"{where}: expected fields object, qd, qr")
        try:
            out.append(QualitativeForce(SignVec.parse(f["qd"]), SignVec.parse(f["qr"]), str(f["object"])))
        except ValueError as exc:
            raise InputError(f"{where}: {exc}") from None
    return out


# -- commands -------------------------------------------------------------------------

def cmd_validate(args: argparse.Namespace, out) -> int:
    scene = _load_scene(args.scene, args.epsilon)
    out.write(f"ok {digest(scene)} objects={len(scene.objects)} contacts={len(scene.contacts)}\n")
    return EXIT_OK


def run_infer(scene: Scene, cfg: SolverConfig) -> tuple[RunReport, list[Solution]]:
    start = time.perf_counter()
    message = None
    try:
        sols = solve(scene, cfg)
    except NoMovedObject as exc:
        sols, message = [], f"NoMovedObject: {exc}"
    report = RunReport(
        digest(scene), cfg.describe(), len(sols), [solution_dict(s) for s in sols],
        time.perf_counter() - start, message,
    )
    return report, sols


def cmd_infer(args: argparse.Namespace, out) -> int:
    _threads()
    scene = _load_scene(args.scene, args.epsilon)
    report, sols = run_infer(scene, _config(args))
    _emit(report, args.format, out)
    return EXIT_OK if sols else EXIT_NO_SOLUTION


def cmd_predict(args: argparse.Namespace, out) -> int:
    scene = _load_scene(args.scene, args.epsilon)
    forces = load_forces(args.forces)
    ids = {o.id for o in scene.objects}
    for f in forces:
        if f.object not in ids:
            raise InputError(f"{args.forces}: force on unknown object {f.object!r}")
    start = time.perf_counter()
    envelopes = {}
    for o in scene.movable:
        mine = [f for f in forces if f.object == o.id]
        env = delta_envelope(mine, args.cap)
        envelopes[o.id] = sorted(
            ({"dqv": c.dqv.encode(), "dqw": c.dqw.encode()} for c in env),
            key=lambda d: (d["dqv"], d["dqw"]),
        )
    elapsed = time.perf_counter() - start
    if args.format == "json":
        out.write(json.dumps({"scene_digest": digest(scene), "cap": args.cap, "envelopes": envelopes,
                              "wall_time": elapsed}, indent=2, sort_keys=True) + "\n")
    else:
        out.write(f"scene     {digest(scene)}\n")
        for oid, env in envelopes.items():
            out.write(f"{oid}: {len(env)} possible change(s)\n")
            for c in env:
                out.write(f"    ({','.join(c['dqv'])}) ({','.join(c['dqw'])})\n")
    return EXIT_OK


def parse_impulse(text: str, stack):
    """``jx,jy,jz@box[:px,py,pz]`` with the point in half-extent units, or ``zero``."""
    from .oracle.simulator import ImpulseEvent

    top = stack.boxes[-1]
    if text.strip() == "zero":
        point = tuple(c + (h if i == 2 else 0.0) for i, (c, h) in enumerate(zip(top.center, top.half_extents)))
        return ImpulseEvent(top.id, point, (0.0, 0.0, 0.0), 0)
    try:
        vec_part, _, where = text.partition("@")
        impulse = tuple(float(x) for x in vec_part.split(","))
        if len(impulse) != 3:
            raise ValueError
        box_part, _, local_part = (where or "top").partition(":")
        box = {"top": top, "bottom": stack.boxes[0]}.get(box_part) or stack.box(box_part)
        if local_part:
            local = tuple(float(x) for x in local_part.split(","))
            if len(local) != 3:
                raise ValueError
        else:
            peak = max(abs(j) for j in impulse) or 1.0
            local = tuple(-round(j / peak) for j in impulse)
    except (ValueError, KeyError):
        raise InputError(f"--impulse: cannot parse {text!r}; expected jx,jy,jz@box[:px,py,pz] or zero") from None
    point = tuple(c + l * h for c, l, h in zip(box.center, local, box.half_extents))
    return ImpulseEvent(box.id, point, impulse, 0)


def cmd_generate(args: argparse.Namespace, out) -> int:
    from .oracle.generate import UnstableInitialStack, generate_scene, random_scene, sidecar_dumps, tower

    try:
        if args.stack is not None:
            stack = tower(args.stack)
            impulse = parse_impulse(args.impulse or "1,0,0@top", stack)
            gen = generate_scene(stack, impulse, args.horizon, epsilon=args.epsilon)
        else:
            gen = random_scene(args.seed, args.boxes, args.horizon)
    except UnstableInitialStack as exc:
        out.write(f"UnstableInitialStack: {exc} (max speed {exc.max_speed:.3g}, max drift {exc.max_drift:.3g})\n")
        return EXIT_INPUT
    except ValueError as exc:
        raise InputError(str(exc)) from None
    scene_path = Path(args.out)
    truth_path = Path(args.sidecar) if args.sidecar else scene_path.with_suffix(".truth.json")
    scene_path.write_text(dumps(gen.scene), encoding="utf-8")
    truth_path.write_text(sidecar_dumps(gen.action), encoding="utf-8")
    out.write(f"wrote {scene_path} and {truth_path} (epsilon {gen.epsilon:.3g})\n")
    return EXIT_OK


def cmd_check(args: argparse.Namespace, out) -> int:
    from .oracle.enumerate import MAX_OBJECTS, enumerate_actions
    from .oracle.generate import load_sidecar

    scene = _load_scene(args.scene, args.epsilon)
    try:
        with open(args.sidecar, encoding="utf-8") as fh:
            truth = load_sidecar(json.load(fh))
    except OSError as exc:
        raise InputError(f"{args.sidecar}: {exc.strerror}") from None
    except (ValueError, json.JSONDecodeError) as exc:
        raise InputError(f"{args.sidecar}: {exc}") from None
    cfg = _config(args)
    _, sols = run_infer(scene, cfg)
    solved = {s.action for s in sols}
    problems: dict[str, Any] = {}
    if truth is not None and truth not in solved:
        problems["missing_ground_truth"] = _action_dict(truth)
    compared = len(scene.movable) <= MAX_OBJECTS and cfg.max_solutions is None
    if compared:
        try:
            oracle = enumerate_actions(scene, cfg)
        except CapExceeded:
            compared = False
        else:
            only_solver = sorted((_action_dict(a) for a in solved - oracle), key=json.dumps)
            only_oracle = sorted((_action_dict(a) for a in oracle - solved), key=json.dumps)
            if only_solver or only_oracle:
                problems["solver_only"] = only_solver
                problems["oracle_only"] = only_oracle
    result = {
        "scene_digest": digest(scene),
        "config": cfg.describe(),
        "ground_truth": _action_dict(truth) if truth else None,
        "solutions": len(solved),
        "oracle_compared": compared,
        "pass": not problems,
        "diff": problems,
    }
    out.write(json.dumps(result, indent=2, sort_keys=True) + "\n")
    return EXIT_OK if not problems else EXIT_CHECK


# -- entry point ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="aip", description="Infer qualitative actions from observed scene changes.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, solver: bool = True):
        sp.add_argument("--epsilon", type=float, default=None, help="quantization dead-band")
        sp.add_argument("--format", choices=("text", "json"), default="text")
        sp.add_argument("--cap", type=int, default=12, help="maximum forces per object")
        if solver:
            sp.add_argument("--heuristics", choices=("none", "h1", "h2", "h1h2"), default="h1h2")
            sp.add_argument("--max-solutions", type=int, default=None)

    sp = sub.add_parser("validate", help="parse and check a scene file")
    sp.add_argument("scene")
    common(sp, solver=False)
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("infer", help="list actions explaining a scene")
    sp.add_argument("scene")
    common(sp)
    sp.set_defaults(func=cmd_infer)

    sp = sub.add_parser("predict", help="possible state changes under given forces")
    sp.add_argument("scene")
    sp.add_argument("forces")
    common(sp, solver=False)
    sp.set_defaults(func=cmd_predict)

    sp = sub.add_parser("generate", help="simulate a box stack and write a scene with its ground truth")
    sp.add_argument("--out", required=True)
    sp.add_argument("--sidecar", default=None)
    group = sp.add_mutually_exclusive_group()
    group.add_argument("--stack", type=int, default=None, help="tower of N equal cubes")
    group.add_argument("--boxes", type=int, default=None, help="random layout with N boxes")
    sp.add_argument("--impulse", default=None, help="jx,jy,jz@box[:px,py,pz] or zero (with --stack)")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--horizon", type=int, default=1)
    sp.add_argument("--epsilon", type=float, default=None)
    sp.set_defaults(func=cmd_generate)

    sp = sub.add_parser("check", help="check a scene against its ground truth and the brute-force oracle")
    sp.add_argument("scene")
    sp.add_argument("sidecar")
    common(sp)
    sp.set_defaults(func=cmd_check)
    return p


def main(argv: Sequence[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "cap", 1) < 1:
        parser.error("--cap must be at least 1")
    try:
        return args.func(args, out)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except CapExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except BrokenPipeError:
        # reader went away (e.g. piped into head); silence the interpreter's flush at exit
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
