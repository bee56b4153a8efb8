"""Command line entry point.

Exit status: 0 on success, 1 when a verification or class check fails, 2 on
usage errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Dict, List, Optional, Sequence

from .closure import dim, flatness_defect, g_value, ss_closure
from .extensions import ClassCheckConfig, in_class
from .gadgets import build_D, build_D_hat, build_path, omega_gadget
from .mu import MuSnapshot, seeded
from .oracle import BOUND_ENV, verify_lemma
from .structures import FinStructure, StructureError


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _emit(obj) -> None:
    sys.stdout.write(json.dumps(obj, sort_keys=True) + "\n")


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path) as fh:
        return fh.read()


def _structure(path: str) -> FinStructure:
    return FinStructure.from_json(_read_text(path))


def _int_list(text: str) -> List[int]:
    text = text.strip()
    return [int(x) for x in text.split(",") if x.strip()] if text else []


def _params(items: Sequence[str]) -> Dict[str, object]:
    out: Dict[str, object] = {}
    for item in items:
        for part in item.split(";"):
            if not part:
                continue
            if "=" not in part:
                raise UsageError(f"parameter {part!r} is not key=value")
            k, v = part.split("=", 1)
            if "," in v:
                out[k] = tuple(int(x) for x in v.split(",") if x)
            else:
                try:
                    out[k] = int(v)
                except ValueError:
                    out[k] = v
    return out


# -- structure reports ------------------------------------------------------------


def _cmd_closure(a) -> int:
    S = _structure(a.structure)
    rep = ss_closure(S, _int_list(a.set))
    _emit({"set": _int_list(a.set), "closure": sorted(rep.closure), "delta": rep.delta_value,
           "chain": [sorted(X) for X in rep.witness_chain]})
    return 0


def _cmd_gvalue(a) -> int:
    S = _structure(a.structure)
    _emit(dict(set=_int_list(a.set), **g_value(S, _int_list(a.set)).to_dict()))
    return 0


def _cmd_dim(a) -> int:
    S = _structure(a.structure)
    _emit({"set": _int_list(a.set), "dim": dim(S, _int_list(a.set))})
    return 0


def _cmd_flat(a) -> int:
    S = _structure(a.structure)
    fam = [_int_list(x) for x in a.sets.split(";")]
    d = flatness_defect(S, fam, convention=a.convention)
    _emit({"sets": fam, "convention": a.convention, "defect": d, "flat": d <= 0})
    return 0 if d <= 0 else 1


def _snapshot(a, n: int) -> MuSnapshot:
    if a.snapshot:
        return MuSnapshot.from_json(_read_text(a.snapshot))
    return seeded(n, _int_list(a.columns))


def _cmd_check_class(a) -> int:
    S = _structure(a.structure)
    v = in_class(S, _snapshot(a, S.n), ClassCheckConfig(connected_budget=a.budget))
    _emit(v.to_dict())
    return 0 if v.accept else 1


# -- gadgets ----------------------------------------------------------------------


def _cmd_gadget(a) -> int:
    p = dict(_params(a.params))
    for key in ("k", "t", "i"):
        if getattr(a, key) is not None:
            p[key] = getattr(a, key)
    n = a.n
    kind = a.kind
    try:
        if kind == "D":
            G = build_D(int(p["k"]), int(p["t"]), n)
        elif kind == "Dhat":
            G = build_D_hat(int(p["k"]), int(p["t"]), n)
        elif kind in ("P", "H", "L"):
            G = build_path(kind, int(p["k"]), n)
        else:
            G = omega_gadget(int(p["i"]), n)
    except KeyError as e:
        raise UsageError(f"gadget {kind} needs parameter {e.args[0]}")
    if a.format == "dot":
        sys.stdout.write(G.structure.to_dot(kind) + "\n")
    else:
        _emit(G.to_dict())
    return 0


# -- construction -----------------------------------------------------------------


def _load_script(path: str, base: dict) -> dict:
    """A script is either a JSON build config or one column per line ('-' for none)."""
    text = _read_text(path)
    try:
        d = json.loads(text)
    except json.JSONDecodeError:
        cols = []
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if line:
                cols.append(None if line == "-" else int(line))
        d = {"enumerate": cols}
    if not isinstance(d, dict):
        raise UsageError("script JSON must be an object")
    out = dict(base)
    out.update(d)
    return out


def _adversary_script(n: int, stages: int, bound: Optional[int]) -> List[Optional[int]]:
    """Columns enumerated stage by stage by a strategy facing a reactive candidate."""
    from .adversary import ReactiveCandidate, run_duel

    tr = run_duel([ReactiveCandidate(n, 0)], stages, n=n, bound=bound)
    return [rec["enum"]["column"] if "enum" in rec else None for rec in tr.stages]


def _cmd_build(a) -> int:
    from .builder import BuildConfig, BuilderInvariantError, run

    base = {"n": a.n, "seed": a.seed}
    if a.script:
        d = _load_script(a.script, {"seed": a.seed})
        if a.n_given or "n" not in d:
            d["n"] = a.n
    elif a.adversary:
        d = dict(base, enumerate=_adversary_script(a.n, a.stages, a.bound), default_column=None)
    else:
        d = base
    cfg = BuildConfig.from_dict(d)
    if cfg.n < 1 or a.stages < 1:
        raise UsageError("n and --stages must be positive")

    def progress(st):
        if a.verbose:
            sys.stderr.write(st.log[-1] + "\n")

    try:
        st = run(cfg, a.stages, out=a.out, on_stage=progress)
    except BuilderInvariantError as e:
        _emit({"ok": False, "error": str(e), "certificate": e.certificate})
        return 1
    done = {}
    for r in st.queue:
        done.setdefault(r.kind, {}).setdefault(r.status, 0)
        done[r.kind][r.status] += 1
    _emit({"ok": True, "stages": st.stage, "vertices": len(st.N.vertices), "edges": len(st.N.edges),
           "removals": len(st.tombstones), "requirements": done, "out": a.out})
    return 0


def _cmd_duel(a) -> int:
    from .adversary import CandidateStream, ReactiveCandidate, classify, run_duel

    cands = []
    for j, path in enumerate(a.candidate):
        if path == "reactive":
            cands.append(ReactiveCandidate(a.n, j, index=j))
        else:
            cands.append(CandidateStream.from_file(path))
    tr = run_duel(cands, a.stages, n=a.n, bound=a.bound, stop_after_passes=a.passes)
    if a.out:
        with open(a.out, "w") as fh:
            fh.write(tr.to_json() + "\n")
    _emit({"stages": len(tr.stages), "passes": tr.passes, "classification": classify(tr),
           "snapshot": tr.final["snapshot"], "transcript": a.out})
    return 0


def _cmd_verify(a) -> int:
    try:
        res = verify_lemma(a.lemma, _params(a.params))
    except KeyError as e:
        raise UsageError(str(e.args[0]))
    _emit(res.to_dict())
    return 0 if res.passed else 1


def _cmd_export(a) -> int:
    files = sorted(f for f in os.listdir(a.run) if f.startswith("stage_") and f.endswith(".json"))
    if not files:
        raise UsageError(f"{a.run} holds no stage files")
    name = files[-1] if a.stage is None else f"stage_{a.stage:04d}.json"
    path = os.path.join(a.run, name)
    if a.format == "facts":
        from .adversary import CandidateStream

        sys.stdout.write(CandidateStream.from_run_dir(a.run, _int_list(a.tuple)).to_text())
        return 0
    if not os.path.exists(path):
        raise UsageError(f"no stage file {name}")
    S = FinStructure.from_json(_read_text(path))
    if a.format == "dot":
        sys.stdout.write(S.to_dot(name[:-5]) + "\n")
    else:
        _emit(S.to_dict())
    return 0


# -- parser -----------------------------------------------------------------------


def _parser() -> argparse.ArgumentParser:
    p = _Parser(prog="amalgam", description="Hrushovski amalgamation toolkit")
    p.add_argument("--bound", type=int, default=None, help=f"exhaustive bound (overrides {BOUND_ENV})")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def struct_cmd(name, fn, help_):
        q = sub.add_parser(name, help=help_)
        q.add_argument("structure", help="structure JSON file, '-' for stdin")
        q.set_defaults(fn=fn)
        return q

    for name, fn, help_ in (("closure", _cmd_closure, "self-sufficient closure of a set"),
                            ("gvalue", _cmd_gvalue, "g-value of a set"),
                            ("dim", _cmd_dim, "dimension of a set")):
        struct_cmd(name, fn, help_).add_argument("--set", default="", help="comma separated vertices")
    q = struct_cmd("flat", _cmd_flat, "flatness defect of closed sets")
    q.add_argument("--sets", required=True, help="closed sets, ';' between sets, ',' inside")
    q.add_argument("--convention", choices=("closure", "ambient"), default="closure")
    q = struct_cmd("check-class", _cmd_check_class, "membership in the amalgamation class")
    q.add_argument("--snapshot", help="mu snapshot JSON (default: seeded columns)")
    q.add_argument("--columns", default="0,1", help="columns seeded when no snapshot is given")
    q.add_argument("--budget", type=int, default=ClassCheckConfig.connected_budget)

    q = sub.add_parser("gadget", help="emit a gadget structure")
    q.add_argument("kind", choices=("D", "Dhat", "P", "H", "L", "omega"))
    q.add_argument("--k", type=int)
    q.add_argument("--t", type=int)
    q.add_argument("--i", type=int)
    q.add_argument("--n", type=int, default=1)
    q.add_argument("--params", nargs="*", default=[], help="key=value pairs")
    q.add_argument("--format", choices=("json", "dot"), default="json")
    q.set_defaults(fn=_cmd_gadget)

    q = sub.add_parser("build", help="staged construction into a run directory")
    q.add_argument("--stages", type=int, required=True)
    mode = q.add_mutually_exclusive_group()
    mode.add_argument("--script", help="JSON build config or column-per-line script")
    mode.add_argument("--adversary", action="store_true", help="enumeration driven by a live strategy")
    q.add_argument("--n", type=int, default=None)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--out", help="run directory")
    q.add_argument("--verbose", action="store_true", help="stage lines on stderr")
    q.set_defaults(fn=_cmd_build)

    q = sub.add_parser("duel", help="enumeration strategies against candidate presentations")
    q.add_argument("--candidate", action="append", required=True,
                   help="fact file, or 'reactive' for the built-in reactive candidate (repeatable)")
    q.add_argument("--stages", type=int, required=True)
    q.add_argument("--n", type=int, default=1)
    q.add_argument("--passes", type=int, default=None, help="stop after this many Step-2 passes")
    q.add_argument("--out", help="write the full transcript JSON here")
    q.set_defaults(fn=_cmd_duel)

    q = sub.add_parser("verify", help="check a lemma by exhaustion")
    q.add_argument("--lemma", required=True)
    q.add_argument("--params", nargs="*", default=[], help="key=value pairs, lists as a,b,c")
    q.set_defaults(fn=_cmd_verify)

    q = sub.add_parser("export", help="convert a run directory stage")
    q.add_argument("run")
    q.add_argument("--stage", type=int, default=None, help="default: last stage")
    q.add_argument("--format", choices=("json", "dot", "facts"), default="json")
    q.add_argument("--tuple", default="", help="candidate tuple for the facts format")
    q.set_defaults(fn=_cmd_export)
    return p


def dispatch(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        a = _parser().parse_args(argv)
        if getattr(a, "fn", None) is None:
            raise UsageError("no command given")
        if a.bound is not None:
            os.environ[BOUND_ENV] = str(a.bound)
        if a.command == "build":
            a.n_given = a.n is not None
            a.n = 1 if a.n is None else a.n
        return a.fn(a)
    except UsageError as e:
        sys.stderr.write(f"amalgam: {e}\n")
        return 2
    except (StructureError, ValueError, OSError) as e:
        sys.stderr.write(f"amalgam: {e}\n")
        return 2


def main() -> None:
    sys.exit(dispatch())
