"""Line-oriented text format for instances and solutions.

Instance records (one per line, ``#`` starts a comment)::

    kind spider|line|tree
    problem clustering|gathering
    r <int>
    legs <int>                      (spider)
    user <leg> <rat> / user <rat>   (spider / line)
    facility <leg> <rat> / facility <rat>
    vertex <id> <parent-id|-> <rat> (tree)
    root <id>
    user-at <id>
    facility-at <id>

Solution records use 1-based indices in canonical order::

    cluster <idx> <idx> ...
    assign <user-idx> <facility-idx>
"""

from __future__ import annotations

import re
from fractions import Fraction

from .core import (
    CLUSTERING,
    GATHERING,
    PROBLEMS,
    Assignment,
    Clustering,
    LineInstance,
    SpiderInstance,
    TreeInstance,
    ValidationError,
    format_coord,
)

_RAT = re.compile(r"^(\d+)(?:/(\d+))?$")
_INT = re.compile(r"^\d+$")


class ParseError(ValidationError):
    def __init__(self, lineno, message, expected=None):
        text = f"line {lineno}: {message}"
        if expected:
            text += f" (expected: {expected})"
        super().__init__(text)
        self.lineno = lineno
        self.expected = expected


def parse_rational(token: str, lineno: int = 0) -> Fraction:
    m = _RAT.match(token)
    if not m or (m.group(2) is not None and int(m.group(2)) == 0):
        raise ParseError(lineno, f"bad rational {token!r}", "<int> or <int>/<int>")
    return Fraction(token)


def _int(token, lineno, production):
    if not _INT.match(token):
        raise ParseError(lineno, f"bad integer {token!r}", production)
    return int(token)


def _records(text):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line.split()


_GRAMMAR = {
    "kind": "kind spider|line|tree",
    "problem": "problem clustering|gathering",
    "r": "r <int>",
    "legs": "legs <int>",
    "vertex": "vertex <id> <parent-id|-> <rat>",
    "root": "root <id>",
    "user-at": "user-at <id>",
    "facility-at": "facility-at <id>",
}


def parse_instance(text: str):
    """Parse an instance file into a Spider-, Line- or TreeInstance (canonical order)."""
    header = {}
    users, facilities = [], []
    vertices, tree_users, tree_facilities = {}, [], []
    root = None
    kind = None
    for lineno, tok in _records(text):
        key, args = tok[0], tok[1:]
        if key in ("kind", "problem", "r", "legs", "root", "user-at", "facility-at"):
            if len(args) != 1:
                raise ParseError(lineno, f"{key} takes one argument", _GRAMMAR[key])
        if key == "kind":
            if args[0] not in ("spider", "line", "tree"):
                raise ParseError(lineno, f"unknown kind {args[0]!r}", _GRAMMAR["kind"])
            kind = args[0]
        elif key == "problem":
            if args[0] not in PROBLEMS:
                raise ParseError(lineno, f"unknown problem {args[0]!r}", _GRAMMAR["problem"])
            header["problem"] = args[0]
        elif key == "r":
            header["r"] = _int(args[0], lineno, _GRAMMAR["r"])
        elif key == "legs":
            header["legs"] = _int(args[0], lineno, _GRAMMAR["legs"])
        elif key in ("user", "facility"):
            if kind is None:
                raise ParseError(lineno, "point record before 'kind'", "kind spider|line|tree")
            target = users if key == "user" else facilities
            if kind == "spider":
                if len(args) != 2:
                    raise ParseError(lineno, f"malformed {key} record", f"{key} <leg> <rat>")
                leg = _int(args[0], lineno, f"{key} <leg> <rat>")
                target.append((leg, parse_rational(args[1], lineno)))
            elif kind == "line":
                if len(args) != 1:
                    raise ParseError(lineno, f"malformed {key} record", f"{key} <rat>")
                target.append(parse_rational(args[0], lineno))
            else:
                raise ParseError(lineno, f"{key} records are not valid for trees", f"{key}-at <id>")
        elif key == "vertex":
            if len(args) != 3:
                raise ParseError(lineno, "malformed vertex record", _GRAMMAR["vertex"])
            vid, parent, length = args
            if vid in vertices:
                raise ParseError(lineno, f"duplicate vertex {vid!r}", _GRAMMAR["vertex"])
            vertices[vid] = (None if parent == "-" else parent, parse_rational(length, lineno))
        elif key == "root":
            root = args[0]
        elif key == "user-at":
            tree_users.append(args[0])
        elif key == "facility-at":
            tree_facilities.append(args[0])
        else:
            raise ParseError(lineno, f"unknown record {key!r}", " | ".join(sorted(_GRAMMAR)) + " | user | facility")

    if kind is None:
        raise ParseError(0, "missing 'kind' record", _GRAMMAR["kind"])
    if "r" not in header:
        raise ParseError(0, "missing 'r' record", _GRAMMAR["r"])
    r = header["r"]
    if kind == "spider":
        if "legs" not in header:
            raise ParseError(0, "missing 'legs' record", _GRAMMAR["legs"])
        problem = header.get("problem", GATHERING if facilities else CLUSTERING)
        return SpiderInstance.build(header["legs"], users, facilities, r, problem)
    if kind == "line":
        problem = header.get("problem", GATHERING if facilities else CLUSTERING)
        return LineInstance.build(users, facilities, r, problem)
    if root is None:
        raise ParseError(0, "missing 'root' record", _GRAMMAR["root"])
    problem = header.get("problem", GATHERING if tree_facilities else CLUSTERING)
    return TreeInstance(dict(vertices), root, tuple(tree_users), tuple(tree_facilities), r, problem)


def emit_instance(inst) -> str:
    out = [f"kind {inst.kind}", f"problem {inst.problem}", f"r {inst.r}"]
    if inst.kind == "spider":
        out.append(f"legs {inst.d}")
        out += [f"user {p.leg} {format_coord(p.x)}" for p in inst.users]
        out += [f"facility {p.leg} {format_coord(p.x)}" for p in inst.facilities]
    elif inst.kind == "line":
        out += [f"user {format_coord(u)}" for u in inst.users]
        out += [f"facility {format_coord(f)}" for f in inst.facilities]
    else:
        for v, (p, length) in inst.vertices.items():
            out.append(f"vertex {v} {'-' if p is None else p} {format_coord(length)}")
        out.append(f"root {inst.root}")
        out += [f"user-at {v}" for v in inst.users]
        out += [f"facility-at {v}" for v in inst.facilities]
    return "\n".join(out) + "\n"


def parse_solution(text: str):
    clusters, assigned = [], {}
    for lineno, tok in _records(text):
        key, args = tok[0], tok[1:]
        if key == "cluster":
            if not args:
                raise ParseError(lineno, "empty cluster", "cluster <idx> <idx> ...")
            idx = [_int(a, lineno, "cluster <idx> <idx> ...") for a in args]
            if min(idx) < 1:
                raise ParseError(lineno, "indices are 1-based", "cluster <idx> <idx> ...")
            clusters.append([i - 1 for i in idx])
        elif key == "assign":
            if len(args) != 2:
                raise ParseError(lineno, "malformed assign record", "assign <user-idx> <facility-idx>")
            u, f = (_int(a, lineno, "assign <user-idx> <facility-idx>") for a in args)
            if u < 1 or f < 1:
                raise ParseError(lineno, "indices are 1-based", "assign <user-idx> <facility-idx>")
            if u - 1 in assigned:
                raise ParseError(lineno, f"user {u} assigned twice", "assign <user-idx> <facility-idx>")
            assigned[u - 1] = f - 1
        else:
            raise ParseError(lineno, f"unknown record {key!r}", "cluster ... | assign <u> <f>")
    if clusters and assigned:
        raise ParseError(0, "solution mixes cluster and assign records")
    if assigned:
        n = max(assigned) + 1
        if sorted(assigned) != list(range(n)):
            missing = sorted(set(range(n)) - set(assigned))
            raise ValidationError(f"assignment is not total: users {[u + 1 for u in missing]} unassigned")
        return Assignment(tuple(assigned[u] for u in range(n)))
    return Clustering(tuple(tuple(c) for c in clusters))


def emit_solution(sol) -> str:
    if isinstance(sol, Clustering):
        lines = ["cluster " + " ".join(str(u + 1) for u in c) for c in sol.clusters]
    else:
        lines = [f"assign {u + 1} {f + 1}" for u, f in enumerate(sol.assigned)]
    return "\n".join(lines) + "\n"
