"""PTAS for r-gathering and r-gather clustering on trees.

The tree is first made full binary, with every user and facility on its own
leaf (zero-length edges keep all distances).  For a threshold ``b`` the depth
of each vertex is rounded down to a multiple of ``t = b * delta / 4``, and
``DP[v]`` collects the profiles ``(P, Q)`` reachable in the subtree of ``v``:
``P[j]`` unassigned users at rounded distance ``j`` below ``v`` and ``Q[j]``
promises of opened facilities below ``v`` to serve a user outside the subtree
at distance ``j`` from ``v``.  Children are merged by matching pending users
of one side with promises of the other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .core import (
    CLUSTERING,
    GATHERING,
    Assignment,
    Clustering,
    InfeasibleError,
    SpiderInstance,
    TreeInstance,
    as_coord,
    solution_cost,
    validate_solution,
)
from .ptas import OracleResult, PtasParams, PtasStats, _shift_in, _shift_out, candidate_search

# ---------------------------------------------------------------------------
# normalisation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BinaryTree:
    """Full binary tree; ``host[v]`` is ``("user", i)``, ``("facility", f)`` or absent."""

    vertices: dict  # id -> (parent | None, length)
    children: dict  # id -> () or (x, y)
    root: object
    host: dict
    user_vertex: tuple
    facility_vertex: tuple
    source: TreeInstance

    def as_instance(self) -> TreeInstance:
        return TreeInstance(
            dict(self.vertices),
            self.root,
            self.user_vertex,
            self.facility_vertex,
            self.source.r,
            self.source.problem,
        )


def normalize_tree(t: TreeInstance) -> BinaryTree:
    """Binarise ``t`` and move every hosted user/facility onto its own leaf."""
    children = t.children()
    hosted = {v: [] for v in t.vertices}
    for i, v in enumerate(t.users):
        hosted[v].append(("user", i))
    for f, v in enumerate(t.facilities):
        hosted[v].append(("facility", f))

    vertices = {t.root: (None, Fraction(0))}
    kids, host = {}, {}
    counter = 0

    def fresh(parent):
        nonlocal counter
        counter += 1
        vid = ("aux", counter)
        vertices[vid] = (parent, Fraction(0))
        kids[vid] = ()
        return vid

    for v in t._index.order:
        items = hosted[v]
        if not children[v] and len(items) == 1:
            host[v] = items[0]
            kids[v] = ()
            continue
        attach = [(c, Fraction(t.vertices[c][1])) for c in children[v]]
        for item in items:
            leaf = fresh(v)
            host[leaf] = item
            attach.append((leaf, Fraction(0)))
        node = v
        while len(attach) > 2:
            (first, length), attach = attach[0], attach[1:]
            vertices[first] = (node, length)
            z = fresh(node)
            kids[node] = (first, z)
            node = z
        if len(attach) == 1:
            attach.append((fresh(node), Fraction(0)))
        for c, length in attach:
            vertices[c] = (node, length)
        kids[node] = tuple(c for c, _ in attach)
    user_vertex = [None] * t.n
    facility_vertex = [None] * t.m
    for v, (kind, idx) in host.items():
        if kind == "user":
            user_vertex[idx] = v
        else:
            facility_vertex[idx] = v
    return BinaryTree(vertices, kids, t.root, host, tuple(user_vertex), tuple(facility_vertex), t)


# ---------------------------------------------------------------------------
# rounding
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RoundedTree:
    tree: BinaryTree
    t: Fraction
    depth: dict  # vertex -> floor(D(v) / t)
    length: dict  # vertex -> rounded length of the edge into it

    def distance(self, v, w, lca) -> int:
        return self.depth[v] + self.depth[w] - 2 * self.depth[lca]


def round_tree(bt: BinaryTree, t) -> RoundedTree:
    t = as_coord(t)
    if t <= 0:
        raise ValueError("rounding step must be positive")
    inst = bt.as_instance()
    depth = {v: math.floor(inst.depth(v) / t) for v in bt.vertices}
    length = {}
    for v, (p, _) in bt.vertices.items():
        length[v] = 0 if p is None else depth[v] - depth[p]
    return RoundedTree(bt, t, depth, length)


# ---------------------------------------------------------------------------
# DP
# ---------------------------------------------------------------------------


def _post_order(bt: BinaryTree) -> list:
    out, stack = [], [bt.root]
    while stack:
        v = stack.pop()
        out.append(v)
        stack.extend(bt.children[v])
    out.reverse()
    return out


def _matches(Px, Qx, Py, Qy):
    """All ``(P, Q, Rx, Ry)`` with ``Rx <= Px, Qy`` and ``Ry <= Py, Qx`` elementwise."""
    partial = [((), (), (), ())]
    for j in range(len(Px)):
        nxt = []
        for rx in range(min(Px[j], Qy[j]) + 1):
            for ry in range(min(Py[j], Qx[j]) + 1):
                p = Px[j] + Py[j] - rx - ry
                q = Qx[j] + Qy[j] - rx - ry
                for a, b, c, d in partial:
                    nxt.append((a + (p,), b + (q,), c + (rx,), d + (ry,)))
        partial = nxt
    return partial


def _promise_sets(caps, r, K):
    """Profiles ``Q'`` with ``Q'[j] <= caps[j]`` and total at least ``r``."""
    out = [((), 0)]
    for j in range(K + 1):
        out = [(q + (c,), s + c) for q, s in out for c in range(caps[j] + 1)]
    return [q for q, s in out if s >= r]


def tree_dp(rt: RoundedTree, K: int, r: int):
    """Bottom-up tables ``DP[v]``: ``state -> back-pointer``."""
    bt = rt.tree
    inst = bt.as_instance()
    zero = (0,) * (K + 1)
    users = [v for v in bt.user_vertex]
    facs = [v for v in bt.facility_vertex]
    order = _post_order(bt)
    below_users, below_facs = {}, {}
    for v in order:
        ks = bt.children[v]
        h = bt.host.get(v)
        bu = {h[1]} if h and h[0] == "user" else set()
        bf = {h[1]} if h and h[0] == "facility" else set()
        for c in ks:
            bu |= below_users[c]
            bf |= below_facs[c]
        below_users[v], below_facs[v] = bu, bf

    def rdist(a, b):
        return rt.distance(a, b, inst.lca(a, b))

    DP = {}
    for v in order:
        caps = [0] * (K + 1)
        for i, uv in enumerate(users):
            if i not in below_users[v]:
                d = rdist(v, uv)
                if d <= K:
                    caps[d] += 1
        reach = min((rdist(v, fv) for f, fv in enumerate(facs) if f not in below_facs[v]), default=None)

        def keep(P, Q):
            if any(q > c for q, c in zip(Q, caps)):
                return False
            if v == bt.root:
                return not any(P) and not any(Q)
            for j in range(K, -1, -1):
                if P[j]:
                    return reach is not None and j + reach <= K
            return True

        table = {}
        ks = bt.children[v]
        if not ks:
            h = bt.host.get(v)
            cands = [((zero, zero), ("none",))]
            if h and h[0] == "user":
                cands = [(((1,) + zero[1:], zero), ("user", h[1]))]
            elif h and h[0] == "facility":
                cands += [((zero, q), ("open", h[1], q)) for q in _promise_sets(caps, r, K)]
            for key, bp in cands:
                if keep(*key) and key not in table:
                    table[key] = bp
        else:
            x, y = ks
            dx, dy = rt.length[x], rt.length[y]
            left = []
            for Px, Qx in sorted(DP[x]):
                a, b = _shift_out(Px, dx), _shift_in(Qx, dx)
                if a is not None and b is not None:
                    left.append(((Px, Qx), a, b))
            right = []
            for Py, Qy in sorted(DP[y]):
                a, b = _shift_out(Py, dy), _shift_in(Qy, dy)
                if a is not None and b is not None:
                    right.append(((Py, Qy), a, b))
            for kx, Px, Qx in left:
                for ky, Py, Qy in right:
                    for P, Q, Rx, Ry in _matches(Px, Qx, Py, Qy):
                        key = (P, Q)
                        if key not in table and keep(P, Q):
                            table[key] = ("merge", kx, ky, Rx, Ry)
        DP[v] = table
    return DP


def _concretise(rt: RoundedTree, DP, K):
    bt = rt.tree
    zero = (0,) * (K + 1)
    chosen = {bt.root: (zero, zero)}
    stack = [bt.root]
    while stack:
        v = stack.pop()
        bp = DP[v][chosen[v]]
        if bp[0] == "merge":
            x, y = bt.children[v]
            chosen[x], chosen[y] = bp[1], bp[2]
            stack += [x, y]
    assigned = [None] * bt.source.n
    lists = {}
    for v in _post_order(bt):
        bp = DP[v][chosen[v]]
        if bp[0] == "user":
            lists[v] = ([(bp[1], rt.depth[v])], [])
        elif bp[0] == "open":
            _, f, Q = bp
            lists[v] = ([], [(f, j - rt.depth[v]) for j in range(K + 1) for _ in range(Q[j])])
        elif bp[0] == "none":
            lists[v] = ([], [])
        else:
            _, _, _, Rx, Ry = bp
            x, y = bt.children[v]
            (px, qx), (py, qy) = lists.pop(x), lists.pop(y)
            dv = rt.depth[v]
            for R, pend, prom in ((Rx, px, qy), (Ry, py, qx)):
                for j in range(K + 1):
                    for _ in range(R[j]):
                        ui = next(k for k, (u, du) in enumerate(pend) if du - dv == j)
                        fi = next(k for k, (f, s) in enumerate(prom) if s + dv == j)
                        assigned[pend.pop(ui)[0]] = prom.pop(fi)[0]
            lists[v] = (px + py, qx + qy)
    if any(a is None for a in assigned):
        raise AssertionError("replay left users unassigned")
    return Assignment(tuple(assigned))


# ---------------------------------------------------------------------------
# clustering via midpoint facilities
# ---------------------------------------------------------------------------


def tree_with_midpoints(t: TreeInstance) -> TreeInstance:
    """Gathering instance with a facility at the midpoint of every user pair."""
    spots = {}  # (child vertex of the edge, depth) -> None
    for a in range(t.n):
        for b in range(a, t.n):
            va, vb = t.users[a], t.users[b]
            c = t.lca(va, vb)
            da, db, dc = t.depth(va), t.depth(vb), t.depth(c)
            half = (da + db - 2 * dc) / 2
            v, h = (va, da - half) if da - dc >= half else (vb, db - half)
            while t.depth(v) > h and t.vertices[v][0] is not None and t.depth(t.vertices[v][0]) >= h:
                v = t.vertices[v][0]
            spots[v, h] = None
    vertices = dict(t.vertices)
    splits = {}
    facilities = []
    names = set(map(str, vertices))
    k = 0
    where = {}
    for v, h in sorted(spots, key=lambda s: (str(s[0]), s[1])):
        if t.depth(v) == h:
            where[v, h] = v
        else:
            splits.setdefault(v, []).append(h)
    for v, hs in splits.items():
        parent, _ = t.vertices[v]
        prev, prev_depth = parent, t.depth(parent)
        for h in sorted(hs):
            while f"~m{k}" in names:
                k += 1
            name = f"~m{k}"
            names.add(name)
            vertices[name] = (prev, h - prev_depth)
            where[v, h] = name
            prev, prev_depth = name, h
        vertices[v] = (prev, t.depth(v) - prev_depth)
    for spot in spots:
        facilities.append(where[spot])
    return TreeInstance(vertices, t.root, t.users, tuple(dict.fromkeys(facilities)), t.r, GATHERING)


def spider_to_tree(inst: SpiderInstance) -> TreeInstance:
    """Encode a spider as a tree rooted at the centre."""
    vertices = {"o": (None, Fraction(0))}

    def vid(p):
        return "o" if p.x == 0 else f"{p.leg}:{p.x}"

    per_leg = {}
    for p in list(inst.users) + list(inst.facilities):
        if p.x > 0:
            per_leg.setdefault(p.leg, set()).add(p.x)
    for leg, xs in per_leg.items():
        prev, px = "o", Fraction(0)
        for x in sorted(xs):
            name = f"{leg}:{x}"
            vertices[name] = (prev, x - px)
            prev, px = name, x
    return TreeInstance(
        vertices,
        "o",
        tuple(vid(p) for p in inst.users),
        tuple(vid(p) for p in inst.facilities),
        inst.r,
        inst.problem,
    )


# ---------------------------------------------------------------------------
# oracle and PTAS
# ---------------------------------------------------------------------------


def tree_solve_oracle(inst: TreeInstance, b, delta) -> OracleResult:
    """YES (with witness) certifies cost <= (1 + delta) b; NO certifies OPT > b."""
    b = as_coord(b)
    if b <= 0:
        raise ValueError("tree_solve_oracle needs b > 0")
    if inst.problem == CLUSTERING:
        res = tree_solve_oracle(tree_with_midpoints(inst), b / 2, delta)
        if not res.answer:
            return OracleResult(False, K=res.K, t=res.t)
        clusters = Clustering.of(res.witness.groups())
        return OracleResult(True, clusters, solution_cost(inst, clusters), res.K, res.t)
    if not inst.facilities:
        return OracleResult(False)
    params = PtasParams.make(delta, b, parts=4)
    rt = round_tree(normalize_tree(inst), params.t)
    DP = tree_dp(rt, params.K, inst.r)
    zero = (0,) * (params.K + 1)
    if (zero, zero) not in DP[rt.tree.root]:
        return OracleResult(False, K=params.K, t=params.t)
    witness = _concretise(rt, DP, params.K)
    validate_solution(inst, witness)
    return OracleResult(True, witness, solution_cost(inst, witness), params.K, params.t)


def ptas_tree(inst: TreeInstance, epsilon, linear_scan: bool = False, stats: PtasStats | None = None):
    """``(cost, witness)`` with ``OPT <= cost <= (1 + epsilon) OPT``."""
    if inst.problem == GATHERING and not inst.facilities:
        raise InfeasibleError("no facilities")
    return candidate_search(inst, tree_solve_oracle, epsilon, linear_scan, stats)
