"""Exact FPT algorithm on spiders, parameterised by the number of legs.

Users are scanned in global order ``x(u_1) <= ... <= x(u_n)``.  A state
``(S, j, k)`` records the legs still available for multi-leg clusters (bitmask
``S``), the size ``j`` of the ball part being built and the index ``k`` of its
last user; the stored value is the largest cost paid so far.  Only the first
``(2r-1)d`` users of a leg can sit in a ball part, so the scan touches
``O(r d^2)`` users and the rest of the work is the linear suffix tables.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from fractions import Fraction

from .core import (
    GATHERING,
    INF,
    Assignment,
    Clustering,
    InfeasibleError,
    SpiderInstance,
    spider_distance,
)
from .line import build_suffix_tables, suffix_optimum

# ---------------------------------------------------------------------------
# Cost(v, u)
# ---------------------------------------------------------------------------


class CostTable(dict):
    """``(v, u) -> (cost, facility index | None)`` for segment end ``v`` and ball end ``u``."""

    def cost(self, v: int, u: int):
        return self[v, u][0]


def cross_leg_cost_naive(inst: SpiderInstance, v: int, u: int):
    """O(m) reference: best single facility for the two extreme users."""
    pv, pu = inst.users[v], inst.users[u]
    best = (INF, None)
    for f, pf in enumerate(inst.facilities):
        c = max(spider_distance(pv, pf), spider_distance(pu, pf))
        if c < best[0]:
            best = (c, f)
    return best


def candidate_pairs(inst: SpiderInstance) -> list:
    """Ball-end / segment-end pairs the DP can ever query."""
    cut = (2 * inst.r - 1) * inst.d
    seg_cut = cut + 2 * inst.r - 1
    legs = inst.leg_users()
    balls = [g for members in legs.values() for g in members[:cut]]
    segs = [g for members in legs.values() for g in members[:seg_cut]]
    pairs = []
    for u in balls:
        lu = inst.users[u].leg
        for v in segs:
            if v > u and inst.users[v].leg != lu:
                pairs.append((v, u))
    return pairs


def build_cost_table(inst: SpiderInstance, candidates=None) -> CostTable:
    """Precompute ``Cost(v, u)`` for every candidate pair.

    Clustering: the cross-leg distance ``x(v) + x(u)``.  Gathering: the better
    of the centre-closest facility off ``l(v)`` and the facility on ``l(v)``
    nearest the point ``(x(v) - x(u)) / 2``; the latter is found for all pairs
    of a leg at once by sorting the targets and sweeping the facility list.
    """
    if candidates is None:
        candidates = candidate_pairs(inst)
    table = CostTable()
    users = inst.users
    if inst.problem != GATHERING:
        for v, u in candidates:
            table[v, u] = (users[v].x + users[u].x, None)
        return table
    if not inst.facilities:
        raise InfeasibleError("gathering instance without facilities")

    on_leg = {}
    for f, p in enumerate(inst.facilities):
        on_leg.setdefault(p.leg, []).append(f)
    for fs in on_leg.values():
        fs.sort(key=lambda f: inst.facilities[f].x)
    # centre-closest facility of each leg, then best facility off a given leg
    heads = sorted((inst.facilities[fs[0]].x, leg, fs[0]) for leg, fs in on_leg.items())

    def off_leg_best(leg):
        for y, l, f in heads:
            if l != leg or y == 0:
                return y, f
        return None

    by_leg = {}
    for v, u in candidates:
        by_leg.setdefault(users[v].leg, []).append((v, u))
    for leg, pairs in by_leg.items():
        off = off_leg_best(leg)
        fs = on_leg.get(leg, [])
        targets = sorted(pairs, key=lambda vu: (users[vu[0]].x - users[vu[1]].x) / 2)
        ptr = 0
        for v, u in targets:
            xv, xu = users[v].x, users[u].x
            best = (INF, None)
            if off is not None:
                best = (xv + off[0], off[1])
            target = (xv - xu) / 2
            while ptr < len(fs) and inst.facilities[fs[ptr]].x < target:
                ptr += 1
            for idx in (ptr - 1, ptr):
                if 0 <= idx < len(fs):
                    y = inst.facilities[fs[idx]].x
                    c = max(abs(xv - y), xu + y)
                    if c < best[0] or (c == best[0] and best[1] is not None and fs[idx] < best[1]):
                        best = (c, fs[idx])
            table[v, u] = best
    return table


# ---------------------------------------------------------------------------
# the DP
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FptState:
    S: int
    j: int
    k: int


@dataclass
class _Entry:
    value: object
    parent: tuple | None  # (layer, key)
    action: tuple | None


def _events(inst: SpiderInstance, legs: dict) -> list:
    """Global indices the scan must visit, with an eligibility flag."""
    cut = (2 * inst.r - 1) * inst.d
    events = []
    for members in legs.values():
        for p, g in enumerate(members[: cut + 1]):
            events.append((g, p < cut))
    events.sort()
    return events


def solve_spider_fpt(inst: SpiderInstance, upper_bound=None, return_stats: bool = False):
    """Exact optimum on a spider: ``(cost, Clustering | Assignment)``.

    ``upper_bound`` discards states whose value exceeds it; the result is then
    exact whenever the optimum is within the bound and infeasible otherwise.
    """
    n, r, d = inst.n, inst.r, inst.d
    if n < r:
        raise InfeasibleError(f"{n} users < r = {r}")
    gathering = inst.problem == GATHERING
    if gathering and not inst.facilities:
        raise InfeasibleError("no facilities")
    legs = {l: m for l, m in inst.leg_users().items() if m}
    pos = {}
    for l, members in legs.items():
        for p, g in enumerate(members):
            pos[g] = p
    leg_of = [p.leg for p in inst.users]
    tables = build_suffix_tables(inst)
    costs = build_cost_table(inst)
    bound = INF if upper_bound is None else upper_bound

    full = 0
    for l in legs:
        full |= 1 << (l - 1)
    layers = [{(full, 0, -1): _Entry(Fraction(0), None, None)}]
    events = _events(inst, legs)
    max_ball = 2 * r - 1

    for step, (g, eligible) in enumerate(events, start=1):
        prev = layers[-1]
        cur = {}
        lg = leg_of[g]
        bit = 1 << (lg - 1)
        rminus = tables[lg].rminus[pos[g]]

        def relax(key, value, parent, action):
            if value > bound:
                return
            old = cur.get(key)
            if old is None or value < old.value:
                cur[key] = _Entry(value, parent, action)

        for key in sorted(prev):
            S, j, k = key
            e = prev[key]
            v = e.value
            if not S & bit:
                relax(key, v, (step - 1, key), ("carry",))
                continue
            if eligible and j < max_ball:
                relax((S, j + 1, g), v, (step - 1, key), ("ball", g))
            relax((S & ~bit, j, k), max(v, rminus), (step - 1, key), ("discard", lg, g))

        # close the current ball with a segment on an available leg
        for key in sorted(k for k in cur if k[1] > 0):
            S, j, k = key
            v = cur[key].value
            lk = leg_of[k]
            for l, members in legs.items():
                b = 1 << (l - 1)
                if not S & b or l == lk:
                    continue
                q = bisect.bisect_right(members, g)
                for p in range(max(1, r - j), max_ball - j + 1):
                    if q + p - 1 >= len(members):
                        break
                    seg_end = members[q + p - 1]
                    c = costs[seg_end, k][0]
                    rest = tables[l].rplus[q + p - 1]
                    value = max(v, c, rest)
                    relax((S & ~b, 0, -1), value, (step, key), ("close", l, q, p, k, seg_end))
        layers.append(cur)

    final = layers[-1]
    done = [(e.value, key) for key, e in final.items() if key[1] == 0]
    if not done:
        raise InfeasibleError("no feasible solution" + ("" if upper_bound is None else f" within {upper_bound}"))
    value, key = min(done, key=lambda t: (t[0], t[1][0]))
    witness, groups = _reconstruct(inst, layers, len(layers) - 1, key, tables, costs, pos)
    if return_stats:
        stats = {"events": len(events), "states": sum(len(x) for x in layers), "groups": groups}
        return value, witness, stats
    return value, witness


def _reconstruct(inst, layers, layer, key, tables, costs, pos):
    actions = []
    while True:
        e = layers[layer][key]
        if e.parent is None:
            break
        actions.append(e.action)
        layer, key = e.parent
    actions.reverse()

    legs = inst.leg_users()
    gathering = inst.problem == GATHERING
    groups = []  # (members, facility)
    ball = []
    for act in actions:
        if act[0] == "ball":
            ball.append(act[1])
        elif act[0] == "discard":
            _, l, g = act
            groups.extend(tables[l].suffix_blocks(pos[g]))
        elif act[0] == "close":
            _, l, q, p, k, seg_end = act
            members = legs[l]
            segment = members[q : q + p]
            groups.append((ball + segment, costs[seg_end, k][1]))
            ball = []
            groups.extend(tables[l].suffix_blocks(q + p))
    if gathering:
        assigned = [None] * inst.n
        for members, f in groups:
            for u in members:
                assigned[u] = f
        return Assignment(tuple(assigned)), groups
    return Clustering.of([m for m, _ in groups]), groups


def solve_spider(inst: SpiderInstance):
    return solve_spider_fpt(inst)


# ---------------------------------------------------------------------------
# Algorithm-1 style enumerator (test oracle, exponential)
# ---------------------------------------------------------------------------


@dataclass
class SuffixSpecialFamily:
    clusters: list
    leftover: dict  # leg -> first leg position handed to single-leg clusters


def enumerate_suffix_special(inst: SpiderInstance, r: int | None = None):
    """Yield every family produced by the nondeterministic choices (a)-(d)."""
    r = inst.r if r is None else r
    n = inst.n
    legs = inst.leg_users()
    leg_of = [p.leg for p in inst.users]
    pos = {g: p for members in legs.values() for p, g in enumerate(members)}

    def rec(i, S, C, fam, leftover):
        if i == n:
            if not C:
                left = dict(leftover)
                for l in S:
                    left.setdefault(l, len(legs[l]))
                yield SuffixSpecialFamily([list(c) for c in fam], left)
            return
        l = leg_of[i]
        if l in S:
            options = [("a", S, C + [i], leftover), ("b", S - {l}, C, {**leftover, l: pos[i]})]
        else:
            options = [("-", S, C, leftover)]
        for _, S2, C2, left2 in options:
            if len(C2) < 2 * r - 1:
                yield from rec(i + 1, S2, C2, fam, left2)
            for seg_leg in sorted(S2):
                after = [g for g in legs[seg_leg] if g > i]
                for t in range(0, len(after) + 1):
                    if r <= len(C2) + t <= 2 * r - 1:
                        cluster = C2 + after[:t]
                        if len({leg_of[g] for g in cluster}) < 2:
                            continue
                        start = pos[after[t]] if t < len(after) else len(legs[seg_leg])
                        yield from rec(
                            i + 1,
                            S2 - {seg_leg},
                            [],
                            fam + [cluster],
                            {**left2, seg_leg: start},
                        )

    if n == 0:
        yield SuffixSpecialFamily([], {})
        return
    yield from rec(0, frozenset(l for l in legs if legs[l]), [], [], {})


def group_cost(inst: SpiderInstance, members) -> Fraction:
    """True cost of serving ``members`` as one group (diameter or best facility radius)."""
    if inst.problem == GATHERING:
        return min(
            (max(inst.dist_uf(u, f) for u in members) for f in range(inst.m)),
            default=INF,
        )
    return max((inst.dist_uu(a, b) for a in members for b in members), default=Fraction(0))


def family_objective(inst: SpiderInstance, fam: SuffixSpecialFamily, tables=None):
    if tables is None:
        tables = build_suffix_tables(inst)
    value = Fraction(0)
    for c in fam.clusters:
        value = max(value, group_cost(inst, c))
    for l, start in fam.leftover.items():
        if l in tables:
            value = max(value, suffix_optimum(tables[l], start))
    return value
