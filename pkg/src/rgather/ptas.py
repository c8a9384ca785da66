"""PTAS for r-gathering and r-gather clustering on a spider.

For a threshold ``b`` and accuracy ``delta`` every coordinate is rounded up to
a multiple of ``t = b * delta / 3``.  The rounded instance has integer
coordinates, and the oracle decides exactly whether it admits a solution with
every rounded distance at most ``K``.  Each leg is swept from its tip towards
the centre with a profile state ``(P, Q)``:

* ``P[j]`` counts users already passed that are still unassigned and lie at
  distance ``j`` outward from the sweep position;
* ``Q[j]`` counts promises of already opened facilities to serve one user at
  distance ``j`` inward from the sweep position (possibly across the centre).

The per-leg centre profiles are then combined across legs by matching
pending users of one side with promises of the other, index by index.

Clustering is handled by the gathering oracle over facilities placed at all
pairwise midpoints, at half the threshold.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction

from .core import (
    CLUSTERING,
    GATHERING,
    Assignment,
    Clustering,
    InfeasibleError,
    SpiderInstance,
    SpiderPoint,
    as_coord,
    solution_cost,
    validate_solution,
)

# ---------------------------------------------------------------------------
# parameters and profile vectors
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PtasParams:
    epsilon: Fraction
    b: Fraction
    t: Fraction
    K: int

    @classmethod
    def make(cls, epsilon, b, parts: int = 3):
        """``t = b * eps / parts`` and ``K = floor(b / t) + 2``.

        On a spider a cross-leg distance grows by at most ``2t`` under rounding,
        and a same-leg distance can shrink by up to ``t``, so a rounded cost of
        ``K`` means a true cost of at most ``(K + 1) t <= b + 3t``; hence
        ``parts = 3``.  Trees pass ``parts = 4``.
        """
        epsilon = Fraction(epsilon)
        b = Fraction(b)
        if not 0 < epsilon <= 1:
            raise ValueError(f"epsilon must lie in (0, 1], got {epsilon}")
        if b <= 0:
            raise ValueError("threshold b must be positive")
        t = b * epsilon / parts
        return cls(epsilon, b, t, math.floor(b / t) + 2)


class ProfileVector(tuple):
    """Fixed-length vector of non-negative counts indexed by rounded distance."""

    def __new__(cls, entries):
        entries = tuple(int(e) for e in entries)
        if any(e < 0 for e in entries):
            raise ValueError("profile entries must be non-negative")
        return super().__new__(cls, entries)

    @classmethod
    def zeros(cls, K: int) -> "ProfileVector":
        return cls((0,) * (K + 1))

    @classmethod
    def unit(cls, K: int, j: int, count: int = 1) -> "ProfileVector":
        v = [0] * (K + 1)
        v[j] = count
        return cls(v)

    @property
    def K(self) -> int:
        return len(self) - 1

    def shift(self, k: int) -> "ProfileVector":
        """Entry ``j`` moves to ``j + k``; entries leaving ``[0, K]`` are dropped."""
        n = len(self)
        out = [0] * n
        for j, v in enumerate(self):
            if v and 0 <= j + k < n:
                out[j + k] = v
        return ProfileVector(out)

    def overflows(self, k: int) -> bool:
        """Whether ``shift(k)`` would drop a non-zero entry."""
        n = len(self)
        return any(v and not 0 <= j + k < n for j, v in enumerate(self))

    def __add__(self, other):
        return ProfileVector(a + b for a, b in zip(self, other))

    def __sub__(self, other):
        return ProfileVector(a - b for a, b in zip(self, other))

    def last_nonzero(self) -> int:
        for j in range(len(self) - 1, -1, -1):
            if self[j]:
                return j
        return -1


def _shift_out(P: tuple, k: int):
    """Pending users move ``k`` further away; ``None`` if one falls past ``K``."""
    if k == 0:
        return P
    n = len(P)
    if k >= n:
        return None if any(P) else P
    if any(P[n - k :]):
        return None
    return (0,) * k + P[: n - k]


def _shift_in(Q: tuple, k: int):
    """Promised users come ``k`` closer; ``None`` if one was passed by."""
    if k == 0:
        return Q
    n = len(Q)
    if k >= n:
        return None if any(Q) else Q
    if any(Q[:k]):
        return None
    return Q[k:] + (0,) * k


# ---------------------------------------------------------------------------
# rounding
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RoundedSpider:
    inst: SpiderInstance
    t: Fraction
    users: tuple  # rounded coordinate per user
    facilities: tuple  # rounded coordinate per facility

    def point(self, kind: str, idx: int):
        p = (self.inst.users if kind == "user" else self.inst.facilities)[idx]
        x = (self.users if kind == "user" else self.facilities)[idx]
        return p.leg, x

    def distance(self, a, b) -> int:
        """Rounded distance between two ``(leg, X)`` pairs."""
        (la, xa), (lb, xb) = a, b
        return abs(xa - xb) if la == lb else xa + xb


def round_up(x: Fraction, t: Fraction) -> int:
    return math.ceil(Fraction(x) / t)


def round_spider(inst: SpiderInstance, t) -> RoundedSpider:
    """Move every point ``(l, x)`` to ``(l, ceil(x / t))``."""
    t = as_coord(t)
    if t <= 0:
        raise ValueError("rounding step must be positive")
    return RoundedSpider(
        inst,
        t,
        tuple(round_up(p.x, t) for p in inst.users),
        tuple(round_up(p.x, t) for p in inst.facilities),
    )


# ---------------------------------------------------------------------------
# per-leg table R
# ---------------------------------------------------------------------------


@dataclass
class LegTable:
    """Reachable centre profiles of one leg with back-pointers through the sweep."""

    leg: int
    K: int
    final: dict  # (P, Q) -> key in last layer (identity)
    layers: list = field(default_factory=list)  # list of dict key -> (parent key, action)

    def __contains__(self, key) -> bool:
        return key in self.final

    def __iter__(self):
        return iter(self.final)

    def __len__(self):
        return len(self.final)

    def actions(self, key) -> list:
        out = []
        for layer in reversed(self.layers):
            parent, action = layer[key]
            if action is not None:
                out.append(action)
            key = parent
        out.reverse()
        return out


class _Counts:
    """Rounded user counts per (leg, coordinate) for promise caps."""

    def __init__(self, rounded: RoundedSpider):
        self.at = {}
        self.by_dist = {}
        for g, p in enumerate(rounded.inst.users):
            x = rounded.users[g]
            self.at[p.leg, x] = self.at.get((p.leg, x), 0) + 1
            self.by_dist.setdefault(x, {})
            self.by_dist[x][p.leg] = self.by_dist[x].get(p.leg, 0) + 1

    def off_leg(self, leg: int, dist: int, legs=None) -> int:
        row = self.by_dist.get(dist, {})
        return sum(c for l, c in row.items() if l != leg and (legs is None or l in legs))

    def inward(self, leg: int, X: int, j: int) -> int:
        """Users a promise made at ``(leg, X)`` with index ``j`` could land on."""
        if j < X:
            return self.at.get((leg, X - j), 0)
        n = self.off_leg(leg, j - X)
        if j == X:
            n += self.at.get((leg, 0), 0)
        return n


def _leg_events(rounded: RoundedSpider, leg: int):
    """Positions on ``leg`` from the tip inwards: ``[(X, users, facility | None)]``."""
    inst = rounded.inst
    pos = {}
    for g, p in enumerate(inst.users):
        if p.leg == leg:
            pos.setdefault(rounded.users[g], ([], []))[0].append(g)
    for f, p in enumerate(inst.facilities):
        if p.leg == leg:
            pos.setdefault(rounded.facilities[f], ([], []))[1].append(f)
    out = []
    for X in sorted(pos, reverse=True):
        users, facs = pos[X]
        out.append((X, users, min(facs) if facs else None))
    return out


def _open_facility(P, Q, caps, r, K):
    """All ``(P - P', Q + Q')`` with ``sum P' + sum Q' >= r``."""
    frontier = {(P, Q, 0)}
    for j in range(K + 1):
        nxt = set()
        for p, q, load in frontier:
            for a in range(p[j] + 1):
                for c in range(max(0, caps[j] - q[j]) + 1):
                    if a == 0 and c == 0:
                        nxt.add((p, q, load))
                        continue
                    p2 = p if a == 0 else p[:j] + (p[j] - a,) + p[j + 1 :]
                    q2 = q if c == 0 else q[:j] + (q[j] + c,) + q[j + 1 :]
                    nxt.add((p2, q2, min(r, load + a + c)))
        frontier = nxt
    return [(p, q) for p, q, load in frontier if load >= r]


def fill_table_R(rounded: RoundedSpider, leg: int, K: int, r: int | None = None, counts=None) -> LegTable:
    """Sweep ``leg`` from its tip to the centre and collect reachable ``(P, Q)``."""
    r = rounded.inst.r if r is None else r
    counts = counts or _Counts(rounded)
    zero = (0,) * (K + 1)
    table = LegTable(leg, K, {})
    states = {(zero, zero)}
    prev_x = None

    def push(layer, new_states):
        table.layers.append(layer)
        return new_states

    for X, users, fac in _leg_events(rounded, leg):
        if prev_x is not None and prev_x != X:
            layer, nxt = {}, set()
            for P, Q in states:
                P2, Q2 = _shift_out(P, prev_x - X), _shift_in(Q, prev_x - X)
                if P2 is None or Q2 is None:
                    continue
                key = (P2, Q2)
                if key not in layer:
                    layer[key] = ((P, Q), None)
                    nxt.add(key)
            states = push(layer, nxt)
        prev_x = X
        for g in users:
            layer, nxt = {}, set()
            for P, Q in states:
                key = (P[:0] + (P[0] + 1,) + P[1:], Q)
                if key not in layer:
                    layer[key] = ((P, Q), ("pending", g))
                if Q[0] > 0:
                    key = (P, (Q[0] - 1,) + Q[1:])
                    if key not in layer:
                        layer[key] = ((P, Q), ("fulfil", g))
            states = push(layer, set(layer))
        if fac is not None:
            caps = [counts.inward(leg, X, j) for j in range(K + 1)]
            layer = {}
            for P, Q in sorted(states):
                if (P, Q) not in layer:
                    layer[P, Q] = ((P, Q), None)
            for P, Q in sorted(states):
                for key in _open_facility(P, Q, caps, r, K):
                    if key not in layer:
                        layer[key] = ((P, Q), ("open", fac, P, Q, key[0], key[1]))
            states = push(layer, set(layer))
    if prev_x:
        layer, nxt = {}, set()
        for P, Q in states:
            P2, Q2 = _shift_out(P, prev_x), _shift_in(Q, prev_x)
            if P2 is None or Q2 is None:
                continue
            if (P2, Q2) not in layer:
                layer[P2, Q2] = ((P, Q), None)
        states = push(layer, set(layer))
    table.final = {s: s for s in states}
    return table


# ---------------------------------------------------------------------------
# cross-leg table S
# ---------------------------------------------------------------------------


def _splits(P, Q, A, B):
    """All ``(P - Q1 + P2, Q - P1 + Q2, P1, Q1)`` with ``A = P1 + P2`` and ``B = Q1 + Q2``."""
    partial = [((), (), (), ())]
    for j in range(len(P)):
        nxt = []
        for p1 in range(min(A[j], Q[j]) + 1):
            for q1 in range(min(B[j], P[j]) + 1):
                np_ = P[j] - q1 + (A[j] - p1)
                nq = Q[j] - p1 + (B[j] - q1)
                for a, b, c, d in partial:
                    nxt.append((a + (np_,), b + (nq,), c + (p1,), d + (q1,)))
        partial = nxt
    return partial


def fill_table_S(rounded: RoundedSpider, K: int, legs_tables: dict):
    """``S[i]``: profiles reachable after combining the first ``i`` legs (by leg order)."""
    zero = (0,) * (K + 1)
    order = sorted(legs_tables)
    S = [{(zero, zero): None}]
    counts = _Counts(rounded)
    inst = rounded.inst
    fac_x = {}
    for f, p in enumerate(inst.facilities):
        fac_x.setdefault(p.leg, []).append(rounded.facilities[f])
    for i, leg in enumerate(order):
        later = set(order[i + 1 :])
        later_fac = min((x for l in later for x in fac_x.get(l, [])), default=None)
        cur = {}
        for (P, Q) in sorted(S[-1]):
            for A, B in sorted(legs_tables[leg]):
                for nP, nQ, P1, Q1 in _splits(P, Q, A, B):
                    key = (nP, nQ)
                    if key in cur:
                        continue
                    if not later and (any(nP) or any(nQ)):
                        continue
                    if any(q > counts.off_leg(0, j, later) for j, q in enumerate(nQ)):
                        continue
                    if any(nP) and (later_fac is None or nP_last(nP) + later_fac > K):
                        continue
                    cur[key] = ((P, Q), (A, B), P1, Q1)
        S.append(cur)
    return order, S


def nP_last(P):
    for j in range(len(P) - 1, -1, -1):
        if P[j]:
            return j
    return -1


# ---------------------------------------------------------------------------
# oracle
# ---------------------------------------------------------------------------


@dataclass
class OracleResult:
    answer: bool
    witness: object = None
    cost: Fraction | None = None
    K: int | None = None
    t: Fraction | None = None

    def __bool__(self):
        return self.answer


def midpoint(p: SpiderPoint, q: SpiderPoint) -> SpiderPoint:
    """Point halfway along the path between two spider points."""
    if p.leg == q.leg:
        return SpiderPoint(p.leg, (p.x + q.x) / 2)
    far, near = (p, q) if p.x >= q.x else (q, p)
    return SpiderPoint(far.leg, (far.x - near.x) / 2)


def midpoint_facilities(inst: SpiderInstance) -> list:
    seen = {}
    for a in range(inst.n):
        for b in range(a, inst.n):
            m = midpoint(inst.users[a], inst.users[b])
            seen.setdefault(m, None)
    return sorted(seen, key=lambda p: (p.x, p.leg))


def as_gathering(inst: SpiderInstance) -> SpiderInstance:
    """Clustering instance -> gathering instance on pairwise midpoints."""
    facs = [(p.leg, p.x) for p in midpoint_facilities(inst)]
    return SpiderInstance.build(inst.d, _original_points(inst), facs, inst.r, GATHERING)


def _original_points(inst):
    return [(p.leg, p.x) for p in inst.users]


def _decide_rounded(rounded: RoundedSpider, K: int):
    inst = rounded.inst
    counts = _Counts(rounded)
    legs = sorted({p.leg for p in inst.users} | {p.leg for p in inst.facilities})
    tables = {}
    for leg in legs:
        tables[leg] = fill_table_R(rounded, leg, K, counts=counts)
        if not tables[leg].final:
            return None
    order, S = fill_table_S(rounded, K, tables)
    zero = (0,) * (K + 1)
    if (zero, zero) not in S[-1]:
        return None
    return _assemble(rounded, K, tables, order, S)


def _assemble(rounded, K, tables, order, S):
    """Replay back-pointers into a concrete assignment."""
    inst = rounded.inst
    assigned = [None] * inst.n
    zero = (0,) * (K + 1)
    # which centre profile each leg ended with, and its split
    choice = {}
    key = (zero, zero)
    for i in range(len(order), 0, -1):
        prev, AB, P1, Q1 = S[i][key]
        choice[order[i - 1]] = (AB, P1, Q1)
        key = prev

    pend_pool = {}  # index -> [user]
    prom_pool = {}  # index -> [facility]
    for leg in order:
        (A, B), P1, Q1 = choice[leg]
        pending, promises = _replay_leg(rounded, tables[leg], (A, B), assigned)
        # leg's promises Q1 serve earlier pending; leg's pending P1 use earlier promises
        for j in range(K + 1):
            for _ in range(Q1[j]):
                u = pend_pool[j].pop()
                f = promises[j].pop()
                assigned[u] = f
            for _ in range(P1[j]):
                u = pending[j].pop()
                f = prom_pool[j].pop()
                assigned[u] = f
            pend_pool.setdefault(j, []).extend(pending.get(j, []))
            prom_pool.setdefault(j, []).extend(promises.get(j, []))
    if any(a is None for a in assigned):
        raise AssertionError("replay left users unassigned")
    return Assignment(tuple(assigned))


def _replay_leg(rounded, table: LegTable, key, assigned):
    """Concrete centre lists ``(pending[j] -> users, promises[j] -> facilities)``."""
    pending = []  # (user, X)
    promises = []  # (facility, target X measured as signed inward position)
    for action in table.actions(key):
        kind = action[0]
        if kind == "pending":
            g = action[1]
            pending.append((g, rounded.users[g]))
        elif kind == "fulfil":
            g = action[1]
            X = rounded.users[g]
            for idx, (f, target) in enumerate(promises):
                if target == X:
                    assigned[g] = f
                    promises.pop(idx)
                    break
            else:
                raise AssertionError("no promise to fulfil")
        else:
            _, f, P, Q, P2, Q2 = action
            Xf = rounded.facilities[f]
            for j in range(len(P)):
                take = P[j] - P2[j]
                for _ in range(take):
                    for idx, (g, Xg) in enumerate(pending):
                        if Xg - Xf == j:
                            assigned[g] = f
                            pending.pop(idx)
                            break
                    else:
                        raise AssertionError("no pending user to serve")
                for _ in range(Q2[j] - Q[j]):
                    promises.append((f, Xf - j))
    pend = {}
    for g, X in pending:
        pend.setdefault(X, []).append(g)
    prom = {}
    for f, target in promises:
        # target <= 0 is a user at distance -target on another leg (or the centre)
        prom.setdefault(-target, []).append(f)
    return pend, prom


def solve_oracle(inst: SpiderInstance, b, delta) -> OracleResult:
    """YES (with witness) if OPT <= (1 + delta) b is certified; NO guarantees OPT > b."""
    b = as_coord(b)
    if b <= 0:
        raise ValueError("solve_oracle needs b > 0; use zero_cost_solution for b = 0")
    if inst.problem == CLUSTERING:
        g = as_gathering(inst)
        res = solve_oracle(g, b / 2, delta)
        if not res.answer:
            return OracleResult(False, K=res.K, t=res.t)
        clusters = Clustering.of(res.witness.groups())
        return OracleResult(True, clusters, solution_cost(inst, clusters), res.K, res.t)
    if inst.n < inst.r or not inst.facilities:
        return OracleResult(False)
    params = PtasParams.make(delta, b)
    rounded = round_spider(inst, params.t)
    witness = _decide_rounded(rounded, params.K)
    if witness is None:
        return OracleResult(False, K=params.K, t=params.t)
    validate_solution(inst, witness)
    return OracleResult(True, witness, solution_cost(inst, witness), params.K, params.t)


# ---------------------------------------------------------------------------
# zero threshold and candidate search
# ---------------------------------------------------------------------------


def zero_cost_solution(inst):
    """Exact check for a cost-0 solution on any metric with ``dist_uu``/``dist_uf``."""
    n = inst.n
    if inst.problem == CLUSTERING:
        groups = []
        for u in range(n):
            for grp in groups:
                if inst.dist_uu(grp[0], u) == 0:
                    grp.append(u)
                    break
            else:
                groups.append([u])
        if all(len(g) >= inst.r for g in groups):
            return Clustering.of(groups)
        return None
    assigned = [None] * n
    load = {}
    for u in range(n):
        for f in range(inst.m):
            if inst.dist_uf(u, f) == 0:
                assigned[u] = f
                load[f] = load.get(f, 0) + 1
                break
        else:
            return None
    if all(c >= inst.r for c in load.values()):
        return Assignment(tuple(assigned))
    return None


def candidate_values(inst) -> list:
    """Sorted distinct positive values the optimum can take."""
    if inst.problem == CLUSTERING:
        vals = {inst.dist_uu(a, b) for a in range(inst.n) for b in range(a + 1, inst.n)}
    else:
        vals = {inst.dist_uf(u, f) for u in range(inst.n) for f in range(inst.m)}
    return sorted(v for v in vals if v > 0)


@dataclass
class PtasStats:
    candidates: int = 0
    oracle_calls: list = field(default_factory=list)  # (b, answer, seconds)


def candidate_search(inst, oracle, epsilon, linear_scan: bool = False, stats: PtasStats | None = None):
    """Smallest certified candidate: ``(cost, witness)``.

    Binary search keeps a NO candidate below a YES candidate, which already
    bounds the result by ``(1 + epsilon) OPT`` without assuming monotonicity.
    """
    epsilon = Fraction(epsilon)
    if not 0 < epsilon <= 1:
        raise ValueError(f"epsilon must lie in (0, 1], got {epsilon}")
    stats = stats if stats is not None else PtasStats()
    if inst.n < inst.r:
        raise InfeasibleError(f"{inst.n} users < r = {inst.r}")
    zero = zero_cost_solution(inst)
    if zero is not None:
        return Fraction(0), zero
    cands = candidate_values(inst)
    stats.candidates = len(cands)

    def ask(i):
        t0 = time.perf_counter()
        res = oracle(inst, cands[i], epsilon)
        stats.oracle_calls.append((cands[i], res.answer, time.perf_counter() - t0))
        return res

    if linear_scan:
        for i in range(len(cands)):
            res = ask(i)
            if res.answer:
                return res.cost, res.witness
        raise InfeasibleError("no candidate threshold admits a solution")
    if not cands:
        raise InfeasibleError("no candidate threshold admits a solution")
    top = ask(len(cands) - 1)
    if not top.answer:
        raise InfeasibleError("no candidate threshold admits a solution")
    lo, hi, best = -1, len(cands) - 1, top
    while hi - lo > 1:
        mid = (lo + hi) // 2
        res = ask(mid)
        if res.answer:
            hi, best = mid, res
        else:
            lo = mid
    return best.cost, best.witness


def ptas_spider(inst: SpiderInstance, epsilon, linear_scan: bool = False, stats: PtasStats | None = None):
    """``(cost, witness)`` with ``OPT <= cost <= (1 + epsilon) OPT``."""
    if inst.problem == GATHERING and not inst.facilities:
        raise InfeasibleError("no facilities")
    return candidate_search(inst, solve_oracle, epsilon, linear_scan, stats)
