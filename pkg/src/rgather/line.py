"""Exact solvers on a line and the per-leg suffix tables used by the spider DP.

``DP[i]`` is the optimum for the first ``i`` users; a transition appends the
block ``u_{j+1} .. u_i`` (``i - 2r + 1 <= j <= i - r``).  The window minimum is
kept in a monotone deque, so each ``DP[i]`` costs amortised O(1) block-cost
evaluations.
"""

from __future__ import annotations

import bisect
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

from .core import (
    GATHERING,
    INF,
    Assignment,
    Clustering,
    InfeasibleError,
    LineInstance,
    SpiderInstance,
)

BlockCost = Callable[[int, int], tuple]


def nearest_facility_cost(lo: Fraction, hi: Fraction, facilities: Sequence[Fraction]):
    """Cheapest facility for a block spanning ``[lo, hi]``: ``(cost, index)``.

    ``facilities`` must be sorted; the optimum is one of the two facilities
    around the midpoint.
    """
    if not facilities:
        return INF, None
    mid = (lo + hi) / 2
    k = bisect.bisect_left(facilities, mid)
    best = (INF, None)
    for idx in (k - 1, k):
        if 0 <= idx < len(facilities):
            f = facilities[idx]
            c = max(abs(lo - f), abs(hi - f))
            if c < best[0]:
                best = (c, idx)
    return best


def block_cost(users: Sequence[Fraction], i: int, j: int, facilities=None) -> Fraction:
    """Cost of serving ``users[i..j]`` (0-based, inclusive) as one group.

    Without facilities this is the clustering diameter; with a (sorted) facility
    list it is the best min-max distance to a single facility, ``inf`` if the
    list is empty.
    """
    if i > j:
        raise ValueError("block_cost needs i <= j")
    if facilities is None:
        return users[j] - users[i]
    return nearest_facility_cost(users[i], users[j], facilities)[0]


def _clustering_cost_fn(xs):
    def cost(a, b):
        return xs[b] - xs[a], None

    return cost


def _gathering_cost_fn(xs, facilities):
    def cost(a, b):
        return nearest_facility_cost(xs[a], xs[b], facilities)

    return cost


@dataclass
class LineDpRow:
    """Prefix optima ``dp[i]`` with back-pointers ``prev[i]`` and block tags."""

    dp: list
    prev: list
    tag: list
    r: int

    def blocks(self, i: int | None = None) -> list:
        """Blocks ``(start, end, tag)`` (0-based, inclusive) of an optimal prefix of length i."""
        if i is None:
            i = len(self.dp) - 1
        if self.dp[i] == INF:
            raise InfeasibleError(f"prefix of {i} users has no feasible partition")
        out = []
        while i > 0:
            j = self.prev[i]
            out.append((j, i - 1, self.tag[i]))
            i = j
        out.reverse()
        return out


def line_dp(n: int, r: int, cost: BlockCost) -> LineDpRow:
    """Sliding-window DP over blocks of size in [r, 2r - 1]."""
    dp = [INF] * (n + 1)
    prev = [-1] * (n + 1)
    tag = [None] * (n + 1)
    dp[0] = Fraction(0)
    window = deque()
    width = 2 * r - 1
    for i in range(r, n + 1):
        j_new = i - r
        if dp[j_new] != INF:
            while window and dp[window[-1]] >= dp[j_new]:
                window.pop()
            window.append(j_new)
        while window and window[0] < i - width:
            window.popleft()
        while len(window) >= 2:
            c_front = cost(window[0], i - 1)[0]
            nxt = window[1]
            if c_front >= max(dp[nxt], cost(nxt, i - 1)[0]):
                window.popleft()
            else:
                break
        if window:
            j = window[0]
            c, t = cost(j, i - 1)
            value = max(dp[j], c)
            if value != INF:
                dp[i], prev[i], tag[i] = value, j, t
    return LineDpRow(dp, prev, tag, r)


def line_dp_reference(n: int, r: int, cost: BlockCost) -> LineDpRow:
    """Plain quadratic DP over all blocks of size >= r (test reference)."""
    dp = [INF] * (n + 1)
    prev = [-1] * (n + 1)
    tag = [None] * (n + 1)
    dp[0] = Fraction(0)
    for i in range(r, n + 1):
        for j in range(0, i - r + 1):
            if dp[j] == INF:
                continue
            c, t = cost(j, i - 1)
            value = max(dp[j], c)
            if value < dp[i]:
                dp[i], prev[i], tag[i] = value, j, t
    return LineDpRow(dp, prev, tag, r)


def _users_of(users):
    if isinstance(users, LineInstance):
        return list(users.users), users.r
    return [Fraction(u) for u in users], None


def solve_line_clustering(users, r: int | None = None, reference: bool = False):
    """Optimal r-gather clustering of sorted points on a line: ``(cost, Clustering)``."""
    xs, inst_r = _users_of(users)
    r = inst_r if r is None else r
    if any(a > b for a, b in zip(xs, xs[1:])):
        raise ValueError("users must be sorted")
    if len(xs) < r:
        raise InfeasibleError(f"{len(xs)} users cannot form a cluster of size {r}")
    row = (line_dp_reference if reference else line_dp)(len(xs), r, _clustering_cost_fn(xs))
    if row.dp[-1] == INF:
        raise InfeasibleError("no feasible clustering")
    clusters = tuple(tuple(range(a, b + 1)) for a, b, _ in row.blocks())
    return row.dp[-1], Clustering(clusters)


def solve_line_gathering(inst: LineInstance, reference: bool = False):
    """Optimal r-gathering on a line: ``(cost, Assignment)``."""
    xs, fs = list(inst.users), list(inst.facilities)
    if not fs:
        raise InfeasibleError("no facilities")
    if len(xs) < inst.r:
        raise InfeasibleError(f"{len(xs)} users cannot fill a facility of size {inst.r}")
    row = (line_dp_reference if reference else line_dp)(len(xs), inst.r, _gathering_cost_fn(xs, fs))
    if row.dp[-1] == INF:
        raise InfeasibleError("no feasible assignment")
    assigned = [None] * len(xs)
    for a, b, f in row.blocks():
        for u in range(a, b + 1):
            assigned[u] = f
    return row.dp[-1], Assignment(tuple(assigned))


def solve_line(inst: LineInstance, reference: bool = False):
    if inst.problem == GATHERING:
        return solve_line_gathering(inst, reference=reference)
    return solve_line_clustering(inst, reference=reference)


# ---------------------------------------------------------------------------
# suffix tables on spider legs
# ---------------------------------------------------------------------------


@dataclass
class SuffixTable:
    """Single-leg optima for every suffix of one leg's users.

    ``users`` holds the global indices on the leg in order; ``rminus[p]`` is the
    optimum over ``users[p:]`` and ``rplus[p]`` over ``users[p+1:]``.
    """

    leg: int
    users: list
    rminus: list
    rplus: list
    _row: LineDpRow
    _facility_ids: list

    def suffix_blocks(self, start: int) -> list:
        """Groups ``(global user indices, global facility index | None)`` of an optimal ``users[start:]``."""
        total = len(self.users)
        q = total - start
        if q == 0:
            return []
        out = []
        for a, b, tag in self._row.blocks(q):
            # reversed positions a..b map back to original positions total-1-b .. total-1-a
            members = [self.users[total - 1 - k] for k in range(b, a - 1, -1)]
            fac = None if tag is None else self._facility_ids[tag]
            out.append((members, fac))
        return out


def _leg_line(inst: SpiderInstance, leg: int, members: list):
    """Mirror a leg so its suffixes become prefixes; returns (xs, facilities, facility ids)."""
    xs = [-inst.users[g].x for g in reversed(members)]
    if inst.problem != GATHERING:
        return xs, None, None
    pos, ids = [], []
    off_leg = None
    for f, p in enumerate(inst.facilities):
        if p.leg == leg or p.x == 0:
            pos.append(-p.x)
            ids.append(f)
        elif off_leg is None or p.x < inst.facilities[off_leg].x:
            off_leg = f
    if off_leg is not None:
        pos.append(inst.facilities[off_leg].x)
        ids.append(off_leg)
    order = sorted(range(len(pos)), key=lambda k: pos[k])
    return xs, [pos[k] for k in order], [ids[k] for k in order]


def build_suffix_tables(inst: SpiderInstance) -> dict:
    """Per-leg :class:`SuffixTable` for ``inst`` (clustering or gathering)."""
    tables = {}
    for leg, members in inst.leg_users().items():
        xs, fs, ids = _leg_line(inst, leg, members)
        if fs is None:
            cost = _clustering_cost_fn(xs)
        else:
            cost = _gathering_cost_fn(xs, fs)
        row = line_dp(len(xs), inst.r, cost)
        total = len(members)
        # suffix starting at position p has total - p users = prefix length of the mirror
        rminus = [row.dp[total - p] for p in range(total)]
        rplus = [row.dp[total - p - 1] for p in range(total)]
        tables[leg] = SuffixTable(leg, list(members), rminus, rplus, row, ids)
    return tables


def suffix_optimum(table: SuffixTable, start: int):
    """Optimum over ``table.users[start:]`` (0 when empty)."""
    total = len(table.users)
    if start >= total:
        return Fraction(0)
    return table.rminus[start]
