"""Exhaustive exact solvers used as ground truth.

Clustering enumerates set partitions as restricted-growth strings; gathering
enumerates user-to-facility maps as mixed-radix counters.  Both prune on the
incumbent and on the number of users still needed to fill undersized groups.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .core import (
    GATHERING,
    Assignment,
    Clustering,
    GuardError,
    InfeasibleError,
)


@lru_cache(maxsize=None)
def bell(n: int) -> int:
    row = [1]
    for _ in range(n):
        nxt = [row[-1]]
        for v in row:
            nxt.append(nxt[-1] + v)
        row = nxt
    return row[0]


@dataclass(frozen=True)
class SearchGuard:
    max_states: int = 1_000_000

    def check(self, estimate: int, what: str) -> None:
        if estimate > self.max_states:
            raise GuardError(
                f"{what}: search space of {estimate} configurations exceeds the guard of {self.max_states}",
                estimate=estimate,
            )


DEFAULT_GUARD = SearchGuard()


def brute_clustering(inst, guard: SearchGuard = DEFAULT_GUARD):
    """Exact min-max diameter r-gather clustering by partition enumeration."""
    n, r = inst.n, inst.r
    if n < r:
        raise InfeasibleError(f"{n} users < r = {r}")
    guard.check(bell(n), "brute clustering")
    d = [[inst.dist_uu(i, j) for j in range(n)] for i in range(n)]
    blocks: list = []
    diam: list = []
    best = [None, None]

    def deficit():
        return sum(r - len(b) for b in blocks if len(b) < r)

    def rec(u, current):
        if best[0] is not None and current >= best[0]:
            return
        if deficit() > n - u:
            return
        if u == n:
            best[0] = current
            best[1] = [list(b) for b in blocks]
            return
        for k, b in enumerate(blocks):
            grown = max([diam[k]] + [d[u][v] for v in b])
            old = diam[k]
            b.append(u)
            diam[k] = grown
            rec(u + 1, max(current, grown))
            b.pop()
            diam[k] = old
        blocks.append([u])
        diam.append(Fraction(0))
        rec(u + 1, current)
        blocks.pop()
        diam.pop()

    rec(0, Fraction(0))
    if best[0] is None:
        raise InfeasibleError("no partition into clusters of size >= r")
    return best[0], Clustering.of(best[1])


def brute_gathering(inst, guard: SearchGuard = DEFAULT_GUARD):
    """Exact min-max r-gathering by enumerating user-to-facility maps."""
    n, m, r = inst.n, inst.m, inst.r
    if m == 0:
        raise InfeasibleError("no facilities")
    if n < r:
        raise InfeasibleError(f"{n} users < r = {r}")
    guard.check(m ** n, "brute gathering")
    d = [[inst.dist_uf(u, f) for f in range(m)] for u in range(n)]
    order = [sorted(range(m), key=lambda f: (d[u][f], f)) for u in range(n)]
    load = [0] * m
    pick = [0] * n
    best = [None, None]

    def deficit():
        return sum(r - k for k in load if 0 < k < r)

    def rec(u, current):
        if best[0] is not None and current >= best[0]:
            return
        if deficit() > n - u:
            return
        if u == n:
            best[0] = current
            best[1] = tuple(pick)
            return
        for f in order[u]:
            c = d[u][f]
            if best[0] is not None and c >= best[0]:
                break
            load[f] += 1
            pick[u] = f
            rec(u + 1, max(current, c))
            load[f] -= 1

    rec(0, Fraction(0))
    if best[0] is None:
        raise InfeasibleError("no feasible assignment")
    return best[0], Assignment(best[1])


def brute_solve(inst, guard: SearchGuard = DEFAULT_GUARD):
    if inst.problem == GATHERING:
        return brute_gathering(inst, guard)
    return brute_clustering(inst, guard)
