"""Instances, solutions, metrics and validation for r-gathering on lines, spiders and trees."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence, Union

Coord = Fraction
INF = math.inf

CLUSTERING = "clustering"
GATHERING = "gathering"
PROBLEMS = (CLUSTERING, GATHERING)


class RGatherError(Exception):
    """Base class for all package errors."""


class ValidationError(RGatherError, ValueError):
    """A solution or instance violates one of its invariants."""


class InfeasibleError(RGatherError):
    """No feasible solution exists."""


class GuardError(RGatherError):
    """A search-space or output-size guard refused the request."""

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


def as_coord(value) -> Fraction:
    """Convert ints, Fractions or ``"p/q"`` strings to a non-negative Fraction."""
    if isinstance(value, float):
        raise TypeError("floating point coordinates are not accepted; use Fraction or 'p/q'")
    c = Fraction(value)
    if c < 0:
        raise ValidationError(f"coordinate must be non-negative, got {c}")
    return c


def format_coord(value) -> str:
    if value == INF:
        return "inf"
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


# ---------------------------------------------------------------------------
# spider
# ---------------------------------------------------------------------------


class SpiderPoint:
    """A point ``(leg, x)`` on a spider; every ``x == 0`` point is the centre."""

    __slots__ = ("leg", "x")

    def __init__(self, leg: int, x):
        if leg < 1:
            raise ValidationError(f"leg index must be >= 1, got {leg}")
        object.__setattr__(self, "leg", int(leg))
        object.__setattr__(self, "x", as_coord(x))

    def __setattr__(self, name, value):
        raise AttributeError("SpiderPoint is immutable")

    def __eq__(self, other):
        if not isinstance(other, SpiderPoint):
            return NotImplemented
        if self.x == 0 and other.x == 0:
            return True
        return self.leg == other.leg and self.x == other.x

    def __hash__(self):
        if self.x == 0:
            return hash(("centre",))
        return hash((self.leg, self.x))

    def __repr__(self):
        return f"SpiderPoint({self.leg}, {format_coord(self.x)})"

    @property
    def is_center(self) -> bool:
        return self.x == 0


def spider_distance(p: SpiderPoint, q: SpiderPoint) -> Fraction:
    if p.leg == q.leg:
        return abs(p.x - q.x)
    return p.x + q.x


def _canonical_spider_points(points: Iterable) -> tuple[list[SpiderPoint], list[int]]:
    pts = []
    for p in points:
        if not isinstance(p, SpiderPoint):
            p = SpiderPoint(*p)
        if p.x == 0 and p.leg != 1:
            p = SpiderPoint(1, 0)
        pts.append(p)
    order = sorted(range(len(pts)), key=lambda i: (pts[i].x, pts[i].leg, i))
    return [pts[i] for i in order], order


@dataclass(frozen=True)
class SpiderInstance:
    """Users (and facilities) on a spider with ``d`` legs.

    Build through :meth:`build`, which canonicalises: centre points move to leg 1
    and both point lists are sorted by ``(x, leg, input position)``.
    """

    d: int
    users: tuple
    facilities: tuple
    r: int
    problem: str = CLUSTERING
    input_order: tuple = field(default=(), compare=False, repr=False)

    kind = "spider"

    @classmethod
    def build(cls, d, users, facilities=(), r=1, problem=None):
        if problem is None:
            problem = GATHERING if facilities else CLUSTERING
        users, order = _canonical_spider_points(users)
        facilities, _ = _canonical_spider_points(facilities)
        return cls(int(d), tuple(users), tuple(facilities), int(r), problem, tuple(order))

    def __post_init__(self):
        if self.problem not in PROBLEMS:
            raise ValidationError(f"unknown problem {self.problem!r}")
        if self.d < 1:
            raise ValidationError("a spider needs d >= 1 legs")
        if self.r < 1:
            raise ValidationError("r must be >= 1")
        if len(self.users) < self.r:
            raise ValidationError(f"n = {len(self.users)} users < r = {self.r}: no feasible solution")
        for p in self.users + self.facilities:
            if not 1 <= p.leg <= self.d:
                raise ValidationError(f"point {p} references a leg outside [1, {self.d}]")
            if p.x == 0 and p.leg != 1:
                raise ValidationError("centre points must be stored on leg 1; use SpiderInstance.build")
        keys = [(p.x, p.leg) for p in self.users]
        if keys != sorted(keys):
            raise ValidationError("users must be sorted by (x, leg); use SpiderInstance.build")
        if self.problem == GATHERING and not self.facilities:
            raise ValidationError("gathering instance without facilities")

    @property
    def n(self) -> int:
        return len(self.users)

    @property
    def m(self) -> int:
        return len(self.facilities)

    def dist_uu(self, i: int, j: int) -> Fraction:
        return spider_distance(self.users[i], self.users[j])

    def dist_uf(self, i: int, f: int) -> Fraction:
        return spider_distance(self.users[i], self.facilities[f])

    def with_problem(self, problem: str, facilities=None) -> "SpiderInstance":
        facs = self.facilities if facilities is None else tuple(facilities)
        return SpiderInstance(self.d, self.users, facs, self.r, problem, self.input_order)

    def leg_users(self) -> dict:
        """Global user indices grouped by leg, in increasing order."""
        legs = {l: [] for l in range(1, self.d + 1)}
        for i, p in enumerate(self.users):
            legs[p.leg].append(i)
        return legs


# ---------------------------------------------------------------------------
# line
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LineInstance:
    users: tuple
    facilities: tuple
    r: int
    problem: str = CLUSTERING
    input_order: tuple = field(default=(), compare=False, repr=False)

    kind = "line"

    @classmethod
    def build(cls, users, facilities=(), r=1, problem=None):
        if problem is None:
            problem = GATHERING if facilities else CLUSTERING
        us = [as_coord(u) for u in users]
        order = sorted(range(len(us)), key=lambda i: (us[i], i))
        fs = sorted(as_coord(f) for f in facilities)
        return cls(tuple(us[i] for i in order), tuple(fs), int(r), problem, tuple(order))

    def __post_init__(self):
        if self.problem not in PROBLEMS:
            raise ValidationError(f"unknown problem {self.problem!r}")
        if self.r < 1:
            raise ValidationError("r must be >= 1")
        if len(self.users) < self.r:
            raise ValidationError(f"n = {len(self.users)} users < r = {self.r}: no feasible solution")
        if list(self.users) != sorted(self.users) or list(self.facilities) != sorted(self.facilities):
            raise ValidationError("line users and facilities must be sorted")
        if self.problem == GATHERING and not self.facilities:
            raise ValidationError("gathering instance without facilities")

    @property
    def n(self) -> int:
        return len(self.users)

    @property
    def m(self) -> int:
        return len(self.facilities)

    def dist_uu(self, i, j):
        return abs(self.users[i] - self.users[j])

    def dist_uf(self, i, f):
        return abs(self.users[i] - self.facilities[f])

    def as_spider(self) -> SpiderInstance:
        return SpiderInstance.build(
            1, [(1, u) for u in self.users], [(1, f) for f in self.facilities], self.r, self.problem
        )


# ---------------------------------------------------------------------------
# tree
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TreeInstance:
    """A rooted weighted tree with users and facilities sitting on vertices.

    ``vertices`` maps a vertex id to ``(parent_id | None, edge_length)``;
    ``users``/``facilities`` are tuples of vertex ids (repeats allowed).
    """

    vertices: dict
    root: str
    users: tuple
    facilities: tuple
    r: int
    problem: str = CLUSTERING

    kind = "tree"

    def __post_init__(self):
        if self.problem not in PROBLEMS:
            raise ValidationError(f"unknown problem {self.problem!r}")
        if self.r < 1:
            raise ValidationError("r must be >= 1")
        if len(self.users) < self.r:
            raise ValidationError(f"n = {len(self.users)} users < r = {self.r}: no feasible solution")
        if self.root not in self.vertices:
            raise ValidationError(f"root {self.root!r} is not a vertex")
        roots = [v for v, (p, _) in self.vertices.items() if p is None]
        if roots != [self.root]:
            raise ValidationError(f"tree must have exactly one parentless vertex (the root), found {roots}")
        for v, (p, length) in self.vertices.items():
            if p is not None and p not in self.vertices:
                raise ValidationError(f"vertex {v!r} has unknown parent {p!r}")
            if Fraction(length) < 0:
                raise ValidationError(f"edge into {v!r} has negative length")
        for v in self.users + self.facilities:
            if v not in self.vertices:
                raise ValidationError(f"unknown vertex id {v!r}")
        if self.problem == GATHERING and not self.facilities:
            raise ValidationError("gathering instance without facilities")
        # acyclicity / connectivity: every vertex must reach the root
        object.__setattr__(self, "_index", _TreeIndex(self.vertices, self.root))

    @property
    def n(self) -> int:
        return len(self.users)

    @property
    def m(self) -> int:
        return len(self.facilities)

    def depth(self, v) -> Fraction:
        return self._index.depth[v]

    def lca(self, v, w):
        return self._index.lca(v, w)

    def dist_uu(self, i, j):
        return tree_distance(self, self.users[i], self.users[j])

    def dist_uf(self, i, f):
        return tree_distance(self, self.users[i], self.facilities[f])

    def children(self) -> dict:
        return self._index.children


class _TreeIndex:
    """Depths, children lists and binary-lifting tables for LCA queries."""

    def __init__(self, vertices, root):
        children = {v: [] for v in vertices}
        for v, (p, _) in vertices.items():
            if p is not None:
                children[p].append(v)
        depth = {root: Fraction(0)}
        level = {root: 0}
        order = [root]
        for v in order:
            for c in children[v]:
                depth[c] = depth[v] + Fraction(vertices[c][1])
                level[c] = level[v] + 1
                order.append(c)
        if len(order) != len(vertices):
            raise ValidationError("tree is disconnected or contains a cycle")
        self.children = children
        self.depth = depth
        self.level = level
        self.order = order
        up = [{v: (vertices[v][0] if vertices[v][0] is not None else v) for v in vertices}]
        span = 1
        while span < len(vertices):
            prev = up[-1]
            up.append({v: prev[prev[v]] for v in vertices})
            span *= 2
        self.up = up

    def lca(self, v, w):
        if self.level[v] < self.level[w]:
            v, w = w, v
        diff = self.level[v] - self.level[w]
        k = 0
        while diff:
            if diff & 1:
                v = self.up[k][v]
            diff >>= 1
            k += 1
        if v == w:
            return v
        for k in range(len(self.up) - 1, -1, -1):
            if self.up[k][v] != self.up[k][w]:
                v = self.up[k][v]
                w = self.up[k][w]
        return self.up[0][v]


def tree_distance(t: TreeInstance, v, w) -> Fraction:
    for z in (v, w):
        if z not in t.vertices:
            raise ValidationError(f"unknown vertex id {z!r}")
    a = t.lca(v, w)
    return t.depth(v) + t.depth(w) - 2 * t.depth(a)


# ---------------------------------------------------------------------------
# solutions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Clustering:
    """Disjoint clusters of 0-based user indices."""

    clusters: tuple

    @classmethod
    def of(cls, clusters) -> "Clustering":
        return cls(tuple(tuple(sorted(c)) for c in sorted(clusters, key=lambda c: min(c) if c else -1)))

    def labels(self, n: int) -> list:
        lab = [-1] * n
        for k, c in enumerate(self.clusters):
            for u in c:
                lab[u] = k
        return lab


@dataclass(frozen=True)
class Assignment:
    """``assigned[u]`` is the 0-based facility serving user ``u``."""

    assigned: tuple

    def loads(self) -> dict:
        out = {}
        for f in self.assigned:
            out[f] = out.get(f, 0) + 1
        return out

    def groups(self) -> list:
        by_f = {}
        for u, f in enumerate(self.assigned):
            by_f.setdefault(f, []).append(u)
        return [tuple(v) for _, v in sorted(by_f.items())]


Solution = Union[Clustering, Assignment]


def validate_clustering(inst, c: Clustering) -> None:
    seen = set()
    for k, cluster in enumerate(c.clusters):
        if len(cluster) < inst.r:
            raise ValidationError(
                f"cluster {k + 1} has {len(cluster)} users, fewer than r = {inst.r}"
            )
        for u in cluster:
            if not 0 <= u < inst.n:
                raise ValidationError(f"cluster {k + 1} references unknown user {u + 1}")
            if u in seen:
                raise ValidationError(f"not a partition: user {u + 1} appears in two clusters")
            seen.add(u)
    if len(seen) != inst.n:
        missing = sorted(set(range(inst.n)) - seen)
        raise ValidationError(f"not a partition: users {[u + 1 for u in missing]} are uncovered")


def validate_assignment(inst, a: Assignment) -> None:
    if len(a.assigned) != inst.n:
        raise ValidationError(
            f"assignment is not total: {len(a.assigned)} entries for {inst.n} users"
        )
    for u, f in enumerate(a.assigned):
        if not 0 <= f < inst.m:
            raise ValidationError(f"user {u + 1} assigned to unknown facility {f + 1}")
    bad = {f: k for f, k in a.loads().items() if k < inst.r}
    if bad:
        f, k = min(bad.items())
        raise ValidationError(
            f"facility {f + 1} serves {k} users, fewer than r = {inst.r}"
        )


def clustering_cost(inst, c: Clustering) -> Fraction:
    validate_clustering(inst, c)
    best = Fraction(0)
    for cluster in c.clusters:
        for a in range(len(cluster)):
            for b in range(a + 1, len(cluster)):
                d = inst.dist_uu(cluster[a], cluster[b])
                if d > best:
                    best = d
    return best


def gathering_cost(inst, a: Assignment) -> Fraction:
    validate_assignment(inst, a)
    return max((inst.dist_uf(u, f) for u, f in enumerate(a.assigned)), default=Fraction(0))


def solution_cost(inst, sol: Solution) -> Fraction:
    if isinstance(sol, Clustering):
        return clustering_cost(inst, sol)
    if isinstance(sol, Assignment):
        if inst.problem != GATHERING:
            raise ValidationError("assignments only apply to gathering instances")
        return gathering_cost(inst, sol)
    raise TypeError(f"unknown solution type {type(sol).__name__}")


def validate_solution(inst, sol: Solution) -> None:
    if inst.problem == CLUSTERING and not isinstance(sol, Clustering):
        raise ValidationError("clustering instances need a cluster solution")
    if inst.problem == GATHERING and not isinstance(sol, Assignment):
        raise ValidationError("gathering instances need an assignment solution")
    solution_cost(inst, sol)


def diameter(inst, users: Sequence[int]) -> Fraction:
    return max(
        (inst.dist_uu(a, b) for i, a in enumerate(users) for b in users[i + 1:]),
        default=Fraction(0),
    )
