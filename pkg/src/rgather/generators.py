"""Seeded random instances for tests, benchmarks and the ``gen`` command."""

from __future__ import annotations

import random

from .core import CLUSTERING, GATHERING, LineInstance, SpiderInstance, TreeInstance, ValidationError
from .hardness import ArrearsInstance


def _rng(seed):
    return seed if isinstance(seed, random.Random) else random.Random(seed)


def _check(n, r):
    if r < 1:
        raise ValidationError("r must be >= 1")
    if n < r:
        raise ValidationError(f"n = {n} < r = {r}")


def random_spider(n, d, r, seed=0, m=0, coord_max=20, problem=None) -> SpiderInstance:
    """``n`` users (and ``m`` facilities) with integer positions in ``[0, coord_max]``."""
    _check(n, r)
    rng = _rng(seed)
    users = [(rng.randint(1, d), rng.randint(0, coord_max)) for _ in range(n)]
    facilities = [(rng.randint(1, d), rng.randint(0, coord_max)) for _ in range(m)]
    if problem is None:
        problem = GATHERING if m else CLUSTERING
    return SpiderInstance.build(d, users, facilities, r, problem)


def random_line(n, r, seed=0, m=0, coord_max=20, problem=None) -> LineInstance:
    _check(n, r)
    rng = _rng(seed)
    users = [rng.randint(0, coord_max) for _ in range(n)]
    facilities = [rng.randint(0, coord_max) for _ in range(m)]
    if problem is None:
        problem = GATHERING if m else CLUSTERING
    return LineInstance.build(users, facilities, r, problem)


def random_tree(n, r, seed=0, m=0, coord_max=20, size=None, problem=None) -> TreeInstance:
    """Random recursive tree on ``size`` vertices (default ``n + m``), edge lengths in ``[0, coord_max]``."""
    _check(n, r)
    rng = _rng(seed)
    size = size or max(1, n + m)
    vertices = {"v0": (None, 0)}
    for k in range(1, size):
        vertices[f"v{k}"] = (f"v{rng.randrange(k)}", rng.randint(0, coord_max))
    ids = list(vertices)
    users = tuple(rng.choice(ids) for _ in range(n))
    facilities = tuple(rng.choice(ids) for _ in range(m))
    if problem is None:
        problem = GATHERING if m else CLUSTERING
    return TreeInstance(vertices, "v0", users, facilities, r, problem)


def random_arrears(seed=0, max_value=6, max_duties=3, max_options=2, max_budgets=2) -> ArrearsInstance:
    """Small arrears instance: days and amounts drawn from ``[1, max_value]``, caps from ``[0, max_value]``."""
    rng = _rng(seed)
    duties = []
    for _ in range(rng.randint(1, max_duties)):
        k = rng.randint(1, min(max_options, max_value))
        days = sorted(rng.sample(range(1, max_value + 1), k))
        amounts = sorted(rng.sample(range(1, max_value + 1), k))
        duties.append(tuple(zip(days, amounts)))
    k = rng.randint(1, min(max_budgets, max_value))
    days = sorted(rng.sample(range(1, max_value + 1), k))
    caps = sorted(rng.sample(range(0, max_value + 1), k))
    return ArrearsInstance(tuple(duties), tuple(zip(days, caps)))
