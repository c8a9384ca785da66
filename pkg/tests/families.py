"""Seeded instance families shared by the test modules."""

import os
import random

from rgather.core import CLUSTERING, GATHERING
from rgather.generators import random_line, random_spider, random_tree

SLOW = os.environ.get("RGATHER_SLOW", "") not in ("", "0")


def spider_family(count, problem, seed=0, max_n=8, max_d=4, coord_max=20):
    """n <= 8, d <= 4, r in {2, 3}, integer coordinates <= 20."""
    rng = random.Random(f"spider-{problem}-{seed}")
    for _ in range(count):
        r = rng.choice((2, 3))
        n = rng.randint(r, max_n)
        d = rng.randint(1, max_d)
        m = rng.randint(1, 4) if problem == GATHERING else 0
        yield random_spider(n, d, r, rng, m=m, coord_max=coord_max, problem=problem)


def line_family(count, problem, seed=0, max_n=8, coord_max=20):
    rng = random.Random(f"line-{problem}-{seed}")
    for _ in range(count):
        r = rng.choice((1, 2, 3))
        n = rng.randint(r, max_n)
        m = rng.randint(1, 4) if problem == GATHERING else 0
        yield random_line(n, r, rng, m=m, coord_max=coord_max, problem=problem)


def tree_family(count, problem, seed=0, max_n=8, coord_max=20):
    rng = random.Random(f"tree-{problem}-{seed}")
    for _ in range(count):
        r = rng.choice((2, 3))
        n = rng.randint(r, max_n)
        m = rng.randint(1, 3) if problem == GATHERING else 0
        size = rng.randint(1, 8)
        yield random_tree(n, r, rng, m=m, coord_max=coord_max, size=size, problem=problem)


BOTH = (CLUSTERING, GATHERING)
