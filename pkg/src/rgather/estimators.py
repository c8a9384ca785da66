"""scikit-learn style wrappers around the spider and line solvers.

``X`` holds one user per row: ``(leg, x)`` for spiders, ``(x,)`` for lines.
Float entries are converted to the exact binary fraction they store, so
``0.1`` becomes ``3602879701896397/36028797018963968``; pass ints, Fractions or
object arrays for exact input.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .brute import brute_solve
from .core import (
    CLUSTERING,
    GATHERING,
    Assignment,
    LineInstance,
    SpiderInstance,
    SpiderPoint,
    ValidationError,
    _canonical_spider_points,
    solution_cost,
    spider_distance,
)
from .fpt import solve_spider_fpt
from .line import solve_line
from .ptas import ptas_spider

_ALGORITHMS = ("fpt", "ptas", "brute")


def _exact(v):
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if not np.isfinite(v):
            raise ValidationError(f"non-finite coordinate {v}")
        return Fraction(v)
    if isinstance(v, np.integer):
        v = int(v)  # numpy ints would overflow inside Fraction arithmetic
    return Fraction(v)


def _points(X, n_columns, what="X"):
    if n_columns == 1 and np.ndim(X) == 1:
        X = np.asarray(X, dtype=object).reshape(-1, 1)
    X = check_array(X, dtype=None, ensure_all_finite=False, ensure_min_samples=0)
    if X.shape[1] != n_columns:
        raise ValueError(f"{what} has {X.shape[1]} columns, expected {n_columns}")
    if n_columns == 1:
        return [_exact(row[0]) for row in X]
    out = []
    for row in X:
        leg = _exact(row[0])
        if leg.denominator != 1 or leg < 1:
            raise ValueError(f"leg index must be a positive integer, got {row[0]!r}")
        out.append((int(leg), _exact(row[1])))
    return out


class _RGatherBase(ClusterMixin, BaseEstimator):
    _n_columns = 2

    def _instance(self, users, facilities, problem):
        raise NotImplementedError

    def _solve(self, inst):
        raise NotImplementedError

    def _facility_order(self, facilities):
        return list(range(len(facilities)))

    def fit(self, X, y=None):
        """Solve the instance given by the rows of ``X``; sets ``labels_`` and ``cost_``."""
        users = _points(X, self._n_columns)
        facilities = []
        if self.facilities is not None:
            facilities = _points(self.facilities, self._n_columns, "facilities")
        problem = GATHERING if facilities else CLUSTERING
        if self.r < 1:
            raise ValueError(f"r must be >= 1, got {self.r}")
        inst = self._instance(users, facilities, problem)
        cost, sol = self._solve(inst)
        n = inst.n
        order = inst.input_order  # canonical position -> input row
        if isinstance(sol, Assignment):
            fac_input = self._facility_order(facilities)
            canon = [fac_input[f] for f in sol.assigned]
        else:
            canon = sol.labels(n)
        labels = np.empty(n, dtype=int)
        for pos, row in enumerate(order):
            labels[row] = canon[pos]
        self.instance_ = inst
        self.solution_ = sol
        self.cost_ = solution_cost(inst, sol)
        self.labels_ = labels
        self.n_features_in_ = self._n_columns
        self.users_ = users
        return self

    def predict(self, X):
        """Label of the nearest fitted user for each row of ``X``."""
        check_is_fitted(self, "labels_")
        pts = _points(X, self._n_columns)
        out = np.empty(len(pts), dtype=int)
        for i, p in enumerate(pts):
            best = min(range(len(self.users_)), key=lambda u: (self._dist(p, self.users_[u]), u))
            out[i] = self.labels_[best]
        return out


class SpiderRGather(_RGatherBase):
    """Min-max r-gather on a spider.

    Without ``facilities`` the clustering problem is solved (labels are
    cluster ids); with ``facilities`` rows ``(leg, x)`` the gathering problem
    is solved and labels are facility row indices.
    """

    def __init__(self, r=2, algorithm="fpt", epsilon=1, facilities=None, n_legs=None):
        self.r = r
        self.algorithm = algorithm
        self.epsilon = epsilon
        self.facilities = facilities
        self.n_legs = n_legs

    def _instance(self, users, facilities, problem):
        d = self.n_legs or max([leg for leg, _ in users + facilities], default=1)
        return SpiderInstance.build(d, users, facilities, self.r, problem)

    def _facility_order(self, facilities):
        _, order = _canonical_spider_points(facilities)
        return order

    def _solve(self, inst):
        if self.algorithm not in _ALGORITHMS:
            raise ValueError(f"algorithm must be one of {_ALGORITHMS}, got {self.algorithm!r}")
        if self.algorithm == "fpt":
            return solve_spider_fpt(inst)
        if self.algorithm == "ptas":
            return ptas_spider(inst, Fraction(self.epsilon))
        return brute_solve(inst)

    def _dist(self, p, q):
        a = SpiderPoint(*p) if p[1] != 0 else SpiderPoint(1, 0)
        b = SpiderPoint(*q) if q[1] != 0 else SpiderPoint(1, 0)
        return spider_distance(a, b)


class LineRGather(_RGatherBase):
    """Min-max r-gather on a line; ``X`` has a single column."""

    _n_columns = 1

    def __init__(self, r=2, facilities=None):
        self.r = r
        self.facilities = facilities

    def _instance(self, users, facilities, problem):
        return LineInstance.build(users, facilities, self.r, problem)

    def _facility_order(self, facilities):
        return sorted(range(len(facilities)), key=lambda i: (facilities[i], i))

    def _solve(self, inst):
        return solve_line(inst)

    def _dist(self, p, q):
        return abs(p - q)
