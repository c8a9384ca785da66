from fractions import Fraction

import pytest

from families import BOTH, spider_family, tree_family
from rgather.brute import SearchGuard, bell, brute_clustering, brute_gathering, brute_solve
from rgather.core import (
    GATHERING,
    GuardError,
    LineInstance,
    SpiderInstance,
    TreeInstance,
    ValidationError,
    solution_cost,
    validate_solution,
)

F = Fraction

# brute-force optima frozen from the first run; seeds as in families.py
FROZEN = {
    ("spider", "clustering"): [7, 5, 6, 12, 32, 7, 15, 9, 19, 4, 4, 27],
    ("tree", "clustering"): [2, 38, 0, 24, 0, 6, 15, 32],
    ("spider", "gathering"): [20, 11, 34, 7, 26, 19, 3, 8, 2, 23, 9, 9],
    ("tree", "gathering"): [6, 11, 7, 0, 15, 28, 22, 30],
}


def test_bell_numbers():
    assert [bell(n) for n in range(7)] == [1, 1, 2, 5, 15, 52, 203]


def test_clustering_examples():
    four = SpiderInstance.build(2, [(1, 1), (1, 2), (2, 1), (2, 3)], r=2)
    assert brute_clustering(four)[0] == 2
    whole = SpiderInstance.build(2, [(1, 1), (1, 2), (2, 1), (2, 3)], r=4)
    assert brute_clustering(whole)[0] == 5
    same = LineInstance.build([3, 3, 3], r=2)
    assert brute_clustering(same)[0] == 0


def test_gathering_examples():
    users = [(1, 1), (1, 2), (2, 2)]
    one = SpiderInstance.build(2, users, [(2, 1)], r=2, problem=GATHERING)
    assert brute_gathering(one)[0] == 3
    two = SpiderInstance.build(2, users, [(1, 0), (1, F(3, 2))], r=3, problem=GATHERING)
    cost, sol = brute_gathering(two)
    assert cost == 2 and set(sol.assigned) == {0}


def test_infeasible_and_guard():
    with pytest.raises(ValidationError):
        SpiderInstance.build(1, [(1, 1)], r=1, problem=GATHERING)
    big = LineInstance.build(list(range(12)), r=2)
    with pytest.raises(GuardError):
        brute_solve(big)
    assert brute_solve(LineInstance.build(list(range(5)), r=2), SearchGuard(max_states=52))[0] == 2
    with pytest.raises(GuardError):
        brute_solve(LineInstance.build(list(range(5)), r=2), SearchGuard(max_states=51))


def test_frozen_values():
    for problem in BOTH:
        assert [brute_solve(i)[0] for i in spider_family(12, problem, seed=101)] == FROZEN["spider", problem]
        assert [brute_solve(i)[0] for i in tree_family(8, problem, seed=101)] == FROZEN["tree", problem]


def test_self_consistency_and_monotone_in_r():
    for problem in BOTH:
        for inst in spider_family(80, problem, seed=61, max_n=7):
            prev = None
            for r in (1, 2, 3):
                if inst.n < r:
                    break
                sub = SpiderInstance.build(
                    inst.d, [(p.leg, p.x) for p in inst.users], [(p.leg, p.x) for p in inst.facilities], r, problem
                )
                cost, sol = brute_solve(sub)
                validate_solution(sub, sol)
                assert solution_cost(sub, sol) == cost
                assert prev is None or cost >= prev
                prev = cost


def test_trees_self_consistent():
    for problem in BOTH:
        for inst in tree_family(40, problem, seed=62):
            cost, sol = brute_solve(inst)
            assert isinstance(inst, TreeInstance)
            assert solution_cost(inst, sol) == cost
