from fractions import Fraction

import pytest

from families import BOTH, line_family, spider_family
from rgather.brute import brute_solve
from rgather.core import CLUSTERING, GATHERING, InfeasibleError, SpiderInstance, solution_cost, validate_solution
from rgather.fpt import (
    build_cost_table,
    candidate_pairs,
    cross_leg_cost_naive,
    enumerate_suffix_special,
    family_objective,
    solve_spider_fpt,
)
from rgather.line import build_suffix_tables, solve_line

F = Fraction
FOUR = SpiderInstance.build(2, [(1, 1), (1, 2), (2, 1), (2, 3)], r=2)


def test_cost_table_examples():
    inst = SpiderInstance.build(2, [(1, 2), (2, 3)], r=1)
    assert build_cost_table(inst, [(1, 0)]).cost(1, 0) == 5
    inst = SpiderInstance.build(3, [(1, 2), (2, 3)], [(3, 0)], r=1, problem=GATHERING)
    assert build_cost_table(inst, [(1, 0)]).cost(1, 0) == 3
    inst = SpiderInstance.build(1, [(1, 0), (1, 4)], [(1, 2)], r=1, problem=GATHERING)
    assert build_cost_table(inst, [(1, 0)]).cost(1, 0) == 2


def test_cost_table_matches_naive_scan():
    checked = 0
    for inst in spider_family(300, GATHERING, seed=12, max_n=8):
        table = build_cost_table(inst)
        for v, u in candidate_pairs(inst):
            assert table.cost(v, u) == cross_leg_cost_naive(inst, v, u)[0]
            checked += 1
    assert checked > 1000


def test_fpt_examples():
    cost, sol = solve_spider_fpt(FOUR)
    assert cost == 2
    validate_solution(FOUR, sol)
    same = SpiderInstance.build(3, [(2, 5)] * 3, r=3)
    assert solve_spider_fpt(same)[0] == 0


def test_fpt_on_single_leg_equals_line():
    for problem in BOTH:
        for inst in line_family(100, problem, seed=8):
            assert solve_spider_fpt(inst.as_spider())[0] == solve_line(inst)[0]


def test_witnesses_validate_and_keep_structure():
    for problem in BOTH:
        for inst in spider_family(150, problem, seed=21):
            cost, witness, stats = solve_spider_fpt(inst, return_stats=True)
            validate_solution(inst, witness)
            assert solution_cost(inst, witness) == cost == brute_solve(inst)[0]
            groups = witness.clusters if problem == CLUSTERING else [g for g, _ in stats["groups"]]
            for g in groups:
                if len({inst.users[u].leg for u in g}) > 1:
                    assert inst.r <= len(g) <= 2 * inst.r - 1


def test_upper_bound_prunes_to_infeasible():
    cost, _ = solve_spider_fpt(FOUR, upper_bound=2)
    assert cost == 2
    with pytest.raises(InfeasibleError):
        solve_spider_fpt(FOUR, upper_bound=1)


# -- suffix-special enumerator ---------------------------------------------


def test_enumerator_trivial_cases():
    one_leg = SpiderInstance.build(2, [(1, 1), (1, 2), (1, 4)], r=2)
    fams = list(enumerate_suffix_special(one_leg))
    assert fams and all(not f.clusters for f in fams)


def test_enumerator_four_user_example():
    tables = build_suffix_tables(FOUR)
    assert min(family_objective(FOUR, f, tables) for f in enumerate_suffix_special(FOUR)) == 2


def test_enumerator_equals_fpt():
    for problem in BOTH:
        for inst in spider_family(80, problem, seed=31, max_n=7):
            tables = build_suffix_tables(inst)
            best = min((family_objective(inst, f, tables) for f in enumerate_suffix_special(inst)), default=None)
            try:
                cost = solve_spider_fpt(inst)[0]
            except InfeasibleError:
                assert best is None or best == float("inf")
                continue
            assert best == cost
