import itertools

import pytest

from rgather.brute import SearchGuard
from rgather.core import GuardError, ValidationError
from rgather.hardness import (
    INT128_MAX,
    ArrearsChoice,
    ArrearsInstance,
    OneInThreeSat,
    audit_reduced_witness,
    brute_arrears,
    check_sat_params,
    choice_from_witness,
    emit_arrears,
    emit_sat,
    extract_sat_assignment,
    normalize_arrears,
    parse_arrears,
    parse_sat,
    reduce_arrears_to_spider,
    reduce_sat_to_arrears,
    spider_feasible,
    verify_arrears,
)
from rgather.generators import random_arrears
from rgather.io import ParseError


def A(duties, budgets):
    return ArrearsInstance(tuple(map(tuple, duties)), tuple(budgets))


# -- arrears ------------------------------------------------------------------


def test_verify_examples():
    assert verify_arrears(A([[(1, 1)]], [(1, 1)]), ArrearsChoice((1,)))
    inst = A([[(1, 2), (2, 1)]], [(1, 1), (2, 3)])
    assert not verify_arrears(inst, ArrearsChoice((1,)))
    assert verify_arrears(inst, ArrearsChoice((2,)))
    assert verify_arrears(A([[(1, 5)]], []), ArrearsChoice((1,)))
    with pytest.raises(ValidationError):
        verify_arrears(inst, ArrearsChoice((3,)))


def test_brute_examples():
    assert brute_arrears(A([[(1, 1)]], [(1, 1)])) == ArrearsChoice((1,))
    assert brute_arrears(A([[(1, 2), (2, 1)]], [(1, 1), (2, 3)])) == ArrearsChoice((2,))
    assert brute_arrears(A([[(1, 2)], [(1, 2)]], [(1, 3)])) is None


def test_instance_validation():
    with pytest.raises(ValidationError):
        A([[]], [])
    with pytest.raises(ValidationError):
        A([[(1, -1)]], [])
    with pytest.raises(ValidationError):
        A([[(1, 1)]], [(2, 1), (1, 2)])
    with pytest.raises(ValidationError):
        A([[(1, INT128_MAX + 1)]], [])


def test_normalize_drops_dominated_options():
    inst = A([[(1, 3), (2, 5), (4, 1), (3, 2)]], [(1, 1)])
    norm = normalize_arrears(inst)
    assert norm.duties == (((4, 1),),)
    assert norm.normalized and not inst.normalized


def test_brute_agrees_with_exhaustive_choices():
    for seed in range(150):
        inst = random_arrears(seed)
        found = brute_arrears(inst)
        every = itertools.product(*(range(1, len(d) + 1) for d in inst.duties))
        exists = any(verify_arrears(inst, ArrearsChoice(z)) for z in every)
        assert (found is not None) == exists
        if found is not None:
            assert verify_arrears(inst, found)


def test_brute_guard():
    inst, _ = reduce_sat_to_arrears(OneInThreeSat(1, ((1, 1, -1),)))
    with pytest.raises(GuardError):
        brute_arrears(inst, SearchGuard(max_states=5))


# -- arrears -> spider ------------------------------------------------------------


def test_reduce_example():
    red = reduce_arrears_to_spider(A([[(1, 1)]], [(1, 1)]))
    assert (red.L, red.r, red.threshold) == (2, 2, 4)
    legs = red.instance.leg_users()
    assert len(legs[1]) == 3
    assert red.instance.d == 1 + 1 + 2
    witness = spider_feasible(red)
    assert witness is not None
    audit_reduced_witness(red, witness)


def test_reduce_leg_counts():
    for seed in range(40):
        inst = normalize_arrears(random_arrears(seed))
        red = reduce_arrears_to_spider(inst)
        kept = inst.n - len(red.free)
        assert len(red.long_legs) == kept
        assert red.instance.d == kept + inst.budgets[-1][1] + red.r


def test_reduction_preserves_answer_and_witness():
    for seed in range(60):
        inst = random_arrears(seed)
        red = reduce_arrears_to_spider(inst)
        witness = spider_feasible(red)
        assert (witness is not None) == (brute_arrears(inst) is not None)
        if witness is not None:
            audit_reduced_witness(red, witness)
            assert verify_arrears(inst, choice_from_witness(inst, red, witness))


def test_reduce_guard():
    with pytest.raises(GuardError):
        reduce_arrears_to_spider(A([[(1, 10**6)]], [(1, 10**6)]), max_users=1000)
    with pytest.raises(ValidationError):
        reduce_arrears_to_spider(A([], [(1, 1)]))


# -- 1-in-3 SAT -> arrears ------------------------------------------------------------


def test_sat_n1_m1_counts():
    sat = OneInThreeSat(1, ((1, 1, -1),))
    inst, params = reduce_sat_to_arrears(sat)
    assert inst.n == 20 and inst.m == 4 and params.B == 100
    assert all(len(d) == 2 for d in inst.duties)
    check_sat_params(params, inst.duties, inst.budgets)


def test_sat_params_invariants():
    for sat in (
        OneInThreeSat(2, ((1, -2, 2),)),
        OneInThreeSat(2, ((1, 2, -1), (-2, -2, 1))),
        OneInThreeSat(3, ((1, 2, 3), (-1, -2, -3))),
    ):
        inst, params = reduce_sat_to_arrears(sat)
        check_sat_params(params, inst.duties, inst.budgets)
        assert inst.n == sat.n_vars * (6 * sat.m * (sat.m + 2) + 2)
        for i in range(sat.n_vars):
            assert sum(inst.duties[y][0][1] for y in params.T[i]) == params.R_i[i]
            assert sum(inst.duties[y][0][1] for y in params.Tbar[i]) == params.R_i[i]
        top = max(p for d in inst.duties for _, p in d)
        assert max(top, inst.budgets[-1][1]) <= 3 * params.R < INT128_MAX


def test_sat_yes_instance_round_trips():
    sat = OneInThreeSat(1, ((1, 1, -1),))
    assert sat.satisfiable()
    inst, params = reduce_sat_to_arrears(sat)
    choice = brute_arrears(inst)
    assert choice is not None
    assert extract_sat_assignment(sat, inst, params, choice) == (False,)
    # every duty on its first option pays both halves in period 1
    assert not verify_arrears(inst, ArrearsChoice((1,) * inst.n))


def test_sat_no_instance():
    sat = OneInThreeSat(1, ((1, 1, 1),))
    assert not sat.satisfiable()
    inst, _ = reduce_sat_to_arrears(sat)
    assert brute_arrears(inst) is None


def test_extract_rejects_bad_choice():
    sat = OneInThreeSat(1, ((1, 1, -1),))
    inst, params = reduce_sat_to_arrears(sat)
    with pytest.raises(ValidationError):
        extract_sat_assignment(sat, inst, params, ArrearsChoice((1,) * inst.n))


def test_sat_guards_and_validation():
    with pytest.raises(GuardError):
        reduce_sat_to_arrears(OneInThreeSat(9, ((1, 2, 3),)))
    with pytest.raises(ValidationError):
        OneInThreeSat(1, ((1, 2, 1),))
    with pytest.raises(ValidationError):
        OneInThreeSat(1, ((1, 1),))
    with pytest.raises(ValidationError):
        reduce_sat_to_arrears(OneInThreeSat(1, ()))


# -- formats -----------------------------------------------------------------------------


def test_arrears_format_round_trip():
    for seed in range(30):
        inst = random_arrears(seed)
        assert parse_arrears(emit_arrears(inst)) == inst
    with pytest.raises(ParseError):
        parse_arrears("duty (1,2) 3\n")
    with pytest.raises(ParseError):
        parse_arrears("budget 1\n")


def test_sat_format_round_trip():
    sat = OneInThreeSat(3, ((1, -2, 3), (-1, -1, 2)))
    assert parse_sat(emit_sat(sat)) == sat
    assert parse_sat("clause 1 2 -2\n").n_vars == 2
    with pytest.raises(ParseError):
        parse_sat("clause 1 2\n")
