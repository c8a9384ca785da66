from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from families import BOTH, spider_family
from rgather.brute import brute_solve
from rgather.core import GATHERING, InfeasibleError, SpiderInstance, solution_cost, validate_solution
from rgather.ptas import (
    ProfileVector,
    PtasParams,
    PtasStats,
    _Counts,
    candidate_values,
    fill_table_R,
    fill_table_S,
    ptas_spider,
    round_spider,
    round_up,
    solve_oracle,
)

F = Fraction
FOUR = SpiderInstance.build(2, [(1, 1), (1, 2), (2, 1), (2, 3)], r=2)


def zero(K):
    return (0,) * (K + 1)


# -- parameters and profiles ---------------------------------------------------


def test_params():
    p = PtasParams.make(1, 6)
    assert (p.t, p.K) == (2, 5)
    p = PtasParams.make(F(1, 4), 12)
    assert p.t == 1 and p.K == 14
    with pytest.raises(ValueError):
        PtasParams.make(2, 1)
    with pytest.raises(ValueError):
        PtasParams.make(1, 0)


@given(st.fractions(min_value=F(1, 8), max_value=1), st.fractions(min_value=F(1, 100), max_value=100))
def test_params_bounds(eps, b):
    p = PtasParams.make(eps, b)
    assert 1 <= p.K <= 3 / eps + 2
    assert (p.K + 1) * p.t <= (1 + eps) * b


def test_profile_vector_shift():
    v = ProfileVector((1, 2, 0, 3))
    assert v.K == 3
    assert v.shift(1) == (0, 1, 2, 0) and v.overflows(1)
    assert v.shift(-1) == (2, 0, 3, 0) and v.overflows(-1)
    assert v.shift(0) == v and not v.overflows(0)
    assert ProfileVector.unit(3, 2, 4) == (0, 0, 4, 0)
    assert ProfileVector.zeros(2) == (0, 0, 0)
    assert v + v - v == v
    assert v.last_nonzero() == 3 and ProfileVector.zeros(3).last_nonzero() == -1
    with pytest.raises(ValueError):
        ProfileVector((1, -1))


@given(st.lists(st.integers(0, 5), min_size=1, max_size=8), st.integers(-9, 9))
def test_shift_keeps_length_and_mass_in_range(entries, k):
    v = ProfileVector(entries)
    s = v.shift(k)
    assert len(s) == len(v)
    kept = sum(e for j, e in enumerate(v) if 0 <= j + k < len(v))
    assert sum(s) == kept
    assert v.overflows(k) == (kept != sum(v))


# -- rounding ---------------------------------------------------------------------


def test_round_examples():
    assert round_up(F(0), F(2)) == 0
    assert round_up(F(3), F(2)) == 2
    assert round_up(F(4), F(2)) == 2
    rs = round_spider(FOUR, 2)
    assert rs.users == (1, 1, 1, 2)
    assert rs.distance((1, 1), (2, 2)) == 3 and rs.distance((1, 1), (1, 4)) == 3
    with pytest.raises(ValueError):
        round_spider(FOUR, 0)


def test_rounding_bounds_by_pair_type():
    # cross-leg pairs obey the two-sided bound; same-leg pairs can shrink by up to t
    for inst in spider_family(60, GATHERING, seed=17):
        pts = [p for p in inst.users + inst.facilities]
        for t in (F(1, 3), F(7, 4), F(5)):
            for p in pts:
                for q in pts:
                    dr = abs(round_up(p.x, t) - round_up(q.x, t)) if p.leg == q.leg else round_up(p.x, t) + round_up(q.x, t)
                    if p.leg == q.leg:
                        d = abs(p.x - q.x)
                        assert d - t <= dr * t <= d + t
                    else:
                        d = p.x + q.x
                        assert d <= dr * t <= d + 2 * t


# -- tables -------------------------------------------------------------------------


def test_table_R_examples():
    K = 4
    local = SpiderInstance.build(3, [(1, 1), (1, 1)], [(1, 1)], r=2, problem=GATHERING)
    rs = round_spider(local, 1)
    assert zero(K) + zero(K) in {a + b for a, b in fill_table_R(rs, 1, K)} or (zero(K), zero(K)) in fill_table_R(rs, 1, K)
    assert set(fill_table_R(rs, 3, K)) == {(zero(K), zero(K))}

    lone = SpiderInstance.build(2, [(1, 3)], [(2, 1)], r=1, problem=GATHERING)
    rs = round_spider(lone, 1)
    assert set(fill_table_R(rs, 1, K)) == {(ProfileVector.unit(K, 3), zero(K))}
    # a user beyond K can never be matched
    assert set(fill_table_R(rs, 1, 2)) == set()


def test_table_S_examples():
    K = 4
    one_leg = SpiderInstance.build(1, [(1, 1), (1, 2)], [(1, 1)], r=2, problem=GATHERING)
    rs = round_spider(one_leg, 1)
    R = {1: fill_table_R(rs, 1, K)}
    order, S = fill_table_S(rs, K, R)
    assert (zero(K), zero(K)) in S[0]
    assert ((zero(K), zero(K)) in S[1]) == ((zero(K), zero(K)) in R[1])

    two = SpiderInstance.build(2, [(1, 1), (1, 2), (2, 1), (2, 2)], [(1, 1), (2, 1)], r=2, problem=GATHERING)
    rs = round_spider(two, 1)
    counts = _Counts(rs)
    R = {leg: fill_table_R(rs, leg, K, counts=counts) for leg in (1, 2)}
    _, S = fill_table_S(rs, K, R)
    assert (zero(K), zero(K)) in S[2]


# -- oracle ---------------------------------------------------------------------------


def test_oracle_examples():
    res = solve_oracle(FOUR, 2, 1)
    assert res and res.cost <= 4
    validate_solution(FOUR, res.witness)
    far = SpiderInstance.build(2, [(1, 5), (1, 6)], [(2, 1)], r=2, problem=GATHERING)
    # NO is only forced once (1 + delta) b is below every user-facility distance
    assert not solve_oracle(far, 3, 1)
    assert solve_oracle(far, 5, 1).cost == 7  # inside the gap (5, 10]
    assert solve_oracle(far, 13, 1)
    with pytest.raises(ValueError):
        solve_oracle(FOUR, 0, 1)


def _grid(inst):
    cands = candidate_values(inst)
    return sorted(set(cands) | {c / 2 for c in cands} | {c * F(3, 2) for c in cands})


def test_oracle_sound_complete_monotone():
    for problem in BOTH:
        for inst in spider_family(40, problem, seed=41, max_n=6):
            opt, _ = brute_solve(inst)
            for delta in (F(1), F(1, 2)):
                answers = []
                for b in _grid(inst):
                    res = solve_oracle(inst, b, delta)
                    if opt <= b:
                        assert res, (inst, b, delta)
                    if res:
                        validate_solution(inst, res.witness)
                        assert res.cost == solution_cost(inst, res.witness) <= (1 + delta) * b
                    answers.append(bool(res))
                cand = [a for b, a in zip(_grid(inst), answers) if b in set(candidate_values(inst))]
                assert cand == sorted(cand), "YES must persist for larger candidates"


# -- full PTAS --------------------------------------------------------------------------


def test_ptas_examples():
    cost, witness = ptas_spider(FOUR, 1)
    assert 2 <= cost <= 4
    validate_solution(FOUR, witness)
    zero_inst = SpiderInstance.build(2, [(1, 3), (1, 3), (2, 4), (2, 4)], [(1, 3), (2, 4)], r=2, problem=GATHERING)
    assert ptas_spider(zero_inst, F(1, 2))[0] == 0
    with pytest.raises(ValueError):
        ptas_spider(FOUR, 0)


def test_ptas_infeasible_without_facilities():
    inst = SpiderInstance.build(2, [(1, 1), (2, 1)], r=2)
    object.__setattr__(inst, "problem", GATHERING)
    with pytest.raises(InfeasibleError):
        ptas_spider(inst, 1)


def test_linear_and_binary_scan_agree_on_bound():
    for problem in BOTH:
        for inst in spider_family(40, problem, seed=43, max_n=6):
            opt, _ = brute_solve(inst)
            stats = PtasStats()
            a, _ = ptas_spider(inst, F(1, 2), stats=stats)
            b, _ = ptas_spider(inst, F(1, 2), linear_scan=True)
            assert opt <= a <= F(3, 2) * opt and opt <= b <= F(3, 2) * opt
            assert stats.candidates == 0 or len(stats.oracle_calls) <= stats.candidates.bit_length() + 1
