"""Arrears problem, its reduction to spider clustering, and 1-in-3 SAT gadgets.

An arrears instance has payment duties, each a list of ``(day, amount)``
options, and budgets ``(day, cap)``.  A choice picks one option per duty and
is feasible when, for every budget, the amounts due on or before its day sum
to at most its cap.
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass, field

from .brute import SearchGuard
from .core import CLUSTERING, GuardError, RGatherError, SpiderInstance, ValidationError

INT128_MAX = 2**127 - 1


# ---------------------------------------------------------------------------
# arrears
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ArrearsInstance:
    duties: tuple  # tuple of tuples of (day, amount)
    budgets: tuple  # tuple of (day, cap)

    def __post_init__(self):
        duties = tuple(tuple((int(a), int(p)) for a, p in d) for d in self.duties)
        budgets = tuple((int(b), int(q)) for b, q in self.budgets)
        object.__setattr__(self, "duties", duties)
        object.__setattr__(self, "budgets", budgets)
        for i, d in enumerate(duties):
            if not d:
                raise ValidationError(f"duty {i + 1} has no options")
            if any(p < 0 for _, p in d):
                raise ValidationError(f"duty {i + 1} has a negative amount")
        for (b1, q1), (b2, q2) in zip(budgets, budgets[1:]):
            if not (b1 < b2 and q1 < q2):
                raise ValidationError("budget days and caps must strictly increase")
        for v in itertools.chain.from_iterable(itertools.chain(itertools.chain.from_iterable(duties), budgets)):
            if abs(v) > INT128_MAX:
                raise ValidationError(f"value {v} does not fit a signed 128-bit integer")

    @property
    def n(self) -> int:
        return len(self.duties)

    @property
    def m(self) -> int:
        return len(self.budgets)

    @property
    def normalized(self) -> bool:
        """Options of every duty have strictly increasing days and amounts."""
        return all(a1 < a2 and p1 < p2 for d in self.duties for (a1, p1), (a2, p2) in zip(d, d[1:]))


def normalize_arrears(inst: ArrearsInstance) -> ArrearsInstance:
    """Equivalent instance with dominated options removed.

    An option with a later (or equal) day and a smaller (or equal) amount is
    never worse for any budget, so the survivors, sorted by day, have strictly
    increasing days and amounts.
    """
    duties = []
    for d in inst.duties:
        keep = []
        for a, p in sorted(set(d), key=lambda o: (-o[0], o[1])):
            if not keep or p < keep[-1][1]:
                keep.append((a, p))
        duties.append(tuple(reversed(keep)))
    return ArrearsInstance(tuple(duties), inst.budgets)


@dataclass(frozen=True)
class ArrearsChoice:
    """1-based option index per duty."""

    z: tuple


def _check_choice(inst: ArrearsInstance, choice: ArrearsChoice):
    if len(choice.z) != inst.n:
        raise ValidationError(f"choice has {len(choice.z)} entries for {inst.n} duties")
    for i, (d, z) in enumerate(zip(inst.duties, choice.z)):
        if not 1 <= z <= len(d):
            raise ValidationError(f"duty {i + 1}: option {z} out of range 1..{len(d)}")


def budget_loads(inst: ArrearsInstance, choice: ArrearsChoice) -> list:
    _check_choice(inst, choice)
    picked = [d[z - 1] for d, z in zip(inst.duties, choice.z)]
    return [sum(p for a, p in picked if a <= b) for b, _ in inst.budgets]


def verify_arrears(inst: ArrearsInstance, choice: ArrearsChoice) -> bool:
    return all(load <= q for load, (_, q) in zip(budget_loads(inst, choice), inst.budgets))


ARREARS_GUARD = SearchGuard(max_states=10_000_000)


def grouped_space(inst: ArrearsInstance) -> int:
    """Number of choices once identical duties are merged."""
    groups = {}
    for d in inst.duties:
        groups[d] = groups.get(d, 0) + 1
    size = 1
    for d, mult in groups.items():
        size *= math.comb(mult + len(d) - 1, len(d) - 1)
    return size


def brute_arrears(inst: ArrearsInstance, guard: SearchGuard = ARREARS_GUARD):
    """A verifying :class:`ArrearsChoice`, or ``None`` if there is none.

    Identical duties are grouped, so only how many of a group take each option
    matters.  The search prunes on budgets and refuses once it has visited
    more than ``guard.max_states`` nodes.
    """
    groups = {}
    for i, d in enumerate(inst.duties):
        groups.setdefault(d, []).append(i)
    keys = sorted(groups, key=lambda d: (min(a for a, _ in d), -max(p for _, p in d), d))
    visited = [0]

    budgets = inst.budgets
    nb = len(budgets)

    def contribution(d, counts):
        return [sum(c * p for (a, p), c in zip(d, counts) if a <= b) for b, _ in budgets]

    # cheapest and dearest possible remaining load per budget
    floor = [[0] * nb for _ in range(len(keys) + 1)]
    ceil = [[0] * nb for _ in range(len(keys) + 1)]
    for g in range(len(keys) - 1, -1, -1):
        d, mult = keys[g], len(groups[keys[g]])
        for j, (b, _) in enumerate(budgets):
            floor[g][j] = floor[g + 1][j] + mult * min(p if a <= b else 0 for a, p in d)
            ceil[g][j] = ceil[g + 1][j] + mult * max(p if a <= b else 0 for a, p in d)

    def distributions(mult, k):
        for cut in itertools.combinations(range(mult + k - 1), k - 1):
            prev, counts = -1, []
            for c in cut + (mult + k - 1,):
                counts.append(c - prev - 1)
                prev = c
            yield counts

    picks = [None] * len(keys)
    dead = set()  # (group, load) pairs already shown to fail

    def rec(g, load):
        visited[0] += 1
        if visited[0] > guard.max_states:
            guard.check(visited[0], "brute arrears (visited nodes)")
        for j in range(nb):
            if load[j] + floor[g][j] > budgets[j][1]:
                return False
        if g == len(keys):
            return True
        # a budget that can no longer overflow is forgotten (-1), so the memo merges more
        load = tuple(-1 if x < 0 or x + ceil[g][j] <= budgets[j][1] else x for j, x in enumerate(load))
        if (g, load) in dead:
            return False
        d = keys[g]
        for counts in distributions(len(groups[d]), len(d)):
            add = contribution(d, counts)
            picks[g] = counts
            if rec(g + 1, tuple(x if x < 0 else x + y for x, y in zip(load, add))):
                return True
        dead.add((g, load))
        return False

    if not rec(0, (0,) * nb):
        return None
    z = [0] * inst.n
    for d, counts in zip(keys, picks):
        members = iter(groups[d])
        for option, c in enumerate(counts, start=1):
            for _ in range(c):
                z[next(members)] = option
    choice = ArrearsChoice(tuple(z))
    assert verify_arrears(inst, choice)
    return choice


# ---------------------------------------------------------------------------
# arrears -> spider clustering
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SpiderReduction:
    instance: SpiderInstance
    threshold: int
    L: int
    r: int
    long_legs: tuple  # spider leg of each kept duty
    duties: tuple = ()  # original duty index (0-based) of each long leg
    free: tuple = ()  # duties with an option after the last budget day


def free_duties(inst: ArrearsInstance) -> tuple:
    """Duties that can pick an option no budget ever sees."""
    last = inst.budgets[-1][0] if inst.budgets else -math.inf
    return tuple(i for i, d in enumerate(inst.duties) if d[-1][0] > last)


def _kept(inst: ArrearsInstance):
    free = set(free_duties(inst))
    return [d for i, d in enumerate(inst.duties) if i not in free]


def _scale(inst: ArrearsInstance, kept):
    last_a = max((d[-1][0] for d in kept), default=0)
    bm = inst.budgets[-1][0] if inst.budgets else 0
    qm = inst.budgets[-1][1] if inst.budgets else 0
    L = max(last_a, bm) + 1
    r = max(max((d[-1][1] for d in kept), default=0), qm) + 1
    return L, r, qm


def reduced_spider_size(inst: ArrearsInstance) -> int:
    inst = normalize_arrears(inst)
    kept = _kept(inst)
    _, r, qm = _scale(inst, kept)
    return sum(2 * r - d[0][1] for d in kept) + qm + r


def reduce_arrears_to_spider(inst: ArrearsInstance, max_users: int = 1_000_000) -> SpiderReduction:
    """Clustering spider that is feasible at diameter ``2L`` iff ``inst`` is a YES instance.

    A duty with an option dated after the last budget is dropped first: it can
    always take that option at no cost, while its leg would still demand short
    legs for the payment.
    """
    if not inst.duties:
        raise ValidationError("arrears instance without duties")
    inst = normalize_arrears(inst)
    size = reduced_spider_size(inst)
    if size > max_users:
        raise GuardError(f"reduced spider would have {size} users (guard {max_users})", estimate=size)
    free = free_duties(inst)
    kept_idx = [i for i in range(inst.n) if i not in set(free)]
    kept = [inst.duties[i] for i in kept_idx]
    L, r, _ = _scale(inst, kept)
    users = []
    for leg, d in enumerate(kept, start=1):
        a_last, p_last = d[-1]
        users += [(leg, 4 * L - a_last + 1)] * r
        for (a, p), (_, p_next) in zip(d, d[1:]):
            users += [(leg, 2 * L - a)] * (p_next - p)
        users += [(leg, 2 * L - a_last)] * (r - p_last)
    leg = len(kept)
    prev_b, prev_q = 0, 0
    for b, q in inst.budgets:
        for _ in range(q - prev_q):
            leg += 1
            users.append((leg, prev_b + 1))
        prev_b, prev_q = b, q
    for _ in range(r):
        leg += 1
        users.append((leg, L))
    spider = SpiderInstance.build(leg, users, (), r, CLUSTERING)
    return SpiderReduction(spider, 2 * L, L, r, tuple(range(1, len(kept) + 1)), tuple(kept_idx), free)


def spider_feasible(red: SpiderReduction):
    """Decide the reduced instance exactly; returns the witness clustering or ``None``."""
    from .core import InfeasibleError
    from .fpt import solve_spider_fpt

    try:
        cost, witness = solve_spider_fpt(red.instance, upper_bound=red.threshold)
    except InfeasibleError:
        return None
    return witness if cost <= red.threshold else None


def audit_reduced_witness(red: SpiderReduction, witness) -> None:
    """Check the long-leg structure of a feasible clustering; raises on violation."""
    inst = red.instance
    long_legs = set(red.long_legs)
    for k, cluster in enumerate(witness.clusters):
        legs = {inst.users[u].leg for u in cluster} & long_legs
        if len(legs) > 1:
            raise RGatherError(f"cluster {k + 1} mixes long legs {sorted(legs)}")
    legs = inst.leg_users()
    for leg in red.long_legs:
        members = legs[leg]
        far = members[-1]
        ends = [c for c in witness.clusters if far in c]
        only = [c for c in witness.clusters if all(inst.users[u].leg == leg for u in c)]
        if len(ends) != 1 or only != ends:
            raise RGatherError(f"long leg {leg} does not have exactly one end cluster")


def choice_from_witness(inst: ArrearsInstance, red: SpiderReduction, witness) -> ArrearsChoice:
    """Read payment days off the end clusters of a feasible clustering."""
    spider = red.instance
    legs = spider.leg_users()
    z = [len(d) for d in inst.duties]
    for leg, i in zip(red.long_legs, red.duties):
        members = legs[leg]
        end = next(set(c) for c in witness.clusters if members[-1] in c)
        rest = [u for u in members if u not in end]
        day = 2 * red.L - spider.users[rest[-1]].x
        options = [(p, k) for k, (a, p) in enumerate(inst.duties[i], start=1) if a == day]
        if not options:
            raise RGatherError(f"long leg {leg}: border at day {day} matches no option")
        z[i] = min(options)[1]
    for i in red.free:
        last = inst.budgets[-1][0] if inst.budgets else -math.inf
        z[i] = next(k for k, (a, _) in enumerate(inst.duties[i], start=1) if a > last)
    return ArrearsChoice(tuple(z))


# ---------------------------------------------------------------------------
# 1-in-3 SAT -> arrears
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OneInThreeSat:
    n_vars: int
    clauses: tuple  # tuples of three non-zero ints, negative = negated

    def __post_init__(self):
        clauses = tuple(tuple(int(l) for l in c) for c in self.clauses)
        object.__setattr__(self, "clauses", clauses)
        if self.n_vars < 1:
            raise ValidationError("need at least one variable")
        for j, c in enumerate(clauses):
            if len(c) != 3:
                raise ValidationError(f"clause {j + 1} has {len(c)} literals, expected 3")
            for l in c:
                if l == 0 or abs(l) > self.n_vars:
                    raise ValidationError(f"clause {j + 1}: literal {l} out of range")

    @property
    def m(self) -> int:
        return len(self.clauses)

    def exactly_one(self, assignment) -> bool:
        def val(l):
            return assignment[abs(l) - 1] if l > 0 else not assignment[abs(l) - 1]

        return all(sum(val(l) for l in c) == 1 for c in self.clauses)

    def solutions(self):
        for bits in itertools.product((False, True), repeat=self.n_vars):
            if self.exactly_one(bits):
                yield bits

    def satisfiable(self) -> bool:
        return next(self.solutions(), None) is not None


@dataclass
class SatReductionParams:
    n: int
    m: int
    B: int
    N: int  # items per side per variable, 3m(m+2)+1
    K: list  # K_i
    Kbar: list
    R_i: list
    R: int
    labels: list  # per duty: (kind, i, j, k) or (kind, i, l)
    e: list  # per duty: digit vector (e4..e0) of the first amount
    f: list  # per budget: digit vector (f4..f0)
    T: list = field(default_factory=list)  # per variable: duty indices of T_i
    Tbar: list = field(default_factory=list)

    def Y(self, i: int) -> list:
        return self.T[i - 1] + self.Tbar[i - 1]


def _value(digits, B):
    v = 0
    for d in digits:
        v = v * B + d
    return v


def reduce_sat_to_arrears(sat: OneInThreeSat, max_size: int = 8, force: bool = False):
    """Two-option arrears instance that is YES iff ``sat`` is 1-in-3 satisfiable."""
    n, m = sat.n_vars, sat.m
    if m < 1:
        raise ValidationError("need at least one clause")
    if not force and (n > max_size or m > max_size):
        raise GuardError(f"n = {n}, m = {m} exceeds the guard n, m <= {max_size}", estimate=max(n, m))
    B = 100 * n * n * m * m
    N = 3 * m * (m + 2) + 1
    W = 3 * m * (m + 1) + 1
    labels, e, duties = [], [], []
    K, Kbar, T, Tbar = [], [], [], []

    def add(label, day2, digits):
        labels.append(label)
        e.append(tuple(digits))
        p = _value(digits, B)
        duties.append(((label[1], p), (day2, 2 * p)))
        return len(duties) - 1

    for i in range(1, n + 1):
        t_idx, tb_idx = [], []
        k_sum = kb_sum = 0
        for neg in (False, True):
            for j in range(1, m + 1):
                for k in range(1, 4):
                    lit = sat.clauses[j - 1][k - 1]
                    match = lit == (-i if neg else i)
                    extra = j + 1 if match else 0
                    day2 = n + 2 + j if match else n + 1
                    if neg:
                        kb_sum += extra
                        tb_idx.append(add(("ubar", i, j, k), day2, (1, 0, i, 0, extra)))
                    else:
                        k_sum += extra
                        t_idx.append(add(("u", i, j, k), day2, (1, 1, i, i, extra)))
        for l in range(1, W + 1):
            heavy = l <= W - 1 - k_sum
            t_idx.append(add(("w", i, l), n + 2 if heavy else n + 1, (1, 1, i, i, 1 if heavy else 0)))
        for l in range(1, W + 1):
            heavy = l <= W - 1 - kb_sum
            if l == W:
                digits = (1, N, i, i * N, 0)
            else:
                digits = (1, 0, i, 0, 1 if heavy else 0)
            tb_idx.append(add(("wbar", i, l), n + 2 if heavy else n + 1, digits))
        K.append(k_sum)
        Kbar.append(kb_sum)
        T.append(t_idx)
        Tbar.append(tb_idx)

    tri = n * (n + 1) // 2
    R_digits = (N * n, N * n, N * tri, N * tri, 3 * m * (m + 1) * n)
    R = _value(R_digits, B)
    R_i = [N * (B * B + i) * (B + 1) * B + 3 * m * (m + 1) for i in range(1, n + 1)]
    full = B - 1
    f = []
    for i in range(1, n + m + 3):
        if i <= n - 1:
            f.append((N * i, N * i, full, full, full))
        elif i == n:
            f.append(R_digits)
        elif i == n + 1:
            f.append((N * n + 6 * m * n + 2 * n + m * (m + 1), full, full, full, full))
        elif i <= n + m + 1:
            f.append((3 * N * n - 2 * (n + m + 2 - i), full, full, full, full))
        else:
            f.append(tuple(3 * x for x in R_digits))
    budgets = tuple((i, _value(fi, B)) for i, fi in enumerate(f, start=1))
    params = SatReductionParams(n, m, B, N, K, Kbar, R_i, R, labels, e, f, T, Tbar)
    check_sat_params(params, duties, budgets)
    return ArrearsInstance(tuple(duties), budgets), params


def check_sat_params(params: SatReductionParams, duties, budgets) -> None:
    """Digit and sum invariants of the construction; raises ``RGatherError``."""
    B, n, m = params.B, params.n, params.m
    for k in range(5):
        s = sum(2 * digits[k] for digits in params.e)
        if s >= B:
            raise RGatherError(f"carry in digit {4 - k}: sum {s} >= B = {B}")
    for digits in params.f:
        if any(not 0 <= d < B for d in digits):
            raise RGatherError(f"budget digit out of range: {digits}")
    for i in range(1, n + 1):
        for side in (params.T[i - 1], params.Tbar[i - 1]):
            total = sum(duties[y][0][1] for y in side)
            if total != params.R_i[i - 1]:
                raise RGatherError(f"variable {i}: item sum {total} != R_i = {params.R_i[i - 1]}")
        if params.K[i - 1] > 3 * m * (m + 1) or params.Kbar[i - 1] > 3 * m * (m + 1):
            raise RGatherError(f"variable {i}: K offset exceeds 3m(m+1)")
    if sum(params.R_i) != params.R:
        raise RGatherError("R differs from the sum of R_i")
    if 3 * params.R > INT128_MAX:
        raise RGatherError("3R does not fit a signed 128-bit integer")
    top = max([p for d in duties for _, p in d] + [q for _, q in budgets])
    if top > 3 * params.R:
        raise RGatherError(f"value {top} exceeds 3R")
    if len(duties) != n * (6 * m * (m + 2) + 2):
        raise RGatherError("unexpected item count")


def extract_sat_assignment(sat: OneInThreeSat, inst: ArrearsInstance, params: SatReductionParams, choice: ArrearsChoice):
    """Truth values from a verifying choice: ``x_i`` is true iff exactly ``T_i`` pays late."""
    if not verify_arrears(inst, choice):
        raise ValidationError("choice does not satisfy the budget constraints")
    late = {y for y, z in enumerate(choice.z) if z == 2}
    out = []
    for i in range(1, sat.n_vars + 1):
        out.append(late & set(params.Y(i)) == set(params.T[i - 1]))
    out = tuple(out)
    if not sat.exactly_one(out):
        raise RGatherError("extracted assignment is not a 1-in-3 solution")
    return out


# ---------------------------------------------------------------------------
# text formats
# ---------------------------------------------------------------------------

_PAIR = re.compile(r"^\((-?\d+),(-?\d+)\)$")


def parse_arrears(text: str) -> ArrearsInstance:
    from .io import ParseError, _records

    duties, budgets = [], []
    for lineno, tok in _records(text):
        if tok[0] == "duty":
            opts = []
            for t in tok[1:]:
                mt = _PAIR.match(t)
                if not mt:
                    raise ParseError(lineno, f"bad option {t!r}", "duty (a,p) (a,p) ...")
                opts.append((int(mt.group(1)), int(mt.group(2))))
            if not opts:
                raise ParseError(lineno, "duty without options", "duty (a,p) (a,p) ...")
            duties.append(tuple(opts))
        elif tok[0] == "budget":
            if len(tok) != 3 or not all(re.match(r"^-?\d+$", x) for x in tok[1:]):
                raise ParseError(lineno, "malformed budget", "budget <b> <q>")
            budgets.append((int(tok[1]), int(tok[2])))
        else:
            raise ParseError(lineno, f"unknown record {tok[0]!r}", "duty ... | budget <b> <q>")
    return ArrearsInstance(tuple(duties), tuple(budgets))


def emit_arrears(inst: ArrearsInstance) -> str:
    lines = ["duty " + " ".join(f"({a},{p})" for a, p in d) for d in inst.duties]
    lines += [f"budget {b} {q}" for b, q in inst.budgets]
    return "\n".join(lines) + "\n"


def parse_sat(text: str) -> OneInThreeSat:
    from .io import ParseError, _records

    clauses, n_vars = [], None
    for lineno, tok in _records(text):
        if tok[0] == "clause":
            if len(tok) != 4 or not all(re.match(r"^-?\d+$", x) for x in tok[1:]):
                raise ParseError(lineno, "malformed clause", "clause <l1> <l2> <l3>")
            clauses.append(tuple(int(x) for x in tok[1:]))
        elif tok[0] == "vars":
            if len(tok) != 2 or not tok[1].isdigit():
                raise ParseError(lineno, "malformed vars record", "vars <n>")
            n_vars = int(tok[1])
        else:
            raise ParseError(lineno, f"unknown record {tok[0]!r}", "clause <l1> <l2> <l3> | vars <n>")
    if n_vars is None:
        n_vars = max((abs(l) for c in clauses for l in c), default=0)
    return OneInThreeSat(n_vars, tuple(clauses))


def emit_sat(sat: OneInThreeSat) -> str:
    lines = [f"vars {sat.n_vars}"] + ["clause " + " ".join(map(str, c)) for c in sat.clauses]
    return "\n".join(lines) + "\n"
