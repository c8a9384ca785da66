"""``rgather`` command line: solve, gen, reduce, verify, bench.

Exit codes: 0 ok, 1 usage or parse error, 2 infeasible or rejected, 3 guard refusal.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import itertools
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path

from .brute import SearchGuard, brute_solve
from .core import (
    CLUSTERING,
    GATHERING,
    GuardError,
    InfeasibleError,
    RGatherError,
    ValidationError,
    format_coord,
    solution_cost,
    validate_solution,
)
from .fpt import solve_spider_fpt
from .generators import random_line, random_spider, random_tree
from .hardness import (
    emit_arrears,
    parse_arrears,
    parse_sat,
    reduce_arrears_to_spider,
    reduce_sat_to_arrears,
)
from .io import emit_instance, emit_solution, parse_instance, parse_rational, parse_solution
from .line import solve_line
from .ptas import PtasStats, ptas_spider
from .tree_ptas import ptas_tree

EXIT_OK, EXIT_USAGE, EXIT_INFEASIBLE, EXIT_GUARD = 0, 1, 2, 3

ALGOS = ("line", "fpt", "ptas", "tree-ptas", "brute")
KIND_OF_ALGO = {"line": "line", "fpt": "spider", "ptas": "spider", "tree-ptas": "tree", "brute": None}
BRUTE_MAX_N = 10
SAT_MAX = 8
SPIDER_MAX_USERS = 1_000_000

BENCH_FIELDS = ["instance", "algorithm", "n", "m", "d", "r", "epsilon", "cost", "wall_ns", "candidates", "status"]


class UsageError(Exception):
    pass


def _forced(args) -> bool:
    env = os.environ.get("RGATHER_GUARD_OVERRIDE", "")
    return bool(getattr(args, "force", False)) or env not in ("", "0")


def _read(path):
    if path in (None, "-"):
        return sys.stdin.read()
    return Path(path).read_text()


def _write(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


# ---------------------------------------------------------------------------
# solving
# ---------------------------------------------------------------------------


def prepare(inst, problem=None, r=None):
    changes = {}
    if problem is not None and problem != inst.problem:
        changes["problem"] = problem
    if r is not None and r != inst.r:
        changes["r"] = r
    return dataclasses.replace(inst, **changes) if changes else inst


def check_compatible(inst, algo):
    want = KIND_OF_ALGO[algo]
    if want is not None and inst.kind != want:
        raise UsageError(f"algorithm {algo!r} needs a {want} instance, got {inst.kind}")


def run_algorithm(inst, algo, epsilon=None, force=False, stats=None):
    """``(cost, witness)`` for one algorithm; raises on refusal or infeasibility."""
    check_compatible(inst, algo)
    if algo in ("ptas", "tree-ptas") and epsilon is None:
        raise UsageError(f"{algo} needs --epsilon")
    if algo == "line":
        cost, sol = solve_line(inst)
    elif algo == "fpt":
        cost, sol = solve_spider_fpt(inst)
    elif algo == "ptas":
        cost, sol = ptas_spider(inst, epsilon, stats=stats)
    elif algo == "tree-ptas":
        cost, sol = ptas_tree(inst, epsilon, stats=stats)
    else:
        if inst.n > BRUTE_MAX_N and not force:
            raise GuardError(f"brute force refuses n = {inst.n} > {BRUTE_MAX_N} (use --force)", estimate=inst.n)
        guard = SearchGuard(max_states=10**18) if force else SearchGuard()
        cost, sol = brute_solve(inst, guard)
    validate_solution(inst, sol)
    return solution_cost(inst, sol), sol


def cmd_solve(args) -> int:
    inst = prepare(parse_instance(_read(args.input)), args.problem, args.r)
    epsilon = parse_rational(args.epsilon) if args.epsilon is not None else None
    t0 = time.perf_counter()
    try:
        cost, sol = run_algorithm(inst, args.algo, epsilon, force=_forced(args))
    except InfeasibleError as e:
        print(f"infeasible - {time.perf_counter() - t0:.6f}")
        print(str(e), file=sys.stderr)
        return EXIT_INFEASIBLE
    except GuardError as e:
        print(f"refused - {time.perf_counter() - t0:.6f}")
        print(f"{e} (estimate {e.estimate})", file=sys.stderr)
        return EXIT_GUARD
    elapsed = time.perf_counter() - t0
    if args.output:
        _write(args.output, emit_solution(sol))
    else:
        sys.stdout.write(emit_solution(sol))
    print(f"ok {format_coord(cost)} {elapsed:.6f}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# gen / reduce / verify
# ---------------------------------------------------------------------------


def generate(kind, n, r, seed, m=0, d=3, coord_max=20, problem=None):
    if n < r:
        raise UsageError(f"n = {n} < r = {r}")
    if kind == "random-spider":
        return random_spider(n, d, r, seed, m=m, coord_max=coord_max, problem=problem)
    if kind == "random-line":
        return random_line(n, r, seed, m=m, coord_max=coord_max, problem=problem)
    if kind == "random-tree":
        return random_tree(n, r, seed, m=m, coord_max=coord_max, problem=problem)
    raise UsageError(f"unknown kind {kind!r}")


def cmd_gen(args) -> int:
    inst = generate(args.kind, args.n, args.r, args.seed, args.m, args.d, args.coord_max, args.problem)
    _write(args.output, emit_instance(inst))
    return EXIT_OK


def _params_text(pairs):
    return "".join(f"{k} {v}\n" for k, v in pairs)


def cmd_reduce(args) -> int:
    force = _forced(args)
    try:
        if args.which == "sat-to-arrears":
            sat = parse_sat(_read(args.input))
            inst, params = reduce_sat_to_arrears(sat, max_size=SAT_MAX, force=force)
            out = emit_arrears(inst)
            side = [("n", params.n), ("m", params.m), ("B", params.B), ("N", params.N), ("R", params.R)]
            side += [("R_i", " ".join(map(str, params.R_i)))]
        else:
            arrears = parse_arrears(_read(args.input))
            limit = 10**18 if force else SPIDER_MAX_USERS
            red = reduce_arrears_to_spider(arrears, max_users=limit)
            out = emit_instance(red.instance)
            side = [("L", red.L), ("r", red.r), ("threshold", red.threshold)]
            side += [("long-legs", " ".join(map(str, red.long_legs)) or "-")]
            side += [("free-duties", " ".join(str(i + 1) for i in red.free) or "-")]
    except GuardError as e:
        print(f"refused: {e} (estimate {e.estimate})", file=sys.stderr)
        return EXIT_GUARD
    _write(args.output, out)
    params_path = args.params or (f"{args.output}.params" if args.output not in (None, "-") else None)
    if params_path:
        Path(params_path).write_text(_params_text(side))
    else:
        sys.stderr.write(_params_text(side))
    return EXIT_OK


def cmd_verify(args) -> int:
    inst = parse_instance(_read(args.input))
    sol = parse_solution(_read(args.solution))
    try:
        validate_solution(inst, sol)
    except ValidationError as e:
        print(f"invalid: {e}")
        return EXIT_INFEASIBLE
    cost = solution_cost(inst, sol)
    if args.max_cost is not None:
        bound = parse_rational(args.max_cost)
        if cost > bound:
            print(f"invalid: cost {format_coord(cost)} exceeds max-cost {format_coord(bound)}")
            return EXIT_INFEASIBLE
    print(f"ok {format_coord(cost)}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# bench
# ---------------------------------------------------------------------------


def _rat(x) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def bench_jobs(args):
    """Sweep points in a fixed order: (kind, n, d, r, seed, algo, epsilon)."""
    jobs = []
    for n, d, r, seed, algo in itertools.product(args.n, args.d, args.r, args.seeds, args.algos):
        epsilons = args.epsilon if algo in ("ptas", "tree-ptas") else [None]
        for eps in epsilons:
            jobs.append((args.kind, n, d, r, seed, args.m, args.coord_max, args.problem, algo, eps, _forced(args)))
    return jobs


def bench_row(job) -> dict:
    kind, n, d, r, seed, m, coord_max, problem, algo, eps, force = job
    shape = "spider" if kind == "random-spider" else kind.split("-")[1]
    row = dict.fromkeys(BENCH_FIELDS, "")
    row.update(
        instance=f"{shape}-n{n}-m{m}-d{d}-r{r}-s{seed}",
        algorithm=algo,
        n=n,
        m=m,
        d=d if kind == "random-spider" else "",
        r=r,
        epsilon="" if eps is None else _rat(eps),
    )
    stats = PtasStats()
    try:
        inst = generate(kind, n, r, seed, m, d, coord_max, problem)
        t0 = time.perf_counter_ns()
        cost, _ = run_algorithm(inst, algo, None if eps is None else Fraction(eps), force=force, stats=stats)
        row["wall_ns"] = time.perf_counter_ns() - t0
        row["cost"] = _rat(cost)
        row["status"] = "ok"
        if algo in ("ptas", "tree-ptas"):
            row["candidates"] = stats.candidates
    except InfeasibleError:
        row["status"] = "infeasible"
    except GuardError:
        row["status"] = "refused"
    except UsageError:
        row["status"] = "incompatible"
    except RGatherError as e:
        row["status"] = f"error: {e}"
    return row


def cmd_bench(args) -> int:
    jobs = bench_jobs(args)
    handle = sys.stdout if args.output in (None, "-") else open(args.output, "w", newline="")
    try:
        writer = csv.DictWriter(handle, fieldnames=BENCH_FIELDS)
        writer.writeheader()
        if args.workers > 1 and len(jobs) > 1:
            with ProcessPoolExecutor(max_workers=args.workers) as pool:
                rows = pool.map(bench_row, jobs)
                for row in rows:
                    writer.writerow(row)
        else:
            for job in jobs:
                writer.writerow(bench_row(job))
    finally:
        if handle is not sys.stdout:
            handle.close()
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rgather", description="Min-max r-gather solvers on lines, spiders and trees.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="solve an instance file")
    s.add_argument("--problem", choices=(CLUSTERING, GATHERING))
    s.add_argument("--algo", choices=ALGOS, required=True)
    s.add_argument("-r", type=int)
    s.add_argument("--epsilon")
    s.add_argument("-i", "--input", required=True)
    s.add_argument("-o", "--output")
    s.add_argument("--force", action="store_true", help="ignore size guards")
    s.set_defaults(func=cmd_solve)

    g = sub.add_parser("gen", help="generate a random instance")
    g.add_argument("--kind", choices=("random-spider", "random-line", "random-tree"), required=True)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--m", type=int, default=0)
    g.add_argument("--d", type=int, default=3)
    g.add_argument("--r", type=int, default=2)
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--coord-max", type=int, default=20)
    g.add_argument("--problem", choices=(CLUSTERING, GATHERING))
    g.add_argument("-o", "--output")
    g.set_defaults(func=cmd_gen)

    r = sub.add_parser("reduce", help="hardness reductions")
    r.add_argument("which", choices=("sat-to-arrears", "arrears-to-spider"))
    r.add_argument("-i", "--input", required=True)
    r.add_argument("-o", "--output")
    r.add_argument("--params", help="sidecar path (default: OUTPUT.params, or stderr)")
    r.add_argument("--force", action="store_true")
    r.set_defaults(func=cmd_reduce)

    v = sub.add_parser("verify", help="check a solution file")
    v.add_argument("-i", "--input", required=True)
    v.add_argument("-s", "--solution", required=True)
    v.add_argument("--max-cost")
    v.set_defaults(func=cmd_verify)

    b = sub.add_parser("bench", help="timed sweep, CSV out")
    b.add_argument("--kind", choices=("random-spider", "random-line", "random-tree"), default="random-spider")
    b.add_argument("--n", type=int, nargs="*", default=[])
    b.add_argument("--d", type=int, nargs="*", default=[3])
    b.add_argument("--r", type=int, nargs="*", default=[2])
    b.add_argument("--m", type=int, default=0)
    b.add_argument("--epsilon", type=Fraction, nargs="*", default=[Fraction(1)])
    b.add_argument("--seeds", type=int, nargs="*", default=[0])
    b.add_argument("--algos", choices=ALGOS, nargs="*", default=["fpt"])
    b.add_argument("--coord-max", type=int, default=20)
    b.add_argument("--problem", choices=(CLUSTERING, GATHERING))
    b.add_argument("--workers", type=int, default=1)
    b.add_argument("--force", action="store_true")
    b.add_argument("-o", "--output")
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    try:
        return args.func(args)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ValidationError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
