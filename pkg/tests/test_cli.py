import csv
import io
import subprocess
import sys

import pytest

from rgather.cli import BENCH_FIELDS, main
from rgather.hardness import parse_arrears
from rgather.io import parse_instance
from rgather.tree_ptas import normalize_tree

FOUR = "kind spider\nr 2\nlegs 2\nuser 1 1\nuser 1 2\nuser 2 1\nuser 2 3\n"


@pytest.fixture
def four(tmp_path):
    path = tmp_path / "four.txt"
    path.write_text(FOUR)
    return path


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_solve_fpt_and_ptas(capsys, four):
    code, out, _ = run(capsys, "solve", "--algo", "fpt", "-i", four)
    assert code == 0
    assert out.splitlines()[-1].split()[:2] == ["ok", "2"]
    code, out, _ = run(capsys, "solve", "--algo", "ptas", "--epsilon", "1", "-i", four)
    status, cost, _ = out.splitlines()[-1].split()
    assert code == 0 and status == "ok" and 2 <= int(cost) <= 4


def test_solve_guard_and_usage(capsys, tmp_path):
    path = tmp_path / "big.txt"
    assert main(["gen", "--kind", "random-spider", "--n", "20", "--seed", "1", "-o", str(path)]) == 0
    code, out, _ = run(capsys, "solve", "--algo", "brute", "-i", path)
    assert code == 3 and out.startswith("refused")
    assert run(capsys, "solve", "--algo", "line", "-i", path)[0] == 1
    assert run(capsys, "solve", "--algo", "ptas", "-i", path)[0] == 1  # no epsilon
    assert run(capsys, "solve", "-i", path)[0] == 1
    bad = tmp_path / "bad.txt"
    bad.write_text("kind spider\nr 1\nlegs 1\nuser 1 -1\n")
    assert run(capsys, "solve", "--algo", "fpt", "-i", bad)[0] == 1


def test_gen_determinism_and_shape(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for path in (a, b):
        main(["gen", "--kind", "random-spider", "--n", "8", "--d", "3", "--seed", "7", "-o", str(path)])
    assert a.read_bytes() == b.read_bytes()
    inst = parse_instance(a.read_text())
    assert inst.n == 8 and inst.d == 3
    t = tmp_path / "t"
    main(["gen", "--kind", "random-tree", "--n", "6", "--m", "2", "--seed", "3", "--problem", "gathering", "-o", str(t)])
    normalize_tree(parse_instance(t.read_text()))


def test_reduce(capsys, tmp_path):
    sat = tmp_path / "sat.txt"
    sat.write_text("vars 1\nclause 1 1 -1\n")
    out = tmp_path / "arrears.txt"
    assert main(["reduce", "sat-to-arrears", "-i", str(sat), "-o", str(out)]) == 0
    arrears = parse_arrears(out.read_text())
    assert (arrears.n, arrears.m) == (20, 4)
    assert "B 100" in (tmp_path / "arrears.txt.params").read_text()

    tiny = tmp_path / "tiny.txt"
    tiny.write_text("duty (1,1)\nbudget 1 1\n")
    spider = tmp_path / "spider.txt"
    assert main(["reduce", "arrears-to-spider", "-i", str(tiny), "-o", str(spider)]) == 0
    inst = parse_instance(spider.read_text())
    assert inst.d == 1 + 1 + 2  # one long leg, q_m + r short legs
    code, out, _ = run(capsys, "solve", "--algo", "fpt", "-i", spider)
    assert code == 0 and int(out.splitlines()[-1].split()[1]) <= 4

    huge = tmp_path / "huge.txt"
    huge.write_text("duty (1,5000000)\nbudget 1 5000000\n")
    code, _, err = run(capsys, "reduce", "arrears-to-spider", "-i", huge, "-o", tmp_path / "x")
    assert code == 3 and "refused" in err


def test_verify(capsys, tmp_path, four):
    sol = tmp_path / "sol.txt"
    assert main(["solve", "--algo", "fpt", "-i", str(four), "-o", str(sol)]) == 0
    capsys.readouterr()
    assert run(capsys, "verify", "-i", four, "-s", sol)[1] == "ok 2\n"
    code, out, _ = run(capsys, "verify", "-i", four, "-s", sol, "--max-cost", "3/2")
    assert code == 2 and "exceeds" in out
    small = tmp_path / "small.txt"
    small.write_text("cluster 1 2 3\ncluster 4\n")
    code, out, _ = run(capsys, "verify", "-i", four, "-s", small)
    assert code == 2 and "cluster 2" in out


def test_pipeline_law(capsys, tmp_path):
    cases = [
        ("random-spider", "fpt", []),
        ("random-spider", "ptas", ["--epsilon", "1/2"]),
        ("random-spider", "brute", []),
        ("random-line", "line", []),
        ("random-tree", "tree-ptas", ["--epsilon", "1"]),
    ]
    for kind, algo, extra in cases:
        for problem in ("clustering", "gathering"):
            for seed in range(3):
                inst, sol = tmp_path / "i", tmp_path / "s"
                main(["gen", "--kind", kind, "--n", "6", "--m", "3", "--seed", str(seed), "--problem", problem, "-o", str(inst)])
                code, out, _ = run(capsys, "solve", "--algo", algo, *extra, "-i", inst, "-o", sol)
                assert code == 0, (kind, algo, problem, seed)
                cost = out.split()[1]
                assert run(capsys, "verify", "-i", inst, "-s", sol) == (0, f"ok {cost}\n", "")


def _bench(capsys, *argv):
    code, out, _ = run(capsys, "bench", *argv)
    assert code == 0
    return list(csv.DictReader(io.StringIO(out)))


def test_bench(capsys):
    code, out, _ = run(capsys, "bench")
    assert out.strip() == ",".join(BENCH_FIELDS)
    rows = _bench(capsys, "--n", "7", "--seeds", "1", "2", "--algos", "fpt", "brute", "ptas", "--epsilon", "1/2")
    assert len(rows) == 6
    for seed in ("1", "2"):
        same = [r for r in rows if r["instance"].endswith("s" + seed)]
        costs = {r["algorithm"]: r["cost"] for r in same}
        assert costs["fpt"] == costs["brute"]
        assert all(r["status"] == "ok" and int(r["wall_ns"]) > 0 for r in same)
    rows = _bench(capsys, "--n", "20", "--algos", "brute", "line")
    assert [r["status"] for r in rows] == ["refused", "incompatible"]


def test_bench_scaling_rows(capsys):
    rows = _bench(capsys, "--n", "10000", "20000", "--d", "3", "--r", "5", "--algos", "fpt", "--coord-max", "1000000", "--workers", "2")
    assert [r["n"] for r in rows] == ["10000", "20000"]
    assert all(r["status"] == "ok" for r in rows)


def test_console_script_entry():
    res = subprocess.run([sys.executable, "-m", "rgather.cli", "--help"], capture_output=True, text=True)
    assert res.returncode == 0 and "solve" in res.stdout
