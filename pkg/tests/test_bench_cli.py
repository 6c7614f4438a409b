import csv
import io as stdio

import numpy as np
import pytest
from helpers import RUNNING, running_points

from k2agg import CountingK2Tree, DenseGrid, K2Tree, K2Treap, QueryRect, gen, io
from k2agg.bench import BenchSpec, run, supported_ops
from k2agg.cli import main


def cli(*argv):
    out = stdio.StringIO()
    code = main([str(a) for a in argv], out=out)
    return code, out.getvalue()


@pytest.fixture()
def running_file(tmp_path):
    path = tmp_path / "running.tsv"
    with open(path, "w") as f:
        f.write("# grid rows=8 cols=8 d=9\n")
        for x, y, w in running_points().tuples():
            f.write(f"{x}\t{y}\t{w}\n")
    return path


def test_bench_spec_windows():
    spec = BenchSpec(queries=20, selectivity=1.0, seed=3)
    wins = spec.windows(1024)
    assert len(wins) == 20 and wins == BenchSpec(queries=20, selectivity=1.0, seed=3).windows(1024)
    cells = 1024 * 1024 // 100
    assert all(abs(q.area - cells) <= 1024 for q in wins)
    assert all(0 <= q.x1 and q.x2 < 1024 and 0 <= q.y1 and q.y2 < 1024 for q in wins)
    row = BenchSpec(queries=5, w=64, orientation="row").windows(256)
    assert all(q.y1 == q.y2 and q.x2 - q.x1 + 1 == 256 for q in row)
    col = BenchSpec(queries=5, w=8, orientation="col").windows(256)
    assert all(q.x1 == q.x2 and q.y2 - q.y1 + 1 == 64 for q in col)
    with pytest.raises(ValueError):
        BenchSpec(w=4, selectivity=1.0)
    with pytest.raises(ValueError):
        BenchSpec()


def test_bench_row_and_space_columns():
    pts = gen(256, 5, 16, 0, seed=1)
    tree = K2Treap.build(pts)
    row = run(tree, "top", BenchSpec(queries=30, w=32, k=5))
    assert row["structure"] == "k2treap" and row["queries"] == 30 and row["k"] == 5
    assert row["bits_per_cell"] == round(tree.size_in_bits() / 256**2, 6)
    assert row["bits_per_point"] == round(tree.size_in_bits() / len(pts), 6)
    assert 0 < row["p50_us"] <= row["p99_us"]
    assert supported_ops(CountingK2Tree.build(pts, mode="sum")) == ("sum", "report")
    with pytest.raises(ValueError):
        run(K2Tree.build(pts), "top", BenchSpec(queries=3, w=4))


def test_cli_query_running_example(tmp_path, running_file):
    for kind in ("k2tree", "k2treap", "rck2tree"):
        assert cli("build", running_file, "-t", kind, "-o", tmp_path / f"{kind}.k2ag")[0] == 0
    assert cli("query", tmp_path / "rck2tree.k2ag", "--op", "count", "--rect", 1, 4, 4, 7) == (0, "6\n")
    assert cli("query", tmp_path / "k2tree.k2ag", "--op", "count", "--rect", 1, 4, 4, 7) == (0, "6\n")
    code, out = cli("query", tmp_path / "k2treap.k2ag", "--op", "top", "-k", 3, "--rect", 1, 4, 4, 7)
    assert out == "4\t4\t7\n1\t7\t4\n3\t4\t3\n"
    assert cli("query", tmp_path / "k2treap.k2ag", "--op", "top", "-k", 1)[1] == "2\t0\t8\n"
    assert cli("query", tmp_path / "k2treap.k2ag", "--op", "max", "--rect", 1, 4, 4, 7)[1] == "4\t4\t7\n"
    code, out = cli("query", tmp_path / "k2treap.k2ag", "--op", "report", "--rect", 1, 4, 4, 7)
    assert len(out.splitlines()) == 6
    assert cli("query", tmp_path / "k2treap.k2ag", "--op", "interval", "--rect", 0, 7, 0, 7,
               "--wrange", 8, 8)[1] == "2\t0\t8\n"


def test_cli_min_treap_and_sum(tmp_path, running_file):
    cli("build", running_file, "-t", "k2treap", "--order", "min", "-o", tmp_path / "min.k2ag")
    assert cli("query", tmp_path / "min.k2ag", "--op", "min", "--rect", 1, 4, 4, 7)[1] == "1\t5\t1\n"
    cli("build", running_file, "-t", "rck2tree", "--mode", "sum", "--aug-levels", 2, "-o", tmp_path / "s.k2ag")
    assert cli("query", tmp_path / "s.k2ag", "--op", "sum")[1] == f"{int(RUNNING[RUNNING >= 0].sum())}\n"


def test_cli_errors(tmp_path, running_file, capsys):
    cli("build", running_file, "-t", "k2tree", "-o", tmp_path / "t.k2ag")
    assert cli("query", tmp_path / "t.k2ag", "--op", "top")[0] == 1
    assert "does not support" in capsys.readouterr().err
    (tmp_path / "junk").write_bytes(b"nonsense")
    assert cli("info", tmp_path / "junk")[0] == 1
    assert cli("query", tmp_path / "missing", "--op", "count")[0] == 1
    assert cli("gen", "-s", 100, "-p", 5)[0] == 1


def test_cli_gen_build_bench_info(tmp_path):
    pts_path = tmp_path / "p.tsv"
    assert cli("gen", "-s", 128, "-p", 5, "-d", 16, "-c", 4, "--seed", 7, "-o", pts_path)[0] == 0
    first = pts_path.read_text()
    cli("gen", "-s", 128, "-p", 5, "-d", 16, "-c", 4, "--seed", 7, "-o", pts_path)
    assert pts_path.read_text() == first
    pts = io.parse_points(first)
    assert cli("build", pts_path, "-t", "rck2tree", "--aug-levels", 3, "-o", tmp_path / "c.k2ag")[0] == 0
    again = tmp_path / "c2.k2ag"
    cli("build", pts_path, "-t", "rck2tree", "--aug-levels", 3, "-o", again)
    assert again.read_bytes() == (tmp_path / "c.k2ag").read_bytes()

    oracle = DenseGrid.from_points(pts)
    q = QueryRect(10, 90, 5, 70)
    assert cli("query", tmp_path / "c.k2ag", "--op", "count", "--rect", *q)[1] == f"{oracle.o_count(q)}\n"

    code, out = cli("bench", tmp_path / "c.k2ag", "--op", "count", "--op", "report", "-X", 1, "-n", 50)
    rows = list(csv.DictReader(stdio.StringIO(out)))
    assert code == 0 and [r["op"] for r in rows] == ["count", "report"]
    assert rows[0]["window"] == "X=1%" and rows[0]["queries"] == "50"

    code, out = cli("info", tmp_path / "c.k2ag")
    info = dict(line.split(": ", 1) for line in out.splitlines())
    assert info["structure"] == "rck2tree3-count" and int(info["points"]) == len(pts)
    parts = sum(int(v) for k, v in info.items() if k.startswith("bits.") and k != "bits.total")
    assert parts == int(info["bits.total"])


def test_cli_empty_input(tmp_path):
    empty = tmp_path / "e.tsv"
    empty.write_text("# grid rows=16 cols=16 d=4\n")
    assert cli("build", empty, "-t", "k2treap", "-o", tmp_path / "e.k2ag")[0] == 0
    assert cli("query", tmp_path / "e.k2ag", "--op", "top")[1] == ""


def test_cli_cell_and_topk_alias(tmp_path, running_file):
    cli("build", running_file, "-t", "k2treap", "-o", tmp_path / "t.k2ag")
    cli("build", running_file, "-t", "k2tree", "-o", tmp_path / "p.k2ag")
    assert cli("query", tmp_path / "t.k2ag", "--op", "cell", "--at", 4, 4) == (0, "7\n")
    assert cli("query", tmp_path / "t.k2ag", "--op", "cell", "--at", 7, 0) == (0, "empty\n")
    assert cli("query", tmp_path / "p.k2ag", "--op", "cell", "--at", 2, 0) == (0, "1\n")
    assert cli("query", tmp_path / "p.k2ag", "--op", "cell", "--at", 9, 0)[0] == 1
    assert cli("query", tmp_path / "p.k2ag", "--op", "cell")[0] == 1
    top = cli("query", tmp_path / "t.k2ag", "--op", "top", "-k", 3)
    assert cli("query", tmp_path / "t.k2ag", "--op", "topk", "-k", 3) == top
