"""Point files, index files and the ``python -m k2agg`` entry point.

Everything the library does from Python is also reachable from a shell. This
script drives the command line through ``subprocess`` inside a scratch
directory and then opens the same index file from Python.
"""
# %%
import subprocess
import sys
import tempfile
from pathlib import Path

from k2agg import QueryRect, load, parse_points

work = Path(tempfile.mkdtemp(prefix="k2agg-demo-"))


def k2agg(*args):
    cmd = [sys.executable, "-m", "k2agg", *map(str, args)]
    print("$", " ".join(["python3 -m k2agg", *map(str, args)]))
    out = subprocess.run(cmd, check=True, capture_output=True, text=True).stdout
    if out.strip():
        print(out.rstrip())
    return out


# %% Generate clustered points and look at the text format.
k2agg("gen", "-s", 512, "-p", 3, "-d", 64, "-c", 5, "--seed", 9, "-o", work / "pts.tsv")
print("".join((work / "pts.tsv").read_text().splitlines(keepends=True)[:4]))

# %% Build a counting index with four augmented levels and ask it questions.
k2agg("build", work / "pts.tsv", "-t", "rck2tree", "--aug-levels", 4, "-o", work / "count.k2ag")
k2agg("info", work / "count.k2ag")
k2agg("query", work / "count.k2ag", "--op", "count", "--rect", 350, 511, 400, 511)

# %% The same rectangle from Python, after loading the file.
index = load(work / "count.k2ag")
points = parse_points((work / "pts.tsv").read_text())
print("from Python:", index.count(QueryRect(350, 511, 400, 511)), "of", len(points), "points")

# %% A treap file answers ranked queries; bench prints CSV.
k2agg("build", work / "pts.tsv", "-t", "k2treap", "-o", work / "treap.k2ag")
k2agg("query", work / "treap.k2ag", "--op", "top", "-k", 3, "--rect", 350, 511, 400, 511)
k2agg("bench", work / "treap.k2ag", "--op", "top", "--op", "max", "-w", 64, "-n", 200)
