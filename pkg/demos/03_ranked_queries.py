"""Top-k, extremes and weight filters with the K2-treap.

Each treap node stores the heaviest point of its submatrix, so a best-first
search reaches the k heaviest points of a window after expanding only a few
nodes. The script checks this on a random grid and shows the other
weight-aware queries.
"""
# %%
import numpy as np

from k2agg import DenseGrid, K2Treap, QueryRect, gen

points = gen(1024, 10, 1000, seed=3)
treap = K2Treap.build(points)
print(f"{len(points)} points, {treap.size_in_bits() / len(points):.2f} bits/point")

# %% The whole grid: the heaviest points come out after about one pop each.
everything = QueryRect(0, 1023, 0, 1023)
for k in (1, 10, 100):
    best, pops = treap.top_k(everything, k, return_pops=True)
    print(f"top-{k:<3} lightest of them weighs {best[-1][2]}, {pops} heap pops")

# %% A window in the middle, against the brute-force grid.
q = QueryRect(300, 420, 610, 700)
oracle = DenseGrid.from_points(points)
print("max:", treap.max(q), "expected weight", oracle.o_max(q))
# equal weights may be listed in a different order, so compare the weights
assert [w for *_, w in treap.top_k(q, 25)] == [w for *_, w in oracle.o_topk(q, 25)]

# %% Minimum queries use a treap built in the opposite order.
lightest = K2Treap.build(points, order="min")
print("min:", lightest.max(q), "expected weight", oracle.o_min(q))

# %% Points whose weight falls in a band. Subtrees whose maximum is below the
# band are skipped without being opened.
hits = treap.interval(q, 900, 999)
print(f"{len(hits)} of {oracle.o_count(q)} points in the window weigh 900..999")
assert hits == oracle.o_interval(q, 900, 999)

# %% Single cells can be read back too.
x, y, w = hits[0]
ey, ex = np.argwhere(oracle.cells < 0)[0]
print(f"cell ({x}, {y}) holds {treap.access_cell(x, y)};",
      f"empty cell ({ex}, {ey}) gives {treap.access_cell(int(ex), int(ey))}")
