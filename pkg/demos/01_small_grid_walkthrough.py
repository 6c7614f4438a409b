"""A tour of the three indexes on an 8x8 grid small enough to print.

Run with ``python3 demos/01_small_grid_walkthrough.py``.
"""
# %%
import numpy as np

from k2agg import CountingK2Tree, DenseGrid, K2Tree, K2Treap, KSchedule, QueryRect, WeightedPointSet

# A weighted grid: -1 marks an empty cell, everything else is a weight in [0, 9).
# Rows are y, columns are x.
cells = np.array([
    [-1, -1,  8, -1, -1, -1, -1, -1],
    [-1, -1, -1, -1,  2, -1, -1,  5],
    [-1,  0, -1, -1, -1, -1, -1, -1],
    [-1, -1, -1,  1, -1,  6, -1, -1],
    [-1, -1, -1,  3,  7, -1, -1, -1],
    [-1,  1, -1, -1, -1, -1,  3, -1],
    [-1, -1,  2, -1, -1, -1, -1, -1],
    [-1,  4, -1, -1, -1,  2, -1, -1],
])
points = WeightedPointSet.from_dense(cells, d=9)
print(f"{len(points)} points on a {points.rows}x{points.cols} grid")

# %% The plain K2-tree only knows which cells are occupied.
tree = K2Tree.build(points, KSchedule.uniform(2, 8))
for level, bits in enumerate(tree.levels()):
    print(f"level {level}: {''.join(map(str, bits.astype(int)))}")

q = QueryRect(x1=1, x2=4, y1=4, y2=7)
print("occupied cells in", tuple(q), "->", tree.report(q))

# %% Counting: each node carries its point count, stored as a small signed
# correction to an even split of its parent's count.
counter = CountingK2Tree.build(points, KSchedule.uniform(2, 8))
print("count:", counter.count(q))
for level, values in enumerate(counter.decoded_values()):
    print(f"  node counts at level {level}: {values.tolist()}")

# %% Max, min and top-k come from the K2-treap, which hoists the heaviest
# point of every submatrix into the node itself.
hi = K2Treap.build(points)
lo = K2Treap.build(points, order="min")
print("max:", hi.max(q), "min:", lo.max(q))
print("top 3:", hi.top_k(q, 3))
print("weights 2..4:", hi.interval(q, 2, 4))

# %% The brute-force grid agrees on every answer.
oracle = DenseGrid.from_points(points)
assert counter.count(q) == oracle.o_count(q)
assert hi.top_k(q, 3) == oracle.o_topk(q, 3)
print("oracle agrees")
