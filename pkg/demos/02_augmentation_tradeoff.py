"""How many levels should carry counts?

Counting by plain traversal visits every occupied cell in the window. Storing
counts on the upper levels lets fully covered nodes answer at once. This script
measures what each extra level costs in space and buys in speed on a clustered
grid of about a million points.
"""
# %%
import time

from k2agg import CountingK2Tree, K2Tree, gen
from k2agg.bench import BenchSpec

side = 2048
points = gen(side, 25, 128, c=8, seed=1)
plain = K2Tree.build(points)
base_bits = plain.size_in_bits()
print(f"{len(points)} points, plain K2-tree {base_bits / len(points):.2f} bits/point")

windows = BenchSpec(queries=500, selectivity=1.0, seed=2).windows(side)


def per_query_us(fn):
    for q in windows[:20]:
        fn(q)
    t0 = time.perf_counter()
    for q in windows:
        fn(q)
    return (time.perf_counter() - t0) / len(windows) * 1e6


# %%
print(f"{'levels':>8} {'overhead':>9} {'us/query':>9}")
print(f"{'none':>8} {'0.0%':>9} {per_query_us(plain.count_by_traversal):9.1f}")
for aug in (2, 3, 4, 5, None):
    idx = CountingK2Tree.build(points, aug_levels=aug)
    label = "all" if aug is None else str(aug)
    print(f"{label:>8} {idx.overhead_bits() / base_bits:9.1%} {per_query_us(idx.count):9.1f}")

# %% Sums use the same tree with weights in place of counts.
summer = CountingK2Tree.build(points, aug_levels=6, mode="sum")
q = windows[0]
print("sum of weights in", tuple(q), "=", summer.sum(q))
