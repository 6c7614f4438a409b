"""Command-line verbs: gen, build, query, bench, info.

Run as ``python -m k2agg <verb> ...``. Results and CSV go to standard output,
log messages to standard error; any failure exits with status 1.
"""
from __future__ import annotations

import argparse
import logging
import sys
import time

import numpy as np

from . import bench, io
from .datasets import gen
from .grid import KSchedule, QueryRect, zorder_codes
from .k2tree import K2Tree
from .k2treap import K2Treap
from .rck2tree import DEFAULT_COUNT_CHUNK, CountingK2Tree

log = logging.getLogger("k2agg")


def _schedule(args, side: int) -> KSchedule | None:
    if args.schedule and args.k:
        raise ValueError("use either --schedule or --k, not both")
    if args.schedule:
        return KSchedule.parse(args.schedule)
    if args.k:
        return KSchedule.uniform(args.k, side)
    return None


def _read_points(path: str):
    if path == "-":
        return io.parse_points(sys.stdin)
    with open(path, encoding="utf-8") as f:
        return io.parse_points(f)


def cmd_gen(args, out) -> None:
    pts = gen(args.size, args.density, args.weights, args.clusters, args.seed, args.sigma)
    log.info("generated %d points on a %dx%d grid", len(pts), args.size, args.size)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as f:
            io.write_points(pts, f)
    else:
        io.write_points(pts, out)


def cmd_build(args, out) -> None:
    pts = _read_points(args.input)
    sched = _schedule(args, max(pts.rows, pts.cols))
    t0 = time.perf_counter()
    if args.type == "k2tree":
        index = K2Tree.build(pts, sched)
    elif args.type == "k2treap":
        index = K2Treap.build(pts, sched, order=args.order, chunk=args.chunk or 4)
    else:
        index = CountingK2Tree.build(pts, sched, aug_levels=args.aug_levels, mode=args.mode,
                                     chunk=args.chunk or DEFAULT_COUNT_CHUNK)
    log.info("built %s over %d points in %.2fs", bench.structure_name(index), len(pts),
             time.perf_counter() - t0)
    io.save(index, args.output)


def _rect(args, index) -> QueryRect:
    if args.rect is None:
        n = (index.base if isinstance(index, CountingK2Tree) else index).n
        return QueryRect(0, n - 1, 0, n - 1)
    return QueryRect(*args.rect).validate()


def _lines(xs, ys, ws=None):
    order = np.argsort(zorder_codes(xs, ys), kind="stable")
    if ws is None:
        return [f"{x}\t{y}" for x, y in zip(xs[order].tolist(), ys[order].tolist())]
    return [f"{x}\t{y}\t{w}" for x, y, w in
            zip(xs[order].tolist(), ys[order].tolist(), ws[order].tolist())]


def _cell(index, at) -> str:
    if at is None:
        raise ValueError("--op cell needs --at X Y")
    x, y = at
    base = index.base if isinstance(index, CountingK2Tree) else index
    if not (0 <= x < base.cols and 0 <= y < base.rows):
        raise ValueError(f"cell ({x}, {y}) outside the {base.rows}x{base.cols} grid")
    if isinstance(index, K2Treap):
        w = index.access_cell(x, y)
        return "empty" if w is None else str(w)
    return str(int(base.check_cell(x, y)))


def cmd_query(args, out) -> None:
    index = io.load(args.index)
    if args.op == "cell":
        out.write(_cell(index, args.at) + "\n")
        return
    if args.op == "topk":
        args.op = "top"
    q = _rect(args, index)
    wrange = tuple(args.wrange) if args.wrange else None
    fn = bench.query_fn(index, args.op, args.topk, wrange)
    res = fn(q)
    if args.op in ("count", "sum"):
        lines = [str(res)]
    elif args.op in ("max", "min"):
        lines = [] if res is None else ["\t".join(map(str, res))]
    elif args.op == "top":
        # weight order first (best first), Z-order among equal weights
        sign = -1 if index.order == "max" else 1
        ranked = sorted(res, key=lambda p: (sign * p[2], int(zorder_codes([p[0]], [p[1]])[0])))
        lines = ["\t".join(map(str, p)) for p in ranked]
    elif isinstance(index, K2Treap):
        lines = _lines(*res)
    else:
        lines = [f"{x}\t{y}" for x, y in zip(res[0].tolist(), res[1].tolist())]
    if lines:
        out.write("\n".join(lines) + "\n")


def cmd_bench(args, out) -> None:
    index = io.load(args.index)
    spec = bench.BenchSpec(queries=args.queries, w=args.window, selectivity=args.selectivity,
                           k=args.topk, seed=args.seed, orientation=args.orientation,
                           wrange=tuple(args.wrange) if args.wrange else None)
    rows = [bench.run(index, op, spec) for op in args.op]
    bench.write_csv(rows, out)


def cmd_info(args, out) -> None:
    index = io.load(args.index)
    base = index.base if isinstance(index, CountingK2Tree) else index
    info = {
        "structure": bench.structure_name(index),
        "grid": f"{base.rows}x{base.cols} (padded {base.n})",
        "points": index.t,
        "schedule": str(base.schedule),
        "height": base.height,
    }
    parts: dict[str, int] = {}
    if isinstance(index, K2Treap):
        info["d"] = index.d
        info["order"] = index.order
        parts = {"T": index.T.size_in_bits(), "coords": 64 * len(index.coord_words),
                 "values": index.values.size_in_bits(), "level_starts": 64 * len(index.first)}
    else:
        parts = {"T": base.T.size_in_bits(), "L": base.L.size_in_bits()}
    if isinstance(index, CountingK2Tree):
        info["mode"] = index.mode
        info["aug_levels"] = index.aug_levels
        parts["counts"] = index.counts.size_in_bits()
        if index.leaf_weights is not None:
            parts["leaf_weights"] = index.leaf_weights.size_in_bits()
    total = index.size_in_bits()
    for k, v in info.items():
        out.write(f"{k}: {v}\n")
    for k, v in parts.items():
        out.write(f"bits.{k}: {v}\n")
    out.write(f"bits.total: {total}\n")
    out.write(f"bits_per_cell: {total / (base.rows * base.cols):.4f}\n")
    if index.t:
        out.write(f"bits_per_point: {total / index.t:.4f}\n")


def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="k2agg", description="Compact indexes for aggregated 2D range queries.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="verb", required=True)

    g = sub.add_parser("gen", help="generate a synthetic point file")
    g.add_argument("-s", "--size", type=int, required=True, help="grid side (power of two)")
    g.add_argument("-p", "--density", type=float, required=True, help="percent of non-empty cells")
    g.add_argument("-d", "--weights", type=int, default=128, help="weights are drawn from [0, d)")
    g.add_argument("-c", "--clusters", type=int, default=0, help="Gaussian clusters (0 = uniform)")
    g.add_argument("--sigma", type=float, default=None, help="cluster standard deviation")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("-o", "--output")
    g.set_defaults(fn=cmd_gen)

    b = sub.add_parser("build", help="build an index file from a point file")
    b.add_argument("input", help="point file, or - for stdin")
    b.add_argument("-t", "--type", choices=("k2tree", "k2treap", "rck2tree"), required=True)
    b.add_argument("--schedule", help='branching schedule such as "4x5,2x3"')
    b.add_argument("--k", type=int, help="uniform branching factor")
    b.add_argument("--aug-levels", type=int, default=None, help="levels carrying counts (rck2tree)")
    b.add_argument("--mode", choices=("count", "sum"), default="count")
    b.add_argument("--order", choices=("max", "min"), default="max", help="treap priority")
    b.add_argument("--chunk", type=int, default=None, help="DAC chunk width in bits")
    b.add_argument("-o", "--output", required=True)
    b.set_defaults(fn=cmd_build)

    q = sub.add_parser("query", help="run one query against an index file")
    q.add_argument("index")
    q.add_argument("--op", required=True,
                   choices=("count", "sum", "report", "top", "topk", "max", "min", "interval", "cell"))
    q.add_argument("--rect", type=int, nargs=4, metavar=("X1", "X2", "Y1", "Y2"),
                   help="inclusive column and row ranges (default: whole grid)")
    q.add_argument("--at", type=int, nargs=2, metavar=("X", "Y"), help="cell for --op cell")
    q.add_argument("-k", "--topk", type=int, default=10)
    q.add_argument("--wrange", type=int, nargs=2, metavar=("LO", "HI"))
    q.set_defaults(fn=cmd_query)

    m = sub.add_parser("bench", help="time a query set, CSV to stdout")
    m.add_argument("index")
    m.add_argument("--op", required=True, action="append",
                   choices=("count", "sum", "report", "top", "max", "min", "interval"))
    win = m.add_mutually_exclusive_group(required=True)
    win.add_argument("-w", "--window", type=int, help="square window side")
    win.add_argument("-X", "--selectivity", type=float, help="percent of cells covered")
    m.add_argument("--orientation", choices=bench.ORIENTATIONS, default="square")
    m.add_argument("-n", "--queries", type=int, default=1000)
    m.add_argument("-k", "--topk", type=int, default=10)
    m.add_argument("--wrange", type=int, nargs=2, metavar=("LO", "HI"))
    m.add_argument("--seed", type=int, default=0)
    m.set_defaults(fn=cmd_bench)

    i = sub.add_parser("info", help="print header and space breakdown")
    i.add_argument("index")
    i.set_defaults(fn=cmd_info)
    return p


def main(argv=None, out=None) -> int:
    args = make_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        args.fn(args, out or sys.stdout)
    except (ValueError, TypeError, OSError) as e:
        print(f"k2agg {args.verb}: error: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
