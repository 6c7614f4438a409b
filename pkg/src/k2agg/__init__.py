"""Compact K2-tree indexes for aggregated range queries on weighted 2D grids."""
from .bitvec import BitVector, IntVector
from .dac import DacSequence
from .datasets import gen
from .grid import KSchedule, QueryRect, WeightedPointSet
from .io import deserialize, load, parse_points, save, serialize, write_points
from .k2treap import K2Treap
from .k2tree import K2Tree
from .oracle import DenseGrid
from .rck2tree import CountingK2Tree, unzigzag, zigzag

__all__ = [
    "BitVector", "IntVector", "DacSequence", "KSchedule", "QueryRect", "WeightedPointSet",
    "K2Tree", "K2Treap", "CountingK2Tree", "DenseGrid", "gen", "zigzag", "unzigzag",
    "serialize", "deserialize", "save", "load", "parse_points", "write_points",
]
__version__ = "0.1.0"
