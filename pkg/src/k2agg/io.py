"""Binary index files and text point files.

Index file layout (all integers little-endian)::

    "K2AG" | version u8 | tag u8 | payload_len u64 | payload | crc32 u32

``payload`` starts with a fixed header (rows, cols, n, t, d as u64; schedule
entry count u16 then ``(k u16, repeat u16)`` pairs; aug_levels u8; DAC chunk
width u8; order u8) followed by the structure sections. A bitmap section is its
bit length as u64 followed by ``ceil(len / 64)`` u64 words, bit ``i`` at word
``i // 64``, position ``i % 64``. A DAC section is the value count u64, the
packed chunk words (u64 count, then words) and the continuation bitmap. The
CRC32 covers every byte before it. The header chunk width applies to the
structure's main DAC; leaf weights always use the library default width.

Point files hold one ``x<TAB>y[<TAB>w]`` record per line. Blank lines and lines
starting with ``#`` are skipped, except ``# grid rows=R cols=C d=D`` which fixes
the grid size and weight domain.
"""
from __future__ import annotations

import re
import struct
import zlib
from typing import IO, Iterable, Union

import numpy as np

from .bitvec import BitVector, IntVector, nb_get_bits
from .dac import DEFAULT_CHUNK, DacSequence
from .grid import KSchedule, WeightedPointSet
from .k2tree import K2Tree
from .k2treap import K2Treap
from .rck2tree import COUNT, SUM, CountingK2Tree

MAGIC = b"K2AG"
FORMAT_VERSION = 1
TAG_K2TREE, TAG_K2TREAP, TAG_RCK2_COUNT, TAG_RCK2_SUM = 1, 2, 3, 4
_PREFIX = struct.Struct("<4sBBQ")
_HEAD = struct.Struct("<5Q")

Index = Union[K2Tree, K2Treap, CountingK2Tree]


class FormatError(ValueError):
    """The byte stream is not a valid index file."""


class TruncatedError(FormatError):
    pass


class BadMagicError(FormatError):
    pass


class VersionError(FormatError):
    pass


class ChecksumError(FormatError):
    pass


# writing ----------------------------------------------------------------------

class _Writer:
    def __init__(self):
        self.parts: list[bytes] = []

    def pack(self, fmt: str, *vals) -> None:
        self.parts.append(struct.pack("<" + fmt, *vals))

    def words(self, w: np.ndarray) -> None:
        self.parts.append(np.ascontiguousarray(w, dtype="<u8").tobytes())

    def bitvector(self, bv: BitVector) -> None:
        self.pack("Q", len(bv))
        self.words(bv.words)

    def word_array(self, w: np.ndarray) -> None:
        self.pack("Q", len(w))
        self.words(w)

    def dac(self, d: DacSequence) -> None:
        self.pack("Q", len(d))
        self.word_array(d.chunks.words)
        self.bitvector(d.cont)

    def bytes(self) -> bytes:
        return b"".join(self.parts)


def _header(w: _Writer, rows, cols, n, t, d, schedule: KSchedule, aug: int, chunk: int, order: int):
    w.pack("5Q", rows, cols, n, t, d)
    w.pack("H", len(schedule.entries))
    for k, r in schedule.entries:
        w.pack("HH", k, r)
    w.pack("BBB", aug, chunk, order)


def serialize(index: Index) -> bytes:
    """Encode ``index`` as an index file."""
    w = _Writer()
    if isinstance(index, K2Treap):
        tag = TAG_K2TREAP
        _header(w, index.rows, index.cols, index.n, index.t, index.d, index.schedule, 0,
                index.values.b, 1 if index.order == "min" else 0)
        w.bitvector(index.T)
        w.word_array(index.coord_words)
        w.dac(index.values)
    elif isinstance(index, CountingK2Tree):
        tag = TAG_RCK2_SUM if index.mode == SUM else TAG_RCK2_COUNT
        b = index.base
        _header(w, b.rows, b.cols, b.n, b.t, index.d, b.schedule, index.aug_levels,
                index.counts.b, 0)
        w.bitvector(b.T)
        w.bitvector(b.L)
        w.dac(index.counts)
        if index.mode == SUM:
            w.dac(index.leaf_weights)
    elif isinstance(index, K2Tree):
        tag = TAG_K2TREE
        _header(w, index.rows, index.cols, index.n, index.t, 0, index.schedule, 0, 0, 0)
        w.bitvector(index.T)
        w.bitvector(index.L)
    else:
        raise TypeError(f"cannot serialize {type(index).__name__}")
    payload = w.bytes()
    head = _PREFIX.pack(MAGIC, FORMAT_VERSION, tag, len(payload))
    body = head + payload
    return body + struct.pack("<I", zlib.crc32(body))


# reading ----------------------------------------------------------------------

class _Reader:
    def __init__(self, buf: bytes):
        self.buf = memoryview(buf)
        self.pos = 0

    def take(self, size: int) -> memoryview:
        if size < 0 or self.pos + size > len(self.buf):
            raise FormatError("section runs past the end of the payload")
        out = self.buf[self.pos:self.pos + size]
        self.pos += size
        return out

    def unpack(self, fmt: str):
        s = struct.Struct("<" + fmt)
        return s.unpack(self.take(s.size))

    def words(self, count: int) -> np.ndarray:
        return np.frombuffer(self.take(8 * count), dtype="<u8").astype(np.uint64)

    def bitvector(self) -> BitVector:
        (nbits,) = self.unpack("Q")
        return BitVector.from_words(self.words((nbits + 63) // 64), nbits)

    def word_array(self) -> np.ndarray:
        (count,) = self.unpack("Q")
        return self.words(count)

    def dac(self, b: int) -> DacSequence:
        (n,) = self.unpack("Q")
        words = self.word_array()
        cont = self.bitvector()
        return DacSequence.from_parts(IntVector.from_words(words, b, len(cont)), cont, n)


def deserialize(data: bytes) -> Index:
    """Decode an index file produced by :func:`serialize`."""
    data = bytes(data)
    if len(data) < 4:
        raise TruncatedError("stream shorter than the magic number")
    if data[:4] != MAGIC:
        raise BadMagicError(f"bad magic {data[:4]!r}")
    if len(data) < _PREFIX.size:
        raise TruncatedError("stream shorter than the file prefix")
    _, version, tag, plen = _PREFIX.unpack_from(data)
    if version != FORMAT_VERSION:
        raise VersionError(f"format version {version} not supported (expected {FORMAT_VERSION})")
    end = _PREFIX.size + plen
    if len(data) < end + 4:
        raise TruncatedError(f"stream has {len(data)} bytes, header promises {end + 4}")
    (crc,) = struct.unpack_from("<I", data, end)
    if zlib.crc32(data[:end]) != crc:
        raise ChecksumError("checksum mismatch")
    r = _Reader(data[_PREFIX.size:end])
    try:
        index = _decode(r, tag)
    except FormatError:
        raise
    except (ValueError, IndexError) as e:
        raise FormatError(f"inconsistent payload: {e}") from e
    if r.pos != plen:
        raise FormatError("trailing bytes after the last section")
    return index


def _decode(r: _Reader, tag: int) -> Index:
    rows, cols, n, t, d = r.unpack("5Q")
    (nsched,) = r.unpack("H")
    schedule = KSchedule(tuple(r.unpack("HH") for _ in range(nsched)))
    aug, chunk, order = r.unpack("BBB")
    if schedule.n != n:
        raise FormatError(f"schedule covers {schedule.n}, header says {n}")
    if tag == TAG_K2TREE:
        T, L = r.bitvector(), r.bitvector()
        return K2Tree(T, L, schedule, t, rows, cols)
    if tag == TAG_K2TREAP:
        T = r.bitvector()
        coords = r.word_array()
        values = r.dac(chunk)
        root = None
        if t:
            w0 = int(schedule.sides()[0] - 1).bit_length()
            root = (int(nb_get_bits(coords, 0, w0)), int(nb_get_bits(coords, w0, w0)), values[0])
        return K2Treap(T, coords, values, schedule, t, d, root, rows, cols,
                       "min" if order else "max")
    if tag in (TAG_RCK2_COUNT, TAG_RCK2_SUM):
        T, L = r.bitvector(), r.bitvector()
        counts = r.dac(chunk)
        mode = SUM if tag == TAG_RCK2_SUM else COUNT
        leaf = r.dac(DEFAULT_CHUNK) if mode == SUM else None
        base = K2Tree(T, L, schedule, t, rows, cols)
        return CountingK2Tree(base, counts, aug, mode, leaf, d)
    raise FormatError(f"unknown structure tag {tag}")


def save(index: Index, path) -> None:
    with open(path, "wb") as f:
        f.write(serialize(index))


def load(path) -> Index:
    with open(path, "rb") as f:
        return deserialize(f.read())


# point files ------------------------------------------------------------------

_GRID = re.compile(r"#\s*grid\b(.*)")
_KV = re.compile(r"(rows|cols|d)=(\d+)")


def parse_points(source: Union[str, IO[str], Iterable[str]]) -> WeightedPointSet:
    """Read a point file; ``source`` is the text itself or an iterable of lines."""
    lines = source.splitlines() if isinstance(source, str) else source
    xs, ys, ws = [], [], []
    meta: dict[str, int] = {}
    for lineno, raw in enumerate(lines, 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            m = _GRID.match(line)
            if m:
                meta.update((k, int(v)) for k, v in _KV.findall(m.group(1)))
            continue
        fields = line.split("\t") if "\t" in line else line.split()
        if len(fields) not in (2, 3):
            raise ValueError(f"line {lineno}: expected 2 or 3 fields, got {len(fields)}")
        try:
            vals = [int(f) for f in fields]
        except ValueError:
            raise ValueError(f"line {lineno}: non-integer field in {line!r}") from None
        if min(vals) < 0:
            raise ValueError(f"line {lineno}: negative value")
        xs.append(vals[0])
        ys.append(vals[1])
        ws.append(vals[2] if len(vals) == 3 else 1)
    d = meta.get("d")
    if d is None and ws:
        d = max(ws) + 1
    return WeightedPointSet(xs, ys, ws, rows=meta.get("rows"), cols=meta.get("cols"), d=d)


def write_points(points: WeightedPointSet, out: IO[str], weights: bool = True) -> None:
    out.write(f"# grid rows={points.rows} cols={points.cols} d={points.d}\n")
    if weights:
        rows = np.stack([points.xs, points.ys, points.ws], axis=1)
    else:
        rows = np.stack([points.xs, points.ys], axis=1)
    np.savetxt(out, rows, fmt="%d", delimiter="\t")
