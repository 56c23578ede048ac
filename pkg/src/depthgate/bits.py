"""Boolean vectors and output sets as packed integers.

A Boolean input on ``n`` channels is an ``int`` whose bit ``i - 1`` holds the
value of channel ``i``.  An :class:`OutputSet` is a membership table of
``2**n`` bits, itself stored as a single Python ``int``; applying a comparator
to every member at once is then a handful of big-integer operations.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Iterable, Iterator, Sequence

import numpy as np

MAX_WIDTH = 32
# full 2**n tables are only materialised up to this width
MAX_TABLE_WIDTH = 20


def pack(bits: Sequence[int]) -> int:
    """Pack a 0/1 sequence (channel 1 first) into an integer."""
    x = 0
    for pos, b in enumerate(bits):
        if b not in (0, 1):
            raise ValueError(f"not a Boolean value: {b!r}")
        x |= b << pos
    return x


def unpack(x: int, n: int) -> tuple[int, ...]:
    return tuple((x >> pos) & 1 for pos in range(n))


def check_width(x: int, n: int) -> None:
    if n > MAX_WIDTH:
        raise ValueError(f"width {n} exceeds {MAX_WIDTH}")
    if x < 0 or x >> n:
        raise ValueError(f"vector {x:#x} does not fit in {n} channels")


def weight(x: int) -> int:
    return x.bit_count()


def sorted_vector(x: int, n: int) -> int:
    """The ascending rearrangement of ``x``: zeros on low channels, ones on top."""
    k = x.bit_count()
    return ((1 << k) - 1) << (n - k)


def is_sorted_vector(x: int, n: int) -> bool:
    return x == sorted_vector(x, n)


def leading_zeros(x: int, n: int) -> int:
    """Number of channels 1, 2, ... carrying 0 before the first 1."""
    if x == 0:
        return n
    return (x & -x).bit_length() - 1


def trailing_ones(x: int, n: int) -> int:
    """Number of channels n, n-1, ... carrying 1 before the first 0."""
    inv = ~x & ((1 << n) - 1)
    if inv == 0:
        return n
    return n - inv.bit_length()


@lru_cache(maxsize=None)
def _swap_mask(n: int, lo: int, hi: int) -> int:
    """Table mask of vectors with a 1 on 0-based bit ``lo`` and a 0 on ``hi``."""
    xs = np.arange(1 << n, dtype=np.int64)
    flags = ((xs >> lo) & 1) & (((xs >> hi) & 1) ^ 1)
    return _flags_to_int(flags)


def _flags_to_int(flags: np.ndarray) -> int:
    return int.from_bytes(np.packbits(flags.astype(np.uint8), bitorder="little").tobytes(), "little")


@lru_cache(maxsize=None)
def full_table(n: int) -> int:
    return (1 << (1 << n)) - 1


@lru_cache(maxsize=None)
def sorted_table(n: int) -> int:
    t = 0
    for k in range(n + 1):
        t |= 1 << (((1 << k) - 1) << (n - k))
    return t


def table_from_array(vectors: np.ndarray, n: int) -> int:
    """Membership table of the given vector array."""
    flags = np.zeros(1 << n, dtype=np.uint8)
    flags[vectors] = 1
    return _flags_to_int(flags)


def apply_comparator_to_table(table: int, n: int, min_ch: int, max_ch: int) -> int:
    """Image of a membership table under one comparator.

    Channels are 1-based; ``min_ch`` receives the minimum.  Works for both
    orientations, so generalized (max-min) comparators are handled too.
    """
    lo, hi = min_ch - 1, max_ch - 1
    m = _swap_mask(n, lo, hi)
    moving = table & m
    if not moving:
        return table
    shift = (1 << hi) - (1 << lo)
    moved = moving << shift if shift > 0 else moving >> -shift
    return (table & ~m) | moved


class OutputSet:
    """Set of Boolean vectors of width ``n`` backed by a ``2**n`` bit table."""

    __slots__ = ("n", "table")

    def __init__(self, n: int, table: int):
        if n > MAX_TABLE_WIDTH:
            raise ValueError(f"output tables limited to {MAX_TABLE_WIDTH} channels")
        self.n = n
        self.table = table

    @classmethod
    def all_inputs(cls, n: int) -> OutputSet:
        return cls(n, full_table(n))

    @classmethod
    def from_vectors(cls, n: int, vectors: Iterable[int]) -> OutputSet:
        t = 0
        for x in vectors:
            check_width(x, n)
            t |= 1 << x
        return cls(n, t)

    def __contains__(self, x: int) -> bool:
        return x >= 0 and bool((self.table >> x) & 1)

    def __len__(self) -> int:
        return self.table.bit_count()

    def __iter__(self) -> Iterator[int]:
        return iter(self.members().tolist())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, OutputSet):
            return NotImplemented
        return self.n == other.n and self.table == other.table

    def __hash__(self) -> int:
        return hash((self.n, self.table))

    def __repr__(self) -> str:
        return f"OutputSet(n={self.n}, size={len(self)})"

    def issubset(self, other: OutputSet) -> bool:
        if self.n != other.n:
            raise ValueError("width mismatch")
        return self.table & ~other.table == 0

    __le__ = issubset

    def members(self) -> np.ndarray:
        """Sorted member vectors as an int64 array."""
        if self.table == 0:
            return np.zeros(0, dtype=np.int64)
        nbytes = max(1, ((1 << self.n) + 7) // 8)
        raw = np.frombuffer(self.table.to_bytes(nbytes, "little"), dtype=np.uint8)
        flags = np.unpackbits(raw, bitorder="little")
        return np.flatnonzero(flags).astype(np.int64)

    def is_all_sorted(self) -> bool:
        return self.table & ~sorted_table(self.n) == 0

    def apply_comparator(self, min_ch: int, max_ch: int) -> OutputSet:
        return OutputSet(self.n, apply_comparator_to_table(self.table, self.n, min_ch, max_ch))
