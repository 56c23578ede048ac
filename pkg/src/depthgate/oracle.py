"""Exhaustive depth-first search for sorting networks on a handful of channels.

Independent of the SAT pipeline, so it serves as ground truth for it.  The
search state is the set of reachable outputs; two facts keep it small:

* if ``outputs(Q)`` is a subset of ``outputs(P)`` and ``P`` extends to a
  sorter with ``r`` more layers, so does ``Q``; among sibling layers only the
  subset-minimal output sets need exploring, and a failed set rules out every
  superset at the same remaining depth;
* layers that do not change the output set are skipped.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Optional

from .bits import apply_comparator_to_table, full_table, sorted_table
from .layers import enumerate_layers, first_layer
from .network import Layer, Network, canonical_layer, check_layer, is_sorting

MAX_N = 7
MAX_DEPTH = 6
DOMINANCE_SCAN = 64


class OracleRefused(ValueError):
    """The query is outside the range the exhaustive search is meant for."""


@dataclass(frozen=True)
class DepthBound:
    n: int
    lower: int
    upper: int
    witness: Optional[Network] = None

    def __post_init__(self) -> None:
        if self.lower > self.upper:
            raise ValueError("lower bound exceeds upper bound")

    @property
    def tight(self) -> bool:
        return self.lower == self.upper


def _apply_layer(table: int, n: int, layer: Layer) -> int:
    for a, b in layer:
        table = apply_comparator_to_table(table, n, a, b)
    return table


class _Search:
    def __init__(self, n: int):
        self.n = n
        self.layers = [L for L in enumerate_layers(n) if L]
        self.goal = sorted_table(n)
        self.failed: dict[int, set[int]] = {}
        self.recent: dict[int, deque] = {}
        self.nodes = 0

    def _known_failure(self, table: int, r: int) -> bool:
        if table in self.failed.get(r, ()):
            return True
        for f in self.recent.get(r, ()):
            if f & ~table == 0:
                return True
        return False

    def _record_failure(self, table: int, r: int) -> None:
        self.failed.setdefault(r, set()).add(table)
        self.recent.setdefault(r, deque(maxlen=DOMINANCE_SCAN)).append(table)

    def run(self, table: int, r: int) -> Optional[list[Layer]]:
        """Layers (at most ``r``) that sort everything in ``table``, or None."""
        self.nodes += 1
        if table & ~self.goal == 0:
            return []
        if r == 0 or self._known_failure(table, r):
            return None
        children: dict[int, Layer] = {}
        for L in self.layers:
            t = _apply_layer(table, self.n, L)
            if t != table and t not in children:
                children[t] = L
        # keep only subset-minimal children, smallest first
        order = sorted(children, key=lambda t: (t.bit_count(), t))
        minimal: list[int] = []
        for t in order:
            if not any(m & ~t == 0 for m in minimal):
                minimal.append(t)
        for t in minimal:
            rest = self.run(t, r - 1)
            if rest is not None:
                return [children[t]] + rest
        self._record_failure(table, r)
        return None


def exists_sorter(n: int, d: int, first_layer_fixed: bool = False, first: Optional[Layer] = None) -> Optional[Network]:
    """A sorting network on ``n`` channels of depth at most ``d``, or None.

    With ``first_layer_fixed`` the first layer is the canonical maximal one,
    which loses no solutions; ``first`` pins any other first layer.
    Returned networks have already passed the exhaustive zero-one check.
    """
    if n < 1 or d < 0:
        raise ValueError("need n >= 1 and d >= 0")
    if n > MAX_N or d > MAX_DEPTH:
        raise OracleRefused(f"exhaustive search is limited to n <= {MAX_N}, d <= {MAX_DEPTH}")
    if first is not None:
        check_layer(first, n)
    search = _Search(n)
    table = full_table(n)
    prefix: list[Layer] = []
    if first is None and first_layer_fixed and n >= 2:
        first = first_layer(n)
    if first is not None and d >= 1:
        prefix = [canonical_layer(first)]
        table = _apply_layer(table, n, prefix[0])
        d -= 1
    rest = search.run(table, d)
    if rest is None:
        return None
    net = Network(n, tuple(prefix + rest))
    if not is_sorting(net):
        raise AssertionError(f"oracle produced a non-sorting network:\n{net}")
    return net


def compute_V(n: int, max_depth: int = MAX_DEPTH) -> DepthBound:
    """Smallest depth of a sorting network on ``n`` channels, with a witness."""
    for d in range(0, max_depth + 1):
        net = exists_sorter(n, d, first_layer_fixed=True)
        if net is not None:
            return DepthBound(n, d, net.depth, net)
    raise OracleRefused(f"no sorter on {n} channels within depth {max_depth}")
