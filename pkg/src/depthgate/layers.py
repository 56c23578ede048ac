"""Second-layer candidate sets over the fixed first layer.

The first layer is fixed to ``F_n = {(i, ceil(n/2) + i)}``.  Candidates for
the second layer are reduced in stages: saturated layers, representatives up
to permutations fixing ``F_n`` (``R``), and representatives up to permuted
output sets (``R_po``).  Optionally mirror-image candidates are merged.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from itertools import permutations as _all_perms
from typing import Iterator, Optional, Sequence

import numpy as np

from .bits import OutputSet, apply_comparator_to_table, full_table
from .network import Layer, Network, Permutation, canonical_layer

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class LayerSet:
    n: int
    layers: tuple[Layer, ...]

    def __len__(self) -> int:
        return len(self.layers)

    def __iter__(self) -> Iterator[Layer]:
        return iter(self.layers)

    def __getitem__(self, k: int) -> Layer:
        return self.layers[k]

    def __contains__(self, layer: object) -> bool:
        return layer in set(self.layers)

    def filter(self, pred) -> LayerSet:
        return LayerSet(self.n, tuple(L for L in self.layers if pred(L)))


def first_layer(n: int) -> Layer:
    if n < 1:
        raise ValueError("n must be positive")
    c = (n + 1) // 2
    return tuple((i, c + i) for i in range(1, n // 2 + 1))


def first_layer_network(n: int) -> Network:
    return Network(n, (first_layer(n),))


def _matchings(n: int) -> list[Layer]:
    out: list[Layer] = []
    used = [False] * (n + 2)

    def rec(i: int, cur: list) -> None:
        while i <= n and used[i]:
            i += 1
        if i > n:
            out.append(tuple(cur))
            return
        used[i] = True
        rec(i + 1, cur)
        for j in range(i + 1, n + 1):
            if not used[j]:
                used[j] = True
                cur.append((i, j))
                rec(i + 1, cur)
                cur.pop()
                used[j] = False
        used[i] = False

    rec(1, [])
    return out


def enumerate_layers(n: int) -> LayerSet:
    """Every layer (matching) on ``n`` channels, empty layer included, in lexicographic order."""
    if not 1 <= n <= 16:
        raise ValueError("layer enumeration supports 1 <= n <= 16")
    return LayerSet(n, tuple(sorted(_matchings(n))))


def _unused(n: int, layer: Layer) -> set[int]:
    free = set(range(1, n + 1))
    for a, b in layer:
        free.discard(a)
        free.discard(b)
    return free


def is_saturated(n: int, layer: Layer) -> bool:
    """Saturation with respect to ``F_n``.

    A saturated layer shares no comparator with ``F_n``.  For odd ``n`` its
    unused channels must additionally be all min-channels of ``F_n``, all
    max-channels, or just the middle channel (the one ``F_n`` leaves free).
    For even ``n`` the first condition alone is used, which is the set the
    published candidate counts refer to.
    """
    f = set(first_layer(n))
    if any(c in f for c in layer):
        return False
    if n % 2 == 0:
        return True
    half, mid = n // 2, (n + 1) // 2
    free = _unused(n, layer)
    return free == {mid} or all(c <= half for c in free) or all(c > mid for c in free)


def is_exchange_closed(n: int, layer: Layer) -> bool:
    """No ``F_n`` comparator, and no comparator can be added that shrinks the output set.

    Adding a min-max comparator between an unused min-channel and an unused
    max-channel of ``F_n`` (or, for odd ``n``, touching the unused middle
    channel) never enlarges ``outputs(F_n ; L)``, so every layer is dominated
    by a closed one.  For odd ``n`` this coincides with :func:`is_saturated`.
    """
    f = set(first_layer(n))
    if any(c in f for c in layer):
        return False
    half, mid = n // 2, (n + 1) // 2
    free = _unused(n, layer)
    if n % 2 and mid in free and len(free) > 1:
        return False
    lows = [c for c in free if c <= half]
    highs = [c for c in free if c > mid]
    return not any((lo, hi) not in f for lo in lows for hi in highs)


def saturated_layers(n: int) -> LayerSet:
    return enumerate_layers(n).filter(lambda L: is_saturated(n, L))


@dataclass(frozen=True)
class FirstLayerGroup:
    """Permutations mapping ``F_n`` onto itself, min-channels to min-channels."""

    n: int
    permutations: tuple[Permutation, ...]
    generators: tuple[Permutation, ...] = field(default=(), compare=False)

    def __len__(self) -> int:
        return len(self.permutations)


def _lift(n: int, sigma: Sequence[int]) -> Permutation:
    # sigma permutes comparator indices 1..n//2 of F_n
    c = (n + 1) // 2
    images = list(range(1, n + 1))
    for i, s in enumerate(sigma, start=1):
        images[i - 1] = s
        images[c + i - 1] = c + s
    return Permutation(tuple(images))


def fixing_group(n: int) -> FirstLayerGroup:
    if n < 2:
        raise ValueError("n must be at least 2")
    h = n // 2
    perms = tuple(_lift(n, s) for s in _all_perms(range(1, h + 1)))
    gens = []
    if h >= 2:
        gens.append(_lift(n, (2, 1) + tuple(range(3, h + 1))))
        gens.append(_lift(n, tuple(range(2, h + 1)) + (1,)))
    return FirstLayerGroup(n, perms, tuple(gens))


def _image(table: Sequence[int], layer: Layer, oriented: bool) -> Layer:
    out = []
    for a, b in layer:
        x, y = table[a], table[b]
        out.append((x, y) if oriented or x < y else (y, x))
    out.sort(key=lambda c: (min(c), max(c)))
    return tuple(out)


def representatives_R(layers: LayerSet, group: FirstLayerGroup, oriented: bool = True) -> LayerSet:
    """Lexicographically smallest member of each orbit under the group.

    With ``oriented`` the group acts on comparators as ordered pairs, so a
    layer is only identified with images that are themselves standard
    layers.  Without it, images are renormalised to min-max orientation;
    this coarser partition is still sound for second layers because flipping
    comparators of the last layer only permutes output channels.
    """
    members = set(layers.layers)
    gens = [(0,) + g.images for g in (group.generators or group.permutations)]
    seen: set[Layer] = set()
    reps = []
    for L in layers.layers:
        if L in seen:
            continue
        orbit = {L}
        stack = [L]
        while stack:
            cur = stack.pop()
            for g in gens:
                img = _image(g, cur, oriented)
                if img not in orbit:
                    orbit.add(img)
                    stack.append(img)
        inside = orbit & members
        seen |= inside
        reps.append(min(inside))
    return LayerSet(layers.n, tuple(sorted(reps)))


# permuted-output preorder


def prefix_outputs(n: int, second: Layer) -> OutputSet:
    """``outputs(F_n ; second)``."""
    table = full_table(n)
    for a, b in first_layer(n) + tuple(second):
        table = apply_comparator_to_table(table, n, a, b)
    return OutputSet(n, table)


class PoProfile:
    """Output set of ``F_n ; L`` with the counting signatures used to prune witnesses.

    ``pair[i, j, 4k + 2u + v]`` counts outputs of weight ``k`` carrying ``u``
    on channel ``i`` and ``v`` on channel ``j`` (0-based channels).  The
    diagonal ``i == j`` carries the per-channel counts.
    """

    def __init__(self, n: int, layer: Layer, outs: Optional[OutputSet] = None):
        self.n = n
        self.layer = layer
        self.outputs = outs if outs is not None else prefix_outputs(n, layer)
        self.size = len(self.outputs)
        members = self.outputs.members()
        self.members = members
        flags = np.zeros(1 << n, dtype=bool)
        flags[members] = True
        self.flags = flags
        bitsm = ((members[:, None] >> np.arange(n)) & 1).astype(np.int32)
        w = bitsm.sum(axis=1)
        self.per_weight = np.bincount(w, minlength=n + 1)
        pair = np.zeros((n, n, 4 * (n + 1)), dtype=np.int32)
        for k in range(n + 1):
            mk = bitsm[w == k]
            if not len(mk):
                continue
            p11 = mk.T @ mk
            s = np.diag(p11)
            pair[:, :, 4 * k + 3] = p11
            pair[:, :, 4 * k + 2] = s[:, None] - p11
            pair[:, :, 4 * k + 1] = s[None, :] - p11
            pair[:, :, 4 * k] = len(mk) - s[:, None] - s[None, :] + p11
        self.pair = pair

    @property
    def channel_weight_counts(self) -> np.ndarray:
        """``[i, k]``: outputs of weight ``k`` with a 1 on channel ``i``."""
        return np.stack([np.diag(self.pair[:, :, 4 * k + 3]) for k in range(self.n + 1)], axis=1)


def _witness(b: PoProfile, a: PoProfile) -> Optional[list[int]]:
    """Search ``pi`` (A-channel -> B-channel, 0-based) with ``outputs(B) <= pi(outputs(A))``."""
    n = a.n
    if b.size > a.size or np.any(b.per_weight > a.per_weight):
        return None
    compat = np.all(a.pair[:, None, :, None, :] >= b.pair[None, :, None, :, :], axis=-1)
    pow2 = 1 << np.arange(n, dtype=np.int64)
    masks = (compat.astype(np.int64) @ pow2).tolist()  # [i][c][i'] -> mask over c'
    dom = [masks[i][c][i] >> c & 1 for i in range(n) for c in range(n)]
    domains = [sum(dom[i * n + c] << c for c in range(n)) for i in range(n)]
    if not all(domains):
        return None
    assign = [-1] * n
    members_b = b.members
    flags_a = a.flags

    def exact() -> bool:
        inv = [0] * n
        for i, c in enumerate(assign):
            inv[c] = i
        mapped = np.zeros_like(members_b)
        for c in range(n):
            mapped |= ((members_b >> c) & 1) << inv[c]
        return bool(flags_a[mapped].all())

    def rec(doms: list[int], free: list[int]) -> bool:
        if not free:
            return exact()
        i = min(free, key=lambda j: (doms[j].bit_count(), j))
        rest = [j for j in free if j != i]
        d = doms[i]
        row = masks[i]
        while d:
            low = d & -d
            c = low.bit_length() - 1
            d ^= low
            mc = row[c]
            new = list(doms)
            ok = True
            for j in rest:
                v = doms[j] & mc[j] & ~low
                if not v:
                    ok = False
                    break
                new[j] = v
            if not ok:
                continue
            assign[i] = c
            if rec(new, rest):
                return True
            assign[i] = -1
        return False

    if rec(domains, list(range(n))):
        return list(assign)
    return None


def po_witness(b: PoProfile, a: PoProfile) -> Optional[Permutation]:
    """Permutation ``pi`` with ``outputs(F;Lb) <= pi(outputs(F;La))``, re-verified exactly."""
    assign = _witness(b, a)
    if assign is None:
        return None
    pi = Permutation(tuple(c + 1 for c in assign))
    if not _verify_witness(b, a, pi):
        raise AssertionError("pruned witness failed exact inclusion")
    return pi


def _verify_witness(b: PoProfile, a: PoProfile, pi: Permutation) -> bool:
    image = OutputSet.from_vectors(a.n, (pi.apply_vector(x) for x in a.members.tolist()))
    return b.outputs.issubset(image)


def leq_po(n: int, lb: Layer, la: Layer) -> Optional[Permutation]:
    """Witness for ``lb <=_po la``, or ``None``."""
    return po_witness(PoProfile(n, lb), PoProfile(n, la))


def _rpo_from_profiles(profiles: list[PoProfile]) -> list[PoProfile]:
    # Smallest output sets first: a layer strictly below another has strictly
    # fewer outputs, so one pass keeps exactly one layer per minimal class.
    order = sorted(profiles, key=lambda p: (p.size, p.layer))
    kept: list[PoProfile] = []
    for p in order:
        if not any(po_witness(r, p) is not None for r in kept if r.size <= p.size):
            kept.append(p)
    return kept


def representatives_Rpo(layers: LayerSet) -> LayerSet:
    """Minimal set of layers covering ``layers`` under ``<=_po``."""
    profiles = [PoProfile(layers.n, L) for L in layers]
    kept = _rpo_from_profiles(profiles)
    return LayerSet(layers.n, tuple(p.layer for p in kept))


def candidate_second_layers(n: int) -> LayerSet:
    """``R_po(G_n)`` via ``R_po(R(closed layers))``.

    For odd ``n`` the closed layers are exactly the saturated ones.  Ordered
    by output-set size, then lexicographically.
    """
    if n < 3:
        return LayerSet(n, ((),)) if n >= 1 else LayerSet(n, ())
    closed = enumerate_layers(n).filter(lambda L: is_exchange_closed(n, L))
    reps = representatives_R(closed, fixing_group(n), oriented=False)
    log.info("n=%d: %d closed layers, %d up to F_n symmetry", n, len(closed), len(reps))
    return representatives_Rpo(reps)


def reflect_layer(n: int, layer: Layer) -> Layer:
    m = n + 1
    return canonical_layer((m - b, m - a) for a, b in layer)


def reflection_reduce(layers: LayerSet) -> LayerSet:
    """Keep one candidate from each mirror-image pair.

    Mirroring maps ``F_n`` onto itself and preserves ``<=_po``, so the mirror
    of a candidate is equivalent to exactly one candidate of a minimal
    covering set.  The earlier of the two is kept.
    """
    n = layers.n
    profiles = [PoProfile(n, L) for L in layers]
    dropped: set[int] = set()
    for idx, p in enumerate(profiles):
        if idx in dropped:
            continue
        mirror = PoProfile(n, reflect_layer(n, p.layer))
        for jdx in range(idx + 1, len(profiles)):
            q = profiles[jdx]
            if jdx in dropped or q.size != mirror.size:
                continue
            if po_witness(q, mirror) is not None:
                dropped.add(jdx)
                break
    return LayerSet(n, tuple(L for k, L in enumerate(layers) if k not in dropped))


def group_order(n: int) -> int:
    return math.factorial(n // 2)
