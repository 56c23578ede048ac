"""Comparator networks: evaluation, output sets, permutations and untangling.

Channels are 1-based.  A comparator ``(a, b)`` sends the minimum to channel
``a`` and the maximum to channel ``b``; in a standard network ``a < b``
always holds, a generalized network may also contain max-min comparators
with ``a > b``.  A layer is a tuple of channel-disjoint comparators kept in
canonical order (ascending by lower channel).
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations as _all_perms
from typing import Iterable, Optional, Sequence

from .bits import OutputSet, apply_comparator_to_table, check_width, full_table, is_sorted_vector

Comparator = tuple[int, int]
Layer = tuple[Comparator, ...]


class NetworkError(ValueError):
    """Malformed comparator, layer, network or permutation."""


def canonical_layer(comparators: Iterable[Comparator]) -> Layer:
    return tuple(sorted((tuple(c) for c in comparators), key=lambda c: (min(c), max(c))))


def check_layer(layer: Iterable[Comparator], n: int, generalized: bool = False) -> None:
    seen: set[int] = set()
    for a, b in layer:
        if not (1 <= a <= n and 1 <= b <= n) or a == b:
            raise NetworkError(f"bad comparator {a}:{b} on {n} channels")
        if a > b and not generalized:
            raise NetworkError(f"max-min comparator {a}:{b} in a standard network")
        if a in seen or b in seen:
            raise NetworkError(f"channel used twice in layer {layer!r}")
        seen.update((a, b))


def is_maximal(layer: Layer, n: int) -> bool:
    return len(layer) == n // 2


@dataclass(frozen=True)
class Permutation:
    """Channel relabelling; ``images[i - 1]`` is the image of channel ``i``."""

    images: tuple[int, ...]

    def __post_init__(self) -> None:
        if sorted(self.images) != list(range(1, len(self.images) + 1)):
            raise NetworkError(f"not a permutation: {self.images!r}")

    @classmethod
    def identity(cls, n: int) -> Permutation:
        return cls(tuple(range(1, n + 1)))

    @property
    def n(self) -> int:
        return len(self.images)

    def __call__(self, i: int) -> int:
        return self.images[i - 1]

    def then(self, other: Permutation) -> Permutation:
        """``other`` after ``self``: channel i goes to other(self(i))."""
        return Permutation(tuple(other.images[p - 1] for p in self.images))

    def inverse(self) -> Permutation:
        inv = [0] * self.n
        for i, p in enumerate(self.images, start=1):
            inv[p - 1] = i
        return Permutation(tuple(inv))

    def apply_vector(self, x: int) -> int:
        """Move the value of channel i to channel images[i]."""
        y = 0
        for i, p in enumerate(self.images):
            y |= ((x >> i) & 1) << (p - 1)
        return y

    def apply_values(self, values: Sequence) -> list:
        out = [None] * self.n
        for i, p in enumerate(self.images):
            out[p - 1] = values[i]
        return out


@dataclass(frozen=True)
class Network:
    n: int
    layers: tuple[Layer, ...] = ()
    generalized: bool = False

    def __post_init__(self) -> None:
        if self.n < 1:
            raise NetworkError("a network needs at least one channel")
        object.__setattr__(self, "layers", tuple(tuple(tuple(c) for c in L) for L in self.layers))
        for layer in self.layers:
            check_layer(layer, self.n, self.generalized)

    @classmethod
    def from_layers(cls, n: int, layers: Iterable[Iterable[Comparator]]) -> Network:
        """Build a network, flagging it generalized iff it has a max-min comparator."""
        ls = tuple(canonical_layer(L) for L in layers)
        gen = any(a > b for L in ls for a, b in L)
        return cls(n, ls, gen)

    @property
    def depth(self) -> int:
        return len(self.layers)

    def size(self) -> int:
        return sum(len(L) for L in self.layers)

    def comparators(self) -> Iterable[Comparator]:
        for L in self.layers:
            yield from L

    def has_max_min(self) -> bool:
        return any(a > b for a, b in self.comparators())

    def __str__(self) -> str:
        return format_network(self)


def evaluate(net: Network, x: Sequence) -> list:
    """Propagate arbitrary comparable values through the network."""
    if len(x) != net.n:
        raise ValueError(f"input has {len(x)} values, network has {net.n} channels")
    v = list(x)
    for layer in net.layers:
        for a, b in layer:
            lo, hi = v[a - 1], v[b - 1]
            if hi < lo:
                v[a - 1], v[b - 1] = hi, lo
    return v


def boolean_evaluate(net: Network, x: int) -> int:
    """Evaluate on a packed Boolean vector (min is AND, max is OR)."""
    check_width(x, net.n)
    for layer in net.layers:
        for a, b in layer:
            va = (x >> (a - 1)) & 1
            vb = (x >> (b - 1)) & 1
            if va and not vb:
                x ^= (1 << (a - 1)) | (1 << (b - 1))
    return x


def outputs(net: Network, inputs: Optional[OutputSet] = None) -> OutputSet:
    """Image of ``inputs`` (default: all ``2**n`` Boolean vectors)."""
    if inputs is None:
        table = full_table(net.n)
    else:
        if inputs.n != net.n:
            raise ValueError("width mismatch")
        table = inputs.table
    for layer in net.layers:
        for a, b in layer:
            table = apply_comparator_to_table(table, net.n, a, b)
    return OutputSet(net.n, table)


def is_sorting(net: Network) -> bool:
    """Zero-one check: every Boolean input comes out ascending."""
    return outputs(net).is_all_sorted()


def counterexample(net: Network) -> Optional[int]:
    """Smallest Boolean input the network fails to sort, if any."""
    for x in range(1 << net.n):
        if not is_sorted_vector(boolean_evaluate(net, x), net.n):
            return x
    return None


def compose(c: Network, d: Network) -> Network:
    if c.n != d.n:
        raise ValueError(f"cannot compose networks on {c.n} and {d.n} channels")
    return Network(c.n, c.layers + d.layers, c.generalized or d.generalized)


def permute_layer(pi: Permutation, layer: Layer) -> Layer:
    return canonical_layer((pi(a), pi(b)) for a, b in layer)


def apply_permutation(pi: Permutation, net: Network) -> Network:
    """Relabel channels; comparator orientation follows the images."""
    if pi.n != net.n:
        raise NetworkError("permutation and network widths differ")
    layers = tuple(permute_layer(pi, L) for L in net.layers)
    gen = any(a > b for L in layers for a, b in L)
    return Network(net.n, layers, gen)


def _transpose_layer(layer: Layer, i: int, j: int) -> Layer:
    def t(c: int) -> int:
        return j if c == i else i if c == j else c

    return canonical_layer((t(a), t(b)) for a, b in layer)


def untangle(g: Network) -> Network:
    """Standard network that sorts iff the generalized network ``g`` does.

    Each max-min comparator ``(a, b)`` is flipped and channels ``a`` and ``b``
    are swapped in every later layer.  Layers before the first max-min
    comparator are untouched.
    """
    layers = list(g.layers)
    for k in range(len(layers)):
        while True:
            flip = next(((a, b) for a, b in layers[k] if a > b), None)
            if flip is None:
                break
            a, b = flip
            layers[k] = canonical_layer((b, a) if (x, y) == flip else (x, y) for x, y in layers[k])
            for later in range(k + 1, len(layers)):
                layers[later] = _transpose_layer(layers[later], a, b)
    return Network(g.n, tuple(layers), False)


def is_generalized_sorting(g: Network) -> bool:
    return is_sorting(untangle(g))


def generalized_sorting_by_search(g: Network) -> bool:
    """Brute-force check over all output permutations; small ``n`` only."""
    outs = outputs(g).members().tolist()
    for perm in _all_perms(range(1, g.n + 1)):
        p = Permutation(tuple(perm))
        if all(is_sorted_vector(p.apply_vector(y), g.n) for y in outs):
            return True
    return False


def reflect(net: Network) -> Network:
    """Top-to-bottom mirror image: ``(i, j)`` becomes ``(n+1-j, n+1-i)``."""
    m = net.n + 1
    return Network(net.n, tuple(canonical_layer((m - b, m - a) for a, b in L) for L in net.layers), net.generalized)


def drop_last_channel(net: Network) -> Network:
    """Remove channel n and every comparator touching it."""
    if net.n < 2:
        raise NetworkError("cannot drop the only channel")
    return Network(net.n - 1, tuple(tuple(c for c in L if net.n not in c) for L in net.layers), net.generalized)


# text format


class ParseError(ValueError):
    def __init__(self, lineno: int, msg: str):
        super().__init__(f"line {lineno}: {msg}")
        self.lineno = lineno


def format_network(net: Network) -> str:
    lines = [f"{net.n} {net.depth}"]
    for layer in net.layers:
        lines.append(" ".join(f"{a}:{b}" for a, b in layer))
    return "\n".join(lines) + "\n"


def parse_network(text: str) -> Network:
    rows = [(no, line.rstrip("\r\n")) for no, line in enumerate(text.splitlines(), start=1)]
    rows = [(no, line) for no, line in rows if not line.lstrip().startswith("#")]
    if not rows:
        raise ParseError(1, "empty network file")
    no, header = rows[0]
    parts = header.split()
    if len(parts) != 2 or not all(p.isdigit() for p in parts):
        raise ParseError(no, f"expected 'n d' header, got {header!r}")
    n, d = int(parts[0]), int(parts[1])
    body = rows[1:]
    # trailing blank lines are only layers if the header asks for them
    while len(body) > d and not body[-1][1].strip():
        body.pop()
    if len(body) != d:
        raise ParseError(body[-1][0] if body else no, f"header announces {d} layers, found {len(body)}")
    layers = []
    for no, line in body:
        layer = []
        for tok in line.split():
            a, sep, b = tok.partition(":")
            if not sep or not a.isdigit() or not b.isdigit():
                raise ParseError(no, f"bad comparator token {tok!r}")
            layer.append((int(a), int(b)))
        try:
            check_layer(layer, n, generalized=True)
        except NetworkError as exc:
            raise ParseError(no, str(exc)) from None
        layers.append(layer)
    try:
        return Network.from_layers(n, layers)
    except NetworkError as exc:
        raise ParseError(no, str(exc)) from None
