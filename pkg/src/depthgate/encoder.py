"""CNF encodings of "some depth-d comparator network sorts these inputs".

Variables are comparator selectors ``g[k, i, j]`` (layer ``k``, channels
``i < j``) followed by channel values ``v[t, k, i]`` for every encoded input
``t``.  Channel values known in advance (leading zeros and trailing ones of
an input stay put in a standard network) are substituted as constants and
get no variable.  All formulas are built by direct clausal expansion, without
auxiliary variables.

The clause structure for one input depends only on its hard-wired prefix and
suffix lengths, so clauses are instantiated from cached per-pattern templates
with numpy.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from typing import IO, Iterable, Iterator, Optional, Sequence

import numpy as np

from .bits import OutputSet, is_sorted_vector, leading_zeros, sorted_vector, trailing_ones
from .network import Network, outputs


class CnfFormula:
    """Clauses over variables ``1..num_vars`` stored as one flat 0-terminated literal array."""

    __slots__ = ("num_vars", "lits", "num_clauses")

    def __init__(self, num_vars: int, lits: Optional[np.ndarray] = None, num_clauses: Optional[int] = None):
        self.num_vars = num_vars
        self.lits = np.zeros(0, dtype=np.int64) if lits is None else np.asarray(lits, dtype=np.int64)
        self.num_clauses = int(np.count_nonzero(self.lits == 0)) if num_clauses is None else num_clauses

    @classmethod
    def from_clauses(cls, num_vars: int, clauses: Iterable[Sequence[int]]) -> CnfFormula:
        flat: list[int] = []
        count = 0
        for clause in clauses:
            clause = _normalize_clause(clause)
            if clause is None:
                continue
            flat.extend(clause)
            flat.append(0)
            count += 1
        return cls(num_vars, np.array(flat, dtype=np.int64), count)

    @property
    def clauses(self) -> list[list[int]]:
        return list(self.iter_clauses())

    def iter_clauses(self) -> Iterator[list[int]]:
        cur: list[int] = []
        for lit in self.lits.tolist():
            if lit == 0:
                yield cur
                cur = []
            else:
                cur.append(lit)

    def __len__(self) -> int:
        return self.num_clauses

    def __and__(self, other: CnfFormula) -> CnfFormula:
        return CnfFormula(
            max(self.num_vars, other.num_vars),
            np.concatenate([self.lits, other.lits]),
            self.num_clauses + other.num_clauses,
        )

    def validate(self) -> None:
        """Check the stored clauses: literals in range, no duplicates, no tautologies."""
        if self.lits.size and np.abs(self.lits).max() > self.num_vars:
            raise ValueError("literal exceeds num_vars")
        for clause in self.iter_clauses():
            if len(set(clause)) != len(clause):
                raise ValueError(f"duplicate literal in {clause}")
            if any(-lit in clause for lit in clause):
                raise ValueError(f"tautological clause {clause}")

    def __repr__(self) -> str:
        return f"CnfFormula(vars={self.num_vars}, clauses={self.num_clauses})"


def _normalize_clause(clause: Sequence[int]) -> Optional[list[int]]:
    """Drop duplicate literals; ``None`` for a tautology."""
    out: list[int] = []
    seen: set[int] = set()
    for lit in clause:
        if lit == 0:
            raise ValueError("0 is not a literal")
        if -lit in seen:
            return None
        if lit not in seen:
            seen.add(lit)
            out.append(lit)
    return out


@dataclass(frozen=True)
class InputSet:
    """Boolean inputs, each tagged with the (p, q) it is hard-wired by."""

    n: int
    vectors: tuple[int, ...]
    wiring: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        for x, (p, q) in zip(self.vectors, self.wiring):
            if leading_zeros(x, self.n) < p or trailing_ones(x, self.n) < q:
                raise ValueError(f"vector {x:#x} is not of the form 0^{p} y 1^{q}")

    @classmethod
    def of(cls, n: int, vectors: Iterable[int]) -> InputSet:
        """Inputs hard-wired by their maximal zero prefix and one suffix."""
        vs = tuple(sorted(set(vectors)))
        return cls(n, vs, tuple(_maximal_wiring(x, n) for x in vs))

    @classmethod
    def from_outputs(cls, outs: OutputSet) -> InputSet:
        return cls.of(outs.n, outs.members().tolist())

    @classmethod
    def all_inputs(cls, n: int) -> InputSet:
        return cls.of(n, range(1 << n))

    def __len__(self) -> int:
        return len(self.vectors)


def _maximal_wiring(x: int, n: int) -> tuple[int, int]:
    p = leading_zeros(x, n)
    q = trailing_ones(x, n)
    if p + q > n:  # constant vectors
        return (n, 0) if x == 0 else (0, n)
    return p, q


def build_Tm(inputs: InputSet, m: int) -> InputSet:
    """Members of the form ``0^p y 1^q`` with ``p + q = n - m`` for some split."""
    n = inputs.n
    if not 1 <= m <= n:
        raise ValueError(f"subnetwork size {m} outside 1..{n}")
    if m == n:
        return inputs
    r = n - m
    keep = [
        (x, w)
        for x, w in zip(inputs.vectors, inputs.wiring)
        if leading_zeros(x, n) + min(trailing_ones(x, n), r) >= r
    ]
    return InputSet(n, tuple(x for x, _ in keep), tuple(w for _, w in keep))


@dataclass
class VarMap:
    """Deterministic variable layout for ``n`` channels, depth ``d`` and some inputs.

    Selector ids come first (layer-major, then ``(i, j)`` lexicographic);
    value ids follow per input, then layer ``k = 0..d``, then channel, and
    only for channels not hard-wired for that input.
    """

    n: int
    d: int
    inputs: InputSet
    bases: list[int] = field(default_factory=list)
    encoded: list[int] = field(default_factory=list)
    num_vars: int = 0

    def __post_init__(self) -> None:
        n, d = self.n, self.d
        nxt = self.num_g + 1
        for t, (x, (p, q)) in enumerate(zip(self.inputs.vectors, self.inputs.wiring)):
            if is_sorted_vector(x, n):
                # standard networks leave sorted inputs untouched
                self.bases.append(0)
                continue
            self.bases.append(nxt)
            self.encoded.append(t)
            nxt += (d + 1) * (n - p - q)
        self.num_vars = nxt - 1

    @property
    def num_g(self) -> int:
        return self.d * self.n * (self.n - 1) // 2

    def g(self, k: int, i: int, j: int) -> int:
        """Selector for comparator ``(i, j)`` in layer ``k`` (1-based, ``i < j``)."""
        return _g_id(self.n, k, i, j)

    def v(self, t: int, k: int, i: int):
        """Value id of channel ``i`` after layer ``k`` on input ``t``, or its constant."""
        x = self.inputs.vectors[t]
        p, q = self.inputs.wiring[t]
        if i <= p:
            return False
        if i > self.n - q:
            return True
        if not self.bases[t]:
            return bool((x >> (i - 1)) & 1)
        width = self.n - p - q
        return self.bases[t] + k * width + (i - p - 1)


def _g_id(n: int, k: int, i: int, j: int) -> int:
    per_layer = n * (n - 1) // 2
    # index of (i, j) in lexicographic order of pairs
    idx = (i - 1) * n - (i - 1) * i // 2 + (j - i - 1)
    return (k - 1) * per_layer + idx + 1


def encode_once_valid(n: int, d: int, vm: Optional[VarMap] = None) -> CnfFormula:
    """Every channel occurs in at most one comparator per layer."""
    num_vars = vm.num_vars if vm is not None else d * n * (n - 1) // 2
    flat: list[int] = []
    count = 0
    for k in range(1, d + 1):
        for i in range(1, n + 1):
            gs = [_g_id(n, k, min(i, j), max(i, j)) for j in range(1, n + 1) if j != i]
            for a, b in combinations(gs, 2):
                flat.extend((-a, -b, 0))
                count += 1
    return CnfFormula(num_vars, np.array(flat, dtype=np.int64), count)


_VBIG = 1 << 40


@lru_cache(maxsize=256)
def _template(n: int, d: int, p: int, q: int) -> tuple[np.ndarray, int]:
    """Update clauses for one input hard-wired by (p, q), with value literals
    encoded as ``+-(_VBIG + local index)``.  Returns (flat codes, clause count)."""
    width = n - p - q

    def val(k: int, i: int):
        if i <= p:
            return False
        if i > n - q:
            return True
        return _VBIG + k * width + (i - p - 1)

    flat: list[int] = []
    count = 0

    def emit(lits) -> None:
        nonlocal count
        out = []
        for lit in lits:
            if lit is True:
                return
            if lit is False:
                continue
            out.append(lit)
        flat.extend(out)
        flat.append(0)
        count += 1

    def neg(x):
        return (not x) if isinstance(x, bool) else -x

    for k in range(1, d + 1):
        for i in range(p + 1, n - q + 1):
            cur, prev = val(k, i), val(k - 1, i)
            used = [_g_id(n, k, min(i, j), max(i, j)) for j in range(1, n + 1) if j != i]
            emit(used + [neg(cur), prev])
            emit(used + [cur, neg(prev)])
            for j in range(1, n + 1):
                if j == i:
                    continue
                other = val(k - 1, j)
                if j < i:
                    g = _g_id(n, k, j, i)  # i takes the maximum
                    emit([-g, cur, neg(other)])
                    emit([-g, cur, neg(prev)])
                    emit([-g, neg(cur), other, prev])
                else:
                    g = _g_id(n, k, i, j)  # i takes the minimum
                    emit([-g, neg(cur), other])
                    emit([-g, neg(cur), prev])
                    emit([-g, cur, neg(other), neg(prev)])
    return np.array(flat, dtype=np.int64), count


def _instantiate(codes: np.ndarray, bases: np.ndarray) -> np.ndarray:
    """Rows of ``codes`` with value literals shifted to each base id."""
    mag = np.abs(codes)
    is_v = mag >= _VBIG
    sign = np.sign(codes)
    local = np.where(is_v, mag - _VBIG, 0)
    out = np.where(is_v[None, :], sign[None, :] * (local[None, :] + bases[:, None]), codes[None, :])
    return out.ravel()


def encode_sorts(n: int, d: int, vm: VarMap, t: int) -> CnfFormula:
    """Input units, layer updates and sorted-output units for input ``t``."""
    return _encode_inputs(n, d, vm, [t])


def _encode_inputs(n: int, d: int, vm: VarMap, which: Sequence[int]) -> CnfFormula:
    groups: dict[tuple[int, int], list[int]] = {}
    for t in which:
        if vm.bases[t]:
            groups.setdefault(vm.inputs.wiring[t], []).append(t)
    pieces: list[np.ndarray] = []
    count = 0
    for (p, q) in sorted(groups):
        ts = groups[(p, q)]
        width = n - p - q
        bases = np.array([vm.bases[t] for t in ts], dtype=np.int64)
        xs = np.array([vm.inputs.vectors[t] for t in ts], dtype=np.int64)
        ys = np.array([sorted_vector(vm.inputs.vectors[t], n) for t in ts], dtype=np.int64)
        chans = np.arange(p, n - q, dtype=np.int64)  # 0-based live channels
        # input units v[0, i] <-> x_i and output units v[d, i] <-> y_i
        for k, vals in ((0, xs), (d, ys)):
            ids = bases[:, None] + k * width + (chans - p)[None, :]
            bitv = (vals[:, None] >> chans[None, :]) & 1
            lits = np.where(bitv == 1, ids, -ids)
            units = np.stack([lits, np.zeros_like(lits)], axis=-1).ravel()
            pieces.append(units)
            count += lits.size
        codes, per = _template(n, d, p, q)
        if per:
            pieces.append(_instantiate(codes, bases))
            count += per * len(ts)
    lits = np.concatenate(pieces) if pieces else np.zeros(0, dtype=np.int64)
    return CnfFormula(vm.num_vars, lits, count)


@dataclass
class Encoding:
    """A formula together with everything needed to decode and check its models."""

    formula: CnfFormula
    varmap: VarMap
    prefix: Optional[Network] = None

    @property
    def inputs(self) -> InputSet:
        return self.varmap.inputs

    @property
    def free_depth(self) -> int:
        return self.varmap.d

    def counts(self) -> tuple[int, int]:
        return self.formula.num_vars, self.formula.num_clauses


def encode_inputs(n: int, d: int, inputs: InputSet, prefix: Optional[Network] = None) -> Encoding:
    """``valid`` for depth ``d`` conjoined with ``sorts`` for every input."""
    if n < 1 or d < 0:
        raise ValueError("need n >= 1 and d >= 0")
    if inputs.n != n:
        raise ValueError("input width differs from n")
    vm = VarMap(n, d, inputs)
    valid = encode_once_valid(n, d, vm)
    body = _encode_inputs(n, d, vm, range(len(inputs)))
    formula = valid & body
    formula.num_vars = vm.num_vars
    return Encoding(formula, vm, prefix)


def encode_existence(n: int, d: int, hard_wire: bool = True) -> Encoding:
    """Satisfiable iff some depth-``d`` network sorts all ``2**n`` inputs."""
    inputs = InputSet.all_inputs(n)
    if not hard_wire:
        inputs = _unwired(inputs)
    return encode_inputs(n, d, inputs)


def _unwired(inputs: InputSet) -> InputSet:
    return InputSet(inputs.n, inputs.vectors, tuple((0, 0) for _ in inputs.vectors))


def encode_with_prefix(n: int, d: int, prefix: Network, hard_wire: bool = True) -> Encoding:
    """Satisfiable iff ``prefix`` extends to a depth-``d`` sorting network."""
    if prefix.n != n:
        raise ValueError("prefix width differs from n")
    if prefix.generalized:
        raise ValueError("prefix must be a standard network")
    if prefix.depth > d:
        raise ValueError(f"prefix depth {prefix.depth} exceeds target depth {d}")
    inputs = InputSet.from_outputs(outputs(prefix))
    if not hard_wire:
        inputs = _unwired(inputs)
    return encode_inputs(n, d - prefix.depth, inputs, prefix)


def encode_subnets(n: int, d_remaining: int, m: int, inputs: InputSet, prefix: Optional[Network] = None) -> Encoding:
    """Restriction to inputs of ``T_m``; unsatisfiable means no completion sorts ``inputs``."""
    return encode_inputs(n, d_remaining, build_Tm(inputs, m), prefix)


# DIMACS


class DimacsError(ValueError):
    def __init__(self, lineno: int, msg: str):
        super().__init__(f"line {lineno}: {msg}")
        self.lineno = lineno


def dimacs_text(f: CnfFormula, comments: Sequence[str] = ()) -> str:
    buf = io.StringIO()
    write_dimacs(f, buf, comments)
    return buf.getvalue()


def write_dimacs(f: CnfFormula, sink: IO[str], comments: Sequence[str] = ()) -> None:
    for c in comments:
        sink.write(f"c {c}\n")
    sink.write(f"p cnf {f.num_vars} {f.num_clauses}\n")
    lits = f.lits
    if not lits.size:
        return
    # a literal 0 only ever terminates a clause, so " 0 " marks line ends
    step = 1 << 20
    start = 0
    ends = np.flatnonzero(lits == 0)
    while start < lits.size:
        stop_idx = np.searchsorted(ends, start + step)
        stop = int(ends[min(stop_idx, len(ends) - 1)]) + 1
        chunk = lits[start:stop].tolist()
        text = " ".join(map(str, chunk))
        text = text.replace(" 0 ", " 0\n")
        if text.startswith("0 "):
            text = "0\n" + text[2:]
        while "\n0 " in text:  # consecutive empty clauses
            text = text.replace("\n0 ", "\n0\n")
        sink.write(text)
        sink.write("\n")
        start = stop


def parse_dimacs(source: IO[str] | str) -> CnfFormula:
    text = source if isinstance(source, str) else source.read()
    header: Optional[tuple[int, int]] = None
    flat: list[int] = []
    count = 0
    pending = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if header is not None:
                raise DimacsError(lineno, "second header")
            if len(parts) != 4 or parts[1] != "cnf" or not parts[2].isdigit() or not parts[3].isdigit():
                raise DimacsError(lineno, f"malformed header {line!r}")
            header = (int(parts[2]), int(parts[3]))
            continue
        if header is None:
            raise DimacsError(lineno, "clause before header")
        for tok in line.split():
            try:
                lit = int(tok)
            except ValueError:
                raise DimacsError(lineno, f"bad literal {tok!r}") from None
            if abs(lit) > header[0]:
                raise DimacsError(lineno, f"literal {lit} exceeds declared {header[0]} variables")
            flat.append(lit)
            if lit == 0:
                count += 1
                pending = False
            else:
                pending = True
    if header is None:
        raise DimacsError(1, "missing 'p cnf' header")
    if pending:
        flat.append(0)
        count += 1
    if count != header[1]:
        raise DimacsError(lineno if text else 1, f"header declares {header[1]} clauses, found {count}")
    return CnfFormula(header[0], np.array(flat, dtype=np.int64), count)
