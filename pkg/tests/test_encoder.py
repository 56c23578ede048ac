import io
from math import comb

import pytest

from depthgate.bits import pack
from depthgate.dpll import DPLL, brute_force
from depthgate.encoder import (
    CnfFormula,
    DimacsError,
    InputSet,
    VarMap,
    build_Tm,
    dimacs_text,
    encode_existence,
    encode_inputs,
    encode_once_valid,
    encode_sorts,
    encode_subnets,
    encode_with_prefix,
    parse_dimacs,
)
from depthgate.layers import first_layer_network
from depthgate.network import Network, outputs
from depthgate.oracle import exists_sorter


def _sat(f: CnfFormula) -> bool:
    return DPLL(f.num_vars, f.clauses).solve()


def test_once_valid_three_channels():
    f = encode_once_valid(3, 1)
    assert f.num_vars == 3
    assert sorted(sorted(c) for c in f.clauses) == [[-3, -2], [-3, -1], [-2, -1]]


def test_once_valid_two_channels_is_empty():
    f = encode_once_valid(2, 1)
    assert f.num_vars == 1 and f.num_clauses == 0


@pytest.mark.parametrize("n, d", [(3, 1), (3, 2), (4, 1), (5, 3), (7, 2)])
def test_once_valid_clause_count(n, d):
    assert encode_once_valid(n, d).num_clauses == d * 3 * comb(n, 3)


def test_selector_layout_is_layer_major():
    vm = VarMap(4, 2, InputSet.of(4, []))
    ids = [vm.g(k, i, j) for k in (1, 2) for i in range(1, 5) for j in range(i + 1, 5)]
    assert ids == list(range(1, 13))


def test_sorts_forces_the_single_comparator():
    inputs = InputSet(2, (pack([1, 0]),), ((0, 0),))
    vm = VarMap(2, 1, inputs)
    f = encode_once_valid(2, 1, vm) & encode_sorts(2, 1, vm, 0)
    f.num_vars = vm.num_vars
    models = []
    for bits in range(1 << f.num_vars):
        a = [False] + [bool(bits >> v & 1) for v in range(f.num_vars)]
        if all(any(a[abs(l)] == (l > 0) for l in c) for c in f.clauses):
            models.append(a)
    assert models and all(m[vm.g(1, 1, 2)] for m in models)


def test_sorted_inputs_vanish():
    enc = encode_inputs(4, 2, InputSet.of(4, [0b0000, 0b1000, 0b1111]))
    assert enc.formula.num_vars == enc.varmap.num_g
    assert all(len(c) == 2 for c in enc.formula.clauses)  # only the once clauses remain


def test_hard_wiring_example():
    x = pack([0, 1, 0, 1])
    wired = encode_inputs(4, 3, InputSet.of(4, [x]))
    plain = encode_inputs(4, 3, InputSet(4, (x,), ((0, 0),)))
    assert wired.inputs.wiring == ((1, 1),)
    assert _sat(wired.formula) == _sat(plain.formula)
    assert wired.formula.num_vars < plain.formula.num_vars


@pytest.mark.parametrize("n", [1, 2, 3, 4])
@pytest.mark.parametrize("d", [0, 1, 2, 3])
def test_existence_agrees_with_oracle_and_hard_wiring(n, d):
    wired = _sat(encode_existence(n, d).formula)
    plain = _sat(encode_existence(n, d, hard_wire=False).formula)
    assert wired == plain == (exists_sorter(n, d) is not None)


def test_existence_examples():
    assert _sat(encode_existence(2, 1).formula)
    assert not _sat(encode_existence(4, 2).formula)
    assert _sat(encode_existence(4, 3).formula)


def test_with_prefix():
    f2 = encode_with_prefix(2, 1, first_layer_network(2))
    assert f2.free_depth == 0 and _sat(f2.formula)
    f4 = encode_with_prefix(4, 3, first_layer_network(4))
    assert len(f4.inputs) == 9 and _sat(f4.formula)
    assert not _sat(encode_with_prefix(4, 2, first_layer_network(4)).formula)
    with pytest.raises(ValueError):
        encode_with_prefix(4, 0, first_layer_network(4))


def test_build_Tm():
    T = InputSet.from_outputs(outputs(first_layer_network(4)))
    assert build_Tm(T, 4) == T
    T3 = build_Tm(T, 3)
    expected = {x for x in T.vectors if not x & 1 or x >> 3 & 1}
    assert set(T3.vectors) == expected
    for m in range(1, 5):
        assert set(build_Tm(T, m).vectors) <= set(T.vectors)
    with pytest.raises(ValueError):
        build_Tm(T, 0)


def test_subnets_at_full_size_is_the_prefix_formula():
    pre = first_layer_network(5)
    T = InputSet.from_outputs(outputs(pre))
    a = encode_subnets(5, 4, 5, T, pre).formula
    b = encode_with_prefix(5, 5, pre).formula
    assert dimacs_text(a) == dimacs_text(b)


@pytest.mark.parametrize("n", [4, 5])
def test_subnets_monotone_in_m(n):
    pre = first_layer_network(n)
    T = InputSet.from_outputs(outputs(pre))
    for d in range(1, n + 1):
        sats = [_sat(encode_subnets(n, d, m, T, pre).formula) for m in range(1, n + 1)]
        # a satisfiable larger instance makes every smaller one satisfiable
        for m in range(len(sats)):
            if sats[m]:
                assert all(sats[:m])


def test_counts_self_consistent():
    enc = encode_existence(5, 3)
    f = enc.formula
    f.validate()
    assert f.num_clauses == len(f.clauses)
    parsed = parse_dimacs(dimacs_text(f))
    assert (parsed.num_vars, parsed.num_clauses) == enc.counts()


def test_dimacs_roundtrip_and_empty():
    assert dimacs_text(CnfFormula(0)) == "p cnf 0 0\n"
    f = encode_once_valid(3, 1)
    text = dimacs_text(f)
    assert text.splitlines()[0] == "p cnf 3 3"
    assert parse_dimacs(text).clauses == f.clauses
    g = CnfFormula.from_clauses(2, [[1], [], [-1, 2], []])
    assert parse_dimacs(dimacs_text(g)).clauses == [[1], [], [-1, 2], []]


@pytest.mark.parametrize(
    "text, line",
    [("p cnf 1 1\n2 0\n", 2), ("1 0\n", 1), ("p cnf x 1\n", 1), ("p cnf 2 1\n1 a 0\n", 2), ("c only\n", 1)],
)
def test_dimacs_errors(text, line):
    with pytest.raises(DimacsError) as exc:
        parse_dimacs(io.StringIO(text))
    assert exc.value.lineno == line


def test_deterministic_bytes():
    pre = Network(6, (((1, 4), (2, 5), (3, 6)), ((1, 2), (4, 5))))
    T = InputSet.from_outputs(outputs(pre))
    a = dimacs_text(encode_subnets(6, 3, 4, T, pre).formula)
    b = dimacs_text(encode_subnets(6, 3, 4, T, pre).formula)
    assert a == b


def test_brute_force_reference():
    assert brute_force(1, [[1], [-1]]) is None
    assert brute_force(0, []) == [False]
