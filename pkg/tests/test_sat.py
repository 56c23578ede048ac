import random
import sys

import pytest

from depthgate.dpll import DPLL, brute_force
from depthgate.encoder import CnfFormula, encode_existence, encode_with_prefix
from depthgate.layers import first_layer_network
from depthgate.network import Network, is_sorting
from depthgate.sat import (
    IntegrityError,
    SolveOutcome,
    SolverConfig,
    SolverError,
    Status,
    decode_network,
    parse_competition_output,
    solve,
    solve_external,
    solve_internal,
    verified_network,
    verify_outcome,
)


def _random_cnf(rng, nv, nc, width=3):
    return [[rng.choice((-1, 1)) * rng.randint(1, nv) for _ in range(rng.randint(1, width))] for _ in range(nc)]


def test_internal_matches_truth_table_on_random_formulas():
    rng = random.Random(2024)
    for _ in range(500):
        nv = rng.randint(1, 16)
        clauses = _random_cnf(rng, nv, rng.randint(0, 6 * nv))
        out = solve_internal(CnfFormula.from_clauses(nv, clauses))
        ref = brute_force(nv, clauses)
        assert (out.status is Status.SAT) == (ref is not None)
        if out.status is Status.SAT:
            assert all(any(out.assignment[abs(l)] == (l > 0) for l in c) for c in clauses)


def test_random_three_cnf_twelve_vars():
    rng = random.Random(5)
    for _ in range(20):
        clauses = [[rng.choice((-1, 1)) * v for v in rng.sample(range(1, 13), 3)] for _ in range(40)]
        assert DPLL(12, clauses).solve() == (brute_force(12, clauses) is not None)


def test_internal_trivial_cases():
    assert solve_internal(CnfFormula(0)).status is Status.SAT
    assert solve_internal(CnfFormula.from_clauses(1, [[1], [-1]])).status is Status.UNSAT
    assert solve_internal(CnfFormula.from_clauses(1, [[]])).status is Status.UNSAT


def test_internal_decides_three_channels():
    assert solve_internal(encode_existence(3, 2).formula).status is Status.UNSAT
    assert solve_internal(encode_existence(3, 3).formula).status is Status.SAT


def test_internal_cap_gives_unknown():
    out = solve_internal(CnfFormula(5000))
    assert out.status is Status.UNKNOWN and "cap" in out.cause


def test_decision_limit_gives_unknown():
    out = solve_internal(encode_existence(5, 4).formula, max_decisions=1)
    assert out.status is Status.UNKNOWN


def test_outcome_invariant():
    with pytest.raises(ValueError):
        SolveOutcome(Status.UNSAT, [False])
    with pytest.raises(ValueError):
        SolveOutcome(Status.SAT)


def test_competition_output_parsing():
    st, a, missing, _ = parse_competition_output("c hi\ns SATISFIABLE\nv 1 -2\nv 3 0\n", 4)
    assert st is Status.SAT and a[1:] == [True, False, True, False] and missing == 1
    assert parse_competition_output("s UNSATISFIABLE\n", 3)[0] is Status.UNSAT
    assert parse_competition_output("garbage\n", 3)[0] is Status.UNKNOWN
    assert parse_competition_output("s UNKNOWN\n", 3)[0] is Status.UNKNOWN
    st, _, _, cause = parse_competition_output("s SATISFIABLE\nv 1 x 0\n", 3)
    assert st is Status.UNKNOWN and "malformed" in cause
    assert parse_competition_output("s SATISFIABLE\nv 1 2\n", 3)[0] is Status.UNKNOWN


def _fake_solver(tmp_path, body):
    script = tmp_path / "fake.py"
    script.write_text(body)
    return SolverConfig(f"{sys.executable} {script} {{cnf}}")


def test_external_protocol_with_fake_solver(tmp_path):
    cfg = _fake_solver(tmp_path, "import sys\nprint('s SATISFIABLE')\nprint('v -1 2 0')\nsys.exit(10)\n")
    out = solve_external(CnfFormula.from_clauses(2, [[2]]), cfg, tmp_path / "x.cnf")
    assert out.status is Status.SAT and out.assignment[1:] == [False, True] and not out.cause
    assert (tmp_path / "x.cnf.out").read_text().startswith("s SATISFIABLE")


def test_external_exit_code_only_corroborates(tmp_path):
    cfg = _fake_solver(tmp_path, "import sys\nprint('s UNSATISFIABLE')\nsys.exit(10)\n")
    out = solve_external(CnfFormula.from_clauses(1, [[1], [-1]]), cfg)
    assert out.status is Status.UNSAT and "exit code" in out.cause


def test_external_output_file_placeholder(tmp_path):
    script = tmp_path / "w.py"
    script.write_text("import sys\nopen(sys.argv[2], 'w').write('s UNSATISFIABLE\\n')\nsys.exit(20)\n")
    cfg = SolverConfig(f"{sys.executable} {script} {{cnf}} {{out}}")
    assert solve_external(CnfFormula.from_clauses(1, [[1], [-1]]), cfg).status is Status.UNSAT


def test_external_timeout_and_malformed(tmp_path):
    slow = _fake_solver(tmp_path, "import time\ntime.sleep(10)\n")
    slow.time_limit = 0.5
    out = solve_external(CnfFormula(1), slow)
    assert out.status is Status.UNKNOWN and out.cause == "timeout"
    junk = _fake_solver(tmp_path, "print('hello')\n")
    out = solve_external(CnfFormula(1), junk)
    assert out.status is Status.UNKNOWN and "malformed" in out.cause


def test_external_spawn_failure():
    cfg = SolverConfig("/nonexistent/solver-binary {cnf}")
    with pytest.raises(SolverError):
        solve_external(CnfFormula(1), cfg)
    cfg.fallback_internal = True
    assert solve(CnfFormula(1), cfg).status is Status.SAT


def test_template_needs_cnf_placeholder():
    with pytest.raises(ValueError):
        SolverConfig("kissat")


def test_external_trivial_formulas(external_solver):
    out = solve(CnfFormula.from_clauses(1, [[1]]), external_solver)
    assert out.status is Status.SAT and out.assignment[1]
    assert solve(CnfFormula.from_clauses(1, [[1], [-1]]), external_solver).status is Status.UNSAT
    assert solve(encode_existence(4, 2).formula, external_solver).status is Status.UNSAT


def test_cross_solver_agreement(external_solver):
    rng = random.Random(9)
    formulas = [encode_existence(n, d).formula for n, d in [(3, 2), (3, 3), (4, 2), (4, 3)]]
    formulas += [CnfFormula.from_clauses(10, _random_cnf(rng, 10, 45)) for _ in range(15)]
    for f in formulas:
        assert solve_internal(f).status == solve(f, external_solver).status


def test_decode_single_comparator():
    enc = encode_existence(2, 1)
    out = solve_internal(enc.formula)
    assert decode_network(enc.varmap, out) == Network(2, (((1, 2),),))


def test_decode_and_verify_four_channels():
    enc = encode_existence(4, 3)
    out = solve_internal(enc.formula)
    net = verified_network(enc, out)
    assert net.depth == 3 and is_sorting(net)


def test_decode_with_prefix():
    enc = encode_with_prefix(4, 3, first_layer_network(4))
    out = solve_internal(enc.formula)
    free = decode_network(enc.varmap, out)
    assert free.depth == 2
    full = verified_network(enc, out)
    assert full.layers[0] == ((1, 3), (2, 4)) and is_sorting(full)


def test_tampered_model_fails_verification():
    enc = encode_existence(4, 3)
    out = solve_internal(enc.formula)
    vm = enc.varmap
    for k in range(1, 4):
        for i in range(1, 5):
            for j in range(i + 1, 5):
                g = vm.g(k, i, j)
                if out.assignment[g]:
                    bad = list(out.assignment)
                    bad[g] = False
                    assert not verify_outcome(enc, SolveOutcome(Status.SAT, bad))


def test_double_use_is_an_integrity_error():
    enc = encode_existence(3, 1)
    a = [False] * (enc.formula.num_vars + 1)
    a[enc.varmap.g(1, 1, 2)] = a[enc.varmap.g(1, 2, 3)] = True
    with pytest.raises(IntegrityError):
        decode_network(enc.varmap, SolveOutcome(Status.SAT, a))
    assert not verify_outcome(enc, SolveOutcome(Status.SAT, a))


def test_unsat_outcome_cannot_be_verified():
    enc = encode_existence(3, 2)
    with pytest.raises(ValueError):
        verify_outcome(enc, solve_internal(enc.formula))
