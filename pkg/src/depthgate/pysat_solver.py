"""Command-line SAT solver over python-sat, speaking the competition output format.

    python -m depthgate.pysat_solver [--backend NAME] FILE.cnf

Prints ``s SATISFIABLE`` plus ``v`` lines, or ``s UNSATISFIABLE``, and exits
with 10 or 20 respectively.
"""

from __future__ import annotations

import argparse
import sys

from .encoder import parse_dimacs


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="depthgate.pysat_solver")
    ap.add_argument("cnf")
    ap.add_argument("--backend", default="cadical153")
    args = ap.parse_args(argv)

    from pysat.solvers import Solver

    with open(args.cnf) as fh:
        f = parse_dimacs(fh)
    with Solver(name=args.backend, bootstrap_with=f.clauses) as s:
        sat = s.solve()
        model = s.get_model() if sat else None
    out = sys.stdout
    if not sat:
        out.write("s UNSATISFIABLE\n")
        return 20
    out.write("s SATISFIABLE\n")
    lits = list(model)
    chunk = 20
    for k in range(0, len(lits), chunk):
        out.write("v " + " ".join(map(str, lits[k:k + chunk])) + "\n")
    out.write("v 0\n")
    return 10


if __name__ == "__main__":
    sys.exit(main())
