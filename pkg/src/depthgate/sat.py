"""Deciding encoded instances and turning models back into checked networks."""

from __future__ import annotations

import importlib.util
import os
import shlex
import subprocess
import sys
import tempfile
import time
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Optional

from .bits import is_sorted_vector
from .dpll import DPLL
from .encoder import CnfFormula, Encoding, VarMap, write_dimacs
from .network import Network, boolean_evaluate, compose, is_sorting, outputs

SOLVER_ENV = "DEPTHGATE_SOLVER"
INTERNAL_VAR_CAP = 4000


class Status(str, Enum):
    SAT = "SAT"
    UNSAT = "UNSAT"
    UNKNOWN = "UNKNOWN"


class SolverError(RuntimeError):
    """The solver could not be run at all."""


class IntegrityError(RuntimeError):
    """A model decodes to something that is not a valid network."""


class VerificationError(RuntimeError):
    """A decoded network fails to sort the inputs it was encoded for."""


@dataclass
class SolveOutcome:
    status: Status
    assignment: Optional[list[bool]] = None  # index 0 unused
    elapsed: float = 0.0
    solver_id: str = ""
    cause: str = ""
    defaulted: int = 0  # variables missing from the model, read as False

    def __post_init__(self) -> None:
        if (self.status is Status.SAT) != (self.assignment is not None):
            raise ValueError("an assignment is present exactly for SAT outcomes")


@dataclass
class SolverConfig:
    """How to reach a solver.

    ``command`` is a shell-style template with a ``{cnf}`` placeholder and an
    optional ``{out}`` placeholder; without ``{out}`` the result is read from
    standard output.  ``command=None`` means the internal solver.
    """

    command: Optional[str] = None
    time_limit: Optional[float] = None
    memory_note: str = ""
    fallback_internal: bool = False
    internal_var_cap: int = INTERNAL_VAR_CAP

    def __post_init__(self) -> None:
        if self.command is not None and "{cnf}" not in self.command:
            raise ValueError("solver command template needs a {cnf} placeholder")

    @property
    def solver_id(self) -> str:
        return "internal-dpll" if self.command is None else shlex.split(self.command)[0]

    @classmethod
    def default(cls, command: Optional[str] = None, **kw) -> SolverConfig:
        """Explicit command, else $DEPTHGATE_SOLVER, else the bundled pysat runner."""
        cmd = command or os.environ.get(SOLVER_ENV)
        if cmd is None and bundled_solver_available():
            cmd = bundled_solver_command()
        return cls(command=cmd, **kw)


def bundled_solver_available() -> bool:
    return importlib.util.find_spec("pysat") is not None


def bundled_solver_command(backend: str = "cadical153") -> str:
    return f"{shlex.quote(sys.executable)} -m depthgate.pysat_solver --backend {backend} {{cnf}}"


def parse_competition_output(text: str, num_vars: int) -> tuple[Status, Optional[list[bool]], int, str]:
    """Parse ``s``/``v`` lines.  Returns (status, assignment, defaulted, cause)."""
    status = None
    values: dict[int, bool] = {}
    terminated = False
    for raw in text.splitlines():
        line = raw.strip()
        if line.startswith("s "):
            word = line[2:].strip()
            if word == "SATISFIABLE":
                status = Status.SAT
            elif word == "UNSATISFIABLE":
                status = Status.UNSAT
            else:
                status = Status.UNKNOWN
        elif line.startswith("v ") or line == "v":
            for tok in line[1:].split():
                try:
                    lit = int(tok)
                except ValueError:
                    return Status.UNKNOWN, None, 0, f"malformed value token {tok!r}"
                if lit == 0:
                    terminated = True
                    continue
                if abs(lit) > num_vars:
                    continue
                values[abs(lit)] = lit > 0
    if status is None:
        return Status.UNKNOWN, None, 0, "malformed output: no status line"
    if status is not Status.SAT:
        return status, None, 0, "" if status is Status.UNSAT else "solver reported UNKNOWN"
    if values and not terminated:
        return Status.UNKNOWN, None, 0, "malformed output: unterminated model"
    assignment = [False] * (num_vars + 1)
    for v, b in values.items():
        assignment[v] = b
    return Status.SAT, assignment, num_vars - len(values), ""


def solve_external(f: CnfFormula, cfg: SolverConfig, cnf_path: Optional[Path] = None) -> SolveOutcome:
    """Run the configured command on a DIMACS file; stdout is kept in ``<cnf>.out``."""
    if cfg.command is None:
        raise SolverError("no external solver configured")
    tmpdir = None
    if cnf_path is None:
        tmpdir = tempfile.TemporaryDirectory(prefix="depthgate-")
        cnf_path = Path(tmpdir.name) / "instance.cnf"
        write_needed = True
    else:
        cnf_path = Path(cnf_path)
        write_needed = not cnf_path.exists()
    try:
        if write_needed:
            with open(cnf_path, "w") as fh:
                write_dimacs(f, fh)
        out_path = Path(str(cnf_path) + ".out")
        cmd = cfg.command.format(cnf=shlex.quote(str(cnf_path)), out=shlex.quote(str(out_path)))
        start = time.monotonic()
        try:
            proc = subprocess.run(
                cmd, shell=True, capture_output=True, text=True, timeout=cfg.time_limit
            )
        except subprocess.TimeoutExpired:
            return SolveOutcome(Status.UNKNOWN, elapsed=time.monotonic() - start, solver_id=cfg.solver_id, cause="timeout")
        except OSError as exc:
            raise SolverError(f"cannot start solver: {exc}") from exc
        elapsed = time.monotonic() - start
        if proc.returncode == 127:
            raise SolverError(f"solver command not found: {cmd}\n{proc.stderr.strip()}")
        if "{out}" in cfg.command:
            text = out_path.read_text() if out_path.exists() else ""
        else:
            text = proc.stdout
            out_path.write_text(text)
        status, assignment, defaulted, cause = parse_competition_output(text, f.num_vars)
        # exit codes 10/20 only corroborate; the status line decides
        if status is Status.SAT and proc.returncode not in (0, 10):
            cause = f"exit code {proc.returncode} disagrees with status line"
        if status is Status.UNSAT and proc.returncode not in (0, 20):
            cause = f"exit code {proc.returncode} disagrees with status line"
        return SolveOutcome(status, assignment, elapsed, cfg.solver_id, cause, defaulted)
    finally:
        if tmpdir is not None:
            tmpdir.cleanup()


def solve_internal(
    f: CnfFormula,
    var_cap: int = INTERNAL_VAR_CAP,
    max_decisions: Optional[int] = None,
    time_limit: Optional[float] = None,
) -> SolveOutcome:
    if f.num_vars > var_cap:
        return SolveOutcome(Status.UNKNOWN, solver_id="internal-dpll", cause=f"{f.num_vars} variables exceed cap {var_cap}")
    start = time.monotonic()
    solver = DPLL(f.num_vars, f.clauses)
    deadline = start + time_limit if time_limit else None
    res = solver.solve(max_decisions=max_decisions, deadline=deadline)
    elapsed = time.monotonic() - start
    if res is None:
        return SolveOutcome(Status.UNKNOWN, elapsed=elapsed, solver_id="internal-dpll", cause="search limit reached")
    if res:
        return SolveOutcome(Status.SAT, solver.model(), elapsed, "internal-dpll")
    return SolveOutcome(Status.UNSAT, elapsed=elapsed, solver_id="internal-dpll")


def solve(f: CnfFormula, cfg: Optional[SolverConfig] = None, cnf_path: Optional[Path] = None) -> SolveOutcome:
    """Dispatch on the configuration; external failures may fall back to the internal solver."""
    cfg = cfg or SolverConfig()
    if cfg.command is None:
        return solve_internal(f, cfg.internal_var_cap, time_limit=cfg.time_limit)
    try:
        return solve_external(f, cfg, cnf_path)
    except SolverError:
        if not cfg.fallback_internal:
            raise
        return solve_internal(f, cfg.internal_var_cap, time_limit=cfg.time_limit)


def decode_network(vm: VarMap, outcome: SolveOutcome) -> Network:
    """Layer ``k`` holds ``(i, j)`` exactly when its selector is true."""
    if outcome.status is not Status.SAT or outcome.assignment is None:
        raise ValueError("only SAT outcomes carry a network")
    a = outcome.assignment
    n = vm.n
    layers = []
    for k in range(1, vm.d + 1):
        layer = []
        used: set[int] = set()
        for i in range(1, n + 1):
            for j in range(i + 1, n + 1):
                if a[vm.g(k, i, j)]:
                    if i in used or j in used:
                        raise IntegrityError(f"channel used twice in layer {k}")
                    used.update((i, j))
                    layer.append((i, j))
        layers.append(tuple(layer))
    return Network(n, tuple(layers))


def verify_outcome(enc: Encoding, outcome: SolveOutcome) -> bool:
    """Re-evaluate the decoded network on every encoded input.

    With a prefix the full network is ``prefix ; decoded``.  When the encoded
    inputs are all outputs of the prefix (or all inputs), the full network
    must also pass the exhaustive zero-one check.
    """
    if outcome.status is not Status.SAT:
        raise ValueError("verification needs a SAT outcome")
    try:
        free = decode_network(enc.varmap, outcome)
    except IntegrityError:
        return False
    n = enc.varmap.n
    for x in enc.inputs.vectors:
        if not is_sorted_vector(boolean_evaluate(free, x), n):
            return False
    prefix = enc.prefix if enc.prefix is not None else Network(n)
    reachable = outputs(prefix)
    if set(enc.inputs.vectors) >= set(reachable.members().tolist()):
        return is_sorting(compose(prefix, free))
    return True


def verified_network(enc: Encoding, outcome: SolveOutcome) -> Network:
    """The full verified network of a SAT outcome; raises if verification fails."""
    if not verify_outcome(enc, outcome):
        raise VerificationError("decoded network does not sort the encoded inputs")
    free = decode_network(enc.varmap, outcome)
    return compose(enc.prefix, free) if enc.prefix is not None else free
