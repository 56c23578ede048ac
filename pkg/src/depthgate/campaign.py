"""End-to-end proofs: candidate prefixes, subnet escalation, run logs, tables."""

from __future__ import annotations

import hashlib
import io
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Optional

from .encoder import Encoding, InputSet, encode_existence, encode_subnets, write_dimacs
from .layers import (
    candidate_second_layers,
    enumerate_layers,
    first_layer,
    fixing_group,
    reflection_reduce,
    representatives_R,
    saturated_layers,
)
from .network import Network, counterexample, format_network, outputs, parse_network
from .sat import SolveOutcome, SolverConfig, Status, solve, verified_network

MODES = ("plain", "fix1", "fix2")
RUN_LOG = "runs.log"
MANIFEST = "manifest.txt"


def default_m_schedule(n: int) -> list[int]:
    return sorted({m for m in range(n - 3, n + 1) if m >= 1})


def default_mode(n: int) -> str:
    return "fix2" if n >= 9 else "fix1"


@dataclass
class CampaignPlan:
    n: int
    d_target: int
    mode: str = "fix2"
    m_schedule: list[int] = field(default_factory=list)
    jobs: int = 1
    solver: SolverConfig = field(default_factory=SolverConfig)
    out_dir: Optional[Path] = None
    reflect: bool = False

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {', '.join(MODES)}")
        if self.n < 1 or self.d_target < 0:
            raise ValueError("need n >= 1 and d >= 0")
        if not self.m_schedule:
            self.m_schedule = default_m_schedule(self.n)
        ms = list(self.m_schedule)
        if any(b <= a for a, b in zip(ms, ms[1:])):
            raise ValueError("m-schedule must be strictly increasing")
        if ms[-1] != self.n or ms[0] < 1:
            raise ValueError(f"m-schedule must lie in 1..{self.n} and end at {self.n}")
        if self.jobs < 1:
            raise ValueError("jobs must be positive")
        if self.out_dir is not None:
            self.out_dir = Path(self.out_dir)


@dataclass(frozen=True)
class Candidate:
    index: int
    prefix: Network


def candidate_prefixes(n: int, d: int, mode: str, reflect: bool = False) -> list[Candidate]:
    """Prefix networks whose extensions jointly cover every depth-``d`` sorter."""
    if mode == "plain" or d == 0:
        return [Candidate(0, Network(n))]
    first = first_layer(n)
    if mode == "fix1" or d == 1:
        return [Candidate(0, Network(n, (first,)))]
    seconds = candidate_second_layers(n)
    if reflect:
        seconds = reflection_reduce(seconds)
    return [Candidate(k, Network(n, (first, L))) for k, L in enumerate(seconds)]


# run records


@dataclass(frozen=True)
class RunRecord:
    n: int
    d_total: int
    mode: str
    candidate: int
    m: int
    status: str
    elapsed_ms: int
    vars: int
    clauses: int
    cnf_path: str = "-"
    witness_path: str = "-"
    cause: str = "-"

    FIELDS = ("n", "d_total", "mode", "candidate", "m", "status", "elapsed_ms", "vars", "clauses", "cnf_path", "witness_path", "cause")

    def __post_init__(self) -> None:
        if self.status not in {s.value for s in Status}:
            raise ValueError(f"bad status {self.status!r}")
        if self.status == "SAT" and self.m == self.n and self.witness_path == "-":
            raise ValueError("a SAT record at m = n needs a witness")

    @property
    def key(self) -> tuple:
        return (self.n, self.d_total, self.mode, self.candidate, self.m)

    @property
    def conclusive(self) -> bool:
        return self.status != "UNKNOWN"

    def to_line(self) -> str:
        parts = []
        for name in self.FIELDS:
            value = str(getattr(self, name)).replace(" ", "_") or "-"
            parts.append(f"{name}={value}")
        return " ".join(parts)

    @classmethod
    def from_line(cls, line: str) -> RunRecord:
        kv = dict(tok.split("=", 1) for tok in line.split())
        ints = {"n", "d_total", "candidate", "m", "elapsed_ms", "vars", "clauses"}
        return cls(**{k: int(v) if k in ints else v for k, v in kv.items() if k in cls.FIELDS})


def load_records(path: Path) -> dict[tuple, RunRecord]:
    recs: dict[tuple, RunRecord] = {}
    if path.exists():
        for line in path.read_text().splitlines():
            if line.strip():
                r = RunRecord.from_line(line)
                recs[r.key] = r
    return recs


def append_record(path: Path, rec: RunRecord) -> None:
    with open(path, "a") as fh:
        fh.write(rec.to_line() + "\n")
        fh.flush()
        os.fsync(fh.fileno())


def write_sorted_log(path: Path, records: Iterable[RunRecord]) -> None:
    recs = sorted(records, key=lambda r: r.key)
    tmp = path.with_suffix(".tmp")
    tmp.write_text("".join(r.to_line() + "\n" for r in recs))
    tmp.replace(path)


# instances


def instance_name(n: int, d: int, mode: str, cand: int, m: int) -> str:
    return f"n{n}_d{d}_{mode}_c{cand:04d}_m{m}.cnf"


def build_instance(n: int, d: int, cand: Candidate, m: int) -> Encoding:
    if cand.prefix.depth == 0 and m == n:
        return encode_existence(n, d)
    inputs = InputSet.from_outputs(outputs(cand.prefix))
    return encode_subnets(n, d - cand.prefix.depth, m, inputs, cand.prefix)


def _comments(n: int, d: int, cand: Candidate, m: int) -> list[str]:
    lines = [f"depthgate n={n} d={d} candidate={cand.index} m={m}"]
    for k, L in enumerate(cand.prefix.layers, start=1):
        lines.append(f"prefix layer {k}: " + (" ".join(f"{a}:{b}" for a, b in L) or "(empty)"))
    return lines


def dimacs_bytes(enc: Encoding, comments: list[str]) -> bytes:
    buf = io.StringIO()
    write_dimacs(enc.formula, buf, comments)
    return buf.getvalue().encode()


@dataclass(frozen=True)
class ManifestEntry:
    n: int
    d_total: int
    prefix_file: str
    candidate: int
    m: int
    cnf_path: str
    vars: int
    clauses: int
    sha256: str

    def to_line(self) -> str:
        return (
            f"n={self.n} d_total={self.d_total} prefix_file={self.prefix_file} candidate_index={self.candidate} "
            f"m={self.m} cnf_path={self.cnf_path} vars={self.vars} clauses={self.clauses} sha256={self.sha256}"
        )


def generate_instances(plan: CampaignPlan, candidates: Optional[list[Candidate]] = None,
                       m_values: Optional[list[int]] = None) -> list[ManifestEntry]:
    """Write every (candidate, m) instance as DIMACS plus a deterministic manifest.

    ``m_values`` defaults to the plan's whole m-schedule.  Each prefix is
    also written in network text format next to its instances.
    """
    if plan.out_dir is None:
        raise ValueError("instance generation needs an output directory")
    plan.out_dir.mkdir(parents=True, exist_ok=True)
    if candidates is None:
        candidates = candidate_prefixes(plan.n, plan.d_target, plan.mode, plan.reflect)
    n, d = plan.n, plan.d_target
    entries = []
    for cand in candidates:
        prefix_file = f"n{n}_d{d}_{plan.mode}_c{cand.index:04d}.prefix.net"
        (plan.out_dir / prefix_file).write_text(format_network(cand.prefix))
        for m in m_values or plan.m_schedule:
            enc = build_instance(n, d, cand, m)
            data = dimacs_bytes(enc, _comments(n, d, cand, m))
            name = instance_name(n, d, plan.mode, cand.index, m)
            (plan.out_dir / name).write_bytes(data)
            v, c = enc.counts()
            entries.append(ManifestEntry(n, d, prefix_file, cand.index, m, name, v, c, hashlib.sha256(data).hexdigest()))
    (plan.out_dir / MANIFEST).write_text("".join(e.to_line() + "\n" for e in entries))
    return entries


# proving


@dataclass
class CandidateResult:
    candidate: Candidate
    records: list[RunRecord]
    refuted: bool = False
    network: Optional[Network] = None

    @property
    def blocked(self) -> bool:
        return not self.refuted and self.network is None


@dataclass
class Verdict:
    kind: str  # "lower", "upper", "inconclusive"
    n: int
    d: int
    network: Optional[Network] = None
    blockers: list[int] = field(default_factory=list)
    results: list[CandidateResult] = field(default_factory=list)

    def summary(self) -> str:
        if self.kind == "lower":
            return f"V({self.n}) > {self.d}: all {len(self.results)} candidate(s) unsatisfiable"
        if self.kind == "upper":
            return f"sorting network found: V({self.n}) <= {self.d}"
        return f"inconclusive: candidates without a decision: {', '.join(map(str, self.blockers))}"


def _run_candidate(plan: CampaignPlan, cand: Candidate, done: dict[tuple, RunRecord], log_path: Optional[Path]) -> CandidateResult:
    n, d = plan.n, plan.d_target
    res = CandidateResult(cand, [])
    if cand.prefix.depth > d:
        raise ValueError("candidate prefix deeper than the target")
    for m in plan.m_schedule:
        key = (n, d, plan.mode, cand.index, m)
        prev = done.get(key)
        if prev is not None and prev.conclusive:
            res.records.append(prev)
            if prev.status == "UNSAT":
                res.refuted = True
                return res
            if m == n:
                res.network = parse_network(Path(plan.out_dir, prev.witness_path).read_text())
                return res
            continue
        enc = build_instance(n, d, cand, m)
        cnf_path = None
        name = instance_name(n, d, plan.mode, cand.index, m)
        if plan.out_dir is not None and plan.solver.command is not None:
            cnf_path = plan.out_dir / name
            cnf_path.write_bytes(dimacs_bytes(enc, _comments(n, d, cand, m)))
        outcome: SolveOutcome = solve(enc.formula, plan.solver, cnf_path)
        witness = "-"
        if outcome.status is Status.SAT:
            # never trust SAT without re-evaluating the decoded network
            net = verified_network(enc, outcome)
            if m == n:
                res.network = net
                if plan.out_dir is not None:
                    witness = name[:-4] + ".net"
                    (plan.out_dir / witness).write_text(format_network(net))
                else:
                    witness = "inline"
        v, c = enc.counts()
        rec = RunRecord(
            n, d, plan.mode, cand.index, m, outcome.status.value, int(outcome.elapsed * 1000), v, c,
            name if cnf_path is not None else "-", witness, outcome.cause or "-",
        )
        res.records.append(rec)
        if log_path is not None:
            append_record(log_path, rec)
        if outcome.status is Status.UNSAT:
            res.refuted = True
            return res
        if res.network is not None:
            return res
    return res


def prove(plan: CampaignPlan, candidates: Optional[list[Candidate]] = None, stop_on_sat: bool = False,
          progress: Optional[Callable[[CandidateResult], None]] = None) -> Verdict:
    """Run the m-escalation for every candidate and aggregate in candidate order."""
    if candidates is None:
        candidates = candidate_prefixes(plan.n, plan.d_target, plan.mode, plan.reflect)
    log_path = None
    done: dict[tuple, RunRecord] = {}
    if plan.out_dir is not None:
        plan.out_dir.mkdir(parents=True, exist_ok=True)
        log_path = plan.out_dir / RUN_LOG
        done = load_records(log_path)
    results: list[CandidateResult] = []
    if plan.jobs == 1:
        for cand in candidates:
            r = _run_candidate(plan, cand, done, log_path)
            results.append(r)
            if progress:
                progress(r)
            if stop_on_sat and r.network is not None:
                break
    else:
        with ThreadPoolExecutor(max_workers=plan.jobs) as pool:
            for r in pool.map(lambda c: _run_candidate(plan, c, done, log_path), candidates):
                results.append(r)
                if progress:
                    progress(r)
    if log_path is not None and log_path.exists():
        write_sorted_log(log_path, load_records(log_path).values())
    found = next((r.network for r in results if r.network is not None), None)
    if found is not None:
        return Verdict("upper", plan.n, plan.d_target, found, results=results)
    blockers = [r.candidate.index for r in results if r.blocked]
    if blockers:
        return Verdict("inconclusive", plan.n, plan.d_target, blockers=blockers, results=results)
    return Verdict("lower", plan.n, plan.d_target, results=results)


def prove_lower_bound(plan: CampaignPlan) -> Verdict:
    """``lower`` means no sorting network of depth ``d_target`` exists."""
    return prove(plan)


def prove_upper_bound(n: int, d: int, mode: str = "plain", solver: Optional[SolverConfig] = None,
                      out_dir: Optional[Path] = None) -> Verdict:
    """Look for a network of depth ``d``; stops at the first verified one."""
    plan = CampaignPlan(n, d, mode, [n], 1, solver or SolverConfig(), out_dir)
    return prove(plan, stop_on_sat=True)


# tables

EXPECTED_COUNTS = {
    # n: (|G_n|, |S_n|, |R(G_n)|, |R(S_n)| or None, |R_po(G_n)|)
    3: (4, 2, 4, 2, 2),
    4: (10, 7, 8, None, 2),
    5: (26, 10, 18, 8, 6),
    6: (76, 51, 28, None, 6),
    7: (232, 74, 74, 29, 14),
    8: (764, 513, 101, None, 15),
    9: (2620, 700, 295, 100, 37),
    10: (9496, 6345, 350, None, 27),
    11: (35696, 8174, 1134, 341, 88),
    12: (140152, 93255, 1236, None, 70),
    13: (568504, 113008, 4288, 1155, 212),
}

COLUMNS = ("G", "S", "R(G)", "R(S)", "Rpo(G)")


def count_row(n: int) -> tuple:
    if n < 3:
        return (len(enumerate_layers(n)), None, None, None, None)
    group = fixing_group(n)
    G = enumerate_layers(n)
    S = saturated_layers(n)
    RG = representatives_R(G, group)
    RS = representatives_R(S, group) if n % 2 else None
    Rpo = candidate_second_layers(n)
    return (len(G), len(S), len(RG), None if RS is None else len(RS), len(Rpo))


def table_counts(max_n: int = 13, min_n: int = 1) -> tuple[str, bool]:
    """Plain-text table of candidate counts with diffs; second value is ``all match``."""
    def cell(v) -> str:
        return "n/a" if v is None else str(v)

    lines = ["n  " + " ".join(f"{c:>8}" for c in COLUMNS) + "  check"]
    ok = True
    for n in range(min_n, max_n + 1):
        row = count_row(n)
        exp = EXPECTED_COUNTS.get(n)
        if exp is None:
            note = "-"
        else:
            diffs = [f"{c}:{got}!={want}" for c, got, want in zip(COLUMNS, row, exp) if got != want]
            ok &= not diffs
            note = "ok" if not diffs else "MISMATCH " + ",".join(diffs)
        lines.append(f"{n:<2}" + " " + " ".join(f"{cell(v):>8}" for v in row) + f"  {note}")
    return "\n".join(lines) + "\n", ok


def verify_file(path: Path, out=None) -> bool:
    """Exhaustive zero-one check of a network file; prints the verdict."""
    import sys

    out = out or sys.stdout
    net = parse_network(Path(path).read_text())
    if net.generalized:
        from .network import is_generalized_sorting

        ok = is_generalized_sorting(net)
        out.write(f"{'generalized sorting network' if ok else 'not a generalized sorting network'}\n")
        return ok
    x = counterexample(net)
    if x is None:
        out.write(f"sorting network: n={net.n} depth={net.depth} size={net.size()}\n")
        return True
    bits = ",".join(str((x >> i) & 1) for i in range(net.n))
    out.write(f"not a sorting network; counterexample input ({bits})\n")
    return False
