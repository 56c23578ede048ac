"""Command-line entry point: ``depthgate <command> ...``."""

from __future__ import annotations

import argparse
import logging
import random
import sys
from pathlib import Path
from typing import Optional

from . import campaign
from .encoder import encode_existence, encode_subnets, encode_with_prefix, InputSet, parse_dimacs, write_dimacs
from .layers import (
    enumerate_layers,
    fixing_group,
    reflection_reduce,
    representatives_R,
    representatives_Rpo,
    saturated_layers,
    candidate_second_layers,
)
from .network import Network, ParseError, format_network, outputs
from .oracle import OracleRefused, exists_sorter
from .sat import SolverConfig, SolverError, solve

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_INCONCLUSIVE = 2
EXIT_USAGE = 3


def _m_schedule(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad m-schedule {text!r}") from None


def _global_options(p: argparse.ArgumentParser, suppress: bool) -> None:
    d = argparse.SUPPRESS if suppress else None
    p.add_argument("--solver", default=d, help='"internal" or a command template such as "kissat {cnf}"')
    p.add_argument("--jobs", type=int, default=argparse.SUPPRESS if suppress else 1)
    p.add_argument("--out", type=Path, default=d, help="directory for instances, logs and witnesses")
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS if suppress else 0)
    p.add_argument("--reflect", action="store_true", default=argparse.SUPPRESS if suppress else False,
                   help="merge mirror-image second-layer candidates")
    p.add_argument("--m-schedule", type=_m_schedule, default=d)
    p.add_argument("--time-limit", type=float, default=d, help="seconds per solver call")
    p.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS if suppress else False)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="depthgate", description="Optimal-depth sorting network prover.")
    _global_options(ap, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _global_options(common, suppress=True)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("layers", parents=[common], help="second-layer candidate sets")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--saturated", action="store_true", help="start from saturated layers only")
    p.add_argument("--representatives", choices=["none", "r", "rpo"], default="none")
    p.add_argument("--emit", type=Path, help="write the layers as depth-1 networks to this file")

    p = sub.add_parser("oracle", parents=[common], help="exhaustive search for small n")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--fix-first", action="store_true")

    p = sub.add_parser("encode", parents=[common], help="write a DIMACS instance")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--depth", type=int, required=True, help="total depth")
    p.add_argument("--mode", choices=campaign.MODES, default="plain")
    p.add_argument("--candidate", type=int, default=0, help="second-layer candidate index (fix2)")
    p.add_argument("--m", type=int, help="subnetwork size (default n)")
    p.add_argument("--no-hard-wire", action="store_true")
    p.add_argument("--all", action="store_true", help="write every candidate and a manifest into --out")
    p.add_argument("-o", "--output", type=Path, help="DIMACS file (default stdout)")

    p = sub.add_parser("solve", parents=[common], help="decide a DIMACS file")
    p.add_argument("cnf", type=Path)

    p = sub.add_parser("verify", parents=[common], help="check a network file")
    p.add_argument("file", type=Path)

    p = sub.add_parser("prove", parents=[common], help="run a campaign")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--mode", choices=campaign.MODES)
    p.add_argument("--upper", action="store_true", help="stop at the first verified network")

    p = sub.add_parser("table", parents=[common], help="candidate counts per n")
    p.add_argument("--max-n", type=int, default=13)
    p.add_argument("--min-n", type=int, default=1)
    return ap


def _solver(args) -> SolverConfig:
    if args.solver == "internal":
        return SolverConfig(None, time_limit=args.time_limit)
    return SolverConfig.default(args.solver, time_limit=args.time_limit)


def cmd_layers(args) -> int:
    n = args.n
    if args.representatives == "rpo" and not args.saturated:
        ls = candidate_second_layers(n)
    else:
        ls = saturated_layers(n) if args.saturated else enumerate_layers(n)
        if args.representatives == "r" and n >= 2:
            ls = representatives_R(ls, fixing_group(n))
        elif args.representatives == "rpo":
            ls = representatives_Rpo(ls)
    if args.reflect:
        ls = reflection_reduce(ls)
    print(f"n={n} layers={len(ls)}")
    if args.emit:
        args.emit.write_text("".join(format_network(Network(n, (L,))) for L in ls))
    return EXIT_OK


def cmd_oracle(args) -> int:
    try:
        net = exists_sorter(args.n, args.depth, args.fix_first)
    except OracleRefused as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if net is None:
        print("NONE")
        return EXIT_NEGATIVE
    sys.stdout.write(format_network(net))
    return EXIT_OK


def cmd_encode(args) -> int:
    n, d = args.n, args.depth
    if args.all:
        if args.out is None:
            print("error: --all needs --out", file=sys.stderr)
            return EXIT_USAGE
        plan = campaign.CampaignPlan(n, d, args.mode, args.m_schedule or [], out_dir=args.out, reflect=args.reflect)
        ms = [args.m] if args.m else None
        entries = campaign.generate_instances(plan, m_values=ms)
        print(f"wrote {len(entries)} instances and {campaign.MANIFEST} to {args.out}")
        return EXIT_OK
    m = args.m or n
    hard = not args.no_hard_wire
    if args.mode == "plain" and m == n:
        enc = encode_existence(n, d, hard_wire=hard)
    else:
        cands = campaign.candidate_prefixes(n, d, args.mode, args.reflect)
        if not 0 <= args.candidate < len(cands):
            print(f"error: candidate index outside 0..{len(cands) - 1}", file=sys.stderr)
            return EXIT_USAGE
        prefix = cands[args.candidate].prefix
        if m == n:
            enc = encode_with_prefix(n, d, prefix, hard_wire=hard)
        else:
            enc = encode_subnets(n, d - prefix.depth, m, InputSet.from_outputs(outputs(prefix)), prefix)
    comments = [f"depthgate n={n} d={d} mode={args.mode} m={m}"]
    if args.output:
        with open(args.output, "w") as fh:
            write_dimacs(enc.formula, fh, comments)
    else:
        write_dimacs(enc.formula, sys.stdout, comments)
    v, c = enc.counts()
    print(f"vars={v} clauses={c}", file=sys.stderr)
    return EXIT_OK


def cmd_solve(args) -> int:
    with open(args.cnf) as fh:
        f = parse_dimacs(fh)
    cfg = _solver(args)
    out = solve(f, cfg, args.cnf if cfg.command else None)
    print(f"{out.status.value} elapsed={out.elapsed:.3f}s solver={out.solver_id}" + (f" cause={out.cause}" if out.cause else ""))
    return {"SAT": EXIT_OK, "UNSAT": EXIT_NEGATIVE}.get(out.status.value, EXIT_INCONCLUSIVE)


def cmd_verify(args) -> int:
    return EXIT_OK if campaign.verify_file(args.file) else EXIT_NEGATIVE


def cmd_prove(args) -> int:
    n, d = args.n, args.depth
    mode = args.mode or campaign.default_mode(n)
    cfg = _solver(args)
    if args.upper:
        verdict = campaign.prove_upper_bound(n, d, mode, cfg, args.out)
    else:
        plan = campaign.CampaignPlan(n, d, mode, args.m_schedule or [], args.jobs, cfg, args.out, args.reflect)

        def progress(r: campaign.CandidateResult) -> None:
            last = r.records[-1] if r.records else None
            status = "cached" if last is None else f"{last.status} at m={last.m}"
            logging.info("candidate %d: %s", r.candidate.index, status)

        verdict = campaign.prove(plan, progress=progress)
    print(verdict.summary())
    if verdict.network is not None:
        sys.stdout.write(format_network(verdict.network))
    if verdict.kind == "inconclusive":
        return EXIT_INCONCLUSIVE
    return EXIT_OK


def cmd_table(args) -> int:
    text, ok = campaign.table_counts(args.max_n, args.min_n)
    sys.stdout.write(text)
    return EXIT_OK if ok else EXIT_NEGATIVE


COMMANDS = {
    "layers": cmd_layers,
    "oracle": cmd_oracle,
    "encode": cmd_encode,
    "solve": cmd_solve,
    "verify": cmd_verify,
    "prove": cmd_prove,
    "table": cmd_table,
}


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s", stream=sys.stderr)
    random.seed(args.seed)
    try:
        return COMMANDS[args.command](args)
    except ParseError as exc:
        print(f"{args.file if hasattr(args, 'file') else 'input'}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SolverError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
