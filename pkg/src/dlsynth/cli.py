"""Command-line driver.

Subcommands:

* ``synth``: topology + requirements -> router configurations. Builds the
  declarative network program, synthesizes a configuration satisfying the
  requirements, always re-verifies the result by evaluating the reference
  program, and writes ``<outdir>/<router>.cfg`` plus ``input.atoms``.
* ``verify``: an atoms file + topology + requirements -> pass/fail.
* ``eval``: a generic Datalog program + input file -> the fixed point.

Exit codes are a stable contract: 0 success, 1 usage/IO error, 2 no input
found within bounds (or requirements violated for ``verify``), 3 internal
soundness violation (a synthesized input failed re-verification).
"""
from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from .configs import write_configs
from .constraints import cand
from .datalog import DatalogError, evaluate, format_atoms, parse_atoms, \
    parse_program
from .network import (
    ProtocolSuite,
    build_direct_model,
    build_network_program,
    parse_topology,
    partial_evaluate,
)
from .requirements import (
    IsolationReq,
    LoopFreeReq,
    PathReq,
    ReachReq,
    add_reach_rules,
    check_requirements,
    compile_requirements,
    parse_requirements,
    uses_reach,
)
from .synthesis import SynthesisConfig, synth_strat

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NO_INPUT = 2
EXIT_UNSOUND = 3

SHARED_PREDICATES = ("SetOSPFEdgeCost", "SetAD", "SetBGPLocalPref")


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise DatalogError(f"cannot read {path}: {exc}") from None


def _parse_suite(spec: str) -> ProtocolSuite:
    return ProtocolSuite.of(*[p.strip() for p in spec.split(",") if p.strip()])


def _print_trace(stats) -> None:
    for rec in stats.trace:
        print(f"  stratum {rec.stratum} k={rec.k} {rec.verdict} "
              f"{rec.duration:.2f}s", file=sys.stderr)


def _tc_groups(requirements, topology):
    """Partition requirements into independently solvable groups keyed by
    traffic class; isolation ties its two classes together; loopfree applies
    per class, so each group gets it for its own classes."""
    parent = {tc: tc for tc in topology.networks}

    def find(tc):
        while parent[tc] != tc:
            parent[tc] = parent[parent[tc]]
            tc = parent[tc]
        return tc

    loopfree = any(isinstance(r, LoopFreeReq) for r in requirements)
    for req in requirements:
        if isinstance(req, IsolationReq):
            parent[find(req.tc1)] = find(req.tc2)
    groups: dict[str, list] = {}
    for req in requirements:
        if isinstance(req, (PathReq, ReachReq)):
            groups.setdefault(find(req.tc), []).append(req)
        elif isinstance(req, IsolationReq):
            groups.setdefault(find(req.tc1), []).append(req)
    if loopfree:
        for tc in topology.networks:
            groups.setdefault(find(tc), [])
    out = []
    for root in sorted(groups):
        tcs = tuple(sorted(tc for tc in topology.networks if find(tc) == root))
        reqs = list(groups[root])
        if loopfree:
            reqs.append(LoopFreeReq())
        out.append((tcs, tuple(reqs)))
    return out


def _pin_atoms(constraints_out, program, chosen, predicates, tc_filter=None):
    """Append exact +/- pins over the ground atoms of each predicate."""
    from .constraints import CAtom, CNot

    for pred in predicates:
        if pred not in program.signatures:
            continue
        for atom in program.ground_atoms(pred):
            if tc_filter is not None and atom.args[0].value not in tc_filter:
                continue
            c = CAtom(atom)
            constraints_out.append(c if atom in chosen else CNot(c))


def _restrict_loopfree(reqs, tcs, topology):
    """Replace a global loopfree with the equivalent per-class negations for
    just this group's classes (other classes belong to other groups)."""
    from .constraints import CAtom, CNot
    from .datalog import ground_atom

    out = []
    conjuncts = []
    for req in reqs:
        if isinstance(req, LoopFreeReq):
            for tc in tcs:
                for r in sorted(topology.routers):
                    conjuncts.append(CNot(CAtom(ground_atom("Reach", tc, r, r))))
        else:
            out.append(req)
    return out, conjuncts


def cmd_synth(args) -> int:
    topology = parse_topology(_read(args.topology))
    suite = _parse_suite(args.protocols)
    requirements = parse_requirements(_read(args.reqs), topology)
    np0 = build_network_program(topology, suite, args.cost_bound,
                                max_weight=args.max_weight)
    reference = partial_evaluate(np0)
    dm = build_direct_model(np0)
    need_reach = uses_reach(requirements)
    ref_prog = add_reach_rules(reference.program) if need_reach \
        else reference.program
    direct_prog = add_reach_rules(dm.program) if need_reach else dm.program
    cfg = SynthesisConfig(bound_k=args.bound_k, bound_f=args.bound_f,
                          timeout=args.timeout,
                          solver_command=args.solver.split() if args.solver
                          else None)

    if args.per_tc:
        groups = _tc_groups(requirements, topology)
    else:
        groups = [(topology.networks, requirements)]
    if not groups:
        groups = [(topology.networks, ())]

    chosen: set = set()
    solved_tcs: set = set()
    start = time.monotonic()
    for tcs, reqs in groups:
        plain, extra = _restrict_loopfree(list(reqs), tcs, topology)
        phi = cand(compile_requirements(plain, topology), *extra, *dm.goal)
        side = list(dm.side)
        if chosen:
            _pin_atoms(side, dm.program, chosen, SHARED_PREDICATES)
            _pin_atoms(side, dm.program, chosen, ("SetStatic",),
                       tc_filter=solved_tcs)
        out = synth_strat(direct_prog, phi, cfg, side=side)
        if args.trace:
            _print_trace(out.stats)
        if not out.found:
            scope = "" if not args.per_tc else f" for classes {', '.join(tcs)}"
            print(f"no input within bounds{scope} "
                  f"(k<={args.bound_k}, F<={args.bound_f})", file=sys.stderr)
            return EXIT_NO_INPUT
        result = {a for a in out.input if a.pred in np0.free_edb}
        shared = {a for a in result if a.pred != "SetStatic"}
        static_now = {a for a in result
                      if a.pred == "SetStatic" and a.args[0].value in tcs}
        chosen = {a for a in chosen if a.pred == "SetStatic"} \
            | shared | static_now
        solved_tcs.update(tcs)

    final = frozenset(a for a in chosen if a.pred in np0.free_edb)
    model = evaluate(ref_prog, final | np0.fixed_facts)
    violated = check_requirements(model, requirements, topology)
    if violated:
        print("internal error: synthesized input fails re-verification:",
              file=sys.stderr)
        for req in violated:
            print(f"  violated: {req}", file=sys.stderr)
        return EXIT_UNSOUND
    written = write_configs(sorted(final, key=str), topology, args.out)
    elapsed = time.monotonic() - start
    print(f"synthesized {len(final)} atoms in {elapsed:.1f}s; "
          f"wrote {len(written)} files to {args.out}")
    return EXIT_OK


def cmd_verify(args) -> int:
    topology = parse_topology(_read(args.topology))
    suite = _parse_suite(args.protocols)
    requirements = parse_requirements(_read(args.reqs), topology)
    atoms = parse_atoms(_read(args.input))
    np0 = build_network_program(topology, suite, args.cost_bound,
                                max_weight=args.max_weight)
    program = add_reach_rules(np0.program) if uses_reach(requirements) \
        else np0.program
    model = evaluate(program, frozenset(atoms) | np0.fixed_facts)
    violated = check_requirements(model, requirements, topology)
    if violated:
        for req in violated:
            print(f"violated: {req}")
        return EXIT_NO_INPUT
    print(f"all {len(requirements)} requirements hold")
    return EXIT_OK


def cmd_eval(args) -> int:
    program = parse_program(_read(args.program))
    atoms = parse_atoms(_read(args.input), program)
    model = evaluate(program, atoms)
    sys.stdout.write(format_atoms(model))
    return EXIT_OK


def _add_network_flags(p) -> None:
    p.add_argument("--topology", required=True, help="topology file")
    p.add_argument("--reqs", required=True, help="requirements file")
    p.add_argument("--protocols", default="ospf,static",
                   help="comma list from bgp,ospf,static")
    p.add_argument("--max-weight", type=int, default=3,
                   help="largest assignable OSPF link weight")
    p.add_argument("--cost-bound", type=int, default=None,
                   help="largest representable path cost "
                        "(default: 2 x routers x max-weight)")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="dlsynth",
        description="router configuration synthesis via stratified Datalog")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="synthesize configurations")
    _add_network_flags(p)
    p.add_argument("--bound-k", type=int, default=20,
                   help="max unrolling depth per stratum")
    p.add_argument("--bound-f", type=int, default=20,
                   help="max failed inputs per stratum before backtracking up")
    p.add_argument("--solver", default=None,
                   help="SMT-LIB v2 solver command (default: bundled solver, "
                        "or DLSYNTH_SOLVER)")
    p.add_argument("--timeout", type=float, default=None,
                   help="seconds per solver call")
    p.add_argument("--out", default="out", help="output directory")
    p.add_argument("--trace", action="store_true",
                   help="print per-stratum solver calls")
    p.add_argument("--per-tc", action="store_true",
                   help="solve separable traffic classes sequentially "
                        "(incomplete: may miss jointly coordinated solutions)")
    p.set_defaults(fn=cmd_synth)

    p = sub.add_parser("verify", help="check requirements against an input")
    _add_network_flags(p)
    p.add_argument("--input", required=True, help="atoms file (one per line)")
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("eval", help="evaluate a Datalog program")
    p.add_argument("--program", required=True, help="Datalog program file")
    p.add_argument("--input", required=True, help="atoms file (one per line)")
    p.set_defaults(fn=cmd_eval)

    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except DatalogError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
