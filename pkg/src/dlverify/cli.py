"""Command-line entry points.

Exit codes: 0 proved / checked / no counterexample found / eliminated;
1 refuted or check failed; 2 inconclusive (open goals remain); >2 usage or
internal errors.  `--json` switches reports to line-delimited JSON.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from typing import List, Optional

from . import __version__
from .arith import UnsupportedDegree, decide, qe
from .core.ast import Formula
from .kernel import (NotClosed, ProofState, check_proof, init_proof,
                     proof_from_json, proof_to_json, validate_proof,
                     ReplayError)
from .parser import DLSyntaxError, load_problem, parse, pretty
from .sim import Counterexample, SimConfig, Unknown, falsify, run, trace_to_csv
from .tactics import AutoConfig, auto, prove_auto, run_script

EXIT_GOOD, EXIT_REFUTED, EXIT_OPEN, EXIT_USAGE, EXIT_ERROR = 0, 1, 2, 3, 4


class Reporter:
    def __init__(self, as_json: bool):
        self.as_json = as_json

    def emit(self, kind: str, text: str, **fields) -> None:
        if self.as_json:
            doc = {"kind": kind, **fields}
            if text:
                doc["message"] = text
            print(json.dumps(doc, sort_keys=True))
        elif text:
            print(text)


def _cmd_prove(args, rep: Reporter) -> int:
    problem = load_problem(args.file)
    goal = problem.goal()
    started = time.time()
    ps = init_proof(goal)
    if args.tactic:
        with open(args.tactic, "r", encoding="utf-8") as fh:
            ps = run_script(ps, fh.read())
    ps, report = prove_auto(ps, AutoConfig())
    elapsed = time.time() - started
    if ps.closed:
        rep.emit("proved", f"proved: {pretty(goal)} ({elapsed:.2f}s)",
                 status="proved", seconds=round(elapsed, 3))
        if args.emit_proof:
            with open(args.emit_proof, "w", encoding="utf-8") as fh:
                fh.write(proof_to_json(ps))
            rep.emit("proof", f"proof written to {args.emit_proof}",
                     path=args.emit_proof)
        return EXIT_GOOD
    for gid, seq in ps.goals:
        residual = report.residuals.get(gid)
        detail = f"; residual: {pretty(residual)}" if residual is not None else ""
        reason = report.stuck.get(gid, "open")
        rep.emit("open-goal", f"open goal {gid}: {reason}{detail}",
                 goal=gid, reason=reason,
                 residual=pretty(residual) if residual is not None else None)
    rep.emit("inconclusive", f"inconclusive: {len(ps.goals)} open goal(s)",
             status="inconclusive", open_goals=len(ps.goals))
    return EXIT_OPEN


def _cmd_check(args, rep: Reporter) -> int:
    with open(args.proof, "r", encoding="utf-8") as fh:
        conjecture, tree = proof_from_json(fh.read())
    try:
        validate_proof(tree, conjecture)
    except ReplayError as exc:
        rep.emit("check-failed", f"check failed: {exc}",
                 status="failed", node=exc.node_id, reason=exc.reason)
        return EXIT_REFUTED
    rep.emit("checked", f"checked: {pretty(conjecture)}", status="ok",
             conjecture=pretty(conjecture))
    return EXIT_GOOD


def _cmd_sim(args, rep: Reporter) -> int:
    problem = load_problem(args.file)
    goal = problem.goal()
    prog, post = _boxed_program(goal)
    if prog is None:
        rep.emit("error", "the conjecture has no top-level box to simulate")
        return EXIT_USAGE
    cfg = SimConfig(seed=args.seed, ode_step=args.steps)
    from .core.vars import bound_vars, free_vars
    state = {v: 0.0 for v in free_vars(goal) | free_vars(prog) | bound_vars(prog)}
    for item in args.init or []:
        name, _, value = item.partition("=")
        from .core.ast import Variable
        state[Variable(name)] = float(value)
    result = run(prog, state, cfg)
    rep.emit("sim", f"{len(result.results)} final state(s)"
             + (" [budget exhausted]" if result.exhausted else ""),
             finals=len(result.results), exhausted=result.exhausted)
    if args.out:
        from .sim import traces_to_csv
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(traces_to_csv(tr for _, tr in result.results))
        rep.emit("trace", f"traces written to {args.out}", path=args.out)
    return EXIT_GOOD


def _cmd_falsify(args, rep: Reporter) -> int:
    problem = load_problem(args.file)
    goal = problem.goal()
    cfg = SimConfig(seed=args.seed, falsify_samples=args.budget)
    outcome = falsify(goal, cfg)
    if isinstance(outcome, Unknown):
        rep.emit("no-counterexample", "no counterexample found",
                 status="unknown")
        return EXIT_GOOD
    state_text = ", ".join(f"{v.name}={x:g}"
                           for v, x in sorted(outcome.initial.items(),
                                              key=lambda kv: kv[0].name))
    rep.emit("counterexample",
             f"counterexample: {state_text}\n"
             f"violated: {pretty(outcome.violated)} (margin {outcome.margin:.3g})",
             status="refuted", initial={v.name: x for v, x
                                        in outcome.initial.items()},
             violated=pretty(outcome.violated), margin=outcome.margin)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(trace_to_csv(outcome.trace))
        rep.emit("trace", f"trace written to {args.out}", path=args.out)
    return EXIT_REFUTED


def _cmd_qe(args, rep: Reporter) -> int:
    phi = parse(args.formula, "formula")
    try:
        out = qe(phi)
    except UnsupportedDegree as exc:
        rep.emit("error", f"unsupported: {exc}", status="unsupported")
        return EXIT_ERROR
    rep.emit("eliminated", pretty(out), status="ok", result=pretty(out))
    return EXIT_GOOD


def _cmd_compile(args, rep: Reporter) -> int:
    problem = load_problem(args.file)
    if not problem.automata:
        rep.emit("error", "no Automaton section in the file")
        return EXIT_USAGE
    for name, _ in problem.automata.items():
        prog = problem.definitions[name]
        rep.emit("compiled", f"{name}:\n{pretty(prog)}", name=name,
                 program=pretty(prog))
    return EXIT_GOOD


def _cmd_serve(args, rep: Reporter) -> int:
    from .server import serve
    rep.emit("serving", f"listening on http://{args.host}:{args.port}",
             host=args.host, port=args.port)
    serve(args.host, args.port)
    return EXIT_GOOD


def _boxed_program(goal: Formula):
    from .core.ast import Box, Imp
    f = goal
    while isinstance(f, Imp):
        f = f.right
    if isinstance(f, Box):
        return f.prog, f.post
    return None, None


def make_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true",
                        default=argparse.SUPPRESS,
                        help="line-delimited JSON output")
    common.add_argument("--jobs", type=int, default=argparse.SUPPRESS,
                        help="parallelism cap (reserved)")
    p = argparse.ArgumentParser(prog="dlverify",
                                description="verify hybrid-system properties")
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("--json", action="store_true", default=False)
    p.add_argument("--jobs", type=int, default=1)
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, **kw):
        return sub.add_parser(name, parents=[common], **kw)

    prove = add("prove", help="prove the conjecture of a .dl file")
    prove.add_argument("file")
    prove.add_argument("--tactic", help="a .dlt tactic script to run first")
    prove.add_argument("--emit-proof", help="write the proof as .dlp")
    prove.add_argument("--timeout", type=float, default=None,
                       help="soft time limit in seconds")

    check = add("check", help="replay and verify a .dlp proof")
    check.add_argument("proof")

    sim = add("sim", help="simulate the boxed program")
    sim.add_argument("file")
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--steps", type=float, default=1.0 / 64.0,
                     help="ODE integration step")
    sim.add_argument("--init", action="append", metavar="VAR=VALUE")
    sim.add_argument("--out", help="CSV trace output path")

    fal = add("falsify", help="search for a counterexample")
    fal.add_argument("file")
    fal.add_argument("--budget", type=int, default=120)
    fal.add_argument("--seed", type=int, default=0)
    fal.add_argument("--out", help="CSV trace output path")

    qe_cmd = add("qe", help="eliminate quantifiers from a formula")
    qe_cmd.add_argument("formula")

    comp = add("compile-automaton",
               help="print the program compiled from an automaton")
    comp.add_argument("file")

    serve = add("serve", help="run the interactive proof server")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8722)
    return p


_DISPATCH = {
    "prove": _cmd_prove,
    "check": _cmd_check,
    "sim": _cmd_sim,
    "falsify": _cmd_falsify,
    "qe": _cmd_qe,
    "compile-automaton": _cmd_compile,
    "serve": _cmd_serve,
}


def main(argv: Optional[List[str]] = None) -> int:
    args = make_parser().parse_args(argv)
    rep = Reporter(args.json)
    try:
        return _DISPATCH[args.command](args, rep)
    except DLSyntaxError as exc:
        rep.emit("syntax-error", f"syntax error: {exc}", status="syntax-error")
        return EXIT_USAGE
    except FileNotFoundError as exc:
        rep.emit("error", str(exc), status="io-error")
        return EXIT_USAGE
    except Exception as exc:  # pragma: no cover - last resort
        rep.emit("internal-error", f"internal error: {exc}",
                 status="internal-error")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
