"""Line-oriented tactic scripts (`.dlt`).

One command per line, addressed at a goal:

    g1 auto
    g1 loop_invariant "v^2 <= 2*b*(m-x) & A>=0 & b>0"
    g2 di_prove
    g2 di_prove "x^2+y^2>=p^2"
    g3 diff_saturate "y^5>=0" "x>=1"
    g4 rule implyR
    g5 axiom ; succ 0
    g6 axiom := succ 0 0.1.1
    g7 close

Goals are addressed by number or `*` for the first open goal.  `#` starts a
comment.  Quoted arguments are parsed as formulas.
"""
from __future__ import annotations

import shlex
from typing import List, Optional, Tuple

from ..core.ast import Formula, Variable
from ..kernel import (Position, ProofState, apply_axiom, apply_rule,
                      close_arith)
from ..parser.parser import parse
from .auto import AutoConfig, auto
from .invariants import di_prove, diff_saturate, loop_invariant


class ScriptError(Exception):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


def _goal_id(ps: ProofState, token: str, lineno: int) -> int:
    if token == "*":
        if not ps.goals:
            raise ScriptError(lineno, "no open goals")
        return ps.goals[0][0]
    try:
        gid = int(token)
    except ValueError:
        raise ScriptError(lineno, f"bad goal id {token!r}") from None
    if all(g != gid for g, _ in ps.goals):
        raise ScriptError(lineno, f"goal {gid} is not open")
    return gid


def _position(tokens: List[str], lineno: int) -> Position:
    side = tokens[0] if tokens else "succ"
    index = int(tokens[1]) if len(tokens) > 1 else 0
    path: Tuple[int, ...] = ()
    if len(tokens) > 2 and tokens[2] != ".":
        path = tuple(int(p) for p in tokens[2].split(".") if p != "")
    return Position(side, index, path)


def run_script(ps: ProofState, text: str) -> ProofState:
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            tokens = shlex.split(line)
        except ValueError as exc:
            raise ScriptError(lineno, str(exc)) from None
        if len(tokens) < 2:
            raise ScriptError(lineno, "expected: <goal> <tactic> [args]")
        goal_tok, name, *rest = tokens
        gid = _goal_id(ps, goal_tok, lineno)
        try:
            if name == "auto":
                ps, _ = auto(ps, goal_ids=[gid])
            elif name == "close":
                ps = close_arith(ps, gid)
            elif name == "loop_invariant":
                if not rest:
                    raise ScriptError(lineno, "loop_invariant needs a formula")
                ps = loop_invariant(ps, gid, parse(rest[0], "formula"))
            elif name == "di_prove":
                inv = parse(rest[0], "formula") if rest else None
                ps = di_prove(ps, gid, inv)
            elif name == "diff_saturate":
                cuts = [parse(r, "formula") for r in rest]
                ps = diff_saturate(ps, gid, cuts)
            elif name == "rule":
                if not rest:
                    raise ScriptError(lineno, "rule needs a rule id")
                args = {}
                if len(rest) > 1:
                    args["formula"] = parse(rest[1], "formula")
                if len(rest) > 2:
                    args["index"] = int(rest[2])
                ps = apply_rule(ps, gid, rest[0], args)
            elif name == "axiom":
                if not rest:
                    raise ScriptError(lineno, "axiom needs an axiom id")
                pos = _position(rest[1:], lineno)
                ps = apply_axiom(ps, gid, rest[0], pos)
            else:
                raise ScriptError(lineno, f"unknown tactic {name!r}")
        except ScriptError:
            raise
        except Exception as exc:
            raise ScriptError(lineno, f"{name}: {exc}") from None
    return ps
