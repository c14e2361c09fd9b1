"""Exact brute-force reachability for ODE-free programs.

This is the oracle against which the kernel's axiom rewrites are sampled:
all arithmetic is rational, loops unroll up to a bound (or saturate to a
fixpoint), and modal formulas evaluate by exhaustive enumeration.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Dict, FrozenSet, Iterable, Mapping, Tuple

from ..arith.evalx import eval_exact, eval_term
from ..core import ast
from ..core.ast import (Assign, Box, Choice, Diamond, Formula, Loop, ODE,
                        Program, Seq, Test, Variable)
from ..core.desugar import desugar

RState = Tuple[Tuple[Variable, Fraction], ...]  # canonical sorted items


class ExplosionError(Exception):
    """The reachable state set exceeded the configured cap."""


class NotSaturated(Exception):
    """A loop did not reach a fixpoint within the iteration cap."""


def _canon(state: Mapping[Variable, Fraction]) -> RState:
    return tuple(sorted(state.items(), key=lambda kv: kv[0]))


def discrete_reach(prog: Program, state: Mapping[Variable, Fraction],
                   loop_bound: int = 8, cap: int = 4096,
                   saturate: bool = False) -> FrozenSet[RState]:
    """States reachable from `state` with loops unrolled <= loop_bound.

    With saturate=True a loop must reach a fixpoint within the bound,
    otherwise NotSaturated is raised (used when exact loop semantics are
    required rather than a bounded under-approximation).
    """
    core = desugar(prog)
    return _reach(core, frozenset({_canon(dict(state))}), loop_bound, cap,
                  saturate)


def _reach(prog: Program, states: FrozenSet[RState], loop_bound: int,
           cap: int, saturate: bool) -> FrozenSet[RState]:
    def check(ss: FrozenSet[RState]) -> FrozenSet[RState]:
        if len(ss) > cap:
            raise ExplosionError(f"state count {len(ss)} exceeds cap {cap}")
        return ss

    if isinstance(prog, Assign):
        out = set()
        for s in states:
            d = dict(s)
            d[prog.var] = eval_term(prog.term, d)
            out.add(_canon(d))
        return check(frozenset(out))
    if isinstance(prog, Test):
        return frozenset(s for s in states if eval_exact(prog.cond, dict(s)))
    if isinstance(prog, Choice):
        left = _reach(prog.left, states, loop_bound, cap, saturate)
        right = _reach(prog.right, states, loop_bound, cap, saturate)
        return check(left | right)
    if isinstance(prog, Seq):
        mid = _reach(prog.first, states, loop_bound, cap, saturate)
        return _reach(prog.second, mid, loop_bound, cap, saturate)
    if isinstance(prog, Loop):
        seen = set(states)
        frontier = states
        for _ in range(loop_bound):
            nxt = _reach(prog.body, frontier, loop_bound, cap, saturate)
            fresh = nxt - seen
            if not fresh:
                return check(frozenset(seen))
            seen |= fresh
            if len(seen) > cap:
                raise ExplosionError(f"state count {len(seen)} exceeds cap {cap}")
            frontier = frozenset(fresh)
        if saturate:
            raise NotSaturated("loop did not saturate within the bound")
        return check(frozenset(seen))
    if isinstance(prog, ODE):
        raise TypeError("discrete_reach requires an ODE-free program")
    raise TypeError(f"not a core program: {prog!r}")


def eval_discrete(phi: Formula, state: Mapping[Variable, Fraction],
                  loop_bound: int = 8, cap: int = 4096,
                  saturate: bool = True) -> bool:
    """Exact truth of an ODE-free, quantifier-free dL formula.

    Box/diamond modalities evaluate by exhaustive reachability; loops must
    saturate so the answer is the true (unbounded) semantics.
    """
    if isinstance(phi, (ast.TrueF, ast.FalseF, ast.Cmp)):
        return eval_exact(phi, state)
    if isinstance(phi, ast.Not):
        return not eval_discrete(phi.arg, state, loop_bound, cap, saturate)
    if isinstance(phi, ast.And):
        return (eval_discrete(phi.left, state, loop_bound, cap, saturate)
                and eval_discrete(phi.right, state, loop_bound, cap, saturate))
    if isinstance(phi, ast.Or):
        return (eval_discrete(phi.left, state, loop_bound, cap, saturate)
                or eval_discrete(phi.right, state, loop_bound, cap, saturate))
    if isinstance(phi, ast.Imp):
        return ((not eval_discrete(phi.left, state, loop_bound, cap, saturate))
                or eval_discrete(phi.right, state, loop_bound, cap, saturate))
    if isinstance(phi, ast.Iff):
        return (eval_discrete(phi.left, state, loop_bound, cap, saturate)
                == eval_discrete(phi.right, state, loop_bound, cap, saturate))
    if isinstance(phi, (Box, Diamond)):
        finals = discrete_reach(phi.prog, state, loop_bound, cap, saturate)
        if isinstance(phi, Box):
            return all(eval_discrete(phi.post, dict(s), loop_bound, cap,
                                     saturate) for s in finals)
        return any(eval_discrete(phi.post, dict(s), loop_bound, cap, saturate)
                   for s in finals)
    raise TypeError(f"eval_discrete cannot handle {phi!r}")
