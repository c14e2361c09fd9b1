"""Compilation of hybrid automata to hybrid programs.

One fresh mode variable q carries an integer code per mode (distinct rational
constants).  The compiled program is

    q := m0; ( ?q=m; {flow & dom}          for each mode m
             ++ ?q=src & guard; resets; q := tgt; ?dom(tgt)   for each edge )*

with the target's domain tested last, after the resets, because a reset can
affect the outcome of the domain test.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Dict

from .ast import (Assign, Choice, Cmp, Const, EQ, Formula, HybridAutomaton,
                  Loop, Mode, ODE, Program, Seq, Test, TrueF, Var, Variable,
                  conj, seq)
from .vars import fresh_variable, signature


class MultipleInitError(Exception):
    """Several modes are marked initial and no initial mode is designated."""


def _initial_mode(a: HybridAutomaton) -> Mode:
    if a.initial is not None:
        return next(m for m in a.modes if m.name == a.initial)
    marked = [m for m in a.modes if not _is_false(m.init)]
    if len(marked) == 1:
        return marked[0]
    if not marked and len(a.modes) == 1:
        return a.modes[0]
    raise MultipleInitError(
        f"{len(marked)} candidate initial modes in automaton {a.name!r}; "
        "designate one with an 'initial <mode>.' line")


def _is_false(f: Formula) -> bool:
    from .ast import FalseF
    return isinstance(f, FalseF)


def compile_automaton(a: HybridAutomaton) -> Program:
    taken = set()
    for m in a.modes:
        for v, rhs in m.flow:
            taken |= signature(rhs)
            taken.add(v.name)
        taken |= signature(m.domain) | signature(m.init)
    for e in a.edges:
        taken |= signature(e.guard)
        for v, rhs in e.resets:
            taken |= signature(rhs)
            taken.add(v.name)
    q = fresh_variable("q", frozenset(taken))

    code: Dict[str, Const] = {m.name: Const(Fraction(i)) for i, m in enumerate(a.modes)}
    domain_of = {m.name: m.domain for m in a.modes}

    def at(mode_name: str) -> Formula:
        return Cmp(Var(q), EQ, code[mode_name])

    branches = []
    for m in a.modes:
        branches.append(Seq(Test(at(m.name)), ODE(m.flow, m.domain)))
    for e in a.edges:
        steps = [Test(conj(at(e.source), e.guard))]
        steps.extend(Assign(v, rhs) for v, rhs in e.resets)
        steps.append(Assign(q, code[e.target]))
        steps.append(Test(domain_of[e.target]))
        branches.append(seq(*steps))

    body = branches[0]
    for b in branches[1:]:
        body = Choice(body, b)

    init = _initial_mode(a)
    return Seq(Assign(q, code[init.name]), Loop(body))


def choice_branches(p: Program) -> list:
    """Flatten a choice tree into its branch list (for structural tests)."""
    if isinstance(p, Choice):
        return choice_branches(p.left) + choice_branches(p.right)
    return [p]
