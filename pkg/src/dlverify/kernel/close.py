"""Closing first-order goals by real arithmetic.

Two cooperating deciders: a cheap sign-propagation pass on the unexpanded
terms (it handles high-degree positivity goals the elimination fragment
cannot), then quantifier elimination with universal closure over the free
variables, lifted over uninterpreted applications when present.  A decidable
but invalid goal raises NotClosed carrying the quantifier-free residual for
constraint discovery.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from ..arith.qe import (LiftError, UnsupportedDegree, abstract_apps, decide,
                        qe, qe_lift, universal_closure)
from ..arith.signs import prove_sequent_by_signs
from ..core import ast
from ..core.ast import (Box, Cmp, Diamond, FalseF, Formula, FuncApp, Imp,
                        TrueF, conj, disj, walk_terms)
from ..core.vars import free_vars
from .sequent import Sequent, node_children


class ModalitiesRemain(Exception):
    """The goal is not first-order yet; reduce the modalities first."""


class NotClosed(Exception):
    """decide returned false; the residual supports constraint discovery."""

    def __init__(self, residual: Formula, sentence: Formula):
        super().__init__("goal is not valid first-order arithmetic")
        self.residual = residual
        self.sentence = sentence


def _has_modality(f: Formula) -> bool:
    if isinstance(f, (Box, Diamond)):
        return True
    return any(_has_modality(c) for c in node_children(f)
               if isinstance(c, Formula))


def _has_apps(f: Formula) -> bool:
    if isinstance(f, Cmp):
        return any(isinstance(x, FuncApp)
                   for t in (f.left, f.right) for x in walk_terms(t))
    return any(_has_apps(c) for c in node_children(f) if isinstance(c, Formula))


def sequent_formula(seq: Sequent) -> Formula:
    left = conj(*seq.ante) if seq.ante else ast.TRUE
    right = disj(*seq.succ) if seq.succ else ast.FALSE
    return Imp(left, right)


@dataclass(frozen=True)
class ArithResult:
    method: str                  # "signs" | "qe"
    sentence: Optional[Formula]  # the decided closed sentence (qe path)


_CACHE: dict = {}
_CACHE_CAP = 4096


def close_goal_arith(seq: Sequent) -> ArithResult:
    """Discharge the sequent as valid real arithmetic or raise.

    Raises ModalitiesRemain / UnsupportedDegree / LiftError when out of
    fragment and NotClosed (with the residual) when decidably invalid.
    Results are cached per sequent (decisions are pure), which keeps proof
    replay cheap.
    """
    hit = _CACHE.get(seq)
    if hit is not None:
        if isinstance(hit, Exception):
            raise hit
        return hit
    try:
        out = _close_uncached(seq)
    except (NotClosed, ModalitiesRemain, UnsupportedDegree, LiftError) as exc:
        if len(_CACHE) < _CACHE_CAP:
            _CACHE[seq] = exc
        raise
    if len(_CACHE) < _CACHE_CAP:
        _CACHE[seq] = out
    return out


def _close_uncached(seq: Sequent) -> ArithResult:
    # sign propagation first: it ignores modal formulas, so an inconsistent
    # antecedent (or an implied first-order succedent) closes regardless
    if prove_sequent_by_signs(seq.ante, seq.succ):
        return ArithResult("signs", None)
    for f in seq.ante + seq.succ:
        if _has_modality(f):
            raise ModalitiesRemain("the goal still contains modalities")
    phi = sequent_formula(seq)
    residual = qe_lift(phi) if _has_apps(phi) else qe(phi)
    # validity of phi is validity of the universal closure of its residual;
    # abstracted applications close universally too (sound by instantiation)
    abstracted, _ = abstract_apps(residual)
    sentence = universal_closure(abstracted)
    if decide(sentence):
        return ArithResult("qe", sentence)
    raise NotClosed(residual, sentence)
