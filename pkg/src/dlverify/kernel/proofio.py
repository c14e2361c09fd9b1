"""The `.dlp` proof file format: a versioned JSON document with formulas in
surface syntax, replayable by `check_proof`."""
from __future__ import annotations

import json
from typing import Dict, List, Optional

from ..core.ast import Formula, Term, Variable
from ..odesolve import Solution
from ..parser.parser import parse
from ..parser.pretty import pretty
from .sequent import (Justification, Position, ProofNode, ProofState,
                      ProofTree, Sequent)

FORMAT_VERSION = 1

_FORMULA_KEYS = ("formula", "sentence")
_TERM_KEYS = ("term",)
_VARIABLE_KEYS = ("variable",)


def _args_to_json(args: Dict) -> Dict:
    out = {}
    for k, v in args.items():
        if k in _FORMULA_KEYS or k in _TERM_KEYS:
            out[k] = pretty(v)
        elif k in _VARIABLE_KEYS:
            out[k] = str(v.name)
        elif k == "solution" and isinstance(v, Solution):
            out[k] = {"time": v.time.name,
                      "assignments": [[x.name, pretty(t)]
                                      for x, t in v.assignments]}
        else:
            out[k] = v
    return out


def _args_from_json(data: Dict) -> Dict:
    out = {}
    for k, v in data.items():
        if k in _FORMULA_KEYS:
            out[k] = parse(v, "formula")
        elif k in _TERM_KEYS:
            out[k] = parse(v, "term")
        elif k in _VARIABLE_KEYS:
            out[k] = Variable(v)
        elif k == "solution":
            out[k] = Solution(Variable(v["time"]),
                              tuple((Variable(n), parse(t, "term"))
                                    for n, t in v["assignments"]))
        else:
            out[k] = v
    return out


def _node_to_json(node: ProofNode) -> Dict:
    just = node.just
    rule: Dict = {"kind": just.kind, "id": just.rule_id}
    if just.pos is not None:
        rule["pos"] = {"side": just.pos.side, "index": just.pos.index,
                       "path": list(just.pos.path)}
    if just.args:
        rule["args"] = _args_to_json(dict(just.args))
    return {
        "id": node.node_id,
        "sequent": {"ante": [pretty(f) for f in node.sequent.ante],
                    "succ": [pretty(f) for f in node.sequent.succ]},
        "rule": rule,
        "children": list(node.children),
    }


def _node_from_json(data: Dict) -> ProofNode:
    rule = data["rule"]
    pos = None
    if "pos" in rule:
        pos = Position(rule["pos"]["side"], rule["pos"]["index"],
                       tuple(rule["pos"]["path"]))
    just = Justification(rule["kind"], rule.get("id", ""), pos,
                         _args_from_json(rule.get("args", {})))
    seq = Sequent(tuple(parse(f, "formula") for f in data["sequent"]["ante"]),
                  tuple(parse(f, "formula") for f in data["sequent"]["succ"]))
    return ProofNode(data["id"], seq, just, tuple(data["children"]))


def proof_to_json(ps: ProofState) -> str:
    doc = {
        "version": FORMAT_VERSION,
        "conjecture": pretty(ps.conjecture),
        "root": ps.tree.root,
        "nodes": [_node_to_json(ps.tree.node(i))
                  for i in sorted(ps.tree.nodes)],
    }
    return json.dumps(doc, indent=1)


def proof_from_json(text: str):
    doc = json.loads(text)
    if doc.get("version") != FORMAT_VERSION:
        raise ValueError(f"unsupported proof format version {doc.get('version')}")
    conjecture = parse(doc["conjecture"], "formula")
    nodes = {}
    for nd in doc["nodes"]:
        node = _node_from_json(nd)
        nodes[node.node_id] = node
    tree = ProofTree(nodes, doc["root"])
    return conjecture, tree
