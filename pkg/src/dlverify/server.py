"""Interactive proving service: JSON messages over one HTTP endpoint.

A session is a log of messages folded over an immutable proof-state stack,
so undo is a pop and replaying the log reproduces the state exactly.  The
server is untrusted glue: every exported proof is re-checked by the kernel
before it is sent.  Falsification runs on a worker thread; its outcome is
delivered with the next poll.
"""
from __future__ import annotations

import json
import threading
import uuid
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Dict, List, Optional

from .core.ast import Box, Diamond, Formula, Loop, ODE
from .kernel import (ModalitiesRemain, NoMatch, NotClosed, Position,
                     PositionError, ProofState, ShapeError,
                     SideConditionError, apply_axiom, apply_rule, check_proof,
                     close_arith, init_proof, proof_to_json)
from .kernel.sequent import Sequent
from .parser import DLSyntaxError, parse, parse_problem, pretty
from .parser.pretty import pretty_with_spans
from .sim import Counterexample, SimConfig, Unknown, falsify
from .tactics import (CutUnprovable, auto, di_prove, diff_saturate,
                      loop_invariant)
from .tactics.auto import _candidate_positions, _step_for


class SessionError(Exception):
    pass


@dataclass
class Session:
    session_id: str
    log: List[dict] = field(default_factory=list)
    states: List[ProofState] = field(default_factory=list)
    problem_text: str = ""
    falsify_outcome: Optional[dict] = None
    falsify_running: bool = False
    lock: threading.Lock = field(default_factory=threading.Lock)

    @property
    def state(self) -> Optional[ProofState]:
        return self.states[-1] if self.states else None


_SESSIONS: Dict[str, Session] = {}
_REGISTRY_LOCK = threading.Lock()


def _goal_view(gid: int, seq: Sequent) -> dict:
    def render(formula: Formula) -> dict:
        text, spans = pretty_with_spans(formula)
        return {"text": text,
                "spans": [{"path": list(path), "start": a, "end": b}
                          for path, (a, b) in sorted(spans.items())]}
    hints = _hints(seq)
    return {
        "id": gid,
        "ante": [render(f) for f in seq.ante],
        "succ": [render(f) for f in seq.succ],
        "hints": hints,
    }


def _hints(seq: Sequent) -> List[dict]:
    out = []
    for pos, node in _candidate_positions(seq):
        step = _step_for(node, 1)
        if step is None:
            if isinstance(node, Box):
                continue
        axiom_id = step[0] if step else None
        entry = {"side": pos.side, "index": pos.index, "path": list(pos.path)}
        if axiom_id:
            entry["axiom"] = axiom_id
        out.append(entry)
    rules = []
    for i, f in enumerate(seq.succ):
        if isinstance(f, Box):
            if isinstance(f.prog, Loop):
                rules.append({"rule": "loop_invariant", "index": i})
            if isinstance(f.prog, ODE):
                rules.extend((
                    {"rule": "DI", "index": i}, {"rule": "DC", "index": i},
                    {"rule": "DW", "index": i}, {"rule": "DA", "index": i}))
        if isinstance(f, Diamond) and isinstance(f.prog, ODE):
            rules.append({"rule": "DV", "index": i})
    out.extend(rules)
    return out


def _state_view(session: Session) -> dict:
    ps = session.state
    view: dict = {"session": session.session_id}
    if ps is None:
        view["goals"] = []
        view["closed"] = False
    else:
        view["goals"] = [_goal_view(g, s) for g, s in ps.goals]
        view["closed"] = ps.closed
        view["conjecture"] = pretty(ps.conjecture)
    if session.falsify_outcome is not None:
        view["falsify"] = session.falsify_outcome
        session.falsify_outcome = None
    elif session.falsify_running:
        view["falsify"] = {"status": "running"}
    return view


def _parse_position(data: Optional[dict]) -> Position:
    if not data:
        return Position()
    return Position(data.get("side", "succ"), data.get("index", 0),
                    tuple(data.get("path", ())))


def _parse_args(data: Optional[dict]) -> dict:
    out: dict = {}
    for key, value in (data or {}).items():
        if key in ("formula", "sentence"):
            out[key] = parse(value, "formula")
        elif key == "term":
            out[key] = parse(value, "term")
        elif key == "variable":
            from .core.ast import Variable
            out[key] = Variable(value)
        else:
            out[key] = value
    return out


def handle_message(session: Session, message: dict) -> dict:
    """Apply one protocol message; returns the response document."""
    mtype = message.get("type")
    with session.lock:
        session.log.append(message)
        try:
            if mtype == "loadProblem":
                problem = parse_problem(message["text"])
                session.states = [init_proof(problem.goal())]
                session.problem_text = message["text"]
            elif mtype == "getState":
                pass
            elif mtype == "undo":
                if len(session.states) > 1:
                    session.states.pop()
            elif mtype == "applyAxiom":
                ps = _require_state(session)
                inst = None
                if message.get("axiomId") == "'":
                    inst = _solution_for(ps, message)
                session.states.append(apply_axiom(
                    ps, message["goalId"], message["axiomId"],
                    _parse_position(message.get("position")), inst))
            elif mtype == "applyRule":
                ps = _require_state(session)
                session.states.append(apply_rule(
                    ps, message["goalId"], message["ruleId"],
                    _parse_args(message.get("args"))))
            elif mtype == "applyTactic":
                session.states.append(_apply_tactic(
                    _require_state(session), message))
            elif mtype == "closeArith":
                ps = _require_state(session)
                session.states.append(close_arith(ps, message["goalId"]))
            elif mtype == "falsify":
                _start_falsify(session, message)
            elif mtype == "exportProof":
                ps = _require_state(session)
                if not check_proof(ps.tree, ps.conjecture):
                    return {"ok": False,
                            "error": "the proof has open goals or fails replay",
                            **_state_view(session)}
                return {"ok": True, "proof": proof_to_json(ps),
                        **_state_view(session)}
            else:
                return {"ok": False, "error": f"unknown message type {mtype!r}"}
        except (SideConditionError, ShapeError, NoMatch, PositionError,
                NotClosed, ModalitiesRemain, CutUnprovable, DLSyntaxError,
                SessionError, KeyError) as exc:
            return {"ok": False, "error": f"{type(exc).__name__}: {exc}",
                    **_state_view(session)}
        return {"ok": True, **_state_view(session)}


def _require_state(session: Session) -> ProofState:
    if session.state is None:
        raise SessionError("no problem loaded")
    return session.state


def _solution_for(ps: ProofState, message: dict):
    from .odesolve import Unsolvable, solve_ode
    seq = ps.goal(message["goalId"])
    pos = _parse_position(message.get("position"))
    node, _ = seq.subnode_at(pos)
    from .core.ast import ODE
    if isinstance(node, (Box, Diamond)) and isinstance(node.prog, ODE):
        sol = solve_ode(node.prog.eqs,
                        avoid_names={v.name for v in seq.variables()})
        if not isinstance(sol, Unsolvable):
            return {"solution": sol}
    return None


def _apply_tactic(ps: ProofState, message: dict) -> ProofState:
    name = message.get("name")
    gid = message.get("goalId")
    args = message.get("args") or {}
    if name == "auto":
        out, _ = auto(ps, goal_ids=[gid] if gid is not None else None)
        return out
    if name == "loop_invariant":
        return loop_invariant(ps, gid, parse(args["invariant"], "formula"))
    if name == "di_prove":
        inv = args.get("invariant")
        return di_prove(ps, gid, parse(inv, "formula") if inv else None)
    if name == "diff_saturate":
        cuts = [parse(c, "formula") for c in args.get("cuts", [])]
        return diff_saturate(ps, gid, cuts)
    raise SessionError(f"unknown tactic {name!r}")


def _start_falsify(session: Session, message: dict) -> None:
    ps = _require_state(session)
    if session.falsify_running:
        return
    target = ps.conjecture
    budget = int(message.get("budget", 120))
    session.falsify_running = True

    def work():
        try:
            outcome = falsify(target, SimConfig(falsify_samples=budget))
            if isinstance(outcome, Unknown):
                doc = {"status": "no-counterexample"}
            else:
                doc = {"status": "refuted",
                       "initial": {v.name: x for v, x in outcome.initial.items()},
                       "violated": pretty(outcome.violated),
                       "margin": outcome.margin,
                       "trace": [{"time": st.time, "label": st.label,
                                  "state": {v.name: x for v, x in st.state}}
                                 for st in outcome.trace]}
        except Exception as exc:  # pragma: no cover
            doc = {"status": "error", "error": str(exc)}
        with session.lock:
            session.falsify_outcome = doc
            session.falsify_running = False

    threading.Thread(target=work, daemon=True).start()


def get_session(session_id: Optional[str]) -> Session:
    with _REGISTRY_LOCK:
        if session_id and session_id in _SESSIONS:
            return _SESSIONS[session_id]
        if session_id:
            raise SessionError(f"unknown session {session_id!r}")
        fresh = Session(uuid.uuid4().hex)
        _SESSIONS[fresh.session_id] = fresh
        return fresh


class _Handler(BaseHTTPRequestHandler):
    frontend_dir: Optional[Path] = None

    def log_message(self, fmt, *fargs):  # quiet
        pass

    def _send(self, code: int, body: bytes, ctype: str) -> None:
        self.send_response(code)
        self.send_header("Content-Type", ctype)
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(body)

    def do_POST(self):
        if self.path != "/api":
            self._send(404, b"not found", "text/plain")
            return
        length = int(self.headers.get("Content-Length", "0"))
        try:
            message = json.loads(self.rfile.read(length) or b"{}")
            session = get_session(message.get("session"))
            response = handle_message(session, message)
            response.setdefault("session", session.session_id)
            body = json.dumps(response).encode()
            self._send(200, body, "application/json")
        except SessionError as exc:
            self._send(200, json.dumps({"ok": False,
                                        "error": str(exc)}).encode(),
                       "application/json")
        except Exception as exc:
            self._send(500, json.dumps({"ok": False,
                                        "error": str(exc)}).encode(),
                       "application/json")

    def do_GET(self):
        root = self.frontend_dir
        path = self.path.split("?", 1)[0]
        if root is not None:
            rel = "index.html" if path in ("/", "") else path.lstrip("/")
            target = (root / rel).resolve()
            if str(target).startswith(str(root.resolve())) and target.is_file():
                ctype = {"html": "text/html", "js": "text/javascript",
                         "css": "text/css",
                         "map": "application/json"}.get(
                    target.suffix.lstrip("."), "application/octet-stream")
                self._send(200, target.read_bytes(), ctype)
                return
        self._send(404, b"not found", "text/plain")


def serve(host: str = "127.0.0.1", port: int = 8722,
          frontend_dir: Optional[str] = None) -> None:
    handler = _Handler
    if frontend_dir:
        handler.frontend_dir = Path(frontend_dir)
    else:
        repo_root = Path(__file__).resolve().parents[2]
        for c in (Path.cwd() / "frontend" / "dist",
                  repo_root / "frontend" / "dist"):
            if c.is_dir():
                handler.frontend_dir = c
                break
    httpd = ThreadingHTTPServer((host, port), handler)
    try:
        httpd.serve_forever()
    finally:
        httpd.server_close()


def make_server(host: str = "127.0.0.1", port: int = 0,
                frontend_dir: Optional[str] = None) -> ThreadingHTTPServer:
    """A configured server without the serve loop (for tests)."""
    handler = _Handler
    if frontend_dir:
        handler.frontend_dir = Path(frontend_dir)
    return ThreadingHTTPServer((host, port), handler)
