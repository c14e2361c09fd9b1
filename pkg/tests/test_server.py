import json
import time
from pathlib import Path

import pytest

from dlverify.kernel import check_proof, proof_from_json
from dlverify.server import Session, get_session, handle_message

PROBLEMS = Path(__file__).resolve().parent.parent / "problems"

ROTATIONAL = PROBLEMS.joinpath("rotational.dl").read_text()


def fresh():
    return Session("test-" + str(time.monotonic_ns()))


def send(session, **message):
    return handle_message(session, message)


class TestProtocol:
    def test_load_and_state(self):
        s = fresh()
        resp = send(s, type="loadProblem", text=ROTATIONAL)
        assert resp["ok"] and len(resp["goals"]) == 1
        goal = resp["goals"][0]
        assert goal["succ"]
        assert any("spans" in f for f in goal["succ"])

    def test_di_then_close_then_export(self, tmp_path):
        s = fresh()
        send(s, type="loadProblem", text=ROTATIONAL)
        state = send(s, type="getState")
        gid = state["goals"][0]["id"]
        resp = send(s, type="applyRule", goalId=gid, ruleId="implyR")
        assert resp["ok"]
        gid = resp["goals"][0]["id"]
        resp = send(s, type="applyRule", goalId=gid, ruleId="DI")
        assert resp["ok"] and len(resp["goals"]) == 1
        premise = resp["goals"][0]
        assert "2*" in premise["succ"][0]["text"]
        gid = premise["id"]
        resp = send(s, type="closeArith", goalId=gid)
        assert resp["ok"] and resp["closed"]
        out = send(s, type="exportProof")
        assert out["ok"]
        conjecture, tree = proof_from_json(out["proof"])
        assert check_proof(tree, conjecture)

    def test_stale_goal_is_error_and_state_unchanged(self):
        s = fresh()
        send(s, type="loadProblem", text=ROTATIONAL)
        before = send(s, type="getState")
        resp = send(s, type="applyRule", goalId=999, ruleId="implyR")
        assert not resp["ok"]
        after = send(s, type="getState")
        assert before["goals"] == after["goals"]

    def test_side_condition_error_surfaces_verbatim(self):
        s = fresh()
        send(s, type="loadProblem",
             text="Prove:\n  <{x'=a}> x=b.\n")
        gid = send(s, type="getState")["goals"][0]["id"]
        resp = send(s, type="applyRule", goalId=gid, ruleId="DV")
        assert not resp["ok"]
        assert "equalit" in resp["error"]
        assert send(s, type="getState")["goals"][0]["id"] == gid

    def test_undo_restores_previous_state(self):
        s = fresh()
        send(s, type="loadProblem", text=ROTATIONAL)
        before = send(s, type="getState")["goals"]
        send(s, type="applyRule", goalId=0, ruleId="implyR")
        send(s, type="undo")
        assert send(s, type="getState")["goals"] == before

    def test_replaying_log_reproduces_state(self):
        s = fresh()
        send(s, type="loadProblem", text=ROTATIONAL)
        send(s, type="applyRule", goalId=0, ruleId="implyR")
        final = send(s, type="getState")
        replayed = fresh()
        for message in s.log:
            handle_message(replayed, dict(message))
        again = send(replayed, type="getState")
        assert final["goals"] == again["goals"]

    def test_falsify_delivered_on_poll(self):
        s = fresh()
        send(s, type="loadProblem",
             text=PROBLEMS.joinpath("braking_noassume.dl").read_text())
        send(s, type="falsify", budget=80)
        for _ in range(100):
            state = send(s, type="getState")
            outcome = state.get("falsify")
            if outcome and outcome.get("status") != "running":
                break
            time.sleep(0.05)
        assert outcome["status"] in ("refuted", "no-counterexample")

    def test_tactic_application(self):
        s = fresh()
        send(s, type="loadProblem",
             text=PROBLEMS.joinpath("nonlinear2d.dl").read_text())
        gid = send(s, type="getState")["goals"][0]["id"]
        resp = send(s, type="applyTactic", goalId=gid, name="diff_saturate",
                    args={"cuts": ["y^5>=0"]})
        assert resp["ok"] and resp["closed"]

    def test_unknown_session(self):
        from dlverify.server import SessionError
        with pytest.raises(SessionError):
            get_session("nope")


class TestHttp:
    def test_end_to_end_over_http(self):
        import threading
        import urllib.request
        from dlverify.server import make_server

        httpd = make_server("127.0.0.1", 0)
        port = httpd.server_address[1]
        thread = threading.Thread(target=httpd.serve_forever, daemon=True)
        thread.start()
        try:
            def post(doc):
                req = urllib.request.Request(
                    f"http://127.0.0.1:{port}/api",
                    data=json.dumps(doc).encode(),
                    headers={"Content-Type": "application/json"})
                with urllib.request.urlopen(req, timeout=10) as resp:
                    return json.loads(resp.read())

            first = post({"type": "loadProblem", "text": ROTATIONAL})
            assert first["ok"] and first["session"]
            sid = first["session"]
            state = post({"type": "getState", "session": sid})
            assert state["goals"]
        finally:
            httpd.shutdown()
            httpd.server_close()
