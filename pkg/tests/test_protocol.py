from __future__ import annotations

import io
import json
import socket
import subprocess
import sys
import threading

import pytest

from jtree import algorithms, netio, protocol, transforms
from jtree.model import build_initial_cluster_graph


def send(state, **message):
    return protocol.handle_message(state, message)


def net_doc(network) -> dict:
    return json.loads(netio.serialize_network(network))


def loaded(network, config=None) -> protocol.SessionState:
    state = protocol.SessionState()
    message = {"verb": "load", "network": net_doc(network)}
    if config is not None:
        message["config"] = config
    response = protocol.handle_message(state, message)
    assert response["ok"], response
    return state


def graph_doc(state) -> dict:
    return send(state, verb="state")["state"]["graph"]


def test_banner_shape():
    assert protocol.banner() == {"protocol": "cluster-session", "version": 1}


def test_load_network_reports_full_state(diamond):
    state = protocol.SessionState()
    response = send(state, verb="load", network=net_doc(diamond))
    assert response["ok"] and response["verb"] == "load"
    assert response["result"] == {"loaded": True}
    assert response["events"] == []
    doc = response["state"]
    assert doc["cost"] == 18
    assert doc["edges_minus_clusters"] == 0
    assert doc["multiply_connected"] is True
    assert doc["dirty"] == [0, 1, 2, 3]
    assert doc["event_count"] == 0
    assert doc["undo_depth"] == 0
    assert sorted(v["id"] for v in doc["graph"]["network"]["variables"]) == list("ABCD")


def test_fresh_session_is_empty():
    state = protocol.SessionState()
    doc = send(state, verb="state")["state"]
    assert doc["cost"] == 0
    assert doc["graph"]["clusters"] == []


def test_cost_breakdown(diamond):
    state = loaded(diamond)
    result = send(state, verb="cost")["result"]
    assert result == {
        "total": 18,
        "edges_minus_clusters": 0,
        "per_cluster": {"0": 2, "1": 4, "2": 4, "3": 8},
    }


def test_check_default_names_and_verdicts(diamond):
    state = loaded(diamond)
    before = graph_doc(state)
    response = send(state, verb="check")
    names = [(r["name"], r["passed"]) for r in response["result"]["reports"]]
    assert names == [
        ("structure", True),
        ("family_property", True),
        ("path_property", True),
        ("junction_tree", False),
    ]
    assert response["result"]["passed"] is False
    # junction check runs on a clone: the live graph keeps its separators
    assert graph_doc(state) == before
    bad = send(state, verb="check", checks=["structure", "spin"])
    assert not bad["ok"] and "unknown check" in bad["error"]


def test_check_chordal_is_opt_in(diamond):
    state = loaded(diamond, config={"preset": "E", "seed": 3})
    assert send(state, verb="run-preset")["ok"]
    response = send(
        state, verb="check",
        checks=["structure", "family", "path", "junction", "chordal"],
    )
    reports = response["result"]["reports"]
    assert [r["name"] for r in reports] == [
        "structure", "family_property", "path_property",
        "junction_tree", "chordal_embedding",
    ]
    assert response["result"]["passed"] is True


def test_applicable_default_enumeration(diamond):
    state = loaded(diamond)
    result = send(state, verb="applicable")["result"]
    assert result["total"] == 23
    by_kind: dict[str, int] = {}
    for cand in result["candidates"]:
        by_kind[cand["kind"]] = by_kind.get(cand["kind"], 0) + 1
    assert by_kind == {
        "merge": 6, "slide": 8, "collapse": 4,
        "eliminate": 4, "drop_spurious": 1,
    }
    deltas = [c["cost_delta"] for c in result["candidates"]]
    assert deltas == sorted(deltas)
    assert result["candidates"][0] == {
        "kind": "merge", "args": {"p": 0, "q": 1}, "cost_delta": -2,
    }
    assert {"kind": "slide", "args": {"p": 0, "q": 1, "d": 3},
            "cost_delta": 8} in result["candidates"]


def test_applicable_subset_limit_and_validation(diamond):
    state = loaded(diamond)
    subset = send(state, verb="applicable",
                  kinds=["slide", "drop", "collapse", "eliminate"])["result"]
    assert subset["total"] == 16
    assert {c["kind"] for c in subset["candidates"]} == {"slide", "collapse", "eliminate"}

    capped = send(state, verb="applicable", limit=5)["result"]
    assert len(capped["candidates"]) == 5 and capped["total"] == 23

    assert not send(state, verb="applicable", limit=-1)["ok"]
    assert not send(state, verb="applicable", kinds="slide")["ok"]
    bad = send(state, verb="applicable", kinds=["teleport"])
    assert not bad["ok"] and "unknown kind" in bad["error"]


def test_applicable_fill_arcs_only_on_request(diamond):
    state = loaded(diamond)
    default = send(state, verb="applicable")["result"]["candidates"]
    assert all(c["kind"] != "add_fill_arc" for c in default)
    fills = send(state, verb="applicable", kinds=["add_fill_arc"])["result"]
    assert fills["candidates"] == [
        {"kind": "add_fill_arc", "args": {"x": "A", "y": "D"}, "cost_delta": 2},
    ]


def test_apply_slide_then_drop(diamond):
    state = loaded(diamond)
    first = send(state, verb="apply",
                 op={"kind": "slide", "args": {"p": 0, "q": 1, "d": 3}})
    assert first["ok"]
    assert first["result"]["applied"] == "slide"
    assert first["events"] == [
        {"kind": "slide", "args": {"p": 0, "q": 1, "d": 3}, "cost_delta": 8},
    ]
    assert first["state"]["cost"] == 26
    assert first["state"]["undo_depth"] == 1

    second = send(state, verb="apply",
                  op={"kind": "drop", "args": {"p": 0, "q": 2, "d": 3}})
    assert second["state"]["cost"] == 26
    assert second["state"]["event_count"] == 2
    verdict = send(state, verb="check", checks=["junction"])["result"]
    assert verdict["passed"] is True


def test_apply_failure_leaves_session_untouched(diamond):
    state = loaded(diamond)
    before = graph_doc(state)
    for message in (
        {"verb": "apply", "op": {"kind": "teleport", "args": {}}},
        {"verb": "apply", "op": {"kind": "merge", "args": "p,q"}},
        {"verb": "apply", "op": {"kind": "merge", "args": {"p": 0, "q": 99}}},
        {"verb": "apply"},
    ):
        response = protocol.handle_message(state, message)
        assert response["ok"] is False
        assert "state" not in response and "events" not in response
    after = send(state, verb="state")["state"]
    assert after["graph"] == before
    assert after["undo_depth"] == 0 and after["event_count"] == 0


def test_undo_is_exact(diamond):
    state = loaded(diamond)
    baseline = graph_doc(state)
    send(state, verb="apply", op={"kind": "slide", "args": {"p": 0, "q": 1, "d": 3}})
    send(state, verb="apply", op={"kind": "drop", "args": {"p": 0, "q": 2, "d": 3}})

    undone = send(state, verb="undo")
    assert undone["result"] == {"undone": "apply", "event_count": 1}
    assert undone["state"]["cost"] == 26

    undone = send(state, verb="undo")
    assert undone["result"] == {"undone": "apply", "event_count": 0}
    assert undone["state"]["cost"] == 18
    assert undone["state"]["graph"] == baseline

    empty = send(state, verb="undo")
    assert not empty["ok"] and "nothing to undo" in empty["error"]


def test_undo_cannot_cross_a_load(diamond, chain3):
    state = loaded(diamond)
    send(state, verb="apply", op={"kind": "slide", "args": {"p": 0, "q": 1, "d": 3}})
    send(state, verb="load", network=net_doc(chain3))
    response = send(state, verb="undo")
    assert not response["ok"] and "nothing to undo" in response["error"]


def test_undo_restores_random_state(diamond):
    state = loaded(diamond, config={"preset": "D", "seed": 11})
    assert send(state, verb="run-preset")["ok"]
    first = graph_doc(state)
    send(state, verb="undo")
    assert send(state, verb="run-preset")["ok"]
    assert graph_doc(state) == first


def test_run_preset_verb(diamond):
    state = loaded(diamond)
    response = send(state, verb="run-preset", preset="E", seed=0)
    run = response["result"]["run"]
    assert run["preset"] == "E" and run["seed"] == 0
    assert run["cost_before"] == 18 and run["cost_after"] == 16
    assert response["state"]["cost"] == 16
    assert response["state"]["dirty"] == []
    assert response["state"]["event_count"] == run["events"] == len(response["events"])

    reference = build_initial_cluster_graph(
        netio.parse_network(json.dumps(net_doc(diamond))))
    algorithms.run_preset(reference, "E", seed=0)
    assert graph_doc(state) == json.loads(netio.serialize_graph(reference))

    assert not send(state, verb="run-preset", preset="Z")["ok"]
    assert not send(state, verb="run-preset", preset="E", seed="0")["ok"]


def test_restore_verb(diamond):
    state = loaded(diamond, config={"preset": "E", "seed": 0})
    response = send(state, verb="restore")
    assert response["result"]["triggered"] is True
    assert response["result"]["cost"] == 22
    assert response["result"]["run"]["preset"] == "E"
    assert response["state"]["dirty"] == []

    again = send(state, verb="restore")
    assert again["result"] == {"triggered": False, "cost": 22, "run": None}

    # the per-component repair consumes the session rng, so the seed picks
    # the elimination path
    other = loaded(diamond, config={"preset": "E", "seed": 5})
    assert send(other, verb="restore")["result"]["cost"] == 24


def test_edit_actions_roundtrip(chain3):
    state = loaded(chain3)
    baseline = graph_doc(state)
    kinds: list[str] = []

    response = send(state, verb="edit", action="add_variable", id="D", cardinality=3)
    assert response["result"]["cluster"] == response["result"]["event"]["args"]["cluster"]
    kinds.append(response["result"]["event"]["kind"])

    response = send(state, verb="edit", action="add_arc", x="D", y="C")
    assert sorted(response["state"]["dirty"]) == [2, 3]
    kinds.append(response["result"]["event"]["kind"])

    response = send(state, verb="edit", action="delete_arc", x="D", y="C")
    kinds.append(response["result"]["event"]["kind"])

    response = send(state, verb="edit", action="delete_variable", v="D")
    kinds.append(response["result"]["event"]["kind"])

    assert kinds == ["add_variable", "add_arc", "delete_arc", "delete_variable"]
    final = graph_doc(state)
    # id allocation only moves forward, so replay stays unambiguous
    assert final.pop("next_id") == 4 and baseline.pop("next_id") == 3
    assert final == baseline
    assert send(state, verb="state")["state"]["undo_depth"] == 4


def test_edit_retract_and_undo(diamond):
    graph = build_initial_cluster_graph(diamond)
    algorithms.run_preset(graph, "IE", seed=5)
    state = protocol.SessionState()
    response = send(state, verb="load", graph=json.loads(netio.serialize_graph(graph)))
    assert response["ok"] and response["state"]["cost"] == 24
    assert response["state"]["dirty"] == []

    retracted = send(state, verb="edit", action="retract", p=9, x="A")
    assert retracted["result"]["event"] == {
        "kind": "retract", "args": {"x": "A", "p": 9, "shape": "chain"},
        "cost_delta": -2,
    }
    assert sorted(c["id"] for c in retracted["state"]["graph"]["clusters"]) == [0, 4, 6, 8]

    undone = send(state, verb="undo")
    assert sorted(c["id"] for c in undone["state"]["graph"]["clusters"]) == [0, 4, 6, 8, 9]
    assert undone["state"]["cost"] == 24


def test_edit_validation(chain3):
    state = loaded(chain3)
    before = graph_doc(state)
    cases = [
        {"verb": "edit", "action": "transmogrify"},
        {"verb": "edit", "action": "add_arc", "x": "A", "y": "A"},
        {"verb": "edit", "action": "add_variable", "id": "Z", "cardinality": "3"},
        {"verb": "edit", "action": "retract", "p": "0", "x": "A"},
        {"verb": "edit", "action": "delete_variable", "v": "Q"},
    ]
    for message in cases:
        response = protocol.handle_message(state, message)
        assert response["ok"] is False, message
    assert graph_doc(state) == before


def test_load_validation(diamond):
    state = loaded(diamond)
    before = graph_doc(state)

    bad_config = send(state, verb="load", network=net_doc(diamond),
                      config={"preset": "E", "flavor": "mint"})
    assert not bad_config["ok"] and "unknown config fields" in bad_config["error"]

    bad_preset = send(state, verb="load", network=net_doc(diamond),
                      config={"preset": "QQ"})
    assert not bad_preset["ok"]

    broken = json.loads(netio.serialize_graph(build_initial_cluster_graph(diamond)))
    broken["edges"] = [e for e in broken["edges"] if [e["a"], e["b"]] != [0, 1]]
    bad_graph = send(state, verb="load", graph=broken)
    assert not bad_graph["ok"] and "path_property" in bad_graph["error"]

    assert not send(state, verb="load", network="nets.json")["ok"]
    assert graph_doc(state) == before

    raw = protocol.handle_message(state, ["load"])
    assert raw == {"ok": False, "error": "message must be a JSON object"}


def test_loading_a_cyclic_graph_marks_everything_dirty(diamond_graph):
    state = protocol.SessionState()
    doc = json.loads(netio.serialize_graph(diamond_graph))
    response = send(state, verb="load", graph=doc)
    assert response["ok"]
    assert response["state"]["multiply_connected"] is True
    assert response["state"]["dirty"] == [0, 1, 2, 3]


def test_malformed_line_keeps_session_alive(diamond):
    state = loaded(diamond)
    response = protocol.handle_line(state, '{"verb": "state"')
    assert response["ok"] is False and "invalid JSON" in response["error"]
    assert send(state, verb="cost")["result"]["total"] == 18


def test_unknown_verb_echoes_id(diamond):
    state = loaded(diamond)
    response = send(state, verb="warp", id="x1")
    assert response == {"ok": False, "verb": "warp", "id": "x1",
                        "error": "unknown verb 'warp'"}
    assert send(state, verb="state", id=9)["id"] == 9


def test_snapshot_cadence_and_deep_undo(diamond):
    state = loaded(diamond)
    baseline = graph_doc(state)
    fill = {"kind": "add_fill_arc", "args": {"x": "A", "y": "B"}}
    for _ in range(62):
        assert send(state, verb="apply", op=fill)["ok"]
    send(state, verb="apply", op={"kind": "slide", "args": {"p": 0, "q": 1, "d": 3}})
    send(state, verb="apply", op={"kind": "drop", "args": {"p": 0, "q": 2, "d": 3}})
    for _ in range(2):
        send(state, verb="apply", op=fill)

    assert [count for count, _ in state.snapshots] == [0, 64]
    doc = send(state, verb="state")["state"]
    assert doc["event_count"] == 66 and doc["undo_depth"] == 66 and doc["cost"] == 26

    # the first two undos replay on top of the event-64 snapshot, the rest
    # rebuild from the load-time snapshot
    for expected in range(65, -1, -1):
        response = send(state, verb="undo")
        assert response["ok"]
        assert response["state"]["event_count"] == expected

    final = send(state, verb="state")["state"]
    assert final["cost"] == 18
    assert final["graph"] == baseline
    assert final["dirty"] == [0, 1, 2, 3]
    assert [count for count, _ in state.snapshots] == [0]
    assert not send(state, verb="undo")["ok"]


def test_rollback_discards_partial_mutations(diamond):
    state = loaded(diamond)
    baseline = graph_doc(state)
    entry = state.capture("apply")
    transforms.slide(state.session.graph, 0, 1, 3)
    assert state.mutated_since(entry)
    state.rollback_to(entry)
    assert not state.mutated_since(entry)
    assert graph_doc(state) == baseline


def test_tcp_sessions_are_independent(diamond):
    server = protocol.SessionServer(port=0)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    try:
        host, port = server.server_address

        def talk(lines: list[dict]) -> list[dict]:
            with socket.create_connection((host, port), timeout=10) as sock:
                handle = sock.makefile("rw", encoding="utf-8", newline="\n")
                out = [json.loads(handle.readline())]
                for message in lines:
                    handle.write(json.dumps(message) + "\n")
                    handle.flush()
                    out.append(json.loads(handle.readline()))
                return out

        first = talk([{"verb": "load", "network": net_doc(diamond)},
                      {"verb": "cost"}])
        assert first[0] == protocol.banner()
        assert first[2]["result"]["total"] == 18

        second = talk([{"verb": "cost"}])
        assert second[1]["result"]["total"] == 0
    finally:
        server.shutdown()
        server.server_close()


def test_stdio_transport(diamond):
    lines = [
        json.dumps({"verb": "load", "network": net_doc(diamond)}),
        "",
        json.dumps({"verb": "cost"}),
        "not json",
        json.dumps({"verb": "state", "id": 3}),
    ]
    fin = io.StringIO("\n".join(lines) + "\n")
    fout = io.StringIO()
    protocol.serve_stdio(fin, fout)
    out = [json.loads(line) for line in fout.getvalue().splitlines()]
    assert len(out) == 5
    assert out[0] == protocol.banner()
    assert out[1]["ok"] and out[2]["result"]["total"] == 18
    assert not out[3]["ok"] and "invalid JSON" in out[3]["error"]
    assert out[4]["id"] == 3


def test_serve_subprocess_smoke(diamond):
    proc = subprocess.Popen(
        [sys.executable, "-m", "jtree", "serve", "--stdio"],
        stdin=subprocess.PIPE, stdout=subprocess.PIPE,
        stderr=subprocess.DEVNULL, text=True,
    )
    try:
        assert json.loads(proc.stdout.readline()) == protocol.banner()
        proc.stdin.write(json.dumps({"verb": "load", "network": net_doc(diamond)}) + "\n")
        proc.stdin.write(json.dumps({"verb": "run-preset", "preset": "E", "seed": 0}) + "\n")
        proc.stdin.flush()
        load_resp = json.loads(proc.stdout.readline())
        run_resp = json.loads(proc.stdout.readline())
        assert load_resp["ok"] and run_resp["ok"]
        assert run_resp["state"]["cost"] == 16
    finally:
        proc.stdin.close()
        proc.wait(timeout=10)
