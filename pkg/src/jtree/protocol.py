"""Line-oriented JSON session protocol.

One JSON object per line in each direction; the server opens with a banner
naming the protocol and version.  Every successful response carries the full
serialized state plus the trace events the message produced, so clients
never have to reconstruct state arithmetic themselves.  A malformed or
failing message yields an error response and leaves the session exactly as
it was (partial mutations are rolled back from the journal).

Undo is exact: the session keeps a graph snapshot every SNAPSHOT_INTERVAL
events and a per-message journal of (event count, dirty set, random state).
Undoing rebuilds from the latest snapshot at or before the target and
replays the recorded events, which reproduces the graph bit for bit.
"""

from __future__ import annotations

import json
import socketserver
from collections import deque
from dataclasses import dataclass
from typing import Iterable

from . import netio, replay, verify
from .algorithms import PRESETS, RunReport, run_preset
from .incremental import EditSession, SessionConfig
from .model import NetworkError, OperationError, TraceEvent, edge_key

PROTOCOL_NAME = "cluster-session"
PROTOCOL_VERSION = 1
SNAPSHOT_INTERVAL = 64

APPLY_KINDS = (
    "merge", "steal_an_edge", "slide", "drop", "collapse", "eliminate",
    "drop_spurious", "add_fill_arc",
)
DEFAULT_APPLICABLE_KINDS = (
    "merge", "steal_an_edge", "slide", "drop", "collapse", "eliminate",
    "drop_spurious",
)
EDIT_ACTIONS = ("add_variable", "add_arc", "delete_arc", "delete_variable", "retract")


def banner() -> dict:
    return {"protocol": PROTOCOL_NAME, "version": PROTOCOL_VERSION}


@dataclass(frozen=True)
class JournalEntry:
    verb: str
    events: int
    dirty: frozenset
    rng_state: tuple


class SessionState:
    """One protocol session: an edit session plus its undo machinery."""

    def __init__(self, config: SessionConfig | None = None):
        self._config = config
        self.session = EditSession(config=config)
        self.events: list[TraceEvent] = []
        self._consumed = 0
        self.snapshots: list[tuple[int, dict]] = []
        self.journal: list[JournalEntry] = []
        self._snapshot()

    # -- history --------------------------------------------------------

    def _snapshot(self) -> None:
        self.snapshots.append((len(self.events), netio.graph_to_json(self.session.graph)))

    def sync_events(self) -> list[dict]:
        new = self.session.graph.trace[self._consumed:]
        self.events.extend(new)
        self._consumed = len(self.session.graph.trace)
        if len(self.events) - self.snapshots[-1][0] >= SNAPSHOT_INTERVAL:
            self._snapshot()
        return [netio.event_to_json(e) for e in new]

    def capture(self, verb: str) -> JournalEntry:
        return JournalEntry(
            verb, len(self.events),
            frozenset(self.session.dirty), self.session.rng.getstate(),
        )

    def mutated_since(self, entry: JournalEntry) -> bool:
        return (len(self.session.graph.trace) != self._consumed
                or set(entry.dirty) != self.session.dirty)

    def rollback_to(self, entry: JournalEntry) -> None:
        count, doc = max(
            (s for s in self.snapshots if s[0] <= entry.events),
            key=lambda s: s[0],
        )
        graph = netio.graph_from_json(doc)
        replay.replay_trace(graph, self.events[count:entry.events])
        self.session.graph = graph
        self.session.dirty = set(entry.dirty)
        self.session.rng.setstate(entry.rng_state)
        del self.events[entry.events:]
        self._consumed = len(graph.trace)
        self.snapshots = [s for s in self.snapshots if s[0] <= entry.events]

    def reset(self, session: EditSession) -> None:
        self.session = session
        self.events = []
        self._consumed = len(session.graph.trace)
        self.snapshots = []
        self.journal = []
        self._snapshot()

    # -- views ------------------------------------------------------------

    def state_doc(self) -> dict:
        g = self.session.graph
        return {
            "cost": g.cost(),
            "edges_minus_clusters": g.edges_minus_clusters(),
            "multiply_connected": g.is_multiply_connected(),
            "dirty": sorted(self.session.dirty),
            "event_count": len(self.events),
            "undo_depth": len(self.journal),
            "graph": netio.graph_to_json(g),
        }


def _json_safe(value):
    if isinstance(value, (str, int, float, bool)) or value is None:
        return value
    if isinstance(value, (set, frozenset)):
        return [_json_safe(v) for v in sorted(value)]
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    if isinstance(value, dict):
        return {str(k): _json_safe(v) for k, v in value.items()}
    return str(value)


def _report_doc(report) -> dict:
    return {
        "name": report.name,
        "passed": report.passed,
        "witnesses": _json_safe(report.witnesses[:5]),
    }


def _run_doc(run: RunReport) -> dict:
    return {
        "preset": run.preset,
        "seed": run.seed,
        "cost_before": run.cost_before,
        "cost_after": run.cost_after,
        "events": run.events,
        "eliminations": run.eliminations,
        "cycles_divided": run.cycles_divided,
        "post_merges": run.post_merges,
        "post_slide_gain": run.post_slide_gain,
        "audits": [_json_safe(vars(a)) for a in run.audits],
    }


def _require(message: dict, key: str, kind: type, verb: str):
    value = message.get(key)
    if not isinstance(value, kind) or isinstance(value, bool) and kind is int:
        raise OperationError(verb, f"field {key!r} must be {kind.__name__}", got=value)
    return value


# -- applicable-transformation enumeration ------------------------------------


def _fundamental_cycles(graph) -> list[list[int]]:
    """One cycle per non-tree edge of a breadth-first forest, each given in
    adjacency order starting at its smallest cluster."""
    parent: dict[int, int | None] = {}
    depth: dict[int, int] = {}
    tree: set[tuple[int, int]] = set()
    for root in graph.cluster_ids():
        if root in parent:
            continue
        parent[root] = None
        depth[root] = 0
        queue = deque([root])
        while queue:
            u = queue.popleft()
            for w in graph.neighbors(u):
                if w not in parent:
                    parent[w] = u
                    depth[w] = depth[u] + 1
                    tree.add(edge_key(u, w))
                    queue.append(w)
    cycles = []
    for k in sorted(graph.edges):
        if k in tree:
            continue
        x, y = k
        left, right = [x], [y]
        while depth[x] > depth[y]:
            x = parent[x]
            left.append(x)
        while depth[y] > depth[x]:
            y = parent[y]
            right.append(y)
        while x != y:
            x = parent[x]
            left.append(x)
            y = parent[y]
            right.append(y)
        cycle = left + right[:-1][::-1]
        i = cycle.index(min(cycle))
        rot = cycle[i:] + cycle[:i]
        rev = [rot[0]] + rot[1:][::-1]
        cycles.append(list(min(tuple(rot), tuple(rev))))
    return cycles


def enumerate_applicable(graph, kinds: Iterable[str]) -> list[dict]:
    """Every legal (kind, args) combination for the requested kinds."""
    out: list[dict] = []
    ids = graph.cluster_ids()
    edges = sorted(graph.edges)
    for kind in kinds:
        if kind == "merge":
            out += [{"kind": kind, "args": {"p": p, "q": q}}
                    for i, p in enumerate(ids) for q in ids[i + 1:]]
        elif kind in ("steal_an_edge", "slide", "drop"):
            for p, q in edges:
                for d in ids:
                    if d in (p, q):
                        continue
                    count = graph.has_edge(p, d) + graph.has_edge(q, d)
                    need = {"steal_an_edge": 0, "slide": 1, "drop": 2}[kind]
                    if count == need:
                        out.append({"kind": kind, "args": {"p": p, "q": q, "d": d}})
        elif kind == "collapse":
            for cycle in _fundamental_cycles(graph):
                n = len(cycle)
                for i in range(n):
                    victim = sorted((cycle[i], cycle[(i + 1) % n]))
                    out.append({"kind": kind,
                                "args": {"cycle": cycle, "victim": victim}})
        elif kind == "eliminate":
            present = sorted({v for c in graph.clusters.values() for v in c.members})
            out += [{"kind": kind, "args": {"x": v, "scope": ids}} for v in present]
        elif kind == "drop_spurious":
            out.append({"kind": kind, "args": {"seeds": None}})
        elif kind == "add_fill_arc":
            seen_pairs = {
                pair
                for c in graph.clusters.values()
                for pair in (
                    (a, b) for a in c.members for b in c.members if a < b
                )
            }
            for x in graph.network.variable_ids():
                for y in graph.network.variable_ids():
                    if x < y and (x, y) not in seen_pairs:
                        out.append({"kind": kind, "args": {"x": x, "y": y}})
        else:
            raise OperationError("applicable", "unknown kind", kind=kind)
    return out


def predict_deltas(graph, candidates: list[dict]) -> list[dict]:
    """Simulate each candidate on a clone and attach the exact cost change."""
    base = graph.cost()
    out = []
    for cand in candidates:
        sim = graph.clone()
        replay.apply_event(sim, TraceEvent(cand["kind"], cand["args"], 0))
        out.append({**cand, "cost_delta": sim.cost() - base})
    return out


# -- verb handlers -------------------------------------------------------------


def _handle_load(state: SessionState, message: dict) -> dict:
    cfg_doc = message.get("config", {})
    if not isinstance(cfg_doc, dict):
        raise OperationError("load", "config must be an object")
    unknown = set(cfg_doc) - {"preset", "seed", "retraction_shape", "auto_retract"}
    if unknown:
        raise OperationError("load", "unknown config fields", fields=sorted(unknown))
    base = SessionConfig()
    config = SessionConfig(
        preset=cfg_doc.get("preset", base.preset),
        seed=cfg_doc.get("seed", base.seed),
        retraction_shape=cfg_doc.get("retraction_shape", base.retraction_shape),
        auto_retract=cfg_doc.get("auto_retract", base.auto_retract),
    )
    if "graph" in message:
        doc = _require(message, "graph", dict, "load")
        graph = netio.graph_from_json(doc)
        for rep in (verify.check_structure(graph),
                    verify.check_family_property(graph),
                    verify.check_path_property(graph)):
            if not rep:
                raise OperationError("load", f"graph fails {rep.name}",
                                     witnesses=_json_safe(rep.witnesses[:3]))
        session = EditSession(config=config)
        session.graph = graph
        if graph.is_multiply_connected():
            session.dirty = set(graph.clusters)
    elif "network" in message:
        doc = _require(message, "network", dict, "load")
        network = netio.parse_network(json.dumps(doc))
        session = EditSession(network, config)
    else:
        session = EditSession(config=config)
    state.reset(session)
    return {"loaded": True}


def _handle_state(state: SessionState, message: dict) -> dict:
    return {}


def _handle_cost(state: SessionState, message: dict) -> dict:
    g = state.session.graph
    return {
        "total": g.cost(),
        "edges_minus_clusters": g.edges_minus_clusters(),
        "per_cluster": {str(c): g.cluster_cost(c) for c in g.cluster_ids()},
    }


# chordal embedding is opt-in: it demands maximal clusters, which unmerged
# but perfectly valid junction trees (buffer chains) do not satisfy
_CHECK_NAMES = ("structure", "family", "path", "junction")


def _handle_check(state: SessionState, message: dict) -> dict:
    names = message.get("checks", list(_CHECK_NAMES))
    if not isinstance(names, list):
        raise OperationError("check", "checks must be a list")
    g = state.session.graph
    reports = []
    for name in names:
        # junction and chordal checks normalize separators, so they run on
        # clones; the live graph mutates only through traced operations
        if name == "structure":
            rep = verify.check_structure(g)
        elif name == "family":
            rep = verify.check_family_property(g)
        elif name == "path":
            rep = verify.check_path_property(g)
        elif name == "junction":
            rep = verify.check_junction_tree(g.clone())
        elif name == "chordal":
            rep = verify.check_chordal_embedding(g.clone())
        else:
            raise OperationError("check", "unknown check", check=name)
        reports.append(_report_doc(rep))
    return {"reports": reports, "passed": all(r["passed"] for r in reports)}


def _handle_applicable(state: SessionState, message: dict) -> dict:
    kinds = message.get("kinds", list(DEFAULT_APPLICABLE_KINDS))
    if not isinstance(kinds, list):
        raise OperationError("applicable", "kinds must be a list")
    for kind in kinds:
        if kind not in APPLY_KINDS:
            raise OperationError("applicable", "unknown kind", kind=kind)
    limit = message.get("limit")
    if limit is not None and (not isinstance(limit, int) or limit < 0):
        raise OperationError("applicable", "limit must be a non-negative int")
    g = state.session.graph
    candidates = predict_deltas(g, enumerate_applicable(g, kinds))
    candidates.sort(key=lambda c: (c["cost_delta"], c["kind"],
                                   json.dumps(c["args"], sort_keys=True)))
    total = len(candidates)
    if limit is not None:
        candidates = candidates[:limit]
    return {"candidates": candidates, "total": total}


def _handle_apply(state: SessionState, message: dict) -> dict:
    op = _require(message, "op", dict, "apply")
    kind = op.get("kind")
    args = op.get("args")
    if kind not in APPLY_KINDS:
        raise OperationError("apply", "unknown kind", kind=kind)
    if not isinstance(args, dict):
        raise OperationError("apply", "args must be an object")
    g = state.session.graph
    before = set(g.clusters)
    try:
        replay.apply_event(g, TraceEvent(kind, args, 0))
    except (KeyError, TypeError) as e:
        raise OperationError("apply", f"bad arguments for {kind}: {e!r}") from None
    touched = {c for c in _int_ids(args) if c in g.clusters}
    touched |= set(g.clusters) - before
    state.session.dirty |= touched
    return {"applied": kind, "event": netio.event_to_json(g.trace[-1])}


def _int_ids(value) -> set[int]:
    if isinstance(value, bool):
        return set()
    if isinstance(value, int):
        return {value}
    if isinstance(value, (list, tuple, set)):
        return {i for v in value for i in _int_ids(v)}
    if isinstance(value, dict):
        return {i for v in value.values() for i in _int_ids(v)}
    return set()


def _handle_edit(state: SessionState, message: dict) -> dict:
    action = message.get("action")
    session = state.session
    if action == "add_variable":
        cid = session.add_variable(
            _require(message, "id", str, "edit"),
            _require(message, "cardinality", int, "edit"),
        )
        result = {"cluster": cid}
    elif action == "add_arc":
        session.add_arc(_require(message, "x", str, "edit"),
                        _require(message, "y", str, "edit"))
        result = {}
    elif action == "delete_arc":
        session.delete_arc(_require(message, "x", str, "edit"),
                           _require(message, "y", str, "edit"))
        result = {}
    elif action == "delete_variable":
        session.delete_variable(_require(message, "v", str, "edit"))
        result = {}
    elif action == "retract":
        session.retract_variable(_require(message, "p", int, "edit"),
                                 _require(message, "x", str, "edit"))
        result = {}
    else:
        raise OperationError("edit", "unknown action", action=action)
    result["action"] = action
    if state.session.graph.trace:
        result["event"] = netio.event_to_json(state.session.graph.trace[-1])
    return result


def _handle_run_preset(state: SessionState, message: dict) -> dict:
    name = message.get("preset", state.session.config.preset)
    if name not in PRESETS:
        raise OperationError("run-preset", "unknown preset", preset=name)
    seed = message.get("seed")
    if seed is not None and not isinstance(seed, int):
        raise OperationError("run-preset", "seed must be an int")
    if seed is None:
        run = run_preset(state.session.graph, name, rng=state.session.rng)
    else:
        run = run_preset(state.session.graph, name, seed=seed)
    state.session.dirty.clear()
    return {"run": _run_doc(run)}


def _handle_restore(state: SessionState, message: dict) -> dict:
    report = state.session.restore()
    return {
        "triggered": report.triggered,
        "cost": report.cost,
        "run": _run_doc(report.run) if report.run else None,
    }


def _handle_undo(state: SessionState, message: dict) -> dict:
    if not state.journal:
        raise OperationError("undo", "nothing to undo")
    entry = state.journal.pop()
    state.rollback_to(entry)
    return {"undone": entry.verb, "event_count": len(state.events)}


_HANDLERS = {
    "load": _handle_load,
    "state": _handle_state,
    "cost": _handle_cost,
    "check": _handle_check,
    "applicable": _handle_applicable,
    "apply": _handle_apply,
    "edit": _handle_edit,
    "run-preset": _handle_run_preset,
    "restore": _handle_restore,
    "undo": _handle_undo,
}

_MUTATING = ("apply", "edit", "run-preset", "restore")


def handle_message(state: SessionState, message) -> dict:
    if not isinstance(message, dict):
        return {"ok": False, "error": "message must be a JSON object"}
    verb = message.get("verb")
    msg_id = message.get("id")
    response: dict = {"ok": True, "verb": verb}
    if msg_id is not None:
        response["id"] = msg_id
    if verb not in _HANDLERS:
        return {**response, "ok": False, "error": f"unknown verb {verb!r}"}
    entry = state.capture(verb) if verb in _MUTATING else None
    try:
        result = _HANDLERS[verb](state, message)
    except (OperationError, NetworkError, netio.FormatError, ValueError) as e:
        if entry is not None and state.mutated_since(entry):
            state.rollback_to(entry)
        return {**response, "ok": False, "error": str(e)}
    if entry is not None:
        state.journal.append(entry)
    response["result"] = result
    response["events"] = state.sync_events()
    response["state"] = state.state_doc()
    return response


def handle_line(state: SessionState, line: str) -> dict:
    try:
        message = json.loads(line)
    except json.JSONDecodeError as e:
        return {"ok": False, "error": f"invalid JSON: {e.msg}"}
    return handle_message(state, message)


# -- transports ----------------------------------------------------------------


def serve_stdio(stdin=None, stdout=None, config: SessionConfig | None = None) -> None:
    """One session over text streams; used by ``python -m jtree serve``."""
    import sys

    fin = sys.stdin if stdin is None else stdin
    fout = sys.stdout if stdout is None else stdout

    def emit(doc: dict) -> None:
        fout.write(json.dumps(doc) + "\n")
        fout.flush()

    emit(banner())
    state = SessionState(config)
    for line in fin:
        if not line.strip():
            continue
        emit(handle_line(state, line))


class _TCPHandler(socketserver.StreamRequestHandler):
    def handle(self):
        def emit(doc: dict) -> None:
            self.wfile.write((json.dumps(doc) + "\n").encode("utf-8"))

        emit(banner())
        state = SessionState(self.server.session_config)
        for raw in self.rfile:
            line = raw.decode("utf-8", errors="replace")
            if not line.strip():
                continue
            emit(handle_line(state, line))


class SessionServer(socketserver.ThreadingTCPServer):
    """TCP transport; each connection gets an independent session."""

    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, host: str = "127.0.0.1", port: int = 0,
                 config: SessionConfig | None = None):
        self.session_config = config
        super().__init__((host, port), _TCPHandler)
