"""File formats: networks, cluster graphs, traces, and DOT export.

All formats are JSON with an explicit ``format`` tag and integer ``version``
so that readers can reject what they do not understand.  Set-valued fields
serialize as sorted lists; parsing reports the JSON path of the offending
field.  Trace files hold one event object per line.
"""

from __future__ import annotations

import json
from typing import Iterable

from .model import BeliefNetwork, Cluster, ClusterEdge, ClusterGraph, NetworkError, TraceEvent

NETWORK_FORMAT = "belief-network"
GRAPH_FORMAT = "cluster-graph"
FORMAT_VERSION = 1


class FormatError(ValueError):
    """Malformed document; message carries the location."""

    def __init__(self, message: str, where: str = ""):
        self.where = where
        super().__init__(f"{where}: {message}" if where else message)


def _load_json(text: str, what: str) -> dict:
    try:
        doc = json.loads(text) if text.strip() else {}
    except json.JSONDecodeError as e:
        raise FormatError(f"invalid JSON: {e.msg}", f"line {e.lineno} column {e.colno}") from None
    if doc == {}:
        return {"format": what, "version": FORMAT_VERSION}
    if not isinstance(doc, dict):
        raise FormatError("document must be an object", "$")
    if doc.get("format") != what:
        raise FormatError(f"expected format {what!r}, got {doc.get('format')!r}", "format")
    if doc.get("version") != FORMAT_VERSION:
        raise FormatError(f"unsupported version {doc.get('version')!r}", "version")
    return doc


def _expect(doc: dict, key: str, kind: type, where: str):
    value = doc.get(key)
    if not isinstance(value, kind):
        raise FormatError(f"expected {kind.__name__}", f"{where}.{key}")
    return value


def serialize_network(network: BeliefNetwork) -> str:
    doc = {
        "format": NETWORK_FORMAT,
        "version": FORMAT_VERSION,
        "variables": [
            {"id": v.id, "cardinality": v.cardinality} for v in network.variables()
        ],
        "arcs": [[p, c] for p, c in network.arcs()],
    }
    return json.dumps(doc, indent=2) + "\n"


def parse_network(text: str) -> BeliefNetwork:
    doc = _load_json(text, NETWORK_FORMAT)
    network = BeliefNetwork()
    for i, item in enumerate(doc.get("variables", [])):
        where = f"variables[{i}]"
        if not isinstance(item, dict):
            raise FormatError("expected object", where)
        var_id = _expect(item, "id", str, where)
        card = _expect(item, "cardinality", int, where)
        try:
            network.add_variable(var_id, card)
        except NetworkError as e:
            raise FormatError(str(e), where) from None
    for i, item in enumerate(doc.get("arcs", [])):
        where = f"arcs[{i}]"
        if not (isinstance(item, list) and len(item) == 2
                and all(isinstance(x, str) for x in item)):
            raise FormatError("expected a [parent, child] pair of strings", where)
        try:
            network.add_arc(item[0], item[1])
        except NetworkError as e:
            raise FormatError(str(e), where) from None
    return network


def serialize_graph(graph: ClusterGraph) -> str:
    doc = graph_to_json(graph)
    return json.dumps(doc, indent=2) + "\n"


def graph_to_json(graph: ClusterGraph) -> dict:
    net_doc = json.loads(serialize_network(graph.network))
    return {
        "format": GRAPH_FORMAT,
        "version": FORMAT_VERSION,
        "network": net_doc,
        "clusters": [
            {
                "id": c.id,
                "members": sorted(c.members),
                "family_vars": sorted(c.family_vars),
            }
            for c in (graph.clusters[i] for i in graph.cluster_ids())
        ],
        "edges": [
            {"a": k[0], "b": k[1], "separator": sorted(graph.edges[k].separator)}
            for k in sorted(graph.edges)
        ],
        "family_home": {v: h for v, h in sorted(graph.family_home.items())},
        "next_id": graph._next_id,
    }


def parse_graph(text: str) -> ClusterGraph:
    return graph_from_json(_load_json(text, GRAPH_FORMAT))


def graph_from_json(doc: dict) -> ClusterGraph:
    net_doc = doc.get("network")
    if not isinstance(net_doc, dict):
        raise FormatError("expected object", "network")
    network = parse_network(json.dumps(net_doc))
    graph = ClusterGraph(network)
    for i, item in enumerate(doc.get("clusters", [])):
        where = f"clusters[{i}]"
        if not isinstance(item, dict):
            raise FormatError("expected object", where)
        cid = _expect(item, "id", int, where)
        if cid in graph.clusters or cid < 0:
            raise FormatError(f"bad cluster id {cid}", where)
        members = _str_set(item.get("members"), f"{where}.members")
        fam = _str_set(item.get("family_vars"), f"{where}.family_vars")
        unknown = (members | fam) - set(network.variable_ids())
        if unknown:
            raise FormatError(f"unknown variables {sorted(unknown)}", where)
        graph.clusters[cid] = Cluster(cid, members, fam)
        graph._adj[cid] = set()
    for i, item in enumerate(doc.get("edges", [])):
        where = f"edges[{i}]"
        if not isinstance(item, dict):
            raise FormatError("expected object", where)
        a = _expect(item, "a", int, where)
        b = _expect(item, "b", int, where)
        sep = _str_set(item.get("separator"), f"{where}.separator")
        if a not in graph.clusters or b not in graph.clusters:
            raise FormatError(f"edge references missing cluster ({a}, {b})", where)
        if not (a < b):
            raise FormatError("endpoints must satisfy a < b", where)
        if (a, b) in graph.edges:
            raise FormatError("duplicate edge", where)
        if not sep:
            raise FormatError("empty separator", where)
        bad = sep - (graph.clusters[a].members & graph.clusters[b].members)
        if bad:
            raise FormatError(
                f"separator {sorted(bad)} outside the endpoint intersection", where
            )
        graph.edges[(a, b)] = ClusterEdge(a, b, sep)
        graph._adj[a].add(b)
        graph._adj[b].add(a)
    home = doc.get("family_home", {})
    if not isinstance(home, dict):
        raise FormatError("expected object", "family_home")
    for v, h in home.items():
        if v not in network:
            raise FormatError(f"unknown variable {v!r}", "family_home")
        if not isinstance(h, int) or h not in graph.clusters:
            raise FormatError(f"missing cluster {h!r} for {v!r}", "family_home")
        graph.family_home[v] = h
    next_id = doc.get("next_id", 0)
    floor = max(graph.clusters, default=-1) + 1
    if not isinstance(next_id, int) or next_id < floor:
        raise FormatError(f"next_id must be an int >= {floor}", "next_id")
    graph._next_id = next_id
    return graph


def _str_set(value, where: str) -> set[str]:
    if not (isinstance(value, list) and all(isinstance(x, str) for x in value)):
        raise FormatError("expected a list of strings", where)
    out = set(value)
    if len(out) != len(value):
        raise FormatError("duplicate entries", where)
    return out


# -- traces -------------------------------------------------------------------


def event_to_json(event: TraceEvent) -> dict:
    return {"kind": event.kind, "args": event.args, "cost_delta": event.cost_delta}


def event_from_json(doc: dict, where: str = "$") -> TraceEvent:
    if not isinstance(doc, dict):
        raise FormatError("expected object", where)
    kind = _expect(doc, "kind", str, where)
    args = _expect(doc, "args", dict, where)
    delta = _expect(doc, "cost_delta", int, where)
    return TraceEvent(kind, args, delta)


def serialize_trace(events: Iterable[TraceEvent]) -> str:
    return "".join(json.dumps(event_to_json(e)) + "\n" for e in events)


def parse_trace(text: str) -> list[TraceEvent]:
    events = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            doc = json.loads(line)
        except json.JSONDecodeError as e:
            raise FormatError(f"invalid JSON: {e.msg}", f"line {lineno}") from None
        events.append(event_from_json(doc, f"line {lineno}"))
    return events


# -- DOT export ---------------------------------------------------------------


def export_dot(graph: ClusterGraph) -> str:
    """Graph-description text for visual inspection.

    Clusters list their members with family-marked variables starred; edges
    are labeled with their separators.  Output is deterministic.
    """
    lines = ["graph clusters {", "  node [shape=box];"]
    for cid in graph.cluster_ids():
        c = graph.clusters[cid]
        label = ",".join(
            v + "*" if v in c.family_vars else v for v in sorted(c.members)
        )
        lines.append(f'  c{cid} [label="{cid}: {label}"];')
    for k in sorted(graph.edges):
        sep = ",".join(sorted(graph.edges[k].separator))
        lines.append(f'  c{k[0]} -- c{k[1]} [label="{sep}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
