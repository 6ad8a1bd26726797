/**
 * Browser shell.  Wires DOM controls to a WorkbenchSession; every control
 * triggers exactly one protocol message, and everything on screen is read
 * back from confirmed core responses (no optimistic rendering).
 */

import { WebSocketTransport } from "./transport.js";
import { WorkbenchSession, type ViewState } from "./session.js";
import { layoutGraph, type Layout } from "./layout.js";
import { renderGraph, renderCostHistory } from "./render.js";
import type { Candidate, NetworkDoc } from "./protocol.js";

const SAMPLE_NETWORK: NetworkDoc = {
  format: "belief-network",
  version: 1,
  variables: [
    { id: "A", cardinality: 2 },
    { id: "B", cardinality: 2 },
    { id: "C", cardinality: 2 },
    { id: "D", cardinality: 2 },
  ],
  arcs: [
    ["A", "B"],
    ["A", "C"],
    ["B", "D"],
    ["C", "D"],
  ],
};

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

let session: WorkbenchSession | null = null;
let layout: Layout | undefined;
let layoutKey = "";

function status(text: string): void {
  el<HTMLElement>("status").textContent = text;
}

function render(view: ViewState): void {
  el<HTMLElement>("replay-banner").hidden = view.mode !== "replay";
  el<HTMLElement>("cost").textContent =
    view.cost === null ? "-" : String(view.cost);
  el<HTMLElement>("position-label").textContent =
    view.timelineLength === 0
      ? "empty"
      : `${view.timelineIndex + 1}/${view.timelineLength} ${view.label}` +
        (view.atLatest ? "" : " (history)");

  const timeline = el<HTMLInputElement>("timeline");
  timeline.max = String(Math.max(0, view.timelineLength - 1));
  timeline.value = String(Math.max(0, view.timelineIndex));
  timeline.disabled = view.timelineLength < 2;

  if (view.state) {
    const doc = view.state.graph;
    // warm-start from the previous arrangement so clusters keep their spots
    const key = `${view.timelineIndex}`;
    if (key !== layoutKey) {
      layout = layoutGraph(doc, layout);
      layoutKey = key;
    }
    el<HTMLElement>("graph").innerHTML = renderGraph(doc, layout!, {
      selection: view.selection.cluster,
      dirty: view.atLatest ? view.state.dirty : [],
    });
    el<HTMLElement>("state-line").textContent =
      `edges-clusters ${view.state.edges_minus_clusters}, ` +
      `${view.state.multiply_connected ? "multiply" : "singly"} connected, ` +
      `events ${view.state.event_count}, undo depth ${view.state.undo_depth}`;
  } else {
    el<HTMLElement>("graph").innerHTML = "";
    el<HTMLElement>("state-line").textContent = "no document loaded";
  }

  el<HTMLElement>("cost-history").innerHTML = renderCostHistory(
    view.costHistory,
  );

  const list = el<HTMLElement>("candidates");
  list.innerHTML = "";
  view.candidates.forEach((candidate, i) => {
    const item = document.createElement("li");
    const sign = candidate.cost_delta > 0 ? "+" : "";
    item.textContent = `${candidate.kind} ${JSON.stringify(candidate.args)} ` +
      `(${sign}${candidate.cost_delta})`;
    item.className = view.selection.candidate === i ? "selected" : "";
    item.addEventListener("click", () => session?.selectCandidate(i));
    list.appendChild(item);
  });
  el<HTMLElement>("candidates-meta").textContent =
    view.candidates.length === 0
      ? "none enumerated"
      : `${view.candidates.length} of ${view.candidatesTotal} shown` +
        (view.candidatesFresh ? "" : " (stale: refresh)");

  const traceList = el<HTMLElement>("trace");
  traceList.innerHTML = "";
  view.trace.forEach((event) => {
    const item = document.createElement("li");
    const sign = event.cost_delta > 0 ? "+" : "";
    item.textContent =
      `${event.kind} ${JSON.stringify(event.args)} (${sign}${event.cost_delta})`;
    traceList.appendChild(item);
  });

  el<HTMLElement>("checks").textContent = view.checks
    ? view.checks
        .map((r) => `${r.name}: ${r.passed ? "pass" : "FAIL"}`)
        .join(", ")
    : "";

  if (view.lastError) status(`error: ${view.lastError}`);

  const disabled = view.mode === "replay";
  for (const id of [
    "load",
    "refresh",
    "apply",
    "undo",
    "restore",
    "check",
    "run-preset",
    "add-variable",
    "add-arc",
    "delete-arc",
    "delete-variable",
  ]) {
    el<HTMLButtonElement>(id).disabled = disabled;
  }
}

async function connect(): Promise<void> {
  const endpoint = el<HTMLInputElement>("endpoint").value.trim();
  status(`connecting to ${endpoint}...`);
  try {
    const transport = new WebSocketTransport(endpoint);
    await transport.ready();
    session = new WorkbenchSession(transport);
    session.onChange(render);
    const banner = await session.connect();
    status(`connected: ${banner.protocol} v${banner.version}`);
    render(session.view());
  } catch (error) {
    session = null;
    status(String(error));
  }
}

async function loadFromTextarea(): Promise<void> {
  if (!session) return status("not connected");
  let doc: NetworkDoc;
  try {
    doc = JSON.parse(el<HTMLTextAreaElement>("network-json").value);
  } catch (error) {
    return status(`invalid JSON: ${String(error)}`);
  }
  layout = undefined;
  layoutKey = "";
  const response = await session.loadNetwork(doc);
  if (response.ok) status("loaded");
}

async function applySelectedCandidate(): Promise<void> {
  if (!session) return status("not connected");
  const view = session.view();
  const index = view.selection.candidate;
  if (index === null || !view.candidates[index]) {
    return status("select a candidate first");
  }
  const candidate: Candidate = view.candidates[index];
  const outcome = await session.applySelected(candidate);
  if (!outcome.sent) {
    status(
      outcome.reason === "stale"
        ? "candidates are stale: refresh the list before applying"
        : "disconnected: replay mode is read-only",
    );
  } else if (outcome.response.ok) {
    status(`applied ${candidate.kind}`);
  }
}

function wire(): void {
  el<HTMLTextAreaElement>("network-json").value = JSON.stringify(
    SAMPLE_NETWORK,
    null,
    2,
  );
  el<HTMLButtonElement>("connect").addEventListener("click", () => {
    void connect();
  });
  el<HTMLButtonElement>("load").addEventListener("click", () => {
    void loadFromTextarea();
  });
  el<HTMLButtonElement>("refresh").addEventListener("click", () => {
    void session?.refreshApplicable();
  });
  el<HTMLButtonElement>("apply").addEventListener("click", () => {
    void applySelectedCandidate();
  });
  el<HTMLButtonElement>("undo").addEventListener("click", () => {
    void session?.undoLast();
  });
  el<HTMLButtonElement>("restore").addEventListener("click", () => {
    void session?.restore();
  });
  el<HTMLButtonElement>("check").addEventListener("click", () => {
    void session?.runChecks();
  });
  el<HTMLButtonElement>("run-preset").addEventListener("click", () => {
    const preset = el<HTMLSelectElement>("preset").value;
    const seedText = el<HTMLInputElement>("seed").value.trim();
    const seed = seedText === "" ? undefined : Number(seedText);
    void session?.runPreset(preset, seed);
  });
  el<HTMLButtonElement>("add-variable").addEventListener("click", () => {
    const id = el<HTMLInputElement>("var-id").value.trim();
    const cardinality = Number(el<HTMLInputElement>("var-card").value);
    if (id) void session?.edit("add_variable", { id, cardinality });
  });
  el<HTMLButtonElement>("add-arc").addEventListener("click", () => {
    const x = el<HTMLInputElement>("arc-from").value.trim();
    const y = el<HTMLInputElement>("arc-to").value.trim();
    if (x && y) void session?.edit("add_arc", { x, y });
  });
  el<HTMLButtonElement>("delete-arc").addEventListener("click", () => {
    const x = el<HTMLInputElement>("arc-from").value.trim();
    const y = el<HTMLInputElement>("arc-to").value.trim();
    if (x && y) void session?.edit("delete_arc", { x, y });
  });
  el<HTMLButtonElement>("delete-variable").addEventListener("click", () => {
    const v = el<HTMLInputElement>("var-id").value.trim();
    if (v) void session?.edit("delete_variable", { v });
  });
  el<HTMLInputElement>("timeline").addEventListener("input", (event) => {
    const value = Number((event.target as HTMLInputElement).value);
    session?.scrubTo(value);
  });
  el<HTMLButtonElement>("go-live").addEventListener("click", () => {
    session?.goLive();
  });
  el<HTMLElement>("graph").addEventListener("click", (event) => {
    const group = (event.target as Element).closest("[data-cluster]");
    if (group && session) {
      session.selectCluster(Number(group.getAttribute("data-cluster")));
    }
  });
}

wire();
