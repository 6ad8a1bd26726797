/**
 * End-to-end tests against a real core process spawned per session.
 * Nothing is mocked on the happy paths: every assertion about costs and
 * graph shapes checks values the core reported over the wire.
 */

import { spawn } from "node:child_process";
import { afterEach, expect, test } from "vitest";

import { StdioTransport, TcpTransport } from "../src/transport_node.js";
import { WorkbenchSession } from "../src/session.js";
import type { Transport } from "../src/transport.js";
import type { Candidate, NetworkDoc, OkResponse } from "../src/protocol.js";

const DIAMOND: NetworkDoc = {
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

const open: Transport[] = [];

function connectStdio(): { session: WorkbenchSession; transport: StdioTransport } {
  const transport = new StdioTransport("python3", ["-m", "jtree", "serve", "--stdio"]);
  open.push(transport);
  const session = new WorkbenchSession(transport, { applicableLimit: 20 });
  return { session, transport };
}

function countSends(transport: Transport): () => number {
  let count = 0;
  const original = transport.send.bind(transport);
  transport.send = (line: string) => {
    count += 1;
    original(line);
  };
  return () => count;
}

afterEach(() => {
  while (open.length > 0) open.pop()?.close();
});

test("handshake verifies protocol name and version", async () => {
  const { session } = connectStdio();
  const banner = await session.connect();
  expect(banner.protocol).toBe("cluster-session");
  expect(banner.version).toBe(1);
});

test("version mismatch raises an explicit error", async () => {
  let emit: (line: string) => void = () => undefined;
  const fake: Transport = {
    send: () => undefined,
    onLine: (handler) => {
      emit = handler;
    },
    onClose: () => undefined,
    close: () => undefined,
  };
  const session = new WorkbenchSession(fake);
  const pending = session.connect();
  emit(JSON.stringify({ protocol: "cluster-session", version: 99 }));
  await expect(pending).rejects.toThrow(/protocol mismatch/);
});

test("diamond slide-drop-undo parity with the core", async () => {
  const { session, transport } = connectStdio();
  const sends = countSends(transport);
  await session.connect();

  const loaded = await session.loadNetwork(DIAMOND);
  expect(loaded.ok).toBe(true);
  let view = session.view();
  expect(view.cost).toBe(18);
  expect(view.cost).toBe((loaded as OkResponse).state.cost);
  expect(view.liveState?.event_count).toBe(0);
  expect(view.state?.multiply_connected).toBe(true);
  expect(view.timelineLength).toBe(1);

  // enumerate slides; predicted deltas come from the core, sorted ascending
  await session.refreshApplicable(["slide"]);
  view = session.view();
  expect(view.candidates.length).toBe(8);
  expect(view.candidatesFresh).toBe(true);
  const deltas = view.candidates.map((c) => c.cost_delta);
  expect(deltas).toEqual([...deltas].sort((a, b) => a - b));
  const slide = view.candidates.find(
    (c) => c.kind === "slide" && c.args.p === 0 && c.args.q === 1 && c.args.d === 3,
  );
  expect(slide).toBeDefined();
  expect(slide!.cost_delta).toBe(8);

  // slide the A-family cluster onto the hub: displayed cost must equal
  // the core's post-apply cost, not load cost plus the predicted delta
  const slid = await session.applySelected(slide!);
  expect(slid.sent).toBe(true);
  expect(slid.sent && slid.response.ok).toBe(true);
  view = session.view();
  expect(view.cost).toBe(26);
  const slideState = (slid as { response: OkResponse }).response.state;
  expect(view.cost).toBe(slideState.cost);
  expect(view.liveState?.event_count).toBe(1);
  expect(view.trace.length).toBe(1);
  expect(view.trace[0]).toEqual({
    kind: "slide",
    args: { p: 0, q: 1, d: 3 },
    cost_delta: 8,
  });
  const hub = view.state?.graph.clusters.find((c) => c.id === 3);
  expect(hub?.members).toEqual(["A", "B", "C", "D"]);

  await session.refreshApplicable(["drop"]);
  view = session.view();
  expect(view.candidates.length).toBe(3);
  const drop = view.candidates.find(
    (c) => c.kind === "drop" && c.args.p === 0 && c.args.q === 2 && c.args.d === 3,
  );
  expect(drop).toBeDefined();
  expect(drop!.cost_delta).toBe(0);

  // dropping the redundant edge leaves the cost at the core-reported 26
  const dropped = await session.applySelected(drop!);
  expect(dropped.sent && dropped.response.ok).toBe(true);
  view = session.view();
  expect(view.cost).toBe(26);
  expect(view.state?.multiply_connected).toBe(false);
  expect(view.liveState?.event_count).toBe(2);
  expect(view.trace.length).toBe(2);

  // undo restores the prior displayed state exactly, graph doc included
  const undone = await session.undoLast();
  expect(undone.ok).toBe(true);
  expect((undone as OkResponse).result).toEqual({
    undone: "apply",
    event_count: 1,
  });
  view = session.view();
  expect(view.cost).toBe(26);
  expect(view.state).toEqual(slideState);
  expect(view.trace.length).toBe(1);

  // one protocol message per action: load, applicable, apply, applicable,
  // apply, undo
  expect(sends()).toBe(6);
  console.log("workbench parity (diamond slide-drop-undo): PASS");
});

test("stale candidates are refused without sending a message", async () => {
  const { session, transport } = connectStdio();
  await session.connect();
  await session.loadNetwork(DIAMOND);
  await session.refreshApplicable(["slide"]);
  const before = session.view();
  const first = before.candidates[0];
  const other = before.candidates[4];
  const applied = await session.applySelected(first);
  expect(applied.sent && applied.response.ok).toBe(true);

  const sends = countSends(transport);
  const mid = session.view();
  expect(mid.candidatesFresh).toBe(false);
  const outcome = await session.applySelected(other);
  expect(outcome).toEqual({ sent: false, reason: "stale" });
  expect(sends()).toBe(0);
  const after = session.view();
  expect(after.cost).toBe(mid.cost);
  expect(after.liveState?.event_count).toBe(mid.liveState?.event_count);

  // a fresh enumeration makes applying possible again
  await session.refreshApplicable(["slide", "drop"]);
  const fresh = session.view().candidates[0];
  const retried = await session.applySelected(fresh);
  expect(retried.sent).toBe(true);
});

test("run-preset records one timeline step and scrubbing replays costs", async () => {
  const { session } = connectStdio();
  await session.connect();
  await session.loadNetwork(DIAMOND);
  const response = await session.runPreset("E", 0);
  expect(response.ok).toBe(true);
  const run = (response as OkResponse).result.run as {
    cost_before: number;
    cost_after: number;
  };
  expect(run.cost_before).toBe(18);
  expect(run.cost_after).toBe(16);

  let view = session.view();
  expect(view.cost).toBe(16);
  expect(view.costHistory).toEqual([18, 16]);
  expect(view.timelineLength).toBe(2);
  expect(view.trace.length).toBe(view.liveState?.event_count);

  session.scrubTo(0);
  view = session.view();
  expect(view.cost).toBe(18);
  expect(view.atLatest).toBe(false);
  expect(view.label).toBe("load");

  session.goLive();
  view = session.view();
  expect(view.cost).toBe(16);
  expect(view.atLatest).toBe(true);
});

test("core errors pass through verbatim and change nothing", async () => {
  const { session } = connectStdio();
  await session.connect();
  await session.loadNetwork(DIAMOND);
  const before = session.view();

  // adding D -> A would close a directed cycle; the core must refuse
  const response = await session.edit("add_arc", { x: "D", y: "A" });
  expect(response.ok).toBe(false);
  expect(response.ok ? "" : response.error).toMatch(/cycle/);

  const after = session.view();
  expect(after.cost).toBe(before.cost);
  expect(after.timelineLength).toBe(before.timelineLength);
  expect(after.liveState?.event_count).toBe(before.liveState?.event_count);
  expect(after.lastError).toMatch(/cycle/);
});

test("checks report verdicts from the core", async () => {
  const { session } = connectStdio();
  await session.connect();
  await session.loadNetwork(DIAMOND);
  const response = await session.runChecks(["structure", "family", "path"]);
  expect(response.ok).toBe(true);
  const view = session.view();
  expect(view.checks?.map((r) => r.name)).toEqual([
    "structure",
    "family_property",
    "path_property",
  ]);
  expect(view.checks?.every((r) => r.passed)).toBe(true);
});

test("disconnect flips to read-only replay over the local trace", async () => {
  const { session, transport } = connectStdio();
  await session.connect();
  await session.loadNetwork(DIAMOND);
  await session.refreshApplicable(["slide"]);
  const candidate = session.view().candidates[0] as Candidate;
  await session.applySelected(candidate);
  const costAfterApply = session.view().cost;

  transport.close();
  let view = session.view();
  expect(view.mode).toBe("replay");

  // scrubbing the recorded trace still works without a connection
  session.scrubTo(0);
  view = session.view();
  expect(view.cost).toBe(18);
  session.goLive();
  view = session.view();
  expect(view.cost).toBe(costAfterApply);

  // mutations are refused locally
  await session.refreshApplicable(["slide"]).then(
    () => {
      throw new Error("refresh should fail in replay mode");
    },
    (error: Error) => expect(error.message).toMatch(/replay/),
  );
  const outcome = await session.applySelected(candidate);
  expect(outcome).toEqual({ sent: false, reason: "replay" });
  await expect(session.loadNetwork(DIAMOND)).rejects.toThrow(/replay/);
});

test("tcp transport drives the same protocol", async () => {
  const child = spawn("python3", [
    "-m",
    "jtree",
    "serve",
    "--tcp",
    "127.0.0.1:0",
  ]);
  try {
    const address = await new Promise<[string, number]>((resolve, reject) => {
      const timer = setTimeout(
        () => reject(new Error("no listening line")),
        20000,
      );
      let buffer = "";
      child.stdout.setEncoding("utf8");
      child.stdout.on("data", (chunk: string) => {
        buffer += chunk;
        const index = buffer.indexOf("\n");
        if (index >= 0) {
          clearTimeout(timer);
          const doc = JSON.parse(buffer.slice(0, index)) as {
            listening: [string, number];
          };
          resolve(doc.listening);
        }
      });
    });
    const transport = new TcpTransport(address[0], address[1]);
    open.push(transport);
    await transport.ready();
    const session = new WorkbenchSession(transport);
    const banner = await session.connect();
    expect(banner.version).toBe(1);
    const loaded = await session.loadNetwork(DIAMOND);
    expect(loaded.ok).toBe(true);
    expect(session.view().cost).toBe(18);
  } finally {
    child.kill();
  }
});
