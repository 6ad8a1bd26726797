import { expect, test } from "vitest";

import { graphSeed, layoutGraph, mulberry32 } from "../src/layout.js";
import type { GraphDoc } from "../src/protocol.js";

function doc(
  clusterCount: number,
  edges: Array<[number, number]>,
): GraphDoc {
  return {
    format: "cluster-graph",
    version: 1,
    network: {
      format: "belief-network",
      version: 1,
      variables: [{ id: "A", cardinality: 2 }],
      arcs: [],
    },
    clusters: Array.from({ length: clusterCount }, (_, i) => ({
      id: i,
      members: [`V${i}`],
      family_vars: [`V${i}`],
    })),
    edges: edges.map(([a, b]) => ({ a, b, separator: ["A"] })),
    family_home: { A: 0 },
    next_id: clusterCount,
  };
}

test("prng is deterministic for a given seed", () => {
  const a = mulberry32(42);
  const b = mulberry32(42);
  for (let i = 0; i < 10; i++) expect(a()).toBe(b());
  const c = mulberry32(43);
  expect(mulberry32(42)()).not.toBe(c());
});

test("graph seed depends on structure", () => {
  const base = doc(3, [[0, 1], [1, 2]]);
  const rewired = doc(3, [[0, 1], [0, 2]]);
  expect(graphSeed(base)).toBe(graphSeed(base));
  expect(graphSeed(base)).not.toBe(graphSeed(rewired));
});

test("layout is deterministic and within bounds", () => {
  const d = doc(6, [[0, 1], [1, 2], [2, 3], [3, 4], [4, 5], [5, 0]]);
  const first = layoutGraph(d);
  const second = layoutGraph(d);
  expect(first.size).toBe(6);
  for (const [id, p] of first) {
    const q = second.get(id)!;
    expect(q.x).toBe(p.x);
    expect(q.y).toBe(p.y);
    expect(Number.isFinite(p.x)).toBe(true);
    expect(Number.isFinite(p.y)).toBe(true);
    expect(p.x).toBeGreaterThanOrEqual(0);
    expect(p.x).toBeLessThanOrEqual(800);
    expect(p.y).toBeGreaterThanOrEqual(0);
    expect(p.y).toBeLessThanOrEqual(600);
  }
});

test("no two clusters land on the same point", () => {
  const d = doc(8, [[0, 1], [0, 2], [0, 3], [0, 4], [0, 5], [0, 6], [0, 7]]);
  const layout = layoutGraph(d);
  const seen = new Set<string>();
  for (const p of layout.values()) {
    const key = `${p.x.toFixed(3)},${p.y.toFixed(3)}`;
    expect(seen.has(key)).toBe(false);
    seen.add(key);
  }
});

test("carried-over clusters stay near their previous spots", () => {
  const before = doc(5, [[0, 1], [1, 2], [2, 3], [3, 4]]);
  const settled = layoutGraph(before);

  // same graph plus one new cluster hanging off the chain end
  const after = doc(6, [[0, 1], [1, 2], [2, 3], [3, 4], [4, 5]]);
  const warm = layoutGraph(after, settled);

  expect(warm.size).toBe(6);
  for (const [id, p] of settled) {
    const q = warm.get(id)!;
    const dist = Math.hypot(q.x - p.x, q.y - p.y);
    expect(dist).toBeLessThan(150);
  }
  // deterministic given the same previous layout
  const again = layoutGraph(after, settled);
  for (const [id, p] of warm) {
    expect(again.get(id)).toEqual(p);
  }
});
