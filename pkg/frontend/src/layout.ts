/**
 * Deterministic force-directed layout for cluster graphs.
 *
 * The seed is derived from the graph identity, so the same document always
 * lands in the same arrangement.  Clusters carried over from a previous
 * layout start where they were and move on a short leash, which keeps the
 * picture stable while the graph transforms around them; new clusters get
 * full mobility and settle near their neighbors.
 */

import type { GraphDoc } from "./protocol.js";

export interface Point {
  x: number;
  y: number;
}

export type Layout = Map<number, Point>;

/** FNV-1a hash of the graph's structural identity. */
export function graphSeed(doc: GraphDoc): number {
  const parts: string[] = [];
  const clusters = [...doc.clusters].sort((a, b) => a.id - b.id);
  for (const c of clusters) {
    parts.push(`${c.id}:${[...c.members].sort().join(",")}`);
  }
  const edges = [...doc.edges].sort((a, b) => a.a - b.a || a.b - b.b);
  for (const e of edges) parts.push(`${e.a}-${e.b}`);
  const text = parts.join(";");
  let hash = 0x811c9dc5;
  for (let i = 0; i < text.length; i++) {
    hash ^= text.charCodeAt(i);
    hash = Math.imul(hash, 0x01000193) >>> 0;
  }
  return hash >>> 0;
}

/** Small deterministic PRNG; good enough for layout jitter. */
export function mulberry32(seed: number): () => number {
  let state = seed >>> 0;
  return () => {
    state = (state + 0x6d2b79f5) >>> 0;
    let t = state;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

const ITERATIONS = 120;
const MARGIN = 60;
/** Carried-over clusters move at a fraction of the free step size. */
const PINNED_LEASH = 0.15;

export function layoutGraph(
  doc: GraphDoc,
  previous?: Layout,
  width = 800,
  height = 600,
): Layout {
  const ids = doc.clusters.map((c) => c.id).sort((a, b) => a - b);
  const result: Layout = new Map();
  if (ids.length === 0) return result;

  const rng = mulberry32(graphSeed(doc));
  const index = new Map<number, number>();
  ids.forEach((id, i) => index.set(id, i));

  const neighbors: number[][] = ids.map(() => []);
  for (const e of doc.edges) {
    const a = index.get(e.a);
    const b = index.get(e.b);
    if (a === undefined || b === undefined) continue;
    neighbors[a].push(b);
    neighbors[b].push(a);
  }

  // starting positions: previous spot, else near placed neighbors, else seeded
  const xs = new Array<number>(ids.length);
  const ys = new Array<number>(ids.length);
  const pinned = new Array<boolean>(ids.length).fill(false);
  for (let i = 0; i < ids.length; i++) {
    const prev = previous?.get(ids[i]);
    const jx = rng(); // consume in fixed order so placement stays aligned
    const jy = rng();
    if (prev) {
      xs[i] = prev.x;
      ys[i] = prev.y;
      pinned[i] = true;
    } else {
      const placed = neighbors[i].filter((j) => xs[j] !== undefined);
      if (placed.length > 0) {
        let cx = 0;
        let cy = 0;
        for (const j of placed) {
          cx += xs[j];
          cy += ys[j];
        }
        xs[i] = cx / placed.length + (jx - 0.5) * 80;
        ys[i] = cy / placed.length + (jy - 0.5) * 80;
      } else {
        xs[i] = MARGIN + jx * (width - 2 * MARGIN);
        ys[i] = MARGIN + jy * (height - 2 * MARGIN);
      }
    }
  }

  const area = (width - 2 * MARGIN) * (height - 2 * MARGIN);
  const k = Math.sqrt(area / ids.length);
  let temperature = Math.min(width, height) / 8;
  const cooling = temperature / (ITERATIONS + 1);

  for (let step = 0; step < ITERATIONS; step++) {
    const dx = new Array<number>(ids.length).fill(0);
    const dy = new Array<number>(ids.length).fill(0);
    for (let i = 0; i < ids.length; i++) {
      for (let j = i + 1; j < ids.length; j++) {
        let ddx = xs[i] - xs[j];
        let ddy = ys[i] - ys[j];
        if (ddx === 0 && ddy === 0) {
          // deterministic nudge for coincident nodes
          ddx = 0.01 * (i + 1);
          ddy = 0.01 * (j + 1);
        }
        const dist = Math.sqrt(ddx * ddx + ddy * ddy);
        const repulse = (k * k) / dist;
        dx[i] += (ddx / dist) * repulse;
        dy[i] += (ddy / dist) * repulse;
        dx[j] -= (ddx / dist) * repulse;
        dy[j] -= (ddy / dist) * repulse;
      }
    }
    for (let i = 0; i < ids.length; i++) {
      for (const j of neighbors[i]) {
        if (j <= i) continue;
        let ddx = xs[i] - xs[j];
        let ddy = ys[i] - ys[j];
        if (ddx === 0 && ddy === 0) {
          ddx = 0.01 * (i + 1);
          ddy = 0.01 * (j + 1);
        }
        const dist = Math.sqrt(ddx * ddx + ddy * ddy);
        const attract = (dist * dist) / k;
        dx[i] -= (ddx / dist) * attract;
        dy[i] -= (ddy / dist) * attract;
        dx[j] += (ddx / dist) * attract;
        dy[j] += (ddy / dist) * attract;
      }
    }
    const cx = width / 2;
    const cy = height / 2;
    for (let i = 0; i < ids.length; i++) {
      dx[i] += (cx - xs[i]) * 0.02;
      dy[i] += (cy - ys[i]) * 0.02;
      const len = Math.sqrt(dx[i] * dx[i] + dy[i] * dy[i]);
      if (len === 0) continue;
      const leash = pinned[i] ? temperature * PINNED_LEASH : temperature;
      const stepLen = Math.min(len, leash);
      xs[i] += (dx[i] / len) * stepLen;
      ys[i] += (dy[i] / len) * stepLen;
      xs[i] = Math.max(MARGIN, Math.min(width - MARGIN, xs[i]));
      ys[i] = Math.max(MARGIN, Math.min(height - MARGIN, ys[i]));
    }
    temperature -= cooling;
  }

  for (let i = 0; i < ids.length; i++) {
    result.set(ids[i], { x: xs[i], y: ys[i] });
  }
  return result;
}
