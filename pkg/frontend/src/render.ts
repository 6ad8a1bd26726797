/**
 * Pure SVG string rendering.  No DOM access, so node tests can assert on
 * the markup directly; the browser shell injects the strings via innerHTML.
 */

import type { GraphDoc } from "./protocol.js";
import type { Layout } from "./layout.js";

export interface RenderOptions {
  width?: number;
  height?: number;
  /** Cluster id to highlight as selected. */
  selection?: number | null;
  /** Cluster ids the core reported as dirty. */
  dirty?: number[];
}

export function escapeXml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&apos;");
}

function round(value: number): string {
  return value.toFixed(1);
}

/** Renders clusters as boxes with member badges and labeled separators. */
export function renderGraph(
  doc: GraphDoc,
  layout: Layout,
  options: RenderOptions = {},
): string {
  const width = options.width ?? 800;
  const height = options.height ?? 600;
  const dirty = new Set(options.dirty ?? []);
  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${width} ${height}" ` +
      `class="graph-view" role="img">`,
  );

  for (const edge of doc.edges) {
    const a = layout.get(edge.a);
    const b = layout.get(edge.b);
    if (!a || !b) continue;
    const mx = (a.x + b.x) / 2;
    const my = (a.y + b.y) / 2;
    const label = [...edge.separator].sort().join(", ");
    parts.push(
      `<line class="edge" x1="${round(a.x)}" y1="${round(a.y)}" ` +
        `x2="${round(b.x)}" y2="${round(b.y)}" />`,
    );
    parts.push(
      `<text class="separator" x="${round(mx)}" y="${round(my - 4)}" ` +
        `text-anchor="middle">{${escapeXml(label)}}</text>`,
    );
  }

  const clusters = [...doc.clusters].sort((a, b) => a.id - b.id);
  for (const cluster of clusters) {
    const pos = layout.get(cluster.id);
    if (!pos) continue;
    const members = [...cluster.members].sort();
    const family = new Set(cluster.family_vars);
    const boxWidth = Math.max(56, 18 + members.length * 16);
    const boxHeight = 40;
    const x = pos.x - boxWidth / 2;
    const y = pos.y - boxHeight / 2;
    const classes = ["cluster"];
    if (options.selection === cluster.id) classes.push("selected");
    if (dirty.has(cluster.id)) classes.push("dirty");
    parts.push(
      `<g class="${classes.join(" ")}" data-cluster="${cluster.id}">`,
    );
    parts.push(
      `<rect x="${round(x)}" y="${round(y)}" width="${boxWidth}" ` +
        `height="${boxHeight}" rx="8" />`,
    );
    parts.push(
      `<text class="cluster-id" x="${round(pos.x)}" y="${round(y - 5)}" ` +
        `text-anchor="middle">#${cluster.id}</text>`,
    );
    const badges = members
      .map((m) => {
        const badgeClass = family.has(m) ? "member family" : "member";
        return `<tspan class="${badgeClass}"> ${escapeXml(m)} </tspan>`;
      })
      .join("");
    parts.push(
      `<text class="members" x="${round(pos.x)}" y="${round(pos.y + 5)}" ` +
        `text-anchor="middle">${badges}</text>`,
    );
    parts.push("</g>");
  }

  parts.push("</svg>");
  return parts.join("\n");
}

/** Renders the cost series as a sparkline with first/last value labels. */
export function renderCostHistory(
  series: number[],
  width = 320,
  height = 64,
): string {
  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${width} ${height}" ` +
      `class="cost-history" role="img">`,
  );
  if (series.length > 0) {
    const min = Math.min(...series);
    const max = Math.max(...series);
    const span = max - min || 1;
    const pad = 10;
    const step =
      series.length > 1 ? (width - 2 * pad) / (series.length - 1) : 0;
    const points = series
      .map((value, i) => {
        const x = pad + i * step;
        const y = height - pad - ((value - min) / span) * (height - 2 * pad);
        return `${round(x)},${round(y)}`;
      })
      .join(" ");
    parts.push(`<polyline class="cost-line" points="${points}" />`);
    const last = series[series.length - 1];
    parts.push(
      `<text class="cost-label" x="${width - pad}" y="12" ` +
        `text-anchor="end">${last}</text>`,
    );
  }
  parts.push("</svg>");
  return parts.join("\n");
}
