/**
 * Types for the newline-JSON cluster-session protocol.
 *
 * Mirrors the documents the backend emits verbatim; the workbench never
 * invents fields of its own and never computes costs client-side.
 */

export const PROTOCOL_NAME = "cluster-session";
export const PROTOCOL_VERSION = 1;

export interface Banner {
  protocol: string;
  version: number;
}

export interface VariableDoc {
  id: string;
  cardinality: number;
}

export interface NetworkDoc {
  format: "belief-network";
  version: number;
  variables: VariableDoc[];
  arcs: [string, string][];
}

export interface ClusterDoc {
  id: number;
  members: string[];
  family_vars: string[];
}

export interface EdgeDoc {
  a: number;
  b: number;
  separator: string[];
}

export interface GraphDoc {
  format: "cluster-graph";
  version: number;
  network: NetworkDoc;
  clusters: ClusterDoc[];
  edges: EdgeDoc[];
  family_home: Record<string, number>;
  next_id: number;
}

export interface TraceEventDoc {
  kind: string;
  args: Record<string, unknown>;
  cost_delta: number;
}

/** Authoritative session summary attached to every successful response. */
export interface StateDoc {
  cost: number;
  edges_minus_clusters: number;
  multiply_connected: boolean;
  dirty: number[];
  event_count: number;
  undo_depth: number;
  graph: GraphDoc;
}

export interface Candidate {
  kind: string;
  args: Record<string, unknown>;
  cost_delta: number;
}

export interface CheckReportDoc {
  name: string;
  passed: boolean;
  witnesses: string[];
}

export interface OkResponse {
  ok: true;
  verb: string;
  id?: string | number;
  result: Record<string, unknown>;
  events: TraceEventDoc[];
  state: StateDoc;
}

export interface ErrorResponse {
  ok: false;
  verb?: string;
  id?: string | number;
  error: string;
}

export type Response = OkResponse | ErrorResponse;

export interface Request {
  verb: string;
  id?: string | number;
  [key: string]: unknown;
}

export function isBanner(doc: unknown): doc is Banner {
  return (
    typeof doc === "object" &&
    doc !== null &&
    typeof (doc as Banner).protocol === "string" &&
    typeof (doc as Banner).version === "number"
  );
}
