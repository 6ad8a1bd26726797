/**
 * Workbench session: a thin, serialized client for one core session.
 *
 * The core owns all authoritative state.  Every view field shown to the
 * user is copied verbatim from a core response; costs are never computed
 * on this side.  Each user action maps to exactly one protocol message,
 * requests are serialized (one in flight), and rendering is pessimistic:
 * nothing changes until the confirming response arrives.
 */

import {
  PROTOCOL_NAME,
  PROTOCOL_VERSION,
  isBanner,
  type Banner,
  type Candidate,
  type CheckReportDoc,
  type ErrorResponse,
  type NetworkDoc,
  type OkResponse,
  type Response,
  type StateDoc,
  type TraceEventDoc,
} from "./protocol.js";
import type { Transport } from "./transport.js";

/** One confirmed point on the timeline: the core's state after a verb. */
export interface Snapshot {
  label: string;
  state: StateDoc;
}

export type Mode = "live" | "replay";

export interface Selection {
  cluster: number | null;
  candidate: number | null;
}

/** Everything the UI renders.  Derived from core responses, never edited. */
export interface ViewState {
  mode: Mode;
  /** Cost of the state at the timeline position (core-reported). */
  cost: number | null;
  /** Core state doc at the timeline position. */
  state: StateDoc | null;
  /** Latest confirmed core state, regardless of scrub position. */
  liveState: StateDoc | null;
  timelineIndex: number;
  timelineLength: number;
  atLatest: boolean;
  label: string;
  candidates: Candidate[];
  candidatesTotal: number;
  /** False once the session advanced past the enumeration point. */
  candidatesFresh: boolean;
  costHistory: number[];
  trace: TraceEventDoc[];
  checks: CheckReportDoc[] | null;
  selection: Selection;
  lastError: string | null;
}

export type ApplyOutcome =
  | { sent: false; reason: "stale" | "replay" }
  | { sent: true; response: Response };

export interface SessionOptions {
  /** Reject a request that gets no response within this window. */
  requestTimeoutMs?: number;
  /** Server-side cap passed with every applicable request. */
  applicableLimit?: number;
}

interface PendingRequest {
  id: number;
  resolve: (response: Response) => void;
  reject: (error: Error) => void;
  timer: ReturnType<typeof setTimeout>;
}

const MUTATING_VERBS = new Set([
  "load",
  "apply",
  "edit",
  "run-preset",
  "restore",
  "undo",
]);

export class WorkbenchSession {
  private readonly transport: Transport;
  private readonly timeoutMs: number;
  private readonly applicableLimit: number;

  private pending: PendingRequest[] = [];
  private tail: Promise<unknown> = Promise.resolve();
  private nextId = 1;

  private banner: Banner | null = null;
  private bannerWaiter: ((banner: Banner) => void) | null = null;

  private mode: Mode = "live";
  private snapshots: Snapshot[] = [];
  private scrub: number | null = null; // null = follow latest
  private trace: TraceEventDoc[] = [];
  private candidates: Candidate[] = [];
  private candidatesTotal = 0;
  private candidateEpoch: number | null = null;
  private checks: CheckReportDoc[] | null = null;
  private selection: Selection = { cluster: null, candidate: null };
  private lastError: string | null = null;
  private listeners: Array<(view: ViewState) => void> = [];

  constructor(transport: Transport, options: SessionOptions = {}) {
    this.transport = transport;
    this.timeoutMs = options.requestTimeoutMs ?? 30000;
    this.applicableLimit = options.applicableLimit ?? 20;
    transport.onLine((line) => this.handleLine(line));
    transport.onClose(() => this.handleClose());
  }

  /** Waits for the banner and verifies protocol name and version. */
  async connect(): Promise<Banner> {
    const banner =
      this.banner ??
      (await new Promise<Banner>((resolve, reject) => {
        const timer = setTimeout(
          () => reject(new Error("handshake: no banner received")),
          this.timeoutMs,
        );
        this.bannerWaiter = (b) => {
          clearTimeout(timer);
          resolve(b);
        };
      }));
    if (banner.protocol !== PROTOCOL_NAME || banner.version !== PROTOCOL_VERSION) {
      this.transport.close();
      throw new Error(
        `protocol mismatch: expected ${PROTOCOL_NAME} v${PROTOCOL_VERSION}, ` +
          `got ${banner.protocol} v${banner.version}`,
      );
    }
    return banner;
  }

  onChange(listener: (view: ViewState) => void): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  view(): ViewState {
    const index = this.timelineIndex();
    const snapshot = index >= 0 ? this.snapshots[index] : null;
    const live =
      this.snapshots.length > 0
        ? this.snapshots[this.snapshots.length - 1].state
        : null;
    return {
      mode: this.mode,
      cost: snapshot ? snapshot.state.cost : null,
      state: snapshot ? snapshot.state : null,
      liveState: live,
      timelineIndex: index,
      timelineLength: this.snapshots.length,
      atLatest: this.scrub === null || index === this.snapshots.length - 1,
      label: snapshot ? snapshot.label : "",
      candidates: this.candidates.slice(),
      candidatesTotal: this.candidatesTotal,
      candidatesFresh:
        this.candidateEpoch !== null &&
        live !== null &&
        this.candidateEpoch === live.event_count,
      costHistory: this.snapshots.map((s) => s.state.cost),
      trace: this.trace.slice(),
      checks: this.checks,
      selection: { ...this.selection },
      lastError: this.lastError,
    };
  }

  /** Moves the timeline cursor; view-only, sends nothing. */
  scrubTo(index: number): void {
    if (this.snapshots.length === 0) return;
    const clamped = Math.max(0, Math.min(index, this.snapshots.length - 1));
    this.scrub = clamped === this.snapshots.length - 1 ? null : clamped;
    this.notify();
  }

  goLive(): void {
    this.scrub = null;
    this.notify();
  }

  selectCluster(id: number | null): void {
    this.selection = { ...this.selection, cluster: id };
    this.notify();
  }

  selectCandidate(index: number | null): void {
    this.selection = { ...this.selection, candidate: index };
    this.notify();
  }

  async loadNetwork(
    network: NetworkDoc,
    config?: Record<string, unknown>,
  ): Promise<Response> {
    const body: Record<string, unknown> = { verb: "load", network };
    if (config) body.config = config;
    const response = await this.request(body);
    if (response.ok) {
      // a new document starts a new timeline
      this.snapshots = [];
      this.trace = [];
      this.candidates = [];
      this.candidatesTotal = 0;
      this.candidateEpoch = null;
      this.checks = null;
      this.selection = { cluster: null, candidate: null };
      this.absorb("load", response);
    }
    return response;
  }

  async refreshApplicable(kinds?: string[]): Promise<Response> {
    const body: Record<string, unknown> = {
      verb: "applicable",
      limit: this.applicableLimit,
    };
    if (kinds) body.kinds = kinds;
    const response = await this.request(body);
    if (response.ok) {
      const result = response.result as {
        candidates: Candidate[];
        total: number;
      };
      this.candidates = result.candidates;
      this.candidatesTotal = result.total;
      this.candidateEpoch = response.state.event_count;
      this.selection = { ...this.selection, candidate: null };
      this.absorb("applicable", response);
    }
    return response;
  }

  /**
   * Applies a candidate from the latest applicable response.  If the
   * session advanced since that enumeration the candidate is stale: the
   * caller gets a refusal and no message is sent.
   */
  async applySelected(candidate: Candidate): Promise<ApplyOutcome> {
    if (this.mode === "replay") return { sent: false, reason: "replay" };
    const live =
      this.snapshots.length > 0
        ? this.snapshots[this.snapshots.length - 1].state
        : null;
    const key = candidateKey(candidate);
    const fromLatest =
      this.candidateEpoch !== null &&
      live !== null &&
      this.candidateEpoch === live.event_count &&
      this.candidates.some((c) => candidateKey(c) === key);
    if (!fromLatest) return { sent: false, reason: "stale" };
    const response = await this.request({
      verb: "apply",
      op: { kind: candidate.kind, args: candidate.args },
    });
    if (response.ok) this.absorb(`apply ${candidate.kind}`, response);
    return { sent: true, response };
  }

  async runPreset(preset?: string, seed?: number): Promise<Response> {
    const body: Record<string, unknown> = { verb: "run-preset" };
    if (preset !== undefined) body.preset = preset;
    if (seed !== undefined) body.seed = seed;
    const response = await this.request(body);
    if (response.ok) this.absorb(`run-preset ${preset ?? ""}`.trim(), response);
    return response;
  }

  async undoLast(): Promise<Response> {
    const response = await this.request({ verb: "undo" });
    if (response.ok) this.absorb("undo", response);
    return response;
  }

  async restore(): Promise<Response> {
    const response = await this.request({ verb: "restore" });
    if (response.ok) this.absorb("restore", response);
    return response;
  }

  async edit(
    action: string,
    fields: Record<string, unknown>,
  ): Promise<Response> {
    const response = await this.request({ verb: "edit", action, ...fields });
    if (response.ok) this.absorb(`edit ${action}`, response);
    return response;
  }

  async runChecks(names?: string[]): Promise<Response> {
    const body: Record<string, unknown> = { verb: "check" };
    if (names) body.checks = names;
    const response = await this.request(body);
    if (response.ok) {
      const result = response.result as { reports: CheckReportDoc[] };
      this.checks = result.reports;
      this.absorb("check", response);
    }
    return response;
  }

  disconnect(): void {
    this.transport.close();
  }

  private timelineIndex(): number {
    if (this.snapshots.length === 0) return -1;
    return this.scrub === null ? this.snapshots.length - 1 : this.scrub;
  }

  /** Folds a confirmed response into the local record of core states. */
  private absorb(label: string, response: OkResponse): void {
    this.lastError = null;
    for (const event of response.events) this.trace.push(event);
    // the core's event count is the journal length; undo and load shrink it
    if (this.trace.length > response.state.event_count) {
      this.trace = this.trace.slice(0, response.state.event_count);
    }
    if (MUTATING_VERBS.has(response.verb)) {
      this.snapshots.push({ label, state: response.state });
      this.scrub = null; // a confirmed change snaps the view back to live
    }
    this.notify();
  }

  private request(body: Record<string, unknown>): Promise<Response> {
    const run = this.tail.then(() => this.dispatch(body));
    this.tail = run.catch(() => undefined);
    return run;
  }

  private dispatch(body: Record<string, unknown>): Promise<Response> {
    if (this.mode === "replay") {
      return Promise.reject(
        new Error("disconnected: session is in replay mode"),
      );
    }
    const id = this.nextId++;
    const line = JSON.stringify({ ...body, id });
    return new Promise<Response>((resolve, reject) => {
      const timer = setTimeout(() => {
        this.pending = this.pending.filter((p) => p.id !== id);
        reject(new Error(`timeout waiting for ${String(body.verb)} response`));
      }, this.timeoutMs);
      this.pending.push({
        id,
        resolve: (response) => {
          clearTimeout(timer);
          if (!response.ok) {
            this.lastError = (response as ErrorResponse).error;
            this.notify();
          }
          resolve(response);
        },
        reject: (error) => {
          clearTimeout(timer);
          reject(error);
        },
        timer,
      });
      this.transport.send(line);
    });
  }

  private handleLine(line: string): void {
    let doc: unknown;
    try {
      doc = JSON.parse(line);
    } catch {
      return; // not a protocol line; ignore
    }
    if (isBanner(doc)) {
      this.banner = doc;
      if (this.bannerWaiter) {
        const waiter = this.bannerWaiter;
        this.bannerWaiter = null;
        waiter(doc);
      }
      return;
    }
    const response = doc as Response;
    const id = (doc as { id?: unknown }).id;
    let index = 0;
    if (typeof id === "number") {
      index = this.pending.findIndex((p) => p.id === id);
      if (index < 0) return; // response to a request we gave up on
    }
    const [entry] = this.pending.splice(index, 1);
    if (entry) entry.resolve(response);
  }

  private handleClose(): void {
    if (this.mode === "replay") return;
    this.mode = "replay";
    for (const entry of this.pending) {
      clearTimeout(entry.timer);
      entry.reject(new Error("connection closed"));
    }
    this.pending = [];
    this.notify();
  }

  private notify(): void {
    const view = this.view();
    for (const listener of this.listeners) listener(view);
  }
}

function candidateKey(candidate: Candidate): string {
  return `${candidate.kind}:${JSON.stringify(candidate.args)}`;
}
