/**
 * Line-oriented transports.
 *
 * A transport delivers whole JSON lines in order and reports when the
 * connection is gone.  The browser build uses the WebSocket transport
 * (behind any WS-to-stdio or WS-to-TCP bridge); the node transports for
 * tests and tooling live in transport_node.ts.
 */

export interface Transport {
  send(line: string): void;
  onLine(handler: (line: string) => void): void;
  onClose(handler: () => void): void;
  close(): void;
}

/** Splits a byte/text stream into complete lines, keeping the remainder. */
export class LineBuffer {
  private pending = "";

  push(chunk: string, emit: (line: string) => void): void {
    this.pending += chunk;
    let index = this.pending.indexOf("\n");
    while (index >= 0) {
      const line = this.pending.slice(0, index).trim();
      this.pending = this.pending.slice(index + 1);
      if (line.length > 0) emit(line);
      index = this.pending.indexOf("\n");
    }
  }
}

export class WebSocketTransport implements Transport {
  private socket: WebSocket;
  private buffer = new LineBuffer();
  private lineHandler: (line: string) => void = () => undefined;
  private closeHandler: () => void = () => undefined;

  constructor(url: string) {
    this.socket = new WebSocket(url);
    this.socket.addEventListener("message", (event) => {
      const data = typeof event.data === "string" ? event.data : "";
      // a frame may carry a partial line or several lines
      this.buffer.push(data.endsWith("\n") ? data : data + "\n", (line) =>
        this.lineHandler(line),
      );
    });
    this.socket.addEventListener("close", () => this.closeHandler());
    this.socket.addEventListener("error", () => this.closeHandler());
  }

  ready(): Promise<void> {
    if (this.socket.readyState === WebSocket.OPEN) return Promise.resolve();
    return new Promise((resolve, reject) => {
      this.socket.addEventListener("open", () => resolve(), { once: true });
      this.socket.addEventListener(
        "error",
        () => reject(new Error(`cannot reach ${this.socket.url}`)),
        { once: true },
      );
    });
  }

  send(line: string): void {
    this.socket.send(line.endsWith("\n") ? line : line + "\n");
  }

  onLine(handler: (line: string) => void): void {
    this.lineHandler = handler;
  }

  onClose(handler: () => void): void {
    this.closeHandler = handler;
  }

  close(): void {
    this.socket.close();
  }
}
