/**
 * Node-only transports used by the test suite and headless tooling.
 *
 * StdioTransport owns a spawned core process and talks over its pipes;
 * TcpTransport dials a serve --tcp listener.  Kept out of the browser
 * bundle (see tsconfig.browser.json).
 */

import { spawn, type ChildProcessWithoutNullStreams } from "node:child_process";
import { Socket } from "node:net";

import { LineBuffer, type Transport } from "./transport.js";

export class StdioTransport implements Transport {
  private child: ChildProcessWithoutNullStreams;
  private buffer = new LineBuffer();
  private lineHandler: (line: string) => void = () => undefined;
  private closeHandler: () => void = () => undefined;
  private closed = false;

  constructor(command: string, args: string[]) {
    this.child = spawn(command, args, { stdio: ["pipe", "pipe", "pipe"] });
    this.child.stdout.setEncoding("utf8");
    this.child.stdout.on("data", (chunk: string) => {
      this.buffer.push(chunk, (line) => this.lineHandler(line));
    });
    this.child.on("close", () => {
      if (!this.closed) {
        this.closed = true;
        this.closeHandler();
      }
    });
  }

  send(line: string): void {
    this.child.stdin.write(line.endsWith("\n") ? line : line + "\n");
  }

  onLine(handler: (line: string) => void): void {
    this.lineHandler = handler;
  }

  onClose(handler: () => void): void {
    this.closeHandler = handler;
  }

  close(): void {
    if (this.closed) return;
    this.closed = true;
    this.child.stdin.end();
    this.child.kill();
    this.closeHandler();
  }
}

export class TcpTransport implements Transport {
  private socket: Socket;
  private buffer = new LineBuffer();
  private lineHandler: (line: string) => void = () => undefined;
  private closeHandler: () => void = () => undefined;
  private closed = false;
  private readonly connected: Promise<void>;

  constructor(host: string, port: number) {
    this.socket = new Socket();
    this.socket.setEncoding("utf8");
    this.connected = new Promise((resolve, reject) => {
      this.socket.once("error", reject);
      this.socket.connect(port, host, () => resolve());
    });
    this.socket.on("data", (chunk: string) => {
      this.buffer.push(chunk, (line) => this.lineHandler(line));
    });
    this.socket.on("close", () => {
      if (!this.closed) {
        this.closed = true;
        this.closeHandler();
      }
    });
  }

  ready(): Promise<void> {
    return this.connected;
  }

  send(line: string): void {
    this.socket.write(line.endsWith("\n") ? line : line + "\n");
  }

  onLine(handler: (line: string) => void): void {
    this.lineHandler = handler;
  }

  onClose(handler: () => void): void {
    this.closeHandler = handler;
  }

  close(): void {
    if (this.closed) return;
    this.closed = true;
    this.socket.destroy();
    this.closeHandler();
  }
}
