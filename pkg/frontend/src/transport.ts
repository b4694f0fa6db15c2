// Line-oriented transports: a spawned server on stdio, or a TCP socket.
// Requests are strictly sequential (one in flight), matching the protocol's
// one-response-per-request contract.

import { spawn, type ChildProcess } from "node:child_process";
import { createConnection, type Socket } from "node:net";

export interface Transport {
  send(line: string): Promise<string>;
  close(): Promise<void>;
  readonly alive: boolean;
}

class LineBuffer {
  private buf = "";
  private readonly lines: string[] = [];
  private waiter: ((line: string) => void) | null = null;
  private failure: Error | null = null;

  push(chunk: string): void {
    this.buf += chunk;
    let idx;
    while ((idx = this.buf.indexOf("\n")) >= 0) {
      const line = this.buf.slice(0, idx);
      this.buf = this.buf.slice(idx + 1);
      if (line.trim().length === 0) continue;
      if (this.waiter) {
        const w = this.waiter;
        this.waiter = null;
        w(line);
      } else {
        this.lines.push(line);
      }
    }
  }

  fail(err: Error): void {
    this.failure = err;
    if (this.waiter) {
      const w = this.waiter;
      this.waiter = null;
      w(""); // unblock; next() rethrows the failure
    }
  }

  async next(): Promise<string> {
    const queued = this.lines.shift();
    if (queued !== undefined) return queued;
    if (this.failure) throw this.failure;
    if (this.waiter) throw new Error("concurrent reads are not supported");
    const line = await new Promise<string>((resolve) => {
      this.waiter = resolve;
    });
    if (this.failure) throw this.failure;
    return line;
  }
}

export class StdioTransport implements Transport {
  private readonly child: ChildProcess;
  private readonly buffer = new LineBuffer();
  alive = true;

  constructor(command: string, args: string[] = []) {
    this.child = spawn(command, args, { stdio: ["pipe", "pipe", "inherit"] });
    this.child.stdout!.setEncoding("utf8");
    this.child.stdout!.on("data", (chunk: string) => this.buffer.push(chunk));
    this.child.on("error", (err) => {
      this.alive = false;
      this.buffer.fail(err);
    });
    this.child.on("exit", () => {
      this.alive = false;
      this.buffer.fail(new Error("server process exited"));
    });
  }

  async send(line: string): Promise<string> {
    if (!this.alive) throw new Error("transport is closed");
    this.child.stdin!.write(line + "\n");
    return this.buffer.next();
  }

  async close(): Promise<void> {
    if (!this.alive) return;
    this.alive = false;
    this.child.stdin!.end();
    await new Promise<void>((resolve) => {
      const timer = setTimeout(() => {
        this.child.kill();
        resolve();
      }, 2000);
      this.child.once("exit", () => {
        clearTimeout(timer);
        resolve();
      });
    });
  }
}

export class SocketTransport implements Transport {
  private socket: Socket | null = null;
  private readonly buffer = new LineBuffer();
  alive = false;

  private constructor() {}

  static async connect(host: string, port: number, timeoutMs = 10_000): Promise<SocketTransport> {
    const transport = new SocketTransport();
    await new Promise<void>((resolve, reject) => {
      const socket = createConnection({ host, port });
      const timer = setTimeout(() => {
        socket.destroy();
        reject(new Error(`connection to ${host}:${port} timed out`));
      }, timeoutMs);
      socket.once("connect", () => {
        clearTimeout(timer);
        transport.socket = socket;
        transport.alive = true;
        socket.setEncoding("utf8");
        socket.on("data", (chunk: string) => transport.buffer.push(chunk));
        socket.on("close", () => {
          transport.alive = false;
          transport.buffer.fail(new Error("connection closed"));
        });
        resolve();
      });
      socket.once("error", (err) => {
        clearTimeout(timer);
        reject(err);
      });
    });
    return transport;
  }

  async send(line: string): Promise<string> {
    if (!this.alive || !this.socket) throw new Error("transport is closed");
    this.socket.write(line + "\n");
    return this.buffer.next();
  }

  async close(): Promise<void> {
    this.alive = false;
    this.socket?.end();
    this.socket?.destroy();
  }
}
