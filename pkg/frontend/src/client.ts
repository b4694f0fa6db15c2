// Agent-facing adapter over the environment wire protocol.
//
// RemoteEnv mirrors the usual reset/step environment interface: reset gives
// [observation, info], step gives [observation, reward, terminated,
// truncated, info].  Observations arrive row-major and are only reshaped to
// the advertised matrix; no value is transformed, so a remote episode is
// bit-identical to an in-process one for the same seed and actions.

import {
  parseResponse,
  type Request,
  type Response,
  type SpecResponse,
  type StateInfo,
  type StateResponse,
} from "./messages.js";
import { SocketTransport, StdioTransport, type Transport } from "./transport.js";

export class ProtocolError extends Error {
  constructor(readonly code: string, message: string) {
    super(`${code}: ${message}`);
    this.name = "ProtocolError";
  }
}

export interface EnvSpec {
  obsRows: number;
  obsCols: number;
  actionCount: number;
}

export type SessionState = "idle" | "in-episode" | "closed";

export interface ConnectOptions {
  /** spawn the server as a child process in stdio mode */
  command?: { command: string; args?: string[] };
  /** or connect to a listening server */
  endpoint?: { host: string; port: number };
}

export type StepResult = [number[][], number, boolean, boolean, StateInfo];

export class RemoteEnv {
  readonly spec: EnvSpec;
  private state: SessionState = "idle";

  private constructor(private readonly transport: Transport, spec: EnvSpec) {
    this.spec = spec;
  }

  static async connect(options: ConnectOptions): Promise<RemoteEnv> {
    let transport: Transport;
    if (options.command) {
      transport = new StdioTransport(options.command.command, options.command.args ?? []);
    } else if (options.endpoint) {
      transport = await SocketTransport.connect(options.endpoint.host, options.endpoint.port);
    } else {
      throw new Error("connect needs either a command or an endpoint");
    }
    const reply = await roundTrip(transport, { type: "spec" });
    if (reply.type !== "spec") {
      await transport.close();
      throw new Error(`expected a spec response, got ${reply.type}`);
    }
    const spec = toEnvSpec(reply);
    return new RemoteEnv(transport, spec);
  }

  get sessionState(): SessionState {
    return this.state;
  }

  async reset(seed: number, scenario?: string): Promise<[number[][], StateInfo]> {
    this.ensureOpen();
    const request: Request = scenario === undefined
      ? { type: "reset", seed }
      : { type: "reset", seed, scenario };
    const reply = await this.exchange(request);
    const state = expectState(reply);
    this.state = "in-episode";
    return [this.reshape(state.observation), state.info];
  }

  async step(action: number): Promise<StepResult> {
    this.ensureOpen();
    if (!Number.isInteger(action) || action < 0 || action >= this.spec.actionCount) {
      throw new RangeError(
        `action ${action} outside [0, ${this.spec.actionCount})`,
      );
    }
    const reply = await this.exchange({ type: "step", action });
    const state = expectState(reply);
    if (state.truncated || state.terminated) {
      this.state = "idle";
    }
    if (state.reward === null) {
      throw new Error("step response carried no reward");
    }
    return [
      this.reshape(state.observation),
      state.reward,
      state.terminated,
      state.truncated,
      state.info,
    ];
  }

  async close(): Promise<void> {
    if (this.state === "closed") return;
    this.state = "closed";
    try {
      await this.exchange({ type: "close" });
    } catch {
      // the server may already be gone; closing is best-effort
    }
    await this.transport.close();
  }

  private ensureOpen(): void {
    if (this.state === "closed") {
      throw new Error("session is closed");
    }
  }

  private async exchange(request: Request): Promise<Response> {
    const reply = await roundTrip(this.transport, request);
    if (reply.type === "error") {
      throw new ProtocolError(reply.code, reply.message);
    }
    return reply;
  }

  private reshape(flat: number[]): number[][] {
    const { obsRows, obsCols } = this.spec;
    if (flat.length !== obsRows * obsCols) {
      throw new Error(
        `observation has ${flat.length} values, expected ${obsRows * obsCols}`,
      );
    }
    const rows: number[][] = [];
    for (let r = 0; r < obsRows; r++) {
      rows.push(flat.slice(r * obsCols, (r + 1) * obsCols));
    }
    return rows;
  }
}

async function roundTrip(transport: Transport, request: Request): Promise<Response> {
  const line = await transport.send(JSON.stringify(request));
  return parseResponse(line);
}

function toEnvSpec(reply: SpecResponse): EnvSpec {
  return {
    obsRows: reply.obs_rows,
    obsCols: reply.obs_cols,
    actionCount: reply.action_count,
  };
}

function expectState(reply: Response): StateResponse {
  if (reply.type !== "state") {
    throw new Error(`expected a state response, got ${reply.type}`);
  }
  return reply;
}
