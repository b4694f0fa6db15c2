// Wire protocol messages: newline-delimited JSON, one response per request.

export interface SpecRequest {
  type: "spec";
}

export interface ResetRequest {
  type: "reset";
  seed: number;
  scenario?: string;
}

export interface StepRequest {
  type: "step";
  action: number;
}

export interface CloseRequest {
  type: "close";
}

export type Request = SpecRequest | ResetRequest | StepRequest | CloseRequest;

export interface SpecResponse {
  type: "spec";
  obs_rows: number;
  obs_cols: number;
  action_count: number;
}

export interface StateInfo {
  clock: number;
  step: number;
  splits: Record<string, number>;
  queues: Record<string, number>;
  queues_raw: Record<string, number>;
  total_travel_time: number | null;
}

export interface StateResponse {
  type: "state";
  observation: number[];
  reward: number | null;
  terminated: boolean;
  truncated: boolean;
  info: StateInfo;
}

export interface ErrorResponse {
  type: "error";
  code: string;
  message: string;
}

export interface ClosedResponse {
  type: "closed";
}

export type Response = SpecResponse | StateResponse | ErrorResponse | ClosedResponse;

export function parseResponse(line: string): Response {
  let value: unknown;
  try {
    value = JSON.parse(line);
  } catch (err) {
    throw new Error(`server sent a non-JSON line: ${line}`);
  }
  const msg = value as { type?: string };
  if (
    msg &&
    (msg.type === "spec" || msg.type === "state" ||
      msg.type === "error" || msg.type === "closed")
  ) {
    return msg as Response;
  }
  throw new Error(`server sent an unknown message: ${line}`);
}
