export { RemoteEnv, ProtocolError } from "./client.js";
export type { ConnectOptions, EnvSpec, SessionState, StepResult } from "./client.js";
export { StdioTransport, SocketTransport } from "./transport.js";
export type { Transport } from "./transport.js";
export type {
  Request,
  Response,
  SpecResponse,
  StateResponse,
  StateInfo,
  ErrorResponse,
} from "./messages.js";
