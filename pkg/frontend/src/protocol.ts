// Wire types for the newline-delimited JSON session protocol spoken by
// `aspdbg debug --json` and `aspdbg debug --serve PORT`.  One JSON object
// per line; engine messages carry a monotonically increasing `seq`.

export interface Span {
  start: number;
  end: number;
  line: number;
  column: number;
}

export interface RuleEntry {
  id: number;
  text: string;
  span: Span | null;
}

export type SessionStatus = "open" | "localized" | "answers_inconsistent";

export interface RuleFindingPayload {
  type: "rule";
  rule_id: number;
  span: Span | null;
  substitutions: string[];
  instances: string[];
}

export interface UnsupportedFindingPayload {
  type: "unsupported";
  atom: string;
  candidate_rule_ids: number[];
}

export type FindingPayload = RuleFindingPayload | UnsupportedFindingPayload;

export interface AnswerEntry {
  atom: string;
  value: boolean;
}

export interface QueryEntry {
  atom: string;
  q_plus: number;
  q_minus: number;
  score: number;
}

export interface HelloMessage {
  kind: "hello";
  seq: number;
  program: string;
  test: string;
  rules: RuleEntry[];
  background: number[];
}

export interface GroundReportMessage {
  kind: "ground_report";
  seq: number;
  rules: number;
  atoms: number;
  assumptions: number;
  warnings: number[];
}

export interface DiagnosisMessage {
  kind: "diagnosis";
  seq: number;
  reason: string[];
  minimal: boolean;
  status: SessionStatus;
  findings: FindingPayload[];
  answers: AnswerEntry[];
}

export interface QueriesMessage {
  kind: "queries";
  seq: number;
  queries: QueryEntry[];
}

export interface FindingMessage {
  kind: "finding";
  seq: number;
  status: SessionStatus;
  message: string;
  findings: FindingPayload[];
}

export interface ErrorMessage {
  kind: "error";
  seq: number;
  ref: number | null;
  message: string;
}

export interface ByeMessage {
  kind: "bye";
  seq: number;
}

export type EngineMessage =
  | HelloMessage
  | GroundReportMessage
  | DiagnosisMessage
  | QueriesMessage
  | FindingMessage
  | ErrorMessage
  | ByeMessage;

export interface AnswerMessage {
  kind: "answer";
  seq: number;
  atom: string;
  value: boolean;
}

export interface UndoMessage {
  kind: "undo";
  seq: number;
  to_step: number;
}

export interface StopMessage {
  kind: "stop";
  seq: number;
}

export type ClientMessage = AnswerMessage | UndoMessage | StopMessage;
export type WireMessage = EngineMessage | ClientMessage;

const ENGINE_KINDS = new Set([
  "hello",
  "ground_report",
  "diagnosis",
  "queries",
  "finding",
  "error",
  "bye",
]);
const CLIENT_KINDS = new Set(["answer", "undo", "stop"]);

export class ProtocolError extends Error {}

function asRecord(value: unknown, what: string): Record<string, unknown> {
  if (typeof value !== "object" || value === null || Array.isArray(value)) {
    throw new ProtocolError(`${what}: not an object`);
  }
  return value as Record<string, unknown>;
}

export function parseLine(line: string): WireMessage {
  let raw: unknown;
  try {
    raw = JSON.parse(line);
  } catch (exc) {
    throw new ProtocolError(`malformed message: ${String(exc)}`);
  }
  const body = asRecord(raw, "malformed message");
  const kind = body["kind"];
  if (typeof kind !== "string" || (!ENGINE_KINDS.has(kind) && !CLIENT_KINDS.has(kind))) {
    throw new ProtocolError(`unknown message kind: ${JSON.stringify(kind)}`);
  }
  const seq = body["seq"];
  if (typeof seq !== "number" || !Number.isInteger(seq) || seq < 0) {
    throw new ProtocolError("missing or invalid seq");
  }
  return body as unknown as WireMessage;
}

export function parseEngineLine(line: string): EngineMessage {
  const message = parseLine(line);
  if (!isEngineMessage(message)) {
    throw new ProtocolError(`unexpected client message kind: ${message.kind}`);
  }
  return message;
}

export function isEngineMessage(message: WireMessage): message is EngineMessage {
  return ENGINE_KINDS.has(message.kind);
}

export function isClientMessage(message: WireMessage): message is ClientMessage {
  return CLIENT_KINDS.has(message.kind);
}

export function serializeClientMessage(message: ClientMessage): string {
  return JSON.stringify(message);
}
