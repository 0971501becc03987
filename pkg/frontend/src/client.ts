// Line-delimited socket client for `aspdbg debug --serve PORT`.
//
// The engine sends newline-delimited JSON messages.  After the greeting
// (hello, ground_report) every state batch is diagnosis + queries, plus a
// finding message when the status is no longer open.  Answers and undos
// are acknowledged with a state batch; invalid input gets a single error
// reply; stop gets bye.

import * as net from "node:net";

import {
  ClientMessage,
  DiagnosisMessage,
  EngineMessage,
  ProtocolError,
  parseEngineLine,
  serializeClientMessage,
} from "./protocol.js";

const DEFAULT_TIMEOUT_MS = 15000;

export class LineSocket {
  private buffer = "";
  private lines: string[] = [];
  private waiters: {
    resolve: (line: string) => void;
    reject: (error: Error) => void;
    timer: NodeJS.Timeout;
  }[] = [];
  private ended = false;

  constructor(private readonly socket: net.Socket) {
    socket.setEncoding("utf8");
    socket.on("data", (chunk: string) => this.onData(chunk));
    socket.on("close", () => this.onEnd(new Error("connection closed")));
    socket.on("error", (error: Error) => this.onEnd(error));
  }

  private onData(chunk: string): void {
    this.buffer += chunk;
    let index;
    while ((index = this.buffer.indexOf("\n")) >= 0) {
      this.lines.push(this.buffer.slice(0, index));
      this.buffer = this.buffer.slice(index + 1);
    }
    this.drain();
  }

  private onEnd(error: Error): void {
    this.ended = true;
    const waiters = this.waiters;
    this.waiters = [];
    for (const waiter of waiters) {
      clearTimeout(waiter.timer);
      waiter.reject(error);
    }
  }

  private drain(): void {
    while (this.lines.length > 0 && this.waiters.length > 0) {
      const waiter = this.waiters.shift()!;
      clearTimeout(waiter.timer);
      waiter.resolve(this.lines.shift()!);
    }
  }

  nextLine(timeoutMs = DEFAULT_TIMEOUT_MS): Promise<string> {
    const queued = this.lines.shift();
    if (queued !== undefined) {
      return Promise.resolve(queued);
    }
    if (this.ended) {
      return Promise.reject(new Error("connection closed"));
    }
    return new Promise((resolve, reject) => {
      const timer = setTimeout(() => {
        this.waiters = this.waiters.filter((w) => w.timer !== timer);
        reject(new Error(`timed out after ${timeoutMs}ms waiting for a line`));
      }, timeoutMs);
      this.waiters.push({ resolve, reject, timer });
    });
  }

  writeLine(line: string): void {
    this.socket.write(line + "\n");
  }

  end(): void {
    this.socket.end();
  }

  destroy(): void {
    this.socket.destroy();
  }
}

export class SessionClient {
  constructor(readonly socket: LineSocket) {}

  static connect(host: string, port: number): Promise<SessionClient> {
    return new Promise((resolve, reject) => {
      const socket = net.createConnection({ host, port });
      socket.once("connect", () => resolve(new SessionClient(new LineSocket(socket))));
      socket.once("error", reject);
    });
  }

  async readMessage(): Promise<EngineMessage> {
    return parseEngineLine(await this.socket.nextLine());
  }

  /** Read diagnosis + queries, plus the finding when status left open. */
  private async readStateBatch(first: EngineMessage): Promise<EngineMessage[]> {
    if (first.kind !== "diagnosis") {
      throw new ProtocolError(`expected diagnosis, got ${first.kind}`);
    }
    const diagnosis = first as DiagnosisMessage;
    const batch: EngineMessage[] = [diagnosis, await this.readMessage()];
    if (diagnosis.status !== "open") {
      batch.push(await this.readMessage());
    }
    return batch;
  }

  /** Read the greeting and the initial state batch. */
  async readStart(): Promise<EngineMessage[]> {
    const hello = await this.readMessage();
    const report = await this.readMessage();
    const batch = await this.readStateBatch(await this.readMessage());
    return [hello, report, ...batch];
  }

  /** Write one client message without waiting for the acknowledgement. */
  write(message: ClientMessage): void {
    this.socket.writeLine(serializeClientMessage(message));
  }

  /**
   * Read one acknowledgement: a state batch for answer/undo, a single
   * error reply for invalid input, bye for stop.  Acknowledgements arrive
   * in the order the client messages were written, so a batch of answers
   * can be written first and acknowledged one by one.
   */
  async readAck(): Promise<EngineMessage[]> {
    const first = await this.readMessage();
    if (first.kind === "error" || first.kind === "bye") {
      return [first];
    }
    return this.readStateBatch(first);
  }

  /** Write one client message and read its acknowledgement. */
  async send(message: ClientMessage): Promise<EngineMessage[]> {
    this.write(message);
    return this.readAck();
  }

  close(): void {
    this.socket.end();
  }
}
